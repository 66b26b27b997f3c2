//! Tabulated candidates on a log-spaced lattice.
//!
//! ```text
//! bellman-table v1
//! class ap
//! p 2
//! r 1.2
//! Q 2
//! axis ln_x1 -4.6 0.7 200      # min max count
//! axis ln_x2 -0.7 5.3 240
//! values
//! <count(ln_x1) rows of count(ln_x2) numbers; NaN = undefined>
//! ```
//!
//! Node `(i, j)` sits at `x1 = exp(ln_x1 min + i·h1)`, `x2 = exp(ln_x2 min + j·h2)`.
//! Between nodes the value is bilinear in `(x1, x2)` themselves, so a table of
//! a separable concave function is concave along every segment up to
//! rounding. A query touching a NaN node is undefined.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::candidate::{BellmanCandidate, CandidateMeta, LnBox};
use super::AvgPoint;
use crate::error::{Error, Result};
use crate::exponents::ClassKind;
use crate::grid::io::{parse_float, write_atomic};

pub const MAGIC: &str = "bellman-table v1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LnAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl LnAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max && count >= 2) {
            return Err(Error::pre(format!(
                "lattice axis needs finite min < max and count >= 2, got {min} {max} {count}"
            )));
        }
        Ok(LnAxis { min, max, count })
    }

    fn nodes(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max.exp()
                } else {
                    (self.min + i as f64 * h).exp()
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct TableCandidate {
    meta: CandidateMeta,
    axis1: LnAxis,
    axis2: LnAxis,
    nodes1: Vec<f64>,
    nodes2: Vec<f64>,
    /// Row-major, `x2` fastest.
    values: Vec<f64>,
    label: String,
}

/// Cell index and linear weight of `x` within sorted `nodes`.
#[inline]
fn locate(nodes: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = nodes.len();
    if !(x >= nodes[0] && x <= nodes[n - 1]) {
        return None;
    }
    let i = nodes.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    Some((i, t))
}

impl TableCandidate {
    pub fn new(
        meta: CandidateMeta,
        axis1: LnAxis,
        axis2: LnAxis,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != axis1.count * axis2.count {
            return Err(Error::pre(format!(
                "table holds {} values, lattice needs {}",
                values.len(),
                axis1.count * axis2.count
            )));
        }
        Ok(TableCandidate {
            meta,
            nodes1: axis1.nodes(),
            nodes2: axis2.nodes(),
            axis1,
            axis2,
            values,
            label: "table".into(),
        })
    }

    /// Sample `f` at every lattice node.
    pub fn tabulate(
        meta: CandidateMeta,
        axis1: LnAxis,
        axis2: LnAxis,
        f: impl Fn(AvgPoint) -> f64,
    ) -> Result<Self> {
        let n1 = axis1.nodes();
        let n2 = axis2.nodes();
        let mut values = Vec::with_capacity(n1.len() * n2.len());
        for &x1 in &n1 {
            for &x2 in &n2 {
                values.push(f(AvgPoint::new(x1, x2)));
            }
        }
        Self::new(meta, axis1, axis2, values)
    }

    pub fn axes(&self) -> (LnAxis, LnAxis) {
        (self.axis1, self.axis2)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            Some((n, l)) => return Err(err(n, format!("expected header {MAGIC:?}, found {l:?}"))),
            None => return Err(err(1, "empty file".into())),
        }

        let (mut class, mut p, mut r, mut q) = (None, None, None, None);
        let (mut ax1, mut ax2) = (None, None);
        let mut values = Vec::new();
        let mut in_values = false;

        for (n, line) in lines {
            if in_values {
                for tok in line.split_whitespace() {
                    values.push(
                        parse_float(tok).ok_or_else(|| err(n, format!("bad number {tok:?}")))?,
                    );
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<f64> {
                let tok = toks
                    .get(i)
                    .ok_or_else(|| err(n, format!("missing value after {}", toks[0])))?;
                parse_float(tok).ok_or_else(|| err(n, format!("bad number {tok:?}")))
            };
            match toks[0] {
                "class" => {
                    let c: ClassKind = toks
                        .get(1)
                        .ok_or_else(|| err(n, "missing class".into()))?
                        .parse()
                        .map_err(|e: Error| err(n, e.to_string()))?;
                    class = Some(c);
                }
                "p" => p = Some(num(1)?),
                "r" => r = Some(num(1)?),
                "Q" => q = Some(num(1)?),
                "axis" => {
                    let name = toks.get(1).copied().unwrap_or("");
                    let count: usize = toks
                        .get(4)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(n, "axis needs: name min max count".into()))?;
                    let axis =
                        LnAxis::new(num(2)?, num(3)?, count).map_err(|e| err(n, e.to_string()))?;
                    match name {
                        "ln_x1" => ax1 = Some(axis),
                        "ln_x2" => ax2 = Some(axis),
                        other => return Err(err(n, format!("unknown axis {other:?}"))),
                    }
                }
                "values" => {
                    in_values = true;
                    for tok in &toks[1..] {
                        values.push(
                            parse_float(tok)
                                .ok_or_else(|| err(n, format!("bad number {tok:?}")))?,
                        );
                    }
                }
                other => return Err(err(n, format!("unknown keyword {other:?}"))),
            }
        }

        let missing = |what: &str| err(0, format!("missing {what}"));
        let meta = CandidateMeta {
            class: class.ok_or_else(|| missing("class"))?,
            p: p.ok_or_else(|| missing("p"))?,
            r: r.ok_or_else(|| missing("r"))?,
            q: q.ok_or_else(|| missing("Q"))?,
        };
        let mut t = TableCandidate::new(
            meta,
            ax1.ok_or_else(|| missing("axis ln_x1"))?,
            ax2.ok_or_else(|| missing("axis ln_x2"))?,
            values,
        )
        .map_err(|e| err(0, e.to_string()))?;
        t.label = path.display().to_string();
        Ok(t)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn format(&self, header_comments: &[String]) -> String {
        let mut out = String::new();
        let m = &self.meta;
        writeln!(out, "{MAGIC}").unwrap();
        for c in header_comments {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "class {}", m.class.label()).unwrap();
        writeln!(out, "p {:?}", m.p).unwrap();
        writeln!(out, "r {:?}", m.r).unwrap();
        writeln!(out, "Q {:?}", m.q).unwrap();
        for (name, a) in [("ln_x1", self.axis1), ("ln_x2", self.axis2)] {
            writeln!(out, "axis {name} {:?} {:?} {}", a.min, a.max, a.count).unwrap();
        }
        writeln!(out, "values").unwrap();
        for row in self.values.chunks(self.axis2.count) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path, header_comments: &[String]) -> Result<()> {
        write_atomic(path, self.format(header_comments).as_bytes())
    }
}

impl BellmanCandidate for TableCandidate {
    fn eval(&self, x: AvgPoint) -> Option<f64> {
        let (i, t) = locate(&self.nodes1, x.x1)?;
        let (j, u) = locate(&self.nodes2, x.x2)?;
        let m = self.axis2.count;
        let v00 = self.values[i * m + j];
        let v01 = self.values[i * m + j + 1];
        let v10 = self.values[(i + 1) * m + j];
        let v11 = self.values[(i + 1) * m + j + 1];
        let v = (1.0 - t) * ((1.0 - u) * v00 + u * v01) + t * ((1.0 - u) * v10 + u * v11);
        v.is_finite().then_some(v)
    }

    fn meta(&self) -> CandidateMeta {
        self.meta
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn support(&self) -> LnBox {
        LnBox {
            ln_x1: (self.axis1.min, self.axis1.max),
            ln_x2: (self.axis2.min, self.axis2.max),
        }
    }
}
