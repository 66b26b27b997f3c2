use std::path::Path;

use super::table::TableCandidate;
use super::AvgPoint;
use crate::error::{Error, Result};
use crate::exponents::{ClassKind, PParam};

/// Parameters a candidate was built for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateMeta {
    pub class: ClassKind,
    pub p: f64,
    pub r: f64,
    pub q: f64,
}

/// Closed box in `(ln x1, ln x2)`; also a box in `(x1, x2)`, hence convex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LnBox {
    pub ln_x1: (f64, f64),
    pub ln_x2: (f64, f64),
}

impl LnBox {
    pub fn unbounded() -> Self {
        LnBox {
            ln_x1: (f64::NEG_INFINITY, f64::INFINITY),
            ln_x2: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn contains(&self, x: AvgPoint) -> bool {
        let (a, b) = (x.x1.ln(), x.x2.ln());
        self.ln_x1.0 <= a && a <= self.ln_x1.1 && self.ln_x2.0 <= b && b <= self.ln_x2.1
    }
}

/// A function on average pairs, tested against the Bellman hypotheses.
///
/// Evaluation must be a pure function of the point; `None` means undefined.
pub trait BellmanCandidate: Send + Sync {
    fn eval(&self, x: AvgPoint) -> Option<f64>;
    fn meta(&self) -> CandidateMeta;
    /// Short description, e.g. `builtin:linear` or the table path.
    fn label(&self) -> String;
    fn support(&self) -> LnBox {
        LnBox::unbounded()
    }
}

/// `B(x) = x1` (linear) or `B(x) = x1^r` (power).
#[derive(Clone, Copy, Debug)]
pub struct Builtin {
    meta: CandidateMeta,
    linear: bool,
}

impl Builtin {
    pub fn linear(class: ClassKind, p: PParam, q: f64) -> Self {
        Builtin {
            meta: CandidateMeta {
                class,
                p: p.p(),
                r: 1.0,
                q,
            },
            linear: true,
        }
    }

    pub fn power(class: ClassKind, p: PParam, q: f64, r: f64) -> Self {
        Builtin {
            meta: CandidateMeta {
                class,
                p: p.p(),
                r,
                q,
            },
            linear: false,
        }
    }
}

impl BellmanCandidate for Builtin {
    fn eval(&self, x: AvgPoint) -> Option<f64> {
        if self.linear {
            Some(x.x1)
        } else {
            Some(x.x1.powf(self.meta.r))
        }
    }

    fn meta(&self) -> CandidateMeta {
        self.meta
    }

    fn label(&self) -> String {
        if self.linear {
            "builtin:linear".into()
        } else {
            format!("builtin:power:{}", self.meta.r)
        }
    }
}

/// `builtin:linear`, `builtin:power:<r>`, or a path to a table file.
///
/// Built-ins take their metadata from the arguments; tables carry their own.
pub fn parse_candidate(
    spec: &str,
    class: ClassKind,
    p: PParam,
    q: f64,
) -> Result<Box<dyn BellmanCandidate>> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        if rest == "linear" {
            return Ok(Box::new(Builtin::linear(class, p, q)));
        }
        if let Some(r) = rest.strip_prefix("power:") {
            let r: f64 = r
                .parse()
                .map_err(|_| Error::pre(format!("bad exponent in candidate spec {spec:?}")))?;
            return Ok(Box::new(Builtin::power(class, p, q, r)));
        }
        return Err(Error::pre(format!(
            "unknown built-in candidate {spec:?} (expected builtin:linear or builtin:power:<r>)"
        )));
    }
    Ok(Box::new(TableCandidate::read(Path::new(spec))?))
}
