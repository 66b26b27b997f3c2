//! Plain-text grid files and CSV cell tables.
//!
//! A grid file is a sequence of keyword sections; numbers after a keyword may
//! continue onto following lines. `#` starts a comment.
//!
//! ```text
//! strong-weights-grid 1
//! dim 2
//! breaks 0  0 0.5 1          # axis 0
//! breaks 1  0 1 2 3          # axis 1
//! mass   0.25 0.25 0.25
//!        0.25 0.25 0.25
//! weight 1 2 3 4 5 6
//! source power 0.5           # optional, 1-d power weights only
//! ```
//!
//! Mass and weight arrays are row-major with the last axis fastest. Values
//! may be decimal or hexadecimal (`0x1.8p-3`) float literals; files written
//! by this module use shortest round-trip decimals. A file may hold only a
//! measure (`breaks` + `mass`) or only a weight (`shape` + `weight`).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{unravel, validate, GridMeasure, WeightGrid, WeightSource, WeightedGrid};
use crate::error::{Error, Result};

pub const MAGIC: &str = "strong-weights-grid";

#[derive(Clone, Debug, Default)]
pub struct GridFile {
    pub breaks: Option<Vec<Vec<f64>>>,
    pub mass: Option<Vec<f64>>,
    pub shape: Option<Vec<usize>>,
    pub weight: Option<Vec<f64>>,
    pub power_alpha: Option<f64>,
}

/// Parse a decimal or hexadecimal float literal.
pub fn parse_float(tok: &str) -> Option<f64> {
    let lower = tok.to_ascii_lowercase();
    if lower.contains("0x") {
        hexf_parse::parse_hexf64(tok, false).ok()
    } else {
        tok.parse().ok()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Breaks(usize),
    Mass,
    Weight,
    Shape,
}

pub fn parse_grid(text: &str, path: &Path) -> Result<GridFile> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = GridFile::default();
    let mut dim: Option<usize> = None;
    let mut breaks: Vec<Option<Vec<f64>>> = Vec::new();
    let mut mass = Vec::new();
    let mut weight = Vec::new();
    let mut shape = Vec::new();
    let mut seen_mass = false;
    let mut seen_weight = false;
    let mut section = Section::None;
    let mut saw_magic = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace().peekable();
        let first = *toks.peek().unwrap();
        if parse_float(first).is_none() {
            toks.next();
            match first {
                MAGIC => {
                    let version = toks.next().unwrap_or("");
                    if version != "1" {
                        return Err(err(
                            line,
                            format!("unsupported grid format version {version:?}"),
                        ));
                    }
                    saw_magic = true;
                    section = Section::None;
                    continue;
                }
                "dim" => {
                    let n: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line, "dim needs an integer".into()))?;
                    dim = Some(n);
                    breaks = vec![None; n];
                    section = Section::None;
                    continue;
                }
                "breaks" => {
                    let axis: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| err(line, "breaks needs an axis index".into()))?;
                    let n = dim.ok_or_else(|| err(line, "breaks before dim".into()))?;
                    if axis >= n {
                        return Err(err(line, format!("axis {axis} out of range for dim {n}")));
                    }
                    breaks[axis] = Some(Vec::new());
                    section = Section::Breaks(axis);
                }
                "mass" => {
                    seen_mass = true;
                    section = Section::Mass;
                }
                "weight" => {
                    seen_weight = true;
                    section = Section::Weight;
                }
                "shape" => section = Section::Shape,
                "source" => {
                    match (toks.next(), toks.next()) {
                        (Some("power"), Some(a)) => {
                            out.power_alpha = Some(
                                parse_float(a)
                                    .ok_or_else(|| err(line, format!("bad alpha {a:?}")))?,
                            )
                        }
                        (Some("tabulated"), None) => {}
                        _ => {
                            return Err(err(
                                line,
                                "source must be `power <alpha>` or `tabulated`".into(),
                            ))
                        }
                    }
                    section = Section::None;
                    continue;
                }
                other => return Err(err(line, format!("unknown keyword {other:?}"))),
            }
        }
        for tok in toks {
            match section {
                Section::None => return Err(err(line, format!("value {tok:?} outside a section"))),
                Section::Shape => shape.push(
                    tok.parse::<usize>()
                        .map_err(|_| err(line, format!("bad shape entry {tok:?}")))?,
                ),
                _ => {
                    let v =
                        parse_float(tok).ok_or_else(|| err(line, format!("bad number {tok:?}")))?;
                    match section {
                        Section::Breaks(axis) => breaks[axis].as_mut().unwrap().push(v),
                        Section::Mass => mass.push(v),
                        Section::Weight => weight.push(v),
                        _ => unreachable!(),
                    }
                }
            }
        }
    }

    if !saw_magic {
        return Err(err(1, format!("missing `{MAGIC} 1` header")));
    }
    if breaks.iter().any(Option::is_some) {
        let all: Option<Vec<Vec<f64>>> = breaks.into_iter().collect();
        out.breaks = Some(all.ok_or_else(|| err(0, "breakpoints missing for some axis".into()))?);
    }
    if seen_mass {
        out.mass = Some(mass);
    }
    if seen_weight {
        out.weight = Some(weight);
    }
    if !shape.is_empty() {
        out.shape = Some(shape);
    }
    Ok(out)
}

pub fn read_grid_file(path: &Path) -> Result<GridFile> {
    let text = fs::read_to_string(path)?;
    parse_grid(&text, path)
}

fn missing(path: &Path, what: &str) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("file has no {what} section"),
    }
}

fn measure_from(file: &GridFile, path: &Path) -> Result<GridMeasure> {
    let breaks = file.breaks.clone().ok_or_else(|| missing(path, "breaks"))?;
    let mass = file.mass.clone().ok_or_else(|| missing(path, "mass"))?;
    GridMeasure::new(breaks, mass)
}

fn weight_from(file: &GridFile, path: &Path, fallback_shape: &[usize]) -> Result<WeightGrid> {
    let values = file.weight.clone().ok_or_else(|| missing(path, "weight"))?;
    let shape = file
        .shape
        .clone()
        .unwrap_or_else(|| fallback_shape.to_vec());
    let w = WeightGrid::new(shape, values)?;
    Ok(match file.power_alpha {
        Some(alpha) => w.with_source(WeightSource::Power { alpha }),
        None => w,
    })
}

/// Load a measure and a weight, possibly from the same file, and validate.
pub fn read_weighted_grid(measure_path: &Path, weight_path: &Path) -> Result<WeightedGrid> {
    let mfile = read_grid_file(measure_path)?;
    let measure = measure_from(&mfile, measure_path)?;
    let weight = if measure_path == weight_path {
        weight_from(&mfile, weight_path, measure.shape())?
    } else {
        let wfile = read_grid_file(weight_path)?;
        weight_from(&wfile, weight_path, measure.shape())?
    };
    validate(measure, weight)
}

pub fn read_grid(path: &Path) -> Result<WeightedGrid> {
    read_weighted_grid(path, path)
}

fn push_values(out: &mut String, key: &str, values: &[f64], per_line: usize) {
    out.push_str(key);
    for (i, v) in values.iter().enumerate() {
        if i > 0 && i % per_line == 0 {
            out.push('\n');
            out.push_str(&" ".repeat(key.len()));
        }
        write!(out, " {v:?}").unwrap();
    }
    out.push('\n');
}

pub fn format_grid(grid: &WeightedGrid, header_comments: &[String]) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} 1").unwrap();
    for c in header_comments {
        writeln!(out, "# {c}").unwrap();
    }
    let m = grid.measure();
    writeln!(out, "dim {}", m.dim()).unwrap();
    for (axis, b) in m.breaks().iter().enumerate() {
        push_values(&mut out, &format!("breaks {axis}"), b, 8);
    }
    let per_line = *m.shape().last().unwrap();
    let per_line = per_line.clamp(1, 8);
    push_values(&mut out, "mass", m.mass(), per_line);
    push_values(&mut out, "weight", grid.weight().values(), per_line);
    if let WeightSource::Power { alpha } = grid.weight().source() {
        writeln!(out, "source power {alpha:?}").unwrap();
    }
    out
}

/// Write `contents` next to `path` and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    // temp files are created owner-only; outputs get ordinary permissions
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_grid(path: &Path, grid: &WeightedGrid, header_comments: &[String]) -> Result<()> {
    write_atomic(path, format_grid(grid, header_comments).as_bytes())
}

/// One CSV row per cell: indices, cell bounds per axis, mass, weight.
pub fn cell_table_csv(grid: &WeightedGrid) -> Result<String> {
    let m = grid.measure();
    let n = m.dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..n).map(|a| format!("i{a}")).collect();
    for a in 0..n {
        header.push(format!("lo{a}"));
        header.push(format!("hi{a}"));
    }
    header.push("mass".into());
    header.push("weight".into());
    w.write_record(&header)?;
    for flat in 0..m.cell_count() {
        let idx = unravel(flat, m.shape());
        let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        for (a, &i) in idx.iter().enumerate() {
            row.push(format!("{:?}", m.breaks()[a][i]));
            row.push(format!("{:?}", m.breaks()[a][i + 1]));
        }
        row.push(format!("{:?}", m.mass()[flat]));
        row.push(format!("{:?}", grid.weight().values()[flat]));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
