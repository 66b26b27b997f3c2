//! Command-line front end.
//!
//! Every file written here starts with `#` lines naming the tool version and
//! the full parameter set, and is written atomically. Exit status: 0 success,
//! 1 I/O, 2 precondition, 3 numeric failure, 4 infeasible split.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bellman::{
    aitken, classify_trend, parse_candidate, theorem_conclusion_check, verify_candidate,
    OmegaDomain, VerifyConfig,
};
use crate::characteristics::{q_scan, supremum, CharacteristicReport};
use crate::error::{Error, Result};
use crate::exponents::{extremal_alpha, sharp_range, Branch, ClassKind, PParam};
use crate::grid::io::{read_grid, read_weighted_grid, write_atomic, write_grid};
use crate::grid::{power_weight_grid, refine, validate, GridMeasure, WeightGrid, WeightedGrid};
use crate::splitting::{build_tree, SplitConfig};

/// Every default the commands use.
///
/// | name               | value                     |
/// |--------------------|---------------------------|
/// | `C`                | 0.2                       |
/// | `Q1_FACTOR`        | 1.05 (Q1 = 1.05·Q)        |
/// | `SEGMENT_SAMPLES`  | 257                       |
/// | `SEED`             | 0                         |
/// | `SEGMENTS`         | 2000                      |
/// | `STABILIZATION`    | 0.01                      |
/// | `REFINEMENTS`      | 256, 1024, 4096, 16384    |
pub mod defaults {
    pub const C: f64 = crate::splitting::DEFAULT_C;
    pub const Q1_FACTOR: f64 = crate::splitting::DEFAULT_Q1_FACTOR;
    pub const SEGMENT_SAMPLES: usize = crate::splitting::DEFAULT_SEGMENT_SAMPLES;
    pub const SEED: u64 = 0;
    pub const SEGMENTS: usize = 2000;
    pub const STABILIZATION: f64 = crate::bellman::STABILIZATION_TOL;
    pub const REFINEMENTS: [usize; 4] = [256, 1024, 4096, 16384];
}

pub const VERSION_LINE: &str = concat!("strong-weights ", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug)]
#[command(
    name = "strong-weights",
    version,
    about = "Strong Muckenhoupt / Reverse Hölder weight experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sharp exponent ranges implied by a characteristic bound.
    Exponents(ExponentsArgs),
    /// Box characteristic of a grid weight, optionally over a list of exponents.
    Characteristic(CharacteristicArgs),
    /// Write a fixture grid file.
    Generate(GenerateArgs),
    /// Refinement table for the extremal power weight at the critical and an inside exponent.
    Sharpness(SharpnessArgs),
    /// Recursive splitting trace.
    Split(SplitArgs),
    /// Test a Bellman candidate against the concavity/boundary/growth hypotheses.
    BellmanVerify(BellmanVerifyArgs),
    /// Refinement probe of a self-improvement conclusion.
    ConclusionCheck(ConclusionArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
}

#[derive(Args, Debug)]
pub struct ClassArgs {
    /// `ap` or `rh`
    #[arg(long)]
    pub class: ClassKind,
    #[arg(long)]
    pub p: f64,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Grid file holding both measure and weight.
    #[arg(long, conflicts_with_all = ["measure", "weight"])]
    pub grid: Option<PathBuf>,
    #[arg(long, requires = "weight")]
    pub measure: Option<PathBuf>,
    #[arg(long, requires = "measure")]
    pub weight: Option<PathBuf>,
}

impl GridArgs {
    fn load(&self) -> Result<WeightedGrid> {
        match (&self.grid, &self.measure, &self.weight) {
            (Some(g), _, _) => read_grid(g),
            (None, Some(m), Some(w)) => read_weighted_grid(m, w),
            _ => Err(Error::pre("give --grid, or both --measure and --weight")),
        }
    }

    fn describe(&self) -> String {
        match (&self.grid, &self.measure, &self.weight) {
            (Some(g), _, _) => format!("grid={}", g.display()),
            (None, Some(m), Some(w)) => format!("measure={} weight={}", m.display(), w.display()),
            _ => String::new(),
        }
    }
}

#[derive(Args, Debug)]
pub struct ExponentsArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long = "Q")]
    pub q: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CharacteristicArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also report the characteristic at these exponents.
    #[arg(long, value_delimiter = ',')]
    pub q_scan: Vec<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum FixtureKind {
    /// `x^alpha` on `[0,1]`, exact cell averages.
    Power,
    /// Constant weight on a uniform grid.
    Constant,
    /// Two equal cells with weights 1 and 4.
    TwoCell,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Cells per axis; several values give a multi-dimensional grid.
    #[arg(long, value_delimiter = ',', default_value = "4096")]
    pub cells: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub value: f64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long = "Q")]
    pub q: f64,
    /// `minus`: A-side endpoint; `plus`: RH-side endpoint.
    #[arg(long)]
    pub side: Branch,
    #[arg(long, value_delimiter = ',', default_values_t = defaults::REFINEMENTS)]
    pub refinements: Vec<usize>,
    /// Exponent inside the range; defaults to `a_lower + 0.1` (minus) or
    /// `1 + 0.75·(rh_upper - 1)` (plus).
    #[arg(long)]
    pub inside_q: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "Q")]
    pub q: f64,
    /// Defaults to 1.05·Q.
    #[arg(long = "Q1")]
    pub q1: Option<f64>,
    #[arg(long, default_value_t = defaults::C)]
    pub c: f64,
    #[arg(long)]
    pub levels: usize,
    #[arg(long, default_value_t = defaults::SEGMENT_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BellmanVerifyArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    #[arg(long = "Q")]
    pub q: f64,
    /// `builtin:linear`, `builtin:power:<r>` or a table file.
    #[arg(long)]
    pub candidate: String,
    /// Boundary exponent; defaults to the candidate's own.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = defaults::SEGMENTS)]
    pub segments: usize,
    #[arg(long, default_value_t = defaults::SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Per-check CSV report.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConclusionArgs {
    /// Hypothesis class and exponent.
    #[command(flatten)]
    pub class: ClassArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "Q")]
    pub q_bound: f64,
    /// Class of the conclusion; defaults to the hypothesis class.
    #[arg(long)]
    pub target: Option<ClassKind>,
    #[arg(long)]
    pub q: f64,
    /// Refinement factors applied to the input grid (1 = as given).
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64")]
    pub refine: Vec<usize>,
    #[arg(long, default_value_t = defaults::STABILIZATION)]
    pub tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Header lines for every output file.
fn header(command: &str, params: String) -> Vec<String> {
    vec![
        VERSION_LINE.to_string(),
        format!("command={command} {params}"),
    ]
}

fn with_header(lines: &[String], body: &str) -> String {
    let mut out = String::new();
    for l in lines {
        writeln!(out, "# {l}").unwrap();
    }
    out.push_str(body);
    out
}

fn emit(output: Option<&Path>, contents: &str) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn csv_string(rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

fn report_row(r: &CharacteristicReport, full: bool) -> Vec<String> {
    vec![
        r.class.to_string(),
        format!("{:?}", r.exponent),
        format!("{:?}", r.value),
        r.argmax.to_string(),
        full.to_string(),
        r.boxes_scanned.to_string(),
    ]
}

const REPORT_HEADER: [&str; 6] = [
    "class",
    "exponent",
    "value",
    "argmax",
    "argmax_is_full_box",
    "boxes_scanned",
];

pub fn cmd_exponents(a: &ExponentsArgs) -> Result<String> {
    let p = PParam::new(a.class.p)?;
    let r = sharp_range(a.class.class, p, a.q)?;
    let s_minus = f64::from(r.s_minus);
    let s_plus = f64::from(r.s_plus);
    let body = match a.format {
        OutputFormat::Text => format!(
            "class={} p={} Q={}\ns_minus={:?}\ns_plus={:?}\na_lower={:?}\nrh_upper={:?}\n",
            r.class,
            p.p(),
            a.q,
            s_minus,
            s_plus,
            r.a_lower,
            r.rh_upper
        ),
        OutputFormat::Csv => csv_string(&[
            [
                "class", "p", "Q", "s_minus", "s_plus", "a_lower", "rh_upper",
            ]
            .map(String::from)
            .to_vec(),
            vec![
                r.class.to_string(),
                format!("{:?}", p.p()),
                format!("{:?}", a.q),
                format!("{s_minus:?}"),
                format!("{s_plus:?}"),
                format!("{:?}", r.a_lower),
                format!("{:?}", r.rh_upper),
            ],
        ])?,
    };
    Ok(match &a.output {
        Some(_) => with_header(
            &header(
                "exponents",
                format!("class={} p={} Q={}", a.class.class, a.class.p, a.q),
            ),
            &body,
        ),
        None => body,
    })
}

pub fn cmd_characteristic(a: &CharacteristicArgs) -> Result<String> {
    let p = PParam::new(a.class.p)?;
    let grid = a.grid.load()?;
    let full = grid.full_box();
    let main = supremum(&grid, a.class.class, p.p())?;
    let mut rows = vec![
        REPORT_HEADER.map(String::from).to_vec(),
        report_row(&main, main.argmax == full),
    ];
    let mut notes = Vec::new();
    for e in q_scan(&grid, a.class.class, &a.q_scan) {
        match e.outcome {
            Ok(r) => rows.push(report_row(&r, r.argmax == full)),
            Err(err) => notes.push(format!("q={} skipped: {err}", e.q)),
        }
    }
    let mut lines = header(
        "characteristic",
        format!(
            "class={} p={} {} q_scan={:?}",
            a.class.class,
            a.class.p,
            a.grid.describe(),
            a.q_scan
        ),
    );
    lines.extend(notes);
    Ok(with_header(&lines, &csv_string(&rows)?))
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<WeightedGrid> {
    let grid = match a.kind {
        FixtureKind::Power => {
            if a.cells.len() != 1 {
                return Err(Error::pre(
                    "power fixtures are one-dimensional; give a single --cells",
                ));
            }
            power_weight_grid(a.alpha, a.cells[0])?
        }
        FixtureKind::Constant => {
            let m = GridMeasure::uniform(&a.cells)?;
            let n = m.cell_count();
            validate(m, WeightGrid::new(a.cells.clone(), vec![a.value; n])?)?
        }
        FixtureKind::TwoCell => {
            let m = GridMeasure::uniform(&[2])?;
            validate(m, WeightGrid::new(vec![2], vec![1.0, 4.0])?)?
        }
    };
    let params = format!(
        "kind={:?} alpha={} cells={:?} value={}",
        a.kind, a.alpha, a.cells, a.value
    );
    write_grid(&a.output, &grid, &header("generate", params))?;
    Ok(grid)
}

/// Exponents `(critical, inside)` and the extremal power for a sharpness run.
pub fn sharpness_setup(
    class: ClassKind,
    p: PParam,
    q: f64,
    side: Branch,
    inside: Option<f64>,
) -> Result<(ClassKind, f64, f64, f64)> {
    let range = sharp_range(class, p, q)?;
    let alpha = f64::from(extremal_alpha(class, p, q, side)?);
    Ok(match side {
        Branch::Minus => (
            ClassKind::MuckenhouptA,
            alpha,
            range.a_lower,
            inside.unwrap_or(range.a_lower + 0.1),
        ),
        Branch::Plus => (
            ClassKind::ReverseHolder,
            alpha,
            range.rh_upper,
            inside.unwrap_or(1.0 + 0.75 * (range.rh_upper - 1.0)),
        ),
    })
}

pub fn cmd_sharpness(a: &SharpnessArgs) -> Result<String> {
    let p = PParam::new(a.class.p)?;
    let (target, alpha, q_crit, q_in) = sharpness_setup(a.class.class, p, a.q, a.side, a.inside_q)?;
    let mut rows = vec![vec![
        "N".to_string(),
        format!("critical_q={q_crit:?}"),
        format!("inside_q={q_in:?}"),
    ]];
    let mut crit = Vec::new();
    let mut inside = Vec::new();
    for &n in &a.refinements {
        let g = power_weight_grid(alpha, n)?;
        let vc = supremum(&g, target, q_crit)?.value;
        let vi = supremum(&g, target, q_in)?.value;
        crit.push(vc);
        inside.push(vi);
        rows.push(vec![n.to_string(), format!("{vc:?}"), format!("{vi:?}")]);
    }
    let mut lines = header(
        "sharpness",
        format!(
            "class={} p={} Q={} side={} alpha={alpha:?} target={target} refinements={:?}",
            a.class.class,
            a.class.p,
            a.q,
            a.side.label(),
            a.refinements
        ),
    );
    let rel = |v: &[f64]| {
        let n = v.len();
        if n < 2 {
            f64::NAN
        } else {
            (v[n - 1] - v[n - 2]).abs() / v[n - 2]
        }
    };
    let tol = defaults::STABILIZATION;
    lines.push(format!(
        "critical column: {} (strictly increasing: {})",
        classify_trend(&crit, tol),
        crit.windows(2).all(|w| w[1] > w[0])
    ));
    lines.push(format!(
        "inside column: {} (last relative change {:.4e}, tolerance {tol}, extrapolated {})",
        classify_trend(&inside, tol),
        rel(&inside),
        aitken(&inside).map_or("n/a".to_string(), |v| format!("{v:.6}"))
    ));
    Ok(with_header(&lines, &csv_string(&rows)?))
}

pub fn cmd_split(a: &SplitArgs) -> Result<String> {
    let p = PParam::new(a.class.p)?;
    let grid = a.grid.load()?;
    let config = SplitConfig {
        q1: a.q1.unwrap_or(defaults::Q1_FACTOR * a.q),
        c: a.c,
        segment_samples: a.samples,
        ..SplitConfig::new(a.class.class, p, a.q, a.levels)
    };
    let tree = build_tree(&grid, &grid.full_box(), &config)?;
    let mut lines = header(
        "split",
        format!(
            "class={} p={} Q={} Q1={} c={} levels={} samples={} {}",
            a.class.class,
            a.class.p,
            a.q,
            config.q1,
            config.c,
            config.levels,
            config.segment_samples,
            a.grid.describe()
        ),
    );
    lines.push(format!(
        "convex combination error: {:e}",
        tree.convex_combination_error()
    ));
    lines.push(format!("max diameter per level: {:?}", tree.max_diameter));
    lines.push(format!(
        "step function L1 / <w> per level: {:?}",
        tree.step_function_l1(&grid)
    ));
    tree.trace_csv(&lines)
}

pub fn cmd_bellman_verify(a: &BellmanVerifyArgs) -> Result<(String, Option<String>)> {
    let p = PParam::new(a.class.p)?;
    let domain = OmegaDomain::new(a.class.class, p, a.q)?;
    let cand = parse_candidate(&a.candidate, a.class.class, p, a.q)?;
    let r = a.r.unwrap_or(cand.meta().r);
    let config = VerifyConfig {
        segments: a.segments,
        seed: a.seed,
        rel_tol: a.tol,
        ..VerifyConfig::default()
    };
    let rep = verify_candidate(&domain, cand.as_ref(), r, &config)?;
    let lines = header(
        "bellman-verify",
        format!(
            "class={} p={} Q={} candidate={} r={} segments={} seed={} tol={:e}",
            a.class.class, a.class.p, a.q, a.candidate, r, a.segments, a.seed, a.tol
        ),
    );
    let csv = match a.output {
        Some(_) => {
            let mut l = lines.clone();
            l.extend(rep.summary().lines().map(String::from));
            Some(rep.to_csv(&l)?)
        }
        None => None,
    };
    Ok((rep.summary(), csv))
}

pub fn cmd_conclusion_check(a: &ConclusionArgs) -> Result<String> {
    let p = PParam::new(a.class.p)?;
    let base = a.grid.load()?;
    let grids = a
        .refine
        .iter()
        .map(|&k| {
            if k == 1 {
                Ok(base.clone())
            } else {
                refine(&base, k)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let target = a.target.unwrap_or(a.class.class);
    let rep = theorem_conclusion_check(&grids, a.class.class, p, a.q_bound, target, a.q, a.tol)?;
    let mut rows = vec![["cells", "hypothesis_value", "target_value"]
        .map(String::from)
        .to_vec()];
    for r in &rep.rows {
        rows.push(vec![
            r.cells.to_string(),
            format!("{:?}", r.hypothesis_value),
            format!("{:?}", r.value),
        ]);
    }
    let mut lines = header(
        "conclusion-check",
        format!(
            "class={} p={} Q={} target={} q={} refine={:?} tol={} {}",
            a.class.class,
            a.class.p,
            a.q_bound,
            target,
            a.q,
            a.refine,
            a.tol,
            a.grid.describe()
        ),
    );
    lines.push(format!(
        "sharp range: a_lower={:?} rh_upper={:?}; q inside: {}",
        rep.range.a_lower, rep.range.rh_upper, rep.q_inside
    ));
    lines.push(format!(
        "trend: {} (last relative change {:.4e}, strictly increasing {}, extrapolated {:?})",
        rep.trend, rep.last_rel_change, rep.strictly_increasing, rep.extrapolated
    ));
    lines.push(format!("consistent with the theorem: {}", rep.consistent));
    Ok(with_header(&lines, &csv_string(&rows)?))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Exponents(a) => emit(a.output.as_deref(), &cmd_exponents(a)?),
        Command::Characteristic(a) => emit(a.output.as_deref(), &cmd_characteristic(a)?),
        Command::Generate(a) => {
            let g = cmd_generate(a)?;
            eprintln!(
                "wrote {} ({} cells)",
                a.output.display(),
                g.measure().cell_count()
            );
            Ok(())
        }
        Command::Sharpness(a) => emit(a.output.as_deref(), &cmd_sharpness(a)?),
        Command::Split(a) => emit(a.output.as_deref(), &cmd_split(a)?),
        Command::BellmanVerify(a) => {
            let (summary, csv) = cmd_bellman_verify(a)?;
            print!("{summary}");
            match (&a.output, csv) {
                (Some(p), Some(c)) => write_atomic(p, c.as_bytes()),
                _ => Ok(()),
            }
        }
        Command::ConclusionCheck(a) => emit(a.output.as_deref(), &cmd_conclusion_check(a)?),
    }
}

/// Parse arguments, run, and map errors to exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
