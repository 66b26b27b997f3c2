//! Regenerate the files under `fixtures/`.
//!
//! Grids: the two-cell weight `(1, 4)` and a constant weight.
//!
//! Tables (A-class, p = 2):
//! * `x1_pow_1_3.table`: `B = x1^1.3`, convex in `x1`; a negative control.
//! * `super_r1_2_q2.table`, `super_r1_5_q1_5.table`: the separable supersolution
//!   `B = a·x1 + x2^{-r} - a/x2`. On the lower edge `x2 = 1/x1` it equals
//!   `x1^r`; it is concave wherever `g(y) = y^{-r} - a/y` is, i.e. for
//!   `y^{1-r} <= 2a/(r(r+1))`, which `a` is chosen to cover on the lattice.
//!   Bilinear interpolation in `(x1, x2)` keeps a separable concave function
//!   concave; the price is a chord gap of `g` in the boundary values.
//!
//! ```text
//! cargo run --release --example make_fixtures
//! ```

use std::path::PathBuf;

use strong_weights::bellman::table::LnAxis;
use strong_weights::bellman::{CandidateMeta, TableCandidate};
use strong_weights::exponents::ClassKind;
use strong_weights::grid::io::write_grid;
use strong_weights::grid::{validate, GridMeasure, WeightGrid};

fn supersolution(r: f64, q: f64, a: f64, ax1: LnAxis, ax2: LnAxis) -> TableCandidate {
    let g = |y: f64| y.powf(-r) - a / y;
    let y_min = ax2.min.exp();
    assert!(
        r * (r + 1.0) * y_min.powf(1.0 - r) <= 2.0 * a,
        "a = {a} too small for concavity at x2 = {y_min}"
    );
    let meta = CandidateMeta {
        class: ClassKind::MuckenhouptA,
        p: 2.0,
        r,
        q,
    };
    TableCandidate::tabulate(meta, ax1, ax2, |x| a * x.x1 + g(x.x2)).unwrap()
}

fn main() -> strong_weights::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    let note = |s: &str| {
        vec![
            "generated by examples/make_fixtures.rs".to_string(),
            s.to_string(),
        ]
    };

    let two = validate(
        GridMeasure::uniform(&[2])?,
        WeightGrid::new(vec![2], vec![1.0, 4.0])?,
    )?;
    write_grid(
        &dir.join("two_cell.grid"),
        &two,
        &note("two equal cells, w = (1, 4)"),
    )?;
    let constant = validate(
        GridMeasure::uniform(&[8, 8])?,
        WeightGrid::new(vec![8, 8], vec![3.0; 64])?,
    )?;
    write_grid(
        &dir.join("constant.grid"),
        &constant,
        &note("8x8 uniform cells, w = 3"),
    )?;

    let control = TableCandidate::tabulate(
        CandidateMeta {
            class: ClassKind::MuckenhouptA,
            p: 2.0,
            r: 1.3,
            q: 2.0,
        },
        LnAxis::new(-3.0, 3.0, 61)?,
        LnAxis::new(-3.5, 3.7, 73)?,
        |x| x.x1.powf(1.3),
    )?;
    control.write(
        &dir.join("x1_pow_1_3.table"),
        &note("B = x1^1.3, convex in x1: must fail"),
    )?;

    let t = supersolution(
        1.2,
        2.0,
        3.0,
        LnAxis::new(-3.0, 3.0, 13)?,
        LnAxis::new(-3.5, 3.7, 721)?,
    );
    t.write(
        &dir.join("super_r1_2_q2.table"),
        &note("B = 3 x1 + x2^-1.2 - 3/x2, A-class p=2"),
    )?;

    let t = supersolution(
        1.5,
        1.5,
        4.0,
        LnAxis::new(-4.7, 0.75, 12)?,
        LnAxis::new(-1.0, 5.2, 621)?,
    );
    t.write(
        &dir.join("super_r1_5_q1_5.table"),
        &note("B = 4 x1 + x2^-1.5 - 4/x2, A-class p=2"),
    )?;

    println!("fixtures written to {}", dir.display());
    Ok(())
}
