//! Box characteristics of grid weights, compared with the closed form for
//! power weights.
//!
//! ```text
//! cargo run --release --example characteristic
//! ```

use strong_weights::characteristics::{q_scan, supremum};
use strong_weights::exponents::{analytic_power_characteristic, ClassKind, PParam};
use strong_weights::grid::{power_weight_grid, validate, GridMeasure, WeightGrid};

fn main() -> strong_weights::Result<()> {
    let two = validate(
        GridMeasure::uniform(&[2])?,
        WeightGrid::new(vec![2], vec![1.0, 4.0])?,
    )?;
    let rep = supremum(&two, ClassKind::MuckenhouptA, 2.0)?;
    println!("two cells (1, 4): A_2 = {} on {}", rep.value, rep.argmax);

    let p = PParam::new(2.0)?;
    let exact = analytic_power_characteristic(ClassKind::MuckenhouptA, p, 0.5)?;
    println!("\nx^0.5 on [0,1], A_2 (continuum {exact:.6}):");
    for k in [6, 8, 10, 12] {
        let g = power_weight_grid(0.5, 1 << k)?;
        let rep = supremum(&g, ClassKind::MuckenhouptA, 2.0)?;
        println!(
            "  N = 2^{k:<2}  {:.8}  argmax {}  ({} boxes)",
            rep.value, rep.argmax, rep.boxes_scanned
        );
    }

    // a 2D weight: product of two powers
    let m = 24;
    let values = (0..m * m)
        .map(|f| {
            let (i, j) = (f / m, f % m);
            ((i as f64 + 0.5) / m as f64).powf(0.4) * ((j as f64 + 0.5) / m as f64).powf(-0.2)
        })
        .collect();
    let g = validate(
        GridMeasure::uniform(&[m, m])?,
        WeightGrid::new(vec![m, m], values)?,
    )?;
    println!("\nx^0.4 y^-0.2 on a {m}x{m} grid:");
    for entry in q_scan(&g, ClassKind::MuckenhouptA, &[1.5, 2.0, 3.0]) {
        let r = entry.outcome?;
        println!("  A_{:<4} {:.6} on {}", entry.q, r.value, r.argmax);
    }
    for entry in q_scan(&g, ClassKind::ReverseHolder, &[1.5, 2.0, 3.0]) {
        let r = entry.outcome?;
        println!("  RH_{:<3} {:.6} on {}", entry.q, r.value, r.argmax);
    }
    Ok(())
}
