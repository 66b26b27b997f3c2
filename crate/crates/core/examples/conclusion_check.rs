//! Probe the self-improvement conclusion on a refinement sequence: inside the
//! guaranteed range the target characteristic settles, at the endpoint it
//! keeps growing.
//!
//! ```text
//! cargo run --release --example conclusion_check
//! ```

use strong_weights::bellman::theorem_conclusion_check;
use strong_weights::exponents::{ClassKind, PParam};
use strong_weights::grid::power_weight_grid;

fn main() -> strong_weights::Result<()> {
    let a = ClassKind::MuckenhouptA;
    let rh = ClassKind::ReverseHolder;
    let p = PParam::new(2.0)?;
    let grids = [256, 1024, 4096]
        .iter()
        .map(|&n| power_weight_grid(0.5, n))
        .collect::<strong_weights::Result<Vec<_>>>()?;
    for (target, q) in [(a, 1.5), (a, 3.0), (rh, 1.5), (rh, 1.9)] {
        let rep = theorem_conclusion_check(&grids, a, p, 4.0 / 3.0, target, q, 0.01)?;
        let values: Vec<f64> = rep.rows.iter().map(|r| r.value).collect();
        println!(
            "{target}_{q}: inside range {:<5} {values:.5?} {} (consistent: {})",
            rep.q_inside, rep.trend, rep.consistent
        );
    }
    Ok(())
}
