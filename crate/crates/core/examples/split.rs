//! Recursive splitting of a box so that every split segment stays in the
//! domain `1 <= ψ <= Q1`, with the diagnostics the construction relies on.
//!
//! ```text
//! cargo run --release --example split
//! ```

use strong_weights::characteristics::ap_characteristic;
use strong_weights::exponents::{ClassKind, PParam};
use strong_weights::grid::{power_weight_grid, validate, GridMeasure, WeightGrid};
use strong_weights::splitting::{build_tree, SplitConfig};

fn main() -> strong_weights::Result<()> {
    let p = PParam::new(2.0)?;
    let g = power_weight_grid(0.5, 1 << 10)?;
    let config = SplitConfig {
        q1: 1.4,
        ..SplitConfig::new(ClassKind::MuckenhouptA, p, 4.0 / 3.0, 10)
    };
    let tree = build_tree(&g, &g.full_box(), &config)?;
    let l1 = tree.step_function_l1(&g);
    println!("x^0.5, N = 1024, Q = 4/3, Q1 = 1.4, c = 0.2");
    println!("level  max diameter   step L1/<w>");
    for (m, (d, e)) in tree.max_diameter.iter().zip(&l1).enumerate() {
        println!("{m:>5}  {d:>12.6}   {e:.3e}");
    }
    let root = tree.root().split.unwrap();
    println!(
        "root split at {} (ratio {:.4}, segment max {:.4})",
        root.coordinate, root.ratio, root.segment_max
    );

    // 2D: the longest edge is cut, so axes alternate on a square
    let m = 32;
    let values = (0..m * m)
        .map(|f| 1.0 + ((f / m) as f64 / m as f64) + 0.5 * ((f % m) as f64 / m as f64))
        .collect();
    let g = validate(
        GridMeasure::uniform(&[m, m])?,
        WeightGrid::new(vec![m, m], values)?,
    )?;
    let q = ap_characteristic(&g, p).value;
    let tree = build_tree(
        &g,
        &g.full_box(),
        &SplitConfig::new(ClassKind::MuckenhouptA, p, q, 6),
    )?;
    let axes: Vec<usize> = (0..6)
        .map(|l| {
            tree.level_nodes(l)
                .next()
                .and_then(|n| n.split)
                .map_or(9, |s| s.axis)
        })
        .collect();
    println!("\nlinear 2D weight, Q = {q:.6}: leftmost axis per level {axes:?}");
    println!(
        "convex combination error {:.1e}",
        tree.convex_combination_error()
    );
    Ok(())
}
