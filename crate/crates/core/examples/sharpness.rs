//! Refinement study at the endpoints of the sharp range.
//!
//! The extremal power weight has characteristic exactly `Q`; at the critical
//! exponent its characteristic grows without bound as the grid refines, just
//! inside it converges (slowly, since the singular cell dominates).
//!
//! ```text
//! cargo run --release --example sharpness
//! ```

use strong_weights::bellman::{aitken, classify_trend, STABILIZATION_TOL};
use strong_weights::characteristics::supremum;
use strong_weights::exponents::{
    analytic_power_characteristic, extremal_alpha, sharp_range, Branch, ClassKind, PParam,
};
use strong_weights::grid::power_weight_grid;

fn study(class: ClassKind, alpha: f64, qs: [f64; 2]) -> strong_weights::Result<()> {
    for q in qs {
        let values: Vec<f64> = [8, 10, 12, 14]
            .iter()
            .map(|&k| Ok(supremum(&power_weight_grid(alpha, 1 << k)?, class, q)?.value))
            .collect::<strong_weights::Result<_>>()?;
        let limit = analytic_power_characteristic(class, PParam::new(q)?, alpha)
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|_| "infinite".into());
        println!(
            "  {class}_{q:.4}: {values:.4?} -> {} (continuum {limit}, Aitken {:?})",
            classify_trend(&values, STABILIZATION_TOL),
            aitken(&values).map(|v| (v * 1e4).round() / 1e4)
        );
    }
    Ok(())
}

fn main() -> strong_weights::Result<()> {
    let p = PParam::new(2.0)?;

    let q = 4.0 / 3.0;
    let r = sharp_range(ClassKind::MuckenhouptA, p, q)?;
    let alpha = f64::from(extremal_alpha(
        ClassKind::MuckenhouptA,
        p,
        q,
        Branch::Minus,
    )?);
    println!(
        "A_2 bound {q:.4}: A_q holds for q > {:.4}; extremizer x^{alpha}",
        r.a_lower
    );
    // 1.5 and 3 are the exact endpoints; the solver reproduces them to ~1e-15
    study(ClassKind::MuckenhouptA, alpha, [1.5, 1.6])?;

    let q = 2.0 / 3f64.sqrt();
    let r = sharp_range(ClassKind::ReverseHolder, p, q)?;
    let alpha = f64::from(extremal_alpha(
        ClassKind::ReverseHolder,
        p,
        q,
        Branch::Plus,
    )?);
    println!(
        "RH_2 bound {q:.4}: RH_q holds for q < {:.4}; extremizer x^{alpha:.4}",
        r.rh_upper
    );
    study(ClassKind::ReverseHolder, alpha, [3.0, 2.5])?;
    Ok(())
}
