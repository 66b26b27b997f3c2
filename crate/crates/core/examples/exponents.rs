//! Sharp self-improvement ranges and the power weights that attain them.
//!
//! ```text
//! cargo run --example exponents
//! ```

use strong_weights::exponents::{
    analytic_power_characteristic, extremal_alpha, sharp_range, Branch, ClassKind, PParam,
};

fn main() -> strong_weights::Result<()> {
    for (class, p, q) in [
        (ClassKind::MuckenhouptA, 2.0, 4.0 / 3.0),
        (ClassKind::MuckenhouptA, 2.0, 2.0),
        (ClassKind::MuckenhouptA, 3.0, 5.0),
        (ClassKind::ReverseHolder, 2.0, 2.0 / 3f64.sqrt()),
    ] {
        let p = PParam::new(p)?;
        let r = sharp_range(class, p, q)?;
        println!(
            "[w]_{{{class},{}}} <= {q:.6}: w in A_q for q > {:.6}, in RH_q for 1 <= q < {:.6}",
            p.p(),
            r.a_lower,
            r.rh_upper
        );
        for side in [Branch::Minus, Branch::Plus] {
            let alpha = f64::from(extremal_alpha(class, p, q, side)?);
            let check = analytic_power_characteristic(class, p, alpha)?;
            println!(
                "    {:>5} extremizer x^{alpha:.6}  (characteristic {check:.12})",
                side.label()
            );
        }
    }
    Ok(())
}
