//! Check Bellman candidates on `Ω_Q` and run one through a split tree.
//!
//! ```text
//! cargo run --release --example bellman_verify
//! ```

use std::path::PathBuf;

use strong_weights::bellman::{
    verify_candidate, Builtin, OmegaDomain, TableCandidate, VerifyConfig,
};
use strong_weights::exponents::{ClassKind, PParam};
use strong_weights::grid::power_weight_grid;
use strong_weights::splitting::{build_tree, chain_report, SplitConfig};

fn main() -> strong_weights::Result<()> {
    let a = ClassKind::MuckenhouptA;
    let p = PParam::new(2.0)?;
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let config = VerifyConfig::default();

    let domain = OmegaDomain::new(a, p, 2.0)?;
    let lin = Builtin::linear(a, p, 2.0);
    println!(
        "{}\n",
        verify_candidate(&domain, &lin, 1.0, &config)?.summary()
    );
    let control = TableCandidate::read(&fixtures.join("x1_pow_1_3.table"))?;
    println!(
        "{}\n",
        verify_candidate(&domain, &control, 1.3, &config)?.summary()
    );

    let domain = OmegaDomain::new(a, p, 1.5)?;
    let sup = TableCandidate::read(&fixtures.join("super_r1_5_q1_5.table"))?;
    println!(
        "{}\n",
        verify_candidate(&domain, &sup, 1.5, &config)?.summary()
    );

    // S_M never increases down the tree and stays above <w^1.5>
    let g = power_weight_grid(0.5, 1 << 10)?;
    let tree = build_tree(
        &g,
        &g.full_box(),
        &SplitConfig {
            q1: 1.5,
            ..SplitConfig::new(a, p, 4.0 / 3.0, 6)
        },
    )?;
    let chain = chain_report(&tree, &g, 1.5, &sup)?;
    for (m, s) in chain.sums.iter().enumerate() {
        println!("S_{m} = {s:.6}");
    }
    println!("<w^1.5> = {:.6}", chain.riemann);
    Ok(())
}
