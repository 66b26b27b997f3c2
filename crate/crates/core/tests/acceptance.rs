//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --release --test acceptance`.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strong_weights::bellman::{
    classify_trend, psi, verify_candidate, AvgPoint, Builtin, OmegaDomain, TableCandidate, Trend,
    VerifyConfig,
};
use strong_weights::characteristics::{q_scan, supremum};
use strong_weights::exponents::{
    analytic_power_characteristic, extremal_alpha, implicit_value, sharp_range, solve_branch,
    Branch, ClassKind, PParam,
};
use strong_weights::grid::{
    power_weight_grid, validate, GridMeasure, PrefixTables, WeightGrid, WeightedGrid,
};
use strong_weights::splitting::{build_tree, chain_report, SplitConfig, SplitTree};

use common::{all_boxes, dyadic_grid, naive_characteristic, random_grid};

const A: ClassKind = ClassKind::MuckenhouptA;
const RH: ClassKind = ClassKind::ReverseHolder;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn pp(p: f64) -> PParam {
    PParam::new(p).unwrap()
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{name} = {got}, expected {want} ± {tol:e}"))
    }
}

fn deadline(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn exponent_closed_forms() -> Outcome {
    let ms = Duration::from_millis(1);
    let timed = |class, q: f64| {
        let t = Instant::now();
        let r = sharp_range(class, pp(2.0), q).map_err(|e| e.to_string());
        (r, t.elapsed())
    };
    let mut slowest = Duration::ZERO;

    let (r, dt) = timed(A, 4.0 / 3.0);
    let r = r?;
    slowest = slowest.max(dt);
    within("a_lower(A,2,4/3)", r.a_lower, 1.5, 1e-9)?;
    within("rh_upper(A,2,4/3)", r.rh_upper, 2.0, 1e-9)?;

    let (r, dt) = timed(A, 2.0);
    let r = r?;
    slowest = slowest.max(dt);
    within("a_lower(A,2,2)", r.a_lower, 1.0 + 0.5f64.sqrt(), 1e-9)?;
    within("rh_upper(A,2,2)", r.rh_upper, 2f64.sqrt(), 1e-9)?;

    let (r, dt) = timed(RH, 2.0 / 3f64.sqrt());
    let r = r?;
    slowest = slowest.max(dt);
    within("a_lower(RH,2,2/√3)", r.a_lower, 2.0, 1e-6)?;
    within("rh_upper(RH,2,2/√3)", r.rh_upper, 3.0, 1e-6)?;

    deadline(slowest, ms)?;
    Ok(format!("slowest call {slowest:.1?}"))
}

fn implicit_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let class = if rng.gen_bool(0.5) { A } else { RH };
        let branch = if rng.gen_bool(0.5) {
            Branch::Plus
        } else {
            Branch::Minus
        };
        let p = pp(rng.gen_range(1.1..=10.0));
        // Q ∈ (1, 100]
        let q = 100.0 - rng.gen_range(0.0..99.0);
        let s = solve_branch(class, p, 1.0 / q, branch).map_err(|e| e.to_string())?;
        let t = implicit_value(class, p, s).map_err(|e| e.to_string())?;
        let err = (t - 1.0 / q).abs();
        if err > 1e-10 {
            return Err(format!(
                "{class} p={} Q={q} {branch:?}: residual {err:e}",
                p.p()
            ));
        }
        worst = worst.max(err);
    }
    deadline(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "worst residual {worst:.1e} in {:.2?}",
        start.elapsed()
    ))
}

fn extremal_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let class = if rng.gen_bool(0.5) { A } else { RH };
        let side = if rng.gen_bool(0.5) {
            Branch::Plus
        } else {
            Branch::Minus
        };
        let p = pp(rng.gen_range(1.1..=10.0));
        let q = 100.0 - rng.gen_range(0.0..99.0);
        let alpha = extremal_alpha(class, p, q, side).map_err(|e| e.to_string())?;
        let v = analytic_power_characteristic(class, p, alpha).map_err(|e| e.to_string())?;
        let rel = (v / q - 1.0).abs();
        if rel > 1e-9 {
            return Err(format!(
                "{class} p={} Q={q} {side:?}: got {v} (rel {rel:e})",
                p.p()
            ));
        }
        worst = worst.max(rel);
    }
    deadline(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("worst relative error {worst:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut compared = 0;
    for i in 0..200 {
        let g = dyadic_grid(&mut rng, 2, 16);
        let (class, p) = [(A, 2.0), (A, 3.0), (RH, 2.0), (RH, 3.0)][i % 4];
        let fast = supremum(&g, class, p).map_err(|e| e.to_string())?;
        let (v, b) = naive_characteristic(&g, class, p);
        if fast.value != v || fast.argmax != b {
            return Err(format!(
                "grid {i} {:?} {class} p={p}: prefix ({}, {}) vs naive ({v}, {b})",
                g.shape(),
                fast.value,
                fast.argmax
            ));
        }
        compared += 1;
    }
    deadline(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{compared} grids bit-identical in {:.2?}",
        start.elapsed()
    ))
}

fn power_convergence() -> Outcome {
    let start = Instant::now();
    let target = 4.0 / 3.0;
    let mut values = Vec::new();
    for k in [8, 10, 12, 14] {
        let g = power_weight_grid(0.5, 1 << k).map_err(|e| e.to_string())?;
        values.push(supremum(&g, A, 2.0).map_err(|e| e.to_string())?.value);
    }
    if !values.windows(2).all(|w| w[1] >= w[0]) {
        return Err(format!("[x^0.5]_A2 not non-decreasing: {values:?}"));
    }
    let last = values[3];
    if !(last >= target - 0.02 && last <= target + 1e-9) {
        return Err(format!(
            "[x^0.5]_A2 at N=2^14 is {last}, outside [4/3-0.02, 4/3+1e-9]"
        ));
    }
    let g = power_weight_grid(1.0, 1 << 12).map_err(|e| e.to_string())?;
    let rh = supremum(&g, RH, 2.0).map_err(|e| e.to_string())?.value;
    let want = 2.0 / 3f64.sqrt();
    if (rh / want - 1.0).abs() > 0.01 {
        return Err(format!(
            "[x]_RH2 at N=2^12 is {rh}, not within 1% of {want}"
        ));
    }
    deadline(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("A2: {values:.6?}; RH2 at 2^12: {rh:.8}"))
}

fn sharpness() -> Outcome {
    let start = Instant::now();
    let ns = [1usize << 8, 1 << 10, 1 << 12, 1 << 14];
    let run = |class, alpha: f64, q: f64| -> Result<Vec<f64>, String> {
        ns.iter()
            .map(|&n| {
                let g = power_weight_grid(alpha, n).map_err(|e| e.to_string())?;
                Ok(supremum(&g, class, q).map_err(|e| e.to_string())?.value)
            })
            .collect()
    };
    let rel = |v: &[f64]| (v[3] - v[2]).abs() / v[2];

    let mut problems = Vec::new();
    let mut notes = Vec::new();
    let mut check = |label: &str, v: Vec<f64>, divergent: bool| {
        let trend = classify_trend(&v, 0.01);
        if divergent {
            let ok = v.windows(2).all(|w| w[1] > w[0]);
            notes.push(format!("{label} {v:.4?} strictly increasing: {ok}"));
            if !ok {
                problems.push(format!("{label} not strictly increasing"));
            }
        } else {
            notes.push(format!(
                "{label} {v:.4?} last change {:.2}% ({trend})",
                100.0 * rel(&v)
            ));
            if trend != Trend::Stabilizing {
                problems.push(format!("{label} last change {:.2}% > 1%", 100.0 * rel(&v)));
            }
        }
    };
    // A side at Q = 4/3, p = 2: extremizer x^0.5, endpoint 1.5
    check("A_1.5", run(A, 0.5, 1.5)?, true);
    check("A_1.6", run(A, 0.5, 1.6)?, false);
    // RH side at Q = 2/√3, p = 2: extremizer x^(-1/3), endpoint 3
    check("RH_3", run(RH, -1.0 / 3.0, 3.0)?, true);
    check("RH_2.5", run(RH, -1.0 / 3.0, 2.5)?, false);

    // The stable columns converge like N^-δ, δ = 1 + α·(moment exponent):
    // the first cell carries the singular part of ∫ w^s.
    for (label, class, alpha, q, s) in [
        ("A_1.6", A, 0.5, 1.6, pp(1.6).p1()),
        ("RH_2.5", RH, -1.0 / 3.0, 2.5, 2.5),
    ] {
        let limit =
            analytic_power_characteristic(class, pp(q), alpha).map_err(|e| e.to_string())?;
        notes.push(format!(
            "{label} continuum value {limit:.4}, error ~ N^-{:.4}",
            1.0 + alpha * s
        ));
    }

    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        problems.push(format!("took {elapsed:.2?}, limit 2 min"));
    }
    if problems.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} [{}]", problems.join("; "), notes.join("; ")))
    }
}

fn check_tree_structure(tree: &SplitTree) -> Result<(), String> {
    let c = tree.config.c;
    for n in &tree.nodes {
        if let Some(s) = n.split {
            if !(s.ratio > c && s.ratio < 1.0 - c) {
                return Err(format!("{}: ratio {}", n.path, s.ratio));
            }
            if s.segment_max > tree.config.q1 {
                return Err(format!("{}: segment max {}", n.path, s.segment_max));
            }
        }
    }
    let e = tree.convex_combination_error();
    if e > 1e-12 {
        return Err(format!("convex combination error {e:e}"));
    }
    Ok(())
}

fn splitting_suite() -> Outcome {
    let start = Instant::now();
    let g = power_weight_grid(0.5, 1 << 10).map_err(|e| e.to_string())?;
    let mut config = SplitConfig::new(A, pp(2.0), 4.0 / 3.0, 10);
    config.q1 = 1.4;
    config.c = 0.2;
    let tree = build_tree(&g, &g.full_box(), &config).map_err(|e| e.to_string())?;
    check_tree_structure(&tree)?;
    let d = &tree.max_diameter;
    if d[10] > 0.15 * d[0] {
        return Err(format!("max leaf diameter {} > 15% of {}", d[10], d[0]));
    }
    let l1 = tree.step_function_l1(&g);
    if l1[10] > 0.02 {
        return Err(format!("step-function L1 {} > 2%", l1[10]));
    }
    let max_seg = tree
        .nodes
        .iter()
        .filter_map(|n| n.split)
        .map(|s| s.segment_max)
        .fold(0.0, f64::max);
    deadline(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{} nodes, max segment ψ {max_seg:.4}, leaf diameter {:.2e}, L1 {:.2e}, combination error {:.1e}",
        tree.nodes.len(),
        d[10],
        l1[10],
        tree.convex_combination_error()
    ))
}

fn fixture_trees() -> Result<Vec<(String, WeightedGrid, SplitTree)>, String> {
    let e = |e: strong_weights::Error| e.to_string();
    let mut out = Vec::new();

    let g = power_weight_grid(0.5, 1 << 10).map_err(e)?;
    let mut c = SplitConfig::new(A, pp(2.0), 4.0 / 3.0, 10);
    c.q1 = 1.4;
    out.push((
        "power 0.5".to_string(),
        g.clone(),
        build_tree(&g, &g.full_box(), &c).map_err(e)?,
    ));

    let g = power_weight_grid(-0.3, 1 << 10).map_err(e)?;
    let c = SplitConfig::new(A, pp(2.0), 1.1, 8);
    out.push((
        "power -0.3".to_string(),
        g.clone(),
        build_tree(&g, &g.full_box(), &c).map_err(e)?,
    ));

    let g = validate(
        GridMeasure::uniform(&[2]).map_err(e)?,
        WeightGrid::new(vec![2], vec![1.0, 4.0]).map_err(e)?,
    )
    .map_err(e)?;
    let mut c = SplitConfig::new(A, pp(2.0), 1.5625, 1);
    c.q1 = 1.6;
    c.c = 0.4;
    out.push((
        "two-cell".to_string(),
        g.clone(),
        build_tree(&g, &g.full_box(), &c).map_err(e)?,
    ));

    let g = validate(
        GridMeasure::uniform(&[8, 8]).map_err(e)?,
        WeightGrid::new(vec![8, 8], vec![3.0; 64]).map_err(e)?,
    )
    .map_err(e)?;
    let c = SplitConfig::new(RH, pp(2.0), 1.05, 6);
    out.push((
        "constant 8x8".to_string(),
        g.clone(),
        build_tree(&g, &g.full_box(), &c).map_err(e)?,
    ));
    Ok(out)
}

fn verifier_controls() -> Outcome {
    let start = Instant::now();
    let e = |e: strong_weights::Error| e.to_string();
    let d = OmegaDomain::new(A, pp(2.0), 2.0).map_err(e)?;
    let cfg = VerifyConfig::default();
    let lin = Builtin::linear(A, pp(2.0), 2.0);
    let rep = verify_candidate(&d, &lin, 1.0, &cfg).map_err(e)?;
    if !rep.pass || !rep.violations.is_empty() || rep.c_hat != 1.0 {
        return Err(format!("linear candidate: {}", rep.summary()));
    }
    if rep.boundary_max_error > 1e-10 {
        return Err(format!(
            "linear boundary error {:e}",
            rep.boundary_max_error
        ));
    }
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let control = TableCandidate::read(&fixtures.join("x1_pow_1_3.table")).map_err(e)?;
    let bad = verify_candidate(&d, &control, 1.3, &cfg).map_err(e)?;
    if bad.pass || bad.violations.is_empty() {
        return Err(format!("x1^1.3 control passed: {}", bad.summary()));
    }

    let mut worst: f64 = 0.0;
    for (name, g, tree) in fixture_trees()? {
        let lin = Builtin::linear(tree.config.class, tree.config.p, tree.config.q1);
        let chain = chain_report(&tree, &g, 1.0, &lin).map_err(e)?;
        for s in &chain.sums {
            let dev = (s / chain.sums[0] - 1.0).abs();
            if dev > 1e-12 {
                return Err(format!("{name}: linear chain deviates by {dev:e}"));
            }
            worst = worst.max(dev);
        }
    }
    deadline(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "linear ĉ = 1, 0 violations; x1^1.3 control {} violations; linear chain drift {worst:.1e}",
        bad.violations.len()
    ))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cases = 100;

    for i in 0..cases {
        let g = random_grid(&mut rng, 2, 8);
        let c = 10f64.powf(rng.gen_range(-3.0..3.0));
        let p = rng.gen_range(1.2..6.0);
        let class = if i % 2 == 0 { A } else { RH };
        let a = supremum(&g, class, p).map_err(|e| e.to_string())?.value;
        let b = supremum(&g.scaled(c).map_err(|e| e.to_string())?, class, p)
            .map_err(|e| e.to_string())?
            .value;
        if (a / b - 1.0).abs() > 1e-12 {
            return Err(format!("scale invariance case {i}: {a} vs {b}"));
        }
    }

    for class in [A, RH] {
        for i in 0..cases {
            let g = random_grid(&mut rng, 2, 8);
            let mut qs: Vec<f64> = (0..4).map(|_| rng.gen_range(1.05..8.0)).collect();
            qs.sort_by(f64::total_cmp);
            let v: Vec<f64> = q_scan(&g, class, &qs)
                .into_iter()
                .map(|s| s.outcome.map(|r| r.value).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let ok = v.windows(2).all(|w| match class {
                ClassKind::MuckenhouptA => w[1] <= w[0] * (1.0 + 1e-12),
                ClassKind::ReverseHolder => w[0] <= w[1] * (1.0 + 1e-12),
            });
            if !ok {
                return Err(format!(
                    "{class} q-monotonicity case {i}: q {qs:?} -> {v:?}"
                ));
            }
        }
    }

    let mut boxes = 0usize;
    for i in 0..cases {
        let g = random_grid(&mut rng, 2, 6);
        let p = pp(rng.gen_range(1.2..6.0));
        for (class, s) in [(A, p.p1()), (RH, p.p())] {
            let t = PrefixTables::build(&g, &[1.0, s]);
            for b in all_boxes(g.shape()) {
                let x = AvgPoint::new(
                    t.average(0, &b).map_err(|e| e.to_string())?,
                    t.average(1, &b).map_err(|e| e.to_string())?,
                );
                let v = psi(class, p, x);
                if v < 1.0 - 1e-12 {
                    return Err(format!("Jensen case {i} {class} box {b}: ψ = {v}"));
                }
                boxes += 1;
            }
        }
    }
    deadline(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{cases} fixtures per suite (scale, A q-monotone, RH q-monotone, Jensen over {boxes} box points)"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exponent closed forms", exponent_closed_forms),
        ("implicit round trip", implicit_round_trip),
        ("extremal consistency", extremal_consistency),
        ("characteristic oracle equivalence", oracle_equivalence),
        ("power-weight convergence", power_convergence),
        ("sharpness", sharpness),
        ("splitting suite", splitting_suite),
        ("verifier controls", verifier_controls),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let dt = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({dt:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name} ({dt:.2?}): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
