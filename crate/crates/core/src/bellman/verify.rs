use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::candidate::{BellmanCandidate, LnBox};
use super::{level_curve, lower_boundary, segment_max, AvgPoint, OmegaDomain, BOUNDARY_SLACK};
use crate::error::{Error, Result};
use crate::exponents::sharp_range;

/// Interior points checked on every segment.
const LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub segments: usize,
    pub seed: u64,
    /// A check fails when the concavity deficit exceeds `rel_tol · scale`,
    /// `scale` being the largest `|B|` among the three points involved.
    pub rel_tol: f64,
    /// Samples used to confirm a segment stays inside `Ω_Q`.
    pub segment_samples: usize,
    pub boundary_points: usize,
    /// `x1` range for sampling, intersected with the candidate's support.
    pub x1_range: (f64, f64),
    /// Reported flag only; the verdict follows concavity and `ĉ`.
    pub boundary_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            segments: 2000,
            seed: 0,
            rel_tol: 1e-9,
            segment_samples: 257,
            boundary_points: 1001,
            x1_range: (1e-2, 1e2),
            boundary_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConcavityCheck {
    pub segment: usize,
    pub lambda: f64,
    pub x_minus: AvgPoint,
    pub x_plus: AvgPoint,
    /// `λB(x⁻) + (1-λ)B(x⁺) - B(λx⁻ + (1-λ)x⁺)`; positive means convex there.
    pub deficit: f64,
    pub allowed: f64,
}

impl ConcavityCheck {
    pub fn violated(&self) -> bool {
        self.deficit > self.allowed
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub domain: OmegaDomain,
    pub r: f64,
    pub candidate: String,
    pub config: VerifyConfig,
    pub segments_tested: usize,
    pub sampling_attempts: usize,
    pub checks: Vec<ConcavityCheck>,
    pub violations: Vec<ConcavityCheck>,
    /// `max |B(x1, boundary(x1)) - x1^r| / x1^r` over the boundary lattice.
    pub boundary_max_error: f64,
    pub boundary_worst_x1: f64,
    pub boundary_points_checked: usize,
    pub c_hat: f64,
    pub c_hat_at: AvgPoint,
    pub undefined_at: Option<AvgPoint>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn boundary_ok(&self) -> bool {
        self.boundary_max_error <= self.config.boundary_tol
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let d = &self.domain;
        writeln!(s, "candidate        {}", self.candidate).unwrap();
        writeln!(
            s,
            "domain           class={} p={} Q={} r={}",
            d.class,
            d.p.p(),
            d.q,
            self.r
        )
        .unwrap();
        writeln!(
            s,
            "segments         {} tested ({} sampling attempts, seed {})",
            self.segments_tested, self.sampling_attempts, self.config.seed
        )
        .unwrap();
        writeln!(
            s,
            "concavity        {} checks, {} violations (rel tol {:e})",
            self.checks.len(),
            self.violations.len(),
            self.config.rel_tol
        )
        .unwrap();
        if let Some(worst) = self
            .violations
            .iter()
            .max_by(|a, b| (a.deficit / a.allowed).total_cmp(&(b.deficit / b.allowed)))
        {
            writeln!(
                s,
                "worst violation  segment {} λ={} [{} , {}] deficit {:e}",
                worst.segment, worst.lambda, worst.x_minus, worst.x_plus, worst.deficit
            )
            .unwrap();
        }
        writeln!(
            s,
            "boundary         max rel error {:e} at x1={} over {} points ({})",
            self.boundary_max_error,
            self.boundary_worst_x1,
            self.boundary_points_checked,
            if self.boundary_ok() {
                "ok"
            } else {
                "above tolerance"
            }
        )
        .unwrap();
        writeln!(s, "c_hat            {} at {}", self.c_hat, self.c_hat_at).unwrap();
        if let Some(x) = self.undefined_at {
            writeln!(s, "undefined at     {x}").unwrap();
        }
        writeln!(
            s,
            "verdict          {}",
            if self.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
        s
    }

    /// One row per concavity check.
    pub fn to_csv(&self, header_comments: &[String]) -> Result<String> {
        let mut out = String::new();
        for c in header_comments {
            writeln!(out, "# {c}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "segment", "lambda", "xm1", "xm2", "xp1", "xp2", "deficit", "allowed", "violated",
        ])?;
        for c in &self.checks {
            w.write_record([
                c.segment.to_string(),
                c.lambda.to_string(),
                format!("{:?}", c.x_minus.x1),
                format!("{:?}", c.x_minus.x2),
                format!("{:?}", c.x_plus.x1),
                format!("{:?}", c.x_plus.x2),
                format!("{:e}", c.deficit),
                format!("{:e}", c.allowed),
                c.violated().to_string(),
            ])?;
        }
        out.push_str(
            &String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"),
        );
        Ok(out)
    }
}

struct Sampler<'a> {
    domain: &'a OmegaDomain,
    support: LnBox,
    ln_x1: (f64, f64),
}

impl Sampler<'_> {
    /// Uniform in `ln x1` and in `ψ ∈ [1, Q]`.
    fn point(&self, rng: &mut ChaCha8Rng, ln_x1: (f64, f64)) -> Option<AvgPoint> {
        let u = rng.gen_range(ln_x1.0..=ln_x1.1);
        let level = rng.gen_range(1.0..=self.domain.q);
        let x1 = u.exp();
        let x = AvgPoint::new(x1, level_curve(self.domain.class, self.domain.p, x1, level));
        self.support.contains(x).then_some(x)
    }

    fn segment(&self, rng: &mut ChaCha8Rng, samples: usize) -> Option<(AvgPoint, AvgPoint)> {
        let a = self.point(rng, self.ln_x1)?;
        let b = if rng.gen_bool(0.5) {
            self.point(rng, self.ln_x1)?
        } else {
            // short segments probe local concavity
            let u = a.x1.ln();
            let delta = rng.gen_range(0.0..0.5);
            let lo = (u - delta).max(self.ln_x1.0);
            let hi = (u + delta).min(self.ln_x1.1);
            self.point(rng, (lo, hi))?
        };
        let top = segment_max(a, b, self.domain.class, self.domain.p, samples);
        (top <= self.domain.q * (1.0 + BOUNDARY_SLACK)).then_some((a, b))
    }
}

struct SegmentOutcome {
    checks: Vec<ConcavityCheck>,
    undefined_at: Option<AvgPoint>,
    c_hat: (f64, AvgPoint),
}

fn growth(b: f64, x: AvgPoint, r: f64) -> f64 {
    b / x.x1.powf(r)
}

fn check_segment(
    cand: &dyn BellmanCandidate,
    r: f64,
    rel_tol: f64,
    index: usize,
    a: AvgPoint,
    b: AvgPoint,
) -> SegmentOutcome {
    let mut out = SegmentOutcome {
        checks: Vec::with_capacity(LAMBDAS.len()),
        undefined_at: None,
        c_hat: (f64::NEG_INFINITY, a),
    };
    let note = |v: f64, x: AvgPoint, out: &mut SegmentOutcome| {
        let g = growth(v, x, r);
        if g > out.c_hat.0 {
            out.c_hat = (g, x);
        }
    };
    let (Some(ba), Some(bb)) = (cand.eval(a), cand.eval(b)) else {
        out.undefined_at = Some(if cand.eval(a).is_none() { a } else { b });
        return out;
    };
    note(ba, a, &mut out);
    note(bb, b, &mut out);
    for &lambda in &LAMBDAS {
        let x = a.lerp(b, lambda);
        let Some(bx) = cand.eval(x) else {
            out.undefined_at = Some(x);
            return out;
        };
        note(bx, x, &mut out);
        let scale = ba.abs().max(bb.abs()).max(bx.abs()).max(f64::MIN_POSITIVE);
        out.checks.push(ConcavityCheck {
            segment: index,
            lambda,
            x_minus: a,
            x_plus: b,
            deficit: lambda * ba + (1.0 - lambda) * bb - bx,
            allowed: rel_tol * scale,
        });
    }
    out
}

/// Sample segments inside `Ω_Q` and test the candidate against the
/// hypotheses: concavity at `λ ∈ {1/4, 1/2, 3/4}`, boundary values `x1^r`,
/// and the growth constant `ĉ = sup B/x1^r` (empirical).
pub fn verify_candidate(
    domain: &OmegaDomain,
    candidate: &dyn BellmanCandidate,
    r: f64,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let range = sharp_range(domain.class, domain.p, domain.q)?;
    if !range.admits_bellman_exponent(r) {
        return Err(Error::pre(format!(
            "r = {r} is outside the admissible exponents for class {} p={} Q={}",
            domain.class,
            domain.p.p(),
            domain.q
        )));
    }
    let meta = candidate.meta();
    if meta.class != domain.class || (meta.p - domain.p.p()).abs() > 1e-12 * domain.p.p() {
        return Err(Error::pre(format!(
            "candidate built for class {} p={} but domain is class {} p={}",
            meta.class,
            meta.p,
            domain.class,
            domain.p.p()
        )));
    }
    if !(config.x1_range.0 > 0.0 && config.x1_range.0 < config.x1_range.1) {
        return Err(Error::pre("x1 sampling range must satisfy 0 < lo < hi"));
    }

    let support = candidate.support();
    let ln_x1 = (
        config.x1_range.0.ln().max(support.ln_x1.0),
        config.x1_range.1.ln().min(support.ln_x1.1),
    );
    if !(ln_x1.0 < ln_x1.1) {
        return Err(Error::pre(
            "sampling range does not meet the candidate's support",
        ));
    }
    let sampler = Sampler {
        domain,
        support,
        ln_x1,
    };

    // the segment list is drawn sequentially, so it depends on the seed only
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let max_attempts = config.segments.saturating_mul(1000).max(1000);
    let mut segments = Vec::with_capacity(config.segments);
    let mut attempts = 0;
    while segments.len() < config.segments && attempts < max_attempts {
        attempts += 1;
        if let Some(s) = sampler.segment(&mut rng, config.segment_samples) {
            segments.push(s);
        }
    }

    let outcomes: Vec<SegmentOutcome> = segments
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| check_segment(candidate, r, config.rel_tol, i, a, b))
        .collect();

    let mut checks = Vec::new();
    let mut undefined_at = None;
    let mut c_hat = (f64::NEG_INFINITY, AvgPoint::new(f64::NAN, f64::NAN));
    for o in outcomes {
        checks.extend(o.checks);
        if undefined_at.is_none() {
            undefined_at = o.undefined_at;
        }
        if o.c_hat.0 > c_hat.0 {
            c_hat = o.c_hat;
        }
    }

    // boundary lattice, log-spaced in x1
    let mut boundary_max_error: f64 = 0.0;
    let mut boundary_worst_x1 = f64::NAN;
    let mut boundary_points_checked = 0;
    let n = config.boundary_points.max(2);
    for k in 0..n {
        let u = ln_x1.0 + (ln_x1.1 - ln_x1.0) * k as f64 / (n - 1) as f64;
        let x1 = u.exp();
        let x = AvgPoint::new(x1, lower_boundary(domain.class, domain.p, x1));
        if !support.contains(x) {
            continue;
        }
        let Some(v) = candidate.eval(x) else {
            undefined_at.get_or_insert(x);
            continue;
        };
        boundary_points_checked += 1;
        let target = x1.powf(r);
        let err = (v - target).abs() / target;
        if err > boundary_max_error {
            boundary_max_error = err;
            boundary_worst_x1 = x1;
        }
        let g = growth(v, x, r);
        if g > c_hat.0 {
            c_hat = (g, x);
        }
    }

    let violations: Vec<ConcavityCheck> = checks.iter().copied().filter(|c| c.violated()).collect();
    let pass = violations.is_empty()
        && undefined_at.is_none()
        && c_hat.0.is_finite()
        && !segments.is_empty();
    Ok(VerificationReport {
        domain: *domain,
        r,
        candidate: candidate.label(),
        config: *config,
        segments_tested: segments.len(),
        sampling_attempts: attempts,
        checks,
        violations,
        boundary_max_error,
        boundary_worst_x1,
        boundary_points_checked,
        c_hat: c_hat.0,
        c_hat_at: c_hat.1,
        undefined_at,
        pass,
    })
}
