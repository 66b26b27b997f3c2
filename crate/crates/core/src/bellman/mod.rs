//! Bellman domains `Ω_Q` of average pairs, candidate functions on them, and a
//! sampling verifier for the segment-concavity / boundary / growth hypotheses.
//!
//! Coordinates are `x1 = ⟨w⟩` and `x2 = ⟨w^{p₁}⟩` (A-class) or `x2 = ⟨w^p⟩`
//! (RH-class). The domain functional is
//!
//! * A-class: `ψ(x) = x1·x2^{p-1}`,
//! * RH-class: `ψ(x) = x2^{1/p} / x1`,
//!
//! and `Ω_Q = {1 ≤ ψ ≤ Q}`. Jensen puts every box point at `ψ ≥ 1`; a weight
//! with characteristic `Q` keeps every box point at `ψ ≤ Q`.

mod candidate;
mod conclusion;
pub mod table;
mod verify;

pub use candidate::{parse_candidate, BellmanCandidate, Builtin, CandidateMeta, LnBox};
pub use conclusion::{
    aitken, classify_trend, theorem_conclusion_check, ConclusionReport, RefinementRow, Trend,
    STABILIZATION_TOL,
};
pub use table::TableCandidate;
pub use verify::{verify_candidate, ConcavityCheck, VerificationReport, VerifyConfig};

use std::fmt;

use crate::error::{Error, Result};
use crate::exponents::{ClassKind, PParam};

/// Relative slack on both edges of `Ω_Q`.
pub const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AvgPoint {
    pub x1: f64,
    pub x2: f64,
}

impl AvgPoint {
    pub fn new(x1: f64, x2: f64) -> Self {
        AvgPoint { x1, x2 }
    }

    /// `λ·self + (1-λ)·other`
    #[inline]
    pub fn lerp(self, other: AvgPoint, lambda: f64) -> AvgPoint {
        AvgPoint {
            x1: lambda * self.x1 + (1.0 - lambda) * other.x1,
            x2: lambda * self.x2 + (1.0 - lambda) * other.x2,
        }
    }
}

impl fmt::Display for AvgPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

/// Domain functional `ψ` of the class.
#[inline]
pub fn psi(class: ClassKind, p: PParam, x: AvgPoint) -> f64 {
    match class {
        ClassKind::MuckenhouptA => {
            let e = p.p() - 1.0;
            if e == 1.0 {
                x.x1 * x.x2
            } else {
                x.x1 * x.x2.powf(e)
            }
        }
        ClassKind::ReverseHolder => {
            if p.p() == 2.0 {
                x.x2.sqrt() / x.x1
            } else {
                x.x2.powf(1.0 / p.p()) / x.x1
            }
        }
    }
}

/// Second coordinate of the point with first coordinate `x1` and `ψ = level`.
pub fn level_curve(class: ClassKind, p: PParam, x1: f64, level: f64) -> f64 {
    match class {
        ClassKind::MuckenhouptA => (level / x1).powf(1.0 / (p.p() - 1.0)),
        ClassKind::ReverseHolder => (level * x1).powf(p.p()),
    }
}

/// `x2 = x1^{p₁}` (A-class) or `x2 = x1^p` (RH-class): the `ψ = 1` edge.
pub fn lower_boundary(class: ClassKind, p: PParam, x1: f64) -> f64 {
    match class {
        ClassKind::MuckenhouptA => x1.powf(p.p1()),
        ClassKind::ReverseHolder => x1.powf(p.p()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Inside,
    /// `ψ < 1`: not realizable by any weight.
    Below,
    /// `ψ > Q`
    Above,
}

#[derive(Clone, Copy, Debug)]
pub struct OmegaDomain {
    pub class: ClassKind,
    pub p: PParam,
    pub q: f64,
}

impl OmegaDomain {
    pub fn new(class: ClassKind, p: PParam, q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::pre(format!("domain bound Q must exceed 1, got {q}")));
        }
        Ok(OmegaDomain { class, p, q })
    }

    pub fn psi(&self, x: AvgPoint) -> f64 {
        psi(self.class, self.p, x)
    }

    pub fn membership(&self, x: AvgPoint) -> Result<Membership> {
        omega_membership(self, x)
    }

    pub fn contains(&self, x: AvgPoint) -> bool {
        matches!(self.membership(x), Ok(Membership::Inside))
    }
}

pub fn omega_membership(domain: &OmegaDomain, x: AvgPoint) -> Result<Membership> {
    if !(x.x1 > 0.0 && x.x2 > 0.0) || !x.x1.is_finite() || !x.x2.is_finite() {
        return Err(Error::pre(format!(
            "average point {x} must have positive finite coordinates"
        )));
    }
    let v = domain.psi(x);
    Ok(if v < 1.0 - BOUNDARY_SLACK {
        Membership::Below
    } else if v > domain.q * (1.0 + BOUNDARY_SLACK) {
        Membership::Above
    } else {
        Membership::Inside
    })
}

/// Largest `ψ` on `λ = k/(samples-1)`, `k = 0..samples`, along `[x_a, x_b]`.
pub fn segment_max(
    x_a: AvgPoint,
    x_b: AvgPoint,
    class: ClassKind,
    p: PParam,
    samples: usize,
) -> f64 {
    let last = samples.max(2) - 1;
    (0..=last)
        .map(|k| {
            let lambda = k as f64 / last as f64;
            psi(class, p, x_a.lerp(x_b, lambda))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
