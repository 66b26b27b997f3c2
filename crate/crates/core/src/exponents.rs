//! Sharp self-improvement exponents.
//!
//! Both weight classes come with an implicit equation `t = F(s)` whose two
//! monotone inverse branches, evaluated at `t = 1/Q`, give the parameters
//! `s⁻(Q) < 0 < s⁺(Q)`. From them a weight with characteristic `Q` belongs to
//! `A*_q` for every `q > 1 - s⁻` and to `RH*_q` for every `1 <= q < 1/s⁺`.
//!
//! | class | `F(s)` | `s⁺` range | `s⁻` range |
//! |-------|--------|------------|------------|
//! | `MuckenhouptA` | `(1 - s)(1 - p₁s)^(-1/p₁)` | `(0, 1)` | `(1/p₁, 0)` |
//! | `ReverseHolder` | `(1 - ps)^(1/p) (1 - s)^(-1)` | `(0, 1/p)` | `(-∞, 0)` |
//!
//! with `p₁ = -1/(p - 1)`.
//!
//! Near the branch edges `F` has an infinite derivative, so an `f64` root can
//! sit many orders of magnitude away (in `t`) from the target. Roots and the
//! extremal power exponents derived from them are therefore carried as
//! double-double values ([`TwoFloat`]); the factors `1 - s`, `1 - p₁s` and
//! `1 - ps` are formed in that precision before the powers are taken in `f64`.

use std::fmt;
use std::str::FromStr;

use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Absolute residual `|F(s) - t|` accepted by [`solve_branch`].
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Iteration cap of the safeguarded Newton/bisection solver.
pub const MAX_ITERATIONS: usize = 200;

/// Factors closer to zero than this (after double-double cancellation) are
/// treated as exactly zero.
const EDGE_SLACK: f64 = 1e-28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    /// Strong Muckenhoupt class `A*_p`.
    MuckenhouptA,
    /// Strong Reverse Hölder class `RH*_p`.
    ReverseHolder,
}

impl ClassKind {
    pub fn label(self) -> &'static str {
        match self {
            ClassKind::MuckenhouptA => "ap",
            ClassKind::ReverseHolder => "rh",
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ap" | "a" | "muckenhoupt" => Ok(ClassKind::MuckenhouptA),
            "rh" | "reverse-holder" => Ok(ClassKind::ReverseHolder),
            other => Err(Error::pre(format!(
                "unknown class {other:?} (expected ap or rh)"
            ))),
        }
    }
}

/// An exponent `p > 1` together with its dual `p₁ = -1/(p - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PParam(f64);

impl PParam {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(PParam(p))
        } else {
            Err(Error::pre(format!("exponent p must exceed 1, got {p}")))
        }
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }

    /// `p₁ = -1/(p - 1)`, always negative.
    #[inline]
    pub fn p1(self) -> f64 {
        -1.0 / (self.0 - 1.0)
    }
}

impl fmt::Display for PParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which inverse branch of the implicit equation to follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Decreasing branch, `s >= 0`.
    Plus,
    /// Increasing branch, `s <= 0`.
    Minus,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(Error::pre(format!(
                "unknown side {other:?} (expected plus or minus)"
            ))),
        }
    }
}

/// Solved exponent data for one `(class, p, Q)`.
#[derive(Clone, Copy, Debug)]
pub struct SharpRange {
    pub class: ClassKind,
    pub p: PParam,
    pub q_char: f64,
    pub s_minus: TwoFloat,
    pub s_plus: TwoFloat,
    /// `A*_q` membership holds for every `q > a_lower`.
    pub a_lower: f64,
    /// `RH*_q` membership holds for every `1 <= q < rh_upper`.
    pub rh_upper: f64,
}

impl SharpRange {
    pub fn in_a_range(&self, q: f64) -> bool {
        q > self.a_lower
    }

    pub fn in_rh_range(&self, q: f64) -> bool {
        (1.0..self.rh_upper).contains(&q)
    }

    /// Exponents `r` for which a Bellman function with boundary values `x₁^r`
    /// exists on the domain of this range:
    /// `(1/s⁻, p₁] ∪ [1, 1/s⁺)` for the A-class and
    /// `(1/s⁻, 1] ∪ [p, 1/s⁺)` for the RH-class.
    pub fn admits_bellman_exponent(&self, r: f64) -> bool {
        let s_minus = f64::from(self.s_minus);
        let s_plus = f64::from(self.s_plus);
        let (mid_hi, mid_lo) = match self.class {
            ClassKind::MuckenhouptA => (self.p.p1(), 1.0),
            ClassKind::ReverseHolder => (1.0, self.p.p()),
        };
        (r > 1.0 / s_minus && r <= mid_hi) || (r >= mid_lo && r < 1.0 / s_plus)
    }
}

impl fmt::Display for SharpRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "class={} p={} Q={} s_minus={:.15e} s_plus={:.15e} a_lower={:.15} rh_upper={:.15}",
            self.class,
            self.p,
            self.q_char,
            f64::from(self.s_minus),
            f64::from(self.s_plus),
            self.a_lower,
            self.rh_upper
        )
    }
}

struct Factors {
    /// `1 - s`
    outer: f64,
    /// `1 - p₁s` (A-class) or `1 - ps` (RH-class)
    edge: f64,
}

fn factors(class: ClassKind, p: PParam, s: TwoFloat) -> Factors {
    let one = TwoFloat::from(1.0);
    let slope = match class {
        ClassKind::MuckenhouptA => p.p1(),
        ClassKind::ReverseHolder => p.p(),
    };
    let mut edge = f64::from(one - s * slope);
    if edge.abs() < EDGE_SLACK {
        edge = 0.0;
    }
    Factors {
        outer: f64::from(one - s),
        edge,
    }
}

/// `base^exp` for `base >= 0`, `exp > 0`, through `exp`/`ln`.
fn pow_nonneg(base: f64, exp: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (exp * base.ln()).exp()
    }
}

fn value_from(class: ClassKind, p: PParam, fs: &Factors) -> Result<f64> {
    match class {
        ClassKind::MuckenhouptA => {
            if fs.outer < 0.0 {
                return Err(Error::pre("factor 1 - s is negative"));
            }
            if fs.edge < 0.0 {
                return Err(Error::pre("factor 1 - p1*s is negative"));
            }
            Ok(fs.outer * pow_nonneg(fs.edge, p.p() - 1.0))
        }
        ClassKind::ReverseHolder => {
            if fs.edge < 0.0 {
                return Err(Error::pre("factor 1 - p*s is negative"));
            }
            if fs.outer <= 0.0 {
                return Err(Error::pre("factor 1 - s is not positive"));
            }
            Ok(pow_nonneg(fs.edge, 1.0 / p.p()) / fs.outer)
        }
    }
}

/// `d ln F / ds`.
fn log_slope(class: ClassKind, fs: &Factors) -> f64 {
    match class {
        ClassKind::MuckenhouptA => 1.0 / fs.edge - 1.0 / fs.outer,
        ClassKind::ReverseHolder => 1.0 / fs.outer - 1.0 / fs.edge,
    }
}

/// Left-hand side of the implicit equation at `s`.
pub fn implicit_value(class: ClassKind, p: PParam, s: impl Into<TwoFloat>) -> Result<f64> {
    let s = s.into();
    if !s.hi().is_finite() {
        return Err(Error::pre(format!("s must be finite, got {}", s.hi())));
    }
    value_from(class, p, &factors(class, p, s))
}

fn bracket(class: ClassKind, p: PParam, t: f64, branch: Branch) -> Result<(TwoFloat, TwoFloat)> {
    let zero = TwoFloat::from(0.0);
    let one = TwoFloat::from(1.0);
    Ok(match (class, branch) {
        (ClassKind::MuckenhouptA, Branch::Plus) => (zero, one),
        (ClassKind::MuckenhouptA, Branch::Minus) => (one / p.p1(), zero),
        (ClassKind::ReverseHolder, Branch::Plus) => (zero, one / p.p()),
        (ClassKind::ReverseHolder, Branch::Minus) => {
            // unbounded branch: push the left end out until F drops below t
            let mut lo = -1.0_f64;
            while implicit_value(class, p, lo)? >= t {
                lo *= 2.0;
                if lo < -1e300 {
                    return Err(Error::NumericFailure {
                        message: "could not bracket the unbounded branch".into(),
                        lo,
                        hi: 0.0,
                    });
                }
            }
            (TwoFloat::from(lo), zero)
        }
    })
}

/// The unique `s` on `branch` with `F(s) = t`, for `t ∈ (0, 1]`.
///
/// Safeguarded Newton iteration on `ln F(s) - ln t` inside the branch
/// bracket; steps leaving the bracket or stalling fall back to bisection.
pub fn solve_branch(class: ClassKind, p: PParam, t: f64, branch: Branch) -> Result<TwoFloat> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::pre(format!("t must lie in (0, 1], got {t}")));
    }
    if t == 1.0 {
        return Ok(TwoFloat::from(0.0));
    }
    let ln_t = t.ln();
    let increasing = branch == Branch::Minus;
    let (mut lo, mut hi) = bracket(class, p, t, branch)?;

    let mut x = (lo + hi) / 2.0;
    let mut last_step = f64::from(hi - lo);
    let mut best = (f64::INFINITY, x);

    for _ in 0..MAX_ITERATIONS {
        let fs = factors(class, p, x);
        let value = value_from(class, p, &fs)?;
        let resid = (value - t).abs();
        if resid < best.0 {
            best = (resid, x);
        }
        if resid <= RESIDUAL_TOL {
            return Ok(x);
        }

        let h = value.ln() - ln_t;
        if (h < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }

        let width = f64::from(hi - lo);
        if width <= 1e-31 * (1.0 + x.hi().abs()) {
            // bracket exhausted at double-double resolution
            return Ok(best.1);
        }

        let step = -h / log_slope(class, &fs);
        let newton = x + step;
        let accept =
            step.is_finite() && newton > lo && newton < hi && 2.0 * step.abs() <= last_step.abs();
        if accept {
            last_step = step;
            x = newton;
        } else {
            let mid = (lo + hi) / 2.0;
            last_step = f64::from(mid - x);
            x = mid;
        }
    }

    Err(Error::NumericFailure {
        message: format!(
            "{class} {} branch did not reach residual {RESIDUAL_TOL:e} for t={t} in {MAX_ITERATIONS} iterations",
            branch.label()
        ),
        lo: f64::from(lo),
        hi: f64::from(hi),
    })
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(Error::pre(format!(
            "Q must exceed 1, got {q} (Q = 1 admits only constant weights)"
        )))
    }
}

pub fn sharp_range(class: ClassKind, p: PParam, q: f64) -> Result<SharpRange> {
    check_q(q)?;
    let t = 1.0 / q;
    let s_minus = solve_branch(class, p, t, Branch::Minus)?;
    let s_plus = solve_branch(class, p, t, Branch::Plus)?;
    let one = TwoFloat::from(1.0);
    Ok(SharpRange {
        class,
        p,
        q_char: q,
        s_minus,
        s_plus,
        a_lower: f64::from(one - s_minus),
        rh_upper: f64::from(one / s_plus),
    })
}

/// Exponent `α` of the power weight `x^α` whose characteristic on `[0, 1]`
/// equals `q`; `side` selects the A-side (`Minus`, `α > 0`) or the RH-side
/// (`Plus`, `α < 0`) extremizer.
pub fn extremal_alpha(class: ClassKind, p: PParam, q: f64, side: Branch) -> Result<TwoFloat> {
    check_q(q)?;
    Ok(-solve_branch(class, p, 1.0 / q, side)?)
}

/// Characteristic of `x^α` on intervals `[0, h]` with Lebesgue measure.
///
/// A-class: `(1 + α)^(-1) (1 + αp₁)^(1/p₁)`, valid for `α ∈ (-1, p - 1)`.
/// RH-class: `(1 + α)(1 + αp)^(-1/p)`, valid for `α > -1/p`.
pub fn analytic_power_characteristic(
    class: ClassKind,
    p: PParam,
    alpha: impl Into<TwoFloat>,
) -> Result<f64> {
    let alpha = alpha.into();
    let one = TwoFloat::from(1.0);
    let first = f64::from(one + alpha);
    match class {
        ClassKind::MuckenhouptA => {
            let dual = f64::from(one + alpha * p.p1());
            if first <= 0.0 {
                return Err(Error::pre("integral of w diverges (need alpha > -1)"));
            }
            if dual <= 0.0 {
                return Err(Error::pre(format!(
                    "integral of w^p1 diverges (need alpha < p - 1 = {})",
                    p.p() - 1.0
                )));
            }
            Ok((dual.ln() / p.p1() - first.ln()).exp())
        }
        ClassKind::ReverseHolder => {
            let dual = f64::from(one + alpha * p.p());
            if dual <= 0.0 || first <= 0.0 {
                return Err(Error::pre(format!(
                    "integral of w^p diverges (need alpha > -1/p = {})",
                    -1.0 / p.p()
                )));
            }
            Ok((first.ln() - dual.ln() / p.p()).exp())
        }
    }
}
