use std::fmt;

use crate::characteristics::supremum;
use crate::error::{Error, Result};
use crate::exponents::{sharp_range, ClassKind, PParam, SharpRange};
use crate::grid::WeightedGrid;

/// Default relative change between the last two refinements counted as
/// stabilization.
pub const STABILIZATION_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Stabilizing,
    DivergentTrend,
    Inconclusive,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Stabilizing => "stabilizing",
            Trend::DivergentTrend => "divergent trend",
            Trend::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RefinementRow {
    pub cells: usize,
    /// Characteristic of the hypothesis class at `p`.
    pub hypothesis_value: f64,
    /// Characteristic of the target class at `q`.
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct ConclusionReport {
    pub hypothesis: ClassKind,
    pub p: PParam,
    pub big_q: f64,
    pub target: ClassKind,
    pub q: f64,
    pub range: SharpRange,
    /// Whether `q` lies strictly inside the range the theorem guarantees.
    pub q_inside: bool,
    pub rows: Vec<RefinementRow>,
    pub strictly_increasing: bool,
    /// `|v_last - v_prev| / v_prev`
    pub last_rel_change: f64,
    /// Aitken Δ² extrapolation of the last three values, when defined.
    pub extrapolated: Option<f64>,
    pub tolerance: f64,
    pub trend: Trend,
    /// False only for a divergent trend inside the range. At or past the
    /// endpoint the theorem says nothing about a particular weight (only the
    /// extremizer must blow up), so every trend there is consistent.
    pub consistent: bool,
}

fn classify(values: &[f64], tol: f64) -> (Trend, bool, f64) {
    let strictly_increasing = values.windows(2).all(|w| w[1] > w[0]);
    let n = values.len();
    let last_rel = if n >= 2 {
        (values[n - 1] - values[n - 2]).abs() / values[n - 2].abs()
    } else {
        f64::NAN
    };
    let trend = if values.iter().any(|v| v.is_infinite()) {
        Trend::DivergentTrend
    } else if last_rel <= tol {
        Trend::Stabilizing
    } else if strictly_increasing && n >= 3 {
        Trend::DivergentTrend
    } else {
        Trend::Inconclusive
    };
    (trend, strictly_increasing, last_rel)
}

/// Trend of a refinement sequence: any infinite value or (with no final
/// stabilization) strict growth over at least three values is divergent; a
/// last relative change within `tol` is stabilizing.
pub fn classify_trend(values: &[f64], tol: f64) -> Trend {
    classify(values, tol).0
}

/// Aitken Δ² extrapolation of the last three values, when defined.
pub fn aitken(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let denom = (c - b) - (b - a);
    let v = c - (c - b) * (c - b) / denom;
    (denom != 0.0 && v.is_finite()).then_some(v)
}

/// Refinement probe of the self-improvement conclusion.
///
/// `grids` is a refinement sequence of one weight. Each grid must satisfy the
/// hypothesis (`[w]_{hypothesis, p} <= Q`); the target characteristic at `q`
/// is then tracked along the sequence.
pub fn theorem_conclusion_check(
    grids: &[WeightedGrid],
    hypothesis: ClassKind,
    p: PParam,
    big_q: f64,
    target: ClassKind,
    q: f64,
    tolerance: f64,
) -> Result<ConclusionReport> {
    if grids.len() < 2 {
        return Err(Error::pre("a refinement study needs at least two grids"));
    }
    let range = sharp_range(hypothesis, p, big_q)?;
    let mut rows = Vec::with_capacity(grids.len());
    for g in grids {
        let h = supremum(g, hypothesis, p.p())?;
        if !(h.value <= big_q * (1.0 + 1e-9)) {
            return Err(Error::pre(format!(
                "hypothesis fails on the {}-cell grid: characteristic {} exceeds Q = {big_q}",
                g.measure().cell_count(),
                h.value
            )));
        }
        let t = supremum(g, target, q)?;
        rows.push(RefinementRow {
            cells: g.measure().cell_count(),
            hypothesis_value: h.value,
            value: t.value,
        });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (trend, strictly_increasing, last_rel_change) = classify(&values, tolerance);
    let q_inside = match target {
        ClassKind::MuckenhouptA => q > range.a_lower * (1.0 + 1e-9),
        ClassKind::ReverseHolder => q >= 1.0 && q < range.rh_upper * (1.0 - 1e-9),
    };
    let consistent = !(q_inside && trend == Trend::DivergentTrend);
    Ok(ConclusionReport {
        hypothesis,
        p,
        big_q,
        target,
        q,
        range,
        q_inside,
        rows,
        strictly_increasing,
        last_rel_change,
        extrapolated: aitken(&values),
        tolerance,
        trend,
        consistent,
    })
}
