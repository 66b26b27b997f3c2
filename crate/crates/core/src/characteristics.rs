//! `A*_p` and `RH*_p` characteristics: exact suprema over every axis-parallel
//! box made of whole grid cells.
//!
//! Boxes are visited in lexicographic order of `(lo_0, hi_0, lo_1, hi_1, ...)`
//! and the first box attaining the maximum is reported. Work is split over
//! the leading axis lower index; the merge step re-applies the same tie-break,
//! so the report does not depend on how the work was partitioned.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::{ClassKind, PParam};
use crate::grid::{BoxIdx, PrefixTables, WeightedGrid, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacteristicReport {
    pub class: ClassKind,
    pub exponent: f64,
    /// Supremum over positive-measure boxes; `+∞` if a box average overflows.
    pub value: f64,
    pub argmax: BoxIdx,
    pub boxes_scanned: u64,
}

/// How box averages combine into the characteristic.
#[derive(Clone, Copy, Debug)]
struct Combine {
    class: ClassKind,
    /// `p - 1` for the A-class, `1/p` for the RH-class.
    outer: f64,
}

impl Combine {
    fn new(class: ClassKind, exponent: f64) -> Self {
        let outer = match class {
            ClassKind::MuckenhouptA => exponent - 1.0,
            ClassKind::ReverseHolder => 1.0 / exponent,
        };
        Combine { class, outer }
    }

    /// Moment exponents the tables must carry, besides `w` itself.
    fn moment_exponent(class: ClassKind, exponent: f64) -> f64 {
        match class {
            ClassKind::MuckenhouptA => -1.0 / (exponent - 1.0),
            ClassKind::ReverseHolder => exponent,
        }
    }

    #[inline]
    fn value(&self, avg_w: f64, avg_s: f64) -> f64 {
        let powered = if self.outer == 1.0 {
            avg_s
        } else {
            avg_s.powf(self.outer)
        };
        match self.class {
            ClassKind::MuckenhouptA => avg_w * powered,
            ClassKind::ReverseHolder => powered / avg_w,
        }
    }
}

/// `⟨w⟩·⟨w^{p₁}⟩^{p-1}` (A-class) or `⟨w^p⟩^{1/p}/⟨w⟩` (RH-class) for given
/// averages.
pub fn box_value(class: ClassKind, exponent: f64, avg_w: f64, avg_moment: f64) -> f64 {
    Combine::new(class, exponent).value(avg_w, avg_moment)
}

#[derive(Clone, Copy, Debug)]
struct Best {
    value: f64,
    argmax: Option<BoxIdx>,
    scanned: u64,
}

impl Best {
    fn empty() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            argmax: None,
            scanned: 0,
        }
    }

    /// Boxes must be offered in increasing lexicographic order.
    #[inline]
    fn offer(&mut self, value: f64, b: impl FnOnce() -> BoxIdx) {
        self.scanned += 1;
        if value > self.value || (self.argmax.is_none() && !value.is_nan()) {
            self.value = value;
            self.argmax = Some(b());
        }
    }

    fn merge(self, other: Best) -> Best {
        let scanned = self.scanned + other.scanned;
        let pick_other = match (self.argmax, other.argmax) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => other.value > self.value || (other.value == self.value && b < a),
        };
        let mut out = if pick_other { other } else { self };
        out.scanned = scanned;
        out
    }
}

struct Scan<'a> {
    tables: &'a PrefixTables,
    support: &'a [f64],
    combine: Combine,
    scale: f64,
}

impl Scan<'_> {
    fn scan_1d(&self, lo: usize) -> Best {
        let m = self.tables.shape()[0];
        let mass = self.tables.mass_table();
        let w = self.tables.moment_table(0);
        let s = self.tables.moment_table(1);
        let mut best = Best::empty();
        for hi in lo + 1..=m {
            if self.support[hi] == self.support[lo] {
                continue;
            }
            let mu = mass.diff(lo, hi);
            let avg_w = w.diff(lo, hi) / mu;
            let avg_s = s.diff(lo, hi) * self.scale / mu;
            let v = self.combine.value(avg_w, avg_s);
            let mut lo_a = [0; MAX_DIM];
            let mut hi_a = [0; MAX_DIM];
            lo_a[0] = lo;
            hi_a[0] = hi;
            best.offer(v, || BoxIdx::from_arrays(1, lo_a, hi_a));
        }
        best
    }

    /// All boxes whose leading-axis range starts at `lo0`.
    fn scan_nd(&self, lo0: usize) -> Best {
        let shape = self.tables.shape();
        let n = shape.len();
        let strides = self.tables.strides();
        let mass = self.tables.mass_table();
        let w = self.tables.moment_table(0);
        let s = self.tables.moment_table(1);

        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        lo[0] = lo0;
        hi[0] = lo0 + 1;
        for axis in 1..n {
            lo[axis] = 0;
            hi[axis] = 1;
        }

        let mut best = Best::empty();
        loop {
            let count = 1usize << n;
            let mut offsets = [0usize; 1 << MAX_DIM];
            let mut signs = [0.0f64; 1 << MAX_DIM];
            let mut support = 0.0;
            for corner in 0..count {
                let mut offset = 0;
                let mut lows = 0;
                for axis in 0..n {
                    if corner & (1 << axis) != 0 {
                        offset += hi[axis] * strides[axis];
                    } else {
                        offset += lo[axis] * strides[axis];
                        lows += 1;
                    }
                }
                let sign = if lows % 2 == 0 { 1.0 } else { -1.0 };
                support += sign * self.support[offset];
                offsets[corner] = offset;
                signs[corner] = sign;
            }
            if support > 0.5 {
                let (o, sg) = (&offsets[..count], &signs[..count]);
                let mu = mass.signed_sum(o, sg);
                let v = self.combine.value(
                    w.signed_sum(o, sg) / mu,
                    s.signed_sum(o, sg) * self.scale / mu,
                );
                best.offer(v, || BoxIdx::from_arrays(n, lo, hi));
            }

            // odometer over (hi_0; lo_1, hi_1; ...) with the last axis fastest
            let mut axis = n - 1;
            loop {
                if hi[axis] < shape[axis] {
                    hi[axis] += 1;
                    break;
                }
                if axis > 0 && lo[axis] + 1 < shape[axis] {
                    lo[axis] += 1;
                    hi[axis] = lo[axis] + 1;
                    break;
                }
                if axis == 0 {
                    return best;
                }
                lo[axis] = 0;
                hi[axis] = 1;
                axis -= 1;
            }
        }
    }
}

/// Supremum of the class functional with the given exponent.
///
/// The A-class needs `exponent > 1`; the RH-class accepts `exponent >= 1`.
pub fn supremum(
    grid: &WeightedGrid,
    class: ClassKind,
    exponent: f64,
) -> Result<CharacteristicReport> {
    let ok = match class {
        ClassKind::MuckenhouptA => exponent.is_finite() && exponent > 1.0,
        ClassKind::ReverseHolder => exponent.is_finite() && exponent >= 1.0,
    };
    if !ok {
        return Err(Error::pre(format!(
            "exponent {exponent} is not valid for class {class} (A needs q > 1, RH needs q >= 1)"
        )));
    }
    let moment = Combine::moment_exponent(class, exponent);
    let tables = PrefixTables::build(grid, &[1.0, moment]);
    let scan = Scan {
        tables: &tables,
        support: tables.support_table(),
        combine: Combine::new(class, exponent),
        scale: tables.moment_scale(1),
    };
    // w itself is never shifted for validated finite weights of sane size
    let w_scale = tables.moment_scale(0);
    if w_scale != 1.0 {
        return Err(Error::NumericFailure {
            message: "weight values too large to sum in double precision".into(),
            lo: 0.0,
            hi: w_scale,
        });
    }

    let m0 = grid.shape()[0];
    let best = if grid.dim() == 1 {
        (0..m0)
            .into_par_iter()
            .map(|lo| scan.scan_1d(lo))
            .reduce(Best::empty, Best::merge)
    } else {
        (0..m0)
            .into_par_iter()
            .map(|lo| scan.scan_nd(lo))
            .reduce(Best::empty, Best::merge)
    };

    let argmax = best
        .argmax
        .ok_or_else(|| Error::pre("grid has no box of positive measure"))?;
    Ok(CharacteristicReport {
        class,
        exponent,
        value: best.value,
        argmax,
        boxes_scanned: best.scanned,
    })
}

/// `[w]_p = sup_R ⟨w⟩_R ⟨w^{p₁}⟩_R^{p-1}`.
pub fn ap_characteristic(grid: &WeightedGrid, p: PParam) -> CharacteristicReport {
    supremum(grid, ClassKind::MuckenhouptA, p.p()).expect("validated grid and p > 1")
}

/// `[w]_{RH_p} = sup_R ⟨w^p⟩_R^{1/p} / ⟨w⟩_R`.
pub fn rh_characteristic(grid: &WeightedGrid, p: PParam) -> CharacteristicReport {
    supremum(grid, ClassKind::ReverseHolder, p.p()).expect("validated grid and p > 1")
}

pub fn characteristic(grid: &WeightedGrid, class: ClassKind, p: PParam) -> CharacteristicReport {
    match class {
        ClassKind::MuckenhouptA => ap_characteristic(grid, p),
        ClassKind::ReverseHolder => rh_characteristic(grid, p),
    }
}

#[derive(Debug)]
pub struct ScanEntry {
    pub q: f64,
    pub outcome: Result<CharacteristicReport>,
}

/// Characteristics for a list of exponents; invalid entries are recorded and
/// the scan continues.
pub fn q_scan(grid: &WeightedGrid, class: ClassKind, qs: &[f64]) -> Vec<ScanEntry> {
    qs.iter()
        .map(|&q| ScanEntry {
            q,
            outcome: supremum(grid, class, q),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{power_weight_grid, validate, GridMeasure, WeightGrid};

    fn grid_1d(masses: &[f64], weights: &[f64]) -> WeightedGrid {
        let n = masses.len();
        let breaks = (0..=n).map(|i| i as f64).collect();
        let m = GridMeasure::new(vec![breaks], masses.to_vec()).unwrap();
        validate(m, WeightGrid::new(vec![n], weights.to_vec()).unwrap()).unwrap()
    }

    fn p(v: f64) -> PParam {
        PParam::new(v).unwrap()
    }

    #[test]
    fn two_cell_examples() {
        let g = grid_1d(&[0.5, 0.5], &[1.0, 4.0]);
        let a = ap_characteristic(&g, p(2.0));
        assert_eq!(a.value, 1.5625);
        assert_eq!(a.argmax, g.full_box());
        assert_eq!(a.boxes_scanned, 3);
        let r = rh_characteristic(&g, p(2.0));
        assert!((r.value - 8.5f64.sqrt() / 2.5).abs() < 1e-15);
        assert!((r.value - 1.1661904).abs() < 1e-6);
    }

    #[test]
    fn constant_weights_have_characteristic_one() {
        let m = GridMeasure::uniform(&[3, 4]).unwrap();
        let g = validate(m, WeightGrid::new(vec![3, 4], vec![2.5; 12]).unwrap()).unwrap();
        for pv in [1.5, 2.0, 7.0] {
            assert!((ap_characteristic(&g, p(pv)).value - 1.0).abs() < 1e-13);
            assert!((rh_characteristic(&g, p(pv)).value - 1.0).abs() < 1e-13);
        }

        // exact ties: the first box in lexicographic order wins
        let m = GridMeasure::uniform(&[4, 4]).unwrap();
        let g = validate(m, WeightGrid::new(vec![4, 4], vec![1.0; 16]).unwrap()).unwrap();
        let r = ap_characteristic(&g, p(3.0));
        assert_eq!(r.value, 1.0);
        assert_eq!(r.argmax.to_string(), "[0,1)x[0,1)");
        assert_eq!(r.boxes_scanned, 10 * 10);
    }

    #[test]
    fn zero_mass_boxes_are_skipped() {
        let g = grid_1d(&[1.0, 0.0, 1.0], &[1.0, 1000.0, 4.0]);
        let r = ap_characteristic(&g, p(2.0));
        // only boxes touching a massive cell count: {0},{0,1},{0,1,2},{1,2},{2}
        assert_eq!(r.boxes_scanned, 5);
        assert_eq!(r.value, 1.5625);
    }

    #[test]
    fn power_weight_approaches_analytic_value_from_below() {
        let g = power_weight_grid(0.5, 1 << 10).unwrap();
        let v = ap_characteristic(&g, p(2.0)).value;
        assert!(v <= 4.0 / 3.0 + 1e-9 && v > 4.0 / 3.0 - 0.02, "{v}");
        let g = power_weight_grid(1.0, 1 << 10).unwrap();
        let v = rh_characteristic(&g, p(2.0)).value;
        assert!((v / (2.0 / 3f64.sqrt()) - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn q_scan_examples() {
        let m = GridMeasure::uniform(&[5]).unwrap();
        let g = validate(m, WeightGrid::new(vec![5], vec![3.0; 5]).unwrap()).unwrap();
        for e in q_scan(&g, ClassKind::MuckenhouptA, &[1.5, 2.0, 3.0]) {
            assert!((e.outcome.unwrap().value - 1.0).abs() < 1e-15);
        }

        let g = grid_1d(&[0.5, 0.5], &[1.0, 4.0]);
        let scan = q_scan(&g, ClassKind::MuckenhouptA, &[2.0, 0.5, 3.0]);
        assert!(scan[1].outcome.is_err());
        let v2 = scan[0].outcome.as_ref().unwrap().value;
        let v3 = scan[2].outcome.as_ref().unwrap().value;
        assert!(v3 <= v2);

        let rh = q_scan(&g, ClassKind::ReverseHolder, &[1.0, 0.9]);
        assert_eq!(rh[0].outcome.as_ref().unwrap().value, 1.0);
        assert!(rh[1].outcome.is_err());
    }

    #[test]
    fn overflow_reports_infinity_and_the_box() {
        let g = grid_1d(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1e-300]);
        let r = supremum(&g, ClassKind::MuckenhouptA, 1.5).unwrap();
        assert!(r.value.is_infinite());
        assert_eq!(r.argmax.to_string(), "[0,3)");
    }

    #[test]
    fn merge_is_order_independent() {
        let a = BoxIdx::new(&[(0, 2)]).unwrap();
        let b = BoxIdx::new(&[(1, 2)]).unwrap();
        let x = Best {
            value: 2.0,
            argmax: Some(b),
            scanned: 3,
        };
        let y = Best {
            value: 2.0,
            argmax: Some(a),
            scanned: 4,
        };
        let l = x.merge(y);
        let r = y.merge(x);
        assert_eq!(l.argmax, Some(a));
        assert_eq!(r.argmax, Some(a));
        assert_eq!(l.scanned, 7);
    }
}
