use twofloat::TwoFloat;

use super::{BoxIdx, WeightedGrid, MAX_DIM};
use crate::error::{Error, Result};

/// Largest binary exponent a scaled moment cell may carry before the table
/// is shifted down; leaves headroom for sums over 2^20 cells.
const MAX_CELL_LOG2: f64 = 1000.0;

/// `w^s`, with the common exponents handled exactly.
#[inline]
pub fn cell_power(w: f64, s: f64) -> f64 {
    if s == 1.0 {
        w
    } else if s == 0.0 {
        1.0
    } else {
        w.powf(s)
    }
}

#[derive(Clone, Debug)]
struct Moment {
    exponent: f64,
    /// Table entries are true sums multiplied by `2^-shift`.
    shift: i32,
    table: Table,
}

/// Cumulative sums stored as unevaluated pairs `hi + lo` (double-double).
///
/// A box sum is a signed combination of entries as large as the grand total;
/// in plain `f64` that cancellation costs `eps·total/box` of relative
/// accuracy, which the `lo` parts give back.
#[derive(Clone, Debug)]
pub struct Table {
    pub hi: Vec<f64>,
    pub lo: Vec<f64>,
}

impl Table {
    /// `T[b] - T[a]`, accurate relative to the result.
    #[inline]
    pub fn diff(&self, a: usize, b: usize) -> f64 {
        (self.hi[b] - self.hi[a]) + (self.lo[b] - self.lo[a])
    }

    /// `Σ signs[k]·T[offsets[k]]` with compensated accumulation.
    #[inline]
    pub fn signed_sum(&self, offsets: &[usize], signs: &[f64]) -> f64 {
        let mut acc = Neumaier::new();
        for (&o, &sg) in offsets.iter().zip(signs) {
            acc.add(sg * self.hi[o]);
            acc.add(sg * self.lo[o]);
        }
        acc.value()
    }
}

/// Offsets and signs of the `2^n` lattice corners of a box.
#[derive(Clone, Copy, Debug)]
pub struct Corners {
    pub offsets: [usize; 1 << MAX_DIM],
    pub signs: [f64; 1 << MAX_DIM],
    pub count: usize,
}

impl Corners {
    #[inline]
    pub fn offsets(&self) -> &[usize] {
        &self.offsets[..self.count]
    }

    #[inline]
    pub fn signs(&self) -> &[f64] {
        &self.signs[..self.count]
    }
}

/// Cumulative-sum tables of `μ` and of `w^s·μ` for a fixed exponent set.
///
/// Entry `J` (in the `(m_0+1) × ... × (m_{n-1}+1)` lattice) is the sum over
/// cells `[0, J)`, so any box sum takes `2^n` lookups.
#[derive(Clone, Debug)]
pub struct PrefixTables {
    shape: Vec<usize>,
    strides: [usize; MAX_DIM],
    mass: Table,
    /// Count of positive-mass cells; exact, unlike the mass sums.
    support: Vec<f64>,
    moments: Vec<Moment>,
}

impl PrefixTables {
    pub fn build(grid: &WeightedGrid, exponents: &[f64]) -> PrefixTables {
        let shape = grid.shape().to_vec();
        let ext: Vec<usize> = shape.iter().map(|m| m + 1).collect();
        let mut strides = [0; MAX_DIM];
        let mut acc = 1;
        for axis in (0..ext.len()).rev() {
            strides[axis] = acc;
            acc *= ext[axis];
        }

        let mass_cells = grid.measure().mass();
        let weights = grid.weight().values();
        let mass = cumulate(&shape, &strides, mass_cells);
        let indicator: Vec<f64> = mass_cells
            .iter()
            .map(|&m| if m > 0.0 { 1.0 } else { 0.0 })
            .collect();
        let support = cumulate(&shape, &strides, &indicator).hi;

        let moments = exponents
            .iter()
            .map(|&s| {
                let log2_max = mass_cells
                    .iter()
                    .zip(weights)
                    .filter(|(m, _)| **m > 0.0)
                    .map(|(m, w)| m.log2() + s * w.log2())
                    .fold(f64::NEG_INFINITY, f64::max);
                let shift = if log2_max > MAX_CELL_LOG2 {
                    (log2_max - MAX_CELL_LOG2).ceil() as i32
                } else {
                    0
                };
                let cells: Vec<f64> = mass_cells
                    .iter()
                    .zip(weights)
                    .map(|(&m, &w)| {
                        if m == 0.0 {
                            0.0
                        } else if shift == 0 {
                            m * cell_power(w, s)
                        } else {
                            (m.log2() + s * w.log2() - f64::from(shift)).exp2()
                        }
                    })
                    .collect();
                Moment {
                    exponent: s,
                    shift,
                    table: cumulate(&shape, &strides, &cells),
                }
            })
            .collect();

        PrefixTables {
            shape,
            strides,
            mass,
            support,
            moments,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn exponent(&self, moment: usize) -> f64 {
        self.moments[moment].exponent
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides[..self.dim()]
    }

    pub fn mass_table(&self) -> &Table {
        &self.mass
    }

    pub fn support_table(&self) -> &[f64] {
        &self.support
    }

    pub fn moment_table(&self, moment: usize) -> &Table {
        &self.moments[moment].table
    }

    /// Factor converting a raw moment-table sum back to a true sum.
    pub fn moment_scale(&self, moment: usize) -> f64 {
        2f64.powi(self.moments[moment].shift)
    }

    #[inline]
    pub fn corners(&self, b: &BoxIdx) -> Corners {
        let n = self.dim();
        let mut c = Corners {
            offsets: [0; 1 << MAX_DIM],
            signs: [0.0; 1 << MAX_DIM],
            count: 1 << n,
        };
        for corner in 0..c.count {
            let mut offset = 0;
            let mut lows = 0;
            for axis in 0..n {
                if corner & (1 << axis) != 0 {
                    offset += b.hi(axis) * self.strides[axis];
                } else {
                    offset += b.lo(axis) * self.strides[axis];
                    lows += 1;
                }
            }
            c.offsets[corner] = offset;
            c.signs[corner] = if lows % 2 == 0 { 1.0 } else { -1.0 };
        }
        c
    }

    #[inline]
    fn box_sum(&self, table: &Table, b: &BoxIdx) -> f64 {
        if self.dim() == 1 {
            return table.diff(b.lo(0), b.hi(0));
        }
        let c = self.corners(b);
        table.signed_sum(c.offsets(), c.signs())
    }

    pub fn mass(&self, b: &BoxIdx) -> f64 {
        self.box_sum(&self.mass, b)
    }

    /// Whether `b` holds a cell of positive mass. Exact, so boxes of zero
    /// measure are never mistaken for tiny ones through cancellation.
    pub fn has_mass(&self, b: &BoxIdx) -> bool {
        let c = self.corners(b);
        let count: f64 = c
            .offsets()
            .iter()
            .zip(c.signs())
            .map(|(&o, &s)| s * self.support[o])
            .sum();
        count > 0.5
    }

    /// `Σ_{cells ∈ b} mass·w^s` for the `moment`-th exponent.
    pub fn moment(&self, moment: usize, b: &BoxIdx) -> f64 {
        let m = &self.moments[moment];
        let raw = self.box_sum(&m.table, b);
        if m.shift == 0 {
            raw
        } else {
            raw * self.moment_scale(moment)
        }
    }

    pub fn average(&self, moment: usize, b: &BoxIdx) -> Result<f64> {
        if !b.fits(&self.shape) {
            return Err(Error::pre(format!(
                "box {b} does not fit grid {:?}",
                self.shape
            )));
        }
        if !self.has_mass(b) {
            return Err(Error::ZeroMeasureBox(b.to_string()));
        }
        Ok(self.moment(moment, b) / self.mass(b))
    }
}

/// Compensated running sum.
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn new() -> Self {
        Neumaier {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Place `cells` at offset +1 on every axis and integrate along each axis in
/// double-double arithmetic.
fn cumulate(shape: &[usize], strides: &[usize; MAX_DIM], cells: &[f64]) -> Table {
    let n = shape.len();
    let ext: Vec<usize> = shape.iter().map(|m| m + 1).collect();
    let len: usize = ext.iter().product();
    let mut table = vec![TwoFloat::from(0.0); len];

    for (flat, &v) in cells.iter().enumerate() {
        let idx = super::unravel(flat, shape);
        let offset: usize = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| (i + 1) * strides[a])
            .sum();
        table[offset] = TwoFloat::from(v);
    }

    for axis in 0..n {
        let stride = strides[axis];
        for start in 0..len {
            if !(start / stride).is_multiple_of(ext[axis]) {
                continue;
            }
            // start of a line along `axis`
            let mut acc = TwoFloat::from(0.0);
            for j in 0..ext[axis] {
                let pos = start + j * stride;
                acc += table[pos];
                table[pos] = acc;
            }
        }
    }
    Table {
        hi: table.iter().map(|t| t.hi()).collect(),
        lo: table.iter().map(|t| t.lo()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{validate, GridMeasure, WeightGrid};

    #[test]
    fn compensated_prefix_matches_exact_sums() {
        // 0.1 is inexact; compensated accumulation keeps the total at 1e4
        let n = 100_000;
        let m = GridMeasure::new(vec![(0..=n).map(|i| i as f64).collect()], vec![0.1; n]).unwrap();
        let w = WeightGrid::new(vec![n], vec![1.0; n]).unwrap();
        let g = validate(m, w).unwrap();
        let t = PrefixTables::build(&g, &[1.0]);
        assert_eq!(t.mass(&g.full_box()), 10_000.000000000000);
    }

    #[test]
    fn huge_powers_are_shifted_not_overflowed() {
        let m = GridMeasure::uniform(&[3]).unwrap();
        let w = WeightGrid::new(vec![3], vec![1e200, 1.0, 1e-200]).unwrap();
        let g = validate(m, w).unwrap();
        let t = PrefixTables::build(&g, &[2.0, -2.0]);
        assert!(t.moment_scale(0) > 1.0);
        let b = BoxIdx::new(&[(0, 1)]).unwrap();
        assert!(t.average(0, &b).unwrap().is_infinite());
        assert!(t.average(0, &g.full_box()).unwrap().is_infinite());
        assert!(!t
            .average(0, &BoxIdx::new(&[(1, 3)]).unwrap())
            .unwrap()
            .is_nan());
        assert!(t.average(1, &g.full_box()).unwrap().is_infinite());
    }

    #[test]
    fn three_dimensional_box_sums() {
        let shape = [3, 2, 4];
        let m = GridMeasure::uniform(&shape).unwrap();
        let vals: Vec<f64> = (0..24).map(|i| 1.0 + i as f64).collect();
        let g = validate(m, WeightGrid::new(shape.to_vec(), vals.clone()).unwrap()).unwrap();
        let t = PrefixTables::build(&g, &[1.0]);
        let b = BoxIdx::new(&[(1, 3), (0, 1), (1, 4)]).unwrap();
        let mut naive = 0.0;
        for (flat, v) in vals.iter().enumerate() {
            if b.contains_cell(&crate::grid::unravel(flat, &shape)) {
                naive += v / 24.0;
            }
        }
        assert!((t.moment(0, &b) - naive).abs() < 1e-14);
        assert!((t.mass(&b) - 6.0 / 24.0).abs() < 1e-15);
    }
}
