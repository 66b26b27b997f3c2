//! Cell-mass discretizations of Radon measures and cell-constant weights on
//! tensor grids of dimension 1 to 3.
//!
//! Mass lives strictly inside cells and boxes are unions of whole cells, so
//! every hyperplane a box can be cut along carries zero mass.

mod boxes;
pub mod io;
mod prefix;

pub use boxes::{BoxIdx, MAX_DIM};
pub use prefix::{cell_power, PrefixTables};

use crate::error::{Error, Result};

/// Cell masses on a tensor grid. Axis `i` has `m_i + 1` breakpoints
/// delimiting `m_i` cells; masses are stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    breaks: Vec<Vec<f64>>,
    mass: Vec<f64>,
    shape: Vec<usize>,
}

impl GridMeasure {
    /// Structural construction only; value invariants are checked by
    /// [`validate`].
    pub fn new(breaks: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() > MAX_DIM {
            return Err(Error::pre(format!(
                "dimension must be 1..={MAX_DIM}, got {}",
                breaks.len()
            )));
        }
        let mut shape = Vec::with_capacity(breaks.len());
        for (axis, b) in breaks.iter().enumerate() {
            if b.len() < 2 {
                return Err(Error::pre(format!(
                    "axis {axis} needs at least two breakpoints"
                )));
            }
            shape.push(b.len() - 1);
        }
        let cells: usize = shape.iter().product();
        if mass.len() != cells {
            return Err(Error::pre(format!(
                "mass array has {} entries, grid has {cells} cells",
                mass.len()
            )));
        }
        Ok(GridMeasure {
            breaks,
            mass,
            shape,
        })
    }

    /// Lebesgue measure on the given breakpoints: each cell carries its volume.
    pub fn lebesgue(breaks: Vec<Vec<f64>>) -> Result<Self> {
        let shape: Vec<usize> = breaks.iter().map(|b| b.len().saturating_sub(1)).collect();
        let cells: usize = shape.iter().product();
        let mut mass = Vec::with_capacity(cells);
        for flat in 0..cells {
            let idx = unravel(flat, &shape);
            let vol: f64 = idx
                .iter()
                .enumerate()
                .map(|(axis, &i)| breaks[axis][i + 1] - breaks[axis][i])
                .product();
            mass.push(vol);
        }
        GridMeasure::new(breaks, mass)
    }

    /// Lebesgue measure on `[0, 1]^n` with `shape[i]` equal cells along axis `i`.
    pub fn uniform(shape: &[usize]) -> Result<Self> {
        let breaks = shape.iter().map(|&m| uniform_breaks(m)).collect();
        GridMeasure::lebesgue(breaks)
    }

    pub fn dim(&self) -> usize {
        self.breaks.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn breaks(&self) -> &[Vec<f64>] {
        &self.breaks
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn cell_count(&self) -> usize {
        self.mass.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Physical edge lengths of a box.
    pub fn edge_lengths(&self, b: &BoxIdx) -> Vec<f64> {
        (0..b.dim())
            .map(|axis| self.breaks[axis][b.hi(axis)] - self.breaks[axis][b.lo(axis)])
            .collect()
    }

    pub fn diameter(&self, b: &BoxIdx) -> f64 {
        self.edge_lengths(b)
            .iter()
            .map(|e| e * e)
            .sum::<f64>()
            .sqrt()
    }
}

/// How a weight grid was produced; power weights are regenerated exactly
/// under refinement instead of being copied cell by cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightSource {
    Tabulated,
    /// Exact cell averages of `x^alpha` on a uniform grid of `[0, 1]`.
    Power {
        alpha: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightGrid {
    values: Vec<f64>,
    shape: Vec<usize>,
    source: WeightSource,
}

impl WeightGrid {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let cells: usize = shape.iter().product();
        if values.len() != cells {
            return Err(Error::pre(format!(
                "weight array has {} entries, shape {shape:?} has {cells} cells",
                values.len()
            )));
        }
        Ok(WeightGrid {
            values,
            shape,
            source: WeightSource::Tabulated,
        })
    }

    pub fn with_source(mut self, source: WeightSource) -> Self {
        self.source = source;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn source(&self) -> WeightSource {
        self.source
    }
}

/// A measure and a weight that passed [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGrid {
    measure: GridMeasure,
    weight: WeightGrid,
}

impl WeightedGrid {
    pub fn measure(&self) -> &GridMeasure {
        &self.measure
    }

    pub fn weight(&self) -> &WeightGrid {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn shape(&self) -> &[usize] {
        self.measure.shape()
    }

    pub fn full_box(&self) -> BoxIdx {
        BoxIdx::full(self.shape())
    }

    /// The same measure with the weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<WeightedGrid> {
        let values = self.weight.values.iter().map(|w| w * c).collect();
        let weight = WeightGrid::new(self.weight.shape.clone(), values)?;
        validate(self.measure.clone(), weight)
    }

    pub fn into_parts(self) -> (GridMeasure, WeightGrid) {
        (self.measure, self.weight)
    }
}

fn fmt_cell(flat: usize, shape: &[usize]) -> String {
    let idx = unravel(flat, shape);
    let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Check every invariant of the pair and hand back the validated grid.
pub fn validate(measure: GridMeasure, weight: WeightGrid) -> Result<WeightedGrid> {
    for (axis, b) in measure.breaks.iter().enumerate() {
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::pre(format!("non-finite breakpoint on axis {axis}")));
        }
        if let Some(i) = b.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::pre(format!(
                "breakpoints not strictly increasing on axis {axis} at index {}",
                i + 1
            )));
        }
    }
    for (flat, &m) in measure.mass.iter().enumerate() {
        if !m.is_finite() {
            return Err(Error::pre(format!(
                "non-finite mass at cell {}",
                fmt_cell(flat, &measure.shape)
            )));
        }
        if m < 0.0 {
            return Err(Error::pre(format!(
                "negative mass at cell {}",
                fmt_cell(flat, &measure.shape)
            )));
        }
    }
    if !(measure.total_mass() > 0.0) {
        return Err(Error::pre("total mass must be positive"));
    }
    if weight.shape != measure.shape {
        return Err(Error::pre(format!(
            "weight shape {:?} does not match measure shape {:?}",
            weight.shape, measure.shape
        )));
    }
    for (flat, &w) in weight.values.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::pre(format!(
                "non-positive weight {w} at cell {}",
                fmt_cell(flat, &measure.shape)
            )));
        }
    }
    Ok(WeightedGrid { measure, weight })
}

pub(crate) fn uniform_breaks(m: usize) -> Vec<f64> {
    (0..=m).map(|i| i as f64 / m as f64).collect()
}

/// Row-major multi-index of a flat cell index.
pub fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for axis in (0..shape.len()).rev() {
        idx[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    idx
}

pub fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &m)| acc * m + i)
}

/// Exact average of `x^alpha` over `[a, b]`, `0 <= a < b`, `alpha > -1`.
fn power_cell_average(alpha: f64, a: f64, b: f64) -> f64 {
    let e = alpha + 1.0;
    let integral = if a == 0.0 {
        b.powf(e) / e
    } else {
        // a^e (exp(e ln(b/a)) - 1) / e, stable for e near zero
        a.powf(e) * (e * (b / a).ln()).exp_m1() / e
    };
    integral / (b - a)
}

/// The power weight `x^alpha` on `[0, 1]` with `cells` equal Lebesgue cells,
/// each valued by its exact cell average.
pub fn power_weight_grid(alpha: f64, cells: usize) -> Result<WeightedGrid> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::pre(format!(
            "power weight x^alpha needs alpha > -1 to be integrable at 0, got {alpha}"
        )));
    }
    if cells == 0 {
        return Err(Error::pre("power weight grid needs at least one cell"));
    }
    let measure = GridMeasure::uniform(&[cells])?;
    let b = &measure.breaks[0];
    let values = (0..cells)
        .map(|j| {
            if alpha == 0.0 {
                1.0
            } else {
                power_cell_average(alpha, b[j], b[j + 1])
            }
        })
        .collect();
    let weight = WeightGrid::new(vec![cells], values)?.with_source(WeightSource::Power { alpha });
    validate(measure, weight)
}

/// Split every cell into `k` equal sub-cells per axis.
///
/// Masses are divided evenly and weight values copied, except for generated
/// power weights, which are regenerated at the finer resolution.
pub fn refine(grid: &WeightedGrid, k: usize) -> Result<WeightedGrid> {
    if k < 2 {
        return Err(Error::pre(format!(
            "refinement factor must be at least 2, got {k}"
        )));
    }
    if let WeightSource::Power { alpha } = grid.weight.source {
        if grid.dim() == 1 {
            return power_weight_grid(alpha, grid.shape()[0] * k);
        }
    }
    let old = &grid.measure;
    let breaks: Vec<Vec<f64>> = old
        .breaks
        .iter()
        .map(|b| {
            let mut out = Vec::with_capacity((b.len() - 1) * k + 1);
            for w in b.windows(2) {
                for j in 0..k {
                    out.push(w[0] + (w[1] - w[0]) * j as f64 / k as f64);
                }
            }
            out.push(*b.last().unwrap());
            out
        })
        .collect();
    let shape: Vec<usize> = old.shape.iter().map(|m| m * k).collect();
    let cells: usize = shape.iter().product();
    let split = (k as f64).powi(old.dim() as i32);
    let mut mass = Vec::with_capacity(cells);
    let mut values = Vec::with_capacity(cells);
    for flat in 0..cells {
        let idx = unravel(flat, &shape);
        let parent: Vec<usize> = idx.iter().map(|i| i / k).collect();
        let pf = ravel(&parent, &old.shape);
        mass.push(old.mass[pf] / split);
        values.push(grid.weight.values[pf]);
    }
    let measure = GridMeasure::new(breaks, mass)?;
    let weight = WeightGrid::new(shape, values)?;
    validate(measure, weight)
}

/// `Σ mass·w^s / Σ mass` over `b`, answered from prefix tables.
pub fn box_average(grid: &WeightedGrid, b: &BoxIdx, s: f64) -> Result<f64> {
    let tables = PrefixTables::build(grid, &[s]);
    tables.average(0, b)
}
