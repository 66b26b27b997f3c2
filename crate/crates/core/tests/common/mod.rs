#![allow(dead_code)]

use rand::Rng;
use strong_weights::exponents::ClassKind;
use strong_weights::grid::{unravel, validate, BoxIdx, GridMeasure, WeightGrid, WeightedGrid};

/// Random grid whose masses are small integers over 16 and whose weights are
/// powers of 4, so every box sum below is exact in double precision.
pub fn dyadic_grid(rng: &mut impl Rng, max_dim: usize, max_cells: usize) -> WeightedGrid {
    let dim = rng.gen_range(1..=max_dim);
    let shape: Vec<usize> = (0..dim).map(|_| rng.gen_range(1..=max_cells)).collect();
    let breaks: Vec<Vec<f64>> = shape
        .iter()
        .map(|&m| {
            let mut x = 0.0;
            let mut b = vec![0.0];
            for _ in 0..m {
                x += rng.gen_range(1..=4) as f64 / 4.0;
                b.push(x);
            }
            b
        })
        .collect();
    let n: usize = shape.iter().product();
    let mass: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(1..=8) as f64 / 16.0
            }
        })
        .collect();
    let mut mass = mass;
    if mass.iter().all(|&m| m == 0.0) {
        mass[0] = 1.0;
    }
    let values: Vec<f64> = (0..n).map(|_| 4f64.powi(rng.gen_range(-2..=2))).collect();
    validate(
        GridMeasure::new(breaks, mass).unwrap(),
        WeightGrid::new(shape, values).unwrap(),
    )
    .unwrap()
}

/// Random grid with arbitrary positive masses and log-uniform weights.
pub fn random_grid(rng: &mut impl Rng, max_dim: usize, max_cells: usize) -> WeightedGrid {
    let dim = rng.gen_range(1..=max_dim);
    let shape: Vec<usize> = (0..dim).map(|_| rng.gen_range(1..=max_cells)).collect();
    let n: usize = shape.iter().product();
    let measure = GridMeasure::new(
        shape
            .iter()
            .map(|&m| (0..=m).map(|i| i as f64 / m as f64).collect())
            .collect(),
        (0..n).map(|_| rng.gen_range(0.1..1.0)).collect(),
    )
    .unwrap();
    let values = (0..n).map(|_| rng.gen_range(-2.0f64..2.0).exp()).collect();
    validate(measure, WeightGrid::new(shape, values).unwrap()).unwrap()
}

/// Every box in lexicographic `(lo0, hi0, lo1, hi1, ...)` order.
pub fn all_boxes(shape: &[usize]) -> Vec<BoxIdx> {
    let mut per_axis: Vec<Vec<(usize, usize)>> = Vec::new();
    for &m in shape {
        let mut v = Vec::new();
        for lo in 0..m {
            for hi in lo + 1..=m {
                v.push((lo, hi));
            }
        }
        per_axis.push(v);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; shape.len()];
    loop {
        let ranges: Vec<(usize, usize)> = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| per_axis[a][i])
            .collect();
        out.push(BoxIdx::new(&ranges).unwrap());
        let mut axis = shape.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per_axis[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Plain loop sums `(μ(R), Σ μ w, Σ μ w^s)`.
pub fn naive_sums(grid: &WeightedGrid, b: &BoxIdx, s: f64) -> (f64, f64, f64) {
    let shape = grid.shape();
    let mass = grid.measure().mass();
    let w = grid.weight().values();
    let (mut m, mut sw, mut ss) = (0.0, 0.0, 0.0);
    for flat in 0..mass.len() {
        if b.contains_cell(&unravel(flat, shape)) && mass[flat] > 0.0 {
            m += mass[flat];
            sw += mass[flat] * w[flat];
            ss += mass[flat] * w[flat].powf(s);
        }
    }
    (m, sw, ss)
}

/// Exhaustive characteristic by direct summation; first strict maximum wins.
pub fn naive_characteristic(grid: &WeightedGrid, class: ClassKind, p: f64) -> (f64, BoxIdx) {
    let s = match class {
        ClassKind::MuckenhouptA => -1.0 / (p - 1.0),
        ClassKind::ReverseHolder => p,
    };
    let mut best: Option<(f64, BoxIdx)> = None;
    for b in all_boxes(grid.shape()) {
        let (m, sw, ss) = naive_sums(grid, &b, s);
        if m == 0.0 {
            continue;
        }
        let (aw, as_) = (sw / m, ss / m);
        let v = match class {
            ClassKind::MuckenhouptA => aw * as_.powf(p - 1.0),
            ClassKind::ReverseHolder => as_.powf(1.0 / p) / aw,
        };
        if best.is_none_or(|(bv, _)| v > bv) {
            best = Some((v, b));
        }
    }
    best.unwrap()
}
