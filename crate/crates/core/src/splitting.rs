//! Recursive hyperplane splitting of a box into `2^M` sub-boxes whose
//! average points stay close enough to be joined by segments inside `Ω_{Q₁}`.
//!
//! Each node is cut along its longest physical edge at the breakpoint whose
//! mass ratio lies in `(c, 1-c)`, whose child segment stays in `Ω_{Q₁}`, and
//! whose ratio is closest to `1/2`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bellman::{psi, segment_max, AvgPoint, BellmanCandidate};
use crate::error::{Error, Result};
use crate::exponents::{ClassKind, PParam};
use crate::grid::{BoxIdx, PrefixTables, WeightedGrid};

pub const DEFAULT_C: f64 = 0.2;
pub const DEFAULT_Q1_FACTOR: f64 = 1.05;
pub const DEFAULT_SEGMENT_SAMPLES: usize = 257;

#[derive(Clone, Copy, Debug)]
pub struct SplitConfig {
    pub class: ClassKind,
    pub p: PParam,
    pub q: f64,
    pub q1: f64,
    pub c: f64,
    pub levels: usize,
    pub segment_samples: usize,
}

impl SplitConfig {
    /// Defaults: `c = 0.2`, `Q₁ = 1.05·Q`, 257 segment samples.
    pub fn new(class: ClassKind, p: PParam, q: f64, levels: usize) -> Self {
        SplitConfig {
            class,
            p,
            q,
            q1: DEFAULT_Q1_FACTOR * q,
            c: DEFAULT_C,
            levels,
            segment_samples: DEFAULT_SEGMENT_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0 && self.q1 > self.q && self.q1.is_finite()) {
            return Err(Error::pre(format!(
                "need Q1 > Q > 1, got Q = {}, Q1 = {}",
                self.q, self.q1
            )));
        }
        if !(self.c > 0.0 && self.c <= 0.5) {
            return Err(Error::pre(format!(
                "ratio constant c must lie in (0, 1/2], got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Axis of the longest edge; ties go to the smallest axis. Non-finite
/// lengths are never chosen.
pub fn choose_direction(edge_lengths: &[f64]) -> usize {
    let mut best = 0;
    for (axis, &e) in edge_lengths.iter().enumerate() {
        if e > edge_lengths[best] || !(edge_lengths[best] > f64::NEG_INFINITY) {
            best = axis;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice {
    pub axis: usize,
    /// Breakpoint index along `axis`: children are `[lo, at)` and `[at, hi)`.
    pub at: usize,
    pub coordinate: f64,
    /// `μ(left) / μ(parent)`
    pub ratio: f64,
    pub segment_max: f64,
}

/// Box averages `(⟨w⟩, ⟨w^{p₁}⟩)` or `(⟨w⟩, ⟨w^p⟩)` with masses.
pub struct Averager<'a> {
    grid: &'a WeightedGrid,
    tables: PrefixTables,
    class: ClassKind,
    p: PParam,
}

impl<'a> Averager<'a> {
    pub fn new(grid: &'a WeightedGrid, class: ClassKind, p: PParam) -> Self {
        let second = match class {
            ClassKind::MuckenhouptA => p.p1(),
            ClassKind::ReverseHolder => p.p(),
        };
        Averager {
            grid,
            tables: PrefixTables::build(grid, &[1.0, second]),
            class,
            p,
        }
    }

    pub fn mass(&self, b: &BoxIdx) -> f64 {
        self.tables.mass(b)
    }

    /// `None` for boxes of zero measure.
    pub fn point(&self, b: &BoxIdx) -> Option<(f64, AvgPoint)> {
        if !self.tables.has_mass(b) {
            return None;
        }
        let m = self.tables.mass(b);
        Some((
            m,
            AvgPoint::new(self.tables.moment(0, b) / m, self.tables.moment(1, b) / m),
        ))
    }

    pub fn psi(&self, x: AvgPoint) -> f64 {
        psi(self.class, self.p, x)
    }
}

fn choose_position_with(
    avg: &Averager,
    b: &BoxIdx,
    axis: usize,
    config: &SplitConfig,
    path: &str,
) -> Result<SplitChoice> {
    let infeasible = |best_ratio, best_segment_max| Error::InfeasibleSplit {
        path: path.to_string(),
        axis,
        best_ratio,
        best_segment_max,
    };
    if axis >= b.dim() || b.len(axis) < 2 {
        return Err(infeasible(None, None));
    }
    let total = avg.mass(b);
    let mut chosen: Option<SplitChoice> = None;
    let mut best_ratio: Option<f64> = None;
    let mut best_seg: Option<f64> = None;

    for at in b.lo(axis) + 1..b.hi(axis) {
        let (left, right) = b.split(axis, at).expect("interior breakpoint");
        let ratio = avg.mass(&left) / total;
        if best_ratio.is_none_or(|r: f64| (ratio - 0.5).abs() < (r - 0.5).abs()) {
            best_ratio = Some(ratio);
        }
        if !(ratio > config.c && ratio < 1.0 - config.c) {
            continue;
        }
        let (Some((_, xl)), Some((_, xr))) = (avg.point(&left), avg.point(&right)) else {
            continue;
        };
        let seg = segment_max(xl, xr, config.class, config.p, config.segment_samples);
        if best_seg.is_none_or(|s| seg < s) {
            best_seg = Some(seg);
        }
        if seg > config.q1 {
            continue;
        }
        let better = chosen.is_none_or(|c| (ratio - 0.5).abs() < (c.ratio - 0.5).abs());
        if better {
            chosen = Some(SplitChoice {
                axis,
                at,
                coordinate: avg.grid.measure().breaks()[axis][at],
                ratio,
                segment_max: seg,
            });
        }
    }
    chosen.ok_or_else(|| infeasible(best_ratio, best_seg))
}

/// Feasible breakpoint along `axis` with ratio closest to `1/2`.
pub fn choose_position(
    grid: &WeightedGrid,
    b: &BoxIdx,
    axis: usize,
    config: &SplitConfig,
) -> Result<SplitChoice> {
    config.validate()?;
    let avg = Averager::new(grid, config.class, config.p);
    choose_position_with(&avg, b, axis, config, "root")
}

#[derive(Clone, Debug)]
pub struct SplitNode {
    pub level: usize,
    /// `root`, then `/0` (left) or `/1` (right) per level.
    pub path: String,
    pub bx: BoxIdx,
    pub point: AvgPoint,
    pub mass: f64,
    pub diameter: f64,
    pub split: Option<SplitChoice>,
    pub children: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct SplitTree {
    pub config: SplitConfig,
    pub nodes: Vec<SplitNode>,
    /// Node indices per level, left to right.
    pub levels: Vec<Vec<usize>>,
    pub max_diameter: Vec<f64>,
}

impl SplitTree {
    pub fn root(&self) -> &SplitNode {
        &self.nodes[0]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_nodes(&self, level: usize) -> impl Iterator<Item = &SplitNode> {
        self.levels[level].iter().map(move |&i| &self.nodes[i])
    }

    pub fn leaves(&self) -> impl Iterator<Item = &SplitNode> {
        self.level_nodes(self.depth())
    }

    /// Largest relative deviation, over internal nodes and both coordinates,
    /// between a parent point and the mass-weighted combination of its
    /// children's points.
    pub fn convex_combination_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in &self.nodes {
            let Some((l, r)) = n.children else { continue };
            let (l, r) = (&self.nodes[l], &self.nodes[r]);
            let lambda = l.mass / n.mass;
            let comb = l.point.lerp(r.point, lambda);
            worst = worst
                .max((comb.x1 - n.point.x1).abs() / n.point.x1.abs())
                .max((comb.x2 - n.point.x2).abs() / n.point.x2.abs());
        }
        worst
    }

    /// Mass-weighted `L¹` distance between `w` and the level-`M` step
    /// function of `x1`, divided by `⟨w⟩` of the root; one entry per level.
    pub fn step_function_l1(&self, grid: &WeightedGrid) -> Vec<f64> {
        let shape = grid.shape();
        let mass = grid.measure().mass();
        let w = grid.weight().values();
        let root = self.root();
        (0..self.levels.len())
            .map(|level| {
                let mut total = 0.0;
                for node in self.level_nodes(level) {
                    total += cells_of(&node.bx, shape)
                        .into_iter()
                        .map(|flat| mass[flat] * (w[flat] - node.point.x1).abs())
                        .sum::<f64>();
                }
                total / root.mass / root.point.x1
            })
            .collect()
    }

    /// One row per node: level, path, box ranges, split, point, diameter.
    pub fn trace_csv(&self, header_comments: &[String]) -> Result<String> {
        let dim = self.root().bx.dim();
        let mut out = String::new();
        for c in header_comments {
            writeln!(out, "# {c}").unwrap();
        }
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["level".to_string(), "path".to_string()];
        for a in 0..dim {
            header.push(format!("lo{a}"));
            header.push(format!("hi{a}"));
        }
        for h in [
            "axis",
            "breakpoint",
            "ratio",
            "x1",
            "x2",
            "segment_max",
            "diameter",
        ] {
            header.push(h.to_string());
        }
        wtr.write_record(&header)?;
        for level in &self.levels {
            for &i in level {
                let n = &self.nodes[i];
                let mut row = vec![n.level.to_string(), n.path.clone()];
                for (lo, hi) in n.bx.ranges() {
                    row.push(lo.to_string());
                    row.push(hi.to_string());
                }
                match &n.split {
                    Some(s) => {
                        row.push(s.axis.to_string());
                        row.push(format!("{:?}", s.coordinate));
                        row.push(format!("{:?}", s.ratio));
                    }
                    None => row.extend([String::new(), String::new(), String::new()]),
                }
                row.push(format!("{:?}", n.point.x1));
                row.push(format!("{:?}", n.point.x2));
                row.push(
                    n.split
                        .map(|s| format!("{:?}", s.segment_max))
                        .unwrap_or_default(),
                );
                row.push(format!("{:?}", n.diameter));
                wtr.write_record(&row)?;
            }
        }
        out.push_str(
            &String::from_utf8(wtr.into_inner().map_err(|e| e.into_error())?).expect("utf-8"),
        );
        Ok(out)
    }
}

/// Flat indices of the cells of `b`.
/// Flat indices of the cells of `b`, row-major.
fn cells_of(b: &BoxIdx, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (axis, (lo, hi)) in b.ranges().enumerate() {
        let next = out
            .iter()
            .flat_map(|&base| (lo..hi).map(move |i| base * shape[axis] + i))
            .collect();
        out = next;
    }
    out
}

fn split_node(avg: &Averager, node: &SplitNode, config: &SplitConfig) -> Result<SplitChoice> {
    let edges = avg.grid.measure().edge_lengths(&node.bx);
    // an axis one cell wide cannot be cut; fall back to the longest other edge
    let masked: Vec<f64> = edges
        .iter()
        .enumerate()
        .map(|(a, &e)| {
            if node.bx.len(a) >= 2 {
                e
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let axis = choose_direction(&masked);
    if node.bx.len(axis) < 2 {
        return Err(Error::InfeasibleSplit {
            path: node.path.clone(),
            axis,
            best_ratio: None,
            best_segment_max: None,
        });
    }
    choose_position_with(avg, &node.bx, axis, config, &node.path)
}

/// Split `root` recursively `config.levels` times.
///
/// Levels are built breadth-first; nodes of one level are split in parallel
/// and the first infeasible node in left-to-right order is reported.
pub fn build_tree(grid: &WeightedGrid, root: &BoxIdx, config: &SplitConfig) -> Result<SplitTree> {
    config.validate()?;
    if !root.fits(grid.shape()) {
        return Err(Error::pre(format!("root box {root} does not fit the grid")));
    }
    let avg = Averager::new(grid, config.class, config.p);
    let (mass, point) = avg
        .point(root)
        .ok_or_else(|| Error::ZeroMeasureBox(root.to_string()))?;
    let measure = grid.measure();
    let mut nodes = vec![SplitNode {
        level: 0,
        path: "root".into(),
        bx: *root,
        point,
        mass,
        diameter: measure.diameter(root),
        split: None,
        children: None,
    }];
    let mut levels = vec![vec![0]];

    for level in 0..config.levels {
        let current = levels[level].clone();
        let choices: Vec<Result<SplitChoice>> = current
            .par_iter()
            .map(|&i| split_node(&avg, &nodes[i], config))
            .collect();
        let mut next = Vec::with_capacity(2 * current.len());
        for (&i, choice) in current.iter().zip(choices) {
            let choice = choice?;
            let (l, r) = nodes[i]
                .bx
                .split(choice.axis, choice.at)
                .expect("feasible split");
            let parent_path = nodes[i].path.clone();
            let mut ids = [0; 2];
            for (k, child) in [l, r].into_iter().enumerate() {
                let (mass, point) = avg
                    .point(&child)
                    .ok_or_else(|| Error::ZeroMeasureBox(child.to_string()))?;
                ids[k] = nodes.len();
                nodes.push(SplitNode {
                    level: level + 1,
                    path: format!("{parent_path}/{k}"),
                    bx: child,
                    point,
                    mass,
                    diameter: measure.diameter(&child),
                    split: None,
                    children: None,
                });
                next.push(ids[k]);
            }
            nodes[i].split = Some(choice);
            nodes[i].children = Some((ids[0], ids[1]));
        }
        levels.push(next);
    }

    let max_diameter = levels
        .iter()
        .map(|ids| ids.iter().map(|&i| nodes[i].diameter).fold(0.0, f64::max))
        .collect();
    Ok(SplitTree {
        config: *config,
        nodes,
        levels,
        max_diameter,
    })
}

#[derive(Clone, Debug)]
pub struct ChainReport {
    pub r: f64,
    /// `S_M = Σ_i μ_i/μ · B(x^{i,M})` for `M = 0..=depth`.
    pub sums: Vec<f64>,
    /// `⟨w^r⟩` over the root box.
    pub riemann: f64,
    /// `Σ_i μ_i/μ · |x1_i^r - ⟨w^r⟩_i|` per level: how far the leaf step
    /// function of `x1^r` is from `w^r` in mean.
    pub residuals: Vec<f64>,
}

impl ChainReport {
    /// Largest increase `S_{M+1} - S_M` (non-positive when the chain holds).
    pub fn worst_increase(&self) -> f64 {
        self.sums
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluate the candidate along the tree levels.
pub fn chain_report(
    tree: &SplitTree,
    grid: &WeightedGrid,
    r: f64,
    candidate: &dyn BellmanCandidate,
) -> Result<ChainReport> {
    let tables = PrefixTables::build(grid, &[r]);
    let root = tree.root();
    let riemann = tables.average(0, &root.bx)?;
    let mut sums = Vec::with_capacity(tree.levels.len());
    let mut residuals = Vec::with_capacity(tree.levels.len());
    for level in 0..tree.levels.len() {
        let mut s = 0.0;
        let mut res = 0.0;
        for n in tree.level_nodes(level) {
            let b = candidate.eval(n.point).ok_or(Error::CandidateDomain {
                x1: n.point.x1,
                x2: n.point.x2,
            })?;
            let frac = n.mass / root.mass;
            s += frac * b;
            res += frac * (n.point.x1.powf(r) - tables.average(0, &n.bx)?).abs();
        }
        sums.push(s);
        residuals.push(res);
    }
    Ok(ChainReport {
        r,
        sums,
        riemann,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::Builtin;
    use crate::grid::{power_weight_grid, validate, GridMeasure, WeightGrid};

    fn p2() -> PParam {
        PParam::new(2.0).unwrap()
    }

    fn grid_1d(masses: &[f64], weights: &[f64]) -> WeightedGrid {
        let n = masses.len();
        let breaks = (0..=n).map(|i| i as f64 / n as f64).collect();
        let m = GridMeasure::new(vec![breaks], masses.to_vec()).unwrap();
        validate(m, WeightGrid::new(vec![n], weights.to_vec()).unwrap()).unwrap()
    }

    fn cfg(q: f64, q1: f64, c: f64, levels: usize) -> SplitConfig {
        SplitConfig {
            q1,
            c,
            ..SplitConfig::new(ClassKind::MuckenhouptA, p2(), q, levels)
        }
    }

    #[test]
    fn direction_examples() {
        assert_eq!(choose_direction(&[2.0, 1.0]), 0);
        assert_eq!(choose_direction(&[1.0, 1.0]), 0);
        assert_eq!(choose_direction(&[1.0, 3.0, 2.0]), 1);
        assert_eq!(choose_direction(&[f64::NEG_INFINITY, 0.5]), 1);
    }

    #[test]
    fn position_examples() {
        let g = grid_1d(&[0.25; 4], &[1.0; 4]);
        let s = choose_position(&g, &g.full_box(), 0, &cfg(1.5, 1.6, 0.25, 1)).unwrap();
        assert_eq!((s.at, s.ratio, s.coordinate), (2, 0.5, 0.5));

        let g = grid_1d(&[0.7, 0.1, 0.1, 0.1], &[1.0; 4]);
        match choose_position(&g, &g.full_box(), 0, &cfg(1.5, 1.6, 0.4, 1)) {
            Err(Error::InfeasibleSplit { best_ratio, .. }) => {
                assert!((best_ratio.unwrap() - 0.7).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }

        let g = grid_1d(&[0.5, 0.5], &[1.0, 4.0]);
        let s = choose_position(&g, &g.full_box(), 0, &cfg(1.5625, 1.6, 0.4, 1)).unwrap();
        assert_eq!(s.ratio, 0.5);
        assert_eq!(s.segment_max, 1.5625);
        assert!(choose_position(&g, &g.full_box(), 0, &cfg(1.5, 1.55, 0.4, 1)).is_err());
    }

    #[test]
    fn uniform_tree_is_perfect() {
        let m = 6;
        let g = grid_1d(&vec![1.0 / 64.0; 64], &[1.0; 64]);
        let t = build_tree(&g, &g.full_box(), &cfg(1.5, 1.6, 0.2, m)).unwrap();
        assert_eq!(t.leaves().count(), 1 << m);
        assert!(t.nodes.iter().all(|n| n.point == AvgPoint::new(1.0, 1.0)));
        assert!(t
            .nodes
            .iter()
            .filter_map(|n| n.split)
            .all(|s| s.ratio == 0.5));
        assert_eq!(t.max_diameter[m], 1.0 / 64.0);
    }

    #[test]
    fn two_dimensional_axes_alternate() {
        let m = GridMeasure::uniform(&[16, 16]).unwrap();
        let g = validate(m, WeightGrid::new(vec![16, 16], vec![1.0; 256]).unwrap()).unwrap();
        let t = build_tree(&g, &g.full_box(), &cfg(1.5, 1.6, 0.2, 8)).unwrap();
        for level in 0..8 {
            let axes: Vec<usize> = t
                .level_nodes(level)
                .map(|n| n.split.unwrap().axis)
                .collect();
            assert!(
                axes.iter().all(|&a| a == level % 2),
                "level {level}: {axes:?}"
            );
        }
        for level in (2..=8).step_by(2) {
            assert_eq!(t.max_diameter[level], t.max_diameter[level - 2] / 2.0);
        }
    }

    #[test]
    fn power_weight_tree_and_linear_chain() {
        let g = power_weight_grid(0.5, 1 << 10).unwrap();
        let config = cfg(4.0 / 3.0, 1.5, 0.2, 6);
        let t = build_tree(&g, &g.full_box(), &config).unwrap();
        for s in t.nodes.iter().filter_map(|n| n.split) {
            assert!(s.ratio > 0.2 && s.ratio < 0.8);
            assert!(s.segment_max <= 1.5);
        }
        assert!(t.convex_combination_error() < 1e-12);
        let total: f64 = t.leaves().map(|n| n.mass).sum();
        assert!((total / t.root().mass - 1.0).abs() < 1e-12);

        let lin = Builtin::linear(ClassKind::MuckenhouptA, p2(), 1.5);
        let chain = chain_report(&t, &g, 1.0, &lin).unwrap();
        for s in &chain.sums {
            assert!((s / chain.sums[0] - 1.0).abs() < 1e-12);
        }
        assert!((chain.riemann / chain.sums[0] - 1.0).abs() < 1e-12);

        let l1 = t.step_function_l1(&g);
        assert!(l1.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn trace_has_one_row_per_node() {
        let g = grid_1d(&[0.25; 4], &[1.0; 4]);
        let t = build_tree(&g, &g.full_box(), &cfg(1.5, 1.6, 0.2, 2)).unwrap();
        let csv = t.trace_csv(&["x".into()]).unwrap();
        assert_eq!(csv.lines().count(), 1 + 1 + 7);
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("level,path,lo0,hi0,axis"));
    }
}
