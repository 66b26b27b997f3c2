use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Axis-parallel box given by half-open cell-index ranges `[lo_i, hi_i)`.
///
/// Boxes order lexicographically by `(lo_0, hi_0, lo_1, hi_1, ...)`, which is
/// the tie-break order of every supremum in this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoxIdx {
    dim: usize,
    lo: [usize; MAX_DIM],
    hi: [usize; MAX_DIM],
}

impl BoxIdx {
    pub fn new(ranges: &[(usize, usize)]) -> Result<Self> {
        if ranges.is_empty() || ranges.len() > MAX_DIM {
            return Err(Error::pre(format!("box dimension must be 1..={MAX_DIM}")));
        }
        let mut b = BoxIdx {
            dim: ranges.len(),
            lo: [0; MAX_DIM],
            hi: [0; MAX_DIM],
        };
        for (axis, &(lo, hi)) in ranges.iter().enumerate() {
            if lo >= hi {
                return Err(Error::pre(format!(
                    "empty range [{lo}, {hi}) on axis {axis}"
                )));
            }
            b.lo[axis] = lo;
            b.hi[axis] = hi;
        }
        Ok(b)
    }

    pub(crate) fn from_arrays(dim: usize, lo: [usize; MAX_DIM], hi: [usize; MAX_DIM]) -> Self {
        BoxIdx { dim, lo, hi }
    }

    pub fn full(shape: &[usize]) -> Self {
        let mut hi = [0; MAX_DIM];
        hi[..shape.len()].copy_from_slice(shape);
        BoxIdx {
            dim: shape.len(),
            lo: [0; MAX_DIM],
            hi,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn lo(&self, axis: usize) -> usize {
        self.lo[axis]
    }

    #[inline]
    pub fn hi(&self, axis: usize) -> usize {
        self.hi[axis]
    }

    pub fn len(&self, axis: usize) -> usize {
        self.hi[axis] - self.lo[axis]
    }

    pub fn cell_count(&self) -> usize {
        (0..self.dim).map(|a| self.len(a)).product()
    }

    pub fn ranges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim).map(move |a| (self.lo[a], self.hi[a]))
    }

    pub fn fits(&self, shape: &[usize]) -> bool {
        shape.len() == self.dim && (0..self.dim).all(|a| self.hi[a] <= shape[a])
    }

    pub fn contains_cell(&self, idx: &[usize]) -> bool {
        (0..self.dim).all(|a| self.lo[a] <= idx[a] && idx[a] < self.hi[a])
    }

    /// Cut along `axis` at breakpoint index `at` (`lo < at < hi`).
    pub fn split(&self, axis: usize, at: usize) -> Option<(BoxIdx, BoxIdx)> {
        if axis >= self.dim || at <= self.lo[axis] || at >= self.hi[axis] {
            return None;
        }
        let mut left = *self;
        let mut right = *self;
        left.hi[axis] = at;
        right.lo[axis] = at;
        Some((left, right))
    }

    fn lex_key(&self) -> [usize; 2 * MAX_DIM] {
        let mut k = [0; 2 * MAX_DIM];
        for a in 0..self.dim {
            k[2 * a] = self.lo[a];
            k[2 * a + 1] = self.hi[a];
        }
        k
    }
}

impl Ord for BoxIdx {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.lex_key().cmp(&other.lex_key()))
    }
}

impl PartialOrd for BoxIdx {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BoxIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.dim {
            if a > 0 {
                f.write_str("x")?;
            }
            write!(f, "[{},{})", self.lo[a], self.hi[a])?;
        }
        Ok(())
    }
}
