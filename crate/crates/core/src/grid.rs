//! Functions on `[0, 1]` sampled on a uniform grid `z_j = j / N`, and
//! fourth-order quadrature over grid-aligned sub-ranges.
//!
//! Integrals over `[z_lo, z_hi]` are differences of one cumulative table
//! `C_j ≈ ∫_0^{z_j} g`. Even entries of the table are composite Simpson sums
//! from the left end, odd entries add a single cubic-exact cell to the
//! preceding even entry, and for odd `N` the final entry closes with the 3/8
//! rule over the last three cells. Every sub-range integral is therefore exact
//! for cubics, additive to rounding, and the full-range value is plain
//! composite Simpson (with a 3/8 tail when `N` is odd).

use std::io::{self, Write};

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::scalar::{from_index, lit, Real};

/// Smallest admissible cell count.
pub const MIN_CELLS: usize = 8;
pub const DEFAULT_CELLS: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least {MIN_CELLS} cells, got {0}")]
    TooCoarse(usize),
    #[error("non-finite sample at grid index {0}")]
    NonFinite(usize),
    #[error("grid mismatch: {0} cells vs {1} cells")]
    Mismatch(usize, usize),
    #[error("integration range [{lo}, {hi}] invalid for a grid of {n} cells")]
    Range { lo: usize, hi: usize, n: usize },
    #[error("evaluation failed at grid index {index}: {source}")]
    Eval {
        index: usize,
        #[source]
        source: EvalError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    /// Wraps `N + 1` samples.
    pub fn new(values: Vec<T>) -> Result<Self, GridError> {
        let n = values.len().saturating_sub(1);
        if n < MIN_CELLS {
            return Err(GridError::TooCoarse(n));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(j));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(n_cells: usize, mut f: impl FnMut(T) -> T) -> Result<Self, GridError> {
        let n = from_index::<T>(n_cells);
        Self::new((0..=n_cells).map(|j| f(from_index::<T>(j) / n)).collect())
    }

    pub fn constant(n_cells: usize, c: T) -> Result<Self, GridError> {
        Self::new(vec![c; n_cells + 1])
    }

    /// Samples `expr` at every grid point.
    pub fn sample_expression(expr: &Expr, n_cells: usize) -> Result<Self, GridError> {
        if n_cells < MIN_CELLS {
            return Err(GridError::TooCoarse(n_cells));
        }
        let n = from_index::<T>(n_cells);
        let values = (0..=n_cells)
            .map(|j| {
                expr.eval_at(from_index::<T>(j) / n)
                    .map_err(|source| GridError::Eval { index: j, source })
            })
            .collect::<Result<Vec<T>, _>>()?;
        Self::new(values)
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, j: usize) -> T {
        self.values[j]
    }

    /// Grid abscissa `j / N`.
    pub fn z(&self, j: usize) -> T {
        from_index::<T>(j) / from_index::<T>(self.n_cells())
    }

    pub fn step(&self) -> T {
        T::one() / from_index::<T>(self.n_cells())
    }

    fn check_same_grid(&self, other: &Self) -> Result<(), GridError> {
        if self.n_cells() != other.n_cells() {
            return Err(GridError::Mismatch(self.n_cells(), other.n_cells()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self, GridError> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, GridError> {
        self.check_same_grid(other)?;
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Integral of the single cell `[z_j, z_{j+1}]` from the cubic through
    /// four neighbouring samples.
    fn cell(&self, j: usize) -> T {
        let f = &self.values;
        let n = self.n_cells();
        let w = self.step() / lit::<T>(24.0);
        let c = lit::<T>;
        if j == 0 {
            w * (c(9.0) * f[0] + c(19.0) * f[1] - c(5.0) * f[2] + f[3])
        } else if j == n - 1 {
            w * (f[n - 3] - c(5.0) * f[n - 2] + c(19.0) * f[n - 1] + c(9.0) * f[n])
        } else {
            w * (c(13.0) * (f[j] + f[j + 1]) - f[j - 1] - f[j + 2])
        }
    }

    /// `S_j ≈ ∫_{z_j}^1 g` for `j = from..=N` (index 0 of the result is
    /// `S_from`). Simpson pairs are anchored at the right end; with an odd
    /// cell count the last three cells take the 3/8 rule instead. Odd offsets
    /// in between use the single-cell rule, so every `S_j` is fourth order.
    fn suffix_integrals(&self, from: usize) -> Vec<T> {
        let f = &self.values;
        let n = self.n_cells();
        let from = from.min(n);
        let h = self.step();
        let third = h / lit::<T>(3.0);
        let anchor = if n % 2 == 1 { 3 } else { 0 };
        let mut s = vec![T::zero(); n - from + 1];
        // s[m] holds S_{n-m}
        for m in 1..=n - from {
            let j = n - m;
            let paired = if m >= anchor { (m - anchor) % 2 == 0 } else { m == 2 };
            s[m] = if anchor == 3 && m == 3 {
                lit::<T>(0.375) * h * (f[j] + lit::<T>(3.0) * (f[j + 1] + f[j + 2]) + f[j + 3])
            } else if paired {
                s[m - 2] + third * (f[j] + lit::<T>(4.0) * f[j + 1] + f[j + 2])
            } else {
                s[m - 1] + self.cell(j)
            };
        }
        s.reverse();
        s
    }

    /// `∫` over `[lo/N, hi/N]`, as a difference of right-anchored tails.
    pub fn integrate_range(&self, lo: usize, hi: usize) -> Result<T, GridError> {
        let n = self.n_cells();
        if lo > hi || hi > n {
            return Err(GridError::Range { lo, hi, n });
        }
        let s = self.suffix_integrals(lo);
        Ok(s[0] - s[hi - lo])
    }

    /// `∫_0^1`.
    pub fn integral(&self) -> T {
        self.suffix_integrals(0)[0]
    }

    /// Right-tail integrals `T_j = ∫_{z_j}^1 g`, with `T_N = 0` exactly.
    pub fn tail_integral_table(&self) -> GridFunction<T> {
        GridFunction {
            values: self.suffix_integrals(0),
        }
    }

    /// CSV with header `z,value`, 17 significant digits per number.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "z,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e}", self.z(j), v)?;
        }
        Ok(())
    }
}

/// Anything with a well-defined `∫_0^1`.
pub trait Moment<T> {
    fn moment(&self) -> T;
}

impl<T: Real> Moment<T> for GridFunction<T> {
    fn moment(&self) -> T {
        self.integral()
    }
}

/// A piecewise function on the grid with jumps at grid points.
///
/// Each piece is backed by a branch sampled on the whole grid and is in force
/// from its start index up to the next piece's start. A sample sitting on a
/// breakpoint belongs to the piece on its right. Quadrature runs per piece on
/// the smooth branch, so jumps cost no accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseGrid<T> {
    pieces: Vec<(usize, GridFunction<T>)>,
}

impl<T: Real> PiecewiseGrid<T> {
    pub fn smooth(g: GridFunction<T>) -> Self {
        PiecewiseGrid {
            pieces: vec![(0, g)],
        }
    }

    /// `left` on `[0, z_at)`, `right` on `[z_at, 1]`.
    pub fn step(left: GridFunction<T>, right: GridFunction<T>, at: usize) -> Result<Self, GridError> {
        left.check_same_grid(&right)?;
        let n = left.n_cells();
        if at > n {
            return Err(GridError::Range { lo: at, hi: at, n });
        }
        let mut pw = PiecewiseGrid {
            pieces: vec![(0, left), (at, right)],
        };
        pw.normalize();
        Ok(pw)
    }

    fn normalize(&mut self) {
        let mut i = 0;
        while i + 1 < self.pieces.len() {
            if self.pieces[i].0 == self.pieces[i + 1].0 {
                self.pieces.remove(i);
            } else {
                i += 1;
            }
        }
    }

    pub fn n_cells(&self) -> usize {
        self.pieces[0].1.n_cells()
    }

    /// Start indices of the pieces (the first is always 0).
    pub fn breakpoints(&self) -> Vec<usize> {
        self.pieces.iter().map(|(s, _)| *s).collect()
    }

    fn end_of(&self, i: usize) -> usize {
        self.pieces
            .get(i + 1)
            .map_or(self.n_cells(), |(s, _)| *s)
    }

    fn branch_at(&self, j: usize) -> &GridFunction<T> {
        let i = self.pieces.partition_point(|(s, _)| *s <= j);
        &self.pieces[i.saturating_sub(1)].1
    }

    /// Sample view; a breakpoint sample takes the right piece's value.
    pub fn samples(&self) -> GridFunction<T> {
        GridFunction {
            values: (0..=self.n_cells())
                .map(|j| self.branch_at(j).value(j))
                .collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self, GridError> {
        if self.n_cells() != other.n_cells() {
            return Err(GridError::Mismatch(self.n_cells(), other.n_cells()));
        }
        let mut starts: Vec<usize> = self
            .breakpoints()
            .into_iter()
            .chain(other.breakpoints())
            .collect();
        starts.sort_unstable();
        starts.dedup();
        let pieces = starts
            .into_iter()
            .map(|s| {
                let branch = self.branch_at(s).zip_with(other.branch_at(s), &f)?;
                Ok((s, branch))
            })
            .collect::<Result<Vec<_>, GridError>>()?;
        Ok(PiecewiseGrid { pieces })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product with a smooth function.
    pub fn mul_smooth(&self, g: &GridFunction<T>) -> Result<Self, GridError> {
        let pieces = self
            .pieces
            .iter()
            .map(|(s, b)| Ok((*s, b.mul(g)?)))
            .collect::<Result<Vec<_>, GridError>>()?;
        Ok(PiecewiseGrid { pieces })
    }

    pub fn integral(&self) -> T {
        (0..self.pieces.len())
            .map(|i| {
                let (start, branch) = &self.pieces[i];
                branch
                    .integrate_range(*start, self.end_of(i))
                    .expect("pieces lie inside the grid")
            })
            .fold(T::zero(), |acc, v| acc + v)
    }
}

impl<T: Real> Moment<T> for PiecewiseGrid<T> {
    fn moment(&self) -> T {
        self.integral()
    }
}

impl<T: Real> From<GridFunction<T>> for PiecewiseGrid<T> {
    fn from(g: GridFunction<T>) -> Self {
        PiecewiseGrid::smooth(g)
    }
}
