//! Finite-depth martingales on `grid^n` with the canonical product filtration.
//!
//! A [`MartingaleField`] stores only the terminal values `F_n`; every level
//! `F_k = E_k F_n` and every difference `Δ_k F = F_k - F_{k-1}` is recomputed
//! by averaging. Arrays over `grid^k` are flat vectors of length `N^k` with
//! coordinate 1 varying slowest, so the prefix `x ∈ grid^{k-1}` of an index
//! `i ∈ grid^k` is `i / N` and the newest coordinate is `i % N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::torus::{GridFunction, TorusGrid};
use crate::{Complex, Error, Result};

/// Upper bound on `N^n`.
pub const MAX_ENTRIES: usize = 1 << 24;

/// Tolerance for `| |w| - 1 |` on transform phases.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Tolerance used when an operation requires Hardy input.
pub const HARDY_TOL: f64 = 1e-10;

pub(crate) fn checked_size(n_points: usize, depth: usize) -> Result<usize> {
    u32::try_from(depth)
        .ok()
        .and_then(|d| n_points.checked_pow(d))
        .filter(|&size| size <= MAX_ENTRIES)
        .ok_or(Error::TooLarge { n_points, depth })
}

#[inline]
pub(crate) fn pow(n_points: usize, k: usize) -> usize {
    n_points.pow(k as u32)
}

/// Averages consecutive blocks of `block` entries.
fn block_mean(values: &[Complex], block: usize) -> Vec<Complex> {
    let scale = 1.0 / block as f64;
    values
        .chunks_exact(block)
        .map(|chunk| chunk.iter().sum::<Complex>() * scale)
        .collect()
}

/// `E_{k-1}|Δ|²` for an array over `grid^k`: mean of `|·|²` over the newest
/// coordinate.
pub(crate) fn conditional_second_moment(values: &[Complex], n_points: usize) -> Vec<f64> {
    let scale = 1.0 / n_points as f64;
    values
        .chunks_exact(n_points)
        .map(|slice| slice.iter().map(|v| v.norm_sqr()).sum::<f64>() * scale)
        .collect()
}

/// Broadcasts per-level arrays (`levels[k-1]` over `grid^{k-1}`) onto
/// `grid^{n-1}` and sums them, `n = levels.len()`.
pub(crate) fn broadcast_sum(levels: &[Vec<f64>], n_points: usize) -> Vec<f64> {
    let depth = levels.len();
    if depth == 0 {
        return vec![0.0];
    }
    let size = pow(n_points, depth - 1);
    (0..size)
        .map(|x| {
            levels
                .iter()
                .enumerate()
                .map(|(k0, level)| level[x / pow(n_points, depth - 1 - k0)])
                .sum()
        })
        .collect()
}

/// Conditional expectation given the dyadic σ-algebra restricted to the
/// first `k` coordinates, for an array over `grid^k`: averages over the
/// cells `{x′ : sign Re x′_i = sign Re x_i, i ≤ k}`.
pub fn dyadic_average(grid: TorusGrid, values: &[Complex], k: usize) -> Vec<Complex> {
    let n = grid.n_points();
    debug_assert_eq!(values.len(), pow(n, k));
    let cell_of = |mut index: usize| {
        let mut cell = 0usize;
        for bit in 0..k {
            if grid.sign(index % n) > 0.0 {
                cell |= 1 << bit;
            }
            index /= n;
        }
        cell
    };
    let mut sums = vec![Complex::new(0.0, 0.0); 1 << k];
    let cells: Vec<usize> = (0..values.len()).map(cell_of).collect();
    for (&cell, &v) in cells.iter().zip(values) {
        sums[cell] += v;
    }
    // every cell holds (N/2)^k points
    let count = pow(n / 2, k) as f64;
    cells.iter().map(|&cell| sums[cell] / count).collect()
}

/// Adapted unimodular multipliers `w_0, …, w_{n-1}`, `w_k` over `grid^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedPhases {
    grid: TorusGrid,
    phases: Vec<Vec<Complex>>,
}

impl AdaptedPhases {
    pub fn new(grid: TorusGrid, phases: Vec<Vec<Complex>>) -> Result<Self> {
        for (k, level) in phases.iter().enumerate() {
            let expected = checked_size(grid.n_points(), k)?;
            if level.len() != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    actual: level.len(),
                });
            }
            if let Some(w) = level
                .iter()
                .find(|w| (w.norm() - 1.0).abs() > UNIMODULAR_TOL)
            {
                return Err(Error::NotUnimodular { modulus: w.norm() });
            }
        }
        Ok(Self { grid, phases })
    }

    /// `w_k(x) = e^{i φ_k(x)}`.
    pub fn from_angles(grid: TorusGrid, angles: &[Vec<f64>]) -> Result<Self> {
        let phases = angles
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|&phi| Complex::from_polar(1.0, phi))
                    .collect()
            })
            .collect();
        Self::new(grid, phases)
    }

    pub fn constant(grid: TorusGrid, depth: usize, w: Complex) -> Result<Self> {
        checked_size(grid.n_points(), depth)?;
        let phases = (0..depth)
            .map(|k| vec![w; pow(grid.n_points(), k)])
            .collect();
        Self::new(grid, phases)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn depth(&self) -> usize {
        self.phases.len()
    }

    /// `w_k`, an array over `grid^k`.
    pub fn phase(&self, k: usize) -> &[Complex] {
        &self.phases[k]
    }

    pub fn levels(&self) -> &[Vec<Complex>] {
        &self.phases
    }
}

/// Per-level conditional second moments `q_k = E_{k-1}|Δ_k|²` and the
/// conditional square function `s = (Σ_k q_k)^{1/2}` over `grid^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareFunctionProfile {
    n_points: usize,
    moments: Vec<Vec<f64>>,
    square_function: Vec<f64>,
}

impl SquareFunctionProfile {
    /// `moments[k-1]` is `q_k`, an array over `grid^{k-1}`.
    pub fn from_moments(grid: TorusGrid, moments: Vec<Vec<f64>>) -> Self {
        let square_function = broadcast_sum(&moments, grid.n_points())
            .into_iter()
            .map(|s2| s2.max(0.0).sqrt())
            .collect();
        Self {
            n_points: grid.n_points(),
            moments,
            square_function,
        }
    }

    pub fn depth(&self) -> usize {
        self.moments.len()
    }

    /// `q_k` for `1 ≤ k ≤ depth`.
    pub fn moment(&self, k: usize) -> &[f64] {
        &self.moments[k - 1]
    }

    pub fn moments(&self) -> &[Vec<f64>] {
        &self.moments
    }

    pub fn square_function(&self) -> &[f64] {
        &self.square_function
    }

    /// `‖(Σ_k E_{k-1}|Δ_k|²)^{1/2}‖_{L¹}`.
    pub fn previsible_norm(&self) -> f64 {
        self.square_function.iter().sum::<f64>() / self.square_function.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleField {
    grid: TorusGrid,
    depth: usize,
    terminal: Vec<Complex>,
}

impl MartingaleField {
    pub fn new(grid: TorusGrid, depth: usize, terminal: Vec<Complex>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroDepth);
        }
        let expected = checked_size(grid.n_points(), depth)?;
        if terminal.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: terminal.len(),
            });
        }
        Ok(Self {
            grid,
            depth,
            terminal,
        })
    }

    /// Terminal values from a function of the coordinate indices
    /// `(j_1, …, j_n)`.
    pub fn from_fn(
        grid: TorusGrid,
        depth: usize,
        mut f: impl FnMut(&[usize]) -> Complex,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroDepth);
        }
        let size = checked_size(grid.n_points(), depth)?;
        let n = grid.n_points();
        let mut coords = vec![0usize; depth];
        let terminal = (0..size)
            .map(|mut i| {
                for c in coords.iter_mut().rev() {
                    *c = i % n;
                    i /= n;
                }
                f(&coords)
            })
            .collect();
        Self::new(grid, depth, terminal)
    }

    /// Assembles `mean + Σ_k Δ_k` from difference arrays (`diffs[k-1]` over
    /// `grid^k`). Differences are expected to have vanishing conditional mean;
    /// otherwise the field's own differences will differ from the input.
    pub fn from_differences(
        grid: TorusGrid,
        mean: Complex,
        diffs: &[Vec<Complex>],
    ) -> Result<Self> {
        let depth = diffs.len();
        if depth == 0 {
            return Err(Error::ZeroDepth);
        }
        let n = grid.n_points();
        let size = checked_size(n, depth)?;
        for (k0, d) in diffs.iter().enumerate() {
            let expected = pow(n, k0 + 1);
            if d.len() != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    actual: d.len(),
                });
            }
        }
        let terminal = (0..size)
            .map(|i| {
                mean + diffs
                    .iter()
                    .enumerate()
                    .map(|(k0, d)| d[i / pow(n, depth - 1 - k0)])
                    .sum::<Complex>()
            })
            .collect();
        Self::new(grid, depth, terminal)
    }

    pub fn zero(grid: TorusGrid, depth: usize) -> Result<Self> {
        let size = checked_size(grid.n_points(), depth)?;
        Self::new(grid, depth, vec![Complex::new(0.0, 0.0); size])
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn terminal(&self) -> &[Complex] {
        &self.terminal
    }

    fn check_level(&self, k: usize, lowest: usize) -> Result<()> {
        if k < lowest || k > self.depth {
            return Err(Error::LevelOutOfRange {
                level: k,
                depth: self.depth,
            });
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                self.grid.n_points(),
                other.grid.n_points(),
            ));
        }
        if self.depth != other.depth {
            return Err(Error::DepthMismatch {
                phases: other.depth,
                field: self.depth,
            });
        }
        Ok(())
    }

    /// All levels `F_0, …, F_n`; `levels[k]` is an array over `grid^k`.
    pub fn levels(&self) -> Vec<Vec<Complex>> {
        let n = self.grid.n_points();
        let mut levels = vec![self.terminal.clone()];
        for _ in 0..self.depth {
            let next = block_mean(levels.last().expect("non-empty"), n);
            levels.push(next);
        }
        levels.reverse();
        levels
    }

    /// `F_k = E_k F_n`, an array over `grid^k`.
    pub fn level(&self, k: usize) -> Result<Vec<Complex>> {
        self.check_level(k, 0)?;
        let mut current = self.terminal.clone();
        for _ in k..self.depth {
            current = block_mean(&current, self.grid.n_points());
        }
        Ok(current)
    }

    pub fn mean(&self) -> Complex {
        self.terminal.iter().sum::<Complex>() / self.terminal.len() as f64
    }

    /// `Δ_k F = F_k - F_{k-1}` as an array over `grid^k`.
    pub fn difference(&self, k: usize) -> Result<Vec<Complex>> {
        self.check_level(k, 1)?;
        let fine = self.level(k)?;
        let coarse = block_mean(&fine, self.grid.n_points());
        Ok(Self::subtract_parent(&fine, &coarse, self.grid.n_points()))
    }

    fn subtract_parent(fine: &[Complex], coarse: &[Complex], n: usize) -> Vec<Complex> {
        fine.iter()
            .enumerate()
            .map(|(i, &v)| v - coarse[i / n])
            .collect()
    }

    /// `Δ_1 F, …, Δ_n F`.
    pub fn differences(&self) -> Vec<Vec<Complex>> {
        let n = self.grid.n_points();
        let levels = self.levels();
        levels
            .windows(2)
            .map(|pair| Self::subtract_parent(&pair[1], &pair[0], n))
            .collect()
    }

    pub fn cond_square_profile(&self) -> SquareFunctionProfile {
        let n = self.grid.n_points();
        let moments = self
            .differences()
            .iter()
            .map(|d| conditional_second_moment(d, n))
            .collect();
        SquareFunctionProfile::from_moments(self.grid, moments)
    }

    /// `‖F‖_P = ‖(Σ_k E_{k-1}|Δ_k F|²)^{1/2}‖_{L¹}`.
    pub fn previsible_norm(&self) -> f64 {
        self.cond_square_profile().previsible_norm()
    }

    /// Differences of the cosine part: `u_k(x, y) = (g_k(x, y) + g_k(x, ȳ)) / 2`.
    pub fn cosine_differences(&self) -> Vec<Vec<Complex>> {
        let n = self.grid.n_points();
        self.differences()
            .into_iter()
            .map(|d| {
                d.chunks_exact(n)
                    .flat_map(|slice| (0..n).map(move |y| (slice[y] + slice[n - 1 - y]) * 0.5))
                    .collect()
            })
            .collect()
    }

    /// The cosine martingale `U`, built difference-wise; it carries the mean
    /// of `F`.
    pub fn cosine_part(&self) -> Self {
        Self::from_differences(self.grid, self.mean(), &self.cosine_differences())
            .expect("shape is inherited from a valid field")
    }

    /// The sine martingale `V = F - U`.
    pub fn sine_part(&self) -> Self {
        self.sub(&self.cosine_part()).expect("same shape")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let terminal = self
            .terminal
            .iter()
            .zip(&other.terminal)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.grid, self.depth, terminal)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let terminal = self
            .terminal
            .iter()
            .zip(&other.terminal)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.grid, self.depth, terminal)
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self {
            grid: self.grid,
            depth: self.depth,
            terminal: self.terminal.iter().map(|v| v * c).collect(),
        }
    }

    /// `T_W F = Im[Σ_k w_{k-1} Δ_k F]`, a real-valued martingale with mean 0.
    pub fn transform(&self, phases: &AdaptedPhases) -> Result<Self> {
        if phases.grid() != self.grid {
            return Err(Error::GridMismatch(
                self.grid.n_points(),
                phases.grid().n_points(),
            ));
        }
        if phases.depth() < self.depth {
            return Err(Error::DepthMismatch {
                phases: phases.depth(),
                field: self.depth,
            });
        }
        let n = self.grid.n_points();
        let diffs: Vec<Vec<Complex>> = self
            .differences()
            .iter()
            .enumerate()
            .map(|(k0, d)| {
                let w = phases.phase(k0);
                d.iter()
                    .enumerate()
                    .map(|(i, &v)| Complex::new((w[i / n] * v).im, 0.0))
                    .collect()
            })
            .collect();
        Self::from_differences(self.grid, Complex::new(0.0, 0.0), &diffs)
    }

    /// `E(F | D)` taken difference-wise: `Δ_k` is averaged over the dyadic
    /// cell fixed by the signs of the first `k` coordinates.
    pub fn dyadic_project(&self) -> Self {
        let diffs: Vec<Vec<Complex>> = self
            .differences()
            .iter()
            .enumerate()
            .map(|(k0, d)| dyadic_average(self.grid, d, k0 + 1))
            .collect();
        Self::from_differences(self.grid, self.mean(), &diffs).expect("same shape")
    }

    /// Every conditioned difference `y ↦ Δ_k F(x, y)` is in the discrete
    /// `H²₀` at tolerance `tol`.
    ///
    /// Slices are judged relative to `max(‖slice‖₂², E|F_n|²)` so that
    /// differences which vanish up to round-off count as analytic.
    pub fn is_hardy_martingale(&self, tol: f64) -> bool {
        let n = self.grid.n_points();
        let floor =
            self.terminal.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.terminal.len() as f64;
        self.differences().iter().all(|d| {
            d.chunks_exact(n).all(|slice| {
                GridFunction::new(self.grid, slice.to_vec())
                    .expect("slice has N entries")
                    .is_hardy_with_floor(tol, floor)
            })
        })
    }

    /// `(‖U‖_P, ‖T_W F‖_P)`; equal for Hardy `F`.
    pub fn check_transform_isometry(&self, phases: &AdaptedPhases) -> Result<(f64, f64)> {
        if !self.is_hardy_martingale(HARDY_TOL) {
            return Err(Error::NotHardyMartingale);
        }
        let transformed = self.transform(phases)?;
        Ok((
            self.cosine_part().previsible_norm(),
            transformed.previsible_norm(),
        ))
    }
}
