//! One copy of the circle: a half-step-shifted uniform grid and the function
//! space living on it.
//!
//! Grid points sit at `θ_j = 2π(j + 1/2)/N` with `N ≡ 0 (mod 4)`. With that
//! shift the reflection `j ↦ N - 1 - j` realises complex conjugation without
//! fixed points, no point has `cos θ_j = 0`, and the sign function
//! `σ(ζ) = sign Re ζ` has mean exactly zero. Fourier coefficients are indexed by
//! `m ∈ {-N/2, …, N/2 - 1}`; `m = -N/2` is the unpaired Nyquist bucket.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::RangeInclusive;

use crate::{Complex, Error, Result};

/// Relative tolerance used to decide whether an input is real, mean-zero or
/// free of Nyquist energy.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n_points: usize,
}

impl TorusGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 4 || !n_points.is_multiple_of(4) {
            return Err(Error::InvalidGridSize(n_points));
        }
        Ok(Self { n_points })
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + 0.5) / self.n_points as f64
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.angle(j))
    }

    /// Index of the conjugate point: `θ_{κ(j)} = 2π - θ_j`.
    #[inline]
    pub fn conjugate_index(&self, j: usize) -> usize {
        self.n_points - 1 - j
    }

    /// `sign cos θ_j` as `±1`, decided on the index so it is exact.
    #[inline]
    pub fn sign(&self, j: usize) -> f64 {
        let quarter = self.n_points / 4;
        if j < quarter || j >= 3 * quarter {
            1.0
        } else {
            -1.0
        }
    }

    /// Lowest frequency index; this is the Nyquist bucket.
    #[inline]
    pub fn nyquist(&self) -> i64 {
        -((self.n_points / 2) as i64)
    }

    pub fn frequencies(&self) -> RangeInclusive<i64> {
        self.nyquist()..=(self.n_points as i64 / 2 - 1)
    }

    /// Highest frequency an analytic function may use without touching the
    /// Nyquist bucket.
    #[inline]
    pub fn max_analytic_degree(&self) -> usize {
        self.n_points / 2 - 1
    }

    /// `e^{iπ t / N}` for every `t ∈ 0..2N`.
    fn half_roots(&self) -> Vec<Complex> {
        let n = self.n_points as f64;
        (0..2 * self.n_points)
            .map(|t| {
                let phi = PI * t as f64 / n;
                Complex::new(phi.cos(), phi.sin())
            })
            .collect()
    }

    /// Index into [`Self::half_roots`] for `e^{i m θ_j}`.
    #[inline]
    fn phase_index(&self, m: i64, j: usize) -> usize {
        let period = 2 * self.n_points as i64;
        (m * (2 * j as i64 + 1)).rem_euclid(period) as usize
    }

    /// The character `θ ↦ e^{i m θ}` sampled on the grid.
    pub fn character(&self, m: i64) -> GridFunction {
        let roots = self.half_roots();
        let values = (0..self.n_points)
            .map(|j| roots[self.phase_index(m, j)])
            .collect();
        GridFunction {
            grid: *self,
            values,
        }
    }

    /// `σ(ζ) = sign Re ζ` on the grid.
    pub fn sigma(&self) -> GridFunction {
        GridFunction {
            grid: *self,
            values: (0..self.n_points)
                .map(|j| Complex::new(self.sign(j), 0.0))
                .collect(),
        }
    }
}

/// Discrete Fourier coefficients `ĉ(m)`, `m ∈ {-N/2, …, N/2 - 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex>,
}

impl Spectrum {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: alloc::vec![Complex::new(0.0, 0.0); grid.n_points],
        }
    }

    /// Builds a spectrum from coefficients ordered from `m = -N/2` upwards.
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                actual: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    fn slot(&self, m: i64) -> usize {
        assert!(
            self.grid.frequencies().contains(&m),
            "frequency {m} outside the grid's band"
        );
        (m - self.grid.nyquist()) as usize
    }

    /// Coefficient at frequency `m`. Panics if `m` is outside the band.
    pub fn coefficient(&self, m: i64) -> Complex {
        self.coeffs[self.slot(m)]
    }

    pub fn set(&mut self, m: i64, value: Complex) {
        let slot = self.slot(m);
        self.coeffs[slot] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex)> + '_ {
        self.grid.frequencies().zip(self.coeffs.iter().copied())
    }

    /// Whether the coefficients are those of a real-valued function:
    /// `ĉ(-m) = conj ĉ(m)` for `|m| < N/2` and a purely imaginary Nyquist
    /// coefficient (on the shifted grid `e^{-iN/2 θ_j}` equals `-i(-1)^j`).
    pub fn is_real_signal(&self, tol: f64) -> bool {
        let scale = self.energy().sqrt().max(f64::MIN_POSITIVE);
        let half = self.grid.n_points as i64 / 2;
        let paired = (1..half)
            .all(|m| (self.coefficient(-m) - self.coefficient(m).conj()).norm() <= tol * scale);
        paired
            && self.coefficient(0).im.abs() <= tol * scale
            && self.coefficient(-half).re.abs() <= tol * scale
    }

    /// `Σ |ĉ(m)|²`, equal to `‖f‖₂²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn synthesize(&self) -> GridFunction {
        let grid = self.grid;
        let roots = grid.half_roots();
        let values = (0..grid.n_points)
            .map(|j| {
                self.iter()
                    .map(|(m, c)| c * roots[grid.phase_index(m, j)])
                    .sum()
            })
            .collect();
        GridFunction { grid, values }
    }
}

/// A complex-valued function on one copy of the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<Complex>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<Complex>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: TorusGrid) -> Self {
        Self::constant(grid, Complex::new(0.0, 0.0))
    }

    pub fn constant(grid: TorusGrid, value: Complex) -> Self {
        Self {
            grid,
            values: alloc::vec![value; grid.n_points],
        }
    }

    /// Samples `f(θ_j)`.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(f64) -> Complex) -> Self {
        Self {
            grid,
            values: grid.angles().map(&mut f).collect(),
        }
    }

    /// Analytic polynomial `Σ_{m=1}^{d} c_m e^{imθ}` with `coeffs[m-1] = c_m`.
    pub fn analytic_polynomial(grid: TorusGrid, coeffs: &[Complex]) -> Result<Self> {
        if coeffs.len() > grid.max_analytic_degree() {
            return Err(Error::NyquistEnergy);
        }
        let mut spectrum = Spectrum::zeros(grid);
        for (m, &c) in (1..).zip(coeffs) {
            spectrum.set(m, c);
        }
        Ok(spectrum.synthesize())
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex> {
        self.values
    }

    pub fn map(&self, mut f: impl FnMut(Complex) -> Complex) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        mut f: impl FnMut(Complex, Complex) -> Complex,
    ) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex) -> Self {
        self.map(|v| v * c)
    }

    fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n_points, other.grid.n_points));
        }
        Ok(())
    }

    /// `ĉ(m) = (1/N) Σ_j f(θ_j) e^{-imθ_j}`.
    pub fn analyze(&self) -> Spectrum {
        let grid = self.grid;
        let roots = grid.half_roots();
        let n = grid.n_points as f64;
        let coeffs = grid
            .frequencies()
            .map(|m| {
                let sum: Complex = self
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * roots[grid.phase_index(-m, j)])
                    .sum();
                sum / n
            })
            .collect();
        Spectrum { grid, coeffs }
    }

    /// Fourier multiplier `-i sign(m)`; the Nyquist bucket is sent to zero.
    pub fn hilbert(&self) -> Self {
        let mut spectrum = self.analyze();
        for (slot, m) in self.grid.frequencies().enumerate() {
            let factor = if m == self.grid.nyquist() || m == 0 {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, -(m.signum() as f64))
            };
            spectrum.coeffs[slot] *= factor;
        }
        spectrum.synthesize()
    }

    /// Rebuilds the analytic `h = -Hy + iy` from a real, mean-zero,
    /// Nyquist-free `y = Im h`.
    pub fn from_imaginary_part(y: &GridFunction) -> Result<Self> {
        let scale = y.l2_norm();
        if y.values.iter().any(|v| v.im.abs() > STRUCTURE_TOL * scale) {
            return Err(Error::NotReal);
        }
        if y.mean().norm() > STRUCTURE_TOL * scale {
            return Err(Error::NonZeroMean);
        }
        if y.nyquist_coefficient().norm() > STRUCTURE_TOL * scale {
            return Err(Error::NyquistEnergy);
        }
        let hy = y.hilbert();
        y.zip_with(&hy, |yv, hv| Complex::new(-hv.re, yv.re))
    }

    pub fn nyquist_coefficient(&self) -> Complex {
        let grid = self.grid;
        let roots = grid.half_roots();
        let sum: Complex = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| v * roots[grid.phase_index(-grid.nyquist(), j)])
            .sum();
        sum / grid.n_points as f64
    }

    /// Energy outside the analytic band `1 ≤ m ≤ N/2 - 1`, together with the
    /// total energy.
    pub(crate) fn non_analytic_energy(&self) -> (f64, f64) {
        let spectrum = self.analyze();
        let bad = spectrum
            .iter()
            .filter(|&(m, _)| m <= 0)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        (bad, spectrum.energy())
    }

    /// Membership in the discrete `H²₀`: the energy at `m ≤ 0` (Nyquist
    /// included) is at most `tol²·‖f‖₂²`. The zero function passes.
    pub fn is_hardy(&self, tol: f64) -> bool {
        self.is_hardy_with_floor(tol, 0.0)
    }

    /// As [`Self::is_hardy`], measuring the defect against
    /// `max(‖f‖₂², floor)`, so that round-off noise in a slice that should
    /// vanish is judged on the scale of the surrounding data.
    pub fn is_hardy_with_floor(&self, tol: f64, floor: f64) -> bool {
        let (bad, total) = self.non_analytic_energy();
        bad <= tol * tol * total.max(floor)
    }

    /// `f ∘ κ`, i.e. evaluation at the conjugate point.
    pub fn conjugate_flip(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// `⟨f, g⟩ = (1/N) Σ f(θ_j) conj(g(θ_j))`.
    pub fn inner_product(&self, other: &GridFunction) -> Result<Complex> {
        self.same_grid(other)?;
        let sum: Complex = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum / self.grid.n_points as f64)
    }

    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.n_points as f64
    }

    pub fn l2_norm(&self) -> f64 {
        self.mean_square().sqrt()
    }

    pub fn mean(&self) -> Complex {
        self.values.iter().sum::<Complex>() / self.grid.n_points as f64
    }
}
