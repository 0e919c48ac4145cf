//! Evaluators for the single-coordinate identity and inequalities and for the
//! chain of estimates that bounds the dyadic perturbation of the cosine part.
//!
//! Everything here is a deterministic evaluation over uniform grid averages;
//! sampling lives in [`crate::ensembles`].

use alloc::vec::Vec;
use core::fmt;

use crate::martingale::{
    broadcast_sum, conditional_second_moment, dyadic_average, AdaptedPhases, MartingaleField,
    SquareFunctionProfile, HARDY_TOL, UNIMODULAR_TOL,
};
use crate::torus::{GridFunction, TorusGrid, STRUCTURE_TOL};
use crate::{Complex, Error, Result};

/// Relative tolerance for identities that are exact in the discrete model.
pub const EXACT_TOL: f64 = 1e-10;

/// Default slack for inequalities.
pub const SLACK_TOL: f64 = 1e-10;

/// Slack for the scalar arithmetic inequalities.
pub const ARITH_SLACK_TOL: f64 = 1e-12;

/// Constant in `‖U - E(U|D)‖_P ≤ C ‖T_W(G - E(G|D))‖_P^{1/2} ‖G‖_P^{1/2}` as
/// tracked through the proof: `√8 · (√8)^{1/2} · 4^{1/2} = 2·8^{3/4}`.
pub const C_PROOF: f64 = 9.513_656_920_021_768;

/// Constant in `E(X + Y) ≤ c₀ ‖U‖_P`, from `a_k ≤ 2|μ_k| + |b_k|` and
/// `E Z ≤ E Y`.
pub const UPPER_BOUND_FACTOR: f64 = 4.0;

/// `lhs ≤ rhs` up to `tol` measured on the scale `max(1, |lhs|, |rhs|)`.
pub fn holds(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs - rhs <= tol * 1f64.max(lhs.abs()).max(rhs.abs())
}

/// `|lhs - rhs| ≤ tol · scale`.
pub fn agrees(lhs: f64, rhs: f64, tol: f64, scale: f64) -> bool {
    (lhs - rhs).abs() <= tol * scale
}

fn check_unimodular(w: Complex) -> Result<()> {
    if (w.norm() - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { modulus: w.norm() });
    }
    Ok(())
}

/// `a = |μ| + |μ - b|² / (|μ| + |b|)`, with `a = 0` when `μ = b = 0`.
pub fn arith_a(mu: Complex, b: Complex) -> f64 {
    let denom = mu.norm() + b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    mu.norm() + (mu - b).norm_sqr() / denom
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArithWitness {
    pub mu: Complex,
    pub b: Complex,
    pub w: Complex,
    pub a: f64,
}

impl ArithWitness {
    pub fn new(mu: Complex, b: Complex, w: Complex) -> Result<Self> {
        check_unimodular(w)?;
        Ok(Self {
            mu,
            b,
            w,
            a: arith_a(mu, b),
        })
    }

    /// `((a - |b|)², 4(Im²(w(μ - b)) + Re²(wμ)))`.
    pub fn check_e(&self) -> (f64, f64) {
        let lhs = (self.a - self.b.norm()).powi(2);
        let rhs = 4.0 * ((self.w * (self.mu - self.b)).im.powi(2) + (self.w * self.mu).re.powi(2));
        (lhs, rhs)
    }

    /// `(|μ - b|², 2(a² - |μ|²))`. The right side is evaluated as
    /// `2t(2|μ| + t)` with `t = a - |μ|`, which avoids cancellation when
    /// `b ≈ μ` is large.
    pub fn check_d(&self) -> (f64, f64) {
        let lhs = (self.mu - self.b).norm_sqr();
        let denom = self.mu.norm() + self.b.norm();
        let t = if denom == 0.0 { 0.0 } else { lhs / denom };
        let rhs = 2.0 * t * (2.0 * self.mu.norm() + t);
        (lhs, rhs)
    }
}

/// `(a - |b|)² ≤ 4(Im²(w(μ - b)) + Re²(wμ))`, both sides.
pub fn arith_check_e(mu: Complex, b: Complex, w: Complex) -> Result<(f64, f64)> {
    Ok(ArithWitness::new(mu, b, w)?.check_e())
}

/// `|μ - b|² ≤ 2(a² - |μ|²)`, both sides.
pub fn arith_check_d(mu: Complex, b: Complex) -> (f64, f64) {
    ArithWitness {
        mu,
        b,
        w: Complex::new(1.0, 0.0),
        a: arith_a(mu, b),
    }
    .check_d()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl LemmaReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self::with_floor(lhs, rhs, 0.0)
    }

    /// Residual relative to `max(rhs, floor, 1e-300)`.
    fn with_floor(lhs: f64, rhs: f64, floor: f64) -> Self {
        Self {
            lhs,
            rhs,
            residual: (lhs - rhs).abs() / rhs.max(floor).max(1e-300),
        }
    }
}

/// The pieces shared by the single-coordinate evaluators.
struct SliceParts {
    u: GridFunction,
    sigma: GridFunction,
    mu: Complex,
    /// `∫|u - ⟨u,σ⟩σ|²`
    remainder: f64,
    /// `∫ Im²(w(h - bσ))`
    j2: f64,
}

fn slice_parts(h: &GridFunction, b: Complex, w: Complex) -> Result<SliceParts> {
    check_unimodular(w)?;
    if h.nyquist_coefficient().norm() > STRUCTURE_TOL * h.l2_norm() {
        return Err(Error::NyquistEnergy);
    }
    if !h.is_hardy(HARDY_TOL) {
        return Err(Error::NotHardy);
    }
    let grid = h.grid();
    let sigma = grid.sigma();
    let u = h.zip_with(&h.conjugate_flip(), |a, c| (a + c) * 0.5)?;
    let mu = u.inner_product(&sigma)?;
    let remainder = u.zip_with(&sigma, |x, s| x - mu * s)?.mean_square();
    let j2 = h
        .zip_with(&sigma, |x, s| Complex::new((w * (x - b * s)).im, 0.0))?
        .mean_square();
    Ok(SliceParts {
        u,
        sigma,
        mu,
        remainder,
        j2,
    })
}

/// Both sides of
/// `Im²(w(⟨u,σ⟩ - b)) + Re²(w⟨u,σ⟩) + ∫|u - ⟨u,σ⟩σ|² = ∫ Im²(w(h - bσ))`
/// with `u = (h + h∘κ)/2`, evaluated directly.
pub fn sincos_identity_sides(h: &GridFunction, b: Complex, w: Complex) -> Result<LemmaReport> {
    let parts = slice_parts(h, b, w)?;
    let mu = parts.mu;
    let lhs = (w * (mu - b)).im.powi(2) + (w * mu).re.powi(2) + parts.remainder;
    Ok(LemmaReport::new(lhs, parts.j2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropositionReport {
    pub a: f64,
    /// `∫|u - bσ|²`
    pub lhs_b: f64,
    /// `8(a² - |⟨u,σ⟩|²) + ∫|u - ⟨u,σ⟩σ|²`
    pub rhs_b: f64,
    /// `(a - |b|)² + ∫|u - ⟨u,σ⟩σ|²`
    pub lhs_w: f64,
    /// `8 ∫ Im²(w(h - bσ))`
    pub rhs_w: f64,
    /// `∫|u - bσ|² = |⟨u,σ⟩ - b|² + ∫|u - ⟨u,σ⟩σ|²`, residual measured
    /// against `max(∫|u - bσ|², ‖u‖₂² + |b|²)`.
    pub decomposition: LemmaReport,
}

impl PropositionReport {
    pub fn holds(&self, tol: f64) -> bool {
        holds(self.lhs_b, self.rhs_b, tol) && holds(self.lhs_w, self.rhs_w, tol)
    }
}

pub fn prop_check(h: &GridFunction, b: Complex, w: Complex) -> Result<PropositionReport> {
    let parts = slice_parts(h, b, w)?;
    let mu = parts.mu;
    let a = arith_a(mu, b);
    let off_b = parts
        .u
        .zip_with(&parts.sigma, |x, s| x - b * s)?
        .mean_square();
    Ok(PropositionReport {
        a,
        lhs_b: off_b,
        rhs_b: 8.0 * (a * a - mu.norm_sqr()) + parts.remainder,
        lhs_w: (a - b.norm()).powi(2) + parts.remainder,
        rhs_w: 8.0 * parts.j2,
        decomposition: LemmaReport::with_floor(
            (mu - b).norm_sqr() + parts.remainder,
            off_b,
            parts.u.mean_square() + b.norm_sqr(),
        ),
    })
}

/// Intermediate quantities of the dyadic stability estimate for one `(G, W)`.
///
/// Per-level arrays are indexed by `k - 1` and live on `grid^{k-1}`;
/// `x`, `y`, `z` live on `grid^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub n_points: usize,
    pub depth: usize,
    /// `μ_k = E_{k-1}(u_k σ_k)`
    pub mu: Vec<Vec<Complex>>,
    /// `b_k = E(μ_k | D)`
    pub b: Vec<Vec<Complex>>,
    pub a: Vec<Vec<f64>>,
    /// `r_k = (E_{k-1}|u_k - μ_k σ_k|²)^{1/2}`
    pub r: Vec<Vec<f64>>,
    /// `E_{k-1}|u_k - b_k σ_k|²`
    pub perturbation_moments: Vec<Vec<f64>>,
    /// `E_{k-1}|Im(w_{k-1}(g_k - b_k σ_k))|²`
    pub transform_moments: Vec<Vec<f64>>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `a_k² - |μ_k|² + r_k²`, evaluated as `t(2|μ_k| + t) + r_k²` with
    /// `t = a_k - |μ_k|` to avoid cancellation.
    pub gap_moments: Vec<Vec<f64>>,
    /// `X² - Y² = Σ_k` of `gap_moments`.
    pub x2_minus_y2: Vec<f64>,
    /// `X - Y = (X² - Y²) / (X + Y)`.
    pub x_minus_y: Vec<f64>,
    /// `a_k - |b_k| = (|μ_k| - |b_k|) + t`.
    pub a_excess: Vec<Vec<f64>>,
    /// `X - Z = Σ_k (d_k(2|b_k| + d_k) + r_k²) / (X + Z)` with `d_k = a_k - |b_k|`.
    pub x_minus_z: Vec<f64>,
    pub ex: f64,
    pub ey: f64,
    pub ez: f64,
    /// `‖U - E(U|D)‖_P`
    pub lhs_p: f64,
    /// `‖T_W(G - E(G|D))‖_P`
    pub transform_p: f64,
    /// `‖U‖_P`
    pub u_p: f64,
    /// `‖G‖_P`
    pub g_p: f64,
    pub ratio: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `lhs_P / (transform_P · g_P)^{1/2}`, with `0` for `0/0` and `+∞` when the
/// denominator vanishes but `lhs_P` does not.
pub fn theorem_ratio(lhs_p: f64, transform_p: f64, g_p: f64) -> f64 {
    let denom = (transform_p * g_p).sqrt();
    if denom > 0.0 {
        lhs_p / denom
    } else if lhs_p <= 1e-12 * g_p.max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn theorem_quantities(g: &MartingaleField, phases: &AdaptedPhases) -> Result<TheoremReport> {
    if phases.depth() < g.depth() {
        return Err(Error::DepthMismatch {
            phases: phases.depth(),
            field: g.depth(),
        });
    }
    if phases.grid() != g.grid() {
        return Err(Error::GridMismatch(
            g.grid().n_points(),
            phases.grid().n_points(),
        ));
    }
    if !g.is_hardy_martingale(HARDY_TOL) {
        return Err(Error::NotHardyMartingale);
    }
    let grid: TorusGrid = g.grid();
    let n = grid.n_points();
    let depth = g.depth();
    let sigma: Vec<f64> = (0..n).map(|j| grid.sign(j)).collect();

    let g_diffs = g.differences();
    let u_diffs = g.cosine_differences();

    let mut mu = Vec::with_capacity(depth);
    let mut b = Vec::with_capacity(depth);
    let mut a = Vec::with_capacity(depth);
    let mut r = Vec::with_capacity(depth);
    let mut perturbation_moments = Vec::with_capacity(depth);
    let mut transform_moments = Vec::with_capacity(depth);

    for (k0, (gk, uk)) in g_diffs.iter().zip(&u_diffs).enumerate() {
        let mu_k: Vec<Complex> = uk
            .chunks_exact(n)
            .map(|slice| {
                slice
                    .iter()
                    .zip(&sigma)
                    .map(|(v, s)| v * s)
                    .sum::<Complex>()
                    / n as f64
            })
            .collect();
        let b_k = dyadic_average(grid, &mu_k, k0);
        let w = phases.phase(k0);

        let mut v_k = Vec::with_capacity(uk.len());
        let mut pert_k = Vec::with_capacity(uk.len());
        let mut im_k = Vec::with_capacity(uk.len());
        for (i, (&gv, &uv)) in gk.iter().zip(uk).enumerate() {
            let (x, s) = (i / n, sigma[i % n]);
            v_k.push(uv - mu_k[x] * s);
            pert_k.push(uv - b_k[x] * s);
            im_k.push(Complex::new((w[x] * (gv - b_k[x] * s)).im, 0.0));
        }
        let r_k: Vec<f64> = conditional_second_moment(&v_k, n)
            .into_iter()
            .map(f64::sqrt)
            .collect();
        let a_k: Vec<f64> = mu_k
            .iter()
            .zip(&b_k)
            .map(|(&m, &bb)| arith_a(m, bb))
            .collect();

        perturbation_moments.push(conditional_second_moment(&pert_k, n));
        transform_moments.push(conditional_second_moment(&im_k, n));
        mu.push(mu_k);
        b.push(b_k);
        a.push(a_k);
        r.push(r_k);
    }

    let x2: Vec<Vec<f64>> = a
        .iter()
        .zip(&r)
        .map(|(ak, rk)| ak.iter().zip(rk).map(|(a, r)| a * a + r * r).collect())
        .collect();
    let y2: Vec<Vec<f64>> = mu
        .iter()
        .map(|mk| mk.iter().map(|m| m.norm_sqr()).collect())
        .collect();
    let z2: Vec<Vec<f64>> = b
        .iter()
        .map(|bk| bk.iter().map(|m| m.norm_sqr()).collect())
        .collect();
    let root = |levels: &[Vec<f64>]| -> Vec<f64> {
        broadcast_sum(levels, n)
            .into_iter()
            .map(f64::sqrt)
            .collect()
    };
    let (x, y, z) = (root(&x2), root(&y2), root(&z2));
    let gap_moments: Vec<Vec<f64>> = mu
        .iter()
        .zip(&b)
        .zip(&r)
        .map(|((mk, bk), rk)| {
            mk.iter()
                .zip(bk)
                .zip(rk)
                .map(|((&m, &bb), r)| {
                    let denom = m.norm() + bb.norm();
                    let t = if denom == 0.0 {
                        0.0
                    } else {
                        (m - bb).norm_sqr() / denom
                    };
                    t * (2.0 * m.norm() + t) + r * r
                })
                .collect()
        })
        .collect();
    let a_excess: Vec<Vec<f64>> = mu
        .iter()
        .zip(&b)
        .map(|(mk, bk)| {
            mk.iter()
                .zip(bk)
                .map(|(&m, &bb)| {
                    let denom = m.norm() + bb.norm();
                    let t = if denom == 0.0 {
                        0.0
                    } else {
                        (m - bb).norm_sqr() / denom
                    };
                    (m.norm() - bb.norm()) + t
                })
                .collect()
        })
        .collect();
    let xz_levels: Vec<Vec<f64>> = a_excess
        .iter()
        .zip(&b)
        .zip(&r)
        .map(|((dk, bk), rk)| {
            dk.iter()
                .zip(bk)
                .zip(rk)
                .map(|((d, bb), r)| d * (2.0 * bb.norm() + d) + r * r)
                .collect()
        })
        .collect();
    let x_minus_z = broadcast_sum(&xz_levels, n)
        .iter()
        .zip(x.iter().zip(&z))
        .map(|(d, (x, z))| if x + z > 0.0 { d / (x + z) } else { 0.0 })
        .collect();
    let x2_minus_y2 = broadcast_sum(&gap_moments, n);
    let x_minus_y = x2_minus_y2
        .iter()
        .zip(x.iter().zip(&y))
        .map(|(d, (x, y))| if x + y > 0.0 { d / (x + y) } else { 0.0 })
        .collect();

    let u = g.cosine_part();
    let lhs_p = u.sub(&u.dyadic_project())?.previsible_norm();
    let transform_p = g
        .sub(&g.dyadic_project())?
        .transform(phases)?
        .previsible_norm();
    let u_p = u.previsible_norm();
    let g_p = g.previsible_norm();

    Ok(TheoremReport {
        n_points: n,
        depth,
        ex: mean(&x),
        ey: mean(&y),
        ez: mean(&z),
        mu,
        b,
        a,
        r,
        perturbation_moments,
        transform_moments,
        x,
        y,
        z,
        gap_moments,
        x2_minus_y2,
        x_minus_y,
        a_excess,
        x_minus_z,
        ratio: theorem_ratio(lhs_p, transform_p, g_p),
        lhs_p,
        transform_p,
        u_p,
        g_p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainStepId {
    /// `E Z ≤ E Y` (conditional Jensen).
    Jensen,
    /// `Y ≤ X` pointwise.
    PointwiseXY,
    /// `‖U - E(U|D)‖_P` equals the P-norm built from `E_{k-1}|u_k - b_k σ_k|²`.
    PerturbationSquareFunction,
    /// `‖T_W(G - E(G|D))‖_P` equals the P-norm built from
    /// `E_{k-1}|Im(w_{k-1}(g_k - b_k σ_k))|²`.
    TransformSquareFunction,
    /// `E_{k-1}|u_k - b_k σ_k|² ≤ 8(a_k² + r_k² - |μ_k|²)` pointwise.
    LevelPerturbationBound,
    /// `‖U - E(U|D)‖_P ≤ √8 · E(X² - Y²)^{1/2}`.
    SquareFunctionBound,
    /// `√8 · E(X² - Y²)^{1/2} ≤ √8 (E(X - Y))^{1/2} (E(X + Y))^{1/2}`.
    CauchySchwarz,
    /// `E(X + Y) ≤ 4‖U‖_P`.
    UpperBound,
    /// `‖U‖_P ≤ ‖G‖_P`.
    CosineContraction,
    /// `E(X - Y) ≤ E(X - Z)`.
    ReplaceYByZ,
    /// `X - Z ≤ (Σ (a_k - |b_k|)² + r_k²)^{1/2}` pointwise.
    Triangle,
    /// `(a_k - |b_k|)² + r_k² ≤ 8 E_{k-1}|Im(w_{k-1}(g_k - b_k σ_k))|²` pointwise.
    LevelTransformBound,
    /// `E(X - Z) ≤ √8 ‖T_W(G - E(G|D))‖_P`.
    TransformBound,
    /// `‖U - E(U|D)‖_P ≤ C_PROOF ‖T_W(G - E(G|D))‖_P^{1/2} ‖G‖_P^{1/2}`.
    Theorem,
}

impl ChainStepId {
    pub const ALL: [ChainStepId; 14] = [
        Self::Jensen,
        Self::PointwiseXY,
        Self::PerturbationSquareFunction,
        Self::TransformSquareFunction,
        Self::LevelPerturbationBound,
        Self::SquareFunctionBound,
        Self::CauchySchwarz,
        Self::UpperBound,
        Self::CosineContraction,
        Self::ReplaceYByZ,
        Self::Triangle,
        Self::LevelTransformBound,
        Self::TransformBound,
        Self::Theorem,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Jensen => "jensen_ez_le_ey",
            Self::PointwiseXY => "pointwise_y_le_x",
            Self::PerturbationSquareFunction => "perturbation_square_function",
            Self::TransformSquareFunction => "transform_square_function",
            Self::LevelPerturbationBound => "level_perturbation_bound",
            Self::SquareFunctionBound => "square_function_bound",
            Self::CauchySchwarz => "cauchy_schwarz",
            Self::UpperBound => "upper_bound_x_plus_y",
            Self::CosineContraction => "cosine_contraction",
            Self::ReplaceYByZ => "replace_y_by_z",
            Self::Triangle => "triangle_x_minus_z",
            Self::LevelTransformBound => "level_transform_bound",
            Self::TransformBound => "transform_bound",
            Self::Theorem => "theorem",
        }
    }

    /// Identities are compared with a relative tolerance, everything else is
    /// an inequality `lhs ≤ rhs`.
    pub fn is_identity(&self) -> bool {
        matches!(
            self,
            Self::PerturbationSquareFunction | Self::TransformSquareFunction
        )
    }
}

impl fmt::Display for ChainStepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainStep {
    pub id: ChainStepId,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl ChainStep {
    /// `rhs - lhs`; negative means violated.
    pub fn margin(&self) -> f64 {
        if self.id.is_identity() {
            -(self.lhs - self.rhs).abs()
        } else {
            self.rhs - self.lhs
        }
    }
}

/// Evaluates every step with the default tolerances.
pub fn verify_chain(report: &TheoremReport) -> Vec<ChainStep> {
    verify_chain_with(report, SLACK_TOL, EXACT_TOL)
}

/// The `(lhs, rhs)` pair with the smallest margin `rhs - lhs`.
fn worst_pair(pairs: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    pairs
        .reduce(|acc, p| if p.1 - p.0 < acc.1 - acc.0 { p } else { acc })
        .unwrap_or((0.0, 0.0))
}

/// Pointwise inequality over per-level arrays; returns the sides at the point
/// with the smallest margin.
fn worst_pointwise(
    levels: usize,
    len: impl Fn(usize) -> usize,
    sides: impl Fn(usize, usize) -> (f64, f64),
) -> (f64, f64) {
    let mut worst = (0.0, 0.0);
    let mut worst_margin = f64::INFINITY;
    for k0 in 0..levels {
        for x in 0..len(k0) {
            let (lhs, rhs) = sides(k0, x);
            let margin = rhs - lhs;
            if margin < worst_margin {
                worst_margin = margin;
                worst = (lhs, rhs);
            }
        }
    }
    worst
}

pub fn verify_chain_with(report: &TheoremReport, slack: f64, exact: f64) -> Vec<ChainStep> {
    let sqrt8 = 8f64.sqrt();
    let n = report.n_points;
    let grid = TorusGrid::new(n).expect("report carries a valid grid size");
    let levels = report.depth;
    let len = |k0: usize| report.mu[k0].len();
    let scale = report.g_p;

    let mut steps = Vec::with_capacity(ChainStepId::ALL.len());
    let mut inequality = |id, lhs: f64, rhs: f64| {
        steps.push(ChainStep {
            id,
            lhs,
            rhs,
            pass: holds(lhs, rhs, slack),
        })
    };

    inequality(ChainStepId::Jensen, report.ez, report.ey);

    let (y, x) = worst_pair(report.x.iter().zip(&report.y).map(|(&x, &y)| (y, x)));
    inequality(ChainStepId::PointwiseXY, y, x);

    let (lhs, rhs) = worst_pointwise(levels, len, |k0, x| {
        (
            report.perturbation_moments[k0][x],
            8.0 * report.gap_moments[k0][x],
        )
    });
    inequality(ChainStepId::LevelPerturbationBound, lhs, rhs);

    let x2_minus_y2: Vec<f64> = report.x2_minus_y2.iter().map(|d| d.sqrt()).collect();
    let square_bound = sqrt8 * mean(&x2_minus_y2);
    inequality(ChainStepId::SquareFunctionBound, report.lhs_p, square_bound);

    let x_minus_y = mean(&report.x_minus_y);
    let x_minus_z = mean(&report.x_minus_z);
    let x_plus_y = report.ex + report.ey;
    let cs_bound = sqrt8 * x_minus_y.max(0.0).sqrt() * x_plus_y.sqrt();
    inequality(ChainStepId::CauchySchwarz, square_bound, cs_bound);

    inequality(
        ChainStepId::UpperBound,
        x_plus_y,
        UPPER_BOUND_FACTOR * report.u_p,
    );
    inequality(ChainStepId::CosineContraction, report.u_p, report.g_p);
    inequality(ChainStepId::ReplaceYByZ, x_minus_y, x_minus_z);

    let gaps: Vec<Vec<f64>> = report
        .a_excess
        .iter()
        .zip(&report.r)
        .map(|(dk, rk)| dk.iter().zip(rk).map(|(d, r)| d * d + r * r).collect())
        .collect();
    let gap_root: Vec<f64> = broadcast_sum(&gaps, n).into_iter().map(f64::sqrt).collect();
    let (lhs, rhs) = worst_pair(report.x_minus_z.iter().copied().zip(gap_root));
    inequality(ChainStepId::Triangle, lhs, rhs);

    let (lhs, rhs) = worst_pointwise(levels, len, |k0, x| {
        (gaps[k0][x], 8.0 * report.transform_moments[k0][x])
    });
    inequality(ChainStepId::LevelTransformBound, lhs, rhs);

    inequality(
        ChainStepId::TransformBound,
        x_minus_z,
        sqrt8 * report.transform_p,
    );
    inequality(
        ChainStepId::Theorem,
        report.lhs_p,
        C_PROOF * (report.transform_p * report.g_p).sqrt(),
    );

    let perturbation =
        SquareFunctionProfile::from_moments(grid, report.perturbation_moments.clone())
            .previsible_norm();
    let transform = SquareFunctionProfile::from_moments(grid, report.transform_moments.clone())
        .previsible_norm();
    for (id, lhs, rhs) in [
        (
            ChainStepId::PerturbationSquareFunction,
            report.lhs_p,
            perturbation,
        ),
        (
            ChainStepId::TransformSquareFunction,
            report.transform_p,
            transform,
        ),
    ] {
        let tol_scale = lhs.abs().max(rhs.abs()).max(scale);
        steps.push(ChainStep {
            id,
            lhs,
            rhs,
            pass: agrees(lhs, rhs, exact, tol_scale),
        });
    }

    steps.sort_by_key(|s| ChainStepId::ALL.iter().position(|id| *id == s.id));
    steps
}
