//! Seeded generators for Hardy data.
//!
//! Every draw comes from a ChaCha8 stream selected by `(tag, level, index)`,
//! so a martingale slice at base point `x` on level `k` is the same no matter
//! in which order (or on which thread) slices are generated.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::martingale::{checked_size, pow, AdaptedPhases, MartingaleField};
use crate::torus::{GridFunction, TorusGrid};
use crate::{Complex, Error, Result};

const TAG_SAMPLE: u64 = 1;
const TAG_FUNCTION: u64 = 2;
const TAG_MARTINGALE: u64 = 3;
const TAG_PHASES: u64 = 4;
const TAG_SCALAR: u64 = 5;
const TAG_ARITH: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Distribution {
    /// Standard complex Gaussian, `E|c|² = 1`.
    #[default]
    Gaussian,
    /// Uniform on the unit disk.
    UniformDisk,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub seed: u64,
    pub n_points: usize,
    pub depth: usize,
    /// Highest frequency used by analytic slices, `1 ≤ d ≤ N/2 - 1`.
    pub max_degree: usize,
    pub coefficient_scale: f64,
    pub distribution: Distribution,
}

impl EnsembleConfig {
    /// Config with the full analytic band `d = N/2 - 1` and unit Gaussian
    /// coefficients.
    pub fn new(seed: u64, n_points: usize, depth: usize) -> Self {
        Self {
            seed,
            n_points,
            depth,
            max_degree: (n_points / 2).saturating_sub(1),
            coefficient_scale: 1.0,
            distribution: Distribution::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<TorusGrid> {
        let grid = TorusGrid::new(self.n_points)?;
        if self.depth == 0 {
            return Err(Error::ZeroDepth);
        }
        if self.max_degree == 0 || self.max_degree > grid.max_analytic_degree() {
            return Err(Error::InvalidConfig(
                "max_degree must satisfy 1 <= d <= N/2 - 1",
            ));
        }
        if !(self.coefficient_scale.is_finite() && self.coefficient_scale > 0.0) {
            return Err(Error::InvalidConfig(
                "coefficient_scale must be positive and finite",
            ));
        }
        Ok(grid)
    }

    /// The same ensemble with a seed derived for sample number `index`.
    pub fn for_sample(&self, index: u64) -> Self {
        Self {
            seed: stream(self.seed, TAG_SAMPLE, 0, index).next_u64(),
            ..*self
        }
    }

    fn stream(&self, tag: u64, level: usize, index: usize) -> ChaCha8Rng {
        stream(self.seed, tag, level as u64, index as u64)
    }

    fn coefficient(&self, rng: &mut impl Rng) -> Complex {
        let c = match self.distribution {
            Distribution::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
            }
            Distribution::UniformDisk => {
                Complex::from_polar(rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>())
            }
        };
        c * self.coefficient_scale
    }
}

fn stream(seed: u64, tag: u64, level: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(level < 1 << 8 && index < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 56) | (level << 48) | index);
    rng
}

fn unimodular(rng: &mut impl Rng) -> Complex {
    let phi = 2.0 * PI * rng.random::<f64>();
    Complex::new(phi.cos(), phi.sin())
}

/// Fourier coefficients of every conditioned difference of a Hardy
/// martingale: on level `k` the slice at `x ∈ grid^{k-1}` is
/// `Σ_{m=1}^{d} c_{k,x,m} e^{imθ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HardyCoefficients {
    grid: TorusGrid,
    max_degree: usize,
    pub mean: Complex,
    /// `levels[k-1][x·d + m - 1] = c_{k,x,m}`
    levels: Vec<Vec<Complex>>,
}

impl HardyCoefficients {
    pub fn new(
        grid: TorusGrid,
        max_degree: usize,
        mean: Complex,
        levels: Vec<Vec<Complex>>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::ZeroDepth);
        }
        if max_degree == 0 || max_degree > grid.max_analytic_degree() {
            return Err(Error::InvalidConfig(
                "max_degree must satisfy 1 <= d <= N/2 - 1",
            ));
        }
        checked_size(grid.n_points(), levels.len())?;
        for (k0, level) in levels.iter().enumerate() {
            let expected = pow(grid.n_points(), k0) * max_degree;
            if level.len() != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    actual: level.len(),
                });
            }
        }
        Ok(Self {
            grid,
            max_degree,
            mean,
            levels,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn levels(&self) -> &[Vec<Complex>] {
        &self.levels
    }

    pub fn levels_mut(&mut self) -> &mut [Vec<Complex>] {
        &mut self.levels
    }

    pub fn to_field(&self) -> MartingaleField {
        let n = self.grid.n_points();
        let d = self.max_degree;
        let characters: Vec<GridFunction> =
            (1..=d as i64).map(|m| self.grid.character(m)).collect();
        let diffs: Vec<Vec<Complex>> = self
            .levels
            .iter()
            .map(|level| {
                level
                    .chunks_exact(d)
                    .flat_map(|coeffs| {
                        let characters = &characters;
                        (0..n).map(move |j| {
                            coeffs
                                .iter()
                                .zip(characters)
                                .map(|(c, e)| c * e.values()[j])
                                .sum::<Complex>()
                        })
                    })
                    .collect()
            })
            .collect();
        MartingaleField::from_differences(self.grid, self.mean, &diffs)
            .expect("coefficient shape was validated")
    }
}

/// `h = Σ_{m=1}^{d} c_m e^{imθ}` with random `c_m`.
pub fn random_hardy_function(cfg: &EnsembleConfig) -> Result<GridFunction> {
    let grid = cfg.validate()?;
    let mut rng = cfg.stream(TAG_FUNCTION, 0, 0);
    let coeffs: Vec<Complex> = (0..cfg.max_degree)
        .map(|_| cfg.coefficient(&mut rng))
        .collect();
    GridFunction::analytic_polynomial(grid, &coeffs)
}

/// A random complex number from the configured coefficient distribution.
pub fn random_complex(cfg: &EnsembleConfig) -> Result<Complex> {
    cfg.validate()?;
    Ok(cfg.coefficient(&mut cfg.stream(TAG_SCALAR, 0, 0)))
}

/// A uniformly distributed point on the unit circle.
pub fn random_unimodular(cfg: &EnsembleConfig) -> Result<Complex> {
    cfg.validate()?;
    Ok(unimodular(&mut cfg.stream(TAG_SCALAR, 1, 0)))
}

pub fn random_hardy_coefficients(cfg: &EnsembleConfig) -> Result<HardyCoefficients> {
    let grid = cfg.validate()?;
    let n = grid.n_points();
    checked_size(n, cfg.depth)?;
    let d = cfg.max_degree;
    let levels = (0..cfg.depth)
        .map(|k0| {
            (0..pow(n, k0))
                .flat_map(|x| {
                    let mut rng = cfg.stream(TAG_MARTINGALE, k0 + 1, x);
                    (0..d).map(move |_| cfg.coefficient(&mut rng))
                })
                .collect()
        })
        .collect();
    let mean = cfg.coefficient(&mut cfg.stream(TAG_MARTINGALE, 0, 0));
    HardyCoefficients::new(grid, d, mean, levels)
}

/// A Hardy martingale whose conditioned differences are random analytic
/// polynomials of degree at most `d`, drawn afresh for every base point.
pub fn random_hardy_martingale(cfg: &EnsembleConfig) -> Result<MartingaleField> {
    Ok(random_hardy_coefficients(cfg)?.to_field())
}

/// Independent uniform phases `w_k(x) = e^{iφ}` for `k < depth`.
pub fn random_adapted_phases(cfg: &EnsembleConfig) -> Result<AdaptedPhases> {
    let grid = cfg.validate()?;
    let n = grid.n_points();
    checked_size(n, cfg.depth.saturating_sub(1))?;
    let phases = (0..cfg.depth)
        .map(|k| {
            (0..pow(n, k))
                .map(|x| unimodular(&mut cfg.stream(TAG_PHASES, k, x)))
                .collect()
        })
        .collect();
    AdaptedPhases::new(grid, phases)
}

/// Magnitude classes for arithmetic samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stratum {
    Zero,
    /// `|·| = 1e-15`
    Tiny,
    /// `|·| = 1e-8`
    Small,
    /// standard complex Gaussian
    Unit,
    /// `1e3` times a standard complex Gaussian
    Large,
}

impl Stratum {
    pub const ALL: [Stratum; 5] = [Self::Zero, Self::Tiny, Self::Small, Self::Unit, Self::Large];

    fn draw(self, rng: &mut impl Rng) -> Complex {
        let gaussian = |rng: &mut dyn RngCore| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
        };
        match self {
            Self::Zero => Complex::new(0.0, 0.0),
            Self::Tiny => unimodular(rng) * 1e-15,
            Self::Small => unimodular(rng) * 1e-8,
            Self::Unit => gaussian(rng),
            Self::Large => gaussian(rng) * 1e3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArithSample {
    pub mu: Complex,
    pub b: Complex,
    pub w: Complex,
    pub mu_stratum: Stratum,
    pub b_stratum: Stratum,
    /// `b = μ` exactly.
    pub tied: bool,
}

/// A stratified `(μ, b, w)` draw. Strata for `μ` and `b` are independent and
/// uniform over [`Stratum::ALL`]; one draw in eight sets `b = μ`.
pub fn random_arith_sample(cfg: &EnsembleConfig) -> ArithSample {
    let mut rng = cfg.stream(TAG_ARITH, 0, 0);
    let mu_stratum = Stratum::ALL[rng.random_range(0..Stratum::ALL.len())];
    let b_stratum = Stratum::ALL[rng.random_range(0..Stratum::ALL.len())];
    let tied = rng.random_range(0..8) == 0;
    let mu = mu_stratum.draw(&mut rng);
    let (b, b_stratum) = if tied {
        (mu, mu_stratum)
    } else {
        (b_stratum.draw(&mut rng), b_stratum)
    };
    ArithSample {
        mu,
        b,
        w: unimodular(&mut rng),
        mu_stratum,
        b_stratum,
        tied,
    }
}
