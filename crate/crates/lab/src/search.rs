use hardy_core::ensembles::{
    random_adapted_phases, random_hardy_coefficients, EnsembleConfig, HardyCoefficients,
};
use hardy_core::inequality::{theorem_quantities, TheoremReport};
use hardy_core::martingale::AdaptedPhases;
use hardy_core::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::LabError;

const INITIAL_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-4;
/// Consecutive rejections before the step is halved.
const PATIENCE: usize = 20;

/// A Hardy martingale and adapted phases in serializable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchPoint {
    pub n_points: usize,
    pub max_degree: usize,
    pub mean: [f64; 2],
    /// `coefficients[k-1][x·d + m - 1] = [re, im]` of the level-`k` slice at `x`.
    pub coefficients: Vec<Vec<[f64; 2]>>,
    /// Arguments of `w_k(x)`.
    pub phase_angles: Vec<Vec<f64>>,
}

impl SearchPoint {
    fn new(coeffs: &HardyCoefficients, angles: &[Vec<f64>]) -> Self {
        let pair = |c: &Complex| [c.re, c.im];
        Self {
            n_points: coeffs.grid().n_points(),
            max_degree: coeffs.max_degree(),
            mean: pair(&coeffs.mean),
            coefficients: coeffs
                .levels()
                .iter()
                .map(|l| l.iter().map(pair).collect())
                .collect(),
            phase_angles: angles.to_vec(),
        }
    }

    pub fn theorem_report(&self) -> Result<TheoremReport, LabError> {
        let grid = hardy_core::torus::TorusGrid::new(self.n_points)?;
        let levels = self
            .coefficients
            .iter()
            .map(|l| l.iter().map(|p| Complex::new(p[0], p[1])).collect())
            .collect();
        let coeffs = HardyCoefficients::new(
            grid,
            self.max_degree,
            Complex::new(self.mean[0], self.mean[1]),
            levels,
        )?;
        let phases = AdaptedPhases::from_angles(grid, &self.phase_angles)?;
        Ok(theorem_quantities(&coeffs.to_field(), &phases)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartTrace {
    pub start: usize,
    /// Best ratio after each iteration, starting with the initial sample.
    pub best: Vec<f64>,
    pub accepted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best_ratio: f64,
    pub initial_ratio: f64,
    pub best_start: usize,
    pub argmax: SearchPoint,
    pub traces: Vec<StartTrace>,
}

fn ratio(coeffs: &HardyCoefficients, angles: &[Vec<f64>]) -> Result<f64, LabError> {
    let phases = AdaptedPhases::from_angles(coeffs.grid(), angles)?;
    Ok(theorem_quantities(&coeffs.to_field(), &phases)?.ratio)
}

fn single_start(
    cfg: &EnsembleConfig,
    start: usize,
    budget: usize,
) -> Result<(StartTrace, SearchPoint), LabError> {
    let cfg = cfg.for_sample(start as u64);
    let mut coeffs = random_hardy_coefficients(&cfg)?;
    let mut angles: Vec<Vec<f64>> = random_adapted_phases(&cfg)?
        .levels()
        .iter()
        .map(|l| l.iter().map(|w| w.arg()).collect())
        .collect();
    let mut best = ratio(&coeffs, &angles)?;
    let mut trace = vec![best];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut step = INITIAL_STEP;
    let mut rejects = 0;
    let mut accepted = 0;

    for _ in 0..budget {
        let mut cand = coeffs.clone();
        for c in cand.levels_mut().iter_mut().flatten() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *c += Complex::new(re, im) * step;
        }
        let mut cand_angles = angles.clone();
        for phi in cand_angles.iter_mut().flatten() {
            let d: f64 = rng.sample(StandardNormal);
            *phi += step * d;
        }
        let r = ratio(&cand, &cand_angles)?;
        if r > best {
            best = r;
            coeffs = cand;
            angles = cand_angles;
            accepted += 1;
            rejects = 0;
        } else {
            rejects += 1;
            if rejects >= PATIENCE {
                step = (step * 0.5).max(MIN_STEP);
                rejects = 0;
            }
        }
        trace.push(best);
    }
    Ok((
        StartTrace {
            start,
            best: trace,
            accepted,
        },
        SearchPoint::new(&coeffs, &angles),
    ))
}

/// Multi-start stochastic hill climbing on the theorem ratio. Each start
/// perturbs the Fourier coefficients of the differences and the phase
/// angles by Gaussian steps and keeps a candidate only if the ratio grows.
pub fn constant_search(
    cfg: &EnsembleConfig,
    starts: usize,
    budget: usize,
) -> Result<SearchOutcome, LabError> {
    let results = (0..starts)
        .into_par_iter()
        .map(|s| single_start(cfg, s, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let (best_start, _) =
        results
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, (t, _))| {
                let r = *t.best.last().expect("trace is never empty");
                if r > acc.1 {
                    (i, r)
                } else {
                    acc
                }
            });
    let initial_ratio = results[0].0.best[0];
    let best_ratio = *results[best_start]
        .0
        .best
        .last()
        .expect("trace is never empty");
    let argmax = results[best_start].1.clone();
    Ok(SearchOutcome {
        best_ratio,
        initial_ratio,
        best_start,
        argmax,
        traces: results.into_iter().map(|(t, _)| t).collect(),
    })
}
