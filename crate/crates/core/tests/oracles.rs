//! Brute-force summation oracles. They enumerate the full product grid with
//! nested index tuples and never touch the block-averaging code paths.

use hardy_core::ensembles::{random_hardy_martingale, EnsembleConfig};
use hardy_core::inequality::theorem_quantities;
use hardy_core::martingale::{AdaptedPhases, MartingaleField};
use hardy_core::torus::TorusGrid;
use hardy_core::Complex;

fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    (0..n.pow(len as u32))
        .map(|mut i| {
            let mut t = vec![0; len];
            for slot in t.iter_mut().rev() {
                *slot = i % n;
                i /= n;
            }
            t
        })
        .collect()
}

fn value_at(f: &MartingaleField, x: &[usize]) -> Complex {
    let n = f.grid().n_points();
    f.terminal()[x.iter().fold(0, |acc, &j| acc * n + j)]
}

/// `E_k F` at the prefix `x` by summing over every completion.
fn cond_exp(f: &MartingaleField, x: &[usize]) -> Complex {
    let n = f.grid().n_points();
    let rest = tuples(n, f.depth() - x.len());
    let total: Complex = rest
        .iter()
        .map(|tail| {
            let full: Vec<usize> = x.iter().chain(tail).copied().collect();
            value_at(f, &full)
        })
        .sum();
    total / rest.len() as f64
}

fn brute_difference(f: &MartingaleField, x: &[usize]) -> Complex {
    cond_exp(f, x) - cond_exp(f, &x[..x.len() - 1])
}

fn brute_moment(f: &MartingaleField, prefix: &[usize]) -> f64 {
    let n = f.grid().n_points();
    (0..n)
        .map(|y| {
            let mut x = prefix.to_vec();
            x.push(y);
            brute_difference(f, &x).norm_sqr()
        })
        .sum::<f64>()
        / n as f64
}

fn sample_fields() -> Vec<MartingaleField> {
    let g = TorusGrid::new(4).unwrap();
    let mut fields = Vec::new();
    for depth in 1..=3 {
        fields.push(
            random_hardy_martingale(&EnsembleConfig::new(17 + depth as u64, 4, depth)).unwrap(),
        );
        fields.push(
            MartingaleField::from_fn(g, depth, |x| {
                let s: usize = x.iter().enumerate().map(|(i, j)| (i + 2) * j * j).sum();
                Complex::new((s % 7) as f64 - 3.0, (s % 5) as f64 * 0.25)
            })
            .unwrap(),
        );
    }
    fields
}

#[test]
fn conditional_square_functions_match_brute_force() {
    for f in sample_fields() {
        let n = 4;
        let profile = f.cond_square_profile();
        for k in 1..=f.depth() {
            for (i, prefix) in tuples(n, k - 1).iter().enumerate() {
                let want = brute_moment(&f, prefix);
                assert!((profile.moment(k)[i] - want).abs() <= 1e-12 * want.max(1.0));
            }
        }
        let mut norm = 0.0;
        let points = tuples(n, f.depth() - 1);
        for (i, x) in points.iter().enumerate() {
            let s2: f64 = (1..=f.depth()).map(|k| brute_moment(&f, &x[..k - 1])).sum();
            assert!((profile.square_function()[i] - s2.sqrt()).abs() <= 1e-12 * s2.sqrt().max(1.0));
            norm += s2.sqrt();
        }
        norm /= points.len() as f64;
        assert!((f.previsible_norm() - norm).abs() <= 1e-12 * norm.max(1.0));
    }
}

#[test]
fn dyadic_projection_matches_brute_force() {
    for f in sample_fields() {
        let g = f.grid();
        let n = g.n_points();
        let projected = f.dyadic_project();
        for k in 1..=f.depth() {
            let got = projected.difference(k).unwrap();
            let all = tuples(n, k);
            for (i, x) in all.iter().enumerate() {
                let cell: Vec<&Vec<usize>> = all
                    .iter()
                    .filter(|x2| {
                        x2.iter()
                            .zip(x.iter())
                            .all(|(a, b)| g.sign(*a) == g.sign(*b))
                    })
                    .collect();
                let want: Complex = cell
                    .iter()
                    .map(|x2| brute_difference(&f, x2))
                    .sum::<Complex>()
                    / cell.len() as f64;
                assert!((got[i] - want).norm() <= 1e-12, "k={k} x={x:?}");
            }
        }
    }
}

#[test]
#[allow(clippy::approx_constant)]
fn eight_point_theorem_instance() {
    let g = TorusGrid::new(8).unwrap();
    let zeta = MartingaleField::from_fn(g, 1, |x| Complex::from_polar(1.0, g.angle(x[0]))).unwrap();
    let w = AdaptedPhases::constant(g, 1, Complex::new(1.0, 0.0)).unwrap();
    let report = theorem_quantities(&zeta, &w).unwrap();

    // Direct 8-point sums: u = cos θ, b = (1/8)Σ|cos θ_j|,
    // lhs_P = (1/8 Σ (cos θ_j - b σ_j)²)^{1/2}, transform_P = (1/8 Σ sin² θ_j)^{1/2}.
    let angles: Vec<f64> = (0..8)
        .map(|j| std::f64::consts::PI * (2 * j + 1) as f64 / 8.0)
        .collect();
    let b = angles.iter().map(|t| t.cos().abs()).sum::<f64>() / 8.0;
    let lhs = (angles
        .iter()
        .map(|t| (t.cos() - b * t.cos().signum()).powi(2))
        .sum::<f64>()
        / 8.0)
        .sqrt();
    let transform = (angles.iter().map(|t| t.sin().powi(2)).sum::<f64>() / 8.0).sqrt();
    let g_p = (angles.iter().map(|_| 1.0).sum::<f64>() / 8.0).sqrt();
    let ratio = lhs / (transform * g_p).sqrt();

    assert!((report.b[0][0].re - b).abs() <= 1e-12);
    assert!((report.lhs_p - lhs).abs() <= 1e-12);
    assert!((report.transform_p - transform).abs() <= 1e-12);
    assert!((report.g_p - g_p).abs() <= 1e-12);
    assert!((report.ratio - ratio).abs() <= 1e-12);

    assert!((lhs - 0.27060).abs() < 5e-6);
    assert!((transform - 0.70711).abs() < 5e-6);
    assert!((ratio - 0.32180).abs() < 5e-6);
}
