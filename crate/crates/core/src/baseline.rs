//! Real-valued phase retrieval on the concatenated channels.
//!
//! The eight octonion coefficients of every entry are treated as independent
//! real unknowns (`x in R^{8n}`) measured through a real Gaussian matrix.
//! Initialization is the Lanczos estimate of the leading eigenvector of
//! `(1/m) sum_l y_l a_l a_l^T`, followed by gradient descent on
//! `sum_l ((a_l^T x)^2 - y_l)^2`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, RealMatrix};
use crate::par::{self, Exec};

pub const DEFAULT_LANCZOS_ITERS: usize = 100;
/// Step scale for the mean-normalized rule on real Gaussian sensing.
pub const DEFAULT_GD_STEP_SCALE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct RealPrInstance {
    pub signal: Vec<f64>,
    pub sensing: RealMatrix,
    pub measurements: Vec<f64>,
}

impl RealPrInstance {
    /// Measures `signal` through a fresh `m x len` standard Gaussian matrix.
    pub fn generate(signal: Vec<f64>, m: usize, rng: &mut impl Rng) -> Self {
        let cols = signal.len();
        let data = (0..m * cols).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let sensing = RealMatrix::from_rows(m, cols, data).expect("sized above");
        Self::from_parts(signal, sensing).expect("sized above")
    }

    pub fn from_parts(signal: Vec<f64>, sensing: RealMatrix) -> Result<Self> {
        check_dim("RealPrInstance signal", sensing.cols(), signal.len())?;
        let measurements = real_measure(&sensing, &signal)?;
        Ok(RealPrInstance {
            signal,
            sensing,
            measurements,
        })
    }
}

/// `y_l = (a_l^T x)^2`.
pub fn real_measure(a: &RealMatrix, x: &[f64]) -> Result<Vec<f64>> {
    Ok(a.mul_vec(x)?.into_iter().map(|v| v * v).collect())
}

/// Applies `v -> (1/m) sum_l y_l a_l (a_l^T v)`.
fn weighted_covariance_apply(a: &RealMatrix, y: &[f64], v: &[f64], exec: Exec) -> Vec<f64> {
    let m = a.rows();
    let mut out = par::chunked_reduce(
        m,
        exec,
        || vec![0.0; a.cols()],
        |acc, l| {
            let row = a.row(l);
            let s = y[l] * dot(row, v);
            for (o, r) in acc.iter_mut().zip(row) {
                *o += s * r;
            }
        },
        |acc, part| {
            for (o, p) in acc.iter_mut().zip(part) {
                *o += p;
            }
        },
    );
    let inv_m = 1.0 / m as f64;
    out.iter_mut().for_each(|o| *o *= inv_m);
    out
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    /// Unit Ritz vector of the largest Ritz value.
    pub vector: Vec<f64>,
    pub ritz_value: f64,
    /// Krylov dimension actually built (smaller than requested on breakdown).
    pub steps: usize,
}

/// Largest eigenpair of `(1/m) sum_l y_l a_l a_l^T` by `iters` Lanczos steps
/// with full reorthogonalization, from the normalized all-ones start.
pub fn lanczos_leading(a: &RealMatrix, y: &[f64], iters: usize, exec: Exec) -> Result<LanczosResult> {
    check_dim("lanczos measurements", a.rows(), y.len())?;
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateMeasurements);
    }
    let dim = a.cols();
    let k_max = iters.clamp(1, dim.max(1));

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k_max);
    let mut alphas = Vec::with_capacity(k_max);
    let mut betas: Vec<f64> = Vec::with_capacity(k_max);
    let mut q = vec![1.0 / (dim as f64).sqrt(); dim];

    for k in 0..k_max {
        let mut w = weighted_covariance_apply(a, y, &q, exec);
        let alpha = dot(&q, &w);
        alphas.push(alpha);
        basis.push(q);
        // Full reorthogonalization, applied twice.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = norm(&w);
        if k + 1 == k_max || beta <= 1e-12 * alpha.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        betas.push(beta);
        q = w.into_iter().map(|v| v / beta).collect();
    }

    let steps = alphas.len();
    let t = DMatrix::from_fn(steps, steps, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (top, &ritz_value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one step");
    let s = eig.eigenvectors.column(top);
    let mut vector = vec![0.0; dim];
    for (j, b) in basis.iter().enumerate() {
        for (v, bi) in vector.iter_mut().zip(b) {
            *v += s[j] * bi;
        }
    }
    let nv = norm(&vector);
    vector.iter_mut().for_each(|v| *v /= nv);
    Ok(LanczosResult {
        vector,
        ritz_value,
        steps,
    })
}

/// Lanczos initializer scaled to `sqrt(sum(y) / m)`.
pub fn lanczos_init(a: &RealMatrix, y: &[f64], iters: usize, exec: Exec) -> Result<Vec<f64>> {
    let res = lanczos_leading(a, y, iters, exec)?;
    let scale = (y.iter().sum::<f64>() / y.len() as f64).sqrt();
    Ok(res.vector.into_iter().map(|v| v * scale).collect())
}

/// `sum_l ((a_l^T x)^2 - y_l)^2`.
pub fn real_objective(a: &RealMatrix, y: &[f64], x: &[f64]) -> Result<f64> {
    check_dim("real_objective", a.rows(), y.len())?;
    Ok(a.mul_vec(x)?.iter().zip(y).map(|(p, yl)| (p * p - yl).powi(2)).sum())
}

/// `sum_l ((a_l^T x)^2 - y_l) (a_l^T x) a_l`, a quarter of the analytic
/// gradient, matching the octonion solver's convention.
pub fn real_gradient(a: &RealMatrix, y: &[f64], x: &[f64], exec: Exec) -> Result<Vec<f64>> {
    check_dim("real_gradient measurements", a.rows(), y.len())?;
    check_dim("real_gradient signal", a.cols(), x.len())?;
    Ok(real_gradient_unchecked(a, y, x, exec))
}

fn real_gradient_unchecked(a: &RealMatrix, y: &[f64], x: &[f64], exec: Exec) -> Vec<f64> {
    par::chunked_reduce(
        a.rows(),
        exec,
        || vec![0.0; a.cols()],
        |acc, l| {
            let row = a.row(l);
            let p = dot(row, x);
            let s = (p * p - y[l]) * p;
            for (o, r) in acc.iter_mut().zip(row) {
                *o += s * r;
            }
        },
        |acc, part| {
            for (o, q) in acc.iter_mut().zip(part) {
                *o += q;
            }
        },
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct GdConfig {
    pub iters: usize,
    /// `mu` in `alpha = mu / mean(y)`, applied to the gradient averaged over `m`.
    pub step_scale: f64,
    pub lanczos_iters: usize,
    pub exec: Exec,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            iters: 2000,
            step_scale: DEFAULT_GD_STEP_SCALE,
            lanczos_iters: DEFAULT_LANCZOS_ITERS,
            exec: Exec::default(),
        }
    }
}

/// Gradient descent from `init`; returns the final iterate.
pub fn gd_solve(a: &RealMatrix, y: &[f64], init: &[f64], cfg: &GdConfig) -> Result<Vec<f64>> {
    check_dim("gd_solve measurements", a.rows(), y.len())?;
    check_dim("gd_solve init", a.cols(), init.len())?;
    let total: f64 = y.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateMeasurements);
    }
    let m = y.len() as f64;
    let step = cfg.step_scale / (total / m) / m;
    let mut x = init.to_vec();
    for it in 1..=cfg.iters {
        let g = real_gradient_unchecked(a, y, &x, cfg.exec);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { iteration: it });
        }
    }
    Ok(x)
}

/// Lanczos initialization followed by gradient descent.
pub fn gd_recover(inst: &RealPrInstance, cfg: &GdConfig) -> Result<Vec<f64>> {
    let init = lanczos_init(&inst.sensing, &inst.measurements, cfg.lanczos_iters, cfg.exec)?;
    gd_solve(&inst.sensing, &inst.measurements, &init, cfg)
}

/// `min(|est - x|, |est + x|)`.
pub fn sign_aligned_error(est: &[f64], truth: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (e, t) in est.iter().zip(truth) {
        minus += (e - t).powi(2);
        plus += (e + t).powi(2);
    }
    f64::min(minus, plus).sqrt()
}

/// `est` or `-est`, whichever is closer to `truth`.
pub fn sign_align(est: &[f64], truth: &[f64]) -> Vec<f64> {
    if dot(est, truth) >= 0.0 {
        est.to_vec()
    } else {
        est.iter().map(|v| -v).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_signal(rng: &mut impl Rng, len: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let nv = norm(&v);
        v.into_iter().map(|x| x / nv).collect()
    }

    #[test]
    fn lanczos_recovers_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = unit_signal(&mut rng, 24);
        // One measurement row equal to v gives (1/m) y a a^T = v v^T.
        let a = RealMatrix::from_rows(1, 24, v.clone()).unwrap();
        let res = lanczos_leading(&a, &[1.0], 100, Exec::Sequential).unwrap();
        assert!(dot(&res.vector, &v).abs() > 1.0 - 1e-8);
        assert!((res.ritz_value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lanczos_ritz_value_grows_with_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inst = RealPrInstance::generate(unit_signal(&mut rng, 40), 400, &mut rng);
        let mut prev = f64::NEG_INFINITY;
        for k in [1, 2, 5, 10, 20, 40, 100] {
            let r = lanczos_leading(&inst.sensing, &inst.measurements, k, Exec::Sequential).unwrap();
            assert!(r.ritz_value >= prev - 1e-10, "k={k}: {} < {prev}", r.ritz_value);
            prev = r.ritz_value;
        }
    }

    #[test]
    fn lanczos_rejects_zero_measurements() {
        let a = RealMatrix::zeros(3, 4);
        assert!(matches!(
            lanczos_init(&a, &[0.0; 3], 10, Exec::Sequential),
            Err(Error::DegenerateMeasurements)
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let inst = RealPrInstance::generate(unit_signal(&mut rng, 8), 30, &mut rng);
            let x = unit_signal(&mut rng, 8);
            let g = real_gradient(&inst.sensing, &inst.measurements, &x, Exec::Sequential).unwrap();
            let h = 1e-6;
            for i in 0..8 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (real_objective(&inst.sensing, &inst.measurements, &xp).unwrap()
                    - real_objective(&inst.sensing, &inst.measurements, &xm).unwrap())
                    / (2.0 * h);
                let rel = (4.0 * g[i] - fd).abs() / fd.abs().max(1e-3);
                assert!(rel < 1e-5, "component {i}: {rel}");
            }
        }
    }

    #[test]
    fn truth_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = RealPrInstance::generate(unit_signal(&mut rng, 16), 100, &mut rng);
        let cfg = GdConfig {
            iters: 50,
            ..GdConfig::default()
        };
        let x = gd_solve(&inst.sensing, &inst.measurements, &inst.signal, &cfg).unwrap();
        assert!(sign_aligned_error(&x, &inst.signal) < 1e-12);
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = RealPrInstance::generate(unit_signal(&mut rng, 16), 100, &mut rng);
        let cfg = GdConfig {
            iters: 500,
            step_scale: 50.0,
            ..GdConfig::default()
        };
        let init: Vec<f64> = inst.signal.iter().map(|v| 2.0 * v).collect();
        assert!(matches!(
            gd_solve(&inst.sensing, &inst.measurements, &init, &cfg),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn sign_alignment() {
        let t = [1.0, -2.0];
        assert_eq!(sign_aligned_error(&[-1.0, 2.0], &t), 0.0);
        assert_eq!(sign_align(&[-1.0, 2.0], &t), vec![1.0, -2.0]);
    }
}
