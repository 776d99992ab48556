#![allow(dead_code)]

use owf_core::algebra::{conjugate, gimel, Octonion};
use owf_core::linalg::{OctMatrix, OctVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `e_i * e_j = FIXTURE[i][j].0 * e_{FIXTURE[i][j].1}`, derived by hand from
/// the columns of `gimel(e_i)`.
pub const FIXTURE: [[(i8, usize); 8]; 8] = [
    [(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7)],
    [(1, 1), (-1, 0), (-1, 3), (1, 2), (-1, 5), (1, 4), (1, 7), (-1, 6)],
    [(1, 2), (1, 3), (-1, 0), (-1, 1), (-1, 6), (-1, 7), (1, 4), (1, 5)],
    [(1, 3), (-1, 2), (1, 1), (-1, 0), (-1, 7), (1, 6), (-1, 5), (1, 4)],
    [(1, 4), (1, 5), (1, 6), (1, 7), (-1, 0), (-1, 1), (-1, 2), (-1, 3)],
    [(1, 5), (-1, 4), (1, 7), (-1, 6), (1, 1), (-1, 0), (1, 3), (-1, 2)],
    [(1, 6), (-1, 7), (-1, 4), (1, 5), (1, 2), (-1, 3), (-1, 0), (1, 1)],
    [(1, 7), (1, 6), (-1, 5), (-1, 4), (1, 3), (1, 2), (-1, 1), (-1, 0)],
];

/// Product computed straight from [`FIXTURE`].
pub fn fixture_mul(a: &Octonion, b: &Octonion) -> Octonion {
    let mut out = [0.0; 8];
    for (i, row) in FIXTURE.iter().enumerate() {
        for (j, &(s, k)) in row.iter().enumerate() {
            out[k] += f64::from(s) * a.0[i] * b.0[j];
        }
    }
    Octonion(out)
}

pub fn random_oct(rng: &mut impl Rng) -> Octonion {
    Octonion(std::array::from_fn(|_| StandardNormal.sample(rng)))
}

pub fn random_unit(rng: &mut impl Rng) -> Octonion {
    let o = random_oct(rng);
    o.scale(1.0 / o.norm())
}

pub fn random_vec(n: usize, rng: &mut impl Rng) -> OctVector {
    OctVector((0..n).map(|_| random_oct(rng)).collect())
}

pub fn random_matrix(m: usize, n: usize, rng: &mut impl Rng) -> OctMatrix {
    OctMatrix::from_fn(m, n, |_, _| random_oct(rng))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn vec_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|p| p * p).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    diff / scale
}

/// Intensities through the real path: `|gimel(conj a) aleph(x)|^2` summed blockwise.
pub fn measure_real_path(a: &OctMatrix, x: &OctVector) -> Vec<f64> {
    (0..a.rows())
        .map(|l| {
            let mut acc = [0.0; 8];
            for (alk, xk) in a.row(l).iter().zip(x.iter()) {
                let block = gimel(&conjugate(alk)).mul_vec(&xk.0);
                for (o, b) in acc.iter_mut().zip(block) {
                    *o += b;
                }
            }
            acc.iter().map(|v| v * v).sum()
        })
        .collect()
}

/// `sum_l (|a_l* x|^2 - y_l)^2` evaluated through [`measure_real_path`].
pub fn objective_real_path(a: &OctMatrix, y: &[f64], x: &OctVector) -> f64 {
    measure_real_path(a, x)
        .iter()
        .zip(y)
        .map(|(u, yl)| (u - yl).powi(2))
        .sum()
}

/// Central differences of `f` at `x` with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let plus = f(&probe);
            probe[i] = orig - h;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

fn sq_distance(x: &OctVector, x_star: &OctVector, z: &Octonion) -> f64 {
    x.iter()
        .zip(x_star.iter())
        .map(|(xk, sk)| (*sk - fixture_mul(xk, z)).norm_sqr())
        .sum()
}

/// Brute-force `min |x* - x z|` over `samples` unit `z`, products taken from
/// the fixture. A tenth of the budget is spent uniformly on the sphere, the
/// rest on random perturbations of the best point with a shrinking radius.
pub fn sampled_distance(x: &OctVector, x_star: &OctVector, samples: usize, rng: &mut impl Rng) -> f64 {
    let global = (samples / 10).max(1);
    let mut best_z = random_unit(rng);
    let mut best = sq_distance(x, x_star, &best_z);
    for _ in 1..global {
        let z = random_unit(rng);
        let d2 = sq_distance(x, x_star, &z);
        if d2 < best {
            best = d2;
            best_z = z;
        }
    }
    let mut radius = 0.5;
    let mut misses = 0;
    for _ in global..samples {
        let step = random_oct(rng).scale(radius / 8f64.sqrt());
        let z = best_z + step;
        let z = z.scale(1.0 / z.norm());
        let d2 = sq_distance(x, x_star, &z);
        if d2 < best {
            best = d2;
            best_z = z;
            misses = 0;
        } else {
            misses += 1;
            if misses == 200 {
                radius *= 0.5;
                misses = 0;
            }
        }
    }
    best.sqrt()
}
