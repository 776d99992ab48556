//! Seeded signals, sensing matrices, measurements and noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::Octonion;
use crate::error::{check_dim, Result};
use crate::linalg::{herm_inner_slice, OctMatrix, OctVector};

/// Per-coefficient standard deviation giving `E|A_lk|^2 = 1`.
pub const UNIT_ENERGY_STD: f64 = 0.353_553_390_593_273_8; // 1/sqrt(8)

/// Generator for one trial. Streams are keyed by the master seed and a
/// stream id, so trials are independent of each other and of run order.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of sweep cell `(ratio_idx, snr_idx)`.
pub fn stream_id(ratio_idx: usize, snr_idx: usize, trial: usize) -> u64 {
    ((ratio_idx as u64) << 44) | ((snr_idx as u64) << 32) | trial as u64
}

fn normal_oct(rng: &mut impl Rng, std: f64) -> Octonion {
    Octonion(std::array::from_fn(|_| {
        let v: f64 = StandardNormal.sample(rng);
        v * std
    }))
}

/// Signal with i.i.d. standard normal coefficients, normalized to `|x| = 1`.
pub fn gen_signal(n: usize, rng: &mut impl Rng) -> OctVector {
    let x = OctVector((0..n).map(|_| normal_oct(rng, 1.0)).collect());
    let nrm = x.norm();
    x.scale(1.0 / nrm)
}

/// Gaussian octonion sensing matrix with per-coefficient standard deviation `std`.
pub fn gen_sensing(m: usize, n: usize, std: f64, rng: &mut impl Rng) -> OctMatrix {
    OctMatrix::from_fn(m, n, |_, _| normal_oct(rng, std))
}

/// Intensities `y_l = |a_l* x|^2`.
pub fn measure(a: &OctMatrix, x: &OctVector) -> Result<Vec<f64>> {
    check_dim("measure", a.cols(), x.len())?;
    Ok((0..a.rows())
        .map(|l| herm_inner_slice(a.row(l), x.as_slice()).norm_sqr())
        .collect())
}

/// Adds Gaussian noise of per-sample variance `|y|^2 10^(-snr/10) / m` and
/// clamps the result at zero. An infinite `snr_db` leaves `y` untouched.
pub fn add_noise(y: &[f64], snr_db: f64, rng: &mut impl Rng) -> Vec<f64> {
    if snr_db == f64::INFINITY || y.is_empty() {
        return y.to_vec();
    }
    let energy: f64 = y.iter().map(|v| v * v).sum();
    let sigma = (energy * 10f64.powf(-snr_db / 10.0) / y.len() as f64).sqrt();
    y.iter()
        .map(|v| {
            let w: f64 = StandardNormal.sample(rng);
            (v + sigma * w).max(0.0)
        })
        .collect()
}

/// Raw noise vector of the same model, without clamping; used to check the
/// realized SNR.
pub fn noise_vector(y: &[f64], snr_db: f64, rng: &mut impl Rng) -> Vec<f64> {
    let energy: f64 = y.iter().map(|v| v * v).sum();
    let sigma = (energy * 10f64.powf(-snr_db / 10.0) / y.len() as f64).sqrt();
    (0..y.len())
        .map(|_| {
            let w: f64 = StandardNormal.sample(rng);
            sigma * w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_is_unit_norm_and_deterministic() {
        for seed in 0..10 {
            let x = gen_signal(17, &mut trial_rng(seed, 0));
            assert!((x.norm() - 1.0).abs() < 1e-14);
            assert_eq!(x, gen_signal(17, &mut trial_rng(seed, 0)));
        }
        assert_ne!(gen_signal(4, &mut trial_rng(1, 0)), gen_signal(4, &mut trial_rng(1, 1)));
    }

    #[test]
    fn signal_components_have_unit_variance() {
        // Before normalization: regenerate the raw draws from the same stream.
        let mut rng = trial_rng(99, 0);
        let raw: Vec<Octonion> = (0..10_000).map(|_| normal_oct(&mut rng, 1.0)).collect();
        for c in 0..8 {
            let var = raw.iter().map(|o| o[c] * o[c]).sum::<f64>() / raw.len() as f64;
            assert!((var - 1.0).abs() < 0.05, "component {c}: {var}");
        }
        let x = gen_signal(10_000, &mut trial_rng(99, 0));
        let nrm = (raw.iter().map(Octonion::norm_sqr).sum::<f64>()).sqrt();
        assert!((x[0] - raw[0].scale(1.0 / nrm)).norm() < 1e-15);
    }

    #[test]
    fn sensing_entries_have_unit_energy() {
        let a = gen_sensing(1000, 100, UNIT_ENERGY_STD, &mut trial_rng(5, 0));
        let e = a.as_slice().iter().map(Octonion::norm_sqr).sum::<f64>() / 1e5;
        assert!((e - 1.0).abs() < 0.03, "{e}");
        assert_eq!(a, gen_sensing(1000, 100, UNIT_ENERGY_STD, &mut trial_rng(5, 0)));
    }

    #[test]
    fn measurement_cases() {
        let mut rng = trial_rng(6, 0);
        let a = gen_sensing(30, 4, UNIT_ENERGY_STD, &mut rng);
        assert!(measure(&a, &OctVector::zeros(4)).unwrap().iter().all(|v| *v == 0.0));
        let x = gen_signal(4, &mut rng);
        assert!(measure(&a, &x).unwrap().iter().all(|v| *v >= 0.0));
        let one = OctMatrix::from_rows(1, 1, vec![Octonion::ONE]).unwrap();
        let y = measure(&one, &OctVector(vec![Octonion::unit(5)])).unwrap();
        assert_eq!(y, vec![1.0]);
        assert!(measure(&a, &OctVector::zeros(3)).is_err());
    }

    #[test]
    fn noise_realizes_requested_snr() {
        let mut rng = trial_rng(7, 0);
        let a = gen_sensing(2000, 10, UNIT_ENERGY_STD, &mut rng);
        let x = gen_signal(10, &mut rng);
        let y = measure(&a, &x).unwrap();
        let energy: f64 = y.iter().map(|v| v * v).sum();
        for snr in [0.0, 10.0, 20.0, 30.0] {
            let w = noise_vector(&y, snr, &mut rng);
            let wn: f64 = w.iter().map(|v| v * v).sum();
            let realized = 10.0 * (energy / wn).log10();
            assert!((realized - snr).abs() < 0.5, "{snr} -> {realized}");
        }
        assert_eq!(add_noise(&y, f64::INFINITY, &mut rng), y);
        assert!(add_noise(&y, -10.0, &mut rng).iter().all(|v| *v >= 0.0));
    }
}
