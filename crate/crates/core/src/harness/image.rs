use std::time::Instant;

use serde::Serialize;

use super::data::{gen_sensing, measure, trial_rng, UNIT_ENERGY_STD};
use super::metrics::psnr;
use crate::baseline::{gd_solve, lanczos_init, sign_align, GdConfig, RealPrInstance};
use crate::error::{Error, Result};
use crate::imaging::{pack, unpack, SpectralImage};
use crate::linalg::OctVector;
use crate::solver::{owf_solve, phase_align, OwfConfig};

/// Stream ids kept away from the sweep's `(ratio, snr, trial)` layout.
const OWF_STREAM: u64 = 1 << 62;
const GD_STREAM: u64 = (1 << 62) + 1;
/// Step halvings tried after a divergence before giving up.
pub const MAX_STEP_HALVINGS: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageMethod {
    #[default]
    Owf,
    Gd,
}

impl std::fmt::Display for ImageMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ImageMethod::Owf => "owf",
            ImageMethod::Gd => "gd",
        })
    }
}

impl std::str::FromStr for ImageMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "owf" => Ok(ImageMethod::Owf),
            "gd" => Ok(ImageMethod::Gd),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?} (owf|gd)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageReport {
    pub method: ImageMethod,
    pub width: usize,
    pub height: usize,
    pub n: usize,
    pub m: usize,
    pub ratio: f64,
    pub seed: u64,
    pub iters: usize,
    /// Step scale that ran to completion, after any halvings.
    pub step_scale: f64,
    pub psnr_db: f64,
    /// Relative error `|x_hat - x| / |x|` after ambiguity removal.
    pub relative_error: f64,
    #[serde(skip)]
    pub wall_ms: f64,
}

/// Measures `img` with `m = round(ratio * pixels)` intensities and recovers it.
///
/// OWF sees the packed octonion signal; GD sees the same pixels as one real
/// vector of length `8 * pixels` with the same number of measurements. The
/// recovered image is aligned to the reference (right phase for OWF, sign for
/// GD) before PSNR is taken with peak 1. Either method that diverges is rerun
/// with its step scale halved, up to [`MAX_STEP_HALVINGS`] times.
pub fn run_image_experiment(
    img: &SpectralImage,
    ratio: f64,
    method: ImageMethod,
    seed: u64,
    owf: &OwfConfig,
    gd: &GdConfig,
) -> Result<(SpectralImage, ImageReport)> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidConfig("ratio must be positive".into()));
    }
    let start = Instant::now();
    let n = img.pixels();
    let m = ((ratio * n as f64).round() as usize).max(1);
    let truth = pack(img);
    let (recovered, iters, step_scale) = match method {
        ImageMethod::Owf => {
            let mut rng = trial_rng(seed, OWF_STREAM);
            let a = gen_sensing(m, n, UNIT_ENERGY_STD, &mut rng);
            let y = measure(&a, &truth)?;
            let (rep, mu) = with_backoff(owf.step_scale, |mu| {
                let cfg = OwfConfig {
                    step_scale: mu,
                    ..owf.clone()
                };
                owf_solve(&a, &y, &cfg, None)
            })?;
            let g = phase_align(&rep.estimate, &truth)?;
            (rep.estimate.right_mul(&g).to_real(), rep.iterations, mu)
        }
        ImageMethod::Gd => {
            let mut rng = trial_rng(seed, GD_STREAM);
            let inst = RealPrInstance::generate(truth.to_real(), m, &mut rng);
            let init = lanczos_init(&inst.sensing, &inst.measurements, gd.lanczos_iters, gd.exec)?;
            let (est, mu) = with_backoff(gd.step_scale, |mu| {
                let cfg = GdConfig {
                    step_scale: mu,
                    ..gd.clone()
                };
                gd_solve(&inst.sensing, &inst.measurements, &init, &cfg)
            })?;
            (sign_align(&est, &inst.signal), gd.iters, mu)
        }
    };
    let reference = truth.to_real();
    let err: f64 = reference
        .iter()
        .zip(&recovered)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let rec = unpack(
        &OctVector::from_real(&recovered)?,
        img.width(),
        img.height(),
        img.wavelengths,
    )?;
    let report = ImageReport {
        method,
        width: img.width(),
        height: img.height(),
        n,
        m,
        ratio,
        seed,
        iters,
        step_scale,
        psnr_db: psnr(img, &rec, 1.0)?,
        relative_error: err / truth.norm(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((rec, report))
}

fn with_backoff<T>(mu: f64, mut run: impl FnMut(f64) -> Result<T>) -> Result<(T, f64)> {
    let mut mu = mu;
    for _ in 0..MAX_STEP_HALVINGS {
        match run(mu) {
            Err(Error::Divergence { .. }) => mu *= 0.5,
            other => return other.map(|v| (v, mu)),
        }
    }
    run(mu).map(|v| (v, mu))
}
