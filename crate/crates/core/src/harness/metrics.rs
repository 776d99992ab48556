use crate::error::{Error, Result};
use crate::imaging::SpectralImage;

/// `10 log10(peak^2 / MSE)` over every sample of the two images; identical
/// images give `f64::INFINITY`.
pub fn psnr(reference: &SpectralImage, reconstruction: &SpectralImage, peak: f64) -> Result<f64> {
    if !reference.same_shape(reconstruction) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            reference.width(),
            reference.height(),
            reconstruction.width(),
            reconstruction.height()
        )));
    }
    let a = reference.samples();
    let b = reconstruction.samples();
    let mse = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Median of a sample; `NaN` entries sort last.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}
