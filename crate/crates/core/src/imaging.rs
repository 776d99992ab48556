//! Eight-band spectral images and the `OCT8` file format.
//!
//! `OCT8` layout, all little-endian:
//!
//! | bytes            | content                                   |
//! |------------------|-------------------------------------------|
//! | 4                | magic `b"OCT8"`                           |
//! | 2                | version `u16` (currently 1)               |
//! | 4                | width `u32`                               |
//! | 4                | height `u32`                              |
//! | 8 x 4            | band wavelengths in nm, `f32`             |
//! | 8 x w x h x 8    | samples, `f64`, band-major then row-major |

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::algebra::Octonion;
use crate::error::{Error, Result};
use crate::linalg::OctVector;

pub const BANDS: usize = 8;
pub const MAGIC: &[u8; 4] = b"OCT8";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 4 + 4 * BANDS;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralImage {
    width: usize,
    height: usize,
    /// `BANDS` planes of `width * height` samples each.
    samples: Vec<f64>,
    pub wavelengths: [f32; BANDS],
}

impl SpectralImage {
    pub fn new(width: usize, height: usize, samples: Vec<f64>, wavelengths: [f32; BANDS]) -> Result<Self> {
        let expected = BANDS * width * height;
        if samples.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height}x{BANDS} image needs {expected} samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedImage("non-finite sample".into()));
        }
        Ok(SpectralImage {
            width,
            height,
            samples,
            wavelengths,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn band(&self, b: usize) -> &[f64] {
        let p = self.pixels();
        &self.samples[b * p..(b + 1) * p]
    }

    pub fn get(&self, x: usize, y: usize, band: usize) -> f64 {
        self.samples[band * self.pixels() + y * self.width + x]
    }

    /// The eight band values at pixel `(x, y)`.
    pub fn signature(&self, x: usize, y: usize) -> [f64; BANDS] {
        std::array::from_fn(|b| self.get(x, y, b))
    }

    pub fn same_shape(&self, other: &SpectralImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn in_unit_range(&self) -> bool {
        self.samples.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Min-max rescaling of all samples to `[0, 1]`.
    pub fn normalized(&self) -> SpectralImage {
        let lo = self.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let samples = if span > 0.0 {
            self.samples.iter().map(|v| (v - lo) / span).collect()
        } else {
            vec![0.0; self.samples.len()]
        };
        SpectralImage {
            samples,
            ..self.clone()
        }
    }
}

/// Pixel `p` (row-major) becomes entry `p`; band `k` becomes coefficient `k`.
pub fn pack(img: &SpectralImage) -> OctVector {
    OctVector(
        (0..img.pixels())
            .map(|p| Octonion(std::array::from_fn(|b| img.samples[b * img.pixels() + p])))
            .collect(),
    )
}

/// Inverse of [`pack`].
pub fn unpack(x: &OctVector, width: usize, height: usize, wavelengths: [f32; BANDS]) -> Result<SpectralImage> {
    let p = width * height;
    if x.len() != p {
        return Err(Error::ShapeMismatch(format!(
            "{} entries cannot fill a {width}x{height} image",
            x.len()
        )));
    }
    let mut samples = vec![0.0; BANDS * p];
    for (i, o) in x.iter().enumerate() {
        for b in 0..BANDS {
            samples[b * p + i] = o[b];
        }
    }
    SpectralImage::new(width, height, samples, wavelengths)
}

pub fn encode(img: &SpectralImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * img.samples.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(img.width as u32).to_le_bytes());
    out.extend_from_slice(&(img.height as u32).to_le_bytes());
    for w in img.wavelengths {
        out.extend_from_slice(&w.to_le_bytes());
    }
    for v in &img.samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses an `OCT8` buffer exactly as stored.
pub fn decode(bytes: &[u8]) -> Result<SpectralImage> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::MalformedImage("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::MalformedImage("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::MalformedImage(format!("unsupported version {version}")));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let (width, height) = (u32_at(6), u32_at(10));
    let wavelengths = std::array::from_fn(|b| {
        let o = 14 + 4 * b;
        f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"))
    });
    let count = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(BANDS))
        .ok_or_else(|| Error::MalformedImage("dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 8 {
        return Err(Error::MalformedImage(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            payload.len()
        )));
    }
    let samples = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SpectralImage::new(width, height, samples, wavelengths)
}

pub fn save(img: &SpectralImage, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(img))?;
    Ok(())
}

/// Reads an `OCT8` file exactly as stored.
pub fn load_raw(path: impl AsRef<Path>) -> Result<SpectralImage> {
    decode(&fs::read(path)?)
}

/// Reads an `OCT8` file; samples outside `[0, 1]` trigger a min-max
/// rescaling, in-range files load bit-exactly.
pub fn load(path: impl AsRef<Path>) -> Result<SpectralImage> {
    let img = load_raw(path)?;
    Ok(if img.in_unit_range() { img } else { img.normalized() })
}

/// A cube with an arbitrary number of bands, e.g. a 31-band capture.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCube {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    /// Band-major planes.
    pub samples: Vec<f64>,
    pub wavelengths: Vec<f32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    /// Centered `width x height` window in an image of the given size.
    pub fn centered(img_width: usize, img_height: usize, width: usize, height: usize) -> Rect {
        Rect {
            x: img_width.saturating_sub(width) / 2,
            y: img_height.saturating_sub(height) / 2,
            width,
            height,
        }
    }
}

/// Indices `round(i (B - 1) / 7)` for `i = 0..8`.
pub fn equispaced_bands(total: usize) -> Result<[usize; BANDS]> {
    if total < BANDS {
        return Err(Error::ShapeMismatch(format!(
            "need at least {BANDS} bands, cube has {total}"
        )));
    }
    Ok(std::array::from_fn(|i| {
        (i as f64 * (total - 1) as f64 / (BANDS - 1) as f64).round() as usize
    }))
}

pub fn crop_and_select(cube: &SpectralCube, rect: Rect, bands: [usize; BANDS]) -> Result<SpectralImage> {
    if cube.samples.len() != cube.width * cube.height * cube.bands {
        return Err(Error::ShapeMismatch("cube sample count".into()));
    }
    if rect.width == 0 || rect.height == 0 || rect.x + rect.width > cube.width || rect.y + rect.height > cube.height {
        return Err(Error::ShapeMismatch(format!(
            "crop {rect:?} outside {}x{} cube",
            cube.width, cube.height
        )));
    }
    if bands.windows(2).any(|w| w[0] >= w[1]) || bands[BANDS - 1] >= cube.bands {
        return Err(Error::ShapeMismatch(format!(
            "band indices {bands:?} must be strictly increasing and below {}",
            cube.bands
        )));
    }
    let plane = cube.width * cube.height;
    let mut samples = Vec::with_capacity(BANDS * rect.width * rect.height);
    for &b in &bands {
        for y in rect.y..rect.y + rect.height {
            let start = b * plane + y * cube.width + rect.x;
            samples.extend_from_slice(&cube.samples[start..start + rect.width]);
        }
    }
    let wavelengths = std::array::from_fn(|i| cube.wavelengths.get(bands[i]).copied().unwrap_or(0.0));
    SpectralImage::new(rect.width, rect.height, samples, wavelengths)
}

/// Default wavelengths of eight equispaced bands over 400-700 nm.
pub fn default_wavelengths() -> [f32; BANDS] {
    std::array::from_fn(|i| 400.0 + 10.0 * equispaced_bands(31).expect("31 >= 8")[i] as f32)
}

/// Smooth synthetic scene with values in `[0, 1]`: a few blobs, each with
/// its own spectral signature, over a sloped background.
pub fn synthetic(width: usize, height: usize, rng: &mut impl Rng) -> SpectralImage {
    let blobs: Vec<([f64; 2], f64, [f64; BANDS])> = (0..4)
        .map(|_| {
            let c = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let r = rng.random_range(0.15..0.4);
            let peak = rng.random_range(0.0..1.0);
            let profile = std::array::from_fn(|b| {
                let t = b as f64 / (BANDS - 1) as f64;
                (-(t - peak).powi(2) / 0.08).exp()
            });
            (c, r, profile)
        })
        .collect();
    let slope: [f64; BANDS] = std::array::from_fn(|_| rng.random_range(0.05..0.25));
    let p = width * height;
    let mut samples = vec![0.0; BANDS * p];
    for y in 0..height {
        for x in 0..width {
            let u = (x as f64 + 0.5) / width as f64;
            let v = (y as f64 + 0.5) / height as f64;
            for b in 0..BANDS {
                let mut s = slope[b] * (u + v) / 2.0;
                for (c, r, profile) in &blobs {
                    let d2 = (u - c[0]).powi(2) + (v - c[1]).powi(2);
                    s += 0.6 * profile[b] * (-d2 / (r * r)).exp();
                }
                samples[b * p + y * width + x] = s.clamp(0.0, 1.0);
            }
        }
    }
    SpectralImage::new(width, height, samples, default_wavelengths()).expect("sized above")
}

/// CSV of spectral signatures with columns
/// `pixel_x,pixel_y,band0..band7,source`.
pub fn write_signatures<W: std::io::Write>(
    out: W,
    pixels: &[(usize, usize)],
    sources: &[(&str, &SpectralImage)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pixel_x".to_string(), "pixel_y".to_string()];
    header.extend((0..BANDS).map(|b| format!("band{b}")));
    header.push("source".into());
    w.write_record(&header)?;
    for &(x, y) in pixels {
        for (name, img) in sources {
            if x >= img.width() || y >= img.height() {
                return Err(Error::ShapeMismatch(format!("pixel ({x}, {y}) outside image")));
            }
            let mut rec = vec![x.to_string(), y.to_string()];
            rec.extend(img.signature(x, y).iter().map(|v| v.to_string()));
            rec.push(name.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> SpectralImage {
        synthetic(16, 16, &mut ChaCha8Rng::seed_from_u64(11))
    }

    #[test]
    fn pack_single_pixel() {
        let img = SpectralImage::new(1, 1, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0; 8]).unwrap();
        assert_eq!(pack(&img), OctVector(vec![Octonion::ONE]));
    }

    #[test]
    fn pack_unpack_round_trip() {
        let img = fixture();
        let x = pack(&img);
        assert_eq!(x.len(), 256);
        assert_eq!(unpack(&x, 16, 16, img.wavelengths).unwrap(), img);
        assert!(unpack(&x, 8, 8, img.wavelengths).is_err());
    }

    #[test]
    fn pack_32x32_crop_dimension() {
        let img = synthetic(32, 32, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(pack(&img).len(), 1024);
    }

    #[test]
    fn encode_decode_is_bit_exact() {
        let img = fixture();
        let bytes = encode(&img);
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 8 * 256);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn decode_errors() {
        let mut bytes = encode(&fixture());
        assert!(decode(&bytes[..10]).is_err());
        assert!(decode(&bytes[..bytes.len() - 3]).is_err());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::MalformedImage(m)) if m.contains("magic")));
        let mut bytes = encode(&fixture());
        bytes[4] = 9;
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn file_round_trip_and_normalization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.oct8");
        let img = fixture();
        save(&img, &path).unwrap();
        assert_eq!(load(&path).unwrap(), img);

        let scaled = SpectralImage::new(2, 1, (0..16).map(|i| i as f64 * 10.0).collect(), [0.0; 8]).unwrap();
        save(&scaled, &path).unwrap();
        assert_eq!(load_raw(&path).unwrap(), scaled);
        let loaded = load(&path).unwrap();
        assert!(loaded.in_unit_range());
        assert_eq!(loaded.samples()[15], 1.0);
    }

    #[test]
    fn equispaced_selection_from_31() {
        assert_eq!(equispaced_bands(31).unwrap(), [0, 4, 9, 13, 17, 21, 26, 30]);
        assert_eq!(equispaced_bands(8).unwrap(), [0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(equispaced_bands(7).is_err());
    }

    fn cube(bands: usize, w: usize, h: usize) -> SpectralCube {
        SpectralCube {
            width: w,
            height: h,
            bands,
            samples: (0..bands * w * h).map(|i| i as f64).collect(),
            wavelengths: (0..bands).map(|b| 400.0 + 10.0 * b as f32).collect(),
        }
    }

    #[test]
    fn crop_identity_and_single_pixel() {
        let c = cube(8, 5, 4);
        let full = crop_and_select(
            &c,
            Rect {
                x: 0,
                y: 0,
                width: 5,
                height: 4,
            },
            [0, 1, 2, 3, 4, 5, 6, 7],
        )
        .unwrap();
        assert_eq!(full.samples(), &c.samples[..]);

        let c = cube(31, 10, 10);
        let bands = equispaced_bands(31).unwrap();
        let px = crop_and_select(
            &c,
            Rect {
                x: 3,
                y: 7,
                width: 1,
                height: 1,
            },
            bands,
        )
        .unwrap();
        for (i, b) in bands.iter().enumerate() {
            assert_eq!(px.get(0, 0, i), (b * 100 + 7 * 10 + 3) as f64);
        }
        assert_eq!(px.wavelengths[1], 440.0);
    }

    #[test]
    fn crop_errors() {
        let c = cube(31, 10, 10);
        let bands = equispaced_bands(31).unwrap();
        assert!(crop_and_select(
            &c,
            Rect {
                x: 5,
                y: 5,
                width: 6,
                height: 1
            },
            bands
        )
        .is_err());
        assert!(crop_and_select(
            &c,
            Rect {
                x: 0,
                y: 0,
                width: 2,
                height: 2
            },
            [0, 1, 2, 3, 4, 5, 6, 31]
        )
        .is_err());
        assert!(crop_and_select(
            &c,
            Rect {
                x: 0,
                y: 0,
                width: 2,
                height: 2
            },
            [0, 2, 1, 3, 4, 5, 6, 7]
        )
        .is_err());
        assert_eq!(
            Rect::centered(64, 64, 32, 32),
            Rect {
                x: 16,
                y: 16,
                width: 32,
                height: 32
            }
        );
    }

    #[test]
    fn synthetic_is_deterministic_and_in_range() {
        let a = fixture();
        assert!(a.in_unit_range());
        assert_eq!(a, fixture());
        assert!(a.samples().iter().any(|v| *v > 0.2));
    }

    #[test]
    fn signature_csv() {
        let img = fixture();
        let mut buf = Vec::new();
        write_signatures(&mut buf, &[(10, 10), (15, 15)], &[("ref", &img), ("owf", &img)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "pixel_x,pixel_y,band0,band1,band2,band3,band4,band5,band6,band7,source"
        );
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("10,10,") && lines[1].ends_with(",ref"));
    }
}
