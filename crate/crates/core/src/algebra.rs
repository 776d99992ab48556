//! Scalar octonion arithmetic and the pseudo-real representations.
//!
//! An octonion `x = x0 + x1 e1 + ... + x7 e7` is stored as its eight real
//! coefficients. Two real images of an octonion drive everything else:
//!
//! * [`aleph`] reads the coefficients out as a vector in `R^8`;
//! * [`gimel`] builds the 8x8 right matrix representation.
//!
//! The product is *defined* by `aleph(a * b) = gimel(a) * aleph(b)`. The
//! multiplication table of the units is derived from [`gimel`] at compile time
//! ([`PRODUCT_TABLE`]), so the fast product and the matrix representation can
//! never drift apart.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Image of an octonion under [`aleph`].
pub type RealVec8 = [f64; 8];

/// An element of the octonion algebra.
///
/// `0` holds the real part, `1..8` the coefficients along `e1..e7`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Octonion(pub [f64; 8]);

/// A signed basis unit, the result of multiplying two basis units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedUnit {
    pub sign: i8,
    pub index: usize,
}

/// `PRODUCT_TABLE[i][j]` is `e_i * e_j`, read off column `j` of `gimel(e_i)`.
pub const PRODUCT_TABLE: [[SignedUnit; 8]; 8] = build_product_table();

const fn build_product_table() -> [[SignedUnit; 8]; 8] {
    let mut table = [[SignedUnit { sign: 0, index: 0 }; 8]; 8];
    let mut i = 0;
    while i < 8 {
        let m = gimel_coeffs(&unit_coeffs(i));
        let mut j = 0;
        while j < 8 {
            let mut row = 0;
            while row < 8 {
                let v = m[row][j];
                if v != 0.0 {
                    table[i][j] = SignedUnit {
                        sign: if v > 0.0 { 1 } else { -1 },
                        index: row,
                    };
                }
                row += 1;
            }
            j += 1;
        }
        i += 1;
    }
    table
}

const fn unit_coeffs(i: usize) -> [f64; 8] {
    let mut c = [0.0; 8];
    c[i] = 1.0;
    c
}

/// The right matrix representation, entry for entry.
#[rustfmt::skip]
const fn gimel_coeffs(x: &[f64; 8]) -> [[f64; 8]; 8] {
    let [x0, x1, x2, x3, x4, x5, x6, x7] = *x;
    [
        [x0, -x1, -x2, -x3, -x4, -x5, -x6, -x7],
        [x1,  x0,  x3, -x2,  x5, -x4, -x7,  x6],
        [x2, -x3,  x0,  x1,  x6,  x7, -x4, -x5],
        [x3,  x2, -x1,  x0,  x7, -x6,  x5, -x4],
        [x4, -x5, -x6, -x7,  x0,  x1,  x2,  x3],
        [x5,  x4, -x7,  x6, -x1,  x0, -x3,  x2],
        [x6,  x7,  x4, -x5, -x2,  x3,  x0, -x1],
        [x7, -x6,  x5,  x4, -x3, -x2,  x1,  x0],
    ]
}

impl Octonion {
    pub const ZERO: Octonion = Octonion([0.0; 8]);
    pub const ONE: Octonion = Octonion([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

    pub const fn new(coeffs: [f64; 8]) -> Self {
        Octonion(coeffs)
    }

    pub const fn real(r: f64) -> Self {
        let mut c = [0.0; 8];
        c[0] = r;
        Octonion(c)
    }

    /// Basis unit `e_i`; `unit(0)` is the identity.
    ///
    /// Panics if `i >= 8`.
    pub const fn unit(i: usize) -> Self {
        Octonion(unit_coeffs(i))
    }

    pub const fn coeffs(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn re(&self) -> f64 {
        self.0[0]
    }

    /// Purely imaginary part.
    pub fn im(&self) -> Octonion {
        let mut c = self.0;
        c[0] = 0.0;
        Octonion(c)
    }

    pub fn conj(&self) -> Octonion {
        let c = &self.0;
        Octonion([c[0], -c[1], -c[2], -c[3], -c[4], -c[5], -c[6], -c[7]])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Euclidean inner product of the coefficient vectors, `Re(conj(self) * other)`.
    pub fn dot(&self, other: &Octonion) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: f64) -> Octonion {
        Octonion(self.0.map(|v| v * s))
    }

    /// `conj(x) / |x|^2`. Returns `None` for zero.
    pub fn inverse(&self) -> Option<Octonion> {
        let n2 = self.norm_sqr();
        (n2 > 0.0).then(|| self.conj().scale(1.0 / n2))
    }

    /// `x / |x|`.
    pub fn sign_unit(&self) -> Result<Octonion> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Ok(self.scale(1.0 / n))
        } else {
            Err(Error::ZeroSign)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Product through the matrix representation, `aleph_inv(gimel(self) aleph(rhs))`.
    ///
    /// This is the defining form of the product; `*` uses [`PRODUCT_TABLE`].
    pub fn mul_via_gimel(&self, rhs: &Octonion) -> Octonion {
        aleph_inv(&gimel(self).mul_vec(&aleph(rhs)))
    }
}

impl Index<usize> for Octonion {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Octonion {
    type Output = Octonion;

    fn add(self, rhs: Octonion) -> Octonion {
        Octonion(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for Octonion {
    fn add_assign(&mut self, rhs: Octonion) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for Octonion {
    type Output = Octonion;

    fn sub(self, rhs: Octonion) -> Octonion {
        Octonion(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl SubAssign for Octonion {
    fn sub_assign(&mut self, rhs: Octonion) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Neg for Octonion {
    type Output = Octonion;

    fn neg(self) -> Octonion {
        Octonion(self.0.map(|v| -v))
    }
}

impl Mul<f64> for Octonion {
    type Output = Octonion;

    fn mul(self, rhs: f64) -> Octonion {
        self.scale(rhs)
    }
}

impl Mul<Octonion> for f64 {
    type Output = Octonion;

    fn mul(self, rhs: Octonion) -> Octonion {
        rhs.scale(self)
    }
}

impl Div<f64> for Octonion {
    type Output = Octonion;

    fn div(self, rhs: f64) -> Octonion {
        self.scale(1.0 / rhs)
    }
}

impl Mul for Octonion {
    type Output = Octonion;

    #[inline]
    fn mul(self, rhs: Octonion) -> Octonion {
        let mut out = [0.0; 8];
        for (i, row) in PRODUCT_TABLE.iter().enumerate() {
            let ai = self.0[i];
            for (j, unit) in row.iter().enumerate() {
                let p = ai * rhs.0[j];
                if unit.sign > 0 {
                    out[unit.index] += p;
                } else {
                    out[unit.index] -= p;
                }
            }
        }
        Octonion(out)
    }
}

impl fmt::Display for Octonion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0[0])?;
        for (i, v) in self.0.iter().enumerate().skip(1) {
            if *v < 0.0 || v.is_sign_negative() {
                write!(f, " - {}e{i}", -v)?;
            } else {
                write!(f, " + {v}e{i}")?;
            }
        }
        Ok(())
    }
}

pub fn aleph(x: &Octonion) -> RealVec8 {
    x.0
}

pub fn aleph_inv(v: &RealVec8) -> Octonion {
    Octonion(*v)
}

/// The 8x8 right matrix representation.
pub fn gimel(x: &Octonion) -> RealMat8 {
    RealMat8(gimel_coeffs(&x.0))
}

/// Inverse of [`gimel`] on its image: column 0 is `aleph(x)`.
pub fn gimel_inv(m: &RealMat8) -> Octonion {
    Octonion(std::array::from_fn(|r| m.0[r][0]))
}

pub fn conjugate(x: &Octonion) -> Octonion {
    x.conj()
}

pub fn sign_unit(x: &Octonion) -> Result<Octonion> {
    x.sign_unit()
}

/// Dense 8x8 real matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealMat8(pub [[f64; 8]; 8]);

impl RealMat8 {
    pub fn identity() -> Self {
        RealMat8(std::array::from_fn(|r| {
            std::array::from_fn(|c| if r == c { 1.0 } else { 0.0 })
        }))
    }

    pub fn zeros() -> Self {
        RealMat8([[0.0; 8]; 8])
    }

    pub fn transpose(&self) -> Self {
        RealMat8(std::array::from_fn(|r| std::array::from_fn(|c| self.0[c][r])))
    }

    pub fn mul_vec(&self, v: &RealVec8) -> RealVec8 {
        std::array::from_fn(|r| self.0[r].iter().zip(v).map(|(a, b)| a * b).sum())
    }

    pub fn mul_mat(&self, rhs: &RealMat8) -> RealMat8 {
        RealMat8(std::array::from_fn(|r| {
            std::array::from_fn(|c| (0..8).map(|k| self.0[r][k] * rhs.0[k][c]).sum())
        }))
    }

    pub fn max_abs_diff(&self, other: &RealMat8) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Generate the unit product table from the matrix representation at runtime.
///
/// Identical to [`PRODUCT_TABLE`]; kept separate so tests can compare the
/// compile-time table against a fresh derivation through [`gimel`].
pub fn unit_table() -> [[SignedUnit; 8]; 8] {
    std::array::from_fn(|i| {
        let m = gimel(&Octonion::unit(i));
        std::array::from_fn(|j| {
            let col: RealVec8 = std::array::from_fn(|r| m.0[r][j]);
            let index = col
                .iter()
                .position(|v| *v != 0.0)
                .expect("gimel of a unit has one nonzero per column");
            SignedUnit {
                sign: col[index].signum() as i8,
                index,
            }
        })
    })
}
