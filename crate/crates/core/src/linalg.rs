//! Octonion vectors and matrices, their stacked real images, and the power
//! method used by spectral initialization.

use std::ops::{Index, IndexMut};

use crate::algebra::{gimel, Octonion, RealMat8};
use crate::error::{check_dim, Error, Result};
use crate::par::{self, Exec};

/// A vector in `O^n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OctVector(pub Vec<Octonion>);

impl OctVector {
    pub fn zeros(n: usize) -> Self {
        OctVector(vec![Octonion::ZERO; n])
    }

    /// Unit basis vector with `1` at position `k`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Octonion::ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Octonion> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Octonion] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Octonion::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        OctVector(self.0.iter().map(|x| x.scale(s)).collect())
    }

    /// Entrywise right multiplication `x_k * z`.
    pub fn right_mul(&self, z: &Octonion) -> Self {
        OctVector(self.0.iter().map(|x| *x * *z).collect())
    }

    /// Entrywise left multiplication `z * x_k`.
    pub fn left_mul(&self, z: &Octonion) -> Self {
        OctVector(self.0.iter().map(|x| *z * *x).collect())
    }

    /// Stacked `aleph` image, length `8n`.
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|x| x.0).collect()
    }

    /// Inverse of [`OctVector::to_real`].
    pub fn from_real(v: &[f64]) -> Result<Self> {
        if !v.len().is_multiple_of(8) {
            return Err(Error::DimensionMismatch {
                context: "aleph_inv (length must be a multiple of 8)",
                expected: v.len().next_multiple_of(8),
                found: v.len(),
            });
        }
        Ok(OctVector(
            v.chunks_exact(8)
                .map(|c| Octonion(c.try_into().expect("chunk of 8")))
                .collect(),
        ))
    }

    /// Stacked right representation: the `8n x 8` matrix with blocks `gimel(x_k)`.
    pub fn gimel(&self) -> RealMatrix {
        let mut out = RealMatrix::zeros(8 * self.len(), 8);
        for (k, x) in self.0.iter().enumerate() {
            out.set_block(k, 0, &gimel(x));
        }
        out
    }
}

impl Index<usize> for OctVector {
    type Output = Octonion;

    fn index(&self, i: usize) -> &Octonion {
        &self.0[i]
    }
}

impl IndexMut<usize> for OctVector {
    fn index_mut(&mut self, i: usize) -> &mut Octonion {
        &mut self.0[i]
    }
}

impl From<Vec<Octonion>> for OctVector {
    fn from(v: Vec<Octonion>) -> Self {
        OctVector(v)
    }
}

/// A dense `m x n` octonion matrix, row-major. Row `l` is the measurement
/// vector `a_l`, which enters measurements conjugated.
#[derive(Clone, Debug, PartialEq)]
pub struct OctMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Octonion>,
}

impl OctMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        OctMatrix {
            rows,
            cols,
            data: vec![Octonion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Octonion::ONE;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Octonion>) -> Result<Self> {
        check_dim("OctMatrix::from_rows", rows * cols, data.len())?;
        Ok(OctMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Octonion) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        OctMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Octonion] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Octonion] {
        &self.data
    }

    /// Block real representation: `8m x 8n` with block `(l, k) = gimel(A_lk)`.
    pub fn gimel(&self) -> RealMatrix {
        let mut out = RealMatrix::zeros(8 * self.rows, 8 * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set_block(r, c, &gimel(&self[(r, c)]));
            }
        }
        out
    }

    /// Largest deviation from `Y_ij = conj(Y_ji)`.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for OctMatrix {
    type Output = Octonion;

    fn index(&self, (r, c): (usize, usize)) -> &Octonion {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for OctMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Octonion {
        &mut self.data[r * self.cols + c]
    }
}

/// Dense real matrix, row-major. Holds `gimel` images of octonion vectors and
/// matrices, and the real sensing matrix of the baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("RealMatrix::from_rows", rows * cols, data.len())?;
        Ok(RealMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn set_block(&mut self, br: usize, bc: usize, block: &RealMat8) {
        for (r, row) in block.0.iter().enumerate() {
            let start = (8 * br + r) * self.cols + 8 * bc;
            self.data[start..start + 8].copy_from_slice(row);
        }
    }

    pub fn block(&self, br: usize, bc: usize) -> RealMat8 {
        RealMat8(std::array::from_fn(|r| {
            std::array::from_fn(|c| self[(8 * br + r, 8 * bc + c)])
        }))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("RealMatrix::mul_vec", self.cols, v.len())?;
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    /// `self^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim("RealMatrix::tr_mul_vec", self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &s) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += s * a;
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, rhs: &RealMatrix) -> Result<Self> {
        check_dim("RealMatrix::matmul", self.cols, rhs.rows)?;
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == 0.0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `Ax` with entry `l = sum_k A_lk * x_k`, products taken left to right.
pub fn mat_vec(a: &OctMatrix, x: &OctVector) -> Result<OctVector> {
    check_dim("mat_vec", a.cols(), x.len())?;
    Ok(OctVector(
        (0..a.rows())
            .map(|r| {
                a.row(r)
                    .iter()
                    .zip(x.iter())
                    .fold(Octonion::ZERO, |acc, (aij, xj)| acc + *aij * *xj)
            })
            .collect(),
    ))
}

/// Hermitian product `x* y = sum_k conj(x_k) * y_k`.
pub fn herm_inner(x: &OctVector, y: &OctVector) -> Result<Octonion> {
    check_dim("herm_inner", x.len(), y.len())?;
    Ok(herm_inner_slice(x.as_slice(), y.as_slice()))
}

#[inline]
pub(crate) fn herm_inner_slice(x: &[Octonion], y: &[Octonion]) -> Octonion {
    x.iter().zip(y).fold(Octonion::ZERO, |acc, (a, b)| acc + a.conj() * *b)
}

/// Spectral matrix `Y = (1/m) sum_l y_l a_l a_l*`, entry `(i, j) = (1/m) sum_l y_l A_li conj(A_lj)`.
///
/// Rows of `Y` are computed independently, so the result does not depend on `exec`.
pub fn accumulate_spectral_matrix(y: &[f64], a: &OctMatrix, exec: Exec) -> Result<OctMatrix> {
    check_dim("accumulate_spectral_matrix", a.rows(), y.len())?;
    let (m, n) = (a.rows(), a.cols());
    let inv_m = if m == 0 { 0.0 } else { 1.0 / m as f64 };

    // Upper triangle, row by row.
    let upper = par::map_indices(n, exec, |i| {
        let mut row = vec![Octonion::ZERO; n - i];
        for (l, &yl) in y.iter().enumerate() {
            if yl == 0.0 {
                continue;
            }
            let al = a.row(l);
            let lhs = al[i].scale(yl);
            for (j, out) in (i..n).zip(row.iter_mut()) {
                *out += lhs * al[j].conj();
            }
        }
        row
    });

    let mut out = OctMatrix::zeros(n, n);
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            let v = v.scale(inv_m);
            if i == j {
                // Diagonal entries are sums of |a_li|^2; drop rounding noise.
                out[(i, i)] = Octonion::real(v.re());
            } else {
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
    }
    Ok(out)
}

pub const DEFAULT_POWER_ITERS: usize = 200;
pub const DEFAULT_POWER_TOL: f64 = 1e-10;

/// Leading eigenvector of a Hermitian octonion matrix by power iteration on
/// its real representation.
///
/// Iterates `v <- gimel(Y) v / |gimel(Y) v|` starting from the normalized
/// all-ones real vector and reads the result back blockwise. Stops after
/// `iters` steps or when successive Rayleigh quotients differ by less than
/// `tol`. Returns the unit eigenvector and its Rayleigh quotient.
pub fn power_leading_eigvec(y: &OctMatrix, iters: usize, tol: f64) -> Result<(OctVector, f64)> {
    check_dim("power_leading_eigvec (square)", y.rows(), y.cols())?;
    let n = y.rows();
    if n == 0 || y.as_slice().iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::NoDominantEigenvector);
    }
    let mut v = OctVector(vec![Octonion::ONE; n]).scale(1.0 / (n as f64).sqrt());
    let mut lambda = f64::NAN;
    for _ in 0..iters.max(1) {
        let w = mat_vec(y, &v)?;
        let rayleigh: f64 = v.iter().zip(w.iter()).map(|(a, b)| a.dot(b)).sum();
        let wn = w.norm();
        if wn == 0.0 || !wn.is_finite() {
            return Err(Error::NoDominantEigenvector);
        }
        v = w.scale(1.0 / wn);
        let converged = (rayleigh - lambda).abs() < tol;
        lambda = rayleigh;
        if converged {
            break;
        }
    }
    // Rayleigh quotient of the returned vector.
    let w = mat_vec(y, &v)?;
    let lambda_final = v.iter().zip(w.iter()).map(|(a, b)| a.dot(b)).sum();
    Ok((v, lambda_final))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_oct(rng: &mut impl Rng) -> Octonion {
        Octonion(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
    }

    fn random_vec(rng: &mut impl Rng, n: usize) -> OctVector {
        OctVector((0..n).map(|_| random_oct(rng)).collect())
    }

    fn random_mat(rng: &mut impl Rng, m: usize, n: usize) -> OctMatrix {
        OctMatrix::from_fn(m, n, |_, _| random_oct(rng))
    }

    #[test]
    fn identity_mat_vec() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_vec(&mut rng, 5);
        assert_eq!(mat_vec(&OctMatrix::identity(5), &x).unwrap(), x);
    }

    #[test]
    fn one_by_one_unit_product() {
        let a = OctMatrix::from_rows(1, 1, vec![Octonion::unit(1)]).unwrap();
        let x = OctVector(vec![Octonion::unit(2)]);
        assert_eq!(mat_vec(&a, &x).unwrap(), OctVector(vec![-Octonion::unit(3)]));
    }

    #[test]
    fn mat_vec_matches_gimel_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = random_mat(&mut rng, 6, 4);
            let x = random_vec(&mut rng, 4);
            let direct = mat_vec(&a, &x).unwrap().to_real();
            let via = a.gimel().mul_vec(&x.to_real()).unwrap();
            for (p, q) in direct.iter().zip(&via) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mat_vec_dimension_mismatch() {
        let a = OctMatrix::zeros(2, 3);
        assert!(matches!(
            mat_vec(&a, &OctVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norm_matches_real_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_vec(&mut rng, 9);
        assert!((x.norm() - norm(&x.to_real())).abs() < 1e-14);
        assert_eq!(OctVector::from_real(&x.to_real()).unwrap(), x);
        assert!(OctVector::from_real(&[0.0; 7]).is_err());
    }

    #[test]
    fn herm_inner_cases() {
        let e = OctVector::basis(3, 1);
        assert_eq!(herm_inner(&e, &e).unwrap(), Octonion::ONE);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let x = random_vec(&mut rng, 1);
            let z = random_oct(&mut rng).sign_unit().unwrap();
            let h = herm_inner(&x, &x.right_mul(&z)).unwrap();
            assert!((h.norm() - x.norm_sqr()).abs() < 1e-12);

            let x = random_vec(&mut rng, 4);
            let y = random_vec(&mut rng, 4);
            let xy = herm_inner(&x, &y).unwrap();
            let yx = herm_inner(&y, &x).unwrap();
            assert!((xy - yx.conj()).norm() < 1e-12);
            let xx = herm_inner(&x, &x).unwrap();
            assert!((xx.re() - x.norm_sqr()).abs() < 1e-12 && xx.im().norm() < 1e-12);
        }
    }

    #[test]
    fn stacked_gimel_gram_is_scaled_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_vec(&mut rng, 4);
        let g = x.gimel();
        let gram = g.transpose().matmul(&g).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let expect = if r == c { x.norm_sqr() } else { 0.0 };
                assert!((gram[(r, c)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_matrix_cases() {
        let a = OctMatrix::from_rows(1, 3, vec![Octonion::ONE, Octonion::ZERO, Octonion::ZERO]).unwrap();
        let y = accumulate_spectral_matrix(&[1.0], &a, Exec::Sequential).unwrap();
        let mut e11 = OctMatrix::zeros(3, 3);
        e11[(0, 0)] = Octonion::ONE;
        assert_eq!(y, e11);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_mat(&mut rng, 30, 5);
        let zero = accumulate_spectral_matrix(&[0.0; 30], &a, Exec::Sequential).unwrap();
        assert_eq!(zero, OctMatrix::zeros(5, 5));

        let yv: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..2.0)).collect();
        let s = accumulate_spectral_matrix(&yv, &a, Exec::Parallel).unwrap();
        assert!(s.hermitian_defect() < 1e-12);
        for i in 0..5 {
            assert_eq!(s[(i, i)].im(), Octonion::ZERO);
        }
        assert_eq!(s, accumulate_spectral_matrix(&yv, &a, Exec::Sequential).unwrap());
        assert!(accumulate_spectral_matrix(&yv[..29], &a, Exec::Sequential).is_err());
    }

    #[test]
    fn power_method_scaled_identity() {
        let mut y = OctMatrix::identity(2);
        for i in 0..2 {
            y[(i, i)] = Octonion::real(3.0);
        }
        let (w, lambda) = power_leading_eigvec(&y, DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL).unwrap();
        assert!((lambda - 3.0).abs() < 1e-12);
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_method_diagonal() {
        let mut y = OctMatrix::zeros(2, 2);
        y[(0, 0)] = Octonion::real(2.0);
        y[(1, 1)] = Octonion::real(1.0);
        let (w, lambda) = power_leading_eigvec(&y, DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL).unwrap();
        assert!((lambda - 2.0).abs() < 1e-9);
        assert!(w[1].norm() < 1e-4);
        assert!((w[0].norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn power_method_zero_matrix() {
        assert!(matches!(
            power_leading_eigvec(&OctMatrix::zeros(3, 3), 10, 1e-10),
            Err(Error::NoDominantEigenvector)
        ));
    }
}
