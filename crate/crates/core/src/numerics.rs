//! Small dense complex linear algebra.
//!
//! Everything here works on dimensions of a handful of antennas, so the
//! routines favour simplicity and determinism over asymptotic speed: a
//! cyclic Jacobi eigensolver for Hermitian matrices, a Cholesky solve for
//! `(I + M) x = b`, and a few vector helpers.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest matrix dimension accepted by [`hermitian_eig`].
pub const MAX_EIG_DIM: usize = 16;

/// Tolerance used when checking Hermitian symmetry at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 64;

/// A complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec(Vec<Complex64>);

impl CVec {
    pub fn new(entries: Vec<Complex64>) -> Self {
        CVec(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        CVec(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// The `i`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVec(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product `self† other`.
    pub fn dot(&self, other: &CVec) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self† other|²`.
    pub fn abs_dot_sqr(&self, other: &CVec) -> f64 {
        self.dot(other).norm_sqr()
    }

    pub fn scale(&self, s: Complex64) -> CVec {
        CVec(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> CVec {
        CVec(self.0.iter().map(|z| z * s).collect())
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVec> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(self.scale_real(1.0 / n))
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    /// Rotates the global phase so that the first entry with magnitude above
    /// `1e-12` is real and positive.
    pub fn with_phase_convention(mut self) -> CVec {
        fix_phase(&mut self.0);
        self
    }
}

impl Index<usize> for CVec {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for CVec {
    fn from(v: Vec<Complex64>) -> Self {
        CVec(v)
    }
}

pub(crate) fn fix_phase(v: &mut [Complex64]) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let rot = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMat {
    /// Builds a Hermitian matrix from row-major entries. The input must be
    /// Hermitian within `1e-12 · max(1, ‖M‖_F)`; it is then symmetrized.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let frob = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut deviation = 0.0_f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                deviation = deviation.max(d);
            }
        }
        if deviation > HERMITIAN_TOL * frob.max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        let mut m = HermitianMat { dim, data: entries };
        m.symmetrize();
        Ok(m)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMat {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `Σ scale · v v†` over the given vectors.
    pub fn sum_of_outer(dim: usize, scale: f64, vectors: &[CVec]) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for v in vectors {
            m.add_outer(scale, v)?;
        }
        Ok(m)
    }

    /// `self += scale · v v†`.
    pub fn add_outer(&mut self, scale: f64, v: &CVec) -> Result<()> {
        v.check_dim(self.dim)?;
        let n = self.dim;
        let x = v.as_slice();
        for i in 0..n {
            let xi = x[i] * scale;
            for j in 0..n {
                self.data[i * n + j] += xi * x[j].conj();
            }
        }
        // keep the diagonal exactly real
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn scaled(&self, s: f64) -> HermitianMat {
        HermitianMat {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `I + self`.
    pub fn plus_identity(&self) -> HermitianMat {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += 1.0;
        }
        m
    }

    pub fn mul_vec(&self, v: &CVec) -> Result<CVec> {
        v.check_dim(self.dim)?;
        let n = self.dim;
        let x = v.as_slice();
        let out = (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * x[j]).sum())
            .collect();
        Ok(CVec(out))
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }
}

/// Eigenvalues sorted in descending order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<CVec>,
}

impl EigenDecomposition {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty decomposition")
    }

    pub fn min_eigenvector(&self) -> &CVec {
        self.eigenvectors.last().expect("non-empty decomposition")
    }

    pub fn max_eigenvector(&self) -> &CVec {
        &self.eigenvectors[0]
    }
}

/// Full eigendecomposition of a small Hermitian matrix by cyclic Jacobi
/// rotations.
///
/// Eigenvalues come back in descending order. Each eigenvector has its first
/// entry above `1e-12` in magnitude rotated to be real and positive, so the
/// output is a deterministic function of the input.
pub fn hermitian_eig(m: &HermitianMat) -> Result<EigenDecomposition> {
    let n = m.dim;
    if n == 0 || n > MAX_EIG_DIM {
        return Err(Error::Domain(format!(
            "eigensolver supports dimensions 1..={MAX_EIG_DIM}, got {n}"
        )));
    }
    let mut a = m.data.clone();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let frob_sq: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let stop = (f64::EPSILON * f64::EPSILON) * frob_sq;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off <= stop || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let eigenvalues = order.iter().map(|&i| a[i * n + i].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| {
            let mut x: Vec<Complex64> = (0..n).map(|row| v[row * n + col]).collect();
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in x.iter_mut() {
                *z /= norm;
            }
            fix_phase(&mut x);
            CVec(x)
        })
        .collect();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Annihilates `a[p][q]` with the unitary rotation
/// `G = [[c, s·e], [-s·ē, c]]` on rows/columns `p, q`, where `e` is the phase
/// of `a[p][q]`.
fn jacobi_rotate(a: &mut [Complex64], v: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // skip rotations that cannot change the diagonal at working precision
    if mag <= f64::EPSILON * 0.5 * (app.abs() + aqq.abs()) * f64::EPSILON {
        a[p * n + q] = Complex64::new(0.0, 0.0);
        a[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let gqp = -phase.conj() * s; // G[q][p]
    let gpq = phase * s; // G[p][q]

    // A <- A G (columns p and q)
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c + akq * gqp;
        a[k * n + q] = akp * gpq + akq * c;
    }
    // A <- G† A (rows p and q)
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c + aqk * gqp.conj();
        a[q * n + k] = apk * gpq.conj() + aqk * c;
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
    // V <- V G
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c + vkq * gqp;
        v[k * n + q] = vkp * gpq + vkq * c;
    }
}

/// Solves `(I + M) x = b` for positive semidefinite `M` by Cholesky
/// factorization of `I + M`.
pub fn solve_identity_plus(m: &HermitianMat, b: &CVec) -> Result<CVec> {
    let n = m.dim;
    b.check_dim(n)?;
    // lower-triangular factor, row-major
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut d = 1.0 + m.data[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::Domain(
                "I + M is not positive definite".to_string(),
            ));
        }
        let d = d.sqrt();
        l[j * n + j] = Complex64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = m.data[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    // L y = b
    let mut y = b.as_slice().to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    // L† x = y
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i].conj() * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    Ok(CVec(y))
}

/// `v† M v` as a real number.
pub fn quadratic_form(v: &CVec, m: &HermitianMat) -> Result<f64> {
    let mv = m.mul_vec(v)?;
    let q = v.dot(&mv);
    debug_assert!(
        q.im.abs() <= 1e-9 * m.frobenius_norm().max(1.0) * v.norm_sqr().max(1.0),
        "quadratic form has imaginary part {}",
        q.im
    );
    Ok(q.re)
}

/// Gaussian elimination with partial pivoting on a dense real `n × n`
/// system stored row-major. Returns `None` when the matrix is numerically
/// singular.
pub(crate) fn solve_real(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= a[row * n + k] * b[k];
        }
        b[row] = s / a[row * n + row];
    }
    Some(b)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in
/// `C^dim`, by Gram-Schmidt against the standard basis.
pub fn orthogonal_complement(dim: usize, vectors: &[CVec]) -> Vec<CVec> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let push = |basis: &mut Vec<Vec<Complex64>>, v: &[Complex64]| -> bool {
        let mut w = v.to_vec();
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for q in basis.iter() {
                let proj: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-10 {
            for z in w.iter_mut() {
                *z /= norm;
            }
            basis.push(w);
            true
        } else {
            false
        }
    };
    for v in vectors {
        push(&mut basis, v.as_slice());
    }
    let spanned = basis.len();
    for i in 0..dim {
        if basis.len() == dim {
            break;
        }
        push(&mut basis, CVec::basis(dim, i).as_slice());
    }
    basis.split_off(spanned).into_iter().map(CVec).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(m: &HermitianMat, eig: &EigenDecomposition) -> f64 {
        eig.eigenvalues
            .iter()
            .zip(&eig.eigenvectors)
            .map(|(&l, v)| {
                let mv = m.mul_vec(v).unwrap();
                mv.as_slice()
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| (a - b * l).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_eigenpairs() {
        let eig = hermitian_eig(&HermitianMat::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0]);
        let v0 = &eig.eigenvectors[0];
        let v1 = &eig.eigenvectors[1];
        assert!(v0.dot(v1).norm() < 1e-15);
        for v in &eig.eigenvectors {
            let first = v.as_slice().iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(first.im == 0.0 && first.re > 0.0);
        }
    }

    #[test]
    fn diagonal_eigenpairs() {
        let eig = hermitian_eig(&HermitianMat::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(eig.eigenvectors[0], CVec::basis(2, 1));
        assert_eq!(eig.eigenvectors[1], CVec::basis(2, 0));
    }

    #[test]
    fn rank_one_update_of_identity() {
        // ‖g‖² = 2, P = 10: eigenvalues (21, 1, 1), top eigenvector ∝ g
        let g = CVec::new(vec![c(1.0, 0.0), c(0.0, 0.5), c(-0.5, 0.5), c(0.0, -0.5)]);
        assert!((g.norm_sqr() - 2.0).abs() < 1e-15);
        let mut m = HermitianMat::identity(4);
        m.add_outer(10.0, &g).unwrap();
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.eigenvalues[0] - 21.0).abs() < 1e-12);
        for &l in &eig.eigenvalues[1..] {
            assert!((l - 1.0).abs() < 1e-12);
        }
        assert!(residual(&m, &eig) < 1e-9 * m.frobenius_norm());
        let top = eig.max_eigenvector();
        assert!((top.abs_dot_sqr(&g) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1
        let m = HermitianMat::new(2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)])
            .unwrap();
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(residual(&m, &eig) < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianMat::new(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(err, Err(Error::NotHermitian { .. })));
        let err = HermitianMat::new(2, vec![c(1.0, 0.0); 3]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_oversized_eigenproblem() {
        assert!(hermitian_eig(&HermitianMat::identity(17)).is_err());
    }

    #[test]
    fn solve_with_zero_matrix_is_identity() {
        let b = CVec::new(vec![c(1.0, -2.0), c(0.5, 3.0)]);
        let x = solve_identity_plus(&HermitianMat::zeros(2), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn solve_diagonal() {
        let x = solve_identity_plus(&HermitianMat::diag(&[1.0, 3.0]), &CVec::from_real(&[2.0, 8.0]))
            .unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let err = solve_identity_plus(&HermitianMat::zeros(3), &CVec::zeros(2));
        assert_eq!(err, Err(Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn quadratic_form_basics() {
        let v = CVec::new(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        assert!((quadratic_form(&v, &HermitianMat::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        let e1 = CVec::basis(2, 0);
        assert_eq!(quadratic_form(&e1, &HermitianMat::diag(&[5.0, 2.0])).unwrap(), 5.0);
        assert!(quadratic_form(&e1, &HermitianMat::identity(3)).is_err());
    }

    #[test]
    fn real_solver() {
        let x = solve_real(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve_real(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0], 2).is_none());
    }

    #[test]
    fn complement_is_orthogonal() {
        let g = vec![
            CVec::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]),
            CVec::new(vec![c(0.0, 0.0), c(1.0, 1.0), c(2.0, 0.0)]),
        ];
        let comp = orthogonal_complement(3, &g);
        assert_eq!(comp.len(), 1);
        for v in &g {
            assert!(comp[0].dot(v).norm() < 1e-14);
        }
        assert!((comp[0].norm_sqr() - 1.0).abs() < 1e-14);
        // repeated direction spans one dimension only
        let same = vec![g[0].clone(), g[0].scale_real(2.0)];
        assert_eq!(orthogonal_complement(3, &same).len(), 2);
    }
}
