//! Dense complex linear algebra for small matrices.
//!
//! Everything here is sized for dimensions of a few dozen: eigenvalues come
//! from cyclic Jacobi sweeps and determinants from LU with partial pivoting.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Maximum allowed `|H_ij - conj(H_ji)|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; the length must be a perfect square.
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(invalid(format!(
                "{} entries do not form a non-empty square matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[l * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matvec dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a * b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, rhs.dim, "entrywise op dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(self.dim), |acc, _| acc.matmul(self))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|self_ij - other_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self[(i, j)] == ZERO))
    }

    fn hermitian_mismatch(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// A complex matrix known to equal its adjoint, with an exactly real diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates `m` against [`HERMITIAN_TOL`] and replaces it by `(m + m†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        let mismatch = m.hermitian_mismatch();
        if !(mismatch <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(mismatch));
        }
        let n = m.dim;
        let mut h = m;
        for i in 0..n {
            h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
                h[(i, j)] = avg;
                h[(j, i)] = avg.conj();
            }
        }
        Ok(Self(h))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(CMatrix::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.real_diagonal().iter().sum()
    }

    /// Real linear combination `a*self + b*other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self(
            self.0
                .zip_with(&other.0, |x, y| x * a + y * b),
        )
    }

    /// Unitary conjugation `U self U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.dim(),
            });
        }
        Self::new(u.matmul(&self.0).matmul(&u.adjoint()))
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `max_j |H v_j - λ_j v_j|`.
    pub fn residual(&self, h: &HermitianMatrix) -> f64 {
        let n = h.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            let v: Vec<Complex64> = (0..n).map(|i| self.vectors[(i, j)]).collect();
            let hv = h.matrix().matvec(&v);
            let r = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * self.values[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Cyclic complex Jacobi diagonalisation.
pub fn herm_eigen(h: &HermitianMatrix) -> HermitianEigen {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = (f64::EPSILON * scale).powi(2);

    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [-s conj(phase), c conj(phase)]] on (p, q); A <- G† A G.
                let gp_q = Complex64::new(-s, 0.0) * phase.conj();
                let gq_q = Complex64::new(c, 0.0) * phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * gp_q;
                    a[(k, q)] = akp * s + akq * gq_q;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * gp_q;
                    v[(k, q)] = vkp * s + vkq * gq_q;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * gp_q.conj();
                    a[(q, k)] = apk * s + aqk * gq_q.conj();
                }
                a[(p, p)] = Complex64::new(app - t * g, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * g, 0.0);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn herm_eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    herm_eigen(h).values
}

/// Determinant of a general complex matrix via LU with partial pivoting.
pub fn det_complex(m: &CMatrix) -> Complex64 {
    let n = m.dim();
    let mut lu = m.data.clone();
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[i * n + col].norm().total_cmp(&lu[j * n + col].norm()))
            .unwrap();
        let p = lu[pivot * n + col];
        if p == ZERO {
            return ZERO;
        }
        if pivot != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        det *= p;
        let inv = ONE / p;
        for i in (col + 1)..n {
            let f = lu[i * n + col] * inv;
            if f == ZERO {
                continue;
            }
            for j in (col + 1)..n {
                let u = lu[col * n + j];
                lu[i * n + j] -= f * u;
            }
        }
    }
    det
}

/// Real determinant of a Hermitian matrix.
///
/// The LU determinant is complex in floating point; its imaginary part must
/// be negligible next to `|det|` and the Hadamard bound of the rows.
pub fn det_herm(h: &HermitianMatrix) -> Result<f64> {
    let det = det_complex(h.matrix());
    let n = h.dim();
    let hadamard: f64 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| h[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .product();
    let allowed = 1e-9 * det.norm() + 64.0 * f64::EPSILON * hadamard;
    if det.im.abs() > allowed {
        return Err(Error::NonRealDeterminant {
            imag: det.im,
            abs: det.norm(),
        });
    }
    Ok(det.re)
}

/// Rank-one projector `|psi><psi|` (unnormalised).
pub fn outer(psi: &[Complex64]) -> Result<HermitianMatrix> {
    if psi.is_empty() {
        return Err(invalid("outer product of an empty vector"));
    }
    let m = CMatrix::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj());
    HermitianMatrix::new(m)
}

/// Embeds a real vector into complex space.
pub fn complexify(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&r| Complex64::new(r, 0.0)).collect()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
