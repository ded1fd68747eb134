//! The maps `tau_{n,k}` and their Hadamard-subtracted variants.
//!
//! Basis indices run over `0..n` and every shift is taken mod `n`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{vec_norm, CMatrix, HermitianMatrix};

/// Tolerance on `sum |alpha_r|^2 = 1` and on `||v|| = 1`.
pub const NORM_TOL: f64 = 1e-12;

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One optimised map `tau_{n,k} - lambda * (P_v o .)`.
///
/// `d = gcd(n, k)` is derived, never supplied; the subtraction vector is
/// `v = sum_r coeffs[r-1] |v_r>` for `r = 1..d-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpecRepr", into = "MapSpecRepr")]
pub struct MapSpec {
    n: usize,
    k: usize,
    lambda: f64,
    coeffs: Vec<Complex64>,
    d: usize,
    v: Vec<Complex64>,
}

impl MapSpec {
    pub fn new(n: usize, k: usize, lambda: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        check_nk(n, k)?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let d = gcd(n, k);
        if d == 1 {
            if !coeffs.is_empty() {
                return Err(invalid("gcd(n, k) = 1 admits no subtraction coefficients"));
            }
            if lambda != 0.0 {
                return Err(invalid("gcd(n, k) = 1 requires lambda = 0"));
            }
            return Ok(Self {
                n,
                k,
                lambda,
                coeffs,
                d,
                v: Vec::new(),
            });
        }
        let v = build_v(n, d, &coeffs)?;
        Ok(Self {
            n,
            k,
            lambda,
            coeffs,
            d,
            v,
        })
    }

    /// The unsubtracted map `tau_{n,k}`; coefficients default to `(1, 0, ..)`.
    pub fn unsubtracted(n: usize, k: usize) -> Result<Self> {
        check_nk(n, k)?;
        let d = gcd(n, k);
        let coeffs = default_coeffs(d);
        Self::new(n, k, 0.0, coeffs)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if self.d == 1 && lambda != 0.0 {
            return Err(invalid("gcd(n, k) = 1 requires lambda = 0"));
        }
        Ok(Self {
            lambda,
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn gcd(&self) -> usize {
        self.d
    }

    /// Unit subtraction vector; empty when `gcd(n, k) = 1`.
    pub fn v(&self) -> &[Complex64] {
        &self.v
    }
}

/// `(1, 0, ..., 0)` of length `d - 1` (empty for `d = 1`).
pub fn default_coeffs(d: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); d.saturating_sub(1)];
    if let Some(first) = c.first_mut() {
        *first = Complex64::new(1.0, 0.0);
    }
    c
}

/// Coefficients selecting `v_{d/2}`, whose entries are `(-1)^j / sqrt(n)`.
/// Only defined for even `d`.
pub fn alternating_coeffs(d: usize) -> Option<Vec<Complex64>> {
    if d < 2 || d % 2 != 0 {
        return None;
    }
    let mut c = vec![Complex64::new(0.0, 0.0); d - 1];
    c[d / 2 - 1] = Complex64::new(1.0, 0.0);
    Some(c)
}

#[derive(Serialize, Deserialize)]
struct MapSpecRepr {
    n: usize,
    k: usize,
    lambda: f64,
    /// `[re, im]` pairs.
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<MapSpecRepr> for MapSpec {
    type Error = Error;

    fn try_from(r: MapSpecRepr) -> Result<Self> {
        let coeffs = r.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        MapSpec::new(r.n, r.k, r.lambda, coeffs)
    }
}

impl From<MapSpec> for MapSpecRepr {
    fn from(s: MapSpec) -> Self {
        Self {
            n: s.n,
            k: s.k,
            lambda: s.lambda,
            coeffs: s.coeffs.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("n must be >= 2, got {n}")));
    }
    if k < 1 || k >= n {
        return Err(invalid(format!("k must satisfy 1 <= k <= n-1, got n={n}, k={k}")));
    }
    Ok(())
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Keeps the diagonal of `x`, zeroes the rest.
pub fn eps_project(x: &CMatrix) -> CMatrix {
    CMatrix::from_fn(x.dim(), |i, j| if i == j { x[(i, i)] } else { Complex64::new(0.0, 0.0) })
}

/// Cyclic shift with `S e_i = e_{(i+1) mod n}`.
pub fn shift_matrix(n: usize) -> Result<CMatrix> {
    if n < 2 {
        return Err(invalid(format!("shift matrix needs n >= 2, got {n}")));
    }
    Ok(CMatrix::from_fn(n, |r, c| {
        if r == (c + 1) % n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `D_i = (n-k) X_ii + X_{i+1,i+1} + ... + X_{i+k,i+k}` (indices mod n).
pub fn diag_d(n: usize, k: usize, x: &HermitianMatrix) -> Result<Vec<f64>> {
    check_nk(n, k)?;
    check_dim(n, x.dim())?;
    Ok(diag_d_from_weights(n, k, &x.real_diagonal()))
}

/// `D_i` computed from the diagonal of `X` alone.
pub(crate) fn diag_d_from_weights(n: usize, k: usize, diag: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (n - k) as f64 * diag[i] + (1..=k).map(|m| diag[(i + m) % n]).sum::<f64>())
        .collect()
}

/// `tau_{n,k}(X) = Diag(D(X)) - X`.
pub fn tau_apply(n: usize, k: usize, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = diag_d(n, k, x)?;
    let mut out = x.matrix().scale(Complex64::new(-1.0, 0.0));
    for (i, di) in d.iter().enumerate() {
        out[(i, i)] += di;
    }
    HermitianMatrix::new(out)
}

/// `sum_r coeffs[r-1] |v_r>` with `(v_r)_j = omega^{(n/d) r j} / sqrt(n)`.
pub fn build_v(n: usize, d: usize, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(invalid(format!("subtraction vectors need d >= 2, got {d}")));
    }
    if n % d != 0 {
        return Err(invalid(format!("d = {d} does not divide n = {n}")));
    }
    if coeffs.len() != d - 1 {
        return Err(invalid(format!(
            "expected {} coefficients for d = {d}, got {}",
            d - 1,
            coeffs.len()
        )));
    }
    let norm_sq: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
    if !((norm_sq - 1.0).abs() <= NORM_TOL) {
        return Err(invalid(format!("coefficients must have unit norm, got sum |a|^2 = {norm_sq}")));
    }
    let step = n / d;
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    Ok((0..n)
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .map(|(idx, &a)| {
                    let r = idx + 1;
                    // Reduce the exponent mod n before forming the angle.
                    let e = (step * r * j) % n;
                    a * Complex64::from_polar(inv_sqrt_n, TAU * e as f64 / n as f64)
                })
                .sum()
        })
        .collect())
}

/// The basis vector `|v_r>` alone.
pub fn basis_v(n: usize, d: usize, r: usize) -> Result<Vec<Complex64>> {
    if r == 0 || r >= d {
        return Err(invalid(format!("r must be in 1..{d}, got {r}")));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d - 1];
    coeffs[r - 1] = Complex64::new(1.0, 0.0);
    build_v(n, d, &coeffs)
}

/// `(P_v o X)_{ij} = v_i conj(v_j) X_ij`.
pub fn hadamard_project(v: &[Complex64], x: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dim(x.dim(), v.len())?;
    let norm = vec_norm(v);
    if !((norm - 1.0).abs() <= NORM_TOL) {
        return Err(invalid(format!("projector vector must be a unit vector, got norm {norm}")));
    }
    let m = CMatrix::from_fn(v.len(), |i, j| v[i] * v[j].conj() * x[(i, j)]);
    HermitianMatrix::new(m)
}

/// `tau_{n,k}(X) - lambda (P_v o X)`; for `lambda = 0` this is `tau_apply` exactly.
pub fn optimized_apply(spec: &MapSpec, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let tau = tau_apply(spec.n, spec.k, x)?;
    if spec.lambda == 0.0 {
        return Ok(tau);
    }
    let h = hadamard_project(&spec.v, x)?;
    Ok(tau.combine(1.0, &h, -spec.lambda))
}

/// Writes `optimized_apply(spec, |x><x| / ||x||^2)` for real `x` into `out`
/// (row-major). The hot path of the positivity search.
pub(crate) fn optimized_apply_real_rank_one(spec: &MapSpec, x: &[f64], out: &mut [Complex64]) {
    let n = spec.n;
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(out.len(), n * n);
    let norm_sq: f64 = x.iter().map(|a| a * a).sum();
    let inv = 1.0 / norm_sq;
    let diag: Vec<f64> = x.iter().map(|a| a * a * inv).collect();
    let d = diag_d_from_weights(n, spec.k, &diag);
    let lam = spec.lambda;
    for i in 0..n {
        for j in 0..n {
            let xij = x[i] * x[j] * inv;
            let mut z = Complex64::new(-xij, 0.0);
            if lam != 0.0 {
                z -= spec.v[i] * spec.v[j].conj() * (lam * xij);
            }
            if i == j {
                z = Complex64::new(z.re + d[i], 0.0);
            }
            out[i * n + j] = z;
        }
    }
}
