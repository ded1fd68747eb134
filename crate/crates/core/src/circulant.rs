//! The `(n/2) x (n/2)` circulant matrices `A`, `B`, `C` of the gcd-2 reduction
//! and the closed-form spectrum of `(C + C^T)/2`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{herm_eigenvalues, CMatrix, HermitianMatrix};

/// Small dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "rows must form a square matrix");
        Self {
            dim,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.dim + j]
    }

    fn add_at(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.dim + j] += v;
    }

    /// `P^power` of the cyclic permutation `P = sum_i |e_i><e_{i+1}|`.
    pub fn cyclic_power(dim: usize, power: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.add_at(i, (i + power) % dim, 1);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.data[j * self.dim + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.data[i * n + j] as f64 * y[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Exact `x^T M y` over the integers.
    pub fn bilinear_int(&self, x: &[i64], y: &[i64]) -> i64 {
        let n = self.dim;
        (0..n)
            .map(|i| x[i] * (0..n).map(|j| self.data[i * n + j] * y[j]).sum::<i64>())
            .sum()
    }

    /// `(M + M^T)/2` as a Hermitian matrix.
    pub fn symmetrized(&self) -> HermitianMatrix {
        let m = CMatrix::from_fn(self.dim, |i, j| {
            Complex64::new(0.5 * (self.get(i, j) + self.get(j, i)) as f64, 0.0)
        });
        HermitianMatrix::new(m).expect("symmetrised real matrix is Hermitian")
    }
}

/// Which of the two off-diagonal blocks a bilinear form uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    B,
    C,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Block::B => f.write_str("B"),
            Block::C => f.write_str("C"),
        }
    }
}

/// `A = (n-k) I + sum_{i=1}^{k/2} P^i`, `B = sum_{i=0}^{k/2-1} P^i`,
/// `C = sum_{i=1}^{k/2} P^i`, all of size `n/2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirculantTriple {
    pub half: usize,
    pub a: IntMatrix,
    pub b: IntMatrix,
    pub c: IntMatrix,
}

impl CirculantTriple {
    pub fn block(&self, which: Block) -> &IntMatrix {
        match which {
            Block::B => &self.b,
            Block::C => &self.c,
        }
    }
}

/// Requires `n`, `k` even and `2 <= k <= n-2`.
pub fn check_even_pair(n: usize, k: usize) -> Result<()> {
    if n % 2 != 0 || k % 2 != 0 {
        return Err(invalid(format!("n and k must both be even, got n={n}, k={k}")));
    }
    if k < 2 || k + 2 > n {
        return Err(invalid(format!("need 2 <= k <= n-2, got n={n}, k={k}")));
    }
    Ok(())
}

pub fn build_abc(n: usize, k: usize) -> Result<CirculantTriple> {
    check_even_pair(n, k)?;
    let half = n / 2;
    let h = k / 2;
    let sum = |range: std::ops::RangeInclusive<usize>| {
        range.fold(IntMatrix::zeros(half), |acc, p| acc.add(&IntMatrix::cyclic_power(half, p)))
    };
    let c = sum(1..=h);
    let b = sum(0..=h - 1);
    let mut a = c.clone();
    for i in 0..half {
        a.add_at(i, i, (n - k) as i64);
    }
    Ok(CirculantTriple { half, a, b, c })
}

/// Closed-form eigenvalues of `(C + C^T)/2` with their extremes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub k: usize,
    /// `c^(0) .. c^(n/2 - 1)`.
    pub values: Vec<f64>,
    /// Minimum over `j >= 1`.
    pub c_min: f64,
    /// Maximum over `j >= 1`; `c^(0) = k/2` is excluded.
    pub c_max: f64,
    /// Outcome of [`check_fact2_bounds`]; `None` when `k < 4`.
    pub bounds_ok: Option<bool>,
}

/// `c^(j) = (sin(2 pi (k+1) j / n) / sin(2 pi j / n) - 1) / 2` for `j >= 1`, `c^(0) = k/2`.
pub fn c_value(n: usize, k: usize, j: usize) -> f64 {
    if j == 0 {
        return k as f64 / 2.0;
    }
    let x = TAU * j as f64 / n as f64;
    let denom = x.sin();
    assert!(
        x > 0.0 && x < PI,
        "angle 2*pi*j/n must lie strictly inside (0, pi), got j={j}, n={n}"
    );
    0.5 * ((x * (k + 1) as f64).sin() / denom - 1.0)
}

pub fn c_spectrum(n: usize, k: usize) -> Result<SpectrumReport> {
    check_even_pair(n, k)?;
    let values: Vec<f64> = (0..n / 2).map(|j| c_value(n, k, j)).collect();
    let c_min = values[1..].iter().copied().fold(f64::INFINITY, f64::min);
    let c_max = values[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut report = SpectrumReport {
        n,
        k,
        values,
        c_min,
        c_max,
        bounds_ok: None,
    };
    report.bounds_ok = check_fact2_bounds(&report).as_option();
    Ok(report)
}

/// Eigenvalues of `(C + C^T)/2` from the dense solver, ascending.
pub fn dense_c_eigenvalues(n: usize, k: usize) -> Result<Vec<f64>> {
    let abc = build_abc(n, k)?;
    Ok(herm_eigenvalues(&abc.c.symmetrized()))
}

/// `mu = (5/2 * sqrt((5 - sqrt 5)/2))^-1`, about 0.34026.
pub fn mu_constant() -> f64 {
    let s5 = 5f64.sqrt();
    1.0 / (2.5 * ((5.0 - s5) / 2.0).sqrt())
}

/// `-(mu (k+1) + 1)/2`, the lower bound on `c_min` for `k >= 4`.
pub fn c_min_lower_bound(k: usize) -> f64 {
    -0.5 * (mu_constant() * (k + 1) as f64 + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundCheck {
    Holds,
    Violated,
    /// The bounds are only claimed for `k >= 4`.
    NotApplicable,
}

impl BoundCheck {
    pub fn as_option(self) -> Option<bool> {
        match self {
            BoundCheck::Holds => Some(true),
            BoundCheck::Violated => Some(false),
            BoundCheck::NotApplicable => None,
        }
    }
}

/// `c_max <= k/2` and `c_min >= -(mu (k+1) + 1)/2`.
pub fn check_fact2_bounds(report: &SpectrumReport) -> BoundCheck {
    if report.k < 4 {
        return BoundCheck::NotApplicable;
    }
    let ok = report.c_max <= report.k as f64 / 2.0 && report.c_min >= c_min_lower_bound(report.k);
    if ok {
        BoundCheck::Holds
    } else {
        BoundCheck::Violated
    }
}
