//! `lambda_max` over the Bloch sphere of subtraction vectors for `gcd(n, k) = 3`.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix};
use crate::map_kernel::{build_v, gcd, optimized_apply, shift_matrix, MapSpec};
use crate::positivity::{lambda_max, SearchSettings};

/// `alpha = cos(theta/2)`, `beta = e^{i phi} sin(theta/2)`.
pub fn bloch_coeffs(phi: f64, theta: f64) -> (Complex64, Complex64) {
    let half = 0.5 * theta;
    (
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), phi),
    )
}

/// `e^{2 pi i / 3}`.
pub fn omega3() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda_max: f64,
    pub converged: bool,
}

/// Row-major `P x T` grid (`phi` outer, `theta` inner). `None` marks a
/// point that has not been computed yet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub n: usize,
    pub k: usize,
    pub phi_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub lambda_grid: Vec<Option<GridPoint>>,
    pub settings: SearchSettings,
}

impl ScanGrid {
    /// `phi_i = -pi + 2 pi i / P` (periodic, no duplicated endpoint) and
    /// `theta_j = pi j / (T - 1)`.
    pub fn new(n: usize, k: usize, phi_res: usize, theta_res: usize, settings: SearchSettings) -> Result<Self> {
        if gcd(n, k) != 3 || k >= n {
            return Err(invalid(format!("Bloch scans need gcd(n, k) = 3, got n={n}, k={k}")));
        }
        if phi_res < 2 || theta_res < 2 {
            return Err(invalid(format!(
                "grid must be at least 2x2, got {phi_res}x{theta_res}"
            )));
        }
        settings.validate()?;
        let phi_values = (0..phi_res)
            .map(|i| -PI + 2.0 * PI * i as f64 / phi_res as f64)
            .collect();
        let theta_values = (0..theta_res)
            .map(|j| PI * j as f64 / (theta_res - 1) as f64)
            .collect();
        Ok(Self {
            n,
            k,
            phi_values,
            theta_values,
            lambda_grid: vec![None; phi_res * theta_res],
            settings,
        })
    }

    pub fn phi_res(&self) -> usize {
        self.phi_values.len()
    }

    pub fn theta_res(&self) -> usize {
        self.theta_values.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.theta_res() + j
    }

    pub fn get(&self, i: usize, j: usize) -> Option<GridPoint> {
        self.lambda_grid[self.index(i, j)]
    }

    pub fn pending(&self) -> usize {
        self.lambda_grid.iter().filter(|p| p.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.pending() == 0
    }

    /// Computed points whose `lambda_max` search did not converge.
    pub fn nonconverged(&self) -> Vec<(usize, usize)> {
        let t = self.theta_res();
        self.lambda_grid
            .iter()
            .enumerate()
            .filter_map(|(idx, p)| match p {
                Some(p) if !p.converged => Some((idx / t, idx % t)),
                _ => None,
            })
            .collect()
    }

    fn check_shape(&self) -> Result<()> {
        if self.lambda_grid.len() != self.phi_res() * self.theta_res() {
            return Err(Error::InvalidState(format!(
                "grid holds {} values for a {}x{} layout",
                self.lambda_grid.len(),
                self.phi_res(),
                self.theta_res()
            )));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let grid: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        grid.check_shape()?;
        Ok(grid)
    }

    /// Writes to a sibling temporary file and renames it over `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = tmp_path(path);
        {
            let mut f = fs::File::create(&tmp)?;
            serde_json::to_writer(&mut f, self)?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Loads `path` when it exists and describes the same scan, otherwise
    /// starts a fresh grid.
    pub fn resume_or_new(
        path: &Path,
        n: usize,
        k: usize,
        phi_res: usize,
        theta_res: usize,
        settings: SearchSettings,
    ) -> Result<Self> {
        let fresh = Self::new(n, k, phi_res, theta_res, settings)?;
        if !path.exists() {
            return Ok(fresh);
        }
        let loaded = Self::load(path)?;
        if loaded.n != fresh.n
            || loaded.k != fresh.k
            || loaded.phi_values != fresh.phi_values
            || loaded.theta_values != fresh.theta_values
            || loaded.settings != fresh.settings
        {
            return Err(Error::InvalidState(format!(
                "checkpoint {} belongs to a different scan",
                path.display()
            )));
        }
        Ok(loaded)
    }

    /// CSV with header `phi,theta,lambda_max,converged`, rows in grid order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if !self.is_complete() {
            return Err(Error::InvalidState(format!(
                "{} grid points are still pending",
                self.pending()
            )));
        }
        writeln!(out, "phi,theta,lambda_max,converged")?;
        for (i, phi) in self.phi_values.iter().enumerate() {
            for (j, theta) in self.theta_values.iter().enumerate() {
                let p = self.get(i, j).expect("complete grid");
                writeln!(out, "{phi},{theta},{},{}", p.lambda_max, p.converged)?;
            }
        }
        Ok(())
    }

    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Per-point seed, independent of scheduling.
pub fn point_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut z = seed ^ ((i as u64) << 32 | j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug)]
enum WorkItem {
    /// Whole `theta = 0` or `theta = pi` row; the projector does not depend on `phi` there.
    Pole(usize),
    Point(usize, usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanStats {
    /// Number of `lambda_max` evaluations performed.
    pub evaluated: usize,
    pub remaining: usize,
}

/// Fills pending points of `grid` in place.
///
/// With a checkpoint path the whole grid is rewritten after every finished
/// work item. `limit` caps how many work items run in this call.
pub fn scan(grid: &mut ScanGrid, checkpoint: Option<&Path>, limit: Option<usize>) -> Result<ScanStats> {
    grid.check_shape()?;
    if gcd(grid.n, grid.k) != 3 {
        return Err(invalid(format!("Bloch scans need gcd(n, k) = 3, got n={}, k={}", grid.n, grid.k)));
    }
    let (p, t) = (grid.phi_res(), grid.theta_res());
    let mut items = Vec::new();
    for j in [0, t - 1] {
        if (0..p).any(|i| grid.get(i, j).is_none()) {
            items.push(WorkItem::Pole(j));
        }
    }
    for i in 0..p {
        for j in 1..t - 1 {
            if grid.get(i, j).is_none() {
                items.push(WorkItem::Point(i, j));
            }
        }
    }
    if let Some(limit) = limit {
        items.truncate(limit);
    }
    if items.is_empty() {
        return Ok(ScanStats {
            evaluated: 0,
            remaining: grid.pending(),
        });
    }

    let n = grid.n;
    let k = grid.k;
    let settings = grid.settings.clone();
    let phis = grid.phi_values.clone();
    let thetas = grid.theta_values.clone();
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(WorkItem, Result<GridPoint>)>();

    let writer_result = std::thread::scope(|s| {
        let writer = s.spawn(|| -> Result<usize> {
            let mut done = 0;
            let mut first_err = None;
            for (item, res) in rx {
                let point = match res {
                    Ok(p) => p,
                    Err(e) => {
                        abort.store(true, Ordering::Relaxed);
                        first_err.get_or_insert(e);
                        continue;
                    }
                };
                match item {
                    WorkItem::Pole(j) => {
                        for i in 0..p {
                            let idx = grid.index(i, j);
                            grid.lambda_grid[idx] = Some(point);
                        }
                    }
                    WorkItem::Point(i, j) => {
                        let idx = grid.index(i, j);
                        grid.lambda_grid[idx] = Some(point);
                    }
                }
                if !point.converged {
                    log::warn!("lambda_max did not converge at {item:?}");
                }
                done += 1;
                if let Some(path) = checkpoint {
                    if let Err(e) = grid.save(path) {
                        abort.store(true, Ordering::Relaxed);
                        first_err.get_or_insert(e);
                    }
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(done),
            }
        });

        items.par_iter().for_each_with(tx, |tx, &item| {
            if abort.load(Ordering::Relaxed) {
                return;
            }
            let (i, j) = match item {
                WorkItem::Pole(j) => (0, j),
                WorkItem::Point(i, j) => (i, j),
            };
            let (a, b) = bloch_coeffs(phis[i], thetas[j]);
            let point_settings = SearchSettings {
                seed: point_seed(settings.seed, i, j),
                ..settings.clone()
            };
            let res = lambda_max(n, k, &[a, b], &point_settings).map(|r| GridPoint {
                lambda_max: r.lambda_max,
                converged: r.converged,
            });
            let _ = tx.send((item, res));
        });
        writer.join().expect("checkpoint writer panicked")
    });

    let evaluated = writer_result?;
    Ok(ScanStats {
        evaluated,
        remaining: grid.pending(),
    })
}

/// Block-diagonal matrix of `n/3` copies of the cyclic block
/// `[[0,1,0],[0,0,1],[1,0,0]]`.
pub fn q_matrix(n: usize) -> Result<CMatrix> {
    if n == 0 || n % 3 != 0 {
        return Err(invalid(format!("q_matrix needs 3 | n, got {n}")));
    }
    Ok(CMatrix::from_fn(n, |r, c| {
        let base = r - r % 3;
        if c == base + (r % 3 + 1) % 3 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

fn check_unit_pair(alpha: Complex64, beta: Complex64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("|alpha|^2 + |beta|^2 must be 1, got {norm}")));
    }
    Ok(())
}

/// Euclidean norm of `(alpha v_1 + w beta v_2) - w^{-1} Q (alpha v_1 + beta v_2)`
/// with `w = e^{2 pi i / 3}`.
pub fn verify_rotation_identity(n: usize, alpha: Complex64, beta: Complex64) -> Result<f64> {
    let q = q_matrix(n)?;
    check_unit_pair(alpha, beta)?;
    let w = omega3();
    let lhs = build_v(n, 3, &[alpha, w * beta])?;
    let rhs: Vec<Complex64> = q
        .matvec(&build_v(n, 3, &[alpha, beta])?)
        .into_iter()
        .map(|z| z / w)
        .collect();
    Ok(lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Entrywise max of `Phi_{alpha, w beta}(X) - U Phi_{alpha, beta}(U^dag X U) U^dag`.
pub fn rotated_map_defect(
    n: usize,
    k: usize,
    lambda: f64,
    alpha: Complex64,
    beta: Complex64,
    u: &CMatrix,
    x: &HermitianMatrix,
) -> Result<f64> {
    check_unit_pair(alpha, beta)?;
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.dim(),
        });
    }
    let rotated = MapSpec::new(n, k, lambda, vec![alpha, omega3() * beta])?;
    let base = MapSpec::new(n, k, lambda, vec![alpha, beta])?;
    let lhs = optimized_apply(&rotated, x)?;
    let inner = x.conjugate_by(&u.adjoint())?;
    let rhs = optimized_apply(&base, &inner)?.conjugate_by(u)?;
    Ok(lhs.matrix().max_abs_diff(rhs.matrix()))
}

/// Map-level identity with the block matrix `Q` of [`q_matrix`].
pub fn q_map_defect(n: usize, k: usize, lambda: f64, alpha: Complex64, beta: Complex64, x: &HermitianMatrix) -> Result<f64> {
    rotated_map_defect(n, k, lambda, alpha, beta, &q_matrix(n)?, x)
}

/// Map-level identity with `U = S^T`, the inverse cyclic shift. Shifting
/// multiplies `v_r` by `e^{-2 pi i r / 3}` and commutes with `tau_{n,k}`.
pub fn shift_map_defect(n: usize, k: usize, lambda: f64, alpha: Complex64, beta: Complex64, x: &HermitianMatrix) -> Result<f64> {
    rotated_map_defect(n, k, lambda, alpha, beta, &shift_matrix(n)?.transpose(), x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub observed_min: f64,
    pub observed_max: f64,
    pub range_ok: bool,
    /// `theta = 0`.
    pub pole_value: f64,
    /// `theta = pi`.
    pub south_pole_value: f64,
    /// Nearest grid point to `(phi, theta) = (0, pi/2)`.
    pub equator_value: f64,
    pub symmetry_defect: f64,
    pub nonconverged: usize,
    pub seed: u64,
}

/// Upper end of the conjectured range, `n - k + (n - 3) / (n - 2k/3)`.
pub fn conjecture_hi(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    nf - kf + (nf - 3.0) / (nf - 2.0 * kf / 3.0)
}

fn nearest_index(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .expect("non-empty grid axis")
}

/// Grid index of `phi + 2 pi / 3` on the periodic `phi` axis.
fn rotated_phi_index(grid: &ScanGrid, i: usize) -> usize {
    let p = grid.phi_res();
    let step = 2.0 * PI / p as f64;
    let target = grid.phi_values[i] + 2.0 * PI / 3.0 + PI;
    ((target / step).round() as i64).rem_euclid(p as i64) as usize
}

pub fn conjecture_report(grid: &ScanGrid, tol: f64) -> Result<ConjectureReport> {
    grid.check_shape()?;
    if !grid.is_complete() {
        return Err(Error::InvalidState(format!(
            "{} grid points are still pending",
            grid.pending()
        )));
    }
    let values: Vec<f64> = grid.lambda_grid.iter().map(|p| p.unwrap().lambda_max).collect();
    let lo = (grid.n - grid.k) as f64;
    let hi = conjecture_hi(grid.n, grid.k);
    let observed_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let observed_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range_ok = values.iter().all(|&v| v >= lo - tol && v <= hi + tol);

    let t = grid.theta_res();
    let mut symmetry_defect: f64 = 0.0;
    for i in 0..grid.phi_res() {
        let r = rotated_phi_index(grid, i);
        for j in 0..t {
            let a = grid.get(i, j).unwrap().lambda_max;
            let b = grid.get(r, j).unwrap().lambda_max;
            symmetry_defect = symmetry_defect.max((a - b).abs());
        }
    }
    let ie = nearest_index(&grid.phi_values, 0.0);
    let je = nearest_index(&grid.theta_values, PI / 2.0);
    Ok(ConjectureReport {
        n: grid.n,
        k: grid.k,
        lo,
        hi,
        tol,
        observed_min,
        observed_max,
        range_ok,
        pole_value: grid.get(0, 0).unwrap().lambda_max,
        south_pole_value: grid.get(0, t - 1).unwrap().lambda_max,
        equator_value: grid.get(ie, je).unwrap().lambda_max,
        symmetry_defect,
        nonconverged: grid.nonconverged().len(),
        seed: grid.settings.seed,
    })
}
