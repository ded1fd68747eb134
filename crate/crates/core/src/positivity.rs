//! Numerical positivity decisions for optimised maps.
//!
//! Positivity of `Phi = tau_{n,k} - lambda H_v` is probed on rank-one real
//! inputs `|x><x|`: diagonal phase unitaries commute with both the `D` term
//! and the Hadamard term, so complex phases of `x` can be absorbed. The
//! objective is `det Phi(|x><x|)` on the unit sphere, minimised by multistart
//! Nelder-Mead; `lambda_max` is the edge of the region where that minimum
//! stays in the zero band.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{det_complex, herm_eigenvalues, CMatrix, HermitianMatrix};
use crate::map_kernel::{diag_d_from_weights, gcd, optimized_apply_real_rank_one, MapSpec};
use crate::simplex::{minimize, SimplexOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `det Phi(|x><x|)`.
    #[default]
    Determinant,
    /// Smallest eigenvalue of `Phi(|x><x|)`; a diagnostic alternative.
    MinEigenvalue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub restarts: usize,
    pub seed: u64,
    pub inner_tol: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub zero_band: f64,
    pub max_local_iters: usize,
    pub objective: Objective,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            inner_tol: 1e-10,
            newton_tol: 1e-4,
            max_newton_iters: 40,
            zero_band: 1e-8,
            max_local_iters: 50_000,
            objective: Objective::Determinant,
        }
    }
}

impl SearchSettings {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(invalid("restarts must be >= 1"));
        }
        for (name, v) in [
            ("inner_tol", self.inner_tol),
            ("newton_tol", self.newton_tol),
            ("zero_band", self.zero_band),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_local_iters == 0 {
            return Err(invalid("max_local_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Objective evaluator with reusable scratch space.
struct Evaluator<'a> {
    spec: &'a MapSpec,
    objective: Objective,
    buf: Vec<Complex64>,
}

impl<'a> Evaluator<'a> {
    fn new(spec: &'a MapSpec, objective: Objective) -> Self {
        let n = spec.n();
        Self {
            spec,
            objective,
            buf: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        optimized_apply_real_rank_one(self.spec, x, &mut self.buf);
        match self.objective {
            Objective::Determinant => {
                let m = CMatrix::from_row_major(self.buf.clone()).expect("square buffer");
                det_complex(&m).re
            }
            Objective::MinEigenvalue => {
                let m = CMatrix::from_row_major(self.buf.clone()).expect("square buffer");
                match HermitianMatrix::new(m) {
                    Ok(h) => herm_eigenvalues(&h)[0],
                    Err(_) => f64::NAN,
                }
            }
        }
    }
}

fn check_x(spec: &MapSpec, x: &[f64]) -> Result<()> {
    if x.len() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: x.len(),
        });
    }
    if !x.iter().all(|v| v.is_finite()) || x.iter().all(|&v| v == 0.0) {
        return Err(invalid("input vector must be finite and nonzero"));
    }
    Ok(())
}

/// `det optimized_apply(spec, |x><x| / ||x||^2)`.
pub fn det_objective(spec: &MapSpec, x: &[f64]) -> Result<f64> {
    check_x(spec, x)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); spec.n() * spec.n()];
    optimized_apply_real_rank_one(spec, x, &mut buf);
    let h = HermitianMatrix::new(CMatrix::from_row_major(buf)?)?;
    crate::linalg::det_herm(&h)
}

/// Same normalisation as [`det_objective`], returning the full output matrix.
pub fn rank_one_output(spec: &MapSpec, x: &[f64]) -> Result<HermitianMatrix> {
    check_x(spec, x)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); spec.n() * spec.n()];
    optimized_apply_real_rank_one(spec, x, &mut buf);
    HermitianMatrix::new(CMatrix::from_row_major(buf)?)
}

/// Unit start vector for restart `index` (standard normal entries, normalised).
pub fn start_point(n: usize, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinSearch {
    pub value: f64,
    /// Unit-norm minimiser.
    pub argmin: Vec<f64>,
    pub converged: usize,
    pub discarded: usize,
}

struct LocalRun {
    value: f64,
    x: Vec<f64>,
    converged: bool,
}

fn local_run(spec: &MapSpec, settings: &SearchSettings, start: &[f64]) -> LocalRun {
    let mut ev = Evaluator::new(spec, settings.objective);
    let opts = SimplexOptions {
        x_tol: settings.inner_tol,
        max_iters: settings.max_local_iters,
        initial_step: 0.1,
    };
    // The objective is constant along rays; the penalty pins the radius so
    // minimisers are isolated.
    let res = minimize(
        |x| {
            let nsq: f64 = x.iter().map(|v| v * v).sum();
            if nsq == 0.0 {
                return f64::NAN;
            }
            ev.eval(x) + (nsq - 1.0).powi(2)
        },
        start,
        &opts,
    );
    let norm = res.x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x: Vec<f64> = res.x.iter().map(|v| v / norm).collect();
    let value = ev.eval(&x);
    LocalRun {
        value,
        x,
        converged: res.converged,
    }
}

/// Smallest converged local minimum over `settings.restarts` independent starts.
///
/// Restart `i` starts from [`start_point`]`(n, seed, i)`, so repeated calls
/// with the same settings see the same start set whatever `lambda` is.
pub fn robust_min(spec: &MapSpec, settings: &SearchSettings) -> Result<MinSearch> {
    robust_min_with_starts(spec, settings, &[])
}

/// [`robust_min`] with extra local runs from `extra_starts` after the random ones.
pub fn robust_min_with_starts(spec: &MapSpec, settings: &SearchSettings, extra_starts: &[Vec<f64>]) -> Result<MinSearch> {
    settings.validate()?;
    let n = spec.n();
    if let Some(bad) = extra_starts.iter().find(|x| x.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let total = settings.restarts + extra_starts.len();
    let runs: Vec<LocalRun> = (0..total)
        .into_par_iter()
        .map(|i| {
            if i < settings.restarts {
                local_run(spec, settings, &start_point(n, settings.seed, i))
            } else {
                local_run(spec, settings, &extra_starts[i - settings.restarts])
            }
        })
        .collect();
    let converged = runs.iter().filter(|r| r.converged).count();
    let discarded = runs.len() - converged;
    if discarded > 0 {
        log::debug!(
            "robust_min(n={}, k={}, lambda={}): {discarded} of {} restarts discarded",
            spec.n(),
            spec.k(),
            spec.lambda(),
            runs.len()
        );
    }
    let best = runs
        .into_iter()
        .filter(|r| r.converged)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or(Error::SearchFailure {
            attempted: total,
            discarded,
        })?;
    Ok(MinSearch {
        value: best.value,
        argmin: best.x,
        converged,
        discarded,
    })
}

/// `true` iff the multistart minimum lies at or above `-zero_band` and the
/// output at the minimiser has no eigenvalue below `-zero_band`.
pub fn is_positive(spec: &MapSpec, settings: &SearchSettings) -> Result<bool> {
    let m = robust_min(spec, settings)?;
    if m.value < -settings.zero_band {
        return Ok(false);
    }
    // An even number of negative eigenvalues still gives a positive determinant.
    let eig = herm_eigenvalues(&rank_one_output(spec, &m.argmin)?);
    Ok(eig[0] >= -settings.zero_band)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaMaxResult {
    /// Largest lambda at which the search found no violation.
    pub lambda_max: f64,
    /// Smallest lambda at which a violation was found (`None` if never).
    pub upper_bound: Option<f64>,
    /// Objective evaluations after the two initial points.
    pub iterations: usize,
    pub converged: bool,
    /// Multistart minimum at `lambda_max`.
    pub final_objective: f64,
    /// Violating input at `upper_bound` (or the minimiser at `lambda_max`
    /// when no violation was seen).
    pub witness_x: Vec<f64>,
    pub n: usize,
    pub k: usize,
    /// `[re, im]` pairs.
    pub coeffs: Vec<[f64; 2]>,
    pub settings: SearchSettings,
}

type Probe = (f64, f64, Vec<f64>);

fn record(lam: f64, m: MinSearch, band: f64, lo: &mut Probe, lo_ev: &mut bool, bad: &mut Vec<Probe>) {
    if m.value >= -band {
        if lam >= lo.0 {
            *lo = (lam, m.value, m.argmin);
            *lo_ev = true;
        }
    } else {
        let pos = bad.partition_point(|p| p.0 < lam);
        bad.insert(pos, (lam, m.value, m.argmin));
    }
}

/// Largest `lambda` in `[0, n]` keeping `tau_{n,k} - lambda H_v` positive.
///
/// Safeguarded secant on `g(lambda) = robust_min(..).value`, started from
/// `(n, n-1)`. `g` vanishes identically below the threshold, so secant steps
/// use only points with `g < -zero_band` and fall back to bisection of the
/// bracket `[feasible, infeasible]`; `lambda = 0` is the initial feasible end.
pub fn lambda_max(
    n: usize,
    k: usize,
    coeffs: &[Complex64],
    settings: &SearchSettings,
) -> Result<LambdaMaxResult> {
    settings.validate()?;
    if gcd(n, k) < 2 {
        return Err(invalid(format!("lambda_max needs gcd(n, k) >= 2, got n={n}, k={k}")));
    }
    let base = MapSpec::new(n, k, 0.0, coeffs.to_vec())?;
    let nf = n as f64;
    let tol = settings.newton_tol;
    let band = settings.zero_band;

    // The violating input found at the smallest infeasible lambda seeds an
    // extra local run, so the violation is followed as lambda decreases.
    let g = |lam: f64, bad: &[Probe]| -> Result<MinSearch> {
        let extra: Vec<Vec<f64>> = bad.first().map(|p| p.2.clone()).into_iter().collect();
        robust_min_with_starts(&base.with_lambda(lam)?, settings, &extra)
    };

    // Feasible end of the bracket: (lambda, g, argmin).
    let mut lo: Probe = (0.0, 0.0, Vec::new());
    let mut lo_evaluated = false;
    // Infeasible points sorted by lambda ascending.
    let mut bad: Vec<Probe> = Vec::new();


    for lam in [nf, nf - 1.0] {
        let m = g(lam, &bad)?;
        record(lam, m, band, &mut lo, &mut lo_evaluated, &mut bad);
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut last = nf - 1.0;
    loop {
        let hi = bad.first().map(|p| p.0);
        let Some(hi_lam) = hi else {
            // No violation anywhere we looked: the clamp at n is binding.
            converged = true;
            break;
        };
        if hi_lam - lo.0 <= 2.0 * tol {
            converged = true;
            break;
        }
        if iterations >= settings.max_newton_iters {
            break;
        }

        let mut cand = if bad.len() >= 2 {
            let (l1, g1) = (bad[0].0, bad[0].1);
            let (l2, g2) = (bad[1].0, bad[1].1);
            if g2 != g1 {
                l1 - g1 * (l1 - l2) / (g1 - g2)
            } else {
                l1 - tol
            }
        } else {
            f64::NAN
        };
        if !(cand > lo.0 && cand < hi_lam) {
            cand = 0.5 * (lo.0 + hi_lam);
        } else if hi_lam - cand <= tol {
            // Secant has stalled against the violating side: probe just below
            // to try to close the bracket from the feasible side.
            cand = (cand - tol).max(0.5 * (lo.0 + hi_lam).min(cand - tol));
            if cand <= lo.0 {
                cand = 0.5 * (lo.0 + hi_lam);
            }
        }
        let cand = cand.clamp(0.0, nf);
        let m = g(cand, &bad)?;
        iterations += 1;
        let step = (cand - last).abs();
        last = cand;
        record(cand, m, band, &mut lo, &mut lo_evaluated, &mut bad);
        if step <= tol && bad.first().is_some_and(|p| p.0 - lo.0 <= 2.0 * tol) {
            converged = true;
            break;
        }
    }

    if !lo_evaluated {
        let m = g(lo.0, &bad)?;
        lo = (lo.0, m.value, m.argmin);
    }
    let (upper_bound, witness_x) = match bad.first() {
        Some(p) => (Some(p.0), p.2.clone()),
        None => (None, lo.2.clone()),
    };
    Ok(LambdaMaxResult {
        lambda_max: lo.0.clamp(0.0, nf),
        upper_bound,
        iterations,
        converged,
        final_objective: lo.1,
        witness_x,
        n,
        k,
        coeffs: coeffs.iter().map(|z| [z.re, z.im]).collect(),
        settings: settings.clone(),
    })
}

/// The reduced two-dimensional determinant for `d = 2`:
/// `[D_ev - (1+l/n) X_ev^2][D_od - (1+l/n) X_od^2] - (1-l/n)^2 X_ev^2 X_od^2`
/// with `psi` normalised to unit length.
pub fn d2_witness(n: usize, k: usize, lambda: f64, psi: &[Complex64]) -> Result<f64> {
    if n % 2 != 0 {
        return Err(invalid(format!("the d = 2 witness needs even n, got {n}")));
    }
    if k == 0 || k >= n {
        return Err(invalid(format!("k must satisfy 1 <= k <= n-1, got {k}")));
    }
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: psi.len(),
        });
    }
    let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm_sq == 0.0 || !norm_sq.is_finite() {
        return Err(invalid("psi must be finite and nonzero"));
    }
    let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr() / norm_sq).collect();
    let d = diag_d_from_weights(n, k, &p);
    let (mut x_ev, mut x_od, mut d_ev, mut d_od) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        if i % 2 == 0 {
            x_ev += p[i];
            d_ev += d[i] * p[i];
        } else {
            x_od += p[i];
            d_od += d[i] * p[i];
        }
    }
    let r = lambda / n as f64;
    Ok((d_ev - (1.0 + r) * x_ev * x_ev) * (d_od - (1.0 + r) * x_od * x_od)
        - (1.0 - r).powi(2) * x_ev * x_ev * x_od * x_od)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det_herm, outer};
    use crate::map_kernel::{build_v, optimized_apply};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn quick() -> SearchSettings {
        SearchSettings {
            restarts: 20,
            ..Default::default()
        }
    }

    #[test]
    fn objective_examples() {
        let choi = MapSpec::new(3, 1, 0.0, vec![]).unwrap();
        assert_abs_diff_eq!(det_objective(&choi, &[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(det_objective(&choi, &[0.0, 0.0, 0.0]).is_err());
        assert!(det_objective(&choi, &[1.0, 0.0]).is_err());

        let spec = MapSpec::new(4, 2, 0.0, vec![c(1.0)]).unwrap();
        for x in [[0.3, -1.0, 0.2, 0.7], [1.0, 1.0, 1.0, 1.0], [0.0, 2.0, 0.0, -1.0]] {
            assert!(det_objective(&spec, &x).unwrap() >= -1e-14);
        }
    }

    #[test]
    fn objective_uniform_4_2_by_hand() {
        // x = (1,1,1,1)/2: X = J/4, D_i = (2 + 2) / 4 = 1, and
        // P_v o X has entries (-1)^{i+j} / 16.
        let lam = 1.3;
        let spec = MapSpec::new(4, 2, lam, vec![c(1.0)]).unwrap();
        let m = CMatrix::from_fn(4, |i, j| {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let delta = if i == j { 1.0 } else { 0.0 };
            c(delta - 0.25 - lam * sign / 16.0)
        });
        let want = det_herm(&HermitianMatrix::new(m).unwrap()).unwrap();
        assert_abs_diff_eq!(det_objective(&spec, &[1.0; 4]).unwrap(), want, epsilon = 1e-14);
    }

    #[test]
    fn scale_invariance() {
        let spec = MapSpec::new(6, 3, 2.0, vec![c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        let x = [0.4, -0.2, 1.1, 0.3, -0.9, 0.05];
        let base = det_objective(&spec, &x).unwrap();
        for s in [-3.0, 0.01, 17.0] {
            let y: Vec<f64> = x.iter().map(|v| v * s).collect();
            assert!((det_objective(&spec, &y).unwrap() - base).abs() <= 1e-12 * base.abs().max(1.0));
        }
    }

    #[test]
    fn choi_map_minimum_is_zero() {
        let choi = MapSpec::new(3, 1, 0.0, vec![]).unwrap();
        let m = robust_min(&choi, &quick()).unwrap();
        assert!(m.value.abs() <= 1e-8, "{m:?}");
        assert!(is_positive(&choi, &quick()).unwrap());
    }

    #[test]
    fn unsubtracted_maps_are_positive() {
        for (n, k) in [(3, 1), (4, 2), (5, 2)] {
            let spec = MapSpec::unsubtracted(n, k).unwrap();
            assert!(is_positive(&spec, &quick()).unwrap(), "({n},{k})");
        }
    }

    #[test]
    fn sharp_threshold_4_2() {
        let at = MapSpec::new(4, 2, 2.0, vec![c(1.0)]).unwrap();
        assert!(robust_min(&at, &quick()).unwrap().value >= -1e-8);
        assert!(is_positive(&at, &quick()).unwrap());
        let over = at.with_lambda(2.05).unwrap();
        assert!(robust_min(&over, &quick()).unwrap().value < -1e-6);
        assert!(!is_positive(&over, &quick()).unwrap());
    }

    #[test]
    fn search_is_deterministic() {
        let spec = MapSpec::new(6, 2, 4.1, vec![c(1.0)]).unwrap();
        let a = robust_min(&spec, &quick()).unwrap();
        let b = robust_min(&spec, &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn settings_validation() {
        let spec = MapSpec::new(4, 2, 1.0, vec![c(1.0)]).unwrap();
        let bad = SearchSettings {
            restarts: 0,
            ..Default::default()
        };
        assert!(robust_min(&spec, &bad).is_err());
        let bad = SearchSettings {
            zero_band: 0.0,
            ..Default::default()
        };
        assert!(robust_min(&spec, &bad).is_err());
    }

    #[test]
    fn search_failure_when_nothing_converges() {
        let spec = MapSpec::new(4, 2, 1.0, vec![c(1.0)]).unwrap();
        let s = SearchSettings {
            restarts: 3,
            max_local_iters: 2,
            ..Default::default()
        };
        assert!(matches!(robust_min(&spec, &s), Err(Error::SearchFailure { attempted: 3, discarded: 3 })));
    }

    #[test]
    fn lambda_max_rejects_gcd_one() {
        assert!(lambda_max(5, 2, &[], &quick()).is_err());
    }

    #[test]
    fn lambda_max_d2_is_n_minus_k() {
        let r = lambda_max(4, 2, &[c(1.0)], &quick()).unwrap();
        assert!(r.converged);
        assert!((r.lambda_max - 2.0).abs() < 0.05, "{r:?}");
        assert!(r.final_objective.abs() <= 1e-8);
    }

    #[test]
    fn witness_examples() {
        let n = 8;
        let k = 4;
        let lam = (n - k) as f64;
        // Even-only support empties the odd sector.
        let mut psi = vec![c(0.0); n];
        psi[0] = c(1.0);
        psi[4] = c(0.5);
        assert_abs_diff_eq!(d2_witness(n, k, lam, &psi).unwrap(), 0.0, epsilon = 1e-15);
        assert!(d2_witness(7, 2, 1.0, &vec![c(1.0); 7]).is_err());
        assert!(d2_witness(8, 4, 1.0, &vec![c(1.0); 6]).is_err());
    }

    /// Assembles the 2x2 Gram form on span{psi, psi~} directly from vectors.
    fn gram_det(n: usize, k: usize, lam: f64, psi: &[Complex64]) -> f64 {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let tilde: Vec<Complex64> = psi
            .iter()
            .enumerate()
            .map(|(i, z)| if i % 2 == 0 { *z } else { -z })
            .collect();
        let x = outer(&psi).unwrap();
        let dvec = crate::map_kernel::diag_d(n, k, &x).unwrap();
        let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).map(|(p, q)| p.conj() * q).sum()
        };
        let dform = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
            a.iter().zip(b).zip(&dvec).map(|((p, q), d)| p.conj() * q * d).sum()
        };
        let r = lam / n as f64;
        let pp = inner(&psi, &psi);
        let pt = inner(&psi, &tilde);
        let tt = inner(&tilde, &tilde);
        let m00 = dform(&psi, &psi) - pp * pp - r * pt.norm_sqr();
        let m01 = dform(&psi, &tilde) - pp * pt - r * pt * tt;
        let m10 = dform(&tilde, &psi) - tt * pt.conj() - r * pt.conj() * tt;
        let m11 = dform(&tilde, &tilde) - pt.norm_sqr() - r * tt * tt;
        (m00 * m11 - m01 * m10).re
    }

    #[test]
    fn witness_matches_gram_determinant() {
        let n = 6;
        let k = 2;
        for (lam, psi) in [
            (4.0, vec![c(1.0); 6]),
            (3.5, vec![c(0.3), c(-1.0), Complex64::new(0.2, 0.4), c(0.7), c(0.1), c(-0.5)]),
            (0.0, vec![c(1.0), c(2.0), c(0.0), c(0.5), c(-0.3), c(0.9)]),
        ] {
            let w = d2_witness(n, k, lam, &psi).unwrap();
            assert_abs_diff_eq!(4.0 * w, gram_det(n, k, lam, &psi), epsilon = 1e-12);
        }
        // Uniform psi: X_ev = X_od = 1/2.
        let w = d2_witness(n, k, 4.0, &vec![c(1.0); 6]).unwrap();
        assert!(w.is_finite());
    }

    #[test]
    fn witness_sign_matches_full_determinant_for_d2() {
        // At lambda = n - k the optimised map output on |psi><psi| and the
        // reduced witness must not disagree on a strict violation.
        let (n, k) = (8, 4);
        let coeffs = crate::map_kernel::alternating_coeffs(4).unwrap();
        let spec = MapSpec::new(n, k, 4.0, coeffs.clone()).unwrap();
        let v = build_v(n, 4, &coeffs).unwrap();
        for (j, z) in v.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(z.re, sign / (n as f64).sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
        let psi: Vec<Complex64> = (0..n).map(|i| c(((i * 7 + 3) % 5) as f64 - 1.5)).collect();
        let w = d2_witness(n, k, 4.0, &psi).unwrap();
        let out = optimized_apply(&spec, &outer(&psi).unwrap()).unwrap();
        let eig = herm_eigenvalues(&out);
        assert!(w >= -1e-9);
        assert!(eig[0] >= -1e-9);
    }
}
