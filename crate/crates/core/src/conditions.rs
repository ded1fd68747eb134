//! Sufficient conditions for positivity of `tau_{n,k} - (n-k) H_{v_1}` when
//! `n`, `k` are even, and the `(n, k)` classification built from them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulant::{build_abc, c_spectrum, check_even_pair, mu_constant, CirculantTriple};
use crate::error::Result;
use crate::map_kernel::gcd;
use crate::simplex::{minimize, SimplexOptions};

/// Infimum values at or above `-THM2_TOLERANCE` count as nonnegative.
pub const THM2_TOLERANCE: f64 = 1e-9;

/// Sufficient spectral condition: `k = 2`, or both
/// `(n-k+c_min)(n-k+c_max) >= (k/4)(n-2) c_max` and
/// `(n-k+c_min)^2 >= -(k/4)(n-2) c_min`.
pub fn proposition_holds(n: usize, k: usize) -> Result<bool> {
    check_even_pair(n, k)?;
    if k == 2 {
        return Ok(true);
    }
    let s = c_spectrum(n, k)?;
    let (nf, kf) = (n as f64, k as f64);
    let base = nf - kf;
    let w = kf / 4.0 * (nf - 2.0);
    let first = (base + s.c_min) * (base + s.c_max) >= w * s.c_max;
    let second = (base + s.c_min).powi(2) >= -w * s.c_min;
    Ok(first && second)
}

/// `n` in `{2k, 2k+2, 2k+4}`.
pub fn corollary1_holds(n: usize, k: usize) -> bool {
    n == 2 * k || n == 2 * k + 2 || n == 2 * k + 4
}

/// `n, k >= 4` and `16 n >= 2k^2 + 8(mu+4)k + 4(mu+1) - 27`.
pub fn corollary2_holds(n: usize, k: usize) -> bool {
    if n < 4 || k < 4 {
        return false;
    }
    let mu = mu_constant();
    let kf = k as f64;
    16.0 * n as f64 >= 2.0 * kf * kf + 8.0 * (mu + 4.0) * kf + 4.0 * (mu + 1.0) - 27.0
}

/// Orthonormal basis of the zero-sum subspace of `R^m`, as `m - 1` columns
/// (stored as a list of vectors), from Gram-Schmidt on `e_i - e_{i+1}`.
pub fn zero_sum_basis(m: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m.saturating_sub(1));
    for i in 0..m.saturating_sub(1) {
        let mut w = vec![0.0; m];
        w[i] = 1.0;
        w[i + 1] = -1.0;
        for b in &basis {
            let dot: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
        basis.push(w);
    }
    basis
}

fn min_entry(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Left-hand side of the quadratic-form criterion:
/// `(nk/4) min(u) min(v) (S_u + S_v) + S_u S_v` with
/// `S_u = u^T A u + u^T B v` and `S_v = v^T A v + v^T C u`.
pub fn theorem2_lhs(n: usize, k: usize, abc: &CirculantTriple, u: &[f64], v: &[f64]) -> f64 {
    let su = abc.a.bilinear(u, u) + abc.b.bilinear(u, v);
    let sv = abc.a.bilinear(v, v) + abc.c.bilinear(v, u);
    (n * k) as f64 / 4.0 * min_entry(u) * min_entry(v) * (su + sv) + su * sv
}

/// Outcome of the multistart search for the infimum of [`theorem2_lhs`] on
/// the unit sphere of `1^perp x 1^perp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm2Search {
    /// Smallest value over converged restarts; `None` if none converged.
    pub infimum: Option<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub budget: usize,
    pub converged: usize,
    pub discarded: usize,
    pub seed: u64,
}

impl Thm2Search {
    pub fn certifies(&self) -> bool {
        self.infimum.is_some_and(|v| v >= -THM2_TOLERANCE)
    }
}

/// Runs `budget` Nelder-Mead restarts (restart `i` seeded with `seed + i`).
pub fn theorem2_infimum(n: usize, k: usize, budget: usize, seed: u64) -> Result<Thm2Search> {
    let abc = build_abc(n, k)?;
    let m = n / 2;
    let basis = zero_sum_basis(m);
    let r = m - 1;
    let embed = |coords: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (c, b) in coords.iter().zip(&basis) {
            out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
        }
        out
    };
    let split = |z: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        let zn: Vec<f64> = z.iter().map(|x| x / norm).collect();
        (embed(&zn[..r]), embed(&zn[r..]))
    };
    let opts = SimplexOptions {
        x_tol: 1e-10,
        max_iters: 4000 * 2 * r,
        initial_step: 0.1,
    };

    let runs: Vec<Option<(f64, Vec<f64>)>> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut z0: Vec<f64> = (0..2 * r).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = z0.iter().map(|x| x * x).sum::<f64>().sqrt();
            z0.iter_mut().for_each(|x| *x /= norm);
            let res = minimize(
                |z| {
                    let nsq: f64 = z.iter().map(|x| x * x).sum();
                    let (u, v) = split(z);
                    theorem2_lhs(n, k, &abc, &u, &v) + (nsq - 1.0).powi(2)
                },
                &z0,
                &opts,
            );
            res.converged.then(|| {
                let (u, v) = split(&res.x);
                (theorem2_lhs(n, k, &abc, &u, &v), res.x)
            })
        })
        .collect();

    let converged = runs.iter().filter(|r| r.is_some()).count();
    let best = runs
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let (infimum, u, v) = match best {
        Some((val, z)) => {
            let (u, v) = split(&z);
            (Some(val), u, v)
        }
        None => (None, Vec::new(), Vec::new()),
    };
    Ok(Thm2Search {
        infimum,
        u,
        v,
        budget,
        converged,
        discarded: budget - converged,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Cor1,
    Cor2,
    Prop,
    Thm2,
    Unresolved,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Category::Cor1 => "COR1",
            Category::Cor2 => "COR2",
            Category::Prop => "PROP",
            Category::Thm2 => "THM2",
            Category::Unresolved => "UNRESOLVED",
        })
    }
}

/// Per-pair verdicts. `None` in `thm2_numeric` means the search was not run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub n: usize,
    pub k: usize,
    pub gcd: usize,
    pub cor1: bool,
    pub cor2: bool,
    pub prop: bool,
    pub thm2_numeric: Option<bool>,
    pub thm2_infimum: Option<f64>,
    pub thm2_tolerance: f64,
    pub category: Category,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub with_thm2: bool,
    pub budget: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            with_thm2: false,
            budget: 200,
            seed: 0,
        }
    }
}

pub fn classify(n: usize, k: usize, opts: &ClassifyOptions) -> Result<ClassificationRecord> {
    let prop = proposition_holds(n, k)?;
    let cor1 = corollary1_holds(n, k);
    let cor2 = corollary2_holds(n, k);
    if (cor1 || cor2) && !prop {
        log::warn!("({n},{k}): corollary holds but the proposition does not");
    }
    let search = if opts.with_thm2 {
        Some(theorem2_infimum(n, k, opts.budget, opts.seed)?)
    } else {
        None
    };
    let thm2_numeric = search.as_ref().map(Thm2Search::certifies);
    let thm2_infimum = search.as_ref().and_then(|s| s.infimum);
    let category = if cor1 {
        Category::Cor1
    } else if cor2 {
        Category::Cor2
    } else if prop {
        Category::Prop
    } else if thm2_numeric == Some(true) {
        Category::Thm2
    } else {
        Category::Unresolved
    };
    Ok(ClassificationRecord {
        n,
        k,
        gcd: gcd(n, k),
        cor1,
        cor2,
        prop,
        thm2_numeric,
        thm2_infimum,
        thm2_tolerance: THM2_TOLERANCE,
        category,
    })
}

/// All even pairs `4 <= n <= n_max`, `2 <= k <= n-2`, in `(n, k)` order.
pub fn even_pairs(n_max: usize) -> Vec<(usize, usize)> {
    (4..=n_max)
        .step_by(2)
        .flat_map(|n| (2..=n - 2).step_by(2).map(move |k| (n, k)))
        .collect()
}

pub fn classify_all(n_max: usize, opts: &ClassifyOptions) -> Result<Vec<ClassificationRecord>> {
    even_pairs(n_max)
        .into_par_iter()
        .map(|(n, k)| classify(n, k, opts))
        .collect()
}
