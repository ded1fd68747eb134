//! Sampling checks of the lower bound `x^T M y >= -nk/4` for `M = B, C`
//! over zero-sum vectors with minimum entry `-1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulant::{build_abc, check_even_pair, Block, IntMatrix};
use crate::error::{invalid, Result};
use crate::simplex::{minimize, SimplexOptions};

/// Shift exponents `s` with `M = sum_s P^s`.
fn shifts(k: usize, which: Block) -> std::ops::Range<usize> {
    match which {
        Block::B => 0..k / 2,
        Block::C => 1..k / 2 + 1,
    }
}

/// Integer pair attaining `-nk/4`.
///
/// `a` has `n/2 - 1` at index 1 and `-1` elsewhere; `b` has the same shape
/// with its peak at an index whose offset from 1 is not a shift of `M`, so
/// every term `a^T P^s b` contributes `-n/2`. The peak sits at the last index
/// when that offset is free, otherwise at index 0 (for `B`) or 1 (for `C`).
pub fn extremal_pair(n: usize, k: usize, which: Block) -> Result<(Vec<i64>, Vec<i64>)> {
    check_even_pair(n, k)?;
    let m = n / 2;
    let p = 1 % m;
    let free = |q: usize| !shifts(k, which).any(|s| s % m == (q + m - p) % m);
    let q = [m - 1, 0, p]
        .into_iter()
        .find(|&q| free(q))
        .expect("a free offset exists for k <= n-2");
    let peak = |at: usize| -> Vec<i64> {
        (0..m).map(|i| if i == at { m as i64 - 1 } else { -1 }).collect()
    };
    Ok((peak(p), peak(q)))
}

/// `a^T M b` for [`extremal_pair`], in integer arithmetic.
pub fn extremal_value_int(n: usize, k: usize, which: Block) -> Result<i64> {
    let abc = build_abc(n, k)?;
    let (a, b) = extremal_pair(n, k, which)?;
    Ok(abc.block(which).bilinear_int(&a, &b))
}

pub fn extremal_value(n: usize, k: usize, which: Block) -> Result<f64> {
    extremal_value_int(n, k, which).map(|v| v as f64)
}

/// Draws a zero-sum vector of length `m` with minimum exactly `-1`:
/// exponentials rescaled to sum `m`, shifted by `-1`, then scaled.
pub fn sample_normalized(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let e: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = e.iter().sum();
        let x: Vec<f64> = e.iter().map(|v| v * m as f64 / total - 1.0).collect();
        if let Some(x) = normalize_min(&x) {
            return x;
        }
    }
}

/// Centers `z` and scales it so its minimum is `-1`; `None` for constant input.
pub fn normalize_min(z: &[f64]) -> Option<Vec<f64>> {
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let centered: Vec<f64> = z.iter().map(|v| v - mean).collect();
    let min = centered.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min < -1e-12) || !min.is_finite() {
        return None;
    }
    Some(centered.iter().map(|v| v / -min).collect())
}

fn argmin(x: &[f64]) -> usize {
    x.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty vector")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest `a^T b` over `samples` random pairs of length `n/2`.
///
/// Odd-numbered samples move the minimum of `b` onto the coordinate of the
/// minimum of `a`, covering the shared-argmin case.
pub fn pair_min_bound(n: usize, samples: usize, seed: u64) -> Result<f64> {
    if n % 2 != 0 || n < 4 {
        return Err(invalid(format!("pair_min_bound needs even n >= 4, got {n}")));
    }
    if samples == 0 {
        return Err(invalid("samples must be >= 1"));
    }
    let m = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for s in 0..samples {
        let a = sample_normalized(m, &mut rng);
        let mut b = sample_normalized(m, &mut rng);
        if s % 2 == 1 {
            let (ia, ib) = (argmin(&a), argmin(&b));
            b.swap(ia, ib);
        }
        best = best.min(dot(&a, &b));
    }
    Ok(best)
}

/// Smallest `x^T M y` found by sampling plus a local search from the best
/// candidate. The extremal pair is always among the candidates.
pub fn bilinear_min_sample(n: usize, k: usize, which: Block, samples: usize, seed: u64) -> Result<f64> {
    let abc = build_abc(n, k)?;
    let mat = abc.block(which);
    let m = n / 2;

    let (ea, eb) = extremal_pair(n, k, which)?;
    let mut best_x: Vec<f64> = ea.iter().map(|&v| v as f64).collect();
    let mut best_y: Vec<f64> = eb.iter().map(|&v| v as f64).collect();
    let mut best = mat.bilinear(&best_x, &best_y);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for s in 0..samples {
        let x = sample_normalized(m, &mut rng);
        let mut y = sample_normalized(m, &mut rng);
        if s % 2 == 1 {
            let (ix, iy) = (argmin(&x), argmin(&y));
            y.swap(ix, iy);
        }
        let v = mat.bilinear(&x, &y);
        if sampled_best.as_ref().is_none_or(|b| v < b.0) {
            sampled_best = Some((v, x, y));
        }
    }

    if let Some((v, x, y)) = sampled_best {
        let (rv, rx, ry) = refine(mat, &x, &y);
        for (cand, cx, cy) in [(v, x, y), (rv, rx, ry)] {
            if cand < best {
                best = cand;
                best_x = cx;
                best_y = cy;
            }
        }
    }
    log::debug!("bilinear_min_sample({n},{k},{which}) best pair {best_x:?} {best_y:?}");
    Ok(best)
}

/// Nelder-Mead over unnormalised pairs mapped through [`normalize_min`].
fn refine(mat: &IntMatrix, x: &[f64], y: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let m = x.len();
    let eval = |z: &[f64]| -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let a = normalize_min(&z[..m])?;
        let b = normalize_min(&z[m..])?;
        Some((mat.bilinear(&a, &b), a, b))
    };
    let z0: Vec<f64> = x.iter().chain(y).copied().collect();
    let opts = SimplexOptions {
        x_tol: 1e-10,
        max_iters: 5_000,
        initial_step: 0.05,
    };
    let res = minimize(|z| eval(z).map_or(f64::NAN, |r| r.0), &z0, &opts);
    eval(&res.x).unwrap_or_else(|| (mat.bilinear(x, y), x.to_vec(), y.to_vec()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    pub k: usize,
    pub which: Block,
    pub samples: usize,
    pub seed: u64,
    pub min_found: f64,
    /// `-nk/4`.
    pub bound: f64,
    pub extremal_value: i64,
    /// Sampled minimum respects the bound and the extremal pair attains it.
    pub ok: bool,
}

pub const LEMMA_SLACK: f64 = 1e-9;

pub fn lemma_report(n: usize, k: usize, which: Block, samples: usize, seed: u64) -> Result<LemmaReport> {
    let min_found = bilinear_min_sample(n, k, which, samples, seed)?;
    let extremal = extremal_value_int(n, k, which)?;
    let bound_int = -((n * k / 4) as i64);
    let bound = bound_int as f64;
    Ok(LemmaReport {
        n,
        k,
        which,
        samples,
        seed,
        min_found,
        bound,
        extremal_value: extremal,
        ok: min_found >= bound - LEMMA_SLACK && extremal == bound_int,
    })
}

/// Reports for every even `4 <= n <= n_max`, even `2 <= k <= n-2` and both blocks.
pub fn verify_lemma(n_max: usize, samples: usize, seed: u64) -> Result<Vec<LemmaReport>> {
    let mut jobs = Vec::new();
    for n in (4..=n_max).step_by(2) {
        for k in (2..=n - 2).step_by(2) {
            jobs.push((n, k, Block::B));
            jobs.push((n, k, Block::C));
        }
    }
    jobs.into_par_iter()
        .map(|(n, k, which)| lemma_report(n, k, which, samples, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn extremal_examples() {
        let (a, b) = extremal_pair(8, 4, Block::B).unwrap();
        assert_eq!(a, vec![-1, 3, -1, -1]);
        assert_eq!(b, vec![-1, -1, -1, 3]);
        assert_eq!(extremal_value_int(8, 4, Block::B).unwrap(), -8);

        let (a, b) = extremal_pair(4, 2, Block::B).unwrap();
        assert_eq!(a, vec![-1, 1]);
        assert_eq!(b, vec![1, -1]);
        assert_eq!(extremal_value_int(4, 2, Block::B).unwrap(), -2);

        assert_eq!(extremal_value_int(12, 4, Block::C).unwrap(), -12);
        assert_eq!(extremal_value(12, 4, Block::C).unwrap(), -12.0);
    }

    #[test]
    fn extremal_attains_bound_everywhere() {
        for n in (4..=30).step_by(2) {
            for k in (2..=n - 2).step_by(2) {
                for which in [Block::B, Block::C] {
                    let v = extremal_value_int(n, k, which).unwrap();
                    assert_eq!(v, -((n * k / 4) as i64), "({n},{k},{which})");
                }
            }
        }
    }

    #[test]
    fn peak_at_last_index_fails_near_the_edge() {
        // The peak-at-last-index pair lines the peaks up under one shift
        // once k is close to n.
        let abc = build_abc(8, 6).unwrap();
        let a = [-1, 3, -1, -1];
        let b = [-1, -1, -1, 3];
        assert_eq!(abc.b.bilinear_int(&a, &b), 4);
        assert_eq!(extremal_value_int(8, 6, Block::B).unwrap(), -12);
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(extremal_value(7, 2, Block::B).is_err());
        assert!(extremal_value(8, 8, Block::C).is_err());
        assert!(pair_min_bound(5, 10, 0).is_err());
        assert!(pair_min_bound(8, 0, 0).is_err());
    }

    #[test]
    fn normalized_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in [2, 3, 8] {
            for _ in 0..100 {
                let x = sample_normalized(m, &mut rng);
                assert_abs_diff_eq!(x.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
                assert_eq!(x.iter().copied().fold(f64::INFINITY, f64::min), -1.0);
            }
        }
        assert!(normalize_min(&[2.0, 2.0]).is_none());
    }

    #[test]
    fn pair_bound_examples() {
        let v = pair_min_bound(4, 1000, 3).unwrap();
        assert!(v >= -2.0 - 1e-9);
        // n = 4 has only (-1, 1) and (1, -1).
        assert_abs_diff_eq!(v, -2.0, epsilon = 1e-12);
        assert!(pair_min_bound(8, 5000, 4).unwrap() >= -4.0 - 1e-9);
        assert!(pair_min_bound(16, 5000, 5).unwrap() >= -8.0 - 1e-9);
    }

    #[test]
    fn bilinear_examples() {
        for which in [Block::B, Block::C] {
            let v = bilinear_min_sample(8, 4, which, 10_000, 9).unwrap();
            assert!(v >= -8.0 - 1e-9);
            assert!(v <= -8.0 + 1e-6);
        }
        let v = bilinear_min_sample(6, 2, Block::B, 2000, 9).unwrap();
        assert_abs_diff_eq!(v, -3.0, epsilon = 1e-6);
        assert!(v >= -3.0 - 1e-9);
    }

    #[test]
    fn report_flags() {
        let r = lemma_report(10, 4, Block::C, 500, 2).unwrap();
        assert!(r.ok);
        assert_eq!(r.bound, -10.0);
        assert_eq!(r.extremal_value, -10);
        let all = verify_lemma(8, 200, 1).unwrap();
        // n = 4: k = 2; n = 6: k = 2, 4; n = 8: k = 2, 4, 6; two blocks each.
        assert_eq!(all.len(), 12);
        assert!(all.iter().all(|r| r.ok));
    }
}
