//! Derivative-free Nelder-Mead minimisation.

/// Stopping rules for a single local run.
#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Converged once the simplex diameter (max vertex distance from the best
    /// vertex, infinity norm) drops below this.
    pub x_tol: f64,
    pub max_iters: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-10,
            max_iters: 20_000,
            initial_step: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub evals: usize,
    pub diameter: f64,
    pub converged: bool,
}

// Standard adaptive-free coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimises `f` from `x0`.
///
/// Non-finite objective values are treated as `+inf`, so the simplex is
/// pushed away from them.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert!(dim >= 1, "cannot minimise over a zero-dimensional space");
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    verts.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        let step = if v[i] != 0.0 {
            opts.initial_step * v[i].abs().max(1.0)
        } else {
            opts.initial_step
        };
        v[i] += step;
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v)).collect();

    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];
    let mut iters = 0;
    let mut diameter = f64::INFINITY;

    while iters < opts.max_iters {
        sort_simplex(&mut verts, &mut vals);
        diameter = simplex_diameter(&verts);
        if diameter < opts.x_tol {
            break;
        }
        iters += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for v in &verts[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let worst = dim;
        along(&centroid, &verts[worst], -REFLECT, &mut trial);
        let f_r = eval(&trial);

        if f_r < vals[0] {
            along(&centroid, &verts[worst], -EXPAND, &mut trial2);
            let f_e = eval(&trial2);
            if f_e < f_r {
                verts[worst].copy_from_slice(&trial2);
                vals[worst] = f_e;
            } else {
                verts[worst].copy_from_slice(&trial);
                vals[worst] = f_r;
            }
            continue;
        }
        if f_r < vals[dim - 1] {
            verts[worst].copy_from_slice(&trial);
            vals[worst] = f_r;
            continue;
        }

        // Contraction: outside if the reflection improved on the worst, else inside.
        let (f_c, accept) = if f_r < vals[worst] {
            along(&centroid, &verts[worst], -CONTRACT, &mut trial2);
            let f_c = eval(&trial2);
            (f_c, f_c <= f_r)
        } else {
            along(&centroid, &verts[worst], CONTRACT, &mut trial2);
            let f_c = eval(&trial2);
            (f_c, f_c < vals[worst])
        };
        if accept {
            verts[worst].copy_from_slice(&trial2);
            vals[worst] = f_c;
            continue;
        }

        let (best, rest) = verts.split_first_mut().unwrap();
        for (v, fv) in rest.iter_mut().zip(vals[1..].iter_mut()) {
            for (x, b) in v.iter_mut().zip(best.iter()) {
                *x = b + SHRINK * (*x - b);
            }
            *fv = eval(v);
        }
    }

    sort_simplex(&mut verts, &mut vals);
    if diameter.is_infinite() || iters == opts.max_iters {
        diameter = simplex_diameter(&verts);
    }
    SimplexResult {
        x: verts.swap_remove(0),
        value: vals[0],
        iters,
        evals,
        diameter,
        converged: diameter < opts.x_tol,
    }
}

/// `out = c + t (w - c)`.
fn along(c: &[f64], w: &[f64], t: f64, out: &mut [f64]) {
    for ((o, ci), wi) in out.iter_mut().zip(c).zip(w) {
        *o = ci + t * (wi - ci);
    }
}

fn sort_simplex(verts: &mut [Vec<f64>], vals: &mut [f64]) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let v2: Vec<Vec<f64>> = idx.iter().map(|&i| std::mem::take(&mut verts[i])).collect();
    let f2: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    for (slot, v) in verts.iter_mut().zip(v2) {
        *slot = v;
    }
    vals.copy_from_slice(&f2);
}

fn simplex_diameter(verts: &[Vec<f64>]) -> f64 {
    let best = &verts[0];
    verts[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(best)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
