use std::fs;
use std::io::{self, Write};

use num_complex::Complex64;
use posmap::bloch_scan::{bloch_coeffs, conjecture_report, scan, ScanGrid};
use posmap::circulant::c_spectrum;
use posmap::conditions::{classify_all, ClassifyOptions};
use posmap::lemma::verify_lemma;
use posmap::map_kernel::{default_coeffs, gcd};
use posmap::positivity::{lambda_max, SearchSettings};
use posmap::{Error, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::{ClassifyArgs, Command, LambdaMaxArgs, ReportArgs, ScanArgs, SpectrumArgs, VerifyLemmaArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
        }
    }
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } => 2,
        _ => 1,
    }
}

pub fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Spectrum(a) => spectrum(a),
        Command::Classify(a) => classify(a),
        Command::LambdaMax(a) => lambda_max_cmd(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Report(a) => report(a),
        Command::VerifyLemma(a) => lemma(a),
    }
}

/// Writes `value` as one JSON line, adding a top-level `seed` field.
fn emit<T: Serialize>(out: &mut impl Write, value: &T, seed: u64) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.entry("seed").or_insert(Value::from(seed));
    }
    serde_json::to_writer(&mut *out, &v)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Result<Status> {
    let pairs = match (a.n, a.k) {
        (Some(n), Some(k)) => vec![(n, k)],
        _ => posmap::conditions::even_pairs(a.n_max),
    };
    let mut out = io::stdout().lock();
    let mut status = Status::Ok;
    for (n, k) in pairs {
        let report = c_spectrum(n, k)?;
        if report.bounds_ok == Some(false) {
            log::error!("c_min bounds violated for ({n},{k})");
            status = Status::Failed;
        }
        emit(&mut out, &report, a.seed)?;
    }
    Ok(status)
}

fn classify(a: ClassifyArgs) -> Result<Status> {
    let opts = ClassifyOptions {
        with_thm2: a.with_thm2,
        budget: a.budget,
        seed: a.seed,
    };
    let records = classify_all(a.n_max, &opts)?;
    let mut out = io::stdout().lock();
    let mut status = Status::Ok;
    for r in &records {
        if (r.cor1 || r.cor2) && !r.prop {
            log::error!("({},{}) satisfies a corollary but not the proposition", r.n, r.k);
            status = Status::Failed;
        }
        emit(&mut out, r, a.seed)?;
    }
    if let Some(path) = &a.csv {
        let mut csv = String::from("n,k,category\n");
        for r in &records {
            csv.push_str(&format!("{},{},{}\n", r.n, r.k, r.category));
        }
        fs::write(path, csv)?;
    }
    Ok(status)
}

fn coefficients(a: &LambdaMaxArgs, d: usize) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "gcd({}, {}) = 1: the map admits no subtraction",
            a.n, a.k
        )));
    }
    if let (Some(phi), Some(theta)) = (a.phi, a.theta) {
        if d != 3 {
            return Err(Error::InvalidInput(format!("--phi/--theta need gcd(n, k) = 3, got {d}")));
        }
        let (alpha, beta) = bloch_coeffs(phi, theta);
        return Ok(vec![alpha, beta]);
    }
    let given = [a.alpha_re, a.alpha_im, a.beta_re, a.beta_im];
    if given.iter().all(Option::is_none) {
        return Ok(default_coeffs(d));
    }
    let alpha = Complex64::new(a.alpha_re.unwrap_or(0.0), a.alpha_im.unwrap_or(0.0));
    let beta = Complex64::new(a.beta_re.unwrap_or(0.0), a.beta_im.unwrap_or(0.0));
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d - 1];
    coeffs[0] = alpha;
    if d == 2 {
        if beta.norm() > 0.0 {
            return Err(Error::InvalidInput("gcd(n, k) = 2 has a single coefficient; drop --beta-*".into()));
        }
    } else {
        coeffs[1] = beta;
    }
    let norm = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidInput("coefficients must be finite and not all zero".into()));
    }
    if (norm - 1.0).abs() > 1e-12 {
        log::info!("normalising coefficients (norm was {norm})");
        coeffs.iter_mut().for_each(|z| *z /= norm);
    }
    Ok(coeffs)
}

fn lambda_max_cmd(a: LambdaMaxArgs) -> Result<Status> {
    if a.k == 0 || a.k >= a.n {
        return Err(Error::InvalidInput(format!("need 1 <= k <= n-1, got n={}, k={}", a.n, a.k)));
    }
    let coeffs = coefficients(&a, gcd(a.n, a.k))?;
    let settings = SearchSettings {
        restarts: a.restarts,
        seed: a.seed,
        ..Default::default()
    };
    let r = lambda_max(a.n, a.k, &coeffs, &settings)?;
    if !r.converged {
        log::warn!("lambda_max search stopped after {} iterations without converging", r.iterations);
    }
    emit(&mut io::stdout().lock(), &r, a.seed)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct ScanSummary {
    n: usize,
    k: usize,
    phi_res: usize,
    theta_res: usize,
    restarts: usize,
    seed: u64,
    evaluated: usize,
    remaining: usize,
    nonconverged: usize,
    complete: bool,
}

fn scan_cmd(a: ScanArgs) -> Result<Status> {
    let settings = SearchSettings {
        restarts: a.restarts,
        seed: a.seed,
        ..Default::default()
    };
    let mut grid = match &a.checkpoint {
        Some(path) => ScanGrid::resume_or_new(path, a.n, a.k, a.phi_res, a.theta_res, settings)?,
        None => ScanGrid::new(a.n, a.k, a.phi_res, a.theta_res, settings)?,
    };
    let pending = grid.pending();
    if pending < grid.lambda_grid.len() {
        log::info!("resuming: {pending} points pending");
    }
    let stats = scan(&mut grid, a.checkpoint.as_deref(), a.max_points)?;
    if let Some(path) = &a.export_csv {
        if grid.is_complete() {
            grid.export_csv(path)?;
        } else {
            log::warn!("grid incomplete, CSV not written");
        }
    }
    let nonconverged = grid.nonconverged();
    if !nonconverged.is_empty() {
        log::warn!("non-converged grid points (phi index, theta index): {nonconverged:?}");
    }
    let summary = ScanSummary {
        n: a.n,
        k: a.k,
        phi_res: a.phi_res,
        theta_res: a.theta_res,
        restarts: a.restarts,
        seed: a.seed,
        evaluated: stats.evaluated,
        remaining: stats.remaining,
        nonconverged: nonconverged.len(),
        complete: grid.is_complete(),
    };
    emit(&mut io::stdout().lock(), &summary, a.seed)?;
    Ok(Status::Ok)
}

fn report(a: ReportArgs) -> Result<Status> {
    let grid = ScanGrid::load(&a.checkpoint)?;
    if let Some(seed) = a.seed {
        if seed != grid.settings.seed {
            log::warn!("--seed {seed} ignored; the grid was computed with seed {}", grid.settings.seed);
        }
    }
    let r = conjecture_report(&grid, a.tol)?;
    let ok = r.range_ok && r.symmetry_defect <= a.tol;
    emit(&mut io::stdout().lock(), &r, grid.settings.seed)?;
    Ok(if ok { Status::Ok } else { Status::Failed })
}

fn lemma(a: VerifyLemmaArgs) -> Result<Status> {
    if a.n_max < 4 {
        return Err(Error::InvalidInput(format!("--n-max must be at least 4, got {}", a.n_max)));
    }
    if a.samples == 0 {
        return Err(Error::InvalidInput("--samples must be at least 1".into()));
    }
    let reports = verify_lemma(a.n_max, a.samples, a.seed)?;
    let mut out = io::stdout().lock();
    for r in &reports {
        emit(&mut out, r, a.seed)?;
    }
    Ok(if reports.iter().all(|r| r.ok) {
        Status::Ok
    } else {
        Status::Failed
    })
}
