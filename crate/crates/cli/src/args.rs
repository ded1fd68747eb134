use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "posmap", version, about = "Positivity analysis for the tau_{n,k} family of maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form spectrum of (C + C^T)/2 and the c_min bounds.
    Spectrum(SpectrumArgs),
    /// Classify even (n, k) pairs by the analytic sufficient conditions.
    Classify(ClassifyArgs),
    /// Largest subtraction weight keeping the optimised map positive.
    LambdaMax(LambdaMaxArgs),
    /// Sweep lambda_max over the Bloch sphere for gcd(n, k) = 3.
    Scan(ScanArgs),
    /// Summarise a finished scan checkpoint.
    Report(ReportArgs),
    /// Sample the bilinear lower bound for the B and C blocks.
    VerifyLemma(VerifyLemmaArgs),
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Single pair; requires --k. Without it every even pair up to --n-max is printed.
    #[arg(long, requires = "k")]
    pub n: Option<usize>,
    #[arg(long, requires = "n")]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, default_value_t = 30)]
    pub n_max: usize,
    /// Restarts for the numerical quadratic-form search (with --with-thm2).
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub with_thm2: bool,
    /// Also write `n,k,category` rows to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LambdaMaxArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["phi", "theta"])]
    pub alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["phi", "theta"])]
    pub alpha_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["phi", "theta"])]
    pub beta_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["phi", "theta"])]
    pub beta_im: Option<f64>,
    /// Bloch azimuth; alpha = cos(theta/2), beta = e^{i phi} sin(theta/2).
    #[arg(long, allow_hyphen_values = true, requires = "theta")]
    pub phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "phi")]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 24)]
    pub phi_res: usize,
    #[arg(long, default_value_t = 13)]
    pub theta_res: usize,
    #[arg(long, default_value_t = 25)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid state is rewritten here after every point and resumed from on rerun.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub export_csv: Option<PathBuf>,
    /// Stop after this many work items (the checkpoint keeps the rest pending).
    #[arg(long)]
    pub max_points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Tolerance for the range and symmetry checks.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    /// Accepted for uniformity; the report carries the seed stored in the grid.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct VerifyLemmaArgs {
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
