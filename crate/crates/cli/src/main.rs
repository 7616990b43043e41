//! `spectral-forge`: build reflectionless potentials from spectra, check
//! them, and compare them with their semiclassical profiles.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "spectral-forge", version, about = "Reflectionless potentials with prescribed spectra")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a potential whose bound states are a given spectrum.
    Construct(ConstructArgs),
    /// Re-solve a potential and compare its levels with a target spectrum.
    Verify(VerifyArgs),
    /// Tabulate a WKB profile x(V).
    Wkb(WkbArgs),
    /// Rényi dimensions of a potential de-trended by a WKB profile.
    Fractal(FractalArgs),
    /// Write an eigenvalue list.
    Spectrum(SpectrumCmdArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    /// primes, zeta, harmonic, triangular or custom.
    #[arg(long, default_value = "primes")]
    pub kind: String,
    /// Number of eigenvalues.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated eigenvalues for `--kind custom`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Vec<f64>,
    /// Zeta-zero table (one ordinate per line) instead of the bundled one.
    #[arg(long)]
    pub zeros: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spectrum: SpectrumArgs,
    /// Asymptote V(±∞); default is midway to the next eigenvalue.
    #[arg(long, allow_hyphen_values = true)]
    pub vinf: Option<f64>,
    /// marchenko, dressing or both.
    #[arg(long, default_value = "marchenko")]
    pub method: String,
    /// Half-width of the grid (default: where the well has decayed).
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Grid spacing (default: about 0.15 / κ_max).
    #[arg(long)]
    pub dx: Option<f64>,
    /// Precision cap in bits for the determinant solves.
    #[arg(long)]
    pub bits: Option<u32>,
    /// Relative accuracy demanded of each determinant solve.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value = "potential.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// Potential CSV written by `construct`.
    #[arg(long)]
    pub potential: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub spectrum: SpectrumArgs,
    /// Levels to recover (default: all of the target spectrum).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Absolute eigenvalue tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value = "report.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WkbArgs {
    /// primes, primes-leading (first Möbius term only) or zeta.
    #[arg(long, default_value = "zeta")]
    pub kind: String,
    /// V(0); defaults to 1.5 for primes and 2π for zeta.
    #[arg(long, allow_hyphen_values = true)]
    pub e0: Option<f64>,
    /// Top of the table (default: just enough to reach `--x-cover`).
    #[arg(long)]
    pub v_max: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub x_cover: f64,
    #[arg(long, default_value_t = 2000)]
    pub table_size: usize,
    /// Möbius truncation for primes (default ⌊log₂ v_max⌋).
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long, default_value = "profile.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FractalArgs {
    #[arg(long)]
    pub potential: PathBuf,
    /// WKB profile CSV written by `wkb`.
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha_step: f64,
    /// 2d or marginal.
    #[arg(long, default_value = "2d")]
    pub variant: String,
    #[arg(long, default_value_t = spectral_forge::fractal::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = spectral_forge::fractal::DEFAULT_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub window_lo: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub window_hi: f64,
    #[arg(long, default_value = "renyi.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumCmdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spectrum: SpectrumArgs,
    #[arg(long, default_value = "spectrum.csv")]
    pub out: PathBuf,
}

fn run(argv: Vec<String>) -> anyhow::Result<()> {
    let argv = config::splice_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Verify(a) => commands::verify(a),
        Command::Wkb(a) => commands::wkb(a),
        Command::Fractal(a) => commands::fractal(a),
        Command::Spectrum(a) => commands::spectrum(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<spectral_forge::Error>())
                .is_some_and(|se| se.is_numerical());
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
