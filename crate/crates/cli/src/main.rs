mod cache;
mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmnorm::modular::HPoint;
use cmnorm::{Discriminant, PrecisionContext};

use input::{parse_cm, parse_discriminant, parse_hpoint, parse_k, CmSpec};

/// Exit status: 0 when every assertion passes or the value is legally zero,
/// 1 on an assertion failure (a counterexample), 2 on a computational failure
/// (precision, tail budget, bad input).
#[derive(Parser, Debug)]
#[command(name = "cmnorm", version, about = "Norms of CM values of modular polynomials", long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 256)]
    pub precision_bits: usize,
    /// Base tolerance when snapping numbers to integers.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the output to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for cached class polynomials and j coefficients.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl Global {
    pub fn context(&self) -> Result<PrecisionContext, String> {
        let ctx = PrecisionContext {
            mantissa_bits: self.precision_bits,
            integer_tolerance: self.tolerance,
            ..Default::default()
        };
        ctx.validate().map_err(|e| e.to_string())?;
        Ok(ctx)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The class polynomial H_d.
    #[command(allow_negative_numbers = true)]
    Classpoly {
        #[arg(value_parser = parse_discriminant)]
        d: Discriminant,
    },
    /// Reduced forms of discriminant d with their CM points and j-values.
    #[command(allow_negative_numbers = true)]
    Cmpoints {
        #[arg(value_parser = parse_discriminant)]
        d: Discriminant,
    },
    /// phi_m(j(z1), j(z2)) through the Hecke product.
    #[command(name = "modpoly-eval", allow_negative_numbers = true)]
    ModpolyEval {
        m: u64,
        /// A discriminant, a form "a,b,c", or a complex number like "0.1+1.2i".
        #[arg(value_parser = parse_hpoint, allow_hyphen_values = true)]
        z1: HPoint,
        #[arg(value_parser = parse_hpoint, allow_hyphen_values = true)]
        z2: HPoint,
    },
    /// Exact norm of phi_m over the CM cycle of (d1, d2), with optional checks.
    #[command(allow_negative_numbers = true)]
    Norm {
        /// A discriminant (principal class) or a form "a,b,c".
        #[arg(value_parser = parse_cm, allow_hyphen_values = true)]
        d1: CmSpec,
        #[arg(value_parser = parse_cm, allow_hyphen_values = true)]
        d2: CmSpec,
        m: u64,
        #[command(flatten)]
        checks: Checks,
    },
    /// G_k^m at a pair of points or summed over a CM cycle.
    #[command(allow_negative_numbers = true)]
    Greens {
        #[arg(long, value_parser = parse_k)]
        k: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, value_parser = parse_hpoint, allow_hyphen_values = true, requires = "z2", conflicts_with = "cycle")]
        z1: Option<HPoint>,
        #[arg(long, value_parser = parse_hpoint, allow_hyphen_values = true, requires = "z1")]
        z2: Option<HPoint>,
        /// Sum over the cycle of the two discriminants.
        #[arg(long, num_args = 2, value_names = ["D1", "D2"], value_parser = parse_discriminant, allow_hyphen_values = true)]
        cycle: Option<Vec<Discriminant>>,
    },
    /// Norms and checks over a grid of discriminant pairs and m.
    Sweep {
        /// Smallest |d|.
        #[arg(long, default_value_t = 3)]
        dmin: i64,
        /// Largest |d|.
        #[arg(long)]
        dmax: i64,
        #[arg(long, default_value_t = 1)]
        mmin: u64,
        #[arg(long)]
        mmax: u64,
        /// Only coprime pairs of fundamental discriminants.
        #[arg(long)]
        coprime_fundamental: bool,
        /// Keep non-coprime pairs of different fields, reported as diagnostics.
        #[arg(long)]
        include_diagnostics: bool,
        #[command(flatten)]
        checks: Checks,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Checks {
    /// Check the lower bound at these epsilons (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    /// Check the chain inequality for k = 3, 5, 7.
    #[arg(long)]
    pub chain: bool,
    /// Factor the norm and report the smallest prime.
    #[arg(long)]
    pub factor: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let code = commands::run(&cli);
    ExitCode::from(code as u8)
}
