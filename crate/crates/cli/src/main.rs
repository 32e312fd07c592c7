//! `twistfix`: batch front end for the cocycle, twisted algebra, proper action,
//! deformation and torus analyses. Reports are JSON with sorted keys.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "twistfix", version, about = "Finite-scale analyses of twisted group algebras and proper actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 2-cocycles on finite abelian groups
    #[command(subcommand)]
    Cocycle(CocycleCmd),
    /// Twisted group algebras
    #[command(subcommand)]
    Twisted(TwistedCmd),
    /// Proper actions of finite groups on matrix algebras
    #[command(subcommand)]
    Proper(ProperCmd),
    /// Deformed products on sampled functions
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Sequence modules over Z^k and torus examples
    #[command(subcommand)]
    Torus(TorusCmd),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Seed for every randomized step
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct CocycleInput {
    /// Group such as Z4xZ4
    #[arg(long)]
    pub group: Option<String>,
    /// Bicharacter matrix such as "[[0,0],[1/4,0]]"
    #[arg(long)]
    pub matrix: Option<String>,
    /// JSON cocycle spec with "group" and "matrix" or "table"
    #[arg(long)]
    pub spec: Option<String>,
}

#[derive(Subcommand)]
enum CocycleCmd {
    /// Validate a cocycle and report its symmetrizer and block structure
    Analyze {
        #[command(flatten)]
        input: CocycleInput,
        #[command(flatten)]
        common: Common,
    },
    /// Decide similarity of two bicharacter cocycles on one group
    Similar {
        #[arg(long)]
        group: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Also search for an explicit similarity (|G| <= 16)
        #[arg(long)]
        search: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum TwistedCmd {
    /// Wedderburn blocks of the regular image
    Decompose {
        #[command(flatten)]
        input: CocycleInput,
        #[command(flatten)]
        common: Common,
    },
    /// Dimension of the commutant of the right regular representation
    Fixedpoints {
        #[command(flatten)]
        input: CocycleInput,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ProperCmd {
    /// Run every finite check on a preset or an action file
    Analyze {
        #[arg(long, conflicts_with = "action")]
        preset: Option<String>,
        /// JSON action spec
        #[arg(long)]
        action: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze the tensor product of two presets
    Tensor {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze a preset inflated along a surjection from a bigger group
    Inflate {
        #[arg(long, default_value = "swap")]
        preset: String,
        #[arg(long, default_value = "Z4")]
        group: String,
        /// Images of the big group's generators, e.g. "1" or "1,0;0,1"
        #[arg(long, default_value = "1")]
        images: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
pub struct GridArgs {
    /// Dimension (1 or 2)
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Skew entry J_12 = θ
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub theta: f64,
    /// Samples per axis
    #[arg(long = "N", default_value_t = 128)]
    pub samples: usize,
    /// Period of the torus model
    #[arg(long = "L", default_value_t = 16.0)]
    pub period: f64,
}

#[derive(Subcommand)]
enum DeformCmd {
    /// Compute f ×_J g and write the samples as CSV
    Product {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "gaussian:1.0")]
        f: String,
        #[arg(long, default_value = "gaussian:2.0")]
        g: String,
        /// Compare with the iterated quadrature
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-4)]
        oracle_tol: f64,
        /// CSV output for the product samples
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON report path (stdout otherwise)
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// *-algebra, plane-wave, degeneration and oracle checks
    Check {
        #[command(flatten)]
        grid: GridArgs,
        /// Sample profiles (repeatable)
        #[arg(long = "sample")]
        profiles: Vec<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        oracle_tol: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum TorusCmd {
    /// Smooth bumps inside an open subset of the torus
    Subset {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// full, disk:r, strip:a,b or a bitmap file
        #[arg(long, default_value = "full")]
        mask: String,
        #[arg(long, default_value_t = 12)]
        bumps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sections of C ⊕ L_m and their fiberwise endomorphism algebras
    Bundle {
        /// Twist(s), comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        m: Vec<i64>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        sections: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn configure_threads() {
    if let Ok(v) = std::env::var("TWISTFIX_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    configure_threads();
    commands::run(cli.command)
}
