use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

mod commands;
mod report;

#[derive(Parser, Debug)]
#[command(name = "capkit", version, about = "Dyadic Hausdorff content, Choquet integral and dimensional BMO experiments")]
pub struct Cli {
    /// Directory for reports and generated files.
    #[arg(long, global = true, default_value = "capkit-out")]
    pub out_dir: PathBuf,

    /// Seed for every random choice, recorded in the report.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Fixed summation and reduction order.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    pub deterministic: bool,

    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Dyadic content of a set, its optimal cover and the ball-content bracket.
    Content {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Cube `level:i0,i1,..` to restrict to; the root by default.
        #[arg(long)]
        cube: Option<String>,
        /// Print `lower,dyadic,upper` for the ball content instead of the value.
        #[arg(long)]
        bracket: bool,
    },
    /// Choquet integral of |f| with its layer cake.
    Choquet {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        cube: Option<String>,
    },
    /// Dyadic maximal function, with the weak-type check at level `t`.
    Maximal {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        t: Option<f64>,
        /// Packing constant for the weak-type bound; measured when absent.
        #[arg(long)]
        cprime: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal cubes with average above lambda.
    Czd {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        cube: Option<String>,
    },
    /// Covering selection for a family of cubes, one `level:i0,..` per line.
    Ov {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: f64,
        /// Function for the integral packing ratio over the selected subfamily.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Dyadic, p-type and shifted-lattice seminorms.
    Bmo {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        shifts: Option<usize>,
    },
    /// Exponential decay check on every cube, decay CSV for the root.
    Jn {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        cprime: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c_equiv: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Integral of exp(c'|u - c_Q|/||u||) against its bound.
    Expint {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        cprime: Option<f64>,
        /// c'/c, in (0, 1).
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        #[arg(long)]
        cube: Option<String>,
    },
    /// BMO^beta against BMO^alpha, with the power inequality on level sets.
    Nesting {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        cprime: Option<f64>,
    },
    /// Slice through the leading k axes and compare classical BMO with BMO^k.
    Restrict {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        k: usize,
        /// Leaf indices of the trailing axes, comma separated.
        #[arg(long, default_value = "")]
        offset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seminorm of phi(u) for a piecewise-linear phi with phi(0) = 0.
    Compose {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value = "")]
        breakpoints: String,
        #[arg(long)]
        slopes: String,
    },
    /// Self-similar measure from an IFS file.
    GenFractal {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Riesz potential of a measure at the leaf centers.
    Riesz {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seminorm of the potential over the Morrey norm of the measure.
    Adams {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Energy and Choquet norms of the potential along a resolution sweep.
    Diverge {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value = "6,8,10,12")]
        n_sweep: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Skip the dimension match, for control measures.
        #[arg(long)]
        any_dimension: bool,
    },
    /// Deterministic corpus file.
    Corpus {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// The acceptance battery.
    Suite {
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long)]
        criteria: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(rec) => {
            if rec.passed {
                ExitCode::SUCCESS
            } else {
                let failed: Vec<&str> = rec.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                eprintln!("failed checks: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
