use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qsu11",
    version,
    about = "Verification suites for Hamiltonian-type operators of U_q(su(1,1))"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Unset options fall back to the config
/// file and then to the built-in defaults.
#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; `#` starts a comment.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Deformation parameter, 0 < q < 1.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Lowest weight, l > 0.
    #[arg(long, global = true)]
    pub l: Option<f64>,
    /// Phase of the rotated operators, in [0, 2 pi).
    #[arg(long, global = true)]
    pub psi: Option<f64>,
    /// Scale of the bilateral discrete measure.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Section size of the spectrum command.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Largest degree of the Gram matrices.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Report path; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tolerance of spectral checks.
    #[arg(long, global = true)]
    pub tol_spectrum: Option<f64>,
    /// Tolerance of Gram off-diagonal ratios.
    #[arg(long, global = true)]
    pub tol_gram: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of a finite section against the predicted spectrum.
    Spectrum {
        /// I1, I1_phi, I2, I3, I3_psi, I4 or classical.
        #[arg(long)]
        op: Option<String>,
    },
    /// Gram matrix of an orthogonality relation.
    Ortho {
        /// cont_qL_313, little_qL_510, qLaguerre_712, asc_dual_514 or fk_719.
        #[arg(long)]
        relation: Option<String>,
    },
    /// Limit-circle classification of the closure.
    Deficiency {
        /// I1, I1_phi, I2, I3, I3_psi or I4.
        #[arg(long)]
        op: Option<String>,
        /// Length of the off-diagonal sequence examined.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Convergence tables as q tends to 1.
    Limits {
        /// matrix, eigenvalue-map or polynomial; all three when absent.
        #[arg(long)]
        check: Option<String>,
        /// Exponent of the eigenvalue map.
        #[arg(long)]
        mu: Option<f64>,
        /// Comma-separated q values; defaults to 1 - 2^-j, j = 1..6.
        #[arg(long, value_delimiter = ',')]
        q_seq: Option<Vec<f64>>,
    },
    /// Runs one named check per structural claim and prints a summary.
    VerifyAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// One PASS/FAIL line per check.
    Text,
}
