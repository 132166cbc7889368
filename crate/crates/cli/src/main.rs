//! `qobs`: command-line access to lattices, Stone spectra, observable
//! functions, matrix algebras, finite topologies, contexts and presheaves.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use observables::vn::Tolerances;
use observables::Error;

#[derive(Debug, Parser)]
#[command(
    name = "qobs",
    version,
    about = "Observable functions on finite lattices and small matrix algebras"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Primary input file or corpus name.
    #[arg(short, long, global = true)]
    pub input: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for randomized runs.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Tolerance override such as `rec=1e-8`; repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VAL")]
    pub tol: Vec<String>,
    /// Cap on enumerated dual ideals or open sets.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Write a Graphviz diagram to this file.
    #[arg(long, global = true, value_name = "OUT")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite lattices.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Dual ideals and quasipoints.
    #[command(subcommand)]
    Stone(StoneCmd),
    /// Spectral families in a finite lattice.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Observable functions on the Stone spectrum.
    #[command(subcommand)]
    Obs(ObsCmd),
    /// Hermitian matrices and subalgebras.
    #[command(subcommand)]
    Vn(VnCmd),
    /// Finite topological spaces and the real-line demos.
    #[command(subcommand)]
    Classical(ClassicalCmd),
    /// Contexts and global sections.
    #[command(subcommand)]
    Context(ContextCmd),
    /// Presheaves on finite lattices.
    #[command(subcommand)]
    Presheaf(PresheafCmd),
    /// Runs every acceptance property.
    Suite,
}

#[derive(Debug, Subcommand)]
pub enum LatticeCmd {
    /// Distributivity, orthomodularity, atoms and center.
    Check,
    /// Writes the built-in corpus and fixtures as JSON.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
    /// Names of the built-in lattices.
    List,
}

#[derive(Debug, Subcommand)]
pub enum StoneCmd {
    Quasipoints {
        #[arg(long)]
        lattice: Option<String>,
    },
    DualIdeals {
        #[arg(long)]
        lattice: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SpectralCmd {
    /// Steps and spectrum of a family.
    Show {
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// The value `E_λ`.
    Eval {
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ObsCmd {
    /// `f_E` at one dual ideal, given by a filter base like `a,1`.
    Eval {
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        ideal: String,
    },
    /// The observable table of a spectral family.
    Table {
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Recovers the spectral family of a table.
    Reconstruct {
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Per-axiom verdicts with witnesses.
    Check {
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RestrictionMap {
    Rho,
    Sigma,
}

#[derive(Debug, Subcommand)]
pub enum VnCmd {
    SpectralFamily {
        op: Option<PathBuf>,
    },
    /// Spectral order between two operators.
    Order {
        a: PathBuf,
        b: PathBuf,
    },
    /// Coarse-graining of an operator into a subalgebra.
    Restrict {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        op: PathBuf,
        #[arg(long, value_enum)]
        map: RestrictionMap,
    },
    /// Core and support of a projection.
    Core {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        proj: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ClassicalCmd {
    /// The spectral family of a point function and the function it induces back.
    Induce {
        #[arg(long)]
        space: Option<String>,
        #[arg(long = "fn")]
        function: PathBuf,
    },
    CheckContinuity {
        #[arg(long)]
        space: Option<String>,
        #[arg(long = "fn")]
        function: PathBuf,
    },
    /// Traces a real-line family on a grid `lo:hi:step`.
    Demo {
        #[arg(long)]
        family: String,
        #[arg(long, allow_hyphen_values = true, default_value = "-2:2:0.25")]
        grid: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ContextCmd {
    /// Checks a family of per-context tables and glues it.
    Glue {
        #[arg(long)]
        diagram: Option<String>,
        #[arg(long)]
        sections: PathBuf,
    },
    /// The global section of an operator.
    FromOperator {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        diagram: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresheafCmd {
    /// Presheaf and sheaf conditions.
    Check,
    /// Stalks over the quasipoints and the associated sheaf.
    Sheafify,
}

pub struct Runtime {
    pub global: Global,
    pub tol: Tolerances,
    pub loader: observables::io::Loader,
}

fn tolerances(overrides: &[String]) -> Result<Tolerances, Error> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("tolerance `{item}` is not KEY=VAL")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("tolerance `{item}` has no numeric value")))?;
        tol.set(key.trim(), value)?;
    }
    Ok(tol)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match tolerances(&cli.global.tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let loader = observables::io::Loader::from_env().with_cap(cli.global.cap);
    let runtime = Runtime {
        global: cli.global,
        tol,
        loader,
    };
    match commands::run(&runtime, &cli.command) {
        Ok(report) => {
            let text = report.render(runtime.global.format == Format::Json);
            if !text.is_empty() {
                println!("{text}");
            }
            if let (Some(path), Some(dot)) = (&runtime.global.dot, &report.dot) {
                if let Err(e) = std::fs::write(path, dot) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides_parse() {
        let tol = tolerances(&["rec=1e-8".into(), "cluster = 1e-6".into()]).unwrap();
        assert_eq!(tol.rec, 1e-8);
        assert_eq!(tol.cluster, 1e-6);
        assert!(tolerances(&["rec".into()]).is_err());
        assert!(tolerances(&["bogus=1".into()]).is_err());
    }

    #[test]
    fn arguments_are_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
