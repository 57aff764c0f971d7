//! `solgroup` command-line front end.
//!
//! Exit status: 0 success or a positive answer, 1 a negative answer (no
//! classical solution, invalid picture, stuck reduction, hypothesis not met),
//! 2 usage or input errors.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use solgroup::Modulus;

#[derive(Parser, Debug)]
#[command(name = "solgroup", version, about = "Certificates for linear-system games over Z_p")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_modulus(s: &str) -> Result<Modulus, String> {
    s.parse::<Modulus>().map_err(|e| e.to_string())
}

/// An input file or a built-in instance, with optional overrides.
#[derive(Args, Debug, Clone)]
pub struct Source {
    /// System, graph or picture JSON.
    pub file: Option<PathBuf>,
    /// Built-in instance: K33, K5, D17, HEAWOOD, K44.
    #[arg(long)]
    pub instance: Option<String>,
    /// Modulus: an integer >= 2 or `inf`.
    #[arg(short = 'p', value_parser = parse_modulus)]
    pub p: Option<Modulus>,
    /// Right-hand side / colouring as a comma-separated list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<i64>>,
}

#[derive(Args, Debug, Clone)]
pub struct PictureInput {
    /// Picture JSON.
    pub file: PathBuf,
    /// Replace the picture's modulus.
    #[arg(short = 'p', value_parser = parse_modulus)]
    pub p: Option<Modulus>,
}

#[derive(Args, Debug, Clone)]
pub struct ExportArgs {
    /// Graph, cover or picture JSON.
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub instance: Option<String>,
    /// With --instance: export the instance's figure picture instead of its graph.
    #[arg(long)]
    pub picture: bool,
    #[arg(short = 'p', value_parser = parse_modulus)]
    pub p: Option<Modulus>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Option<Vec<i64>>,
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether Ax = b has a solution over Z_p.
    Solve(Source),
    /// Berge girth and minimum degree of H(A).
    Girth {
        file: Option<PathBuf>,
        #[arg(long)]
        instance: Option<String>,
    },
    /// Check the girth/degree hypothesis that forces |J| = p.
    CheckTheorem {
        file: Option<PathBuf>,
        #[arg(long)]
        instance: Option<String>,
        #[arg(short = 'p', value_parser = parse_modulus)]
        p: Option<Modulus>,
    },
    /// Verify a picture and report its phase.
    VerifyPicture(PictureInput),
    /// Phase of a picture.
    Phase(PictureInput),
    /// Reduce a picture with the move engine.
    Reduce(PictureInput),
    /// Build the picture of a planar cover.
    Cover2picture {
        file: PathBuf,
        #[arg(short = 'p', value_parser = parse_modulus, default_value = "inf")]
        p: Modulus,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Option<Vec<i64>>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Deduce facts about |J| from certificates, the theorem and operator solutions.
    Order {
        #[command(flatten)]
        source: Source,
        /// Extra picture certificates.
        #[arg(long = "picture")]
        pictures: Vec<PathBuf>,
        /// Extra operator-solution assignments.
        #[arg(long = "assignment")]
        assignments: Vec<PathBuf>,
        /// Print full provenance chains.
        #[arg(long)]
        explain: bool,
    },
    /// List built-in instances, or dump one.
    Gallery {
        name: Option<String>,
        /// Dump the figure picture.
        #[arg(long, conflicts_with_all = ["cover", "graph"])]
        picture: bool,
        /// Dump the figure as a cover of the base graph.
        #[arg(long, conflicts_with = "graph")]
        cover: bool,
        /// Dump the base graph.
        #[arg(long)]
        graph: bool,
        #[arg(short = 'p', value_parser = parse_modulus, default_value = "inf")]
        p: Modulus,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b: Option<Vec<i64>>,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Graphviz DOT export.
    ExportDot(ExportArgs),
    /// TikZ export.
    ExportTikz(ExportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
