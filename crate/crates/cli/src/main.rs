//! `quadhecke`: reproducible runs of the lattice-function Hecke computations.
//!
//! Exit status: 0 when every check in the run passed, 1 when a check failed,
//! 2 for configuration errors, 3 when a computation aborted.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Artifact;
use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("{context}: {source}")]
    Compute { context: String, source: quadhecke::Error },
    #[error("cannot write {path}: {reason}")]
    Output { path: String, reason: String },
}

impl CliError {
    pub fn config(key: &str, reason: String) -> Self {
        CliError::Config { key: key.to_string(), reason }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            _ => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "quadhecke", version, about = "Hecke eigenclasses from lattice functions on real quadratic fields")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand; each overrides the config key in brackets.
#[derive(Args, Debug)]
struct GlobalArgs {
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// squarefree d0 > 1 of K = Q(sqrt d0) [field.d0]
    #[arg(long, global = true)]
    d0: Option<i64>,
    /// coefficient field, `Fp:<p>` or `cyclotomic:<n>` [coeff]
    #[arg(long, global = true)]
    coeff: Option<String>,
    /// odd order of the class character [chi.order]
    #[arg(long, global = true)]
    chi_order: Option<u64>,
    /// character table file, lines `l kind exponents value_index` [chi.table]
    #[arg(long, global = true)]
    chi_table: Option<PathBuf>,
    /// conductor bound of a table character [chi.modulus]
    #[arg(long, global = true)]
    chi_modulus: Option<u64>,
    /// level M of the congruence subgroup [S.M]
    #[arg(long, global = true)]
    level_m: Option<u64>,
    /// level N before augmentation [S.N]
    #[arg(long, global = true)]
    level_n: Option<u64>,
    /// number of seeded samples for sampling checks [bounds.samples]
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// index bound for sampled lattices [bounds.index]
    #[arg(long, global = true)]
    index_bound: Option<u64>,
    /// seed for every sampled quantity [seed]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads, 0 for one per core [jobs]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// write the primary artifact here instead of stdout [output.path]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Arithmetic of K: unit, class group, level data and prime splitting.
    Field {
        /// list splitting of primes up to this bound [bounds.B]
        #[arg(long)]
        upto: Option<u64>,
    },
    /// The class character: its values on prime ideals and hypothesis checks.
    Character {
        /// list values on primes up to this bound [bounds.B]
        #[arg(long)]
        upto: Option<u64>,
    },
    /// A patch of the local tree at one prime as a DOT graph annotated with ψ.
    Tree {
        #[arg(long)]
        ell: u64,
        /// lattices per homothety fiber (2 for inert, 1 for split by default)
        #[arg(long)]
        n: Option<u8>,
        /// patch radius [bounds.radius]
        #[arg(long)]
        radius: Option<u32>,
    },
    /// Φ at one or more lattices given as `[[a,b],[c,d]]`.
    Phi {
        #[arg(long)]
        lattice: Vec<String>,
        /// also run the seeded invariance suite [bounds.samples, bounds.index]
        #[arg(long)]
        invariance: bool,
    },
    /// Orbit decomposition of T_l at a base lattice, with both pairing routes.
    Hecke {
        #[arg(long, conflicts_with = "all_ell_upto")]
        ell: Option<u64>,
        /// base lattice, O when omitted
        #[arg(long)]
        lattice: Option<String>,
        /// every usable prime up to this bound
        #[arg(long)]
        all_ell_upto: Option<u64>,
    },
    /// The attachment table: Hecke data against Frobenius data at every usable l.
    Attach {
        /// prime bound [bounds.B]
        #[arg(long)]
        upto: Option<u64>,
        /// panel size for consistency checks [bounds.panel]
        #[arg(long)]
        panel: Option<usize>,
        /// write the JSON twin here [output.json]
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// primary artifact format
        #[arg(long, value_parser = ["tsv", "json"], default_value = "tsv")]
        format: String,
    },
    /// The full acceptance suite on the fixed headline configuration.
    Selftest,
}

fn flag_overrides(cli: &Cli) -> Vec<(&'static str, String)> {
    let g = &cli.global;
    let mut v: Vec<(&'static str, String)> = Vec::new();
    let mut push = |key: &'static str, value: Option<String>| {
        if let Some(x) = value {
            v.push((key, x));
        }
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    push("field.d0", g.d0.map(|x| x.to_string()));
    push("coeff", g.coeff.clone());
    push("chi.order", g.chi_order.map(|x| x.to_string()));
    push("chi.table", path(&g.chi_table));
    push("chi.modulus", g.chi_modulus.map(|x| x.to_string()));
    push("S.M", g.level_m.map(|x| x.to_string()));
    push("S.N", g.level_n.map(|x| x.to_string()));
    push("bounds.samples", g.samples.map(|x| x.to_string()));
    push("bounds.index", g.index_bound.map(|x| x.to_string()));
    push("seed", g.seed.map(|x| x.to_string()));
    push("jobs", g.jobs.map(|x| x.to_string()));
    push("output.path", path(&g.out));
    match &cli.command {
        Command::Field { upto } | Command::Character { upto } => push("bounds.B", upto.map(|x| x.to_string())),
        Command::Tree { radius, .. } => push("bounds.radius", radius.map(|x| x.to_string())),
        Command::Attach { upto, panel, json_out, .. } => {
            push("bounds.B", upto.map(|x| x.to_string()));
            push("bounds.panel", panel.map(|x| x.to_string()));
            push("output.json", path(json_out));
        }
        _ => {}
    }
    v
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<Artifact, CliError> {
    match &cli.command {
        Command::Field { .. } => commands::field(cfg),
        Command::Character { .. } => commands::character(cfg),
        Command::Tree { ell, n, radius } => commands::tree(cfg, *ell, *n, *radius),
        Command::Phi { lattice, invariance } => commands::phi(cfg, lattice, *invariance),
        Command::Hecke { ell, lattice, all_ell_upto } => commands::hecke(cfg, *ell, lattice.as_deref(), *all_ell_upto),
        Command::Attach { format, .. } => commands::attach(cfg, format == "json"),
        Command::Selftest => Ok(commands::selftest(cfg)),
    }
}

fn write_to(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output { path: path.display().to_string(), reason: e.to_string() })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.global.config {
        Some(p) => config::parse_file(p)?,
        None => Vec::new(),
    };
    let cfg = RunConfig::resolve(file, flag_overrides(cli))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::config("jobs", e.to_string()))?;
    let artifact = pool.install(|| dispatch(cli, &cfg))?;
    match &cfg.output {
        Some(p) => write_to(p, &artifact.text)?,
        None => print!("{}", artifact.text),
    }
    if let (Some(p), Some(twin)) = (&cfg.json_output, &artifact.json_twin) {
        write_to(p, twin)?;
    }
    Ok(artifact.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
