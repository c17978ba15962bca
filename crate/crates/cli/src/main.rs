//! Command-line front end for the experiments.
//!
//! Settings come from the experiment defaults, then an optional
//! `key = value` file (`--config`), then flags. Exit status is 0 on
//! success, 1 when the solver fails and 2 for configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tidefem::experiment::{self, ExperimentConfig, ExperimentKind, ExperimentReport};
use tidefem::{Error, Mesh};

#[derive(Parser)]
#[command(name = "tidefem", version, about = "Damped shallow-water experiments with mixed finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unforced energy decay for each damping law.
    Damping(Settings),
    /// Difference energy of two forced runs from different random states.
    Sync(Settings),
    /// Manufactured-solution convergence over several meshes.
    Converge(Settings),
    /// Decay-theorem constants and the closed-form envelope.
    Envelope(Settings),
    /// Print the unit-square mesh with `n` cells per side.
    Mesh {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
}

/// Flags mirroring the configuration keys.
#[derive(Args, Default)]
struct Settings {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` override; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    dt_factor: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    coriolis: Option<f64>,
    #[arg(long)]
    depth: Option<f64>,
    /// Comma-separated laws: none, linear, power:P, power_lin:P.
    #[arg(long)]
    damping: Option<String>,
    #[arg(long)]
    coeff: Option<f64>,
    /// Comma-separated seeds.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    fit_lo: Option<f64>,
    #[arg(long)]
    fit_hi: Option<f64>,
    #[arg(long)]
    fit_floor: Option<f64>,
    #[arg(long)]
    max_shift: Option<f64>,
    #[arg(long)]
    plateau_from: Option<f64>,
    #[arg(long)]
    refine_dt: Option<bool>,
    /// Comma-separated mesh sizes.
    #[arg(long)]
    meshes: Option<String>,
    #[arg(long)]
    poincare: Option<f64>,
    #[arg(long)]
    e0: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    newton_max_iter: Option<usize>,
    /// direct or cg.
    #[arg(long)]
    linear_solver: Option<String>,
    /// Output directory (default `out/<experiment>`).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    no_plot: bool,
}

impl Settings {
    fn overrides(&self) -> Result<Vec<(String, String)>, Error> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        let s = |v: &Option<f64>| v.map(|x| x.to_string());
        put("n", self.n.map(|x| x.to_string()));
        put("order", self.order.map(|x| x.to_string()));
        put("dt", s(&self.dt));
        put("dt_factor", s(&self.dt_factor));
        put("t_final", s(&self.t_final));
        put("epsilon", s(&self.epsilon));
        put("beta", s(&self.beta));
        put("coriolis", s(&self.coriolis));
        put("depth", s(&self.depth));
        put("damping", self.damping.clone());
        put("coeff", s(&self.coeff));
        put("seeds", self.seeds.clone());
        put("fit_lo", s(&self.fit_lo));
        put("fit_hi", s(&self.fit_hi));
        put("fit_floor", s(&self.fit_floor));
        put("max_shift", s(&self.max_shift));
        put("plateau_from", s(&self.plateau_from));
        put("refine_dt", self.refine_dt.map(|x| x.to_string()));
        put("meshes", self.meshes.clone());
        put("poincare", s(&self.poincare));
        put("e0", s(&self.e0));
        put("samples", self.samples.map(|x| x.to_string()));
        put("newton_tol", s(&self.newton_tol));
        put("newton_max_iter", self.newton_max_iter.map(|x| x.to_string()));
        put("linear_solver", self.linear_solver.clone());
        put("output", self.output.as_ref().map(|p| p.display().to_string()));
        if self.no_plot {
            put("plot", Some("false".into()));
        }
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{item}'")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(pairs)
    }

    fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::from_text(kind, &text)?
            }
            None => ExperimentConfig::defaults(kind),
        };
        for (k, v) in self.overrides()? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_solver_failure() || matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

fn run_experiment(kind: ExperimentKind, settings: &Settings) -> Result<(), Error> {
    let cfg = settings.resolve(kind)?;
    eprintln!("running {kind} ...");
    let report: ExperimentReport = experiment::run(&cfg)?;
    let dir = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    for (k, v) in report.summary() {
        println!("{k} = {v}");
    }
    for path in report.write_outputs(&dir)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Damping(s) => run_experiment(ExperimentKind::Damping, s),
        Command::Sync(s) => run_experiment(ExperimentKind::Sync, s),
        Command::Converge(s) => run_experiment(ExperimentKind::Converge, s),
        Command::Envelope(s) => run_experiment(ExperimentKind::Envelope, s),
        Command::Mesh { n } => Mesh::unit_square(*n)
            .map_err(Error::from)
            .and_then(|m| m.write_text(std::io::stdout().lock()).map_err(Error::from)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
