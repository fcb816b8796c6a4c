use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynlap::assembly::Method;
use dynlap::experiment::{self, ExperimentConfig, RunReport, PRESETS};
use dynlap::Error;

#[derive(Parser)]
#[command(name = "dynlap", version, about = "Finite-time coherent sets and their linear response")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve, predict, re-solve and export (mesh → eigs → response → level sets).
    Run {
        #[command(flatten)]
        common: Common,
        /// Print the full report as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Run CG and TO on the same mesh and report their differences.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Check (u̇, λ̇) against central differences of re-solved eigenproblems.
    ValidateFd {
        #[command(flatten)]
        common: Common,
        /// Offsets for the central differences.
        #[arg(long, value_delimiter = ',')]
        fd_eps: Option<Vec<f64>>,
    },
    /// Write the mesh (and the TO image mesh) without solving.
    MeshDump {
        #[command(flatten)]
        common: Common,
    },
    /// Print a preset configuration as JSON.
    Preset { name: String },
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: standard-map or double-gyre.
    #[arg(long)]
    preset: Option<String>,
    /// Discretization: cg or to.
    #[arg(long)]
    method: Option<Method>,
    /// Parameter offsets for prediction, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eps: Option<Vec<f64>>,
    /// Cells per direction (overrides both nx and ny).
    #[arg(long)]
    cells: Option<usize>,
    /// Skip the re-solve at each eps.
    #[arg(long)]
    no_true: bool,
    /// Skip the Cheeger line search.
    #[arg(long)]
    no_line_search: bool,
    /// Levels in the line search.
    #[arg(long)]
    grid_size: Option<usize>,
    /// Accepted level curves: any or contractible.
    #[arg(long)]
    topology: Option<String>,
    /// Line-search range: positive or full.
    #[arg(long)]
    range: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn from_name<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T, Error> {
    serde_json::from_value(serde_json::Value::String(s.to_owned()))
        .map_err(|_| Error::Config(format!("unknown {what} `{s}`")))
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::from_path(path)?,
            (None, Some(name)) => experiment::preset(name)?,
            (None, None) => {
                return Err(Error::Config(format!(
                    "pass --config FILE or --preset NAME ({})",
                    PRESETS.join(", ")
                )))
            }
        };
        if let Some(m) = self.method {
            c.method = m;
        }
        if let Some(eps) = &self.eps {
            c.eps = eps.clone();
        }
        if let Some(n) = self.cells {
            c.mesh.nx = n;
            c.mesh.ny = n;
        }
        if self.no_true {
            c.solve_true = false;
        }
        if self.no_line_search {
            c.line_search.enabled = false;
        }
        if let Some(g) = self.grid_size {
            c.line_search.grid_size = g;
        }
        if let Some(t) = &self.topology {
            c.line_search.topology = from_name("topology", t)?;
        }
        if let Some(r) = &self.range {
            c.line_search.range = from_name("range", r)?;
        }
        if let Some(out) = &self.out {
            c.output = Some(out.clone());
        }
        Ok(c)
    }

    fn init_threads(&self) {
        if let Some(n) = self.threads {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not set the thread count: {e}");
            }
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

fn print_summary(r: &RunReport) {
    println!("model      {} ({:?}, {} dofs)", r.model, r.method, r.n_dofs);
    println!("lambda0    {:.6}  (index {}, multiplicity {})", r.lambda0, r.target, r.multiplicity);
    println!("lambda_dot {:.6}  (residual {:.1e})", r.lambda_dot, r.response_residual);
    for p in &r.perturbations {
        println!(
            "eps {:<6} lambda_pred {:.6}  lambda_true {}  rel_err {}  rel_l2 {}",
            p.eps,
            p.lambda_pred,
            opt(p.lambda_true),
            opt(p.lambda_rel_error),
            opt(p.rel_l2_error)
        );
    }
    if let Some(ls) = &r.level_set {
        println!("c*         {:.6}  (h* {:.6})", ls.c_star, ls.h_star);
    }
    let total: f64 = r.timings.values().sum();
    println!("time       {total:.2}s");
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { common, json } => {
            common.init_threads();
            let report = experiment::run(&common.config()?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print_summary(&report);
            }
        }
        Command::Compare { common } => {
            common.init_threads();
            let r = experiment::compare_methods(&common.config()?)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::ValidateFd { common, fd_eps } => {
            common.init_threads();
            let mut c = common.config()?;
            if let Some(e) = fd_eps {
                c.fd_eps = e;
            }
            c.validate()?;
            let r = experiment::run_validate_fd(&c)?;
            println!("lambda_dot {:.10}", r.lambda_dot);
            println!("{:>10} {:>16} {:>12} {:>12}", "eps", "lambda_dot_fd", "rel_err", "u_dot_err");
            for row in &r.rows {
                println!(
                    "{:>10.1e} {:>16.10} {:>12.3e} {:>12.3e}",
                    row.eps, row.lambda_dot_fd, row.lambda_rel_error, row.u_dot_error
                );
            }
        }
        Command::MeshDump { common } => {
            let c = common.config()?;
            let dir = c
                .output
                .clone()
                .ok_or_else(|| Error::Config("mesh-dump needs --out".into()))?;
            let mesh = experiment::mesh_dump(&c, &dir)?;
            println!(
                "{} nodes, {} dofs, {} triangles -> {}",
                mesh.nodes().len(),
                mesh.n_dofs(),
                mesh.triangles().len(),
                dir.display()
            );
        }
        Command::Preset { name } => {
            println!("{}", serde_json::to_string_pretty(&experiment::preset(&name)?)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Json(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
