use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use folbridge::parse::parse_problem;
use folbridge::pipeline::{self, Config, Outcome, Stage};
use folbridge::smt::{emit_smtlib, extract_fol, SolverRegistry};
use folbridge::state::ProofState;
use folbridge::Problem;

#[derive(Parser)]
#[command(name = "folbridge", version, about = "Reduce goals over inductive types to first-order SMT problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Run every transformation and call the solver.
    Prove { file: PathBuf },
    /// Print the transformed proof state.
    Scope { file: PathBuf },
    /// Write the SMT-LIB script.
    Emit {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List generated hypotheses with their justification and verdict.
    Audit { file: PathBuf },
    /// Run a subset of the transformations.
    Transform {
        file: PathBuf,
        /// Comma-separated stages: adt, def, expand, fix, match, mono.
        #[arg(long, value_delimiter = ',', required = true)]
        only: Vec<Stage>,
        /// Keep the order given in --only.
        #[arg(long)]
        ordered: bool,
    },
}

#[derive(Args)]
struct Opts {
    /// Solver name from the configuration, or a path; a comma list runs a portfolio.
    #[arg(long, global = true, value_delimiter = ',')]
    solver: Vec<String>,
    /// Solver timeout in seconds.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    #[arg(long, global = true)]
    native_adt: bool,
    #[arg(long, global = true)]
    exhaustiveness: bool,
    /// Also instantiate polymorphic hypotheses, not only lemmas.
    #[arg(long, global = true)]
    mono_from_context: bool,
    #[arg(long, global = true)]
    fuel: Option<u64>,
    #[arg(long, global = true)]
    split_depth: Option<usize>,
    /// Print the state after every stage.
    #[arg(long, global = true)]
    trace: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solver configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Opts {
    fn pipeline_config(&self, need_solver: bool) -> Result<Config> {
        let mut cfg = Config {
            seed: self.seed,
            exhaustiveness: self.exhaustiveness,
            mono_from_context: self.mono_from_context,
            native_adt: self.native_adt,
            ..Config::default()
        };
        if let Some(f) = self.fuel {
            cfg.fuel = f;
        }
        if let Some(d) = self.split_depth {
            cfg.split_depth = d;
        }
        if need_solver {
            let reg = SolverRegistry::from_env(self.config.as_deref())?;
            cfg.solvers = if self.solver.is_empty() {
                vec![reg.default_solver()?]
            } else {
                self.solver.iter().map(|s| reg.get(s)).collect::<Result<_, _>>()?
            };
            if let Some(t) = self.timeout {
                if !(t >= 0.0 && t.is_finite()) {
                    bail!("invalid timeout {t}");
                }
                cfg = cfg.with_timeout(Duration::from_secs_f64(t));
            }
        }
        Ok(cfg)
    }
}

fn load(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_problem(&text).with_context(|| format!("{}", path.display()))
}

fn print_scoped(scoped: &pipeline::Scoped, trace: bool) {
    if trace {
        print!("{}", scoped.trace.render());
    } else {
        print!("{}", scoped.state.render());
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Prove { file } => {
            let problem = load(file)?;
            let cfg = opts.pipeline_config(true)?;
            let report = pipeline::prove(&problem, &cfg)?;
            if opts.trace {
                print!("{}", report.scoped.trace.render());
            }
            for (name, why) in &report.fol.skipped {
                eprintln!("skipped {name}: {why}");
            }
            match &report.outcome {
                Outcome::Proved => {
                    println!("Proved (unsat)");
                    Ok(ExitCode::SUCCESS)
                }
                Outcome::NotProved(why) => {
                    println!("Not proved ({why})");
                    Ok(ExitCode::from(1))
                }
                Outcome::Unknown(why) => {
                    println!("Unknown ({why})");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Scope { file } => {
            let problem = load(file)?;
            let cfg = opts.pipeline_config(false)?;
            let scoped = pipeline::scope(ProofState::from_problem(&problem), &cfg)?;
            print_scoped(&scoped, opts.trace);
            Ok(ExitCode::SUCCESS)
        }
        Command::Emit { file, output } => {
            let problem = load(file)?;
            let cfg = opts.pipeline_config(false)?;
            let scoped = pipeline::scope(ProofState::from_problem(&problem), &cfg)?;
            let fol = extract_fol(&scoped.state)?;
            for (name, why) in &fol.skipped {
                eprintln!("skipped {name}: {why}");
            }
            let script = emit_smtlib(&fol, cfg.native_adt);
            match output {
                Some(p) => std::fs::write(p, script).with_context(|| format!("cannot write {}", p.display()))?,
                None => print!("{script}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit { file } => {
            let problem = load(file)?;
            let cfg = opts.pipeline_config(false)?;
            let scoped = pipeline::scope(ProofState::from_problem(&problem), &cfg)?;
            if opts.trace {
                print!("{}", scoped.trace.render());
            }
            for (name, stage, verdict) in &scoped.verdicts {
                let kind = scoped.state.hypothesis(name).map(|h| h.justification.kind_name()).unwrap_or("?");
                println!("{name}\t{stage}\t{kind}\t{verdict}");
            }
            let bad = scoped.verdicts.iter().filter(|(_, _, v)| !v.is_valid()).count();
            Ok(if bad == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Transform { file, only, ordered } => {
            let problem = load(file)?;
            let cfg = opts.pipeline_config(false)?;
            let stages = pipeline::select_stages(only, *ordered);
            let scoped = pipeline::run_stages(ProofState::from_problem(&problem), &stages, &cfg)?;
            print_scoped(&scoped, opts.trace);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
