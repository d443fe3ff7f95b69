//! Command-line front end: `learn` improves a bounded-treewidth network,
//! `bench` runs a sweep described by a TOML file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use twbn_core::bench::{run_bench, write_csv, BenchSpec};
use twbn_core::encoding::encode;
use twbn_core::engine::{global_verify, run, EngineConfig, EngineState, DEFAULT_BUDGET};
use twbn_core::heuristic::{greedy_initial, import_initial, write_dag, InitialSolution};
use twbn_core::model::write_pace_td;
use twbn_core::scoring::{build_cache, delta_bic, parse_jkl, Dataset, ScoreCache};
use twbn_core::solver::{SolverConfig, SolverMode};
use twbn_core::subinstance::{select_subtree, Subinstance};

#[derive(Debug, Parser)]
#[command(name = "twbn-slim", version, about = "Anytime bounded-treewidth Bayesian network learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Improve a heuristic network by repeated local MaxSAT solving.
    Learn(LearnArgs),
    /// Run a benchmark sweep and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).multiple(true))]
pub struct LearnArgs {
    /// Data file: names line, arities line, then one row per sample.
    #[arg(long, group = "input")]
    pub data: Option<PathBuf>,
    /// Precomputed score cache in .jkl format; takes precedence over --data
    /// for scores.
    #[arg(long, group = "input")]
    pub jkl: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub treewidth: u64,
    /// Most bag vertices per subinstance.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// External MaxSAT solver command; `{wcnf}` is replaced by the instance
    /// path, which is appended if absent.
    #[arg(long, conflicts_with = "oracle")]
    pub solver: Option<String>,
    /// Seconds per solver call.
    #[arg(long, default_value_t = 2.0)]
    pub solver_timeout: f64,
    /// Total seconds for the improvement loop.
    #[arg(long, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub initial_dag: Option<PathBuf>,
    #[arg(long, requires = "initial_dag")]
    pub initial_td: Option<PathBuf>,
    #[arg(long)]
    pub out_dag: Option<PathBuf>,
    #[arg(long)]
    pub out_td: Option<PathBuf>,
    /// Print the ΔBIC report and one `IMPROVE <seconds> <score>` line per
    /// accepted merge.
    #[arg(long)]
    pub report: bool,
    /// Run the full global check after every merge.
    #[arg(long)]
    pub verify: bool,
    /// Exhaustive backend for toy instances.
    #[arg(long)]
    pub oracle: bool,
    /// Write the first subinstance drawn from the initial solution.
    #[arg(long)]
    pub dump_subinstance: Option<PathBuf>,
    /// Write the WCNF of that subinstance.
    #[arg(long)]
    pub dump_wcnf: Option<PathBuf>,
    /// Parent-set size limit when scoring from --data.
    #[arg(long, default_value_t = 3)]
    pub max_parents: usize,
    /// Subinstances solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

impl LearnArgs {
    pub fn engine_config(&self) -> Result<EngineConfig> {
        let mut config = EngineConfig::new(self.treewidth as usize);
        config.budget = self.budget;
        config.time_limit = seconds(self.time_limit, "--time-limit")?;
        config.seed = self.seed;
        config.verify_each_merge = self.verify;
        config.workers = self.workers;
        config.solver = SolverConfig {
            mode: match (&self.solver, self.oracle) {
                (_, true) => SolverMode::Oracle,
                (Some(cmd), false) => SolverMode::External(cmd.clone()),
                (None, false) => SolverMode::Internal,
            },
            timeout: seconds(self.solver_timeout, "--solver-timeout")?,
        };
        Ok(config)
    }
}

fn seconds(value: f64, flag: &str) -> Result<Duration> {
    Duration::try_from_secs_f64(value).with_context(|| format!("{flag} must be a non-negative number"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_inputs(args: &LearnArgs) -> Result<(ScoreCache, Option<Dataset>)> {
    let data = match &args.data {
        Some(path) => Some(
            Dataset::parse(&read(path)?).with_context(|| format!("in {}", path.display()))?,
        ),
        None => None,
    };
    let cache = match (&args.jkl, &data) {
        (Some(path), _) => {
            parse_jkl(&read(path)?).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(data)) => build_cache(data, args.max_parents)?,
        (None, None) => bail!("one of --data or --jkl is required"),
    };
    if let Some(data) = &data {
        if data.var_count() != cache.var_count() {
            bail!(
                "data has {} variables but the score cache has {}",
                data.var_count(),
                cache.var_count()
            );
        }
    }
    Ok((cache, data))
}

fn initial_solution(
    args: &LearnArgs,
    cache: &mut ScoreCache,
    data: Option<&Dataset>,
) -> Result<InitialSolution> {
    let w = args.treewidth as usize;
    match &args.initial_dag {
        Some(dag_path) => {
            let td_text = args.initial_td.as_deref().map(read).transpose()?;
            Ok(import_initial(&read(dag_path)?, td_text.as_deref(), cache, data, w, args.seed)?)
        }
        None => Ok(greedy_initial(cache, w, args.seed)),
    }
}

fn dump_first_subinstance(
    args: &LearnArgs,
    cache: &ScoreCache,
    initial: &InitialSolution,
    config: &EngineConfig,
) -> Result<()> {
    let selected = select_subtree(&initial.td, config.budget, config.seed)?;
    let grid = cache.quantized_around(initial.dag.parent_sets(), config.weight_scale);
    let sub = Subinstance::build(&grid, &initial.dag, &initial.td, &selected)?;
    if let Some(path) = &args.dump_subinstance {
        write(path, &sub.dump())?;
    }
    if let Some(path) = &args.dump_wcnf {
        let problem = encode(&sub, config.treewidth, config.weight_scale)?;
        write(path, &problem.to_wcnf().to_string())?;
    }
    Ok(())
}

/// Runs `learn`, writing the summary and optional report to `out`.
pub fn learn(args: &LearnArgs, out: &mut impl Write) -> Result<EngineState> {
    let config = args.engine_config()?;
    let (mut cache, data) = load_inputs(args)?;
    let initial = initial_solution(args, &mut cache, data.as_ref())?;
    if args.dump_subinstance.is_some() || args.dump_wcnf.is_some() {
        dump_first_subinstance(args, &cache, &initial, &config)?;
    }
    let state = run(&cache, &initial, &config)?;

    let final_check = global_verify(&state.dag, &state.td, &cache, config.treewidth);
    if !final_check.ok() {
        bail!("final state failed the global check: {final_check}");
    }
    if let Some(path) = &args.out_dag {
        write(path, &write_dag(&state.dag, &cache))?;
    }
    if let Some(path) = &args.out_td {
        write(path, &write_pace_td(&state.td))?;
    }

    writeln!(out, "initial score {:.6}", state.initial_score)?;
    writeln!(out, "final score {:.6}", state.score)?;
    writeln!(out, "treewidth {} (bound {})", state.td.width(), config.treewidth)?;
    let s = &state.stats;
    writeln!(
        out,
        "iterations {} solver calls {} accepted {} rejected {} unknown {} errors {}",
        s.iterations, s.solver_calls, s.accepted, s.rejected, s.unknown, s.solver_errors
    )?;
    if args.report {
        writeln!(out, "{}", delta_bic(state.initial_score, state.score))?;
        for imp in &state.improvements {
            writeln!(out, "IMPROVE {:.3} {:.6}", imp.elapsed.as_secs_f64(), imp.score)?;
        }
    }
    Ok(state)
}

/// Runs `bench`: one CSV row per (dataset, treewidth, seed) cell.
pub fn bench(args: &BenchArgs) -> Result<usize> {
    let spec = BenchSpec::load(&args.spec)?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let rows = run_bench(&spec, base);
    let file = fs::File::create(&args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    write_csv(&rows, std::io::BufWriter::new(file))?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn learn_args(extra: &[&str]) -> LearnArgs {
        let argv = ["twbn-slim", "learn", "--jkl", "x.jkl", "--treewidth", "2"];
        let cli = Cli::try_parse_from(argv.iter().chain(extra)).unwrap();
        match cli.command {
            Command::Learn(a) => a,
            Command::Bench(_) => unreachable!(),
        }
    }

    #[test]
    fn defaults() {
        let args = learn_args(&[]);
        assert_eq!(args.budget, 10);
        assert_eq!(args.solver_timeout, 2.0);
        let config = args.engine_config().unwrap();
        assert_eq!(config.solver.timeout, Duration::from_secs(2));
        assert_eq!(config.solver.mode, SolverMode::Internal);
    }

    #[test]
    fn argument_rules() {
        let base = ["twbn-slim", "learn", "--treewidth", "2"];
        assert!(Cli::try_parse_from(base).is_err());
        assert!(Cli::try_parse_from(["twbn-slim", "learn", "--data", "d"]).is_err());
        let with = |extra: &[&str]| Cli::try_parse_from(base.iter().chain(extra));
        assert!(with(&["--data", "d", "--jkl", "j"]).is_ok());
        assert!(with(&["--data", "d", "--oracle", "--solver", "s"]).is_err());
        assert!(with(&["--data", "d", "--initial-td", "t"]).is_err());
        assert!(with(&["--data", "d", "--treewidth", "0"]).is_err());
        assert!(learn_args(&["--time-limit=-1"]).engine_config().is_err());
        assert_eq!(
            learn_args(&["--solver", "x {wcnf}"]).engine_config().unwrap().solver.mode,
            SolverMode::External("x {wcnf}".into())
        );
    }
}
