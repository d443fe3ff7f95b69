//! Synthetic networks and the benchmark sweep over datasets, treewidth
//! bounds and seeds.
//!
//! A bench spec is a TOML file:
//!
//! ```toml
//! treewidths = [2, 5, 8]    # default
//! seeds = 3                 # default; cells use seeds 0..seeds
//! time_limit = 60.0         # seconds per cell
//! budget = 10
//! solver_timeout = 2.0
//! max_parents = 3           # parent-set size limit of the score cache
//! oracle = false            # exhaustive backend, toy sizes only
//! # solver = "uwrmaxsat {wcnf}"
//!
//! [[datasets]]
//! name = "asia"
//! path = "asia.dat"         # relative to this file
//!
//! [[datasets]]
//! name = "syn50"
//! variables = 50
//! max_parents = 3
//! arity = 2
//! samples = 5000
//! seed = 1
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::engine::{run, EngineConfig, DEFAULT_BUDGET};
use crate::heuristic::greedy_initial;
use crate::model::Dag;
use crate::scoring::{build_cache, delta_bic, BicCategory, Dataset, ScoreCache};
use crate::solver::{SolverConfig, SolverMode, DEFAULT_SOLVER_TIMEOUT};

pub const DEFAULT_TREEWIDTHS: [usize; 3] = [2, 5, 8];
pub const DEFAULT_SEEDS: u64 = 3;
pub const DEFAULT_SAMPLES: usize = 5000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid bench spec: {0}")]
    Spec(String),
    #[error("invalid results table: {0}")]
    Table(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Random DAG over a random topological order: each variable draws up to
/// `max_parents` parents among its predecessors. Conditional tables are
/// Dirichlet(1, …, 1) per parent configuration and rows are forward-sampled.
pub fn generate_synthetic(
    n: usize,
    max_parents: usize,
    arity: usize,
    samples: usize,
    seed: u64,
) -> (Dataset, Dag) {
    assert!(n >= 1 && arity >= 1 && samples >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut parents = vec![Vec::new(); n];
    for (i, &v) in order.iter().enumerate() {
        let k = rng.random_range(0..=max_parents.min(i));
        let mut chosen: Vec<usize> = order[..i].choose_multiple(&mut rng, k).copied().collect();
        chosen.sort_unstable();
        parents[v] = chosen;
    }
    let dag = Dag::new(parents).expect("parents precede children in the order");

    let gamma = Gamma::new(1.0, 1.0).expect("valid shape");
    // cpt[v][config] is a cumulative distribution over the values of v
    let cpts: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|v| {
            let configs = arity.pow(dag.parents(v).len() as u32);
            (0..configs)
                .map(|_| {
                    let draws: Vec<f64> = (0..arity).map(|_| gamma.sample(&mut rng)).collect();
                    let total: f64 = draws.iter().sum();
                    draws
                        .iter()
                        .scan(0.0, |acc, d| {
                            *acc += d / total;
                            Some(*acc)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let rows: Vec<Vec<u32>> = (0..samples)
        .map(|_| {
            let mut row = vec![0u32; n];
            for &v in &order {
                let config = dag
                    .parents(v)
                    .iter()
                    .fold(0usize, |c, &p| c * arity + row[p] as usize);
                let u: f64 = rng.random();
                let cdf = &cpts[v][config];
                row[v] = cdf.iter().position(|&c| u < c).unwrap_or(arity - 1) as u32;
            }
            row
        })
        .collect();
    let data = Dataset::from_rows(vec![arity; n], &rows).expect("values within arity");
    (data, dag)
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DatasetSpec {
    File { name: String, path: PathBuf },
    Synthetic {
        name: String,
        variables: usize,
        max_parents: usize,
        arity: usize,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl DatasetSpec {
    pub fn name(&self) -> &str {
        match self {
            DatasetSpec::File { name, .. } | DatasetSpec::Synthetic { name, .. } => name,
        }
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_treewidths() -> Vec<usize> {
    DEFAULT_TREEWIDTHS.to_vec()
}

fn default_seeds() -> u64 {
    DEFAULT_SEEDS
}

fn default_time_limit() -> f64 {
    60.0
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_solver_timeout() -> f64 {
    DEFAULT_SOLVER_TIMEOUT.as_secs_f64()
}

fn default_max_parents() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default)]
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_treewidths")]
    pub treewidths: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Seconds per cell.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_solver_timeout")]
    pub solver_timeout: f64,
    #[serde(default = "default_max_parents")]
    pub max_parents: usize,
    #[serde(default)]
    pub solver: Option<String>,
    #[serde(default)]
    pub oracle: bool,
}

impl Default for BenchSpec {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl BenchSpec {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let spec: BenchSpec = toml::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.treewidths.contains(&0) {
            return Err(BenchError::Spec("treewidth bounds must be at least 1".into()));
        }
        if self.seeds == 0 {
            return Err(BenchError::Spec("seeds must be at least 1".into()));
        }
        if !(self.time_limit >= 0.0 && self.solver_timeout >= 0.0) {
            return Err(BenchError::Spec("time limits must be non-negative".into()));
        }
        if self.solver.is_some() && self.oracle {
            return Err(BenchError::Spec("solver and oracle are exclusive".into()));
        }
        Ok(())
    }

    fn solver_config(&self) -> SolverConfig {
        let mode = match (&self.solver, self.oracle) {
            (_, true) => SolverMode::Oracle,
            (Some(cmd), false) => SolverMode::External(cmd.clone()),
            (None, false) => SolverMode::Internal,
        };
        SolverConfig {
            mode,
            timeout: Duration::from_secs_f64(self.solver_timeout),
        }
    }
}

/// One cell of the sweep. Scores are kept at the six decimals written to
/// CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub treewidth: usize,
    pub seed: u64,
    /// `ok`, or the reason the cell failed.
    pub status: String,
    pub initial_score: f64,
    pub final_score: f64,
    pub delta_bic: f64,
    pub category: BicCategory,
    pub improvements: u64,
}

const HEADER: [&str; 9] = [
    "dataset",
    "treewidth",
    "seed",
    "status",
    "initial_score",
    "final_score",
    "delta_bic",
    "category",
    "improvements",
];

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl BenchRow {
    fn failed(dataset: &str, treewidth: usize, seed: u64, reason: String) -> Self {
        Self {
            dataset: dataset.to_string(),
            treewidth,
            seed,
            status: reason,
            initial_score: f64::NAN,
            final_score: f64::NAN,
            delta_bic: 0.0,
            category: BicCategory::Neutral,
            improvements: 0,
        }
    }
}

fn load_dataset(spec: &DatasetSpec, base: &Path) -> Result<Dataset, String> {
    match spec {
        DatasetSpec::File { path, .. } => {
            let path = base.join(path);
            let text = fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Dataset::parse(&text).map_err(|e| e.to_string())
        }
        &DatasetSpec::Synthetic {
            variables,
            max_parents,
            arity,
            samples,
            seed,
            ..
        } => {
            if variables == 0 || arity == 0 || samples == 0 {
                return Err("synthetic dataset needs variables, arity and samples ≥ 1".into());
            }
            Ok(generate_synthetic(variables, max_parents, arity, samples, seed).0)
        }
    }
}

fn run_cell(
    cache: &ScoreCache,
    spec: &BenchSpec,
    dataset: &str,
    treewidth: usize,
    seed: u64,
) -> BenchRow {
    let initial = greedy_initial(cache, treewidth, seed);
    let mut config = EngineConfig::new(treewidth);
    config.budget = spec.budget;
    config.time_limit = Duration::from_secs_f64(spec.time_limit);
    config.seed = seed;
    config.solver = spec.solver_config();
    match run(cache, &initial, &config) {
        Ok(state) => {
            let report = delta_bic(initial.score, state.score);
            BenchRow {
                dataset: dataset.to_string(),
                treewidth,
                seed,
                status: "ok".into(),
                initial_score: round6(initial.score),
                final_score: round6(state.score),
                delta_bic: round6(report.delta),
                category: report.category,
                improvements: state.improvements.len() as u64,
            }
        }
        Err(e) => BenchRow::failed(dataset, treewidth, seed, e.to_string()),
    }
}

/// Runs every (dataset, treewidth, seed) cell. Cells run in parallel; rows
/// come back in spec order. Failures become rows, never errors. Relative
/// dataset paths resolve against `base`.
pub fn run_bench(spec: &BenchSpec, base: &Path) -> Vec<BenchRow> {
    let caches: Vec<Result<ScoreCache, String>> = spec
        .datasets
        .par_iter()
        .map(|d| {
            let data = load_dataset(d, base)?;
            build_cache(&data, spec.max_parents).map_err(|e| e.to_string())
        })
        .collect();
    let cells: Vec<(usize, usize, u64)> = (0..spec.datasets.len())
        .flat_map(|d| {
            spec.treewidths
                .iter()
                .flat_map(move |&w| (0..spec.seeds).map(move |s| (d, w, s)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(d, w, s)| {
            let name = spec.datasets[d].name();
            match &caches[d] {
                Ok(cache) => run_cell(cache, spec, name, w, s),
                Err(e) => BenchRow::failed(name, w, s, e.clone()),
            }
        })
        .collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(HEADER)?;
    for r in rows {
        writer.write_record([
            r.dataset.clone(),
            r.treewidth.to_string(),
            r.seed.to_string(),
            r.status.clone(),
            format!("{:.6}", r.initial_score),
            format!("{:.6}", r.final_score),
            format!("{:.6}", r.delta_bic),
            r.category.label().to_string(),
            r.improvements.to_string(),
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_csv(rows: &[BenchRow]) -> String {
    let mut out = Vec::new();
    write_csv(rows, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("fields are UTF-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>, BenchError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    if reader.headers()?.iter().ne(HEADER) {
        return Err(BenchError::Table("unexpected header".into()));
    }
    let field = |rec: &csv::StringRecord, i: usize| rec.get(i).unwrap_or("").to_string();
    fn num<T: std::str::FromStr>(s: String, what: &str) -> Result<T, BenchError> {
        s.parse()
            .map_err(|_| BenchError::Table(format!("bad {what}: {s:?}")))
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let label = field(&rec, 7);
            Ok(BenchRow {
                dataset: field(&rec, 0),
                treewidth: num(field(&rec, 1), "treewidth")?,
                seed: num(field(&rec, 2), "seed")?,
                status: field(&rec, 3),
                initial_score: num(field(&rec, 4), "initial score")?,
                final_score: num(field(&rec, 5), "final score")?,
                delta_bic: num(field(&rec, 6), "delta")?,
                category: BicCategory::from_label(&label)
                    .ok_or_else(|| BenchError::Table(format!("bad category: {label:?}")))?,
                improvements: num(field(&rec, 8), "improvements")?,
            })
        })
        .collect()
}
