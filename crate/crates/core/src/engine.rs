//! The anytime improvement loop and the checks guarding every merge.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::encoding::{decode, encode, extended_moral_graph, DecodedLocal};
use crate::heuristic::InitialSolution;
use crate::model::{
    is_acyclic, moralize, topological_sort, validate_td, Dag, ModelError, TdViolation,
    TreeDecomposition,
};
use crate::scoring::{dag_score, ScoreCache, ScoreError};
use crate::solver::{solve, SolveStatus, SolverConfig};
use crate::subinstance::{
    external_path_sources, select_subtree_with, Subinstance, SubinstanceError,
};

pub const DEFAULT_BUDGET: usize = 10;
pub const DEFAULT_WEIGHT_SCALE: u64 = 1000;

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub treewidth: usize,
    pub budget: usize,
    /// Soft weights are offsets times this factor, rounded.
    pub weight_scale: u64,
    pub time_limit: Duration,
    pub max_iterations: Option<u64>,
    pub seed: u64,
    /// Run the full global check after every merge, not only at the end.
    pub verify_each_merge: bool,
    pub solver: SolverConfig,
    /// Subinstances solved concurrently per round; 1 disables the pipeline.
    pub workers: usize,
}

impl EngineConfig {
    pub fn new(treewidth: usize) -> Self {
        Self {
            treewidth,
            budget: DEFAULT_BUDGET,
            weight_scale: DEFAULT_WEIGHT_SCALE,
            time_limit: Duration::from_secs(60),
            max_iterations: None,
            seed: 0,
            verify_each_merge: false,
            solver: SolverConfig::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial solution is invalid: {0}")]
    InvalidInitial(GlobalReport),
    #[error("weight scale must be at least 1")]
    ZeroScale,
}

/// A condition of a local solution that does not hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalViolation {
    LocalCycle,
    WidthExceeded { width: usize, bound: usize },
    NotADecomposition(Vec<TdViolation>),
    /// A vertex with external parents has no outside bag holding its family.
    NoWitnessBag { vertex: usize },
    VirtualCycle,
}

impl fmt::Display for LocalViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalViolation::LocalCycle => write!(f, "local DAG has a cycle"),
            LocalViolation::WidthExceeded { width, bound } => {
                write!(f, "local decomposition width {width} exceeds {bound}")
            }
            LocalViolation::NotADecomposition(vs) => {
                write!(f, "local decomposition invalid: {vs:?}")
            }
            LocalViolation::NoWitnessBag { vertex } => {
                write!(f, "no outside bag holds the family of vertex {vertex}")
            }
            LocalViolation::VirtualCycle => write!(f, "local arcs and virtual arcs form a cycle"),
        }
    }
}

/// Checks a decoded local solution against the global state, independently
/// of the encoding: local acyclicity, the local decomposition against the
/// local moral graph plus virtual edges, outside witness bags for external
/// parents, and acyclicity together with the virtual arcs recomputed from
/// the new DAG.
pub fn verify_local(
    sub: &Subinstance,
    dag: &Dag,
    td: &TreeDecomposition,
    local: &DecodedLocal,
    treewidth: usize,
) -> Vec<LocalViolation> {
    let n = sub.len();
    let mut violations = Vec::new();
    let local_parents: Vec<Vec<usize>> = (0..n)
        .map(|v| sub.menus[v][local.choice[v]].local_parents.clone())
        .collect();
    if !is_acyclic(&local_parents) {
        violations.push(LocalViolation::LocalCycle);
    }

    let g = extended_moral_graph(sub, &local.choice);
    match validate_td(&local.td, &g) {
        Ok(vs) if vs.is_empty() => {}
        Ok(vs) => violations.push(LocalViolation::NotADecomposition(vs)),
        Err(e) => violations.push(LocalViolation::NotADecomposition(vec![TdViolation::NotATree(
            e.to_string(),
        )])),
    }
    if local.td.width() > treewidth {
        violations.push(LocalViolation::WidthExceeded {
            width: local.td.width(),
            bound: treewidth,
        });
    }

    let selected: BTreeSet<usize> = sub.selected_bags.iter().copied().collect();
    let mut in_window = vec![false; dag.vertex_count()];
    for &v in &sub.vertices {
        in_window[v] = true;
    }
    let mut new_parents = dag.parent_sets().to_vec();
    for (v, &e) in local.choice.iter().enumerate() {
        let gv = sub.vertices[v];
        let ps = &sub.menus[v][e].parents;
        new_parents[gv] = ps.clone();
        if ps.iter().any(|&p| !in_window[p]) {
            let witnessed = (0..td.bag_count()).any(|t| {
                !selected.contains(&t)
                    && td.bag(t).contains(&gv)
                    && ps.iter().all(|p| td.bag(t).contains(p))
            });
            if !witnessed {
                violations.push(LocalViolation::NoWitnessBag { vertex: gv });
            }
        }
    }

    // virtual arcs from paths through external vertices of the new DAG
    let mut arcs = local_parents;
    for (v, &gv) in sub.vertices.iter().enumerate() {
        for &x in new_parents[gv].iter().filter(|&&p| !in_window[p]) {
            for u in external_path_sources(&new_parents, &in_window, x) {
                arcs[v].push(sub.vertices.binary_search(&u).expect("window vertex"));
            }
        }
    }
    if arcs.iter().enumerate().any(|(v, ps)| ps.contains(&v)) || topological_sort(&arcs).is_none() {
        violations.push(LocalViolation::VirtualCycle);
    }
    violations
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("merged DAG is cyclic")]
    Cyclic,
    #[error("no new bag contains the boundary {0:?} of an outside component")]
    NoHostBag(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct MergeResult {
    pub dag: Dag,
    pub td: TreeDecomposition,
}

/// Replaces the window's parent sets and splices the local decomposition
/// into the outside components: each component keeps its bags and is
/// reattached by its old attach bag to a new bag containing its boundary.
pub fn merge(
    dag: &Dag,
    td: &TreeDecomposition,
    sub: &Subinstance,
    local: &DecodedLocal,
) -> Result<MergeResult, MergeError> {
    let new_dag = dag
        .with_parents(&local.parent_sets(sub))
        .map_err(|_| MergeError::Cyclic)?;

    let mut bags: Vec<Vec<usize>> = local
        .td
        .bags()
        .iter()
        .map(|b| b.iter().map(|&v| sub.vertices[v]).collect())
        .collect();
    let mut edges: Vec<(usize, usize)> = local.td.edges().to_vec();
    let mut new_id = vec![usize::MAX; td.bag_count()];
    for c in &sub.components {
        for &b in &c.bags {
            new_id[b] = bags.len();
            bags.push(td.bag(b).to_vec());
        }
    }
    for &(a, b) in td.edges() {
        if new_id[a] != usize::MAX && new_id[b] != usize::MAX {
            edges.push((new_id[a], new_id[b]));
        }
    }
    for c in &sub.components {
        let host = (0..local.td.bag_count())
            .find(|&s| c.boundary.iter().all(|v| bags[s].contains(v)))
            .ok_or_else(|| MergeError::NoHostBag(c.boundary.clone()))?;
        edges.push((host, new_id[c.attach_bag]));
    }
    let td = TreeDecomposition::new(dag.vertex_count(), bags, edges)
        .expect("bags hold valid vertices")
        .simplify();
    Ok(MergeResult { dag: new_dag, td })
}

/// Result of a full independent check of a global solution.
#[derive(Clone, Debug)]
pub struct GlobalReport {
    pub acyclic: bool,
    pub violations: Vec<TdViolation>,
    pub width: usize,
    pub treewidth: usize,
    pub score: Option<f64>,
}

impl GlobalReport {
    pub fn ok(&self) -> bool {
        self.acyclic && self.violations.is_empty() && self.width <= self.treewidth && self.score.is_some()
    }
}

impl fmt::Display for GlobalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "acyclic {}, width {} (bound {}), {} decomposition violations",
            self.acyclic,
            self.width,
            self.treewidth,
            self.violations.len()
        )?;
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        match self.score {
            Some(s) => write!(f, ", score {s}"),
            None => write!(f, ", score unavailable"),
        }
    }
}

pub fn global_verify(
    dag: &Dag,
    td: &TreeDecomposition,
    cache: &ScoreCache,
    treewidth: usize,
) -> GlobalReport {
    let acyclic = is_acyclic(dag.parent_sets());
    let violations = match validate_td(td, &moralize(dag)) {
        Ok(vs) => vs,
        Err(e) => vec![TdViolation::NotATree(e.to_string())],
    };
    GlobalReport {
        acyclic,
        violations,
        width: td.width(),
        treewidth,
        score: dag_score(cache, dag).ok(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Improvement {
    pub iteration: u64,
    pub elapsed: Duration,
    /// `K − K_0` in weight units.
    pub weight_gain: u64,
    pub score: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub iterations: u64,
    pub solver_calls: u64,
    pub accepted: u64,
    /// Skipped because no menu choice could beat the incumbent.
    pub bound_skips: u64,
    pub no_gain: u64,
    pub unknown: u64,
    pub solver_errors: u64,
    pub rejected: u64,
    pub stale: u64,
}

#[derive(Clone, Debug)]
pub struct EngineState {
    pub dag: Dag,
    pub td: TreeDecomposition,
    /// Score under the caller's cache.
    pub score: f64,
    pub initial_score: f64,
    pub iteration: u64,
    pub elapsed: Duration,
    pub improvements: Vec<Improvement>,
    pub stats: EngineStats,
}

/// Everything known about one accepted merge, before the state moves on.
pub struct MergeEvent<'a> {
    pub iteration: u64,
    pub sub: &'a Subinstance,
    pub before: (&'a Dag, &'a TreeDecomposition),
    pub after: (&'a Dag, &'a TreeDecomposition),
    pub weight: u64,
    pub incumbent_weight: u64,
    pub weight_scale: u64,
    /// The rounded cache the subinstance was built from: each variable's
    /// grid passes through its score in `before`.
    pub grid_cache: &'a ScoreCache,
    pub cache: &'a ScoreCache,
}

/// Runs the loop without observing merges.
pub fn run(
    cache: &ScoreCache,
    initial: &InitialSolution,
    config: &EngineConfig,
) -> Result<EngineState, EngineError> {
    run_with_observer(cache, initial, config, |_| {})
}

enum Attempt {
    Improved {
        sub: Subinstance,
        local: DecodedLocal,
        weight: u64,
        incumbent_weight: u64,
    },
    BoundSkip,
    NoGain,
    Unknown,
    Failed,
}

/// Draws subinstances until the time limit (or iteration cap), solving each
/// and merging strict improvements. The state never leaves the feasible
/// region: any failed check discards the iteration. The solver sees scores
/// rounded to `1/weight_scale` steps anchored at the incumbent's parent
/// sets, re-anchored after every merge.
pub fn run_with_observer(
    cache: &ScoreCache,
    initial: &InitialSolution,
    config: &EngineConfig,
    mut observer: impl FnMut(&MergeEvent<'_>),
) -> Result<EngineState, EngineError> {
    let start = Instant::now();
    if config.weight_scale == 0 {
        return Err(EngineError::ZeroScale);
    }
    let mut grid = cache.quantized_around(initial.dag.parent_sets(), config.weight_scale);
    let report = global_verify(&initial.dag, &initial.td, cache, config.treewidth);
    if !report.ok() {
        return Err(EngineError::InvalidInitial(report));
    }
    let score = dag_score(cache, &initial.dag)?;
    let mut state = EngineState {
        dag: initial.dag.clone(),
        td: initial.td.clone(),
        score,
        initial_score: score,
        iteration: 0,
        elapsed: Duration::ZERO,
        improvements: Vec::new(),
        stats: EngineStats::default(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let workers = config.workers.max(1);

    'outer: loop {
        let elapsed = start.elapsed();
        if elapsed >= config.time_limit
            || config.max_iterations.is_some_and(|m| state.iteration >= m)
        {
            break;
        }
        let remaining = config.time_limit - elapsed;
        let round = match config.max_iterations {
            Some(m) => workers.min((m - state.iteration) as usize),
            None => workers,
        };
        let seeds: Vec<u64> = (0..round).map(|_| rng.random()).collect();
        let attempts: Vec<Result<Attempt, SubinstanceError>> = if round == 1 {
            vec![attempt(&grid, &state, config, seeds[0], remaining)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = seeds
                    .iter()
                    .map(|&seed| {
                        let (grid, state) = (&grid, &state);
                        scope.spawn(move || attempt(grid, state, config, seed, remaining))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };
        let base_version = state.improvements.len();
        for result in attempts {
            state.iteration += 1;
            state.stats.iterations += 1;
            let attempt = match result {
                Ok(a) => a,
                Err(SubinstanceError::BudgetTooSmall | SubinstanceError::NoBags) => {
                    log::warn!("no bag fits the budget; stopping");
                    break 'outer;
                }
                Err(e) => {
                    log::warn!("iteration {}: {e}", state.iteration);
                    state.stats.rejected += 1;
                    continue;
                }
            };
            let (sub, local, weight, incumbent_weight) = match attempt {
                Attempt::Improved {
                    sub,
                    local,
                    weight,
                    incumbent_weight,
                } => (sub, local, weight, incumbent_weight),
                Attempt::BoundSkip => {
                    state.stats.bound_skips += 1;
                    continue;
                }
                Attempt::NoGain => {
                    state.stats.solver_calls += 1;
                    state.stats.no_gain += 1;
                    continue;
                }
                Attempt::Unknown => {
                    state.stats.solver_calls += 1;
                    state.stats.unknown += 1;
                    continue;
                }
                Attempt::Failed => {
                    state.stats.solver_calls += 1;
                    state.stats.solver_errors += 1;
                    continue;
                }
            };
            state.stats.solver_calls += 1;
            if state.improvements.len() != base_version {
                // built against a state that has since changed
                state.stats.stale += 1;
                continue;
            }
            let violations = verify_local(&sub, &state.dag, &state.td, &local, config.treewidth);
            if !violations.is_empty() {
                log::warn!(
                    "iteration {}: local solution rejected: {}",
                    state.iteration,
                    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
                );
                state.stats.rejected += 1;
                continue;
            }
            let merged = match merge(&state.dag, &state.td, &sub, &local) {
                Ok(m) => m,
                Err(e) => {
                    log::warn!("iteration {}: merge failed: {e}", state.iteration);
                    state.stats.rejected += 1;
                    continue;
                }
            };
            if config.verify_each_merge {
                let report = global_verify(&merged.dag, &merged.td, cache, config.treewidth);
                if !report.ok() {
                    log::warn!("iteration {}: global check failed: {report}", state.iteration);
                    state.stats.rejected += 1;
                    continue;
                }
            }
            let Ok(new_score) = dag_score(cache, &merged.dag) else {
                state.stats.rejected += 1;
                continue;
            };
            if new_score < state.score {
                // a rounding artefact: better on the grid, worse in truth
                log::debug!("iteration {}: grid gain is a true loss", state.iteration);
                state.stats.rejected += 1;
                continue;
            }
            observer(&MergeEvent {
                iteration: state.iteration,
                sub: &sub,
                before: (&state.dag, &state.td),
                after: (&merged.dag, &merged.td),
                weight,
                incumbent_weight,
                weight_scale: config.weight_scale,
                grid_cache: &grid,
                cache,
            });
            for &v in &sub.vertices {
                if merged.dag.parents(v) != state.dag.parents(v) {
                    grid.requantize(cache, v, merged.dag.parents(v), config.weight_scale);
                }
            }
            state.dag = merged.dag;
            state.td = merged.td;
            state.score = new_score;
            state.stats.accepted += 1;
            state.improvements.push(Improvement {
                iteration: state.iteration,
                elapsed: start.elapsed(),
                weight_gain: weight - incumbent_weight,
                score: new_score,
            });
            log::info!(
                "iteration {}: score {:.6} (+{} weight units)",
                state.iteration,
                new_score,
                weight - incumbent_weight
            );
        }
    }
    state.elapsed = start.elapsed();
    Ok(state)
}

fn attempt(
    grid: &ScoreCache,
    state: &EngineState,
    config: &EngineConfig,
    seed: u64,
    remaining: Duration,
) -> Result<Attempt, SubinstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let selected = select_subtree_with(&state.td, config.budget, &mut rng)?;
    let sub = Subinstance::build(grid, &state.dag, &state.td, &selected)?;
    let problem = match encode(&sub, config.treewidth, config.weight_scale) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("encoding failed: {e}");
            return Ok(Attempt::Failed);
        }
    };
    if problem.upper_bound() <= problem.incumbent_weight {
        return Ok(Attempt::BoundSkip);
    }
    let timeout = config.solver.timeout.min(remaining);
    let outcome = solve(&problem, &sub, &config.solver, timeout);
    let Some(model) = outcome.model else {
        return Ok(match outcome.status {
            SolveStatus::Error => {
                log::warn!("solver error: {}", outcome.message);
                Attempt::Failed
            }
            _ => Attempt::Unknown,
        });
    };
    if model.weight <= problem.incumbent_weight {
        return Ok(Attempt::NoGain);
    }
    match decode(&problem, &model, &sub) {
        Ok(local) => Ok(Attempt::Improved {
            weight: local.weight,
            incumbent_weight: problem.incumbent_weight,
            sub,
            local,
        }),
        Err(e) => {
            log::warn!("{e}");
            Ok(Attempt::Failed)
        }
    }
}
