//! Initial solutions for the local improvement loop: a greedy k-tree
//! construction, or an externally computed DAG read from disk.

use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    min_fill_ordering, moralize, parse_pace_td, td_from_elimination, validate_td, Dag, ModelError,
    TdViolation, TreeDecomposition,
};
use crate::scoring::{bic_score, dag_score, Dataset, ParentSetScore, ScoreCache, ScoreError};

/// Largest clique whose best DAG is found by exact subset search.
const EXACT_CLIQUE_LIMIT: usize = 14;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("initial solution exceeds treewidth bound: width {width} > {bound}")]
    WidthExceeded { width: usize, bound: usize },
    #[error("parent set {parents:?} of vertex {vertex} is not in the cache and no data was given to score it")]
    UnknownParentSet { vertex: usize, parents: Vec<usize> },
    #[error("tree decomposition is invalid for the DAG: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDecomposition(Vec<TdViolation>),
    #[error("DAG file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A DAG with a tree decomposition of its moral graph.
#[derive(Clone, Debug)]
pub struct InitialSolution {
    pub dag: Dag,
    pub td: TreeDecomposition,
    pub score: f64,
}

/// Grows a k-tree (k = `treewidth`) one vertex at a time in a seeded random
/// order. The first `k + 1` vertices form a clique whose best DAG is found
/// exactly; every later vertex attaches to a random existing bag and takes
/// the best cached parent set inside it.
pub fn greedy_initial(cache: &ScoreCache, treewidth: usize, seed: u64) -> InitialSolution {
    let n = cache.var_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let k = (treewidth + 1).min(n);
    let mut parents = vec![Vec::new(); n];
    let clique = &order[..k];
    for (v, ps) in best_clique_dag(cache, clique) {
        parents[v] = ps;
    }

    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut edges = Vec::new();
    if k > 0 {
        let mut first = clique.to_vec();
        first.sort_unstable();
        bags.push(first);
    }
    for &v in &order[k..] {
        let host = rng.random_range(0..bags.len());
        let bag = bags[host].clone();
        let choice = cache
            .entries(v)
            .iter()
            .find(|e| e.parents.len() <= treewidth && e.parents.iter().all(|p| bag.contains(p)))
            .expect("empty parent set always fits");
        let droppable: Vec<usize> = bag
            .iter()
            .copied()
            .filter(|u| !choice.parents.contains(u))
            .collect();
        let dropped = *droppable.choose(&mut rng).expect("bag larger than parent set");
        let mut new_bag: Vec<usize> = bag.into_iter().filter(|&u| u != dropped).collect();
        new_bag.push(v);
        new_bag.sort_unstable();
        parents[v] = choice.parents.clone();
        edges.push((host, bags.len()));
        bags.push(new_bag);
    }

    let dag = Dag::new(parents).expect("vertices only take earlier vertices as parents");
    let td = TreeDecomposition::new(n, bags, edges).expect("bags hold valid vertices");
    let score = dag_score(cache, &dag).expect("parent sets come from the cache");
    InitialSolution { dag, td, score }
}

/// Exact best DAG on a small vertex set using only parent sets inside it.
fn best_clique_dag(cache: &ScoreCache, clique: &[usize]) -> Vec<(usize, Vec<usize>)> {
    let k = clique.len();
    if k > EXACT_CLIQUE_LIMIT {
        // sequential fallback: each vertex picks among earlier ones
        return clique
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let earlier = &clique[..i];
                let e = cache
                    .entries(v)
                    .iter()
                    .find(|e| e.parents.iter().all(|p| earlier.contains(p)))
                    .expect("empty set fits");
                (v, e.parents.clone())
            })
            .collect();
    }
    // per member: (mask, score, entry index) of entries inside the clique
    let local: Vec<Vec<(u32, f64, usize)>> = clique
        .iter()
        .map(|&v| {
            cache
                .entries(v)
                .iter()
                .enumerate()
                .filter_map(|(idx, e)| {
                    let mut mask = 0u32;
                    for p in &e.parents {
                        mask |= 1 << clique.iter().position(|c| c == p)?;
                    }
                    Some((mask, e.score, idx))
                })
                .collect()
        })
        .collect();
    let best_within = |i: usize, allowed: u32| -> (f64, usize) {
        local[i]
            .iter()
            .find(|(m, _, _)| m & !allowed == 0)
            .map(|&(_, s, idx)| (s, idx))
            .expect("empty set fits")
    };
    let full = (1u32 << k) - 1;
    let mut best = vec![f64::NEG_INFINITY; 1 << k];
    let mut sink = vec![usize::MAX; 1 << k];
    best[0] = 0.0;
    for mask in 1..=full {
        for i in 0..k {
            if mask & (1 << i) == 0 {
                continue;
            }
            let rest = mask & !(1 << i);
            let cand = best[rest as usize] + best_within(i, rest).0;
            if cand > best[mask as usize] {
                best[mask as usize] = cand;
                sink[mask as usize] = i;
            }
        }
    }
    let mut out = Vec::with_capacity(k);
    let mut mask = full;
    while mask != 0 {
        let i = sink[mask as usize];
        let rest = mask & !(1 << i);
        let idx = best_within(i, rest).1;
        out.push((clique[i], cache.entries(clique[i])[idx].parents.clone()));
        mask = rest;
    }
    out
}

/// Reads an external DAG (and optionally its decomposition). Parent sets
/// missing from the cache are scored from `data` when available: a set that
/// a cached subset dominates is replaced by that subset, otherwise it is
/// inserted into the cache. Without a decomposition file, one is computed by
/// min-fill elimination of the moral graph.
pub fn import_initial(
    dag_text: &str,
    td_text: Option<&str>,
    cache: &mut ScoreCache,
    data: Option<&Dataset>,
    treewidth: usize,
    seed: u64,
) -> Result<InitialSolution, HeuristicError> {
    let n = cache.var_count();
    let mut dag = parse_dag(dag_text, n)?;

    let mut replaced = Vec::new();
    for v in 0..n {
        let ps = dag.parents(v).to_vec();
        if cache.contains(v, &ps) {
            continue;
        }
        let Some(data) = data else {
            return Err(HeuristicError::UnknownParentSet {
                vertex: v,
                parents: ps,
            });
        };
        let score = bic_score(data, v, &ps)?;
        let dominating = cache
            .entries(v)
            .iter()
            .filter(|e| e.score >= score && e.parents.iter().all(|p| ps.contains(p)))
            .map(|e| e.parents.clone())
            .next();
        match dominating {
            Some(subset) => replaced.push((v, subset)),
            None => {
                cache.insert(v, ParentSetScore::new(ps, score))?;
            }
        }
    }
    if !replaced.is_empty() {
        dag = dag.with_parents(&replaced)?;
    }

    let moral = moralize(&dag);
    let td = match td_text {
        Some(text) => {
            let td = parse_pace_td(text)?;
            let violations = validate_td(&td, &moral)?;
            if !violations.is_empty() {
                return Err(HeuristicError::InvalidDecomposition(violations));
            }
            td
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let order = min_fill_ordering(&moral, &mut rng);
            td_from_elimination(&order, &moral)
        }
    };
    if td.width() > treewidth {
        return Err(HeuristicError::WidthExceeded {
            width: td.width(),
            bound: treewidth,
        });
    }
    let score = dag_score(cache, &dag)?;
    Ok(InitialSolution { dag, td, score })
}

/// One line per vertex: `<v> <- [p1,...,pk] : <score>`.
pub fn write_dag(dag: &Dag, cache: &ScoreCache) -> String {
    let mut out = String::new();
    for v in 0..dag.vertex_count() {
        let ps: Vec<String> = dag.parents(v).iter().map(usize::to_string).collect();
        let score = cache.score(v, dag.parents(v)).unwrap_or(f64::NAN);
        let _ = writeln!(out, "{v} <- [{}] : {score}", ps.join(","));
    }
    out
}

/// Parses the format written by [`write_dag`]. The score field is optional
/// and ignored; vertices without a line get no parents.
pub fn parse_dag(text: &str, n: usize) -> Result<Dag, HeuristicError> {
    let mut parents: Vec<Option<Vec<usize>>> = vec![None; n];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let bad = |message: &str| HeuristicError::Parse {
            line,
            message: message.to_string(),
        };
        let (head, rest) = raw.split_once("<-").ok_or_else(|| bad("missing `<-`"))?;
        let v: usize = head.trim().parse().map_err(|_| bad("invalid vertex id"))?;
        if v >= n {
            return Err(bad("vertex id out of range"));
        }
        let list = rest.split(':').next().unwrap_or("").trim();
        let inner = list
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| bad("parent list must be bracketed"))?;
        let ps = inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| bad("invalid parent id")))
            .collect::<Result<Vec<_>, _>>()?;
        if parents[v].is_some() {
            return Err(bad("vertex listed twice"));
        }
        parents[v] = Some(ps);
    }
    Ok(Dag::new(
        parents.into_iter().map(Option::unwrap_or_default).collect(),
    )?)
}
