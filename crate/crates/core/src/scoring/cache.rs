use std::collections::HashMap;

use rayon::prelude::*;

use super::{bic_score, mutual_information, Dataset, ScoreError};
use crate::model::Dag;

/// A candidate parent set with its local score.
#[derive(Clone, Debug, PartialEq)]
pub struct ParentSetScore {
    pub parents: Vec<usize>,
    pub score: f64,
}

impl ParentSetScore {
    pub fn new(mut parents: Vec<usize>, score: f64) -> Self {
        parents.sort_unstable();
        Self { parents, score }
    }
}

/// Pruned score function cache: per variable, the candidate parent sets
/// worth considering, sorted by descending score. The empty set is always
/// present.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreCache {
    entries: Vec<Vec<ParentSetScore>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl ScoreCache {
    pub fn var_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self, v: usize) -> &[ParentSetScore] {
        &self.entries[v]
    }

    pub fn total_entries(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    /// Score of a sorted parent set, if cached.
    pub fn score(&self, v: usize, parents: &[usize]) -> Option<f64> {
        self.index[v]
            .get(parents)
            .map(|&i| self.entries[v][i].score)
    }

    pub fn contains(&self, v: usize, parents: &[usize]) -> bool {
        self.index[v].contains_key(parents)
    }

    pub fn empty_score(&self, v: usize) -> f64 {
        self.score(v, &[]).expect("cache invariant: empty set present")
    }

    /// `Σ f_∅(v)` over the given vertices.
    pub fn alpha(&self, vertices: impl IntoIterator<Item = usize>) -> f64 {
        vertices.into_iter().map(|v| self.empty_score(v)).sum()
    }

    /// Adds (or overwrites) one entry for `v` and re-prunes that variable.
    /// Returns whether the entry survived pruning.
    pub fn insert(&mut self, v: usize, entry: ParentSetScore) -> Result<bool, ScoreError> {
        let key = entry.parents.clone();
        let mut raw = std::mem::take(&mut self.entries[v]);
        raw.retain(|e| e.parents != key);
        raw.push(entry);
        let pruned = prune_variable(v, self.entries.len(), raw)?;
        self.index[v] = index_of(&pruned);
        self.entries[v] = pruned;
        Ok(self.contains(v, &key))
    }

    /// Rounds every score to the nearest multiple of `1/scale`. Ties created
    /// by the rounding are kept, so `f_P(v) ≥ f_∅(v)` still holds but may be
    /// an equality.
    pub fn quantized(&self, scale: u64) -> ScoreCache {
        let s = scale as f64;
        let entries: Vec<Vec<ParentSetScore>> = self
            .entries
            .iter()
            .map(|es| {
                es.iter()
                    .map(|e| ParentSetScore {
                        parents: e.parents.clone(),
                        score: (e.score * s).round() / s,
                    })
                    .collect()
            })
            .collect();
        let index = entries.iter().map(|e| index_of(e)).collect();
        ScoreCache { entries, index }
    }

    /// Like [`quantized`](Self::quantized), but each variable's grid is
    /// shifted to pass through the score of its anchor set, which therefore
    /// stays exact. A change of parent set then differs from its true score
    /// change by at most `0.5/scale` per variable.
    pub fn quantized_around(&self, anchors: &[Vec<usize>], scale: u64) -> ScoreCache {
        let mut grid = self.clone();
        for (v, anchor) in anchors.iter().enumerate() {
            grid.requantize(self, v, anchor, scale);
        }
        grid
    }

    /// Re-derives the entries of `v` from `exact`, anchored at `anchor`.
    /// Falls back to the empty set when `anchor` is not cached.
    pub fn requantize(&mut self, exact: &ScoreCache, v: usize, anchor: &[usize], scale: u64) {
        let s = scale as f64;
        let base = exact.score(v, anchor).unwrap_or_else(|| exact.empty_score(v));
        self.entries[v] = exact.entries[v]
            .iter()
            .map(|e| ParentSetScore {
                parents: e.parents.clone(),
                score: base + ((e.score - base) * s).round() / s,
            })
            .collect();
        self.index[v] = index_of(&self.entries[v]);
    }

    pub fn raw_entries(&self) -> &[Vec<ParentSetScore>] {
        &self.entries
    }
}

fn index_of(entries: &[ParentSetScore]) -> HashMap<Vec<usize>, usize> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.parents.clone(), i))
        .collect()
}

/// Drops every parent set that some stored proper subset scores at least as
/// well as, and every non-empty set no better than the empty set.
pub fn prune(raw: Vec<Vec<ParentSetScore>>) -> Result<ScoreCache, ScoreError> {
    let n = raw.len();
    let entries = raw
        .into_iter()
        .enumerate()
        .map(|(v, es)| prune_variable(v, n, es))
        .collect::<Result<Vec<_>, _>>()?;
    let index = entries.iter().map(|e| index_of(e)).collect();
    Ok(ScoreCache { entries, index })
}

fn prune_variable(
    v: usize,
    n: usize,
    raw: Vec<ParentSetScore>,
) -> Result<Vec<ParentSetScore>, ScoreError> {
    let mut best: HashMap<Vec<usize>, f64> = HashMap::with_capacity(raw.len());
    for mut e in raw {
        e.parents.sort_unstable();
        e.parents.dedup();
        if let Some(&p) = e.parents.iter().find(|&&p| p >= n) {
            return Err(ScoreError::VertexOutOfRange { vertex: p, count: n });
        }
        if e.parents.contains(&v) {
            return Err(ScoreError::SelfParent(v));
        }
        if !e.score.is_finite() {
            return Err(ScoreError::NonFiniteScore(v));
        }
        let slot = best.entry(e.parents).or_insert(f64::NEG_INFINITY);
        if e.score > *slot {
            *slot = e.score;
        }
    }
    if !best.contains_key(&Vec::new()) {
        return Err(ScoreError::MissingEmptySet(v));
    }
    let mut kept: Vec<ParentSetScore> = best
        .iter()
        .filter(|(p, &s)| !dominated(p, s, &best))
        .map(|(p, &s)| ParentSetScore {
            parents: p.clone(),
            score: s,
        })
        .collect();
    kept.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.parents.len().cmp(&b.parents.len()))
            .then_with(|| a.parents.cmp(&b.parents))
    });
    Ok(kept)
}

fn dominated(p: &[usize], score: f64, all: &HashMap<Vec<usize>, f64>) -> bool {
    if p.is_empty() {
        return false;
    }
    if p.len() <= 16 {
        let full = (1u32 << p.len()) - 1;
        (0..full).any(|mask| {
            let sub: Vec<usize> = p
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &x)| x)
                .collect();
            all.get(&sub).is_some_and(|&s| score <= s)
        })
    } else {
        all.iter().any(|(q, &s)| {
            q.len() < p.len() && q.iter().all(|x| p.binary_search(x).is_ok()) && score <= s
        })
    }
}

/// How candidate parents are generated for [`build_cache_with`].
#[derive(Clone, Debug)]
pub struct CacheOptions {
    pub max_parent_size: usize,
    /// Enumerate exhaustively while `C(n−1, max_parent_size)` stays within
    /// this bound.
    pub exhaustive_limit: u128,
    /// Otherwise keep this many candidates per variable, ranked by pairwise
    /// mutual information.
    pub max_candidates: usize,
}

impl CacheOptions {
    pub fn new(max_parent_size: usize) -> Self {
        Self {
            max_parent_size,
            exhaustive_limit: 1_000_000,
            max_candidates: 20,
        }
    }
}

pub fn build_cache(data: &Dataset, max_parent_size: usize) -> Result<ScoreCache, ScoreError> {
    build_cache_with(data, &CacheOptions::new(max_parent_size))
}

/// Scores every candidate parent set up to the size limit and prunes.
/// Variables are scored in parallel; the result does not depend on the
/// scheduling.
pub fn build_cache_with(data: &Dataset, opts: &CacheOptions) -> Result<ScoreCache, ScoreError> {
    let n = data.var_count();
    let k = opts.max_parent_size.min(n.saturating_sub(1));
    let exhaustive = binomial(n.saturating_sub(1) as u128, k as u128) <= opts.exhaustive_limit;
    let raw = (0..n)
        .into_par_iter()
        .map(|v| {
            let candidates: Vec<usize> = if exhaustive {
                (0..n).filter(|&u| u != v).collect()
            } else {
                let mut ranked: Vec<(f64, usize)> = (0..n)
                    .filter(|&u| u != v)
                    .map(|u| (mutual_information(data, v, u), u))
                    .collect();
                ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                let mut c: Vec<usize> = ranked
                    .into_iter()
                    .take(opts.max_candidates)
                    .map(|(_, u)| u)
                    .collect();
                c.sort_unstable();
                c
            };
            let mut scored = Vec::new();
            for size in 0..=k.min(candidates.len()) {
                for_each_combination(&candidates, size, &mut |set| {
                    scored.push(bic_score(data, v, set).map(|s| ParentSetScore::new(set.to_vec(), s)));
                });
            }
            scored.into_iter().collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    prune(raw)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

pub(crate) fn for_each_combination(items: &[usize], size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        let need = size - cur.len();
        for i in start..items.len() {
            if items.len() - i < need {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), f);
}

/// `f(D) = Σ_v f(v, P_D(v))`.
pub fn dag_score(cache: &ScoreCache, dag: &Dag) -> Result<f64, ScoreError> {
    if cache.var_count() != dag.vertex_count() {
        return Err(ScoreError::SizeMismatch {
            cache: cache.var_count(),
            dag: dag.vertex_count(),
        });
    }
    (0..dag.vertex_count())
        .map(|v| {
            cache
                .score(v, dag.parents(v))
                .ok_or_else(|| ScoreError::MissingParentSet {
                    vertex: v,
                    parents: dag.parents(v).to_vec(),
                })
        })
        .sum()
}
