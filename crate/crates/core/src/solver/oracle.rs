use std::collections::HashMap;
use std::time::Instant;

use super::{SolveOutcome, SolveStatus};
use crate::encoding::{assignment_for, MaxSatProblem};
use crate::subinstance::Subinstance;

/// Most menu combinations the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 100_000;
/// Most window vertices for the subset search over orderings.
const MAX_VERTICES: usize = 12;

/// Weight, menu choice, topological order, elimination order.
type Best = (u64, Vec<usize>, Vec<usize>, Vec<usize>);

/// Minimum elimination width of a graph given as adjacency bitmasks, and an
/// ordering attaining it. Dynamic programming over the set of already
/// eliminated vertices: eliminating `v` after the set `S` gives `v` one
/// higher neighbour per outside vertex reachable from `v` through `S`.
pub fn min_elimination_width(adj: &[u32]) -> (usize, Vec<usize>) {
    let n = adj.len();
    assert!(n <= 20);
    let full = (1u32 << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    let mut last = vec![0usize; 1 << n];
    best[0] = 0;
    for set in 1..=full {
        for v in 0..n {
            if set & (1 << v) == 0 {
                continue;
            }
            let before = set & !(1 << v);
            let cost = best[before as usize].max(higher_degree(adj, before, v));
            if cost < best[set as usize] {
                best[set as usize] = cost;
                last[set as usize] = v;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut set = full;
    while set != 0 {
        let v = last[set as usize];
        order.push(v);
        set &= !(1 << v);
    }
    order.reverse();
    (if n == 0 { 0 } else { best[full as usize] }, order)
}

/// Vertices outside `eliminated ∪ {v}` adjacent to the component of `v` in
/// the subgraph induced by `eliminated ∪ {v}`.
fn higher_degree(adj: &[u32], eliminated: u32, v: usize) -> usize {
    let mut comp = 1u32 << v;
    let mut frontier = comp;
    while frontier != 0 {
        let x = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let grow = adj[x] & eliminated & !comp;
        comp |= grow;
        frontier |= grow;
    }
    let mut reach = 0u32;
    let mut bits = comp;
    while bits != 0 {
        let x = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        reach |= adj[x];
    }
    (reach & !comp & !eliminated).count_ones() as usize
}

fn topological_order(n: usize, arcs: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indeg = vec![0; n];
    let mut out = vec![Vec::new(); n];
    for &(u, v) in arcs {
        out[u].push(v);
        indeg[v] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop() {
        order.push(u);
        for &v in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.push(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Enumerates every menu combination and checks the local conditions
/// directly: acyclicity of the local arcs together with the forced virtual
/// arcs, and minimum elimination width of the local moral graph plus the
/// virtual edges. Independent of the clause set; the winning combination is
/// translated into an assignment only at the end.
pub fn solve_oracle(problem: &MaxSatProblem, sub: &Subinstance) -> SolveOutcome {
    let start = Instant::now();
    let n = sub.len();
    if sub.combination_count() > ORACLE_LIMIT || n > MAX_VERTICES {
        return SolveOutcome::without_model(SolveStatus::Error, "oracle too large", start.elapsed());
    }
    let mut widths: HashMap<Vec<u32>, (usize, Vec<usize>)> = HashMap::new();
    let mut choice = vec![0usize; n];
    let mut best: Option<Best> = None;
    loop {
        let weight: u64 = choice
            .iter()
            .enumerate()
            .map(|(v, &e)| problem.entry_weights[v][e])
            .sum();
        if best.as_ref().is_none_or(|b| weight > b.0) {
            let mut arcs = Vec::new();
            let mut adj = vec![0u32; n];
            let mut link = |a: usize, b: usize| {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            };
            for &(a, b) in &sub.virtual_edges {
                link(a, b);
            }
            for (v, &e) in choice.iter().enumerate() {
                let entry = &sub.menus[v][e];
                for (i, &u) in entry.local_parents.iter().enumerate() {
                    arcs.push((u, v));
                    link(u, v);
                    for &w in &entry.local_parents[i + 1..] {
                        link(u, w);
                    }
                }
                arcs.extend(entry.forced_sources.iter().map(|&u| (u, v)));
            }
            if let Some(topo) = topological_order(n, &arcs) {
                let (width, elim) = widths
                    .entry(adj.clone())
                    .or_insert_with(|| min_elimination_width(&adj))
                    .clone();
                if width <= problem.treewidth {
                    best = Some((weight, choice.clone(), topo, elim));
                }
            }
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == n {
                return finish(problem, sub, best, start);
            }
            choice[i] += 1;
            if choice[i] < sub.menus[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn finish(
    problem: &MaxSatProblem,
    sub: &Subinstance,
    best: Option<Best>,
    start: Instant,
) -> SolveOutcome {
    let Some((weight, choice, topo, elim)) = best else {
        return SolveOutcome::without_model(
            SolveStatus::Error,
            "no menu combination is feasible",
            start.elapsed(),
        );
    };
    match assignment_for(problem, sub, &choice, &topo, &elim) {
        Some(model) => {
            debug_assert_eq!(model.weight, weight);
            SolveOutcome::with_model(SolveStatus::Optimum, model, start.elapsed())
        }
        None => SolveOutcome::without_model(
            SolveStatus::Error,
            "optimal ordering does not respect the width bound",
            start.elapsed(),
        ),
    }
}
