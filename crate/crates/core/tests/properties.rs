use proptest::prelude::*;

use twbn_core::engine::global_verify;
use twbn_core::heuristic::greedy_initial;
use twbn_core::model::{
    moralize, td_from_elimination, validate_td, width_of_elimination, Dag, EliminationOrdering,
    Graph,
};
use twbn_core::scoring::{dag_score, prune, ParentSetScore, ScoreCache};
use twbn_core::solver::min_elimination_width;

fn graph() -> impl Strategy<Value = Graph> {
    (1usize..8).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut g = Graph::new(n);
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        g.add_edge(a, b);
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

fn graph_and_order() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    graph().prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

/// DAG from a random order and a random lower-triangle arc mask.
fn dag() -> impl Strategy<Value = Dag> {
    (1usize..8).prop_flat_map(|n| {
        (
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(any::<bool>(), n * n),
        )
            .prop_map(move |(order, mask)| {
                let mut parents = vec![Vec::new(); n];
                for i in 0..n {
                    for j in 0..i {
                        if mask[i * n + j] {
                            parents[order[i]].push(order[j]);
                        }
                    }
                }
                Dag::new(parents).unwrap()
            })
    })
}

/// Random raw scores for parent sets of size ≤ 2, then pruned.
fn cache() -> impl Strategy<Value = ScoreCache> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec(
            prop::collection::vec((any::<u8>(), any::<u8>(), -200i32..0), 0..6),
            n,
        )
        .prop_map(move |per_var| {
            let raw = per_var
                .into_iter()
                .enumerate()
                .map(|(v, picks)| {
                    let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
                    let mut entries = vec![ParentSetScore::new(vec![], -150.0)];
                    for (a, b, s) in picks {
                        let a = others[a as usize % others.len()];
                        let b = others[b as usize % others.len()];
                        let mut ps = vec![a, b];
                        ps.dedup();
                        entries.push(ParentSetScore::new(ps, s as f64));
                    }
                    entries
                })
                .collect();
            prune(raw).unwrap()
        })
    })
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Minimum elimination width over all orderings, by enumerating them.
fn brute_treewidth(g: &Graph) -> usize {
    fn rec(g: &Graph, prefix: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut usize) {
        let n = g.vertex_count();
        if prefix.len() == n {
            let order = EliminationOrdering::new(prefix.clone()).unwrap();
            *best = (*best).min(width_of_elimination(&order, g));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(g, prefix, used, best);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut best = usize::MAX;
    rec(g, &mut Vec::new(), &mut vec![false; g.vertex_count()], &mut best);
    best
}

proptest! {
    #[test]
    fn elimination_yields_valid_decomposition((g, order) in graph_and_order()) {
        let order = EliminationOrdering::new(order).unwrap();
        let td = td_from_elimination(&order, &g);
        prop_assert!(validate_td(&td, &g).unwrap().is_empty());
        prop_assert_eq!(td.width(), width_of_elimination(&order, &g));
    }

    #[test]
    fn elimination_width_bounds_treewidth((g, order) in graph_and_order()) {
        prop_assume!(g.vertex_count() <= 6);
        let tw = brute_treewidth(&g);
        let order = EliminationOrdering::new(order).unwrap();
        prop_assert!(width_of_elimination(&order, &g) >= tw);
        let masks: Vec<u32> = (0..g.vertex_count())
            .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
            .collect();
        let (w, best) = min_elimination_width(&masks);
        prop_assert_eq!(w, tw);
        let best = EliminationOrdering::new(best).unwrap();
        prop_assert_eq!(width_of_elimination(&best, &g), tw);
    }

    #[test]
    fn moral_graph_matches_definition(d in dag()) {
        let m = moralize(&d);
        let n = d.vertex_count();
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let arc = d.parents(a).contains(&b) || d.parents(b).contains(&a);
                let married = (0..n).any(|c| d.parents(c).contains(&a) && d.parents(c).contains(&b));
                prop_assert_eq!(m.has_edge(a, b), arc || married);
            }
        }
    }

    #[test]
    fn prune_keeps_only_strict_improvements(c in cache()) {
        for v in 0..c.var_count() {
            let es = c.entries(v);
            prop_assert!(c.contains(v, &[]));
            prop_assert!(es.windows(2).all(|w| w[0].score >= w[1].score));
            for e in es {
                for f in es {
                    if f.parents.len() < e.parents.len() && is_subset(&f.parents, &e.parents) {
                        prop_assert!(e.score > f.score);
                    }
                }
            }
        }
    }

    #[test]
    fn prune_is_idempotent(c in cache()) {
        let raw: Vec<Vec<ParentSetScore>> =
            (0..c.var_count()).map(|v| c.entries(v).to_vec()).collect();
        prop_assert_eq!(prune(raw).unwrap(), c);
    }

    #[test]
    fn greedy_initial_is_feasible(c in cache(), w in 1usize..4, seed in any::<u64>()) {
        let init = greedy_initial(&c, w, seed);
        let report = global_verify(&init.dag, &init.td, &c, w);
        prop_assert!(report.ok(), "{}", report);
        let total: f64 = (0..c.var_count())
            .map(|v| c.score(v, init.dag.parents(v)).unwrap())
            .sum();
        prop_assert!((dag_score(&c, &init.dag).unwrap() - total).abs() < 1e-9);
        prop_assert!((init.score - total).abs() < 1e-9);
    }
}
