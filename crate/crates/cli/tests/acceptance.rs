//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. Extra
//! arguments select criteria by number, e.g. `cargo test --test acceptance
//! -- 1 4`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twbn_core::bench::{generate_synthetic, BenchSpec};
use twbn_core::encoding::{encode, VarKind};
use twbn_core::engine::{global_verify, run, run_with_observer, EngineConfig};
use twbn_core::heuristic::greedy_initial;
use twbn_core::model::{Dag, TreeDecomposition};
use twbn_core::scoring::{
    bic_score, build_cache, dag_score, delta_bic, prune, BicCategory, Dataset, ParentSetScore,
    ScoreCache,
};
use twbn_core::solver::{solve_internal, SolveStatus, SolverMode};
use twbn_core::subinstance::{select_subtree, Subinstance};
use twbn_slim::{Cli, Command};

type Verdict = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Verdict);
/// Arities, rows, child, parents, hand-computed score.
type BicCase = (Vec<usize>, Vec<Vec<u32>>, usize, Vec<usize>, f64);

// ---------------------------------------------------------------------------
// Independent oracles: brute force over orderings and parent choices.

fn mask_graph(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<u32> {
    let mut adj = vec![0u32; n];
    for (a, b) in edges {
        if a != b {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    adj
}

fn width_of_order(adj: &[u32], order: &[usize]) -> usize {
    let mut adj = adj.to_vec();
    let mut gone = 0u32;
    let mut width = 0;
    for &v in order {
        let nb = adj[v] & !gone;
        width = width.max(nb.count_ones() as usize);
        let mut bits = nb;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            adj[u] |= nb & !(1 << u);
        }
        gone |= 1 << v;
    }
    width
}

/// Treewidth by trying every elimination ordering.
fn brute_treewidth(adj: &[u32]) -> usize {
    fn permute(adj: &[u32], order: &mut Vec<usize>, k: usize, best: &mut usize) {
        if k == order.len() {
            *best = (*best).min(width_of_order(adj, order));
            return;
        }
        for i in k..order.len() {
            order.swap(k, i);
            permute(adj, order, k + 1, best);
            order.swap(k, i);
        }
    }
    let mut order: Vec<usize> = (0..adj.len()).collect();
    let mut best = usize::MAX;
    permute(adj, &mut order, 0, &mut best);
    if adj.is_empty() {
        0
    } else {
        best
    }
}

fn acyclic(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0; n];
    for &(_, v) in arcs {
        indeg[v] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = ready.pop() {
        seen += 1;
        for &(a, b) in arcs {
            if a == u {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen == n
}

fn moral_masks(n: usize, parents: &[&[usize]]) -> Vec<u32> {
    let mut edges = Vec::new();
    for (v, ps) in parents.iter().enumerate() {
        for (i, &u) in ps.iter().enumerate() {
            edges.push((u, v));
            edges.extend(ps[i + 1..].iter().map(|&w| (u, w)));
        }
    }
    mask_graph(n, edges)
}

/// Best total weight over all menu combinations that satisfy the local
/// conditions, checked directly on the subinstance.
fn oracle_best_weight(sub: &Subinstance, w: usize, scale: u64) -> Option<u64> {
    let n = sub.len();
    let weight = |v: usize, e: usize| (sub.menus[v][e].offset * scale as f64).round() as u64;
    let mut choice = vec![0usize; n];
    let mut best: Option<u64> = None;
    loop {
        let total: u64 = (0..n).map(|v| weight(v, choice[v])).sum();
        if best.is_none_or(|b| total > b) {
            let entries: Vec<_> = (0..n).map(|v| &sub.menus[v][choice[v]]).collect();
            let mut arcs = Vec::new();
            for (v, e) in entries.iter().enumerate() {
                arcs.extend(e.local_parents.iter().map(|&u| (u, v)));
                arcs.extend(e.forced_sources.iter().map(|&u| (u, v)));
            }
            let locals: Vec<&[usize]> = entries.iter().map(|e| e.local_parents.as_slice()).collect();
            let mut adj = moral_masks(n, &locals);
            for &(a, b) in &sub.virtual_edges {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
            if acyclic(n, &arcs) && brute_treewidth(&adj) <= w {
                best = Some(total);
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
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

/// Best BIC over every DAG on the data's variables whose moral graph has
/// treewidth ≤ w, scoring every parent set directly.
fn exhaustive_optimum(data: &Dataset, w: usize) -> f64 {
    let n = data.var_count();
    let sets: Vec<Vec<(f64, Vec<usize>)>> = (0..n)
        .map(|v| {
            let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
            let mut all: Vec<(f64, Vec<usize>)> = (0..1u32 << others.len())
                .map(|m| {
                    let ps: Vec<usize> = (0..others.len())
                        .filter(|&i| m & (1 << i) != 0)
                        .map(|i| others[i])
                        .collect();
                    (bic_score(data, v, &ps).unwrap(), ps)
                })
                .collect();
            all.sort_by(|a, b| b.0.total_cmp(&a.0));
            all
        })
        .collect();
    let mut suffix = vec![0.0; n + 1];
    for v in (0..n).rev() {
        suffix[v] = suffix[v + 1] + sets[v][0].0;
    }
    fn dfs(
        v: usize,
        score: f64,
        chosen: &mut Vec<usize>,
        sets: &[Vec<(f64, Vec<usize>)>],
        suffix: &[f64],
        w: usize,
        best: &mut f64,
    ) {
        let n = sets.len();
        if v == n {
            let parents: Vec<&[usize]> =
                (0..n).map(|u| sets[u][chosen[u]].1.as_slice()).collect();
            let arcs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| parents[u].iter().map(move |&p| (p, u)))
                .collect();
            if acyclic(n, &arcs) && brute_treewidth(&moral_masks(n, &parents)) <= w {
                *best = score;
            }
            return;
        }
        for (i, (s, _)) in sets[v].iter().enumerate() {
            if score + s + suffix[v + 1] <= *best {
                break;
            }
            chosen.push(i);
            dfs(v + 1, score + s, chosen, sets, suffix, w, best);
            chosen.pop();
        }
    }
    let mut best = f64::NEG_INFINITY;
    dfs(0, 0.0, &mut Vec::new(), &sets, &suffix, w, &mut best);
    best
}

// ---------------------------------------------------------------------------
// Random instances.

/// Pruned cache with at most three non-empty candidate sets per variable.
fn random_cache(n: usize, rng: &mut ChaCha8Rng) -> ScoreCache {
    let raw = (0..n)
        .map(|v| {
            let mut entries = vec![ParentSetScore::new(vec![], -rng.random_range(50.0..100.0))];
            for _ in 0..rng.random_range(0..=3) {
                let k = rng.random_range(1..=2);
                let mut ps: Vec<usize> = Vec::new();
                while ps.len() < k {
                    let u = rng.random_range(0..n);
                    if u != v && !ps.contains(&u) {
                        ps.push(u);
                    }
                }
                entries.push(ParentSetScore::new(ps, -rng.random_range(0.0..60.0)));
            }
            entries
        })
        .collect();
    prune(raw).unwrap()
}

fn synthetic_cache(n: usize, samples: usize, max_parents: usize, seed: u64) -> (Dataset, ScoreCache) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arity = rng.random_range(2..=3);
    let (data, _) = generate_synthetic(n, 3, arity, samples, seed);
    let cache = build_cache(&data, max_parents).unwrap();
    (data, cache)
}

// ---------------------------------------------------------------------------
// Criteria.

fn encoding_correctness() -> Verdict {
    const SCALE: u64 = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut with_virtual, mut improving) = (0, 0, 0);
    let mut attempt = 0u64;
    while checked < 250 {
        attempt += 1;
        if attempt > 5000 {
            return Err(format!("only {checked} subinstances generated"));
        }
        let n = rng.random_range(5..=8);
        let w = rng.random_range(1..=2);
        let cache = random_cache(n, &mut rng).quantized(SCALE);
        let init = greedy_initial(&cache, w, attempt);
        let budget = rng.random_range(w + 1..=5);
        let Ok(selected) = select_subtree(&init.td, budget, attempt) else {
            continue;
        };
        let sub = Subinstance::build(&cache, &init.dag, &init.td, &selected)
            .map_err(|e| format!("build failed: {e}"))?;
        if sub.len() > 5 || sub.menus.iter().any(|m| m.len() > 4) {
            continue;
        }
        let problem = encode(&sub, w, SCALE).map_err(|e| e.to_string())?;
        let out = solve_internal(&problem, Duration::from_secs(60));
        if out.status != SolveStatus::Optimum {
            return Err(format!("instance {attempt}: solver status {}", out.status));
        }
        let k = out.model.unwrap().weight;
        let k0: u64 = (0..sub.len())
            .map(|v| (sub.menus[v][sub.incumbent[v]].offset * SCALE as f64).round() as u64)
            .sum();
        let oracle = oracle_best_weight(&sub, w, SCALE)
            .ok_or_else(|| format!("instance {attempt}: oracle finds nothing feasible"))?;
        if k != oracle {
            return Err(format!("instance {attempt}: K = {k}, oracle = {oracle}\n{}", sub.dump()));
        }
        if k < k0 {
            return Err(format!("instance {attempt}: K = {k} < K_0 = {k0}"));
        }
        checked += 1;
        if !sub.virtual_edges.is_empty()
            || sub.menus.iter().flatten().any(|e| !e.forced_sources.is_empty())
        {
            with_virtual += 1;
        }
        if k > k0 {
            improving += 1;
        }
    }
    Ok(format!(
        "{checked} subinstances, {with_virtual} with virtual constraints, {improving} improvable; K equals the oracle optimum on all"
    ))
}

struct SafetyTally {
    runs: usize,
    merges: usize,
    worst_exact_gap: f64,
    violations: Vec<String>,
    non_monotone: Vec<String>,
}

fn safety_runs() -> SafetyTally {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tally = SafetyTally {
        runs: 0,
        merges: 0,
        worst_exact_gap: 0.0,
        violations: Vec::new(),
        non_monotone: Vec::new(),
    };
    for run_id in 0..100u64 {
        let n = rng.random_range(8..=15);
        let w = rng.random_range(2..=3);
        let (_, cache) = synthetic_cache(n, 400, 3, 100 + run_id);
        let init = greedy_initial(&cache, w, run_id);
        let mut config = EngineConfig::new(w);
        config.budget = rng.random_range(w + 1..=8);
        config.seed = run_id;
        config.max_iterations = Some(20);
        config.time_limit = Duration::from_secs(20);
        config.solver.timeout = Duration::from_millis(500);
        let mut scores = vec![init.score];
        let mut merges = 0;
        let result = run_with_observer(&cache, &init, &config, |ev| {
            merges += 1;
            let (dag, td) = ev.after;
            let report = global_verify(dag, td, &cache, w);
            if !report.ok() {
                tally.violations.push(format!("run {run_id} merge {merges}: {report}"));
            }
            let scale = ev.weight_scale as f64;
            let gain = (ev.weight as f64 - ev.incumbent_weight as f64) / scale;
            let grid_delta =
                dag_score(ev.grid_cache, dag).unwrap() - dag_score(ev.grid_cache, ev.before.0).unwrap();
            let exact_after = dag_score(&cache, dag).unwrap();
            let exact_delta = exact_after - dag_score(&cache, ev.before.0).unwrap();
            if (grid_delta - gain).abs() > 1e-6 {
                tally.violations.push(format!(
                    "run {run_id} merge {merges}: grid delta {grid_delta} vs (K-K0)/scale {gain}"
                ));
            }
            let gap = (exact_delta - gain).abs();
            tally.worst_exact_gap = tally.worst_exact_gap.max(gap * scale);
            if gap > 2.0 / scale {
                tally.violations.push(format!(
                    "run {run_id} merge {merges}: recomputed delta {exact_delta} vs (K-K0)/scale {gain}"
                ));
            }
            scores.push(exact_after);
        });
        match result {
            Ok(state) => {
                let fin = global_verify(&state.dag, &state.td, &cache, w);
                if !fin.ok() {
                    tally.violations.push(format!("run {run_id} final: {fin}"));
                }
                scores.push(state.score);
            }
            Err(e) => tally.violations.push(format!("run {run_id}: {e}")),
        }
        if scores.windows(2).any(|p| p[1] < p[0]) {
            tally.non_monotone.push(format!("run {run_id}: {scores:?}"));
        }
        tally.runs += 1;
        tally.merges += merges;
    }
    tally
}

fn theorem1_safety(tally: &SafetyTally) -> Verdict {
    let summary = format!(
        "{} runs, {} merges, worst |recomputed − (K−K0)/scale| = {:.3}/scale",
        tally.runs, tally.merges, tally.worst_exact_gap
    );
    if tally.runs < 100 || tally.merges == 0 {
        return Err(format!("too little coverage: {summary}"));
    }
    match tally.violations.first() {
        None => Ok(summary),
        Some(v) => Err(format!("{} violations, first: {v}; {summary}", tally.violations.len())),
    }
}

fn monotonicity(tally: &SafetyTally) -> Verdict {
    match tally.non_monotone.first() {
        None => Ok(format!("score sequences non-decreasing in all {} runs", tally.runs)),
        Some(v) => Err(format!("{} runs decrease, first: {v}", tally.non_monotone.len())),
    }
}

fn global_optimum_recovery() -> Verdict {
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + i);
        let samples = rng.random_range(100..=600);
        let (data, cache) = synthetic_cache(5, samples, 4, 400 + i);
        let init = greedy_initial(&cache, 2, i);
        let mut config = EngineConfig::new(2);
        config.budget = 5;
        config.max_iterations = Some(3);
        config.solver.mode = SolverMode::Oracle;
        let state = run(&cache, &init, &config).map_err(|e| format!("instance {i}: {e}"))?;
        let optimum = exhaustive_optimum(&data, 2);
        let gap = optimum - state.score;
        worst = worst.max(gap.abs());
        if gap.abs() > 1e-6 {
            return Err(format!(
                "instance {i}: engine {:.6}, exhaustive optimum {:.6} (gap {gap:.3e})",
                state.score, optimum
            ));
        }
    }
    Ok(format!("20 instances at the optimum, worst gap {worst:.1e}"))
}

fn variable_counts() -> Verdict {
    for n in [3usize, 5, 10] {
        let raw = (0..n)
            .map(|v| {
                let mut es = vec![ParentSetScore::new(vec![], -10.0)];
                if v > 0 {
                    es.push(ParentSetScore::new(vec![v - 1], -5.0));
                }
                es
            })
            .collect();
        let cache = prune(raw).unwrap();
        let sub = Subinstance::build(&cache, &Dag::empty(n), &TreeDecomposition::trivial(n), &[0])
            .map_err(|e| e.to_string())?;
        let p = encode(&sub, 2, 1000).map_err(|e| e.to_string())?;
        let acyc = p.count_kind(|k| matches!(k, VarKind::Acyc { .. }));
        let ord = p.count_kind(|k| matches!(k, VarKind::Ord { .. }));
        let arc = p.count_kind(|k| matches!(k, VarKind::Arc { .. }));
        let pairs = n * (n - 1) / 2;
        if (acyc, ord, arc) != (pairs, pairs, n * n) {
            return Err(format!("n = {n}: acyc {acyc}, ord {ord}, arc {arc}"));
        }
    }
    Ok("acyc = ord = n(n−1)/2 and arc = n² for n = 3, 5, 10".into())
}

fn delta_bic_categories() -> Verdict {
    use BicCategory::*;
    let eps = 1e-9;
    let table = [
        (0.0, Neutral),
        (2.0 - eps, Neutral),
        (2.0, Positive),
        (2.0 + eps, Positive),
        (6.0 - eps, Positive),
        (6.0, StronglyPositive),
        (6.0 + eps, StronglyPositive),
        (10.0 - eps, StronglyPositive),
        (10.0, ExtremelyPositive),
        (10.0 + eps, ExtremelyPositive),
        (-2.0 + eps, Neutral),
        (-2.0, Negative),
        (-2.0 - eps, Negative),
        (-6.0 + eps, Negative),
        (-6.0, StronglyNegative),
        (-6.0 - eps, StronglyNegative),
        (-10.0 + eps, StronglyNegative),
        (-10.0, ExtremelyNegative),
        (-10.0 - eps, ExtremelyNegative),
    ];
    for (delta, expected) in table {
        let got = BicCategory::of(delta);
        if got != expected {
            return Err(format!("ΔBIC {delta}: {got:?}, expected {expected:?}"));
        }
        let via_report = delta_bic(100.0, 100.0 + delta).category;
        if (delta.abs() - 2.0).abs() > 1e-6
            && (delta.abs() - 6.0).abs() > 1e-6
            && (delta.abs() - 10.0).abs() > 1e-6
            && via_report != expected
        {
            return Err(format!("report for ΔBIC {delta}: {via_report:?}"));
        }
    }
    Ok(format!("{} boundary-adjacent values", table.len()))
}

fn defaults() -> Verdict {
    let cli = Cli::try_parse_from(["twbn-slim", "learn", "--data", "d.dat", "--treewidth", "2"])
        .map_err(|e| e.to_string())?;
    let Command::Learn(args) = cli.command else {
        return Err("learn did not parse".into());
    };
    let config = args.engine_config().map_err(|e| e.to_string())?;
    let spec = BenchSpec::default();
    let got = (
        config.budget,
        config.solver.timeout,
        spec.treewidths.clone(),
        spec.seeds,
    );
    let want = (10, Duration::from_secs(2), vec![2, 5, 8], 3);
    if got != want {
        return Err(format!("got {got:?}, expected {want:?}"));
    }
    Ok("budget 10, solver timeout 2 s, bench bounds {2,5,8}, 3 seeds".into())
}

fn bic_oracle() -> Verdict {
    let ln = f64::ln;
    let half_ln = |n: f64| ln(n) / 2.0;
    let cases: Vec<BicCase> = vec![
        // two counts of 2
        (vec![2], vec![vec![0], vec![0], vec![1], vec![1]], 0, vec![], 4.0 * ln(0.5) - half_ln(4.0)),
        // constant column
        (vec![2], vec![vec![1]; 5], 0, vec![], -half_ln(5.0)),
        // copy of a balanced binary parent
        (
            vec![2, 2],
            vec![vec![0, 0], vec![0, 0], vec![1, 1], vec![1, 1]],
            1,
            vec![0],
            -half_ln(4.0) * 2.0,
        ),
        // one row per value of a ternary variable
        (vec![3], vec![vec![0], vec![1], vec![2]], 0, vec![], 3.0 * ln(1.0 / 3.0) - half_ln(3.0) * 2.0),
        // counts 3 and 1
        (
            vec![2],
            vec![vec![0], vec![0], vec![0], vec![1]],
            0,
            vec![],
            3.0 * ln(0.75) + ln(0.25) - half_ln(4.0),
        ),
        // parent 0 leaves the child split 1:1, parent 1 fixes it
        (
            vec![2, 2],
            vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![1, 1]],
            1,
            vec![0],
            2.0 * ln(0.5) - half_ln(4.0) * 2.0,
        ),
        // ternary parent with an unobserved value
        (
            vec![3, 2],
            vec![vec![0, 0], vec![0, 1], vec![1, 0]],
            1,
            vec![0],
            2.0 * ln(0.5) - half_ln(3.0) * 3.0,
        ),
        // XOR of two parents: every configuration is pure
        (
            vec![2, 2, 2],
            vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]],
            2,
            vec![0, 1],
            -half_ln(4.0) * 4.0,
        ),
        // arity 1 carries no penalty
        (vec![1, 2], vec![vec![0, 0], vec![0, 1], vec![0, 1]], 0, vec![1], 0.0),
        // ternary child, binary parent
        (
            vec![2, 3],
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 0],
                vec![1, 1],
            ],
            1,
            vec![0],
            3.0 * ln(1.0 / 3.0) + 2.0 * ln(2.0 / 3.0) + ln(1.0 / 3.0) - half_ln(6.0) * 2.0 * 2.0,
        ),
        // independent parent: 1:1 split under both values
        (
            vec![2, 2],
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            1,
            vec![0],
            4.0 * ln(0.5) - half_ln(4.0) * 2.0,
        ),
        // same data, no parent
        (
            vec![2, 2],
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            1,
            vec![],
            4.0 * ln(0.5) - half_ln(4.0),
        ),
    ];
    let mut worst = 0.0f64;
    for (i, (arities, rows, v, parents, expected)) in cases.iter().enumerate() {
        let data = Dataset::from_rows(arities.clone(), rows).map_err(|e| e.to_string())?;
        let got = bic_score(&data, *v, parents).map_err(|e| e.to_string())?;
        worst = worst.max((got - expected).abs());
        if (got - expected).abs() > 1e-9 {
            return Err(format!("case {i}: {got} vs hand value {expected}"));
        }
    }
    // the two literal values quoted for the first and third cases
    let literal = [(0usize, -3.4657), (2, -1.3863)];
    for (i, value) in literal {
        if (cases[i].4 - value).abs() > 1e-4 {
            return Err(format!("case {i}: hand value {} is not {value}", cases[i].4));
        }
    }
    Ok(format!("{} datasets, worst error {worst:.1e}", cases.len()))
}

fn anytime_improvement() -> Verdict {
    let (data, _) = generate_synthetic(50, 3, 2, 5000, 2024);
    let cache = build_cache(&data, 2).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut hits = 0;
    for seed in 0..3u64 {
        let init = greedy_initial(&cache, 2, seed);
        let mut config = EngineConfig::new(2);
        config.seed = seed;
        config.time_limit = Duration::from_secs(60);
        let state = run(&cache, &init, &config).map_err(|e| e.to_string())?;
        let report = delta_bic(init.score, state.score);
        if report.delta >= 10.0 {
            hits += 1;
        }
        lines.push(format!(
            "seed {seed}: ΔBIC {:.1} ({}, {} merges)",
            report.delta,
            report.category,
            state.improvements.len()
        ));
    }
    let summary = lines.join("; ");
    if hits >= 2 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let selected = |i: usize| wanted.is_empty() || wanted.contains(&i);

    let mut failures = 0;
    let mut report = |i: usize, name: &str, start: Instant, verdict: Verdict| {
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {i} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {i} {name}: {detail} [{secs:.1}s]");
            }
        }
    };
    let simple: [Criterion; 6] = [
        (1, "encoding correctness", encoding_correctness),
        (4, "global optimum recovery", global_optimum_recovery),
        (5, "variable counts", variable_counts),
        (6, "delta BIC categories", delta_bic_categories),
        (7, "defaults", defaults),
        (8, "BIC scorer", bic_oracle),
    ];
    for (i, name, f) in simple.iter().filter(|c| c.0 < 2) {
        if selected(*i) {
            let start = Instant::now();
            report(*i, name, start, f());
        }
    }
    if selected(2) || selected(3) {
        let start = Instant::now();
        let tally = safety_runs();
        if selected(2) {
            report(2, "engine safety", start, theorem1_safety(&tally));
        }
        if selected(3) {
            report(3, "monotonicity", start, monotonicity(&tally));
        }
    }
    for (i, name, f) in simple.iter().filter(|c| c.0 > 3) {
        if selected(*i) {
            let start = Instant::now();
            report(*i, name, start, f());
        }
    }
    if selected(9) {
        let start = Instant::now();
        report(9, "anytime improvement", start, anytime_improvement());
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
