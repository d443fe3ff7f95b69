use std::time::{Duration, Instant};

use varisat::{ExtendFormula, Lit, Solver};

use super::{SolveOutcome, SolveStatus};
use crate::encoding::{MaxSatModel, MaxSatProblem, Wcnf};

enum Flow {
    Done,
    /// Conflict independent of every level above this one.
    Jump(usize),
    Stop,
}

struct Search<'a> {
    problem: &'a MaxSatProblem,
    wcnf: Wcnf,
    sat: Solver<'static>,
    /// Vertices by decreasing best weight.
    order: Vec<usize>,
    /// Per vertex: menu indices by decreasing weight.
    alternatives: Vec<Vec<usize>>,
    /// `suffix[d]`: sum of best weights of `order[d..]`.
    suffix: Vec<u64>,
    assumptions: Vec<Lit>,
    best: Option<MaxSatModel>,
    deadline: Instant,
    failure: Option<String>,
}

impl Search<'_> {
    fn best_weight(&self) -> Option<u64> {
        self.best.as_ref().map(|m| m.weight)
    }

    /// Solves under the current assumptions; records any model found.
    /// Returns the failed-core levels on unsatisfiability.
    fn check(&mut self) -> Result<(), Vec<usize>> {
        self.sat.assume(&self.assumptions);
        match self.sat.solve() {
            Ok(true) => {
                let mut a = vec![false; self.wcnf.num_vars as usize];
                for lit in self.sat.model().unwrap_or_default() {
                    let i = lit.index();
                    if i < a.len() {
                        a[i] = lit.is_positive();
                    }
                }
                let weight = self.wcnf.weight(&a);
                debug_assert!(self.wcnf.satisfies_hard(&a));
                if self.best_weight().is_none_or(|b| weight > b) {
                    self.best = Some(MaxSatModel {
                        assignment: a,
                        weight,
                    });
                }
                Ok(())
            }
            Ok(false) => {
                let core = self.sat.failed_core().unwrap_or(&[]);
                Err(core
                    .iter()
                    .filter_map(|l| self.assumptions.iter().position(|a| a == l))
                    .collect())
            }
            Err(e) => {
                self.failure = Some(e.to_string());
                Err(Vec::new())
            }
        }
    }

    fn dfs(&mut self, depth: usize, weight: u64) -> Flow {
        if depth == self.order.len() {
            return Flow::Done;
        }
        let v = self.order[depth];
        for k in 0..self.alternatives[v].len() {
            if Instant::now() >= self.deadline {
                return Flow::Stop;
            }
            let e = self.alternatives[v][k];
            let w = weight + self.problem.entry_weights[v][e];
            if self
                .best_weight()
                .is_some_and(|b| w + self.suffix[depth + 1] <= b)
            {
                // alternatives are sorted, so the rest are no better
                return Flow::Done;
            }
            self.assumptions
                .push(Lit::from_dimacs(self.problem.par(v, e) as isize));
            let flow = match self.check() {
                Ok(()) => self.dfs(depth + 1, w),
                Err(levels) => {
                    if self.failure.is_some() {
                        Flow::Stop
                    } else {
                        // an empty core means the hard clauses alone fail
                        Flow::Jump(levels.into_iter().max().unwrap_or(0).min(depth))
                    }
                }
            };
            self.assumptions.pop();
            match flow {
                Flow::Done => {}
                Flow::Jump(level) if level >= depth => {}
                other => return other,
            }
        }
        Flow::Done
    }
}

/// Exact branch and bound over parent-set choices. Each node asks a SAT
/// solver whether the choices so far extend to a model; every model found
/// is a feasible solution and may raise the incumbent. Failed assumption
/// cores drive backjumping. On timeout the best model so far is returned.
pub fn solve_internal(problem: &MaxSatProblem, timeout: Duration) -> SolveOutcome {
    let start = Instant::now();
    let wcnf = problem.to_wcnf();
    let mut sat = Solver::new();
    for clause in &wcnf.hard {
        let lits: Vec<Lit> = clause
            .iter()
            .map(|&l| Lit::from_dimacs(l as isize))
            .collect();
        sat.add_clause(&lits);
    }
    let n = problem.n_local;
    let best_of = |v: usize| problem.entry_weights[v].iter().copied().max().unwrap_or(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(best_of(v)), v));
    let alternatives: Vec<Vec<usize>> = problem
        .entry_weights
        .iter()
        .map(|ws| {
            let mut idx: Vec<usize> = (0..ws.len()).collect();
            idx.sort_by_key(|&e| (std::cmp::Reverse(ws[e]), e));
            idx
        })
        .collect();
    let mut suffix = vec![0u64; n + 1];
    for d in (0..n).rev() {
        suffix[d] = suffix[d + 1] + best_of(order[d]);
    }
    let mut search = Search {
        problem,
        wcnf,
        sat,
        order,
        alternatives,
        suffix,
        assumptions: Vec::new(),
        best: None,
        deadline: start + timeout,
        failure: None,
    };

    let root = search.check();
    let flow = match root {
        Ok(()) => search.dfs(0, 0),
        Err(_) if search.failure.is_none() => {
            return SolveOutcome::without_model(
                SolveStatus::Error,
                "hard clauses are unsatisfiable",
                start.elapsed(),
            );
        }
        Err(_) => Flow::Stop,
    };
    let elapsed = start.elapsed();
    let complete = !matches!(flow, Flow::Stop);
    match (search.best, search.failure) {
        (Some(model), _) => {
            let status = if complete {
                SolveStatus::Optimum
            } else {
                SolveStatus::Satisfiable
            };
            SolveOutcome::with_model(status, model, elapsed)
        }
        (None, Some(msg)) => SolveOutcome::without_model(SolveStatus::Error, msg, elapsed),
        (None, None) => SolveOutcome::without_model(
            SolveStatus::Unknown,
            "timed out before the first model",
            elapsed,
        ),
    }
}
