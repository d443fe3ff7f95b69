//! Weighted partial MaxSAT encoding of a subinstance and decoding of models.
//!
//! Variables: one `par` per menu entry, `acyc` and `ord` per unordered local
//! pair (`u < v`), and `arc` per ordered local pair. For `u > v` the starred
//! literals `acyc*(u, v)` and `ord*(u, v)` are the negations of the stored
//! `(v, u)` variables.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{
    td_from_elimination, EliminationOrdering, Graph, TreeDecomposition,
};
use crate::subinstance::Subinstance;

/// Largest exactly-one group encoded pairwise.
pub const PAIRWISE_LIMIT: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("vertex {0} has an empty parent-set menu")]
    EmptyMenu(usize),
    #[error("weight scale must be at least 1")]
    ZeroScale,
    #[error("solver protocol error: {0}")]
    Protocol(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Local vertex and menu index.
    Par { v: usize, entry: usize },
    Acyc { u: usize, v: usize },
    Ord { u: usize, v: usize },
    Arc { u: usize, v: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cardinality {
    ExactlyOne(Vec<i32>),
    AtMost { lits: Vec<i32>, bound: usize },
}

impl Cardinality {
    pub fn holds(&self, value: impl Fn(i32) -> bool) -> bool {
        match self {
            Cardinality::ExactlyOne(lits) => lits.iter().filter(|&&l| value(l)).count() == 1,
            Cardinality::AtMost { lits, bound } => {
                lits.iter().filter(|&&l| value(l)).count() <= *bound
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SoftUnit {
    pub lit: i32,
    pub weight: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodeOptions {
    pub weight_scale: u64,
    /// Emit the redundant "at most one direction per pair" clauses.
    pub redundant_pair_clauses: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            weight_scale: 1000,
            redundant_pair_clauses: true,
        }
    }
}

/// The encoded local problem before cardinality compilation.
#[derive(Clone, Debug)]
pub struct MaxSatProblem {
    pub n_local: usize,
    pub treewidth: usize,
    pub weight_scale: u64,
    kinds: Vec<VarKind>,
    par: Vec<Vec<i32>>,
    acyc_base: usize,
    ord_base: usize,
    arc_base: usize,
    pub hard: Vec<Vec<i32>>,
    pub cardinality: Vec<Cardinality>,
    pub soft: Vec<SoftUnit>,
    /// Soft weight of each menu entry, indexed like the menus.
    pub entry_weights: Vec<Vec<u64>>,
    /// Weight of the current local solution.
    pub incumbent_weight: u64,
}

fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    // pairs (0,1),(0,2),…,(0,n−1),(1,2),…
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

impl MaxSatProblem {
    pub fn var_count(&self) -> usize {
        self.kinds.len()
    }

    /// Kind of a 1-based variable id.
    pub fn kind(&self, var: u32) -> VarKind {
        self.kinds[var as usize - 1]
    }

    pub fn count_kind(&self, pred: impl Fn(&VarKind) -> bool) -> usize {
        self.kinds.iter().filter(|k| pred(k)).count()
    }

    pub fn par(&self, v: usize, entry: usize) -> i32 {
        self.par[v][entry]
    }

    pub fn par_group(&self, v: usize) -> &[i32] {
        &self.par[v]
    }

    /// `acyc*(u, v)`: `u` precedes `v` in the topological order.
    pub fn acyc(&self, u: usize, v: usize) -> i32 {
        self.starred(self.acyc_base, u, v)
    }

    /// `ord*(u, v)`: `u` is eliminated before `v`.
    pub fn ord(&self, u: usize, v: usize) -> i32 {
        self.starred(self.ord_base, u, v)
    }

    pub fn arc(&self, u: usize, v: usize) -> i32 {
        (self.arc_base + u * self.n_local + v + 1) as i32
    }

    fn starred(&self, base: usize, u: usize, v: usize) -> i32 {
        assert_ne!(u, v);
        if u < v {
            (base + pair_index(self.n_local, u, v) + 1) as i32
        } else {
            -((base + pair_index(self.n_local, v, u) + 1) as i32)
        }
    }

    pub fn top(&self) -> u64 {
        self.soft.iter().map(|s| s.weight).sum::<u64>() + 1
    }

    /// Sum over vertices of the largest entry weight; no model can exceed it.
    pub fn upper_bound(&self) -> u64 {
        self.entry_weights
            .iter()
            .map(|ws| ws.iter().copied().max().unwrap_or(0))
            .sum()
    }

    /// Sum of soft weights satisfied by `value`.
    pub fn weight_of(&self, value: impl Fn(i32) -> bool) -> u64 {
        self.soft
            .iter()
            .filter(|s| value(s.lit))
            .map(|s| s.weight)
            .sum()
    }

    /// Clausal form with cardinality constraints compiled away.
    pub fn to_wcnf(&self) -> Wcnf {
        let mut next = self.kinds.len() as u32 + 1;
        let mut hard = self.hard.clone();
        let mut counters = Vec::new();
        for c in &self.cardinality {
            match c {
                Cardinality::ExactlyOne(lits) => {
                    counters.extend(compile_exactly_one(lits, &mut next, &mut hard));
                }
                Cardinality::AtMost { lits, bound } => {
                    counters.extend(compile_at_most(lits, *bound, &mut next, &mut hard));
                }
            }
        }
        Wcnf {
            num_vars: next - 1,
            hard,
            soft: self.soft.iter().map(|s| (s.weight, vec![s.lit])).collect(),
            top: self.top(),
            counters,
        }
    }

    /// `c varmap` comment lines naming every encoding variable.
    pub fn varmap(&self, sub: &Subinstance) -> String {
        let mut out = String::new();
        for (i, kind) in self.kinds.iter().enumerate() {
            let id = i + 1;
            let g = |x: usize| sub.vertices[x];
            let _ = match *kind {
                VarKind::Par { v, entry } => {
                    let ps: Vec<String> = sub.menus[v][entry]
                        .parents
                        .iter()
                        .map(usize::to_string)
                        .collect();
                    writeln!(out, "c varmap par {} {{{}}} {id}", g(v), ps.join(","))
                }
                VarKind::Acyc { u, v } => writeln!(out, "c varmap acyc {} {} {id}", g(u), g(v)),
                VarKind::Ord { u, v } => writeln!(out, "c varmap ord {} {} {id}", g(u), g(v)),
                VarKind::Arc { u, v } => writeln!(out, "c varmap arc {} {} {id}", g(u), g(v)),
            };
        }
        out
    }
}

/// Sequential-counter auxiliaries: `first + i·bound + j` is true iff at least
/// `j + 1` of `lits[..=i]` are true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterBlock {
    pub lits: Vec<i32>,
    pub bound: usize,
    pub first: u32,
}

impl CounterBlock {
    pub fn aux_var(&self, i: usize, j: usize) -> u32 {
        self.first + (i * self.bound + j) as u32
    }

    pub fn aux_count(&self) -> usize {
        (self.lits.len() - 1) * self.bound
    }
}

/// A clausal weighted partial MaxSAT instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wcnf {
    pub num_vars: u32,
    pub hard: Vec<Vec<i32>>,
    pub soft: Vec<(u64, Vec<i32>)>,
    pub top: u64,
    pub counters: Vec<CounterBlock>,
}

impl Wcnf {
    /// Assigns every counter auxiliary from its defining semantics, given
    /// values for the variables below the first auxiliary.
    pub fn complete(&self, assignment: &mut Vec<bool>) {
        assignment.resize(self.num_vars as usize, false);
        for block in &self.counters {
            let mut count = 0;
            for i in 0..block.lits.len() - 1 {
                if lit_value(assignment, block.lits[i]) {
                    count += 1;
                }
                for j in 0..block.bound {
                    assignment[block.aux_var(i, j) as usize - 1] = count > j;
                }
            }
        }
    }

    pub fn satisfies_hard(&self, assignment: &[bool]) -> bool {
        self.hard
            .iter()
            .all(|c| c.iter().any(|&l| lit_value(assignment, l)))
    }

    pub fn weight(&self, assignment: &[bool]) -> u64 {
        self.soft
            .iter()
            .filter(|(_, c)| c.iter().any(|&l| lit_value(assignment, l)))
            .map(|(w, _)| w)
            .sum()
    }
}

impl fmt::Display for Wcnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "p wcnf {} {} {}",
            self.num_vars,
            self.hard.len() + self.soft.len(),
            self.top
        )?;
        for c in &self.hard {
            write_clause(f, self.top, c)?;
        }
        for (w, c) in &self.soft {
            write_clause(f, *w, c)?;
        }
        Ok(())
    }
}

fn write_clause(f: &mut fmt::Formatter<'_>, weight: u64, lits: &[i32]) -> fmt::Result {
    write!(f, "{weight}")?;
    for l in lits {
        write!(f, " {l}")?;
    }
    writeln!(f, " 0")
}

/// Value of a literal under a 1-based assignment stored 0-based; variables
/// past the end are false.
pub fn lit_value(assignment: &[bool], lit: i32) -> bool {
    let v = assignment
        .get(lit.unsigned_abs() as usize - 1)
        .copied()
        .unwrap_or(false);
    if lit > 0 {
        v
    } else {
        !v
    }
}

/// At-least-one clause plus pairwise exclusions for small groups, or a
/// sequential at-most-one counter for larger ones.
pub fn compile_exactly_one(
    lits: &[i32],
    next_var: &mut u32,
    out: &mut Vec<Vec<i32>>,
) -> Option<CounterBlock> {
    out.push(lits.to_vec());
    if lits.len() <= PAIRWISE_LIMIT {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                out.push(vec![-a, -b]);
            }
        }
        None
    } else {
        compile_at_most(lits, 1, next_var, out)
    }
}

/// Sequential counter for `Σ lits ≤ bound`.
pub fn compile_at_most(
    lits: &[i32],
    bound: usize,
    next_var: &mut u32,
    out: &mut Vec<Vec<i32>>,
) -> Option<CounterBlock> {
    let k = lits.len();
    if k <= bound {
        return None;
    }
    if bound == 0 {
        out.extend(lits.iter().map(|&l| vec![-l]));
        return None;
    }
    let block = CounterBlock {
        lits: lits.to_vec(),
        bound,
        first: *next_var,
    };
    *next_var += block.aux_count() as u32;
    let s = |i: usize, j: usize| block.aux_var(i, j) as i32;
    let rows = k - 1;
    out.push(vec![-lits[0], s(0, 0)]);
    for j in 1..bound {
        out.push(vec![-s(0, j)]);
    }
    for i in 1..rows {
        out.push(vec![-lits[i], s(i, 0)]);
        out.push(vec![-s(i - 1, 0), s(i, 0)]);
        for j in 1..bound {
            out.push(vec![-lits[i], -s(i - 1, j - 1), s(i, j)]);
            out.push(vec![-s(i - 1, j), s(i, j)]);
        }
        out.push(vec![-lits[i], -s(i - 1, bound - 1)]);
    }
    out.push(vec![-lits[k - 1], -s(rows - 1, bound - 1)]);
    Some(block)
}

pub fn encode(
    sub: &Subinstance,
    treewidth: usize,
    weight_scale: u64,
) -> Result<MaxSatProblem, EncodingError> {
    encode_with(
        sub,
        treewidth,
        &EncodeOptions {
            weight_scale,
            ..EncodeOptions::default()
        },
    )
}

pub fn encode_with(
    sub: &Subinstance,
    treewidth: usize,
    opts: &EncodeOptions,
) -> Result<MaxSatProblem, EncodingError> {
    if opts.weight_scale == 0 {
        return Err(EncodingError::ZeroScale);
    }
    let n = sub.len();
    if let Some(v) = sub.menus.iter().position(Vec::is_empty) {
        return Err(EncodingError::EmptyMenu(sub.vertices[v]));
    }

    let mut kinds = Vec::new();
    let mut par = Vec::with_capacity(n);
    for (v, menu) in sub.menus.iter().enumerate() {
        let mut group = Vec::with_capacity(menu.len());
        for entry in 0..menu.len() {
            kinds.push(VarKind::Par { v, entry });
            group.push(kinds.len() as i32);
        }
        par.push(group);
    }
    let acyc_base = kinds.len();
    for u in 0..n {
        for v in u + 1..n {
            kinds.push(VarKind::Acyc { u, v });
        }
    }
    let ord_base = kinds.len();
    for u in 0..n {
        for v in u + 1..n {
            kinds.push(VarKind::Ord { u, v });
        }
    }
    let arc_base = kinds.len();
    for u in 0..n {
        for v in 0..n {
            kinds.push(VarKind::Arc { u, v });
        }
    }

    let mut p = MaxSatProblem {
        n_local: n,
        treewidth,
        weight_scale: opts.weight_scale,
        kinds,
        par,
        acyc_base,
        ord_base,
        arc_base,
        hard: Vec::new(),
        cardinality: Vec::new(),
        soft: Vec::new(),
        entry_weights: Vec::new(),
        incumbent_weight: 0,
    };
    let mut hard = Vec::new();

    // transitivity of both total orders
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if u == v || v == w || u == w {
                    continue;
                }
                hard.push(vec![-p.acyc(u, v), -p.acyc(v, w), p.acyc(u, w)]);
                hard.push(vec![-p.ord(u, v), -p.ord(v, w), p.ord(u, w)]);
            }
        }
    }
    for v in 0..n {
        hard.push(vec![-p.arc(v, v)]);
    }

    let mut cardinality = Vec::new();
    for (v, menu) in sub.menus.iter().enumerate() {
        cardinality.push(Cardinality::ExactlyOne(p.par[v].clone()));
        for (e, entry) in menu.iter().enumerate() {
            let x = p.par(v, e);
            for &u in &entry.local_parents {
                hard.push(vec![-x, p.acyc(u, v)]);
                hard.push(vec![-x, -p.ord(u, v), p.arc(u, v)]);
                hard.push(vec![-x, -p.ord(v, u), p.arc(v, u)]);
            }
            for (i, &u) in entry.local_parents.iter().enumerate() {
                for &w in &entry.local_parents[i + 1..] {
                    hard.push(vec![-x, -p.ord(u, w), p.arc(u, w)]);
                    hard.push(vec![-x, -p.ord(w, u), p.arc(w, u)]);
                }
            }
            for &u in &entry.forced_sources {
                hard.push(vec![-x, p.acyc(u, v)]);
            }
        }
    }

    // fill-in: both higher neighbours of an eliminated vertex get joined
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                if u == v || v == w || u == w {
                    continue;
                }
                hard.push(vec![-p.arc(u, v), -p.arc(u, w), -p.ord(v, w), p.arc(v, w)]);
            }
        }
    }
    for v in 0..n {
        let lits: Vec<i32> = (0..n).filter(|&w| w != v).map(|w| p.arc(v, w)).collect();
        cardinality.push(Cardinality::AtMost {
            lits,
            bound: treewidth,
        });
    }
    if opts.redundant_pair_clauses {
        for u in 0..n {
            for v in u + 1..n {
                hard.push(vec![-p.arc(u, v), -p.arc(v, u)]);
            }
        }
    }
    for &(u, v) in &sub.virtual_edges {
        hard.push(vec![-p.ord(u, v), p.arc(u, v)]);
        hard.push(vec![-p.ord(v, u), p.arc(v, u)]);
    }

    let mut soft = Vec::new();
    let mut entry_weights = Vec::with_capacity(n);
    for (v, menu) in sub.menus.iter().enumerate() {
        let ws: Vec<u64> = menu
            .iter()
            .map(|e| (e.offset * opts.weight_scale as f64).round().max(0.0) as u64)
            .collect();
        for (e, &w) in ws.iter().enumerate() {
            if w > 0 {
                soft.push(SoftUnit {
                    lit: p.par(v, e),
                    weight: w,
                });
            }
        }
        entry_weights.push(ws);
    }
    p.incumbent_weight = sub
        .incumbent
        .iter()
        .enumerate()
        .map(|(v, &e)| entry_weights[v][e])
        .sum();
    p.hard = hard;
    p.cardinality = cardinality;
    p.soft = soft;
    p.entry_weights = entry_weights;
    Ok(p)
}

/// A solver assignment over the problem's variables (index `i` holds
/// variable `i + 1`), plus the weight it achieves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSatModel {
    pub assignment: Vec<bool>,
    pub weight: u64,
}

/// A decoded and checked local solution, in local vertex ids.
#[derive(Clone, Debug)]
pub struct DecodedLocal {
    /// Menu index per local vertex.
    pub choice: Vec<usize>,
    pub topological_order: Vec<usize>,
    pub elimination_order: Vec<usize>,
    /// Arc variables set true.
    pub arcs: Vec<(usize, usize)>,
    /// Decomposition of the local moral graph plus virtual edges.
    pub td: TreeDecomposition,
    pub weight: u64,
}

impl DecodedLocal {
    /// Global parent sets of the window vertices.
    pub fn parent_sets(&self, sub: &Subinstance) -> Vec<(usize, Vec<usize>)> {
        self.choice
            .iter()
            .enumerate()
            .map(|(v, &e)| (sub.vertices[v], sub.menus[v][e].parents.clone()))
            .collect()
    }
}

/// The local moral graph of a menu choice plus all virtual edges.
pub fn extended_moral_graph(sub: &Subinstance, choice: &[usize]) -> Graph {
    let mut g = Graph::from_edges(sub.len(), &sub.virtual_edges);
    for (v, &e) in choice.iter().enumerate() {
        let ps = &sub.menus[v][e].local_parents;
        for (i, &u) in ps.iter().enumerate() {
            g.add_edge(u, v);
            for &w in &ps[i + 1..] {
                g.add_edge(u, w);
            }
        }
    }
    g
}

/// Position-sorts a total order given by a starred pair literal.
fn order_from(n: usize, before: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut rank: Vec<(usize, usize)> = (0..n)
        .map(|v| ((0..n).filter(|&u| u != v && before(u, v)).count(), v))
        .collect();
    rank.sort_unstable();
    rank.iter()
        .enumerate()
        .all(|(i, &(r, _))| r == i)
        .then(|| rank.into_iter().map(|(_, v)| v).collect())
}

/// Checks a model against every hard constraint and extracts the local
/// solution. The model is not trusted.
pub fn decode(
    problem: &MaxSatProblem,
    model: &MaxSatModel,
    sub: &Subinstance,
) -> Result<DecodedLocal, EncodingError> {
    let a = &model.assignment;
    let val = |l: i32| lit_value(a, l);
    let protocol = |m: String| EncodingError::Protocol(m);
    if let Some(c) = problem.hard.iter().find(|c| !c.iter().any(|&l| val(l))) {
        return Err(protocol(format!("hard clause {c:?} violated")));
    }
    let n = problem.n_local;
    let mut choice = Vec::with_capacity(n);
    for v in 0..n {
        let chosen: Vec<usize> = (0..sub.menus[v].len())
            .filter(|&e| val(problem.par(v, e)))
            .collect();
        if chosen.len() != 1 {
            return Err(protocol(format!(
                "vertex {} has {} parent sets selected",
                sub.vertices[v],
                chosen.len()
            )));
        }
        choice.push(chosen[0]);
    }
    if let Some(c) = problem.cardinality.iter().find(|c| !c.holds(val)) {
        return Err(protocol(format!("cardinality constraint {c:?} violated")));
    }
    let topological_order = order_from(n, |u, v| val(problem.acyc(u, v)))
        .ok_or_else(|| protocol("acyc variables do not form a total order".into()))?;
    let elimination_order = order_from(n, |u, v| val(problem.ord(u, v)))
        .ok_or_else(|| protocol("ord variables do not form a total order".into()))?;
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if val(problem.arc(u, v)) {
                arcs.push((u, v));
            }
        }
    }
    let g = extended_moral_graph(sub, &choice);
    let order = EliminationOrdering::new(elimination_order.clone()).expect("permutation");
    let td = td_from_elimination(&order, &g);
    if td.width() > problem.treewidth {
        return Err(protocol(format!(
            "decoded decomposition has width {} > {}",
            td.width(),
            problem.treewidth
        )));
    }
    Ok(DecodedLocal {
        choice,
        topological_order,
        elimination_order,
        arcs,
        td,
        weight: problem.weight_of(val),
    })
}

/// Builds the assignment that realises a menu choice with the given orders:
/// arcs are the fill-in closure of the extended moral graph, oriented by the
/// elimination order. Returns `None` when some vertex would get more than
/// `treewidth` higher neighbours.
pub fn assignment_for(
    problem: &MaxSatProblem,
    sub: &Subinstance,
    choice: &[usize],
    topological_order: &[usize],
    elimination_order: &[usize],
) -> Option<MaxSatModel> {
    let n = problem.n_local;
    let mut a = vec![false; problem.var_count()];
    let mut set = |lit: i32, value: bool| {
        a[lit.unsigned_abs() as usize - 1] = if lit > 0 { value } else { !value };
    };
    for (v, &e) in choice.iter().enumerate() {
        set(problem.par(v, e), true);
    }
    let mut topo_pos = vec![0; n];
    let mut elim_pos = vec![0; n];
    for (i, &v) in topological_order.iter().enumerate() {
        topo_pos[v] = i;
    }
    for (i, &v) in elimination_order.iter().enumerate() {
        elim_pos[v] = i;
    }
    for u in 0..n {
        for v in u + 1..n {
            set(problem.acyc(u, v), topo_pos[u] < topo_pos[v]);
            set(problem.ord(u, v), elim_pos[u] < elim_pos[v]);
        }
    }
    let g = extended_moral_graph(sub, choice);
    let order = EliminationOrdering::new(elimination_order.to_vec()).ok()?;
    let higher = crate::model::fill_in_closure(&order, &g);
    for (u, hs) in higher.iter().enumerate() {
        if hs.len() > problem.treewidth {
            return None;
        }
        for &w in hs {
            set(problem.arc(u, w), true);
        }
    }
    let weight = problem.weight_of(|l| lit_value(&a, l));
    Some(MaxSatModel {
        assignment: a,
        weight,
    })
}
