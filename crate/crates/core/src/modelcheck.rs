//! Polynomial-time model checking by iterated labelling.
//!
//! Every subformula occurrence carries a label: a subteam of the input team,
//! or the null marker. Starting from the whole team everywhere, labels are
//! refined alternately bottom-up (odd rounds) and top-down (even rounds)
//! until three consecutive labellings agree. The team satisfies the formula
//! exactly when the root keeps the whole team.
//!
//! Odd round `i`, bottom-up:
//! - literal: `Maxsub(f_{i-1}(ψ), ψ)`, null if the previous label was null
//! - `ψ ∧ χ`: `f_i(ψ) ∩ f_i(χ)`
//! - `ψ ∨ χ`: `f_i(ψ) ∪ f_i(χ)`
//!
//! Even round `i`, top-down:
//! - root: `f_{i-1}(root)`
//! - children of `ψ ∧ χ`: `f_i(ψ ∧ χ)`
//! - child `ψ` of `ψ ∨ χ`: `f_{i-1}(ψ) ∩ f_i(ψ ∨ χ)`
//!
//! Null absorbs both union and intersection.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::formula::{Formula, OccurrencePath};
use crate::team::{Team, TeamOrNull};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelCheckError {
    #[error("variable {0:?} of the formula is missing from the team domain")]
    MissingVariable(String),
    #[error("maxsub is only computed for literals, got {0}")]
    NotALiteral(String),
    #[error("labelling has no label for occurrence {0}")]
    MissingLabel(OccurrencePath),
    #[error("label of occurrence {0} is not a subteam of the input team")]
    LabelOutsideTeam(OccurrencePath),
}

/// `Maxsub(s, lit)`: the largest subteam of `s` satisfying the literal, or
/// null when there is none (only possible for `NE` on the empty team).
pub fn maxsub_literal(s: &TeamOrNull, lit: &Formula) -> Result<TeamOrNull, ModelCheckError> {
    if !lit.is_literal() {
        return Err(ModelCheckError::NotALiteral(lit.to_string()));
    }
    let TeamOrNull::Team(team) = s else {
        return Ok(TeamOrNull::Null);
    };
    let keep = |var: &str, value: bool| -> Result<TeamOrNull, ModelCheckError> {
        let i = team
            .domain()
            .index_of(var)
            .ok_or_else(|| ModelCheckError::MissingVariable(var.to_string()))?;
        Ok(TeamOrNull::Team(
            team.with_rows(team.rows().filter(|r| r[i] == value)),
        ))
    };
    match lit {
        Formula::Ne if team.is_empty() => Ok(TeamOrNull::Null),
        Formula::Ne | Formula::Top => Ok(s.clone()),
        Formula::Bot => Ok(TeamOrNull::Team(Team::empty(team.domain().clone()))),
        Formula::Var(p) => keep(p, true),
        Formula::NegVar(p) => keep(p, false),
        Formula::And(..) | Formula::Or(..) => unreachable!("checked above"),
    }
}

/// Labels of all occurrences after some round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelling {
    pub round: usize,
    pub labels: BTreeMap<OccurrencePath, TeamOrNull>,
}

impl Labelling {
    /// Round 0: every occurrence labelled with the whole team.
    pub fn initial(team: &Team, f: &Formula) -> Self {
        Labelling {
            round: 0,
            labels: f
                .occurrences()
                .into_iter()
                .map(|(path, _)| (path, TeamOrNull::Team(team.clone())))
                .collect(),
        }
    }

    pub fn get(&self, path: &OccurrencePath) -> Option<&TeamOrNull> {
        self.labels.get(path)
    }

    pub fn root(&self) -> &TeamOrNull {
        self.labels
            .get(&OccurrencePath::root())
            .expect("labelling has a root label")
    }
}

/// Result of running the labelling sequence to its fixed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixpointReport {
    /// The stable labelling `f_∞`.
    pub labelling: Labelling,
    /// Index of the last labelling computed; `converged_at + 2`.
    pub rounds: usize,
    /// Least `j` with `f_j = f_{j+1} = f_{j+2}`.
    pub converged_at: usize,
    /// `2·(|t|+1)·|φ|`, the proven upper bound on `converged_at`.
    pub bound: usize,
    pub accepted: bool,
}

impl FixpointReport {
    pub fn within_bound(&self) -> bool {
        self.converged_at <= self.bound
    }
}

/// `2·(|t|+1)·|φ|`.
pub fn round_bound(team_size: usize, formula_size: usize) -> usize {
    2 * (team_size + 1) * formula_size
}

#[derive(Clone, Copy, Debug)]
enum Lit {
    Pos(usize),
    Neg(usize),
    Top,
    Bot,
    Ne,
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Lit(Lit),
    And(usize, usize),
    Or(usize, usize),
}

/// Labels of every node, as bitsets over the members of the input team.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Labels {
    null: Vec<bool>,
    bits: Vec<u64>,
}

/// A formula compiled against a team: nodes in preorder (parents before
/// children) and one member bitset per domain column.
struct Engine<'a> {
    team: &'a Team,
    nodes: Vec<Node>,
    parent: Vec<Option<usize>>,
    words: usize,
    full: Vec<u64>,
    columns: Vec<Vec<u64>>,
}

impl<'a> Engine<'a> {
    fn new(team: &'a Team, f: &Formula) -> Result<Self, ModelCheckError> {
        let members = team.len();
        let words = members.div_ceil(64).max(1);
        let mut full = vec![0u64; words];
        for i in 0..members {
            full[i / 64] |= 1 << (i % 64);
        }
        let mut engine = Engine {
            team,
            nodes: Vec::with_capacity(f.size()),
            parent: Vec::with_capacity(f.size()),
            words,
            full,
            columns: Vec::new(),
        };
        let mut column_of = BTreeMap::new();
        engine.compile(f, None, &mut column_of)?;
        Ok(engine)
    }

    fn column(
        &mut self,
        var: &str,
        column_of: &mut BTreeMap<String, usize>,
    ) -> Result<usize, ModelCheckError> {
        if let Some(&c) = column_of.get(var) {
            return Ok(c);
        }
        let idx = self
            .team
            .domain()
            .index_of(var)
            .ok_or_else(|| ModelCheckError::MissingVariable(var.to_string()))?;
        let mut col = vec![0u64; self.words];
        for (i, row) in self.team.rows().enumerate() {
            if row[idx] {
                col[i / 64] |= 1 << (i % 64);
            }
        }
        self.columns.push(col);
        column_of.insert(var.to_string(), self.columns.len() - 1);
        Ok(self.columns.len() - 1)
    }

    fn compile(
        &mut self,
        f: &Formula,
        parent: Option<usize>,
        column_of: &mut BTreeMap<String, usize>,
    ) -> Result<usize, ModelCheckError> {
        let at = self.nodes.len();
        self.parent.push(parent);
        let node = match f {
            Formula::Var(p) => Node::Lit(Lit::Pos(self.column(p, column_of)?)),
            Formula::NegVar(p) => Node::Lit(Lit::Neg(self.column(p, column_of)?)),
            Formula::Top => Node::Lit(Lit::Top),
            Formula::Bot => Node::Lit(Lit::Bot),
            Formula::Ne => Node::Lit(Lit::Ne),
            Formula::And(..) | Formula::Or(..) => Node::Lit(Lit::Top),
        };
        self.nodes.push(node);
        if let Some((l, r)) = f.children() {
            let li = self.compile(l, Some(at), column_of)?;
            let ri = self.compile(r, Some(at), column_of)?;
            self.nodes[at] = match f {
                Formula::And(..) => Node::And(li, ri),
                _ => Node::Or(li, ri),
            };
        }
        Ok(at)
    }

    fn initial(&self) -> Labels {
        let n = self.nodes.len();
        let mut bits = Vec::with_capacity(n * self.words);
        for _ in 0..n {
            bits.extend_from_slice(&self.full);
        }
        Labels {
            null: vec![false; n],
            bits,
        }
    }

    fn slot(&self, node: usize) -> std::ops::Range<usize> {
        node * self.words..(node + 1) * self.words
    }

    fn set_null(&self, labels: &mut Labels, node: usize) {
        labels.null[node] = true;
        let slot = self.slot(node);
        labels.bits[slot].fill(0);
    }

    /// `labels[node] := labels[a] op labels[b]`, null-absorbing.
    fn combine(
        &self,
        labels: &mut Labels,
        node: usize,
        a: usize,
        b: usize,
        op: fn(u64, u64) -> u64,
    ) {
        if labels.null[a] || labels.null[b] {
            self.set_null(labels, node);
            return;
        }
        labels.null[node] = false;
        let w = self.words;
        for i in 0..w {
            labels.bits[node * w + i] = op(labels.bits[a * w + i], labels.bits[b * w + i]);
        }
    }

    fn maxsub(&self, lit: Lit, prev: &Labels, node: usize, dst: &mut Labels) {
        let slot = self.slot(node);
        if prev.null[node] {
            dst.null[node] = true;
            dst.bits[slot].fill(0);
            return;
        }
        let src = &prev.bits[slot.clone()];
        dst.null[node] = false;
        match lit {
            Lit::Ne if src.iter().all(|&w| w == 0) => {
                dst.null[node] = true;
                dst.bits[slot].fill(0);
            }
            Lit::Ne | Lit::Top => dst.bits[slot].copy_from_slice(src),
            Lit::Bot => dst.bits[slot].fill(0),
            Lit::Pos(c) => {
                for (w, out) in dst.bits[slot].iter_mut().enumerate() {
                    *out = src[w] & self.columns[c][w];
                }
            }
            Lit::Neg(c) => {
                for (w, out) in dst.bits[slot].iter_mut().enumerate() {
                    *out = src[w] & !self.columns[c][w] & self.full[w];
                }
            }
        }
    }

    fn odd_step(&self, prev: &Labels) -> Labels {
        let mut next = prev.clone();
        for node in (0..self.nodes.len()).rev() {
            match self.nodes[node] {
                Node::Lit(lit) => self.maxsub(lit, prev, node, &mut next),
                Node::And(l, r) => self.combine(&mut next, node, l, r, |x, y| x & y),
                Node::Or(l, r) => self.combine(&mut next, node, l, r, |x, y| x | y),
            }
        }
        next
    }

    fn even_step(&self, prev: &Labels) -> Labels {
        let mut next = prev.clone();
        let w = self.words;
        for node in 1..self.nodes.len() {
            let parent = self.parent[node].expect("non-root node has a parent");
            if next.null[parent] {
                self.set_null(&mut next, node);
                continue;
            }
            match self.nodes[parent] {
                Node::And(..) => {
                    next.null[node] = false;
                    next.bits
                        .copy_within(parent * w..(parent + 1) * w, node * w);
                }
                Node::Or(..) => {
                    // `next[node]` still holds `prev[node]` here.
                    if prev.null[node] {
                        continue;
                    }
                    for i in 0..w {
                        next.bits[node * w + i] &= next.bits[parent * w + i];
                    }
                }
                Node::Lit(_) => unreachable!("literals have no children"),
            }
        }
        next
    }

    fn to_team_or_null(&self, labels: &Labels, node: usize) -> TeamOrNull {
        if labels.null[node] {
            return TeamOrNull::Null;
        }
        let bits = &labels.bits[self.slot(node)];
        TeamOrNull::Team(
            self.team.with_rows(
                self.team
                    .rows()
                    .enumerate()
                    .filter(|(i, _)| bits[i / 64] >> (i % 64) & 1 == 1)
                    .map(|(_, r)| r),
            ),
        )
    }

    fn to_labelling(&self, labels: &Labels, round: usize, paths: &[OccurrencePath]) -> Labelling {
        Labelling {
            round,
            labels: paths
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), self.to_team_or_null(labels, i)))
                .collect(),
        }
    }

    fn load_labelling(
        &self,
        labelling: &Labelling,
        paths: &[OccurrencePath],
    ) -> Result<Labels, ModelCheckError> {
        let rows: Vec<&[bool]> = self.team.rows().collect();
        let mut labels = self.initial();
        for (node, path) in paths.iter().enumerate() {
            let label = labelling
                .get(path)
                .ok_or_else(|| ModelCheckError::MissingLabel(path.clone()))?;
            let slot = self.slot(node);
            labels.bits[slot.clone()].fill(0);
            match label {
                TeamOrNull::Null => labels.null[node] = true,
                TeamOrNull::Team(t) => {
                    if t.domain() != self.team.domain() || !t.is_subset(self.team) {
                        return Err(ModelCheckError::LabelOutsideTeam(path.clone()));
                    }
                    for (i, row) in rows.iter().enumerate() {
                        if t.contains(row) {
                            labels.bits[slot.start + i / 64] |= 1 << (i % 64);
                        }
                    }
                }
            }
        }
        Ok(labels)
    }

    fn root_is_full(&self, labels: &Labels) -> bool {
        !labels.null[0] && labels.bits[..self.words] == self.full[..]
    }

    /// Runs to the fixed point. With `trace`, every labelling is kept.
    fn run(&self, mut trace: Option<&mut Vec<Labels>>) -> (Labels, usize) {
        let bound = round_bound(self.team.len(), self.nodes.len());
        let mut older = self.initial();
        if let Some(t) = trace.as_deref_mut() {
            t.push(older.clone());
        }
        let mut old = self.odd_step(&older);
        if let Some(t) = trace.as_deref_mut() {
            t.push(old.clone());
        }
        let mut round = 1;
        loop {
            round += 1;
            let next = if round % 2 == 1 {
                self.odd_step(&old)
            } else {
                self.even_step(&old)
            };
            if let Some(t) = trace.as_deref_mut() {
                t.push(next.clone());
            }
            if next == old && old == older {
                return (next, round);
            }
            // The sequence is monotone over a finite lattice; this is a bug guard.
            assert!(
                round <= 2 * bound + 8,
                "labelling sequence failed to stabilize within {round} rounds"
            );
            older = old;
            old = next;
        }
    }
}

fn occurrence_paths(f: &Formula) -> Vec<OccurrencePath> {
    f.occurrences().into_iter().map(|(p, _)| p).collect()
}

/// One bottom-up round applied to `prev`.
pub fn odd_step(team: &Team, f: &Formula, prev: &Labelling) -> Result<Labelling, ModelCheckError> {
    let engine = Engine::new(team, f)?;
    let paths = occurrence_paths(f);
    let labels = engine.load_labelling(prev, &paths)?;
    Ok(engine.to_labelling(&engine.odd_step(&labels), prev.round + 1, &paths))
}

/// One top-down round applied to `prev`.
pub fn even_step(team: &Team, f: &Formula, prev: &Labelling) -> Result<Labelling, ModelCheckError> {
    let engine = Engine::new(team, f)?;
    let paths = occurrence_paths(f);
    let labels = engine.load_labelling(prev, &paths)?;
    Ok(engine.to_labelling(&engine.even_step(&labels), prev.round + 1, &paths))
}

/// Iterates the labelling rounds until `f_j = f_{j+1} = f_{j+2}`.
pub fn run_fixpoint(team: &Team, f: &Formula) -> Result<FixpointReport, ModelCheckError> {
    let engine = Engine::new(team, f)?;
    let (labels, rounds) = engine.run(None);
    let paths = occurrence_paths(f);
    Ok(FixpointReport {
        accepted: engine.root_is_full(&labels),
        labelling: engine.to_labelling(&labels, rounds, &paths),
        rounds,
        converged_at: rounds - 2,
        bound: round_bound(team.len(), f.size()),
    })
}

/// Every labelling `f_0, f_1, …` up to and including the fixed point.
pub fn trace_fixpoint(team: &Team, f: &Formula) -> Result<Vec<Labelling>, ModelCheckError> {
    let engine = Engine::new(team, f)?;
    let mut trace = Vec::new();
    engine.run(Some(&mut trace));
    let paths = occurrence_paths(f);
    Ok(trace
        .iter()
        .enumerate()
        .map(|(i, l)| engine.to_labelling(l, i, &paths))
        .collect())
}

/// Rounds until stabilization, without materializing the labelling.
pub fn converged_at(team: &Team, f: &Formula) -> Result<(bool, usize), ModelCheckError> {
    let engine = Engine::new(team, f)?;
    let (labels, rounds) = engine.run(None);
    Ok((engine.root_is_full(&labels), rounds - 2))
}

/// Decides `t ⊨ f` in time polynomial in `|t| + |f|`.
pub fn model_check(team: &Team, f: &Formula) -> Result<bool, ModelCheckError> {
    let engine = Engine::new(team, f)?;
    let (labels, _) = engine.run(None);
    Ok(engine.root_is_full(&labels))
}
