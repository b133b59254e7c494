//! Reference semantics by exhaustive search.
//!
//! Satisfaction follows the inductive definition literally: a split
//! disjunction is checked by trying every cover `t = s ∪ u`. Nothing here is
//! shared with the model checker, so the two can be compared against each
//! other. Subteams are bitmasks over the members of the evaluated team, which
//! limits the oracle to teams of at most 64 valuations.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::Formula;
use crate::team::{self, Domain, Team, TeamError};

/// Largest team the oracle evaluates.
pub const MAX_ORACLE_TEAM: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("variable {0:?} of the formula is missing from the team domain")]
    MissingVariable(String),
    #[error("team of {0} valuations is too large for the oracle (limit {MAX_ORACLE_TEAM})")]
    TeamTooLarge(usize),
    #[error(transparent)]
    Team(#[from] TeamError),
}

#[derive(Clone, Copy, Debug)]
enum Node {
    /// Classical literal, with the mask of members satisfying it.
    Classical(u64),
    Ne,
    And(usize, usize),
    Or(usize, usize),
}

enum Memo {
    Dense(Vec<u8>),
    Sparse(HashMap<(usize, u64), bool>),
}

/// Evaluates one formula over subteams of a fixed member list.
struct Evaluator {
    nodes: Vec<Node>,
    stride: usize,
    memo: Memo,
}

impl Evaluator {
    fn new(f: &Formula, team: &Team) -> Result<Self, OracleError> {
        if team.len() > MAX_ORACLE_TEAM {
            return Err(OracleError::TeamTooLarge(team.len()));
        }
        check_domain(f, team.domain())?;
        let rows: Vec<&[bool]> = team.rows().collect();
        let all = if rows.len() == 64 {
            u64::MAX
        } else {
            (1u64 << rows.len()) - 1
        };
        let mut nodes = Vec::with_capacity(f.size());
        compile(f, team.domain(), &rows, all, &mut nodes);
        let (stride, memo) = if rows.len() <= 16 {
            let stride = 1usize << rows.len();
            (stride, Memo::Dense(vec![0; stride * nodes.len()]))
        } else {
            (0, Memo::Sparse(HashMap::new()))
        };
        Ok(Evaluator {
            nodes,
            stride,
            memo,
        })
    }

    fn sat(&mut self, node: usize, mask: u64) -> bool {
        match &self.memo {
            Memo::Dense(v) => match v[node * self.stride + mask as usize] {
                1 => return false,
                2 => return true,
                _ => {}
            },
            Memo::Sparse(m) => {
                if let Some(&b) = m.get(&(node, mask)) {
                    return b;
                }
            }
        }
        let value = match self.nodes[node] {
            Node::Classical(models) => mask & !models == 0,
            Node::Ne => mask != 0,
            Node::And(l, r) => self.sat(l, mask) && self.sat(r, mask),
            Node::Or(l, r) => self.split(l, r, mask),
        };
        match &mut self.memo {
            Memo::Dense(v) => v[node * self.stride + mask as usize] = 1 + u8::from(value),
            Memo::Sparse(m) => {
                m.insert((node, mask), value);
            }
        }
        value
    }

    /// Is there a cover `mask = s ∪ u` with `s ⊨ left` and `u ⊨ right`?
    fn split(&mut self, left: usize, right: usize, mask: u64) -> bool {
        for s in submasks(mask) {
            if !self.sat(left, s) {
                continue;
            }
            // u must contain everything s misses, plus any part of s.
            let rest = mask & !s;
            for extra in submasks(s) {
                if self.sat(right, rest | extra) {
                    return true;
                }
            }
        }
        false
    }
}

fn compile(f: &Formula, domain: &Domain, rows: &[&[bool]], all: u64, out: &mut Vec<Node>) -> usize {
    let at = out.len();
    let models = |pred: &dyn Fn(&[bool]) -> bool| -> u64 {
        rows.iter()
            .enumerate()
            .filter(|(_, r)| pred(r))
            .fold(0, |m, (i, _)| m | 1 << i)
    };
    match f {
        Formula::Var(p) => {
            let i = domain.index_of(p).expect("domain checked");
            out.push(Node::Classical(models(&|r| r[i])));
        }
        Formula::NegVar(p) => {
            let i = domain.index_of(p).expect("domain checked");
            out.push(Node::Classical(models(&|r| !r[i])));
        }
        Formula::Top => out.push(Node::Classical(all)),
        Formula::Bot => out.push(Node::Classical(0)),
        Formula::Ne => out.push(Node::Ne),
        Formula::And(l, r) | Formula::Or(l, r) => {
            out.push(Node::Ne);
            let li = compile(l, domain, rows, all, out);
            let ri = compile(r, domain, rows, all, out);
            out[at] = if matches!(f, Formula::And(..)) {
                Node::And(li, ri)
            } else {
                Node::Or(li, ri)
            };
        }
    }
    at
}

/// All submasks of `mask`, from `mask` itself down to 0.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            Some((current - 1) & mask)
        };
        Some(current)
    })
}

fn check_domain(f: &Formula, domain: &Domain) -> Result<(), OracleError> {
    match f.vars().into_iter().find(|v| !domain.contains(v)) {
        Some(v) => Err(OracleError::MissingVariable(v)),
        None => Ok(()),
    }
}

/// `t ⊨ f` by exhaustive search.
pub fn satisfies(team: &Team, f: &Formula) -> Result<bool, OracleError> {
    let mut eval = Evaluator::new(f, team)?;
    let all = if team.len() == 64 {
        u64::MAX
    } else {
        (1u64 << team.len()) - 1
    };
    Ok(eval.sat(0, all))
}

/// Truth value of a formula on every team over a domain.
#[derive(Clone, Debug)]
pub struct SatTable {
    universe: Team,
    values: Vec<bool>,
    /// Masks in enumeration order: ascending size, then lexicographic.
    order: Vec<u64>,
}

impl SatTable {
    /// Bit `i` of a mask selects the `i`-th valuation in lexicographic order.
    pub fn get(&self, mask: u64) -> bool {
        self.values[mask as usize]
    }

    pub fn team(&self, mask: u64) -> Team {
        let rows: Vec<&[bool]> = self.universe.rows().collect();
        self.universe.with_rows(
            rows.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, r)| *r),
        )
    }

    /// Masks in the order of [`team::all_teams`].
    pub fn masks(&self) -> &[u64] {
        &self.order
    }

    pub fn satisfying(&self) -> impl Iterator<Item = u64> + '_ {
        self.order.iter().copied().filter(|&m| self.get(m))
    }
}

/// Outcome of an exhaustive closure-property check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyOutcome {
    Pass,
    Fail(Counterexample),
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, PropertyOutcome::Pass)
    }
}

/// Named teams witnessing a property violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub teams: Vec<(&'static str, Team)>,
}

impl Counterexample {
    pub fn get(&self, name: &str) -> Option<&Team> {
        self.teams.iter().find(|(n, _)| *n == name).map(|(_, t)| t)
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, team)) in self.teams.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{name}={team}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Property {
    Downward,
    Union,
    Convex,
    Flat,
    EmptyTeam,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Downward,
        Property::Union,
        Property::Convex,
        Property::Flat,
        Property::EmptyTeam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Downward => "downward",
            Property::Union => "union",
            Property::Convex => "convex",
            Property::Flat => "flat",
            Property::EmptyTeam => "emptyTeam",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown property {s:?}"))
    }
}

/// Brute-force decision procedures over all teams of a domain.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    guard: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            guard: team::DEFAULT_GUARD,
        }
    }
}

impl Oracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Largest domain the oracle will enumerate all teams over.
    pub fn with_guard(guard: usize) -> Self {
        Oracle { guard }
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn satisfies(&self, team: &Team, f: &Formula) -> Result<bool, OracleError> {
        satisfies(team, f)
    }

    pub fn satisfaction_table(
        &self,
        f: &Formula,
        domain: &Domain,
    ) -> Result<SatTable, OracleError> {
        if domain.len() > self.guard {
            return Err(TeamError::GuardExceeded {
                vars: domain.len(),
                limit: self.guard,
            }
            .into());
        }
        let universe = Team::full(domain.clone())?;
        let mut eval = Evaluator::new(f, &universe)?;
        let members = universe.len();
        let values = (0..1u64 << members).map(|m| eval.sat(0, m)).collect();
        // all_teams order: by size, then by the sorted list of row indices.
        let mut order: Vec<u64> = (0..1u64 << members).collect();
        order.sort_by_cached_key(|&m| {
            let idx: Vec<u32> = (0..members as u32).filter(|i| m >> i & 1 == 1).collect();
            (m.count_ones(), idx)
        });
        Ok(SatTable {
            universe,
            values,
            order,
        })
    }

    /// Tests a closure property by quantifying over every team of `domain`.
    pub fn check_property(
        &self,
        f: &Formula,
        domain: &Domain,
        property: Property,
    ) -> Result<PropertyOutcome, OracleError> {
        let table = self.satisfaction_table(f, domain)?;
        Ok(property_on_table(&table, property))
    }

    fn formula_domain(f: &Formula) -> Domain {
        Domain::new(f.vars()).expect("variable set has no duplicates")
    }

    /// Some smallest nonempty team over P(f) satisfying `f`, ties broken
    /// lexicographically.
    pub fn brute_sat(&self, f: &Formula) -> Result<Option<Team>, OracleError> {
        let table = self.satisfaction_table(f, &Self::formula_domain(f))?;
        let found = table.satisfying().find(|&m| m != 0);
        Ok(found.map(|m| table.team(m)))
    }

    /// Whether every nonempty team over P(f) satisfies `f`.
    pub fn brute_valid(&self, f: &Formula) -> Result<bool, OracleError> {
        Ok(self.brute_counterexample(f)?.is_none())
    }

    /// First nonempty team over P(f), in enumeration order, falsifying `f`.
    pub fn brute_counterexample(&self, f: &Formula) -> Result<Option<Team>, OracleError> {
        let table = self.satisfaction_table(f, &Self::formula_domain(f))?;
        Ok(table
            .masks()
            .iter()
            .copied()
            .find(|&m| m != 0 && !table.get(m))
            .map(|m| table.team(m)))
    }
}

/// Evaluates a closure property against a precomputed satisfaction table.
pub fn property_on_table(table: &SatTable, property: Property) -> PropertyOutcome {
    let fail = |teams: Vec<(&'static str, u64)>| {
        PropertyOutcome::Fail(Counterexample {
            teams: teams.into_iter().map(|(n, m)| (n, table.team(m))).collect(),
        })
    };
    let sat: Vec<u64> = table.satisfying().collect();
    match property {
        Property::EmptyTeam => {
            if table.get(0) {
                PropertyOutcome::Pass
            } else {
                fail(vec![("t", 0)])
            }
        }
        Property::Downward => {
            for &t in &sat {
                if let Some(s) = submasks(t)
                    .filter(|&s| !table.get(s))
                    .min_by_key(|&s| rank(table, s))
                {
                    return fail(vec![("t", t), ("s", s)]);
                }
            }
            PropertyOutcome::Pass
        }
        Property::Union => {
            // Closure under binary unions gives closure under finite ones.
            for (i, &t) in sat.iter().enumerate() {
                for &u in &sat[i + 1..] {
                    if !table.get(t | u) {
                        return fail(vec![("t", t), ("u", u)]);
                    }
                }
            }
            PropertyOutcome::Pass
        }
        Property::Convex => {
            for &t in &sat {
                for s in submasks(t).filter(|&s| !table.get(s)) {
                    if let Some(u) = submasks(s).find(|&u| table.get(u)) {
                        return fail(vec![("t", t), ("s", s), ("u", u)]);
                    }
                }
            }
            PropertyOutcome::Pass
        }
        Property::Flat => {
            for &t in table.masks() {
                let singletons = submasks(t)
                    .filter(|m| m.count_ones() == 1)
                    .all(|m| table.get(m));
                if table.get(t) != singletons {
                    return fail(vec![("t", t)]);
                }
            }
            PropertyOutcome::Pass
        }
    }
}

fn rank(table: &SatTable, mask: u64) -> usize {
    table
        .masks()
        .iter()
        .position(|&m| m == mask)
        .unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn dom(names: &[&str]) -> Domain {
        Domain::new(names.iter().copied()).unwrap()
    }

    fn team(names: &[&str], rows: &[&str]) -> Team {
        Team::from_strs(dom(names), rows).unwrap()
    }

    fn sat(t: &Team, f: &str) -> bool {
        satisfies(t, &parse(f).unwrap()).unwrap()
    }

    #[test]
    fn satisfies_examples() {
        let empty = Team::empty(dom(&["p"]));
        assert!(!sat(&empty, "NE"));
        assert!(sat(&empty, "p"));
        let both = team(&["p"], &["1", "0"]);
        assert!(sat(&both, "p | !p"));
        assert!(!sat(&both, "p & NE"));
        assert!(sat(&both, "p & NE | !p & NE"));
    }

    #[test]
    fn missing_variable_is_reported() {
        let t = team(&["p"], &["1"]);
        assert_eq!(
            satisfies(&t, &parse("p & q").unwrap()),
            Err(OracleError::MissingVariable("q".into()))
        );
    }

    #[test]
    fn split_disjunction_needs_both_sides_nonempty_for_ne() {
        let t = team(&["p"], &["1"]);
        assert!(sat(&t, "NE | NE"));
        assert!(sat(&t, "NE | p & NE"));
        assert!(!sat(&t, "NE | !p & NE"));
        assert!(sat(&t, "NE | !p"));
    }

    #[test]
    fn agrees_with_naive_cover_enumeration() {
        // Def-by-def evaluation through Team::covers, no masks or memo.
        fn naive(t: &Team, f: &Formula) -> bool {
            match f {
                Formula::Var(p) => t.valuations().all(|v| v.get(p) == Some(true)),
                Formula::NegVar(p) => t.valuations().all(|v| v.get(p) == Some(false)),
                Formula::Top => true,
                Formula::Bot => t.is_empty(),
                Formula::Ne => !t.is_empty(),
                Formula::And(l, r) => naive(t, l) && naive(t, r),
                Formula::Or(l, r) => t.covers().any(|(s, u)| naive(&s, l) && naive(&u, r)),
            }
        }
        let formulas = [
            "p | q",
            "NE | p & NE",
            "(p | NE) & (q | NE)",
            "(p & NE | !p & NE) & (q | !q & NE)",
            "(NE | NE) | bot",
        ];
        let d = dom(&["p", "q"]);
        for text in formulas {
            let f = parse(text).unwrap();
            for t in team::all_teams(&d, None, 2).unwrap() {
                assert_eq!(satisfies(&t, &f).unwrap(), naive(&t, &f), "{text} on {t}");
            }
        }
    }

    #[test]
    fn property_examples() {
        let oracle = Oracle::new();
        let ne = parse("NE").unwrap();
        let out = oracle
            .check_property(&ne, &dom(&["p"]), Property::Downward)
            .unwrap();
        let PropertyOutcome::Fail(cx) = out else {
            panic!("NE is not downward closed")
        };
        assert!(cx.get("s").unwrap().is_empty());
        assert_eq!(cx.get("t").unwrap().len(), 1);
        assert!(oracle
            .check_property(&ne, &dom(&["p"]), Property::Convex)
            .unwrap()
            .passed());
        assert!(oracle
            .check_property(&ne, &dom(&["p"]), Property::Union)
            .unwrap()
            .passed());
        assert!(!oracle
            .check_property(&ne, &dom(&["p"]), Property::EmptyTeam)
            .unwrap()
            .passed());
        let pq = parse("p | q").unwrap();
        for prop in Property::ALL {
            assert!(oracle
                .check_property(&pq, &dom(&["p", "q"]), prop)
                .unwrap()
                .passed());
        }
        let pne = parse("p & NE").unwrap();
        assert!(!oracle
            .check_property(&pne, &dom(&["p"]), Property::EmptyTeam)
            .unwrap()
            .passed());
        assert!(oracle
            .check_property(&pne, &dom(&["p"]), Property::Convex)
            .unwrap()
            .passed());
        assert!(!oracle
            .check_property(&pne, &dom(&["p"]), Property::Flat)
            .unwrap()
            .passed());
    }

    #[test]
    fn non_convex_formula_is_caught() {
        // Not expressible in the logic, so feed the checker a table directly.
        let universe = Team::full(dom(&["p"])).unwrap();
        let table = SatTable {
            universe,
            values: vec![true, false, false, true],
            order: vec![0, 1, 2, 3],
        };
        let PropertyOutcome::Fail(cx) = property_on_table(&table, Property::Convex) else {
            panic!("expected a convexity violation")
        };
        assert_eq!(cx.to_string(), "t={0, 1} s={1} u={}");
        assert!(property_on_table(&table, Property::Union).passed());
    }

    #[test]
    fn brute_valid_examples() {
        let oracle = Oracle::new();
        assert!(oracle.brute_valid(&parse("p | !p").unwrap()).unwrap());
        let f = parse("p & NE").unwrap();
        assert!(!oracle.brute_valid(&f).unwrap());
        assert_eq!(
            oracle.brute_counterexample(&f).unwrap(),
            Some(team(&["p"], &["0"]))
        );
        assert!(oracle
            .brute_valid(&parse("(p | !p) & NE").unwrap())
            .unwrap());
        assert!(matches!(
            oracle.brute_valid(&parse("a & b & c & d & e").unwrap()),
            Err(OracleError::Team(TeamError::GuardExceeded {
                vars: 5,
                limit: 4
            }))
        ));
    }

    #[test]
    fn brute_sat_examples() {
        let oracle = Oracle::new();
        assert_eq!(oracle.brute_sat(&parse("NE & bot").unwrap()).unwrap(), None);
        assert_eq!(
            oracle.brute_sat(&parse("(p | !p) & NE").unwrap()).unwrap(),
            Some(team(&["p"], &["0"]))
        );
        assert_eq!(oracle.brute_sat(&parse("p & !p").unwrap()).unwrap(), None);
        assert_eq!(
            oracle
                .brute_sat(&parse("p & NE | !p & NE").unwrap())
                .unwrap(),
            Some(team(&["p"], &["0", "1"]))
        );
    }
}
