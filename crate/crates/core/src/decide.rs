//! Satisfiability and validity.
//!
//! Both problems reduce to classical reasoning plus model checking:
//!
//! - SAT: an NE-free formula is satisfiable in a nonempty team iff some
//!   single valuation satisfies it. Otherwise a satisfying team, if any,
//!   exists with at most |φ|_NE members, so candidates up to that size are
//!   model checked in ascending size and lexicographic order.
//! - VAL: an NE-free formula is valid iff it is a classical tautology.
//!   Otherwise it holds on every nonempty team iff the flattening of each
//!   NE-containing occurrence is a classical tautology.

use std::fmt;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::formula::{Formula, OccurrencePath};
use crate::modelcheck::model_check;
use crate::team::{Domain, Row, Team, Valuation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("the classical procedures require an NE-free formula")]
    ContainsNe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    ClassicalReduction,
    SmallModelSearch,
    FlatteningCheck,
    BruteForce,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClassicalReduction => "classicalReduction",
            Method::SmallModelSearch => "smallModelSearch",
            Method::FlatteningCheck => "flatteningCheck",
            Method::BruteForce => "bruteForce",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Team(Team),
    Valuation(Valuation),
}

impl Witness {
    /// The witness as a team; a valuation becomes a singleton.
    pub fn to_team(&self) -> Team {
        match self {
            Witness::Team(t) => t.clone(),
            Witness::Valuation(v) => v.clone().into_team(),
        }
    }
}

/// Answer of a decision procedure, with evidence where available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: bool,
    pub witness: Option<Witness>,
    pub counterexample: Option<Team>,
    pub method: Method,
    /// For a failed flattening check: the occurrence whose flattening is
    /// not a tautology.
    pub refuted_occurrence: Option<OccurrencePath>,
}

impl Verdict {
    fn yes(method: Method, witness: Option<Witness>) -> Self {
        Verdict {
            answer: true,
            witness,
            counterexample: None,
            method,
            refuted_occurrence: None,
        }
    }

    fn no(method: Method, counterexample: Option<Team>) -> Self {
        Verdict {
            answer: false,
            witness: None,
            counterexample,
            method,
            refuted_occurrence: None,
        }
    }

    /// Verdict from an exhaustive search result.
    pub fn brute_sat(witness: Option<Team>) -> Self {
        match witness {
            Some(t) => Verdict::yes(Method::BruteForce, Some(Witness::Team(t))),
            None => Verdict::no(Method::BruteForce, None),
        }
    }

    pub fn brute_valid(counterexample: Option<Team>) -> Self {
        match counterexample {
            Some(t) => Verdict::no(Method::BruteForce, Some(t)),
            None => Verdict::yes(Method::BruteForce, None),
        }
    }
}

/// NE-free formula compiled against a domain for three-valued evaluation.
enum Classical {
    Lit(usize, bool),
    Const(bool),
    And(Box<Classical>, Box<Classical>),
    Or(Box<Classical>, Box<Classical>),
}

impl Classical {
    fn compile(f: &Formula, domain: &Domain) -> Result<Self, DecideError> {
        let index = |p: &str| domain.index_of(p).expect("domain covers the formula");
        Ok(match f {
            Formula::Var(p) => Classical::Lit(index(p), true),
            Formula::NegVar(p) => Classical::Lit(index(p), false),
            Formula::Top => Classical::Const(true),
            Formula::Bot => Classical::Const(false),
            Formula::Ne => return Err(DecideError::ContainsNe),
            Formula::And(l, r) => Classical::And(
                Box::new(Self::compile(l, domain)?),
                Box::new(Self::compile(r, domain)?),
            ),
            Formula::Or(l, r) => Classical::Or(
                Box::new(Self::compile(l, domain)?),
                Box::new(Self::compile(r, domain)?),
            ),
        })
    }

    /// Kleene evaluation under a partial assignment.
    fn eval(&self, partial: &[Option<bool>]) -> Option<bool> {
        match self {
            Classical::Lit(i, polarity) => partial[*i].map(|b| b == *polarity),
            Classical::Const(b) => Some(*b),
            Classical::And(l, r) => match (l.eval(partial), r.eval(partial)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Classical::Or(l, r) => match (l.eval(partial), r.eval(partial)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
        }
    }
}

/// Visits every valuation over `domain` satisfying the NE-free `f`, in
/// lexicographic order (false before true, first variable most significant).
pub fn for_each_model<B>(
    f: &Formula,
    domain: &Domain,
    mut visit: impl FnMut(&[bool]) -> ControlFlow<B>,
) -> Result<ControlFlow<B>, DecideError> {
    let compiled = Classical::compile(f, domain)?;
    let mut partial = vec![None; domain.len()];
    Ok(search(&compiled, &mut partial, 0, &mut visit))
}

fn search<B>(
    f: &Classical,
    partial: &mut [Option<bool>],
    depth: usize,
    visit: &mut impl FnMut(&[bool]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    match f.eval(partial) {
        Some(false) => ControlFlow::Continue(()),
        Some(true) => {
            // Every completion of the prefix is a model.
            let free = partial.len() - depth;
            let mut row: Vec<bool> = partial[..depth].iter().map(|b| b.unwrap()).collect();
            row.resize(partial.len(), false);
            for code in 0..1u64.checked_shl(free as u32).unwrap_or(u64::MAX) {
                for j in 0..free {
                    row[depth + j] = (code >> (free - 1 - j)) & 1 == 1;
                }
                visit(&row)?;
            }
            ControlFlow::Continue(())
        }
        None => {
            for value in [false, true] {
                partial[depth] = Some(value);
                let flow = search(f, partial, depth + 1, visit);
                partial[depth] = None;
                flow?;
            }
            ControlFlow::Continue(())
        }
    }
}

/// Lexicographically least model of `f` over `domain`, if any.
fn first_model(f: &Formula, domain: &Domain) -> Result<Option<Row>, DecideError> {
    let flow = for_each_model(f, domain, |row| ControlFlow::Break(Row::from(row)))?;
    Ok(match flow {
        ControlFlow::Break(row) => Some(row),
        ControlFlow::Continue(()) => None,
    })
}

fn formula_domain(f: &Formula) -> Domain {
    Domain::new(f.vars()).expect("variable set has no duplicates")
}

/// Single-valuation satisfiability of an NE-free formula.
pub fn classical_sat(f: &Formula) -> Result<Verdict, DecideError> {
    let domain = formula_domain(f);
    Ok(match first_model(f, &domain)? {
        Some(row) => {
            let v = Valuation::new(domain, row).expect("row matches domain");
            Verdict::yes(Method::ClassicalReduction, Some(Witness::Valuation(v)))
        }
        None => Verdict::no(Method::ClassicalReduction, None),
    })
}

/// Whether an NE-free formula is a classical tautology.
pub fn classical_valid(f: &Formula) -> Result<bool, DecideError> {
    let negation = f.negate_classical().map_err(|_| DecideError::ContainsNe)?;
    Ok(!classical_sat(&negation)?.answer)
}

/// A valuation over `domain` refuting the NE-free `f`.
fn refutation(f: &Formula, domain: &Domain) -> Option<Row> {
    let negation = f
        .negate_classical()
        .expect("flattened formulas are NE-free");
    first_model(&negation, domain).expect("negation is NE-free")
}

/// Is there a nonempty team satisfying `f`?
pub fn sat(f: &Formula) -> Verdict {
    if !f.contains_ne() {
        let verdict = classical_sat(f).expect("NE-free");
        return match verdict.witness {
            Some(Witness::Valuation(v)) => Verdict::yes(
                Method::ClassicalReduction,
                Some(Witness::Team(v.into_team())),
            ),
            _ => verdict,
        };
    }
    let domain = formula_domain(f);
    // Members of a satisfying team satisfy the flattening, so only its
    // models are candidates. Enumeration order is unchanged by the filter.
    let mut pool: Vec<Row> = Vec::new();
    let _ = for_each_model::<()>(&f.flatten(), &domain, |row| {
        pool.push(row.into());
        ControlFlow::Continue(())
    });
    let max_size = f.ne_count().min(pool.len());
    for size in 1..=max_size {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let team = Team::new(domain.clone(), combo.iter().map(|&i| pool[i].clone()))
                .expect("rows match domain");
            if model_check(&team, f).expect("team domain is P(f)") {
                return Verdict::yes(Method::SmallModelSearch, Some(Witness::Team(team)));
            }
            if !next_combination(&mut combo, pool.len()) {
                break;
            }
        }
    }
    Verdict::no(Method::SmallModelSearch, None)
}

/// Advances to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - (k - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Does every nonempty team satisfy `f`?
///
/// A negative answer always carries a singleton counterexample: a valuation
/// refuting the flattening of some NE-containing occurrence falsifies that
/// occurrence, and with it the whole formula, on its own.
pub fn valid(f: &Formula) -> Verdict {
    let domain = formula_domain(f);
    let single = |row: Row| Team::new(domain.clone(), [row]).expect("row matches domain");
    if !f.contains_ne() {
        return match refutation(f, &domain) {
            Some(row) => Verdict::no(Method::ClassicalReduction, Some(single(row))),
            None => Verdict::yes(Method::ClassicalReduction, None),
        };
    }
    for (path, occurrence) in f.occurrences() {
        if !occurrence.contains_ne() {
            continue;
        }
        if let Some(row) = refutation(&occurrence.flatten(), &domain) {
            let mut verdict = Verdict::no(Method::FlatteningCheck, Some(single(row)));
            verdict.refuted_occurrence = Some(path);
            return verdict;
        }
    }
    Verdict::yes(Method::FlatteningCheck, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(text: &str) -> Formula {
        parse(text).unwrap()
    }

    fn team(names: &[&str], rows: &[&str]) -> Team {
        Team::from_strs(Domain::new(names.iter().copied()).unwrap(), rows).unwrap()
    }

    #[test]
    fn classical_sat_examples() {
        assert!(!classical_sat(&f("p & !p")).unwrap().answer);
        let v = classical_sat(&f("p & q")).unwrap();
        let Some(Witness::Valuation(w)) = v.witness else {
            panic!("expected a valuation")
        };
        assert_eq!((w.get("p"), w.get("q")), (Some(true), Some(true)));
        let v = classical_sat(&f("top")).unwrap();
        let Some(Witness::Valuation(w)) = v.witness else {
            panic!("expected a valuation")
        };
        assert!(w.domain().is_empty());
        assert_eq!(classical_sat(&f("p & NE")), Err(DecideError::ContainsNe));
    }

    #[test]
    fn classical_sat_prefers_least_valuation() {
        let v = classical_sat(&f("p | q")).unwrap();
        let Some(Witness::Valuation(w)) = v.witness else {
            panic!("expected a valuation")
        };
        assert_eq!(w.bits(), &[false, true]);
    }

    #[test]
    fn classical_valid_examples() {
        assert!(classical_valid(&f("p | !p")).unwrap());
        assert!(!classical_valid(&f("p")).unwrap());
        assert!(classical_valid(&f("top")).unwrap());
        assert!(classical_valid(&f("(p & q) | !p | !q")).unwrap());
        assert_eq!(classical_valid(&f("NE")), Err(DecideError::ContainsNe));
    }

    #[test]
    fn models_are_enumerated_in_order() {
        let domain = Domain::new(["p", "q", "r"]).unwrap();
        let mut seen = Vec::new();
        let _ = for_each_model::<()>(&f("p | r"), &domain, |row| {
            seen.push(crate::team::row_string(row));
            ControlFlow::Continue(())
        });
        assert_eq!(seen, ["001", "011", "100", "101", "110", "111"]);
    }

    #[test]
    fn sat_examples() {
        let v = sat(&f("NE & bot"));
        assert!(!v.answer);
        assert_eq!(v.method, Method::SmallModelSearch);

        let v = sat(&f("NE | NE"));
        assert!(v.answer);
        assert_eq!(v.witness.unwrap().to_team().len(), 1);

        let v = sat(&f("(p | !p) & NE"));
        assert_eq!(v.witness, Some(Witness::Team(team(&["p"], &["0"]))));

        let v = sat(&f("p & NE | !p & NE"));
        assert_eq!(v.witness, Some(Witness::Team(team(&["p"], &["0", "1"]))));

        let v = sat(&f("p & q"));
        assert_eq!(v.method, Method::ClassicalReduction);
        assert_eq!(v.witness, Some(Witness::Team(team(&["p", "q"], &["11"]))));
        assert!(!sat(&f("p & !p")).answer);
    }

    #[test]
    fn valid_examples() {
        let v = valid(&f("(p | !p) & NE"));
        assert!(v.answer);
        assert_eq!(v.method, Method::FlatteningCheck);

        let v = valid(&f("p & NE"));
        assert!(!v.answer);
        assert_eq!(v.counterexample, Some(team(&["p"], &["0"])));
        assert_eq!(v.refuted_occurrence, Some(OccurrencePath::root()));

        assert!(valid(&f("NE | p")).answer);

        let v = valid(&f("p | !p"));
        assert!(v.answer);
        assert_eq!(v.method, Method::ClassicalReduction);

        let v = valid(&f("p"));
        assert_eq!(v.counterexample, Some(team(&["p"], &["0"])));

        // The root flattening is a tautology, but the NE-bearing disjunct's is not.
        let v = valid(&f("!p | p & NE"));
        assert!(!v.answer);
        assert_eq!(v.refuted_occurrence, Some(OccurrencePath::new(vec![1])));
        let cx = v.counterexample.unwrap();
        assert!(!model_check(&cx, &f("!p | p & NE")).unwrap());
    }
}
