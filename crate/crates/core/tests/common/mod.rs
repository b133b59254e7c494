#![allow(dead_code)]

use plne::formula::Formula;
use plne::team::{Domain, Team};

/// Positive and negative literal for each variable, then `⊤`, `⊥`, `NE`.
pub fn literals(vars: &[&str]) -> Vec<Formula> {
    let mut out = Vec::new();
    for v in vars {
        out.push(Formula::var(*v));
        out.push(Formula::neg_var(*v));
    }
    out.extend([Formula::Top, Formula::Bot, Formula::Ne]);
    out
}

/// `levels[k]` holds every formula built from `lits` with exactly `k`
/// binary connectives.
pub fn levels(lits: &[Formula], max_connectives: usize) -> Vec<Vec<Formula>> {
    let mut levels: Vec<Vec<Formula>> = vec![lits.to_vec()];
    for k in 1..=max_connectives {
        let mut level = Vec::new();
        for_each_with(&levels, k, |f| level.push(f));
        levels.push(level);
    }
    levels
}

/// Streams the formulas with exactly `k` connectives whose proper
/// subformulas are already tabulated in `levels[..k]`.
pub fn for_each_with(levels: &[Vec<Formula>], k: usize, mut visit: impl FnMut(Formula)) {
    if k == 0 {
        levels[0].iter().cloned().for_each(visit);
        return;
    }
    for left_k in 0..k {
        let right_k = k - 1 - left_k;
        for l in &levels[left_k] {
            for r in &levels[right_k] {
                visit(Formula::and(l.clone(), r.clone()));
                visit(Formula::or(l.clone(), r.clone()));
            }
        }
    }
}

/// Every formula over `lits` with at most `max_connectives` connectives.
pub fn for_each_formula(lits: &[Formula], max_connectives: usize, mut visit: impl FnMut(Formula)) {
    if max_connectives == 0 {
        lits.iter().cloned().for_each(visit);
        return;
    }
    let tabulated = levels(lits, max_connectives - 1);
    for k in 0..=max_connectives {
        for_each_with(&tabulated, k, &mut visit);
    }
}

/// Number of formulas over `n` literals with exactly `k` connectives:
/// Catalan(k) tree shapes, two connectives per node, `n` choices per leaf.
pub fn count_with(n: u64, k: u32) -> u64 {
    let catalan = (0..k as u64).fold(1u64, |c, i| c * 2 * (2 * i + 1) / (i + 2));
    catalan * 2u64.pow(k) * n.pow(k + 1)
}

/// The `2^(2^n)` teams over a domain, indexed by membership mask.
pub fn teams_by_mask(domain: &Domain) -> Vec<Team> {
    let universe = Team::full(domain.clone()).unwrap();
    let rows: Vec<&[bool]> = universe.rows().collect();
    (0..1u64 << rows.len())
        .map(|mask| {
            let picked = rows
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, r)| r.to_vec());
            Team::new(domain.clone(), picked).unwrap()
        })
        .collect()
}

/// Submasks of `mask` (including `0` and `mask` itself).
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
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

pub fn domain(names: &[&str]) -> Domain {
    Domain::new(names.iter().copied()).unwrap()
}
