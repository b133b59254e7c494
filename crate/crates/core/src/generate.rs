//! Seeded random formulas and teams.
//!
//! All randomness flows from a single ChaCha8 stream, so a seed and a
//! configuration fully determine the corpus.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::formula::{parse, Formula};
use crate::team::{row_from_index, Domain, Team};

pub const MAX_VARS: usize = 16;
pub const MAX_DEPTH: usize = 16;
pub const MAX_COUNT: usize = 1_000_000;

/// Chance that an inner position (remaining depth > 0) becomes a connective.
const CONNECTIVE_PROB: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("variable count must be between 1 and {MAX_VARS}, got {0}")]
    Vars(usize),
    #[error("depth must be at most {MAX_DEPTH}, got {0}")]
    Depth(usize),
    #[error("NE probability must lie in [0, 1], got {0}")]
    NeProb(f64),
    #[error("count must be at most {MAX_COUNT}, got {0}")]
    Count(usize),
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    pub depth: usize,
    pub vars: usize,
    pub ne_prob: f64,
    /// Teams have between 0 and `max_team` members (capped at `2^vars`).
    pub max_team: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            count: 100,
            depth: 4,
            vars: 2,
            ne_prob: 0.2,
            max_team: 8,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.vars == 0 || self.vars > MAX_VARS {
            return Err(GenError::Vars(self.vars));
        }
        if self.depth > MAX_DEPTH {
            return Err(GenError::Depth(self.depth));
        }
        if !(0.0..=1.0).contains(&self.ne_prob) {
            return Err(GenError::NeProb(self.ne_prob));
        }
        if self.count > MAX_COUNT {
            return Err(GenError::Count(self.count));
        }
        Ok(())
    }
}

/// `p, q, r, s, u, v, w, x, y, z`, then `x10, x11, …`.
pub fn var_names(n: usize) -> Vec<String> {
    const NAMES: [&str; 10] = ["p", "q", "r", "s", "u", "v", "w", "x", "y", "z"];
    (0..n)
        .map(|i| match NAMES.get(i) {
            Some(name) => name.to_string(),
            None => format!("x{i}"),
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_literal(rng: &mut impl Rng, vars: &[String], ne_prob: f64) -> Formula {
    if rng.gen_bool(ne_prob) {
        return Formula::Ne;
    }
    match rng.gen_range(0..10) {
        0 => Formula::Top,
        1 => Formula::Bot,
        k => {
            let name = vars[rng.gen_range(0..vars.len())].clone();
            if k % 2 == 0 {
                Formula::Var(name)
            } else {
                Formula::NegVar(name)
            }
        }
    }
}

/// A formula of connective depth at most `depth`.
pub fn random_formula(rng: &mut impl Rng, depth: usize, vars: &[String], ne_prob: f64) -> Formula {
    random_formula_with(rng, depth, vars, ne_prob, CONNECTIVE_PROB)
}

fn random_formula_with(
    rng: &mut impl Rng,
    depth: usize,
    vars: &[String],
    ne_prob: f64,
    connective_prob: f64,
) -> Formula {
    if depth == 0 || !rng.gen_bool(connective_prob) {
        return random_literal(rng, vars, ne_prob);
    }
    let left = random_formula_with(rng, depth - 1, vars, ne_prob, connective_prob);
    let right = random_formula_with(rng, depth - 1, vars, ne_prob, connective_prob);
    if rng.gen_bool(0.5) {
        Formula::and(left, right)
    } else {
        Formula::or(left, right)
    }
}

/// A dense random formula with at least `min_symbols` nodes.
pub fn large_formula(
    rng: &mut impl Rng,
    vars: &[String],
    ne_prob: f64,
    min_symbols: usize,
) -> Formula {
    let depth = (usize::BITS - min_symbols.leading_zeros()) as usize + 2;
    loop {
        let f = random_formula_with(rng, depth, vars, ne_prob, 0.9);
        if f.size() >= min_symbols {
            return f;
        }
    }
}

/// A team of exactly `size` distinct valuations (capped at `2^|domain|`).
pub fn random_team_of_size(rng: &mut impl Rng, domain: &Domain, size: usize) -> Team {
    let n = domain.len();
    let universe = 1usize << n;
    let size = size.min(universe);
    let mut picked = index::sample(rng, universe, size).into_vec();
    picked.sort_unstable();
    Team::new(
        domain.clone(),
        picked.into_iter().map(|i| row_from_index(i as u64, n)),
    )
    .expect("rows match domain")
}

/// A team with a uniformly chosen size in `0..=max_size`.
pub fn random_team(rng: &mut impl Rng, domain: &Domain, max_size: usize) -> Team {
    let cap = max_size.min(1usize << domain.len());
    let size = rng.gen_range(0..=cap);
    random_team_of_size(rng, domain, size)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub formula: Formula,
    pub team: Team,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub seed: u64,
    pub domain: Domain,
    pub items: Vec<Instance>,
}

pub fn generate(config: &GenConfig) -> Result<Corpus, GenError> {
    config.validate()?;
    let names = var_names(config.vars);
    let domain = Domain::new(names.clone()).expect("generated names are distinct");
    let mut rng = rng(config.seed);
    let items = (0..config.count)
        .map(|_| {
            let formula = random_formula(&mut rng, config.depth, &names, config.ne_prob);
            let team = random_team(&mut rng, &domain, config.max_team);
            Instance { formula, team }
        })
        .collect();
    Ok(Corpus {
        seed: config.seed,
        domain,
        items,
    })
}

impl Corpus {
    /// Line-oriented `key: value` text; [`Corpus::parse`] reads it back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "domain: {}", self.domain);
        let _ = writeln!(out, "count: {}", self.items.len());
        for (i, item) in self.items.iter().enumerate() {
            let _ = writeln!(out, "item: {i}");
            let _ = writeln!(out, "formula: {}", item.formula);
            let rows: Vec<String> = item.team.rows().map(crate::team::row_string).collect();
            if rows.is_empty() {
                let _ = writeln!(out, "team: {{}}");
            } else {
                let _ = writeln!(out, "team: {}", rows.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Corpus, GenError> {
        let err = |line: usize, message: String| GenError::Corpus { line, message };
        let mut seed = 0;
        let mut domain: Option<Domain> = None;
        let mut items = Vec::new();
        let mut pending: Option<Formula> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| err(line_no, "expected `key: value`".into()))?;
            let value = value.trim();
            match key.trim() {
                "seed" => {
                    seed = value
                        .parse()
                        .map_err(|_| err(line_no, format!("bad seed {value:?}")))?
                }
                "domain" => {
                    domain = Some(
                        Domain::new(value.split_whitespace())
                            .map_err(|e| err(line_no, e.to_string()))?,
                    )
                }
                "count" | "item" => {}
                "formula" => {
                    pending = Some(parse(value).map_err(|e| err(line_no, e.to_string()))?);
                }
                "team" => {
                    let dom = domain
                        .clone()
                        .ok_or_else(|| err(line_no, "team before domain".into()))?;
                    let formula = pending
                        .take()
                        .ok_or_else(|| err(line_no, "team without formula".into()))?;
                    let rows: Vec<&str> = if value == "{}" {
                        Vec::new()
                    } else {
                        value.split_whitespace().collect()
                    };
                    let team =
                        Team::from_strs(dom, &rows).map_err(|e| err(line_no, e.to_string()))?;
                    items.push(Instance { formula, team });
                }
                other => return Err(err(line_no, format!("unknown key {other:?}"))),
            }
        }
        let domain = domain.ok_or_else(|| err(0, "missing domain".into()))?;
        Ok(Corpus {
            seed,
            domain,
            items,
        })
    }
}
