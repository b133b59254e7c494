//! Valuations and teams over finite, ordered variable domains.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Unbounded team enumeration refuses domains wider than this by default.
pub const DEFAULT_GUARD: usize = 4;

/// Hard ceiling for any enumeration indexed by valuation number.
pub const MAX_ENUMERATION_WIDTH: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TeamError {
    #[error("duplicate domain variable {0:?}")]
    DuplicateVariable(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("row {row} has length {found}, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("variable {0:?} is not in the team's domain")]
    UnknownVariable(String),
    #[error("domain of {vars} variables exceeds the enumeration guard of {limit}")]
    GuardExceeded { vars: usize, limit: usize },
    #[error("domain of {0} variables is too wide to enumerate")]
    TooWide(usize),
    #[error("team file line {line}: {message}")]
    File { line: usize, message: String },
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "bot" | "top")
}

/// An ordered list of distinct variable names.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Domain(Arc<[String]>);

impl Domain {
    pub fn new<I, S>(names: I) -> Result<Self, TeamError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(TeamError::DuplicateVariable(name.clone()));
            }
        }
        Ok(Domain(names.into()))
    }

    pub fn empty() -> Self {
        Domain(Arc::from(Vec::new()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

/// One row of a team: a truth value per domain variable.
pub type Row = Box<[bool]>;

fn write_row(f: &mut fmt::Formatter<'_>, row: &[bool]) -> fmt::Result {
    if row.is_empty() {
        return f.write_str("-");
    }
    for &bit in row {
        f.write_str(if bit { "1" } else { "0" })?;
    }
    Ok(())
}

pub(crate) fn row_string(row: &[bool]) -> String {
    struct R<'a>(&'a [bool]);
    impl fmt::Display for R<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_row(f, self.0)
        }
    }
    R(row).to_string()
}

/// Row number `index` of the lexicographic listing of all rows over `width`
/// variables (first variable most significant).
pub fn row_from_index(index: u64, width: usize) -> Row {
    (0..width)
        .map(|j| (index >> (width - 1 - j)) & 1 == 1)
        .collect()
}

/// A single valuation over a domain.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    domain: Domain,
    bits: Row,
}

impl Valuation {
    pub fn new(domain: Domain, bits: impl Into<Row>) -> Result<Self, TeamError> {
        let bits = bits.into();
        if bits.len() != domain.len() {
            return Err(TeamError::RowLength {
                row: 0,
                expected: domain.len(),
                found: bits.len(),
            });
        }
        Ok(Valuation { domain, bits })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, var: &str) -> Option<bool> {
        self.domain.index_of(var).map(|i| self.bits[i])
    }

    pub fn into_team(self) -> Team {
        let mut rows = BTreeSet::new();
        rows.insert(self.bits);
        Team {
            domain: self.domain,
            rows,
        }
    }
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}=", self.domain)?;
        write_row(f, &self.bits)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, bit) in self.domain.names().iter().zip(self.bits.iter()) {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{name}={}", u8::from(*bit))?;
        }
        if first {
            f.write_str("(empty valuation)")?;
        }
        Ok(())
    }
}

/// A set of valuations over a shared domain. Rows are kept sorted, so
/// iteration order is lexicographic on bit strings.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Team {
    domain: Domain,
    rows: BTreeSet<Row>,
}

impl Team {
    /// Builds a team; duplicate rows collapse.
    pub fn new<I, R>(domain: Domain, rows: I) -> Result<Self, TeamError>
    where
        I: IntoIterator<Item = R>,
        R: Into<Row>,
    {
        let mut set = BTreeSet::new();
        for (i, row) in rows.into_iter().enumerate() {
            let row = row.into();
            if row.len() != domain.len() {
                return Err(TeamError::RowLength {
                    row: i,
                    expected: domain.len(),
                    found: row.len(),
                });
            }
            set.insert(row);
        }
        Ok(Team { domain, rows: set })
    }

    /// Builds a team from bit strings such as `"10"`.
    pub fn from_strs(domain: Domain, rows: &[&str]) -> Result<Self, TeamError> {
        let mut parsed = Vec::with_capacity(rows.len());
        for (i, text) in rows.iter().enumerate() {
            parsed.push(
                parse_row(text, domain.len()).map_err(|found| TeamError::RowLength {
                    row: i,
                    expected: domain.len(),
                    found,
                })?,
            );
        }
        Team::new(domain, parsed)
    }

    pub fn empty(domain: Domain) -> Self {
        Team {
            domain,
            rows: BTreeSet::new(),
        }
    }

    /// Every valuation over the domain.
    pub fn full(domain: Domain) -> Result<Self, TeamError> {
        let n = domain.len();
        if n > MAX_ENUMERATION_WIDTH {
            return Err(TeamError::TooWide(n));
        }
        let rows = (0..1u64 << n).map(|i| row_from_index(i, n)).collect();
        Ok(Team { domain, rows })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[bool]> + '_ {
        self.rows.iter().map(|r| &**r)
    }

    pub fn valuations(&self) -> impl Iterator<Item = Valuation> + '_ {
        self.rows.iter().map(|r| Valuation {
            domain: self.domain.clone(),
            bits: r.clone(),
        })
    }

    pub fn contains(&self, row: &[bool]) -> bool {
        self.rows.contains(row)
    }

    pub fn insert(&mut self, row: Row) -> Result<bool, TeamError> {
        if row.len() != self.domain.len() {
            return Err(TeamError::RowLength {
                row: self.rows.len(),
                expected: self.domain.len(),
                found: row.len(),
            });
        }
        Ok(self.rows.insert(row))
    }

    /// Team with the same domain holding only the given rows.
    pub(crate) fn with_rows<'a>(&self, rows: impl IntoIterator<Item = &'a [bool]>) -> Team {
        Team {
            domain: self.domain.clone(),
            rows: rows.into_iter().map(Row::from).collect(),
        }
    }

    /// Projects every member onto `vars` (in the team's domain order).
    pub fn restrict<S: AsRef<str>>(&self, vars: &[S]) -> Result<Team, TeamError> {
        let mut keep = Vec::with_capacity(vars.len());
        for v in vars {
            let v = v.as_ref();
            let idx = self
                .domain
                .index_of(v)
                .ok_or_else(|| TeamError::UnknownVariable(v.to_string()))?;
            if !keep.contains(&idx) {
                keep.push(idx);
            }
        }
        keep.sort_unstable();
        let domain = Domain(keep.iter().map(|&i| self.domain.0[i].clone()).collect());
        let rows = self
            .rows
            .iter()
            .map(|r| keep.iter().map(|&i| r[i]).collect())
            .collect();
        Ok(Team { domain, rows })
    }

    fn assert_same_domain(&self, other: &Team) {
        assert_eq!(
            self.domain, other.domain,
            "team operation over different domains"
        );
    }

    pub fn union(&self, other: &Team) -> Team {
        self.assert_same_domain(other);
        Team {
            domain: self.domain.clone(),
            rows: self.rows.union(&other.rows).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &Team) -> Team {
        self.assert_same_domain(other);
        Team {
            domain: self.domain.clone(),
            rows: self.rows.intersection(&other.rows).cloned().collect(),
        }
    }

    pub fn is_subset(&self, other: &Team) -> bool {
        self.assert_same_domain(other);
        self.rows.is_subset(&other.rows)
    }

    /// All pairs `(s, u)` of subteams with `s ∪ u = self`; there are 3^|t|.
    pub fn covers(&self) -> Covers<'_> {
        let members: Vec<&[bool]> = self.rows().collect();
        let total = 3u64
            .checked_pow(members.len() as u32)
            .expect("team too large to enumerate covers");
        Covers {
            team: self,
            members,
            next: 0,
            total,
        }
    }

    /// The team in the text file format.
    pub fn to_file_string(&self) -> String {
        let mut out = if self.domain.is_empty() {
            "domain:\n".to_string()
        } else {
            format!("domain: {}\n", self.domain)
        };
        for row in self.rows() {
            out.push_str(&row_string(row));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_row(f, row)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.domain, self)
    }
}

/// Iterator over the covers of a team, see [`Team::covers`].
pub struct Covers<'a> {
    team: &'a Team,
    members: Vec<&'a [bool]>,
    next: u64,
    total: u64,
}

impl Iterator for Covers<'_> {
    type Item = (Team, Team);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        // Base-3 digit per member: 0 = left only, 1 = right only, 2 = both.
        let mut code = self.next;
        self.next += 1;
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &row in &self.members {
            match code % 3 {
                0 => left.push(row),
                1 => right.push(row),
                _ => {
                    left.push(row);
                    right.push(row);
                }
            }
            code /= 3;
        }
        Some((self.team.with_rows(left), self.team.with_rows(right)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

/// A team or the null marker, which satisfies nothing and absorbs union and
/// intersection. Null is distinct from the empty team.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TeamOrNull {
    Null,
    Team(Team),
}

impl TeamOrNull {
    pub fn is_null(&self) -> bool {
        matches!(self, TeamOrNull::Null)
    }

    pub fn as_team(&self) -> Option<&Team> {
        match self {
            TeamOrNull::Team(t) => Some(t),
            TeamOrNull::Null => None,
        }
    }

    pub fn union(&self, other: &TeamOrNull) -> TeamOrNull {
        match (self, other) {
            (TeamOrNull::Team(a), TeamOrNull::Team(b)) => TeamOrNull::Team(a.union(b)),
            _ => TeamOrNull::Null,
        }
    }

    pub fn intersection(&self, other: &TeamOrNull) -> TeamOrNull {
        match (self, other) {
            (TeamOrNull::Team(a), TeamOrNull::Team(b)) => TeamOrNull::Team(a.intersection(b)),
            _ => TeamOrNull::Null,
        }
    }

    /// Null lies below everything; no real team lies below null.
    pub fn is_below(&self, other: &TeamOrNull) -> bool {
        match (self, other) {
            (TeamOrNull::Null, _) => true,
            (TeamOrNull::Team(_), TeamOrNull::Null) => false,
            (TeamOrNull::Team(a), TeamOrNull::Team(b)) => a.is_subset(b),
        }
    }
}

impl From<Team> for TeamOrNull {
    fn from(t: Team) -> Self {
        TeamOrNull::Team(t)
    }
}

impl fmt::Display for TeamOrNull {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TeamOrNull::Null => f.write_str("null"),
            TeamOrNull::Team(t) => t.fmt(f),
        }
    }
}

/// Enumerates every team over `domain`, by ascending size and, within a size,
/// lexicographically by sorted bit strings. Without `max_size` the domain may
/// hold at most `guard` variables.
pub fn all_teams(
    domain: &Domain,
    max_size: Option<usize>,
    guard: usize,
) -> Result<AllTeams, TeamError> {
    let n = domain.len();
    if max_size.is_none() && n > guard {
        return Err(TeamError::GuardExceeded {
            vars: n,
            limit: guard,
        });
    }
    if n > MAX_ENUMERATION_WIDTH {
        return Err(TeamError::TooWide(n));
    }
    let universe = 1u64 << n;
    let max = max_size.map_or(universe, |m| (m as u64).min(universe)) as usize;
    Ok(AllTeams {
        domain: domain.clone(),
        universe,
        max_size: max,
        combo: Some(Vec::new()),
    })
}

/// Iterator returned by [`all_teams`].
pub struct AllTeams {
    domain: Domain,
    universe: u64,
    max_size: usize,
    /// Current combination of row indices; `None` once exhausted.
    combo: Option<Vec<u64>>,
}

impl AllTeams {
    fn advance(&mut self) {
        let Some(combo) = self.combo.as_mut() else {
            return;
        };
        let k = combo.len();
        let n = self.universe;
        // Rightmost index that can still move right.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if combo[i] < n - (k - i) as u64 {
                combo[i] += 1;
                for j in i + 1..k {
                    combo[j] = combo[j - 1] + 1;
                }
                return;
            }
        }
        if k < self.max_size {
            *combo = (0..=k as u64).collect();
        } else {
            self.combo = None;
        }
    }
}

impl Iterator for AllTeams {
    type Item = Team;

    fn next(&mut self) -> Option<Team> {
        let combo = self.combo.as_ref()?;
        let n = self.domain.len();
        let team = Team {
            domain: self.domain.clone(),
            rows: combo.iter().map(|&i| row_from_index(i, n)).collect(),
        };
        self.advance();
        Some(team)
    }
}

fn parse_row(text: &str, width: usize) -> Result<Row, usize> {
    if text == "-" {
        return if width == 0 {
            Ok(Row::from(Vec::new()))
        } else {
            Err(0)
        };
    }
    if text.len() != width || !text.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(text.chars().count());
    }
    Ok(text.bytes().map(|b| b == b'1').collect())
}

/// Reads the team text format: a `domain:` line followed by one bit string
/// per line. `#` starts a comment; `-` is the row of an empty domain.
pub fn parse_team_file(text: &str) -> Result<Team, TeamError> {
    let mut domain = None;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(dom) = &domain else {
            let names = line
                .strip_prefix("domain:")
                .ok_or_else(|| TeamError::File {
                    line: line_no,
                    message: "expected `domain:` header".into(),
                })?;
            let names: Vec<&str> = names.split_whitespace().collect();
            if let Some(bad) = names.iter().find(|n| !is_identifier(n)) {
                return Err(TeamError::File {
                    line: line_no,
                    message: format!("invalid variable name {bad:?}"),
                });
            }
            domain = Some(Domain::new(names).map_err(|e| TeamError::File {
                line: line_no,
                message: e.to_string(),
            })?);
            continue;
        };
        let row = parse_row(line, dom.len()).map_err(|_| TeamError::File {
            line: line_no,
            message: format!("row {line:?} is not a bit string of width {}", dom.len()),
        })?;
        rows.push(row);
    }
    let domain = domain.ok_or(TeamError::File {
        line: 0,
        message: "missing `domain:` header".into(),
    })?;
    Team::new(domain, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(names: &[&str]) -> Domain {
        Domain::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn make_team_collapses_duplicates() {
        let t = Team::from_strs(dom(&["p", "q"]), &["10", "10", "01"]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.to_string(), "{01, 10}");
        assert!(Team::from_strs(dom(&["p"]), &[]).unwrap().is_empty());
        assert_eq!(
            Team::from_strs(dom(&["p", "q"]), &["101"]),
            Err(TeamError::RowLength {
                row: 0,
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            Domain::new(["p", "p"]),
            Err(TeamError::DuplicateVariable("p".into()))
        );
    }

    #[test]
    fn restrict_projects_and_merges() {
        let t = Team::from_strs(dom(&["p", "q"]), &["11", "10"]).unwrap();
        let r = t.restrict(&["p"]).unwrap();
        assert_eq!(r, Team::from_strs(dom(&["p"]), &["1"]).unwrap());

        let empty = Team::empty(dom(&["p", "q"]));
        assert_eq!(empty.restrict(&["p"]).unwrap(), Team::empty(dom(&["p"])));

        let t = Team::from_strs(dom(&["p", "q"]), &["10", "01"]).unwrap();
        assert_eq!(t.restrict(&["q", "p"]).unwrap(), t);
        assert_eq!(
            t.restrict(&["r"]),
            Err(TeamError::UnknownVariable("r".into()))
        );
    }

    #[test]
    fn all_teams_counts_and_order() {
        let teams: Vec<String> = all_teams(&dom(&["p"]), None, DEFAULT_GUARD)
            .unwrap()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(teams, ["{}", "{0}", "{1}", "{0, 1}"]);
        assert_eq!(
            all_teams(&dom(&["p", "q"]), Some(1), DEFAULT_GUARD)
                .unwrap()
                .count(),
            5
        );
        assert_eq!(
            all_teams(&dom(&["p", "q"]), None, DEFAULT_GUARD)
                .unwrap()
                .count(),
            16
        );
        assert!(matches!(
            all_teams(&dom(&["a", "b", "c", "d", "e"]), None, DEFAULT_GUARD),
            Err(TeamError::GuardExceeded { vars: 5, limit: 4 })
        ));
        assert_eq!(all_teams(&Domain::empty(), None, 0).unwrap().count(), 2);
    }

    #[test]
    fn covers_examples() {
        let t = Team::from_strs(dom(&["p"]), &["1"]).unwrap();
        let covers: Vec<(String, String)> = t
            .covers()
            .map(|(s, u)| (s.to_string(), u.to_string()))
            .collect();
        assert_eq!(covers.len(), 3);
        assert!(covers.contains(&("{}".into(), "{1}".into())));
        assert!(covers.contains(&("{1}".into(), "{}".into())));
        assert!(covers.contains(&("{1}".into(), "{1}".into())));

        assert_eq!(Team::empty(dom(&["p"])).covers().count(), 1);
        let t = Team::from_strs(dom(&["p"]), &["0", "1"]).unwrap();
        assert_eq!(t.covers().count(), 9);
    }

    #[test]
    fn null_team_algebra() {
        let t = TeamOrNull::Team(Team::from_strs(dom(&["p"]), &["1"]).unwrap());
        let empty = TeamOrNull::Team(Team::empty(dom(&["p"])));
        assert_ne!(empty, TeamOrNull::Null);
        assert_eq!(TeamOrNull::Null.union(&t), TeamOrNull::Null);
        assert_eq!(t.intersection(&TeamOrNull::Null), TeamOrNull::Null);
        assert!(TeamOrNull::Null.is_below(&t));
        assert!(TeamOrNull::Null.is_below(&TeamOrNull::Null));
        assert!(!t.is_below(&TeamOrNull::Null));
        assert!(!empty.is_below(&TeamOrNull::Null));
        assert!(empty.is_below(&t));
    }

    #[test]
    fn team_file_round_trip() {
        let text = "# a team\ndomain: p q\n10\n01 # trailing\n\n10\n";
        let t = parse_team_file(text).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(parse_team_file(&t.to_file_string()).unwrap(), t);

        let unit = Valuation::new(Domain::empty(), Vec::new())
            .unwrap()
            .into_team();
        assert_eq!(unit.to_file_string(), "domain:\n-\n");
        assert_eq!(parse_team_file(&unit.to_file_string()).unwrap(), unit);

        assert!(matches!(
            parse_team_file("domain: p\n10\n"),
            Err(TeamError::File { line: 2, .. })
        ));
        assert!(matches!(
            parse_team_file("10\n"),
            Err(TeamError::File { line: 1, .. })
        ));
        assert!(parse_team_file("domain: p NE\n").is_err());
        assert!(parse_team_file("").is_err());
    }
}
