//! Syntax of propositional logic with the nonemptiness atom.
//!
//! Formulas are kept in negation normal form: negation only ever sits on a
//! variable. The surface syntax accepts `!` over any NE-free subformula and
//! pushes it down to the variables while parsing.
//!
//! ```text
//! formula := disj
//! disj    := conj ( "|" conj )*
//! conj    := unit ( "&" unit )*
//! unit    := "NE" | "bot" | "top" | ident | "!" unit | "(" formula ")"
//! ident   := [a-z][A-Za-z0-9_]*
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A formula in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    NegVar(String),
    Bot,
    Top,
    /// The nonemptiness atom.
    Ne,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    pub fn neg_var(name: impl Into<String>) -> Self {
        Formula::NegVar(name.into())
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    /// Literals are the leaves: `p`, `!p`, `bot`, `top` and `NE`.
    pub fn is_literal(&self) -> bool {
        !matches!(self, Formula::And(..) | Formula::Or(..))
    }

    pub fn children(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::And(l, r) | Formula::Or(l, r) => Some((l, r)),
            _ => None,
        }
    }

    /// Nesting depth of connectives; literals have depth 0.
    pub fn depth(&self) -> usize {
        match self.children() {
            Some((l, r)) => 1 + l.depth().max(r.depth()),
            None => 0,
        }
    }

    pub fn metrics(&self) -> Metrics {
        let mut metrics = Metrics::default();
        self.collect_metrics(&mut metrics);
        metrics
    }

    fn collect_metrics(&self, m: &mut Metrics) {
        m.symbol_count += 1;
        match self {
            Formula::Var(name) | Formula::NegVar(name) => {
                m.vars.insert(name.clone());
            }
            Formula::Ne => m.ne_count += 1,
            Formula::Bot | Formula::Top => {}
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.collect_metrics(m);
                r.collect_metrics(m);
            }
        }
    }

    /// Number of nodes, |φ|.
    pub fn size(&self) -> usize {
        match self.children() {
            Some((l, r)) => 1 + l.size() + r.size(),
            None => 1,
        }
    }

    /// Number of NE leaves, |φ|_NE.
    pub fn ne_count(&self) -> usize {
        match self {
            Formula::Ne => 1,
            Formula::And(l, r) | Formula::Or(l, r) => l.ne_count() + r.ne_count(),
            _ => 0,
        }
    }

    /// The propositional variables of the formula, sorted.
    pub fn vars(&self) -> BTreeSet<String> {
        self.metrics().vars
    }

    pub fn contains_ne(&self) -> bool {
        match self {
            Formula::Ne => true,
            Formula::And(l, r) | Formula::Or(l, r) => l.contains_ne() || r.contains_ne(),
            _ => false,
        }
    }

    /// Preorder listing of every subformula occurrence with its path.
    pub fn occurrences(&self) -> Vec<(OccurrencePath, &Formula)> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        self.collect_occurrences(&mut path, &mut out);
        out
    }

    fn collect_occurrences<'a>(
        &'a self,
        path: &mut Vec<u8>,
        out: &mut Vec<(OccurrencePath, &'a Formula)>,
    ) {
        out.push((OccurrencePath(path.clone()), self));
        if let Some((l, r)) = self.children() {
            path.push(0);
            l.collect_occurrences(path, out);
            path.pop();
            path.push(1);
            r.collect_occurrences(path, out);
            path.pop();
        }
    }

    /// The subformula occurrence at `path`, if the path addresses a node.
    pub fn at(&self, path: &OccurrencePath) -> Option<&Formula> {
        let mut node = self;
        for &step in path.steps() {
            let (l, r) = node.children()?;
            node = match step {
                0 => l,
                1 => r,
                _ => return None,
            };
        }
        Some(node)
    }

    /// Replaces every NE by `top`.
    pub fn flatten(&self) -> Formula {
        match self {
            Formula::Ne => Formula::Top,
            Formula::And(l, r) => Formula::and(l.flatten(), r.flatten()),
            Formula::Or(l, r) => Formula::or(l.flatten(), r.flatten()),
            other => other.clone(),
        }
    }

    /// Classical negation of an NE-free formula, by De Morgan dualization.
    pub fn negate_classical(&self) -> Result<Formula, NegationError> {
        match self {
            Formula::Var(p) => Ok(Formula::NegVar(p.clone())),
            Formula::NegVar(p) => Ok(Formula::Var(p.clone())),
            Formula::Bot => Ok(Formula::Top),
            Formula::Top => Ok(Formula::Bot),
            Formula::Ne => Err(NegationError),
            Formula::And(l, r) => Ok(Formula::or(l.negate_classical()?, r.negate_classical()?)),
            Formula::Or(l, r) => Ok(Formula::and(l.negate_classical()?, r.negate_classical()?)),
        }
    }
}

/// Classical negation is only defined on NE-free formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("negation is only defined for NE-free formulas")]
pub struct NegationError;

/// Syntactic measures of a formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    /// Every node counted once, leaves and connectives alike.
    pub symbol_count: usize,
    pub ne_count: usize,
    pub vars: BTreeSet<String>,
}

/// Position of a subformula occurrence: child indices from the root
/// (0 = left, 1 = right). The empty path is the root.
///
/// Paths order lexicographically, which coincides with preorder.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccurrencePath(Vec<u8>);

impl OccurrencePath {
    pub fn root() -> Self {
        OccurrencePath(Vec::new())
    }

    pub fn new(steps: Vec<u8>) -> Self {
        OccurrencePath(steps)
    }

    pub fn steps(&self) -> &[u8] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, step: u8) -> Self {
        let mut steps = self.0.clone();
        steps.push(step);
        OccurrencePath(steps)
    }
}

impl fmt::Display for OccurrencePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for step in &self.0 {
            write!(f, ".{step}")?;
        }
        Ok(())
    }
}

// Rendering with minimal parentheses. Both connectives associate to the left,
// so a right operand of the same connective keeps its parentheses.

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        _ => 3,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, operand: &Formula, min_prec: u8) -> fmt::Result {
    if precedence(operand) < min_prec {
        write!(f, "({operand})")
    } else {
        write!(f, "{operand}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(p) => f.write_str(p),
            Formula::NegVar(p) => write!(f, "!{p}"),
            Formula::Bot => f.write_str("bot"),
            Formula::Top => f.write_str("top"),
            Formula::Ne => f.write_str("NE"),
            Formula::And(l, r) => {
                write_operand(f, l, 2)?;
                f.write_str(" & ")?;
                write_operand(f, r, 3)
            }
            Formula::Or(l, r) => {
                write_operand(f, l, 1)?;
                f.write_str(" | ")?;
                write_operand(f, r, 2)
            }
        }
    }
}

/// Canonical text of a formula; `parse(&render(f)) == Ok(f)`.
pub fn render(f: &Formula) -> String {
    f.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {found:?} at offset {pos}")]
    UnexpectedChar { pos: usize, found: char },
    #[error("unknown keyword {word:?} at offset {pos}")]
    UnknownKeyword { pos: usize, word: String },
    #[error("expected {expected} at offset {pos}, found {found}")]
    Unexpected {
        pos: usize,
        expected: &'static str,
        found: String,
    },
    #[error("negation at offset {pos} scopes over a subformula containing NE")]
    NegatedNe { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::UnexpectedChar { pos, .. }
            | ParseError::UnknownKeyword { pos, .. }
            | ParseError::Unexpected { pos, .. }
            | ParseError::NegatedNe { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Ne,
    Bot,
    Top,
    And,
    Or,
    Not,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(name) => write!(f, "identifier {name:?}"),
            Token::Ne => f.write_str("\"NE\""),
            Token::Bot => f.write_str("\"bot\""),
            Token::Top => f.write_str("\"top\""),
            Token::And => f.write_str("\"&\""),
            Token::Or => f.write_str("\"|\""),
            Token::Not => f.write_str("\"!\""),
            Token::LParen => f.write_str("\"(\""),
            Token::RParen => f.write_str("\")\""),
            Token::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let token = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '&' => Token::And,
            '|' => Token::Or,
            '!' => Token::Not,
            '(' => Token::LParen,
            ')' => Token::RParen,
            c if c.is_ascii_alphabetic() => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let token = match word.as_str() {
                    "NE" => Token::Ne,
                    "bot" => Token::Bot,
                    "top" => Token::Top,
                    _ if word.starts_with(|c: char| c.is_ascii_lowercase()) => Token::Ident(word),
                    _ => return Err(ParseError::UnknownKeyword { pos, word }),
                };
                tokens.push((pos, token));
                continue;
            }
            other => return Err(ParseError::UnexpectedChar { pos, found: other }),
        };
        chars.next();
        tokens.push((pos, token));
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].1
    }

    fn pos(&self) -> usize {
        self.tokens[self.cursor].0
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.cursor].1.clone();
        if token != Token::End {
            self.cursor += 1;
        }
        token
    }

    fn expect(&mut self, want: Token, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Unexpected {
                pos: self.pos(),
                expected,
                found: self.peek().to_string(),
            })
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.bump();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unit()?;
        while *self.peek() == Token::And {
            self.bump();
            acc = Formula::and(acc, self.unit()?);
        }
        Ok(acc)
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Token::Ne => Ok(Formula::Ne),
            Token::Bot => Ok(Formula::Bot),
            Token::Top => Ok(Formula::Top),
            Token::Ident(name) => Ok(Formula::Var(name)),
            Token::Not => {
                let inner = self.unit()?;
                inner
                    .negate_classical()
                    .map_err(|_| ParseError::NegatedNe { pos })
            }
            Token::LParen => {
                let inner = self.disjunction()?;
                self.expect(Token::RParen, "\")\"")?;
                Ok(inner)
            }
            found => Err(ParseError::Unexpected {
                pos,
                expected: "a formula",
                found: found.to_string(),
            }),
        }
    }
}

/// Parses a formula and normalizes negations.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        cursor: 0,
    };
    let formula = parser.disjunction()?;
    if *parser.peek() != Token::End {
        return Err(ParseError::Unexpected {
            pos: parser.pos(),
            expected: "\"&\", \"|\" or end of input",
            found: parser.peek().to_string(),
        });
    }
    Ok(formula)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
