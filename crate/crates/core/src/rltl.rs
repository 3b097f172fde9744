//! LTL extended with the related-plays modality `R`.
//!
//! Formulas are stored over six constructors (`true`, atoms, `!`, `&`, `X`,
//! `U`) plus `R`; disjunction, implication, `false`, `F` and `G` are
//! desugared while parsing. Double negations are cancelled on construction
//! so every formula has a single canonical tree.
//!
//! Concrete syntax, loosest binding first: `->` (right-associative), `|`,
//! `&`, `U` (right-associative), then the prefix operators `! X F G R`.
//! Atoms match `[a-zA-Z_][a-zA-Z0-9_]*`; `true` and `false` are reserved.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::arena::Lasso;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Rel(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn falsum() -> Formula {
        Formula::Not(Box::new(Formula::True))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Not(inner) => *inner,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn rel(f: Formula) -> Formula {
        Formula::Rel(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    pub fn globally(f: Formula) -> Formula {
        Formula::not(Formula::eventually(Formula::not(f)))
    }

    /// Disjunction of a nonempty list.
    pub fn any(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().unwrap_or_else(Formula::falsum);
        it.fold(first, Formula::or)
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Next(f) | Formula::Rel(f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Maximum nesting of `R` modalities.
    pub fn r_depth(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Next(f) => f.r_depth(),
            Formula::Rel(f) => 1 + f.r_depth(),
            Formula::And(a, b) | Formula::Until(a, b) => a.r_depth().max(b.r_depth()),
        }
    }

    pub fn is_r_free(&self) -> bool {
        self.r_depth() == 0
    }

    /// Atoms occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(f) | Formula::Next(f) | Formula::Rel(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// The distinct subformulas `R ψ` with `ψ` free of `R`, in order of
    /// first occurrence in the printed formula.
    pub fn innermost_r_subformulas(&self) -> Result<Vec<Formula>, FormulaError> {
        if self.r_depth() == 0 {
            return Err(FormulaError::NoModality);
        }
        let mut out = Vec::new();
        self.collect_innermost(&mut out);
        Ok(out)
    }

    fn collect_innermost(&self, out: &mut Vec<Formula>) {
        match self {
            Formula::True | Formula::Atom(_) => {}
            Formula::Rel(f) if f.r_depth() == 0 => {
                if !out.contains(self) {
                    out.push(self.clone());
                }
            }
            Formula::Not(f) | Formula::Next(f) | Formula::Rel(f) => f.collect_innermost(out),
            Formula::And(a, b) | Formula::Until(a, b) => {
                a.collect_innermost(out);
                b.collect_innermost(out);
            }
        }
    }

    /// Replaces every occurrence of a key subformula by the mapped atom.
    pub fn substitute(&self, map: &BTreeMap<Formula, String>) -> Formula {
        if let Some(atom) = map.get(self) {
            return Formula::Atom(atom.clone());
        }
        match self {
            Formula::True | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.substitute(map)),
            Formula::Next(f) => Formula::next(f.substitute(map)),
            Formula::Rel(f) => Formula::rel(f.substitute(map)),
            Formula::And(a, b) => Formula::and(a.substitute(map), b.substitute(map)),
            Formula::Until(a, b) => Formula::until(a.substitute(map), b.substitute(map)),
        }
    }

    /// If the formula is `G ψ`, returns `ψ`.
    pub fn globally_body(&self) -> Option<Formula> {
        match self {
            Formula::Not(inner) => match &**inner {
                Formula::Until(t, body) if **t == Formula::True => {
                    Some(Formula::not((**body).clone()))
                }
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("formula has no R modality")]
    NoModality,
    #[error("formula contains an R modality")]
    ContainsModality,
}

/// Syntax error with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Bang,
    Amp,
    Bar,
    Arrow,
    LParen,
    RParen,
    X,
    F,
    G,
    R,
    U,
}

fn tokenize(text: &str, allow_fresh: bool) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos, message: &str| {
        Err(ParseError {
            pos,
            message: message.into(),
        })
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => out.push((start, Tok::Bang)),
            b'&' => out.push((start, Tok::Amp)),
            b'|' => out.push((start, Tok::Bar)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((start, Tok::Arrow));
                    i += 1;
                } else {
                    return err(start, "expected '->'");
                }
            }
            b'@' if !allow_fresh => {
                return err(start, "'@' is reserved for generated propositions")
            }
            c if c == b'@' || c == b'_' || c.is_ascii_alphabetic() => {
                i += 1;
                while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::X,
                    "F" => Tok::F,
                    "G" => Tok::G,
                    "R" => Tok::R,
                    "U" => Tok::U,
                    "@" => return err(start, "empty generated proposition"),
                    w => Tok::Ident(w.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            _ => return err(start, "unexpected character"),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|t| t.0).unwrap_or(self.end)
    }

    fn error<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::Amp) {
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::U) {
            Ok(Formula::until(lhs, self.until()?))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("unexpected end of formula");
        };
        self.at += 1;
        match tok {
            Tok::Bang => Ok(Formula::not(self.unary()?)),
            Tok::X => Ok(Formula::next(self.unary()?)),
            Tok::F => Ok(Formula::eventually(self.unary()?)),
            Tok::G => Ok(Formula::globally(self.unary()?)),
            Tok::R => Ok(Formula::rel(self.unary()?)),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::falsum()),
            Tok::Ident(p) => Ok(Formula::Atom(p)),
            Tok::LParen => {
                let f = self.implication()?;
                if !self.eat(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                Ok(f)
            }
            _ => {
                self.at -= 1;
                self.error("expected a formula")
            }
        }
    }
}

fn parse_impl(text: &str, allow_fresh: bool) -> Result<Formula, ParseError> {
    let toks = tokenize(text, allow_fresh)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let f = p.implication()?;
    if p.at != p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(f)
}

/// Parses a user formula. Atoms starting with `@` are rejected.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_impl(text, false)
}

/// Parses a formula that may mention generated `@` propositions, such as
/// the output of an elimination round.
pub fn parse_with_fresh(text: &str) -> Result<Formula, ParseError> {
    parse_impl(text, true)
}

// Printing levels, loosest first.
const IMP: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNTIL: u8 = 3;
const UNARY: u8 = 4;

impl Formula {
    fn as_or(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::And(a, b) = &**inner {
                if let (Formula::Not(x), Formula::Not(y)) = (&**a, &**b) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    fn as_implies(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::And(a, b) = &**inner {
                if let Formula::Not(y) = &**b {
                    return Some((a, y));
                }
            }
        }
        None
    }

    fn as_eventually(&self) -> Option<&Formula> {
        match self {
            Formula::Until(t, b) if **t == Formula::True => Some(b),
            _ => None,
        }
    }

    fn level(&self) -> u8 {
        if self.as_or().is_some() {
            OR
        } else if self.as_implies().is_some() {
            IMP
        } else {
            match self {
                Formula::And(..) => AND,
                Formula::Until(..) if self.as_eventually().is_none() => UNTIL,
                _ => UNARY,
            }
        }
    }

    fn print(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.level() < min;
        if paren {
            f.write_str("(")?;
        }
        if let Some((a, b)) = self.as_or() {
            a.print(f, OR)?;
            f.write_str(" | ")?;
            b.print(f, AND)?;
        } else if let Some((a, b)) = self.as_implies() {
            a.print(f, OR)?;
            f.write_str(" -> ")?;
            b.print(f, IMP)?;
        } else {
            match self {
                Formula::True => f.write_str("true")?,
                Formula::Atom(p) => f.write_str(p)?,
                Formula::Not(inner) => {
                    if **inner == Formula::True {
                        f.write_str("false")?;
                    } else if let Some(body) = inner.as_eventually() {
                        f.write_str("G ")?;
                        Formula::not(body.clone()).print(f, UNARY)?;
                    } else {
                        f.write_str("!")?;
                        inner.print(f, UNARY)?;
                    }
                }
                Formula::And(a, b) => {
                    a.print(f, AND)?;
                    f.write_str(" & ")?;
                    b.print(f, UNTIL)?;
                }
                Formula::Next(a) => {
                    f.write_str("X ")?;
                    a.print(f, UNARY)?;
                }
                Formula::Rel(a) => {
                    f.write_str("R ")?;
                    a.print(f, UNARY)?;
                }
                Formula::Until(a, b) => {
                    if **a == Formula::True {
                        f.write_str("F ")?;
                        b.print(f, UNARY)?;
                    } else {
                        a.print(f, UNARY)?;
                        f.write_str(" U ")?;
                        b.print(f, UNTIL)?;
                    }
                }
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.print(f, IMP)
    }
}

/// Truth of atomic propositions at one point of a word.
pub trait Labelling {
    fn holds(&self, prop: &str) -> bool;
}

impl Labelling for BTreeSet<String> {
    fn holds(&self, prop: &str) -> bool {
        self.contains(prop)
    }
}

impl Labelling for Vec<String> {
    fn holds(&self, prop: &str) -> bool {
        self.iter().any(|p| p == prop)
    }
}

impl Labelling for Vec<&str> {
    fn holds(&self, prop: &str) -> bool {
        self.contains(&prop)
    }
}

impl<L: Labelling + ?Sized> Labelling for &L {
    fn holds(&self, prop: &str) -> bool {
        (**self).holds(prop)
    }
}

/// Truth values of `f` at every normalized index of `word`.
fn truth_table<L: Labelling>(f: &Formula, word: &Lasso<L>) -> Vec<bool> {
    let n = word.span();
    match f {
        Formula::True => vec![true; n],
        Formula::Atom(p) => (0..n).map(|i| word.at(i).holds(p)).collect(),
        Formula::Not(a) => truth_table(a, word).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => {
            let (ta, tb) = (truth_table(a, word), truth_table(b, word));
            ta.iter().zip(&tb).map(|(x, y)| *x && *y).collect()
        }
        Formula::Next(a) => {
            let ta = truth_table(a, word);
            (0..n).map(|i| ta[word.next_index(i)]).collect()
        }
        Formula::Until(a, b) => {
            let (ta, tb) = (truth_table(a, word), truth_table(b, word));
            (0..n)
                .map(|i| {
                    // Every index reachable from i is visited within n steps.
                    let mut j = i;
                    for _ in 0..n {
                        if tb[j] {
                            return true;
                        }
                        if !ta[j] {
                            return false;
                        }
                        j = word.next_index(j);
                    }
                    false
                })
                .collect()
        }
        Formula::Rel(_) => unreachable!("checked by caller"),
    }
}

/// Exact LTL truth of an `R`-free formula at index `i` of `stem · cycle^ω`.
pub fn eval_ltl_lasso<L: Labelling>(
    f: &Formula,
    word: &Lasso<L>,
    i: usize,
) -> Result<bool, FormulaError> {
    if !f.is_r_free() {
        return Err(FormulaError::ContainsModality);
    }
    Ok(truth_table(f, word)[word.normalize(i)])
}

/// Truth of an `R`-free formula at every normalized index.
pub fn eval_ltl_lasso_all<L: Labelling>(
    f: &Formula,
    word: &Lasso<L>,
) -> Result<Vec<bool>, FormulaError> {
    if !f.is_r_free() {
        return Err(FormulaError::ContainsModality);
    }
    Ok(truth_table(f, word))
}
