//! The textual rule language: abstract syntax, parsing, and grounding.
//!
//! Source text is parsed into a [`SchematicProgram`] whose rules may still
//! carry uppercase variables, weights, and nested t-norm bodies. Grounding
//! substitutes declared domain constants, weights fold into bodies as extra
//! constants, and mixed-t-norm bodies are flattened into single-t-norm
//! rules over fresh `__aux` atoms. The result is a ground [`Program`] with
//! the per-atom rule index the semantics and translation layers work on.

mod ground;
mod parser;

pub use ground::{compile, desugar_weighted, ground, normalize_mixed, GroundBody, GroundDraft};
pub use parser::{
    parse, BodyExpr, SchematicAtom, SchematicHead, SchematicLiteral, SchematicProgram,
    SchematicRule, Term,
};

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::truth::{NegatorKind, TNormKind, TruthValue};

/// Prefix reserved for atoms introduced while flattening nested bodies.
pub const AUX_PREFIX: &str = "__aux";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: constant `{value}` lies outside [0,1]")]
    ConstantRange {
        line: usize,
        col: usize,
        value: String,
    },
    #[error("{line}:{col}: t-conorm `{symbol}` cannot appear in a rule body: disjunctive bodies have no sound loop formulas in the Lukasiewicz fragment and need a different solving strategy")]
    TConormBody {
        line: usize,
        col: usize,
        symbol: String,
    },
    #[error("{line}:{col}: product connective `{symbol}` is not supported: it yields quadratically constrained models; use TL/TM and not_l/not_m")]
    Product {
        line: usize,
        col: usize,
        symbol: String,
    },
    #[error("rule `{label}` has an empty body; every rule needs at least one body literal")]
    EmptyBody { label: String },
    #[error("variable {var} in rule `{label}` has no #domain declaration")]
    UnboundVariable { var: String, label: String },
    #[error("domain of variable {var} is empty")]
    EmptyDomain { var: String },
}

/// A ground propositional atom, e.g. `b` or `near(t1,t2)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        debug_assert!(!name.is_empty());
        Atom(name)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for atoms introduced by body normalization.
    pub fn is_aux(&self) -> bool {
        self.0.starts_with(AUX_PREFIX)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty atom name"));
        }
        Ok(Atom(s))
    }
}

/// A body entry: an atom, a constant degree, or a negated atom.
/// Negation applies to atoms only, never to compound expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendedLiteral {
    Positive(Atom),
    Constant(TruthValue),
    Negated(NegatorKind, Atom),
}

impl ExtendedLiteral {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            ExtendedLiteral::Positive(a) | ExtendedLiteral::Negated(_, a) => Some(a),
            ExtendedLiteral::Constant(_) => None,
        }
    }

    pub fn is_negated(&self) -> bool {
        matches!(self, ExtendedLiteral::Negated(..))
    }
}

impl fmt::Display for ExtendedLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedLiteral::Positive(a) => write!(f, "{a}"),
            ExtendedLiteral::Constant(c) => write!(f, "{c}"),
            ExtendedLiteral::Negated(n, a) => write!(f, "{} {a}", n.symbol()),
        }
    }
}

/// A rule head: an atom, or a constant for constraint rules.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Atom(Atom),
    Constant(TruthValue),
}

impl Head {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Head::Atom(a) => Some(a),
            Head::Constant(_) => None,
        }
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Atom(a) => write!(f, "{a}"),
            Head::Constant(c) => write!(f, "{c}"),
        }
    }
}

/// A ground rule `head <- T(lit, ...)` with a single t-norm over its body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub label: String,
    pub head: Head,
    pub tnorm: TNormKind,
    body: Vec<ExtendedLiteral>,
}

impl Rule {
    pub fn new(
        label: impl Into<String>,
        head: Head,
        tnorm: TNormKind,
        body: Vec<ExtendedLiteral>,
    ) -> Result<Self, SyntaxError> {
        let label = label.into();
        if body.is_empty() {
            return Err(SyntaxError::EmptyBody { label });
        }
        Ok(Rule {
            label,
            head,
            tnorm,
            body,
        })
    }

    pub fn body(&self) -> &[ExtendedLiteral] {
        &self.body
    }

    /// Atoms occurring positively (unnegated) in the body.
    pub fn positive_body_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter_map(|l| match l {
            ExtendedLiteral::Positive(a) => Some(a),
            _ => None,
        })
    }

    /// A constraint caps its body by a constant head.
    pub fn is_constraint(&self) -> bool {
        matches!(self.head, Head::Constant(_))
    }

    pub fn is_simple(&self) -> bool {
        !self.body.iter().any(ExtendedLiteral::is_negated)
    }

    /// The same rule with every negated literal replaced by a constant.
    pub(crate) fn with_body(&self, body: Vec<ExtendedLiteral>) -> Rule {
        debug_assert!(!body.is_empty());
        Rule {
            label: self.label.clone(),
            head: self.head.clone(),
            tnorm: self.tnorm,
            body,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} <- ", self.label, self.head)?;
        // A bare literal is sugar for a unary minimum body.
        if self.body.len() == 1 && self.tnorm == TNormKind::Minimum {
            write!(f, "{}.", self.body[0])
        } else {
            let items: Vec<String> = self.body.iter().map(|l| l.to_string()).collect();
            write!(f, "{}({}).", self.tnorm.symbol(), items.join(", "))
        }
    }
}

/// A finite set of ground rules with its Herbrand base and per-atom index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    base: BTreeSet<Atom>,
    by_head: BTreeMap<Atom, Vec<usize>>,
}

impl Program {
    /// Collects rules, dropping later rules whose head, t-norm, and body
    /// coincide with an earlier one. Duplicates are harmless under the
    /// sup-based semantics, so only literal repeats are removed.
    pub fn new(rules: Vec<Rule>) -> Self {
        let mut seen = BTreeSet::new();
        let mut kept: Vec<Rule> = Vec::with_capacity(rules.len());
        for r in rules {
            if seen.insert((r.head.clone(), r.tnorm, r.body.clone())) {
                kept.push(r);
            }
        }
        let mut base = BTreeSet::new();
        let mut by_head: BTreeMap<Atom, Vec<usize>> = BTreeMap::new();
        for (i, r) in kept.iter().enumerate() {
            if let Head::Atom(a) = &r.head {
                base.insert(a.clone());
                by_head.entry(a.clone()).or_default().push(i);
            }
            for l in r.body() {
                if let Some(a) = l.atom() {
                    base.insert(a.clone());
                }
            }
        }
        Program {
            rules: kept,
            base,
            by_head,
        }
    }

    /// Parses and grounds a complete source text.
    pub fn parse_source(text: &str) -> Result<Self, SyntaxError> {
        compile(&parse(text)?)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn herbrand_base(&self) -> &BTreeSet<Atom> {
        &self.base
    }

    /// The rules with atom `a` in the head (the index `P_a`).
    pub fn rules_for(&self, a: &Atom) -> impl Iterator<Item = &Rule> {
        self.by_head
            .get(a)
            .into_iter()
            .flatten()
            .map(|&i| &self.rules[i])
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_constraint())
    }

    pub fn is_simple(&self) -> bool {
        self.rules.iter().all(Rule::is_simple)
    }

    /// True if some rule body mentions the strict Goedel negator, which the
    /// MILP backend cannot encode.
    pub fn uses_goedel_negation(&self) -> bool {
        self.rules.iter().any(|r| {
            r.body()
                .iter()
                .any(|l| matches!(l, ExtendedLiteral::Negated(NegatorKind::Goedel, _)))
        })
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
