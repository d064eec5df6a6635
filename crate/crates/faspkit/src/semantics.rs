//! Program semantics: models, reducts, fixpoints, unfounded sets, and the
//! brute-force grid oracle.
//!
//! An interpretation assigns a degree to every atom of the Herbrand base;
//! atoms not mentioned read 0, matching the fuzzy-set convention that
//! zero-degree members are not written. A rule holds to the degree its
//! body implies its head under the rule's residual implicator, a model
//! makes every rule hold fully, and an answer set is a model that equals
//! the least fixpoint of its reduct's immediate-consequence operator,
//! which coincides with being an unfounded-free model.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Atom, ExtendedLiteral, Head, Program, Rule, SyntaxError};
use crate::truth::{negator_apply, residual_implicator, tnorm_apply, TruthValue};

/// How many support atoms the unfounded-set oracle will enumerate over.
pub const UNFOUNDED_GUARD: usize = 20;

/// Hard ceiling on the number of interpretations a grid enumeration may
/// visit.
pub const GRID_GUARD: u128 = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("interpretation mentions atoms outside the program's Herbrand base: {0:?}")]
    BaseMismatch(Vec<Atom>),
    #[error("least fixpoint iteration exceeded its certified bound of {bound} steps; this indicates a defect, not slow convergence")]
    IterationLimit { bound: u128 },
    #[error("{0}")]
    SizeGuard(String),
    #[error("operation requires a simple program, but some rule body contains a negated literal")]
    NotSimple,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// A total map from the Herbrand base to truth degrees; unmapped atoms
/// read 0 and zero entries are never stored, so structural equality is
/// exact pointwise equality.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Interpretation {
    values: BTreeMap<Atom, TruthValue>,
}

impl<'de> Deserialize<'de> for Interpretation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Explicit zeros in the input are legal but never stored.
        let raw = BTreeMap::<Atom, TruthValue>::deserialize(deserializer)?;
        Ok(Interpretation::from_pairs(raw))
    }
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, A>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, TruthValue)>,
        A: Into<Atom>,
    {
        let mut out = Self::new();
        for (a, v) in pairs {
            out.set(a.into(), v);
        }
        out
    }

    pub fn get(&self, atom: &Atom) -> TruthValue {
        self.values
            .get(atom)
            .copied()
            .unwrap_or_else(TruthValue::zero)
    }

    pub fn set(&mut self, atom: Atom, value: TruthValue) {
        if value.is_zero() {
            self.values.remove(&atom);
        } else {
            self.values.insert(atom, value);
        }
    }

    /// Atoms with a strictly positive degree.
    pub fn support(&self) -> impl Iterator<Item = &Atom> {
        self.values.keys()
    }

    pub fn support_set(&self) -> BTreeSet<Atom> {
        self.values.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &TruthValue)> {
        self.values.iter()
    }

    /// Pointwise order: `self(a) <= other(a)` everywhere.
    pub fn leq(&self, other: &Interpretation) -> bool {
        self.values.iter().all(|(a, v)| *v <= other.get(a))
    }

    /// Drops normalization auxiliaries from a reported interpretation.
    pub fn without_aux(&self) -> Interpretation {
        Interpretation {
            values: self
                .values
                .iter()
                .filter(|(a, _)| !a.is_aux())
                .map(|(a, v)| (a.clone(), *v))
                .collect(),
        }
    }
}

/// The truncated pointwise difference `(a - b)(x) = max(0, a(x) - b(x))`.
/// Its support is exactly the set of atoms where `a` exceeds `b`.
pub fn fuzzy_difference(a: &Interpretation, b: &Interpretation) -> Interpretation {
    let mut out = Interpretation::new();
    for (atom, &va) in a.iter() {
        let vb = b.get(atom);
        if va > vb {
            out.set(
                atom.clone(),
                TruthValue::from_rational(va.as_rational() - vb.as_rational())
                    .expect("difference of unit-interval values stays in the unit interval"),
            );
        }
    }
    out
}

/// A program whose rule bodies contain no negated literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleProgram(Program);

impl SimpleProgram {
    pub fn as_program(&self) -> &Program {
        &self.0
    }
}

impl TryFrom<Program> for SimpleProgram {
    type Error = SemanticsError;

    fn try_from(p: Program) -> Result<Self, Self::Error> {
        if p.is_simple() {
            Ok(SimpleProgram(p))
        } else {
            Err(SemanticsError::NotSimple)
        }
    }
}

pub fn eval_literal(i: &Interpretation, lit: &ExtendedLiteral) -> TruthValue {
    match lit {
        ExtendedLiteral::Positive(a) => i.get(a),
        ExtendedLiteral::Constant(c) => *c,
        ExtendedLiteral::Negated(n, a) => negator_apply(*n, i.get(a)),
    }
}

/// The degree of a rule body: the rule's t-norm folded over its literals.
pub fn eval_body(i: &Interpretation, rule: &Rule) -> TruthValue {
    let vals: Vec<TruthValue> = rule.body().iter().map(|l| eval_literal(i, l)).collect();
    tnorm_apply(rule.tnorm, &vals).expect("rule bodies are nonempty by construction")
}

/// The degree of a whole rule: `I_r(body, head)` under the residual
/// implicator of the rule's t-norm. Constant heads read as themselves.
pub fn eval_rule(i: &Interpretation, rule: &Rule) -> TruthValue {
    let head = match &rule.head {
        Head::Atom(a) => i.get(a),
        Head::Constant(c) => *c,
    };
    residual_implicator(rule.tnorm, eval_body(i, rule), head)
}

fn check_base(p: &Program, i: &Interpretation) -> Result<(), SemanticsError> {
    let strays: Vec<Atom> = i
        .support()
        .filter(|a| !p.herbrand_base().contains(a))
        .cloned()
        .collect();
    if strays.is_empty() {
        Ok(())
    } else {
        Err(SemanticsError::BaseMismatch(strays))
    }
}

/// True iff every rule evaluates to 1; by the residuation property that is
/// exactly `body <= head` for every rule.
pub fn is_model(p: &Program, i: &Interpretation) -> Result<bool, SemanticsError> {
    check_base(p, i)?;
    Ok(p.rules().iter().all(|r| eval_rule(i, r).is_one()))
}

/// The reduct: every negated literal is replaced by its fixed degree under
/// `i`. Rule count, heads, labels, and t-norms are preserved.
pub fn reduct(p: &Program, i: &Interpretation) -> SimpleProgram {
    let rules = p
        .rules()
        .iter()
        .map(|r| {
            if r.is_simple() {
                r.clone()
            } else {
                let body = r
                    .body()
                    .iter()
                    .map(|l| match l {
                        ExtendedLiteral::Negated(n, a) => {
                            ExtendedLiteral::Constant(negator_apply(*n, i.get(a)))
                        }
                        other => other.clone(),
                    })
                    .collect();
                r.with_body(body)
            }
        })
        .collect();
    SimpleProgram(Program::new(rules))
}

/// One step of the immediate-consequence operator: each atom gets the
/// supremum of its rule-body degrees (0 when it heads no rule). Constraint
/// rules contribute to no atom.
pub fn tp_apply(p: &Program, i: &Interpretation) -> Interpretation {
    let mut out = Interpretation::new();
    for atom in p.herbrand_base() {
        let mut sup = TruthValue::zero();
        for r in p.rules_for(atom) {
            let v = eval_body(i, r);
            if v > sup {
                sup = v;
            }
        }
        out.set(atom.clone(), sup);
    }
    out
}

/// Iteration bound certificate: every degree reached from the empty
/// interpretation is a multiple of `1/L`, with `L` the lcm of the body
/// constants' denominators, so at most `|base| * L` strict increases can
/// happen before the least fixpoint.
fn iteration_bound(p: &Program) -> u128 {
    let mut lcm: u128 = 1;
    for r in p.rules() {
        for l in r.body() {
            if let ExtendedLiteral::Constant(c) = l {
                let d = c.denom() as u128;
                lcm = lcm / gcd_u128(lcm, d) * d;
                lcm = lcm.min(1 << 40);
            }
        }
    }
    p.herbrand_base().len() as u128 * lcm + 1
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The least fixpoint of the immediate-consequence operator, computed by
/// iteration from the empty interpretation until stationarity.
pub fn lfp(p: &SimpleProgram) -> Result<Interpretation, SemanticsError> {
    let program = p.as_program();
    let bound = iteration_bound(program);
    let mut current = Interpretation::new();
    for _ in 0..=bound {
        let next = tp_apply(program, &current);
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(SemanticsError::IterationLimit { bound })
}

/// Fixpoint characterization: `i` is an answer set iff it is a model and
/// equals the least fixpoint of its reduct.
pub fn is_answer_set(p: &Program, i: &Interpretation) -> Result<bool, SemanticsError> {
    if !is_model(p, i)? {
        return Ok(false);
    }
    Ok(lfp(&reduct(p, i))? == *i)
}

/// Unfounded-set test: `u` is unfounded w.r.t. `i` iff every rule for
/// every member either depends positively on `u`, overshoots its body, or
/// has a zero body.
pub fn is_unfounded(p: &Program, i: &Interpretation, u: &BTreeSet<Atom>) -> bool {
    u.iter().all(|atom| {
        p.rules_for(atom).all(|r| {
            if r.positive_body_atoms().any(|b| u.contains(b)) {
                return true;
            }
            let body = eval_body(i, r);
            i.get(atom) > body || body.is_zero()
        })
    })
}

/// Exhaustive unfounded-freeness oracle. It is enough to enumerate the
/// nonempty subsets of the support: if some unfounded set meets the
/// support, its restriction to the support is itself unfounded (members
/// whose rules leaned on zero-degree set atoms have zero bodies).
pub fn is_unfounded_free(p: &Program, i: &Interpretation) -> Result<bool, SemanticsError> {
    is_unfounded_free_guarded(p, i, UNFOUNDED_GUARD)
}

pub fn is_unfounded_free_guarded(
    p: &Program,
    i: &Interpretation,
    guard: usize,
) -> Result<bool, SemanticsError> {
    check_base(p, i)?;
    let support: Vec<Atom> = i.support().cloned().collect();
    if support.len() > guard {
        return Err(SemanticsError::SizeGuard(format!(
            "unfounded-freeness enumeration over {} support atoms exceeds the {guard}-atom guard",
            support.len()
        )));
    }
    for mask in 1u64..(1u64 << support.len()) {
        let u: BTreeSet<Atom> = support
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect();
        if is_unfounded(p, i, &u) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All interpretations over the base with values in `{0, 1/d, ..., 1}`,
/// in lexicographic order of the value vector (atoms ascending).
pub fn grid_interpretations(
    base: &BTreeSet<Atom>,
    d: u32,
) -> Result<impl Iterator<Item = Interpretation>, SemanticsError> {
    let atoms: Vec<Atom> = base.iter().cloned().collect();
    let per_atom = d as u128 + 1;
    let total = per_atom
        .checked_pow(atoms.len() as u32)
        .filter(|&t| t <= GRID_GUARD)
        .ok_or_else(|| {
            SemanticsError::SizeGuard(format!(
                "grid enumeration of {per_atom}^{} interpretations exceeds the guard",
                atoms.len()
            ))
        })?;
    let mut levels = vec![0u32; atoms.len()];
    let mut remaining = total;
    Ok(std::iter::from_fn(move || {
        if remaining == 0 {
            return None;
        }
        remaining -= 1;
        let mut interp = Interpretation::new();
        for (atom, &lvl) in atoms.iter().zip(&levels) {
            if lvl > 0 {
                interp.set(
                    atom.clone(),
                    TruthValue::new(lvl as i64, d as i64).expect("grid point in unit interval"),
                );
            }
        }
        for pos in (0..levels.len()).rev() {
            levels[pos] += 1;
            if levels[pos] <= d {
                break;
            }
            levels[pos] = 0;
        }
        Some(interp)
    }))
}

/// Brute-force oracle: every grid interpretation that is an answer set,
/// in lexicographic order.
pub fn grid_answer_sets(p: &Program, d: u32) -> Result<Vec<Interpretation>, SemanticsError> {
    let mut out = Vec::new();
    for i in grid_interpretations(p.herbrand_base(), d)? {
        if is_answer_set(p, &i)? {
            out.push(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truth::TNormKind;

    fn tv(n: i64, d: i64) -> TruthValue {
        TruthValue::new(n, d).unwrap()
    }

    fn prog1() -> Program {
        Program::parse_source(
            "r1: a <- TM(b, c).\nr2: b <- 0.8.\nr3: c <- TM(a, not_l b).\nr4: 0 <- TL(a, b).",
        )
        .unwrap()
    }

    fn progmin() -> Program {
        Program::parse_source("r1: a <- a.\nr2: p <- TL(not_l p, not_l a).").unwrap()
    }

    fn progchange() -> Program {
        Program::parse_source("r1: a <- 0.3.\nr2: a <- b.\nr3: b <- a.").unwrap()
    }

    fn i1() -> Interpretation {
        Interpretation::from_pairs([("b", tv(4, 5))])
    }

    fn i2() -> Interpretation {
        Interpretation::from_pairs([("a", tv(1, 5)), ("b", tv(4, 5)), ("c", tv(1, 5))])
    }

    #[test]
    fn body_evaluation_matches_worked_values() {
        let p = prog1();
        // r1 under I2: min(0.8, 0.2) = 0.2
        assert_eq!(eval_body(&i2(), &p.rules()[0]), tv(1, 5));
        // r4 under I2: max(0, 0.2 + 0.8 - 1) = 0
        assert_eq!(eval_body(&i2(), &p.rules()[3]), TruthValue::zero());
        // positive-only body under the empty interpretation is 0
        assert_eq!(
            eval_body(&Interpretation::new(), &p.rules()[0]),
            TruthValue::zero()
        );
    }

    #[test]
    fn rule_evaluation_matches_worked_values() {
        let p = prog1();
        assert!(eval_rule(&i1(), &p.rules()[2]).is_one());
        // a <- a holds fully under any interpretation
        let selfloop = Program::parse_source("r: a <- a.").unwrap();
        for v in [TruthValue::zero(), tv(1, 3), TruthValue::one()] {
            let i = Interpretation::from_pairs([("a", v)]);
            assert!(eval_rule(&i, &selfloop.rules()[0]).is_one());
        }
        // violated constraint: I_l(0.2, 0) = 0.8
        let i = Interpretation::from_pairs([("a", tv(3, 5)), ("b", tv(3, 5))]);
        assert_eq!(eval_rule(&i, &p.rules()[3]), tv(4, 5));
    }

    #[test]
    fn both_worked_interpretations_are_models() {
        let p = prog1();
        assert!(is_model(&p, &i1()).unwrap());
        assert!(is_model(&p, &i2()).unwrap());
        let not_model = Interpretation::from_pairs([("a", TruthValue::one()), ("b", tv(4, 5))]);
        assert!(!is_model(&p, &not_model).unwrap());
    }

    #[test]
    fn base_mismatch_is_an_error() {
        let p = prog1();
        let stray = Interpretation::from_pairs([("zzz", tv(1, 2))]);
        assert!(matches!(
            is_model(&p, &stray),
            Err(SemanticsError::BaseMismatch(_))
        ));
    }

    #[test]
    fn reduct_replaces_negated_literals_by_constants() {
        let p = prog1();
        let r = reduct(&p, &i1());
        let r3 = &r.as_program().rules()[2];
        assert_eq!(r3.to_string(), "r3: c <- TM(a, 0.2).");
        assert_eq!(r3.tnorm, TNormKind::Minimum);
        // a simple program reducts to itself
        let simple = Program::parse_source("r: a <- TM(b, 0.5).").unwrap();
        assert_eq!(
            reduct(&simple, &Interpretation::new()).as_program(),
            &simple
        );
        // p <- TL(not_l p, not_l a) under {a: 0.2, p: 0.4} -> p <- TL(0.6, 0.8)
        let pm = progmin();
        let i = Interpretation::from_pairs([("a", tv(1, 5)), ("p", tv(2, 5))]);
        let rp = reduct(&pm, &i);
        assert_eq!(
            rp.as_program().rules()[1].to_string(),
            "r2: p <- TL(0.6, 0.8)."
        );
    }

    #[test]
    fn tp_iteration_reaches_the_worked_fixpoint() {
        let p = prog1();
        let red = reduct(&p, &i1());
        let step1 = tp_apply(red.as_program(), &Interpretation::new());
        assert_eq!(step1, Interpretation::from_pairs([("b", tv(4, 5))]));
        let step2 = tp_apply(red.as_program(), &step1);
        assert_eq!(step2, step1);
        // an atom with no rules maps to 0
        let q = Program::parse_source("r: a <- b.").unwrap();
        let t = tp_apply(&q, &Interpretation::from_pairs([("b", tv(1, 2))]));
        assert_eq!(t.get(&Atom::new("b")), TruthValue::zero());
        assert_eq!(t.get(&Atom::new("a")), tv(1, 2));
    }

    #[test]
    fn lfp_matches_worked_examples() {
        let p = prog1();
        assert_eq!(lfp(&reduct(&p, &i1())).unwrap(), i1());
        assert_eq!(lfp(&reduct(&p, &i2())).unwrap(), i1());
        let pm = progmin();
        let i = Interpretation::from_pairs([("a", tv(1, 5)), ("p", tv(2, 5))]);
        assert_eq!(
            lfp(&reduct(&pm, &i)).unwrap(),
            Interpretation::from_pairs([("p", tv(2, 5))])
        );
        let empty = SimpleProgram::try_from(Program::new(vec![])).unwrap();
        assert_eq!(lfp(&empty).unwrap(), Interpretation::new());
    }

    #[test]
    fn answer_set_examples() {
        let p = prog1();
        assert!(is_answer_set(&p, &i1()).unwrap());
        assert!(!is_answer_set(&p, &i2()).unwrap());
        let pc = progchange();
        let i = Interpretation::from_pairs([("a", tv(3, 10)), ("b", tv(3, 10))]);
        assert!(is_answer_set(&pc, &i).unwrap());
    }

    #[test]
    fn unfounded_set_examples() {
        let p = prog1();
        let u2: BTreeSet<Atom> = [Atom::new("a"), Atom::new("c")].into();
        assert!(is_unfounded(&p, &i2(), &u2));
        assert!(is_unfounded(&p, &i2(), &BTreeSet::new()));
        let ub: BTreeSet<Atom> = [Atom::new("b")].into();
        assert!(!is_unfounded(&p, &i1(), &ub));
    }

    #[test]
    fn unfounded_freeness_examples() {
        let p = prog1();
        assert!(is_unfounded_free(&p, &i1()).unwrap());
        assert!(!is_unfounded_free(&p, &i2()).unwrap());
        assert!(is_unfounded_free(&p, &Interpretation::new()).unwrap());
        let err = is_unfounded_free_guarded(&p, &i1(), 0);
        assert!(matches!(err, Err(SemanticsError::SizeGuard(_))));
    }

    #[test]
    fn grid_answer_sets_match_worked_programs() {
        assert_eq!(grid_answer_sets(&prog1(), 10).unwrap(), vec![i1()]);
        assert_eq!(
            grid_answer_sets(&progchange(), 10).unwrap(),
            vec![Interpretation::from_pairs([
                ("a", tv(3, 10)),
                ("b", tv(3, 10))
            ])]
        );
        let empty = Program::new(vec![]);
        assert_eq!(
            grid_answer_sets(&empty, 1).unwrap(),
            vec![Interpretation::new()]
        );
    }

    #[test]
    fn tp_is_monotone_on_simple_programs() {
        let p = Program::parse_source(
            "r1: a <- TM(b, 0.5).\nr2: b <- 0.75.\nr3: c <- TL(a, b).\nr4: a <- c.",
        )
        .unwrap();
        let lo = Interpretation::from_pairs([("b", tv(1, 4))]);
        let hi = Interpretation::from_pairs([("b", tv(3, 4)), ("c", tv(1, 2))]);
        assert!(lo.leq(&hi));
        assert!(tp_apply(&p, &lo).leq(&tp_apply(&p, &hi)));
    }

    #[test]
    fn fixpoints_transfer_between_program_and_reduct() {
        // I = T_P(I) iff I = T_{P^I}(I), checked over a grid.
        let p = progmin();
        for i in grid_interpretations(p.herbrand_base(), 4).unwrap() {
            let fix_p = tp_apply(&p, &i) == i;
            let red = reduct(&p, &i);
            let fix_r = tp_apply(red.as_program(), &i) == i;
            assert_eq!(fix_p, fix_r, "fixpoint transfer fails at {i:?}");
        }
    }

    #[test]
    fn answer_sets_are_fixpoints_of_tp() {
        let p = prog1();
        for a in grid_answer_sets(&p, 5).unwrap() {
            assert_eq!(tp_apply(&p, &a), a);
        }
    }

    #[test]
    fn lfp_is_below_every_grid_fixpoint() {
        let p = Program::parse_source("r1: a <- TM(a, 1).\nr2: b <- 0.5.").unwrap();
        let simple = SimpleProgram::try_from(p.clone()).unwrap();
        let least = lfp(&simple).unwrap();
        for i in grid_interpretations(p.herbrand_base(), 4).unwrap() {
            if tp_apply(&p, &i) == i {
                assert!(least.leq(&i));
            }
        }
    }

    #[test]
    fn truncated_difference_and_support() {
        let a = Interpretation::from_pairs([("x", tv(3, 4)), ("y", tv(1, 4))]);
        let b = Interpretation::from_pairs([("x", tv(1, 4)), ("y", tv(1, 2))]);
        let d = fuzzy_difference(&a, &b);
        assert_eq!(d, Interpretation::from_pairs([("x", tv(1, 2))]));
        assert_eq!(d.support_set(), [Atom::new("x")].into());
    }

    #[test]
    fn interpretation_json_roundtrip_omits_zeros() {
        let mut i = Interpretation::from_pairs([("a", tv(4, 5)), ("b", tv(1, 3))]);
        i.set(Atom::new("z"), TruthValue::zero());
        let json = serde_json::to_string(&i).unwrap();
        assert_eq!(json, r#"{"a":"0.8","b":"1/3"}"#);
        let back: Interpretation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, i);
        // explicit zeros in the input do not disturb exact equality
        let padded: Interpretation =
            serde_json::from_str(r#"{"a":"0.8","b":"1/3","z":"0"}"#).unwrap();
        assert_eq!(padded, i);
    }
}
