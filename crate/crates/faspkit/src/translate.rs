//! Completion theories and loop formulas in reduced constraint form.
//!
//! Satisfaction of the completion's biresiduum equations and of loop
//! formulas is only ever required at degree 1, and a residual implicator
//! takes value 1 exactly on `<=`. Theories are therefore stored directly
//! as equalities `atom = expr` and order constraints `expr <= expr` over
//! `{const, var, min, max, Lukasiewicz t-norm, negations}`. That is also
//! precisely the shape the MILP backend consumes, and it makes the "any
//! residual implicator" freedom a non-choice rather than a lost detail.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{build_depgraph, Loop};
use crate::semantics::Interpretation;
use crate::syntax::{Atom, ExtendedLiteral, Head, Program, Rule};
use crate::truth::{negator_apply, tnorm_apply, NegatorKind, TNormKind, TruthValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("{0} is not a loop of the program")]
    NotALoop(Loop),
}

/// A fuzzy expression over the reduced signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(TruthValue),
    Var(Atom),
    /// Pointwise minimum (the Goedel t-norm, n-ary).
    Min(Vec<Expr>),
    /// Pointwise maximum.
    Max(Vec<Expr>),
    /// The n-ary Lukasiewicz t-norm `max(0, sum - (n-1))`.
    LNorm(Vec<Expr>),
    /// `1 - e`.
    NegL(Box<Expr>),
    /// Strict Goedel negation; admitted for evaluation and the grid
    /// backend, never for MILP input.
    NegG(Box<Expr>),
}

impl Expr {
    /// Wraps a list in `Max` unless it is a singleton; an empty list is
    /// the constant 0 (`max {} = 0`).
    pub fn max_of(mut items: Vec<Expr>) -> Expr {
        match items.len() {
            0 => Expr::Const(TruthValue::zero()),
            1 => items.pop().unwrap(),
            _ => Expr::Max(items),
        }
    }

    pub fn contains_goedel_negation(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::NegG(_) => true,
            Expr::NegL(e) => e.contains_goedel_negation(),
            Expr::Min(es) | Expr::Max(es) | Expr::LNorm(es) => {
                es.iter().any(Expr::contains_goedel_negation)
            }
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a Atom>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(a) => {
                out.insert(a);
            }
            Expr::NegL(e) | Expr::NegG(e) => e.collect_vars(out),
            Expr::Min(es) | Expr::Max(es) | Expr::LNorm(es) => {
                for e in es {
                    e.collect_vars(out);
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, head: &str, items: &[Expr]) -> fmt::Result {
            write!(f, "{head}(")?;
            for (k, e) in items.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")
        }
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(a) => write!(f, "{a}"),
            Expr::Min(es) => list(f, TNormKind::Minimum.symbol(), es),
            Expr::Max(es) => list(f, "max", es),
            Expr::LNorm(es) => list(f, TNormKind::Lukasiewicz.symbol(), es),
            Expr::NegL(e) => match **e {
                Expr::Var(_) | Expr::Const(_) => write!(f, "not_l {e}"),
                _ => write!(f, "not_l ({e})"),
            },
            Expr::NegG(e) => match **e {
                Expr::Var(_) | Expr::Const(_) => write!(f, "not_m {e}"),
                _ => write!(f, "not_m ({e})"),
            },
        }
    }
}

/// A reduced theory constraint: per-atom equality or an order constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Eq(Atom, Expr),
    Leq(Expr, Expr),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Eq(a, e) => write!(f, "{a} = {e}"),
            Constraint::Leq(l, r) => write!(f, "{l} <= {r}"),
        }
    }
}

/// A set of reduced constraints over an atom universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub constraints: Vec<Constraint>,
    universe: BTreeSet<Atom>,
}

impl Theory {
    pub fn new(constraints: Vec<Constraint>, universe: BTreeSet<Atom>) -> Self {
        #[cfg(debug_assertions)]
        {
            let mut vars = BTreeSet::new();
            for c in &constraints {
                match c {
                    Constraint::Eq(a, e) => {
                        vars.insert(a);
                        e.collect_vars(&mut vars);
                    }
                    Constraint::Leq(l, r) => {
                        l.collect_vars(&mut vars);
                        r.collect_vars(&mut vars);
                    }
                }
            }
            debug_assert!(
                vars.iter().all(|a| universe.contains(*a)),
                "theory references atoms outside its universe"
            );
        }
        Theory {
            constraints,
            universe,
        }
    }

    pub fn universe(&self) -> &BTreeSet<Atom> {
        &self.universe
    }

    /// The same theory with extra constraints appended.
    pub fn extended(&self, extra: impl IntoIterator<Item = Constraint>) -> Theory {
        let mut constraints = self.constraints.clone();
        constraints.extend(extra);
        Theory {
            constraints,
            universe: self.universe.clone(),
        }
    }

    pub fn contains_goedel_negation(&self) -> bool {
        self.constraints.iter().any(|c| match c {
            Constraint::Eq(_, e) => e.contains_goedel_negation(),
            Constraint::Leq(l, r) => l.contains_goedel_negation() || r.contains_goedel_negation(),
        })
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn literal_expr(lit: &ExtendedLiteral) -> Expr {
    match lit {
        ExtendedLiteral::Positive(a) => Expr::Var(a.clone()),
        ExtendedLiteral::Constant(c) => Expr::Const(*c),
        ExtendedLiteral::Negated(NegatorKind::Lukasiewicz, a) => {
            Expr::NegL(Box::new(Expr::Var(a.clone())))
        }
        ExtendedLiteral::Negated(NegatorKind::Goedel, a) => {
            Expr::NegG(Box::new(Expr::Var(a.clone())))
        }
    }
}

/// The body of a rule as an expression, reusing the rule's t-norm tag.
pub fn rule_body_expr(rule: &Rule) -> Expr {
    let mut items: Vec<Expr> = rule.body().iter().map(literal_expr).collect();
    if items.len() == 1 {
        return items.pop().unwrap();
    }
    match rule.tnorm {
        TNormKind::Minimum => Expr::Min(items),
        TNormKind::Lukasiewicz => Expr::LNorm(items),
    }
}

/// The completion: each atom equals the maximum of its rule bodies (0 when
/// it heads no rule), and each constraint rule caps its body by its head.
pub fn completion(p: &Program) -> Theory {
    let mut constraints = Vec::new();
    for atom in p.herbrand_base() {
        let bodies: Vec<Expr> = p.rules_for(atom).map(rule_body_expr).collect();
        constraints.push(Constraint::Eq(atom.clone(), Expr::max_of(bodies)));
    }
    for r in p.constraints() {
        let Head::Constant(cap) = &r.head else {
            unreachable!()
        };
        constraints.push(Constraint::Leq(rule_body_expr(r), Expr::Const(*cap)));
    }
    Theory::new(constraints, p.herbrand_base().clone())
}

pub fn eval_expr(i: &Interpretation, e: &Expr) -> TruthValue {
    match e {
        Expr::Const(c) => *c,
        Expr::Var(a) => i.get(a),
        Expr::NegL(e) => negator_apply(NegatorKind::Lukasiewicz, eval_expr(i, e)),
        Expr::NegG(e) => negator_apply(NegatorKind::Goedel, eval_expr(i, e)),
        Expr::Min(es) => {
            let vals: Vec<TruthValue> = es.iter().map(|e| eval_expr(i, e)).collect();
            tnorm_apply(TNormKind::Minimum, &vals).expect("min nodes are nonempty")
        }
        Expr::Max(es) => es
            .iter()
            .map(|e| eval_expr(i, e))
            .max()
            .expect("max nodes are nonempty"),
        Expr::LNorm(es) => {
            let vals: Vec<TruthValue> = es.iter().map(|e| eval_expr(i, e)).collect();
            tnorm_apply(TNormKind::Lukasiewicz, &vals).expect("t-norm nodes are nonempty")
        }
    }
}

pub fn constraint_holds(i: &Interpretation, c: &Constraint) -> bool {
    match c {
        Constraint::Eq(a, e) => i.get(a) == eval_expr(i, e),
        Constraint::Leq(l, r) => eval_expr(i, l) <= eval_expr(i, r),
    }
}

/// True iff every equality holds exactly and every order constraint holds.
pub fn satisfies(i: &Interpretation, th: &Theory) -> bool {
    th.constraints.iter().all(|c| constraint_holds(i, c))
}

/// Splits the rules whose head lies in the loop by whether their positive
/// body meets the loop (loop rules) or not (non-loop rules). The two parts
/// partition exactly the rules with head in the loop.
pub fn partition_loop_rules<'a>(
    p: &'a Program,
    l: &Loop,
) -> Result<(Vec<&'a Rule>, Vec<&'a Rule>), TranslateError> {
    if !build_depgraph(p).is_loop(l.atoms()) {
        return Err(TranslateError::NotALoop(l.clone()));
    }
    let mut loop_rules = Vec::new();
    let mut nonloop_rules = Vec::new();
    for atom in l.atoms() {
        for r in p.rules_for(atom) {
            if r.positive_body_atoms().any(|b| l.contains(b)) {
                loop_rules.push(r);
            } else {
                nonloop_rules.push(r);
            }
        }
    }
    Ok((loop_rules, nonloop_rules))
}

/// The loop formula of `l`: the maximum of the loop atoms is capped by the
/// maximum of the non-loop rule bodies (0 when there are none). This is
/// the degree-1 satisfaction of the implicator form of the formula.
pub fn loop_formula(p: &Program, l: &Loop) -> Result<Constraint, TranslateError> {
    let (_, nonloop) = partition_loop_rules(p, l)?;
    let lhs = Expr::max_of(l.atoms().iter().map(|a| Expr::Var(a.clone())).collect());
    let rhs = Expr::max_of(nonloop.iter().map(|r| rule_body_expr(r)).collect());
    Ok(Constraint::Leq(lhs, rhs))
}
