//! Substitution-based grounding and body normalization.
//!
//! Grounding is pure substitution: every variable must be covered by a
//! `#domain` declaration, the cartesian product of the declared constants
//! is enumerated, and `X != Y` guards filter substitutions. There are no
//! function symbols and no arithmetic. Weights fold into bodies as an
//! extra constant (`a <-[w] T(b...)` becomes `a <- T(b..., w)`), and
//! nested bodies with mixed t-norms are split into single-t-norm rules
//! over fresh `__aux` atoms. Nested applications of the *same* t-norm
//! flatten in place by associativity and need no auxiliaries.

use std::collections::BTreeMap;

use super::parser::{
    BodyExpr, SchematicAtom, SchematicHead, SchematicLiteral, SchematicProgram, Term,
};
use super::{Atom, ExtendedLiteral, Head, Program, Rule, SyntaxError, AUX_PREFIX};
use crate::truth::{TNormKind, TruthValue};

/// A ground rule that may still carry a weight and a nested body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundDraft {
    pub label: String,
    pub head: Head,
    pub weight: Option<TruthValue>,
    pub body: GroundBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundBody {
    Literal(ExtendedLiteral),
    Apply(TNormKind, Vec<GroundBody>),
}

fn substitute_atom(
    atom: &SchematicAtom,
    subst: &BTreeMap<&str, &str>,
) -> Result<Atom, SyntaxError> {
    if atom.args.is_empty() {
        return Ok(Atom::new(atom.pred.clone()));
    }
    let mut parts = Vec::with_capacity(atom.args.len());
    for arg in &atom.args {
        match arg {
            Term::Constant(c) => parts.push(c.as_str()),
            Term::Variable(v) => match subst.get(v.as_str()) {
                Some(c) => parts.push(c),
                None => unreachable!("unbound variable survived the coverage check"),
            },
        }
    }
    Ok(Atom::new(format!("{}({})", atom.pred, parts.join(","))))
}

fn substitute_body(
    body: &BodyExpr,
    subst: &BTreeMap<&str, &str>,
) -> Result<GroundBody, SyntaxError> {
    Ok(match body {
        BodyExpr::Literal(SchematicLiteral::Positive(a)) => {
            GroundBody::Literal(ExtendedLiteral::Positive(substitute_atom(a, subst)?))
        }
        BodyExpr::Literal(SchematicLiteral::Constant(c)) => {
            GroundBody::Literal(ExtendedLiteral::Constant(*c))
        }
        BodyExpr::Literal(SchematicLiteral::Negated(n, a)) => {
            GroundBody::Literal(ExtendedLiteral::Negated(*n, substitute_atom(a, subst)?))
        }
        BodyExpr::Apply(kind, items) => GroundBody::Apply(
            *kind,
            items
                .iter()
                .map(|i| substitute_body(i, subst))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn body_variables<'a>(body: &'a BodyExpr, out: &mut Vec<&'a str>) {
    match body {
        BodyExpr::Literal(SchematicLiteral::Positive(a))
        | BodyExpr::Literal(SchematicLiteral::Negated(_, a)) => {
            out.extend(a.variables());
        }
        BodyExpr::Literal(SchematicLiteral::Constant(_)) => {}
        BodyExpr::Apply(_, items) => {
            for i in items {
                body_variables(i, out);
            }
        }
    }
}

/// Replaces every schematic rule by all substitutions of domain constants
/// for its variables that satisfy the guards. Instantiated rules get the
/// substituted constants appended to their label.
pub fn ground(sp: &SchematicProgram) -> Result<Vec<GroundDraft>, SyntaxError> {
    let mut out = Vec::new();
    for rule in &sp.rules {
        let mut vars: Vec<&str> = Vec::new();
        if let SchematicHead::Atom(a) = &rule.head {
            vars.extend(a.variables());
        }
        body_variables(&rule.body, &mut vars);
        for (l, r) in &rule.guards {
            vars.push(l);
            vars.push(r);
        }
        vars.sort_unstable();
        vars.dedup();

        let mut domains: Vec<&[String]> = Vec::with_capacity(vars.len());
        for v in &vars {
            let dom = sp
                .domains
                .get(*v)
                .ok_or_else(|| SyntaxError::UnboundVariable {
                    var: v.to_string(),
                    label: rule.label.clone(),
                })?;
            if dom.is_empty() {
                return Err(SyntaxError::EmptyDomain { var: v.to_string() });
            }
            domains.push(dom);
        }

        // Odometer over the cartesian product, last variable fastest.
        let mut choice = vec![0usize; vars.len()];
        'product: loop {
            let subst: BTreeMap<&str, &str> = vars
                .iter()
                .enumerate()
                .map(|(k, v)| (*v, domains[k][choice[k]].as_str()))
                .collect();
            let guards_ok = rule
                .guards
                .iter()
                .all(|(l, r)| subst[l.as_str()] != subst[r.as_str()]);
            if guards_ok {
                let label = if vars.is_empty() {
                    rule.label.clone()
                } else {
                    let suffix: Vec<&str> = vars.iter().map(|v| subst[*v]).collect();
                    format!("{}_{}", rule.label, suffix.join("_"))
                };
                let head = match &rule.head {
                    SchematicHead::Atom(a) => Head::Atom(substitute_atom(a, &subst)?),
                    SchematicHead::Constant(c) => Head::Constant(*c),
                };
                out.push(GroundDraft {
                    label,
                    head,
                    weight: rule.weight,
                    body: substitute_body(&rule.body, &subst)?,
                });
            }
            // advance the odometer
            for pos in (0..choice.len()).rev() {
                choice[pos] += 1;
                if choice[pos] < domains[pos].len() {
                    continue 'product;
                }
                choice[pos] = 0;
            }
            break;
        }
    }
    Ok(out)
}

/// Folds a rule weight into its body: `a <-[w] T(b...)` becomes
/// `a <- T(b..., w)`. Rules without weights pass through unchanged.
pub fn desugar_weighted(draft: GroundDraft) -> GroundDraft {
    let GroundDraft {
        label,
        head,
        weight,
        body,
    } = draft;
    let body = match weight {
        None => body,
        Some(w) => match body {
            GroundBody::Apply(kind, mut items) => {
                items.push(GroundBody::Literal(ExtendedLiteral::Constant(w)));
                GroundBody::Apply(kind, items)
            }
            lit @ GroundBody::Literal(_) => GroundBody::Apply(
                TNormKind::Minimum,
                vec![lit, GroundBody::Literal(ExtendedLiteral::Constant(w))],
            ),
        },
    };
    GroundDraft {
        label,
        head,
        weight: None,
        body,
    }
}

/// Flattens nested applications of the same t-norm (associativity).
fn flatten(body: GroundBody) -> GroundBody {
    match body {
        GroundBody::Literal(_) => body,
        GroundBody::Apply(kind, items) => {
            let mut flat = Vec::with_capacity(items.len());
            for item in items {
                match flatten(item) {
                    GroundBody::Apply(inner, sub) if inner == kind => flat.extend(sub),
                    other => flat.push(other),
                }
            }
            GroundBody::Apply(kind, flat)
        }
    }
}

/// Splits a rule with a nested mixed-t-norm body into single-t-norm rules.
/// Each remaining inner application is named by a fresh `__aux` atom with
/// its own defining rule, so the number of new rules is at most the number
/// of inner t-norm nodes. Already-flat rules come back unchanged.
pub fn normalize_mixed(draft: GroundDraft, counter: &mut usize) -> Result<Vec<Rule>, SyntaxError> {
    debug_assert!(draft.weight.is_none(), "desugar weights before normalizing");
    let mut rules = Vec::new();
    let body = flatten(draft.body);
    match body {
        GroundBody::Literal(lit) => {
            rules.push(Rule::new(
                draft.label,
                draft.head,
                TNormKind::Minimum,
                vec![lit],
            )?);
        }
        GroundBody::Apply(kind, items) => {
            let mut literals = Vec::with_capacity(items.len());
            let mut pending = Vec::new();
            for item in items {
                match item {
                    GroundBody::Literal(lit) => literals.push(lit),
                    inner @ GroundBody::Apply(..) => {
                        let aux = Atom::new(format!("{AUX_PREFIX}{counter}"));
                        *counter += 1;
                        literals.push(ExtendedLiteral::Positive(aux.clone()));
                        pending.push(GroundDraft {
                            label: aux.as_str().to_string(),
                            head: Head::Atom(aux),
                            weight: None,
                            body: inner,
                        });
                    }
                }
            }
            rules.push(Rule::new(draft.label, draft.head, kind, literals)?);
            for p in pending {
                rules.extend(normalize_mixed(p, counter)?);
            }
        }
    }
    Ok(rules)
}

fn body_atoms(body: &GroundBody, out: &mut Vec<Atom>) {
    match body {
        GroundBody::Literal(lit) => out.extend(lit.atom().cloned()),
        GroundBody::Apply(_, items) => items.iter().for_each(|i| body_atoms(i, out)),
    }
}

/// The full pipeline from a parsed schematic program to a ground program:
/// ground, fold weights, normalize bodies, then index. Fresh auxiliary
/// names start above any `__auxN` atom already present in the input, so
/// printed programs re-parse and re-compile without collisions.
pub fn compile(sp: &SchematicProgram) -> Result<Program, SyntaxError> {
    let drafts = ground(sp)?;
    let mut atoms = Vec::new();
    for d in &drafts {
        if let Head::Atom(a) = &d.head {
            atoms.push(a.clone());
        }
        body_atoms(&d.body, &mut atoms);
    }
    let mut counter = atoms
        .iter()
        .filter_map(|a| a.as_str().strip_prefix(AUX_PREFIX)?.parse::<usize>().ok())
        .map(|n| n + 1)
        .max()
        .unwrap_or(0);
    let mut rules = Vec::new();
    for draft in drafts {
        rules.extend(normalize_mixed(desugar_weighted(draft), &mut counter)?);
    }
    Ok(Program::new(rules))
}
