//! Fuzzy satisfiability over the Łukasiewicz-safe fragment by exact
//! mixed-integer feasibility.
//!
//! Theories are compiled to a model with one continuous `[0,1]` variable
//! per atom, one auxiliary continuous variable per `max`/`min`/t-norm
//! node, and selector binaries that pin which argument attains the
//! extremum (one binary total for the t-norm's truncation). Search is
//! plain depth-first branch and bound over the binaries with LP-relaxation
//! pruning; the LP core is an exact rational simplex, so "equals 1" and
//! "equals 0.8" are certified, not approximated. Every model found is
//! re-checked against the source theory before it is returned.
//!
//! Strict Goedel negation is refused here: a mixed-integer feasible region
//! is a finite union of closed polyhedra, while `not_m` carves a
//! non-closed solution set, so no such encoding exists. Theories using it
//! are still served by evaluation and the grid oracle.

mod simplex;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::semantics::Interpretation;
use crate::syntax::Atom;
use crate::translate::{satisfies, Constraint, Expr, Theory};
use crate::truth::TruthValue;

use simplex::{big, feasible_point, Row};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilpError {
    #[error("Goedel negation cannot be encoded: mixed-integer feasible regions are finite unions of closed polyhedra, but strict negation needs a non-closed solution set; use the grid backend for such programs")]
    GoedelNegation,
    #[error("internal error: {0}")]
    Internal(String),
}

/// Constraint sense shared by the model and the simplex core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

impl Rel {
    fn symbol(&self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Ge => ">=",
            Rel::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Continuous in `[0,1]`.
    Continuous,
    Binary,
}

/// Where a model variable came from, for debugging and export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarOrigin {
    Atom(Atom),
    /// The value of an inner `max`/`min`/t-norm node.
    NodeValue(String),
    /// A selector binary attached to a node.
    Selector(String),
}

#[derive(Debug, Clone)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    pub origin: VarOrigin,
}

/// A linear constraint over model variables with rational coefficients.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, BigRational)>,
    pub rel: Rel,
    pub rhs: BigRational,
}

/// A mixed-integer feasibility model for a theory.
#[derive(Debug, Clone)]
pub struct MilpModel {
    vars: Vec<VarInfo>,
    constraints: Vec<LinearConstraint>,
    atom_vars: BTreeMap<Atom, usize>,
}

impl MilpModel {
    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn atom_var(&self, atom: &Atom) -> Option<usize> {
        self.atom_vars.get(atom).copied()
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| i)
    }
}

/// The outcome of a satisfiability call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Model(Interpretation),
    Unsat,
}

/// An affine expression over model variables, used while compiling.
#[derive(Debug, Clone, Default)]
struct Affine {
    terms: BTreeMap<usize, BigRational>,
    constant: BigRational,
}

impl Affine {
    fn constant(c: BigRational) -> Self {
        Affine {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    fn var(j: usize) -> Self {
        Affine {
            terms: [(j, BigRational::one())].into(),
            constant: BigRational::zero(),
        }
    }

    fn negate(mut self) -> Self {
        for v in self.terms.values_mut() {
            *v = -std::mem::take(v);
        }
        self.constant = -self.constant;
        self
    }

    fn plus(mut self, other: &Affine) -> Self {
        for (j, c) in &other.terms {
            let cell = self.terms.entry(*j).or_insert_with(BigRational::zero);
            *cell += c;
            if cell.is_zero() {
                self.terms.remove(j);
            }
        }
        self.constant += &other.constant;
        self
    }

    fn minus(self, other: &Affine) -> Self {
        self.plus(&other.clone().negate())
    }
}

struct Encoder {
    model: MilpModel,
    node_count: usize,
}

impl Encoder {
    /// Emits `lhs rel rhs` as a linear constraint.
    fn constrain(&mut self, lhs: Affine, rel: Rel, rhs: &Affine) {
        let diff = lhs.minus(rhs);
        self.model.constraints.push(LinearConstraint {
            terms: diff.terms.into_iter().collect(),
            rel,
            rhs: -diff.constant,
        });
    }

    fn new_var(&mut self, name: String, kind: VarKind, origin: VarOrigin) -> usize {
        self.model.vars.push(VarInfo { name, kind, origin });
        self.model.vars.len() - 1
    }

    /// Returns the variable index and node id of a fresh aux variable.
    fn node_value(&mut self, describes: &Expr) -> (usize, usize) {
        let id = self.node_count;
        self.node_count += 1;
        let idx = self.new_var(
            format!("z{id}"),
            VarKind::Continuous,
            VarOrigin::NodeValue(describes.to_string()),
        );
        (idx, id)
    }

    fn selector(&mut self, node_id: usize, k: usize) -> usize {
        self.new_var(
            format!("d{node_id}_{k}"),
            VarKind::Binary,
            VarOrigin::Selector(format!("z{node_id}")),
        )
    }

    /// One binary per extremum node selects the attained argument:
    /// `z = max` needs `z >= x_i` for all `i` and `z <= x_k + (1 - d_k)`
    /// for the selected `k`; `min` is the mirror image.
    fn extremum(&mut self, e: &Expr, args: &[Expr], is_max: bool) -> Result<Affine, MilpError> {
        let compiled: Vec<Affine> = args
            .iter()
            .map(|a| self.compile(a))
            .collect::<Result<_, _>>()?;
        let (node, node_id) = self.node_value(e);
        let z = Affine::var(node);
        let mut selector_sum = Affine::constant(BigRational::zero());
        for (k, arg) in compiled.iter().enumerate() {
            let d = self.selector(node_id, k);
            selector_sum = selector_sum.plus(&Affine::var(d));
            if is_max {
                self.constrain(z.clone(), Rel::Ge, arg);
                // z - x_k + d_k <= 1
                self.constrain(
                    z.clone().minus(arg).plus(&Affine::var(d)),
                    Rel::Le,
                    &Affine::constant(BigRational::one()),
                );
            } else {
                self.constrain(z.clone(), Rel::Le, arg);
                // z - x_k - d_k >= -1
                self.constrain(
                    z.clone().minus(arg).minus(&Affine::var(d)),
                    Rel::Ge,
                    &Affine::constant(-BigRational::one()),
                );
            }
        }
        self.constrain(selector_sum, Rel::Eq, &Affine::constant(BigRational::one()));
        Ok(z)
    }

    /// The n-ary Łukasiewicz t-norm `z = max(0, s)` with
    /// `s = sum(args) - (n-1)` takes a single truncation binary:
    /// `d = 1` forces `z = 0` (and `s <= 0`), `d = 0` forces `z = s`.
    fn lukasiewicz(&mut self, e: &Expr, args: &[Expr]) -> Result<Affine, MilpError> {
        let compiled: Vec<Affine> = args
            .iter()
            .map(|a| self.compile(a))
            .collect::<Result<_, _>>()?;
        let n = compiled.len() as i64;
        let mut sum = Affine::constant(big(-(n - 1), 1));
        for arg in &compiled {
            sum = sum.plus(arg);
        }
        let (node, node_id) = self.node_value(e);
        let z = Affine::var(node);
        let d = self.selector(node_id, 0);
        // z >= s (z >= 0 comes from the variable bounds)
        self.constrain(z.clone(), Rel::Ge, &sum);
        // z <= s + d * (n-1)
        let slack = sum.plus(&Affine {
            terms: [(d, big(n - 1, 1))].into(),
            constant: BigRational::zero(),
        });
        self.constrain(z.clone(), Rel::Le, &slack);
        // z <= 1 - d
        self.constrain(
            z.clone().plus(&Affine::var(d)),
            Rel::Le,
            &Affine::constant(BigRational::one()),
        );
        Ok(z)
    }

    fn compile(&mut self, e: &Expr) -> Result<Affine, MilpError> {
        match e {
            Expr::Const(c) => Ok(Affine::constant(big(c.numer(), c.denom()))),
            Expr::Var(a) => {
                let j = self.model.atom_vars.get(a).copied().ok_or_else(|| {
                    MilpError::Internal(format!("atom {a} missing from the model universe"))
                })?;
                Ok(Affine::var(j))
            }
            Expr::NegL(inner) => {
                let i = self.compile(inner)?;
                Ok(Affine::constant(BigRational::one()).minus(&i))
            }
            Expr::NegG(_) => Err(MilpError::GoedelNegation),
            Expr::Max(args) => self.extremum(e, args, true),
            Expr::Min(args) => self.extremum(e, args, false),
            Expr::LNorm(args) => self.lukasiewicz(e, args),
        }
    }
}

/// Compiles a theory into a mixed-integer feasibility model. Every atom of
/// the universe gets one continuous variable, in atom order, so identical
/// theories yield identical models.
pub fn encode(th: &Theory) -> Result<MilpModel, MilpError> {
    let mut encoder = Encoder {
        model: MilpModel {
            vars: Vec::new(),
            constraints: Vec::new(),
            atom_vars: BTreeMap::new(),
        },
        node_count: 0,
    };
    for atom in th.universe() {
        let j = encoder.new_var(
            atom.as_str().to_string(),
            VarKind::Continuous,
            VarOrigin::Atom(atom.clone()),
        );
        encoder.model.atom_vars.insert(atom.clone(), j);
    }
    for c in &th.constraints {
        match c {
            Constraint::Eq(a, e) => {
                let lhs = encoder.compile(&Expr::Var(a.clone()))?;
                let rhs = encoder.compile(e)?;
                encoder.constrain(lhs, Rel::Eq, &rhs);
            }
            Constraint::Leq(l, r) => {
                let lhs = encoder.compile(l)?;
                let rhs = encoder.compile(r)?;
                encoder.constrain(lhs, Rel::Le, &rhs);
            }
        }
    }
    Ok(encoder.model)
}

/// Solves the LP relaxation of the model with the given binaries fixed and
/// the rest relaxed to `[0,1]`. Returns a rational point over all model
/// variables (fixed binaries included) or `None` when infeasible.
pub fn lp_feasible(
    model: &MilpModel,
    fixed: &BTreeMap<usize, bool>,
) -> Result<Option<Vec<BigRational>>, MilpError> {
    // Remap unfixed variables to dense indices.
    let mut dense = Vec::with_capacity(model.vars.len());
    let mut origin_of = Vec::new();
    for j in 0..model.vars.len() {
        if fixed.contains_key(&j) {
            dense.push(usize::MAX);
        } else {
            dense.push(origin_of.len());
            origin_of.push(j);
        }
    }
    let rows: Vec<Row> = model
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = Vec::with_capacity(c.terms.len());
            let mut rhs = c.rhs.clone();
            for (j, coef) in &c.terms {
                match fixed.get(j) {
                    Some(true) => rhs -= coef,
                    Some(false) => {}
                    None => coeffs.push((dense[*j], coef.clone())),
                }
            }
            Row {
                coeffs,
                rel: c.rel,
                rhs,
            }
        })
        .collect();
    let Some(point) = feasible_point(origin_of.len(), &rows) else {
        return Ok(None);
    };
    let mut full = vec![BigRational::zero(); model.vars.len()];
    for (dense_j, value) in point.into_iter().enumerate() {
        full[origin_of[dense_j]] = value;
    }
    for (&j, &v) in fixed {
        full[j] = if v {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    Ok(Some(full))
}

fn truth_value_of(v: &BigRational) -> Result<TruthValue, MilpError> {
    let numer = v.numer().to_i64();
    let denom = v.denom().to_i64();
    match (numer, denom) {
        (Some(n), Some(d)) => TruthValue::new(n, d)
            .map_err(|e| MilpError::Internal(format!("solution value {v} out of range: {e}"))),
        _ => Err(MilpError::Internal(format!(
            "solution value {v} exceeds the scalar range"
        ))),
    }
}

fn interpretation_of(
    model: &MilpModel,
    point: &[BigRational],
) -> Result<Interpretation, MilpError> {
    let mut out = Interpretation::new();
    for (atom, &j) in &model.atom_vars {
        out.set(atom.clone(), truth_value_of(&point[j])?);
    }
    Ok(out)
}

/// Decides satisfiability of a theory over the Łukasiewicz-safe fragment.
///
/// Depth-first branch and bound over the selector binaries in encoding
/// order, zero branch first, pruning by LP-relaxation infeasibility. Any
/// relaxation point with integral binaries is a model candidate; it is
/// validated against the theory with exact arithmetic before being
/// returned, and a validation failure is an internal error rather than a
/// wrong answer.
pub fn sat_solve(th: &Theory) -> Result<SatResult, MilpError> {
    let model = encode(th)?;
    let binaries: Vec<usize> = model.binaries().collect();
    let mut fixed: BTreeMap<usize, bool> = BTreeMap::new();

    fn dfs(
        th: &Theory,
        model: &MilpModel,
        binaries: &[usize],
        fixed: &mut BTreeMap<usize, bool>,
    ) -> Result<Option<Interpretation>, MilpError> {
        let Some(point) = lp_feasible(model, fixed)? else {
            return Ok(None);
        };
        let integral = binaries
            .iter()
            .all(|&b| point[b].is_zero() || point[b].is_one());
        if integral {
            let interp = interpretation_of(model, &point)?;
            if !satisfies(&interp, th) {
                return Err(MilpError::Internal(format!(
                    "relaxation produced a point that fails exact validation: {}",
                    serde_json::to_string(&interp).unwrap_or_default()
                )));
            }
            return Ok(Some(interp));
        }
        let next = binaries
            .iter()
            .copied()
            .find(|b| !fixed.contains_key(b))
            .ok_or_else(|| {
                MilpError::Internal("fractional binary with every binary fixed".into())
            })?;
        for value in [false, true] {
            fixed.insert(next, value);
            if let Some(m) = dfs(th, model, binaries, fixed)? {
                fixed.remove(&next);
                return Ok(Some(m));
            }
            fixed.remove(&next);
        }
        Ok(None)
    }

    match dfs(th, &model, &binaries, &mut fixed)? {
        Some(m) => Ok(SatResult::Model(m)),
        None => Ok(SatResult::Unsat),
    }
}

fn sanitize(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            out.push(c);
        } else {
            out.push('_');
        }
    }
    out
}

fn coefficient_strings(c: &LinearConstraint) -> (Vec<String>, String) {
    // Render the whole row in decimals when every value has a 2^a*5^b
    // denominator, otherwise scale the row to integers.
    let mut values: Vec<BigRational> = c.terms.iter().map(|(_, v)| v.clone()).collect();
    values.push(c.rhs.clone());
    let decimal: Option<Vec<String>> = values
        .iter()
        .map(|v| {
            let n = v.numer().to_i128()?;
            let d = v.denom().to_i128()?;
            crate::truth::decimal_form(n.abs(), d).map(|s| if n < 0 { format!("-{s}") } else { s })
        })
        .collect();
    match decimal {
        Some(mut strings) => {
            let rhs = strings.pop().unwrap();
            (strings, rhs)
        }
        None => {
            let mut lcm = num_bigint::BigInt::one();
            for v in &values {
                let d = v.denom();
                lcm = &lcm / num_integer::Integer::gcd(&lcm, d) * d;
            }
            let scaled: Vec<String> = values
                .iter()
                .map(|v| {
                    (v * BigRational::from_integer(lcm.clone()))
                        .numer()
                        .to_string()
                })
                .collect();
            let mut strings = scaled;
            let rhs = strings.pop().unwrap();
            (strings, rhs)
        }
    }
}

/// Renders the model in the conventional text LP format, for debugging
/// against third-party solvers.
pub fn lp_format(model: &MilpModel) -> String {
    use std::fmt::Write;

    // Unique LP-safe names.
    let mut names: Vec<String> = Vec::with_capacity(model.vars.len());
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    for v in &model.vars {
        let base = sanitize(&v.name);
        let name = match used.get_mut(&base) {
            None => {
                used.insert(base.clone(), 1);
                base
            }
            Some(count) => {
                *count += 1;
                format!("{base}_{count}")
            }
        };
        names.push(name);
    }

    let mut out = String::new();
    out.push_str("\\ feasibility model (no objective)\n");
    out.push_str("Minimize\n obj:\nSubject To\n");
    for (i, c) in model.constraints.iter().enumerate() {
        let (coeffs, rhs) = coefficient_strings(c);
        let _ = write!(out, " c{}:", i + 1);
        if c.terms.is_empty() {
            out.push_str(" 0");
        }
        for ((j, _), coef) in c.terms.iter().zip(&coeffs) {
            let (sign, magnitude) = match coef.strip_prefix('-') {
                Some(rest) => ("-", rest),
                None => ("+", coef.as_str()),
            };
            let _ = write!(out, " {sign} {magnitude} {}", names[*j]);
        }
        let _ = writeln!(out, " {} {}", c.rel.symbol(), rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in model.vars.iter().enumerate() {
        if v.kind == VarKind::Continuous {
            let _ = writeln!(out, " 0 <= {} <= 1", names[j]);
        }
    }
    let binaries: Vec<&str> = model.binaries().map(|j| names[j].as_str()).collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        let _ = writeln!(out, " {}", binaries.join(" "));
    }
    out.push_str("End\n");
    out
}
