//! The iterative solver: fuzzy satisfiability over the completion plus an
//! accumulating set of loop formulas, until a fixpoint check certifies an
//! answer set.
//!
//! Each round asks the backend for a model of the current theory. If the
//! candidate equals the least fixpoint of its reduct it is an answer set
//! and is returned (after an independent re-check). Otherwise the
//! truncated difference against that fixpoint localizes the failure: some
//! loop inside its support has a violated loop formula, those formulas are
//! added, and the search repeats. Loop formulas never exclude answer sets,
//! so an unsatisfiable round is conclusive: the program has none.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{build_depgraph, GraphError, Loop, LOOP_SCOPE_GUARD};
use crate::milp::{sat_solve, MilpError, SatResult};
use crate::semantics::{
    fuzzy_difference, grid_interpretations, is_answer_set, is_model, lfp, reduct, Interpretation,
    SemanticsError,
};
use crate::syntax::{Atom, Program};
use crate::translate::{
    completion, constraint_holds, loop_formula, satisfies, Theory, TranslateError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("the candidate is not an answer set, yet no new violated loop formula exists in the difference support {support:?}; {hint}")]
    NoViolatedLoop {
        support: Vec<Atom>,
        hint: &'static str,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl SolveError {
    /// True for errors that mean "this program lies outside the fragment
    /// the chosen backend can handle", as opposed to defects.
    pub fn is_fragment_violation(&self) -> bool {
        matches!(self, SolveError::Milp(MilpError::GoedelNegation))
    }
}

/// Which engine produces models of the working theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Exact mixed-integer feasibility; Łukasiewicz-safe fragment only.
    Milp,
    /// Exhaustive search over the grid `{0, 1/d, ..., 1}`; handles every
    /// connective but only finds models with on-grid values.
    Grid { denominator: u32 },
}

/// Which loops from the difference support get their formulas added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoopMode {
    /// All loops inside the support (guarded). Guarantees that a violated
    /// formula is among the additions.
    #[default]
    All,
    /// Only maximal loops. Cheaper, but the violated loop may be a
    /// non-maximal one, in which case the run stops with a diagnostic.
    Maximal,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub backend: Backend,
    pub loop_mode: LoopMode,
    /// Guard on the difference-support size for exhaustive loop search.
    pub max_support: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            backend: Backend::Milp,
            loop_mode: LoopMode::All,
            max_support: LOOP_SCOPE_GUARD,
        }
    }
}

/// One round of the solve loop, as recorded in the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceIteration {
    pub candidate: Interpretation,
    pub least_fixpoint: Interpretation,
    pub support: Vec<Atom>,
    pub loops_added: Vec<Loop>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", content = "answer_set", rename_all = "snake_case")]
pub enum Outcome {
    AnswerSet(Interpretation),
    NoAnswerSet,
}

/// The full history of a solve call: every candidate, the fixpoint it was
/// checked against, and the loop formulas added in response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveTrace {
    pub iterations: Vec<TraceIteration>,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl SolveTrace {
    pub fn answer_set(&self) -> Option<&Interpretation> {
        match &self.outcome {
            Outcome::AnswerSet(i) => Some(i),
            Outcome::NoAnswerSet => None,
        }
    }
}

fn backend_model(th: &Theory, backend: Backend) -> Result<SatResult, SolveError> {
    match backend {
        Backend::Milp => Ok(sat_solve(th)?),
        Backend::Grid { denominator } => {
            for i in grid_interpretations(th.universe(), denominator)? {
                if satisfies(&i, th) {
                    return Ok(SatResult::Model(i));
                }
            }
            Ok(SatResult::Unsat)
        }
    }
}

/// Runs the solve loop on a ground program.
pub fn solve(program: &Program, options: &SolveOptions) -> Result<SolveTrace, SolveError> {
    let graph = build_depgraph(program);
    let base_theory = completion(program);
    let mut added: Vec<Loop> = Vec::new();
    let mut formulas = Vec::new();
    let mut iterations = Vec::new();

    loop {
        let theory = base_theory.extended(formulas.iter().cloned());
        let candidate = match backend_model(&theory, options.backend)? {
            SatResult::Unsat => {
                return Ok(SolveTrace {
                    iterations,
                    outcome: Outcome::NoAnswerSet,
                });
            }
            SatResult::Model(m) => m,
        };
        let fixpoint = lfp(&reduct(program, &candidate))?;
        if candidate == fixpoint {
            // Equality with the reduct fixpoint makes this an answer set;
            // re-verify through the independent characterization anyway.
            if !is_answer_set(program, &candidate)? {
                return Err(SolveError::Internal(
                    "fixpoint-equal candidate failed the answer-set re-check".into(),
                ));
            }
            iterations.push(TraceIteration {
                candidate: candidate.clone(),
                least_fixpoint: fixpoint,
                support: Vec::new(),
                loops_added: Vec::new(),
            });
            return Ok(SolveTrace {
                iterations,
                outcome: Outcome::AnswerSet(candidate),
            });
        }

        let support = fuzzy_difference(&candidate, &fixpoint).support_set();
        let found = match options.loop_mode {
            LoopMode::All => graph.all_loops_guarded(&support, options.max_support)?,
            LoopMode::Maximal => graph.maximal_loops(&support),
        };
        let mut fresh = Vec::new();
        let mut violated = 0usize;
        for l in found {
            if added.contains(&l) {
                continue;
            }
            let formula = loop_formula(program, &l)?;
            if !constraint_holds(&candidate, &formula) {
                violated += 1;
            }
            added.push(l.clone());
            fresh.push(l);
            formulas.push(formula);
        }
        if violated == 0 {
            return Err(SolveError::NoViolatedLoop {
                support: support.into_iter().collect(),
                hint: match options.loop_mode {
                    LoopMode::Maximal => {
                        "the violated loop can be non-maximal; rerun with the `all` loop mode"
                    }
                    LoopMode::All => "this should be impossible and indicates a defect",
                },
            });
        }
        iterations.push(TraceIteration {
            candidate,
            least_fixpoint: fixpoint,
            support: support.into_iter().collect(),
            loops_added: fresh,
        });
    }
}

/// Per-loop detail in a [`CheckReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopCheck {
    pub atoms: Loop,
    pub formula: String,
    pub violated: bool,
}

/// Everything the fixpoint characterization says about one interpretation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub model: bool,
    pub satisfies_completion: bool,
    pub least_fixpoint: Interpretation,
    pub fixpoint_matches: bool,
    pub diff_support: Vec<Atom>,
    /// Loops found inside the difference support (exhaustive when it fits
    /// the guard, maximal otherwise).
    pub loops: Vec<LoopCheck>,
    pub loops_exhaustive: bool,
    pub answer_set: bool,
}

/// Diagnoses an interpretation against a program: model-ness, completion
/// satisfaction, the reduct fixpoint, and the violated loops in between.
pub fn check(
    program: &Program,
    interpretation: &Interpretation,
) -> Result<CheckReport, SolveError> {
    let model = is_model(program, interpretation)?;
    let satisfies_completion = satisfies(interpretation, &completion(program));
    let fixpoint = lfp(&reduct(program, interpretation))?;
    let fixpoint_matches = fixpoint == *interpretation;
    let support = fuzzy_difference(interpretation, &fixpoint).support_set();

    let graph = build_depgraph(program);
    let (found, loops_exhaustive) = match graph.all_loops(&support) {
        Ok(all) => (all, true),
        Err(GraphError::ScopeGuard { .. }) => (graph.maximal_loops(&support), false),
    };
    let mut loops = Vec::new();
    for l in found {
        let formula = loop_formula(program, &l)?;
        loops.push(LoopCheck {
            violated: !constraint_holds(interpretation, &formula),
            formula: formula.to_string(),
            atoms: l,
        });
    }
    Ok(CheckReport {
        model,
        satisfies_completion,
        fixpoint_matches,
        diff_support: support.into_iter().collect(),
        loops,
        loops_exhaustive,
        answer_set: model && fixpoint_matches,
        least_fixpoint: fixpoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truth::TruthValue;

    fn tv(n: i64, d: i64) -> TruthValue {
        TruthValue::new(n, d).unwrap()
    }

    fn progchange() -> Program {
        Program::parse_source("r1: a <- 0.3.\nr2: a <- b.\nr3: b <- a.").unwrap()
    }

    fn prog1() -> Program {
        Program::parse_source(
            "r1: a <- TM(b, c).\nr2: b <- 0.8.\nr3: c <- TM(a, not_l b).\nr4: 0 <- TL(a, b).",
        )
        .unwrap()
    }

    #[test]
    fn solves_progchange_within_two_iterations() {
        let trace = solve(&progchange(), &SolveOptions::default()).unwrap();
        let expected = Interpretation::from_pairs([("a", tv(3, 10)), ("b", tv(3, 10))]);
        assert_eq!(trace.answer_set(), Some(&expected));
        assert!(
            trace.iterations.len() <= 2,
            "took {} iterations",
            trace.iterations.len()
        );
        assert!(is_answer_set(&progchange(), trace.answer_set().unwrap()).unwrap());
    }

    #[test]
    fn solves_prog1_to_the_unique_answer_set() {
        let trace = solve(&prog1(), &SolveOptions::default()).unwrap();
        let expected = Interpretation::from_pairs([("b", tv(4, 5))]);
        assert_eq!(trace.answer_set(), Some(&expected));
    }

    #[test]
    fn formula_adding_iterations_stay_below_the_loop_count() {
        // Three loops: {x}, {y}, {x, y}; the last iteration only records
        // the accepted answer set and adds nothing.
        let tangled = Program::parse_source(
            "r1: x <- TM(x, y).\nr2: y <- TM(y, x).\nr3: x <- 0.6.\nr4: y <- 0.2.",
        )
        .unwrap();
        for p in [prog1(), progchange(), tangled] {
            let loops = build_depgraph(&p)
                .all_loops(p.herbrand_base())
                .unwrap()
                .len();
            let trace = solve(&p, &SolveOptions::default()).unwrap();
            let adding = trace
                .iterations
                .iter()
                .filter(|it| !it.loops_added.is_empty())
                .count();
            assert!(
                adding <= loops,
                "{adding} formula-adding iterations for {loops} loops"
            );
            assert!(trace.answer_set().is_some());
        }
    }

    #[test]
    fn solves_longer_lukasiewicz_chains_exactly() {
        // a1 = 0.9 and each link loses 0.1; a self-supporting pair rides
        // along and must collapse to zero.
        let mut text = String::from("c1: a1 <- 0.9.\n");
        for k in 1..6 {
            text.push_str(&format!("c{}: a{} <- TL(a{k}, 0.9).\n", k + 1, k + 1));
        }
        text.push_str("p1: x <- TM(x, y).\np2: y <- TM(y, x).\n");
        let p = Program::parse_source(&text).unwrap();
        let trace = solve(&p, &SolveOptions::default()).unwrap();
        let answer = trace.answer_set().expect("chain program has an answer set");
        for k in 1..=6i64 {
            assert_eq!(answer.get(&Atom::new(format!("a{k}"))), tv(10 - k, 10));
        }
        assert!(answer.get(&Atom::new("x")).is_zero());
        assert!(answer.get(&Atom::new("y")).is_zero());

        // Capping the tail below its forced degree leaves nothing.
        let unsat = format!("{text}k: 0 <- TL(a6, 0.8).");
        let p2 = Program::parse_source(&unsat).unwrap();
        let trace2 = solve(&p2, &SolveOptions::default()).unwrap();
        assert_eq!(trace2.outcome, Outcome::NoAnswerSet);
    }

    #[test]
    fn maximal_loop_mode_solves_the_worked_programs() {
        let opts = SolveOptions {
            loop_mode: LoopMode::Maximal,
            ..SolveOptions::default()
        };
        let trace = solve(&progchange(), &opts).unwrap();
        assert_eq!(
            trace.answer_set(),
            Some(&Interpretation::from_pairs([
                ("a", tv(3, 10)),
                ("b", tv(3, 10))
            ]))
        );
        let trace1 = solve(&prog1(), &opts).unwrap();
        assert_eq!(
            trace1.answer_set(),
            Some(&Interpretation::from_pairs([("b", tv(4, 5))]))
        );
    }

    #[test]
    fn unsatisfiable_completions_mean_no_answer_set() {
        let p = Program::parse_source("r1: 0 <- b.\nr2: b <- 0.5.").unwrap();
        let trace = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(trace.outcome, Outcome::NoAnswerSet);
        assert!(crate::semantics::grid_answer_sets(&p, 2)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn grid_backend_handles_goedel_negation() {
        let p = Program::parse_source("r1: a <- 0.4.\nr2: b <- not_m a.").unwrap();
        let milp = solve(&p, &SolveOptions::default());
        assert!(matches!(&milp, Err(e) if e.is_fragment_violation()));
        let opts = SolveOptions {
            backend: Backend::Grid { denominator: 5 },
            ..SolveOptions::default()
        };
        let trace = solve(&p, &opts).unwrap();
        assert_eq!(
            trace.answer_set(),
            Some(&Interpretation::from_pairs([("a", tv(2, 5))]))
        );
    }

    #[test]
    fn accumulated_formulas_grow_and_candidates_never_repeat() {
        let trace = solve(&prog1(), &SolveOptions::default()).unwrap();
        let mut seen = Vec::new();
        for it in &trace.iterations {
            assert!(!seen.contains(&it.candidate), "candidate repeated");
            seen.push(it.candidate.clone());
            for l in &it.loops_added {
                assert!(l.atoms().iter().all(|a| it.support.contains(a)));
            }
        }
    }

    #[test]
    fn check_reports_the_fixpoint_story_for_prog1() {
        let p = prog1();
        let i1 = Interpretation::from_pairs([("b", tv(4, 5))]);
        let r = check(&p, &i1).unwrap();
        assert!(r.model && r.satisfies_completion && r.fixpoint_matches && r.answer_set);
        assert!(r.diff_support.is_empty());

        let i2 = Interpretation::from_pairs([("a", tv(1, 5)), ("b", tv(4, 5)), ("c", tv(1, 5))]);
        let r2 = check(&p, &i2).unwrap();
        assert!(r2.model && r2.satisfies_completion);
        assert!(!r2.fixpoint_matches && !r2.answer_set);
        assert_eq!(r2.diff_support, vec![Atom::new("a"), Atom::new("c")]);
        assert_eq!(r2.loops.len(), 1);
        assert!(r2.loops[0].violated);
        assert_eq!(r2.loops[0].formula, "max(a, c) <= 0");
    }

    #[test]
    fn trace_serializes_to_json() {
        let trace = solve(&progchange(), &SolveOptions::default()).unwrap();
        let json = serde_json::to_string(&trace).unwrap();
        assert!(json.contains("\"outcome\":\"answer_set\""));
        assert!(json.contains("\"iterations\""));
    }
}
