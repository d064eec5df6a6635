//! Positive dependency graphs, strongly connected components, and loop
//! enumeration.
//!
//! The graph has an edge `(a, b)` whenever some rule with head `a` uses
//! `b` positively in its body; negated literals and constants induce no
//! edges. A loop is a nonempty atom set in which every ordered pair is
//! joined by a nontrivial path staying inside the set, so singletons need
//! a self-edge and larger sets must induce a strongly connected subgraph.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Atom, Program};

/// Default ceiling for exhaustive loop enumeration inside a support set.
pub const LOOP_SCOPE_GUARD: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop enumeration over {size} atoms exceeds the {limit}-atom guard; restrict the scope or use maximal loops")]
    ScopeGuard { size: usize, limit: usize },
}

/// A nonempty set of atoms pairwise connected by positive paths.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Loop(BTreeSet<Atom>);

impl Loop {
    pub fn new(atoms: BTreeSet<Atom>) -> Self {
        debug_assert!(!atoms.is_empty());
        Loop(atoms)
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }
}

impl fmt::Display for Loop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(Atom::as_str).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

impl<const N: usize> From<[&str; N]> for Loop {
    fn from(names: [&str; N]) -> Self {
        Loop::new(names.into_iter().map(Atom::new).collect())
    }
}

/// The positive dependency graph of a program.
#[derive(Debug, Clone)]
pub struct DepGraph {
    atoms: Vec<Atom>,
    index: BTreeMap<Atom, usize>,
    succ: Vec<BTreeSet<usize>>,
}

/// Builds the positive dependency graph over the program's Herbrand base.
pub fn build_depgraph(p: &Program) -> DepGraph {
    let atoms: Vec<Atom> = p.herbrand_base().iter().cloned().collect();
    let index: BTreeMap<Atom, usize> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i))
        .collect();
    let mut succ = vec![BTreeSet::new(); atoms.len()];
    for r in p.rules() {
        if let Some(head) = r.head.atom() {
            let h = index[head];
            for b in r.positive_body_atoms() {
                succ[h].insert(index[b]);
            }
        }
    }
    DepGraph { atoms, index, succ }
}

impl DepGraph {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn edge(&self, from: &Atom, to: &Atom) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&f), Some(&t)) => self.succ[f].contains(&t),
            _ => false,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Atom, &Atom)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(move |(f, ts)| ts.iter().map(move |&t| (&self.atoms[f], &self.atoms[t])))
    }

    fn scope_indices(&self, scope: &BTreeSet<Atom>) -> Vec<usize> {
        scope
            .iter()
            .filter_map(|a| self.index.get(a))
            .copied()
            .collect()
    }

    /// Strongly connected components of the subgraph induced by `scope`,
    /// as index sets in discovery order.
    fn sccs_within(&self, members: &[usize]) -> Vec<Vec<usize>> {
        let in_scope: BTreeSet<usize> = members.iter().copied().collect();
        // Iterative Tarjan over the induced subgraph.
        let mut order: BTreeMap<usize, usize> = BTreeMap::new();
        let mut low: BTreeMap<usize, usize> = BTreeMap::new();
        let mut on_stack: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = Vec::new();
        let mut next_order = 0usize;
        let mut components = Vec::new();

        for &root in members {
            if order.contains_key(&root) {
                continue;
            }
            let mut work: Vec<(usize, Vec<usize>)> = vec![(
                root,
                self.succ[root]
                    .iter()
                    .copied()
                    .filter(|t| in_scope.contains(t))
                    .collect(),
            )];
            order.insert(root, next_order);
            low.insert(root, next_order);
            next_order += 1;
            stack.push(root);
            on_stack.insert(root);

            while !work.is_empty() {
                let (v, next_target) = {
                    let top = work.last_mut().unwrap();
                    (top.0, top.1.pop())
                };
                match next_target {
                    Some(t) if !order.contains_key(&t) => {
                        order.insert(t, next_order);
                        low.insert(t, next_order);
                        next_order += 1;
                        stack.push(t);
                        on_stack.insert(t);
                        let succ: Vec<usize> = self.succ[t]
                            .iter()
                            .copied()
                            .filter(|x| in_scope.contains(x))
                            .collect();
                        work.push((t, succ));
                    }
                    Some(t) if on_stack.contains(&t) => {
                        let lv = low[&v].min(order[&t]);
                        low.insert(v, lv);
                    }
                    Some(_) => {}
                    None => {
                        work.pop();
                        if let Some((parent, _)) = work.last() {
                            let lv = low[parent].min(low[&v]);
                            low.insert(*parent, lv);
                        }
                        if low[&v] == order[&v] {
                            let mut comp = Vec::new();
                            while let Some(w) = stack.pop() {
                                on_stack.remove(&w);
                                comp.push(w);
                                if w == v {
                                    break;
                                }
                            }
                            components.push(comp);
                        }
                    }
                }
            }
        }
        components
    }

    /// The maximal loops inside `scope`: SCCs of the induced subgraph that
    /// actually contain a cycle (more than one atom, or a self-edge).
    /// Ordered by their smallest atom for reproducible output.
    pub fn maximal_loops(&self, scope: &BTreeSet<Atom>) -> Vec<Loop> {
        let members = self.scope_indices(scope);
        let mut loops: Vec<Loop> = self
            .sccs_within(&members)
            .into_iter()
            .filter(|c| c.len() > 1 || self.succ[c[0]].contains(&c[0]))
            .map(|c| Loop::new(c.into_iter().map(|i| self.atoms[i].clone()).collect()))
            .collect();
        loops.sort();
        loops
    }

    /// True when the induced subgraph on `members` is strongly connected
    /// and carries at least one edge (the loop condition).
    fn is_loop_indices(&self, members: &[usize]) -> bool {
        match members {
            [] => false,
            [v] => self.succ[*v].contains(v),
            _ => {
                let in_set: BTreeSet<usize> = members.iter().copied().collect();
                let reachable = |start: usize, backwards: bool| -> usize {
                    let mut seen: BTreeSet<usize> = [start].into();
                    let mut frontier = vec![start];
                    while let Some(v) = frontier.pop() {
                        for &w in &in_set {
                            if seen.contains(&w) {
                                continue;
                            }
                            let connected = if backwards {
                                self.succ[w].contains(&v)
                            } else {
                                self.succ[v].contains(&w)
                            };
                            if connected {
                                seen.insert(w);
                                frontier.push(w);
                            }
                        }
                    }
                    seen.len()
                };
                reachable(members[0], false) == members.len()
                    && reachable(members[0], true) == members.len()
            }
        }
    }

    /// Whether `atoms` forms a loop of the program.
    pub fn is_loop(&self, atoms: &BTreeSet<Atom>) -> bool {
        if atoms.len() != self.scope_indices(atoms).len() {
            return false;
        }
        self.is_loop_indices(&self.scope_indices(atoms))
    }

    /// Every subset of `scope` that is a loop, ascending by size then by
    /// atom order. Exhaustive, hence guarded.
    pub fn all_loops(&self, scope: &BTreeSet<Atom>) -> Result<Vec<Loop>, GraphError> {
        self.all_loops_guarded(scope, LOOP_SCOPE_GUARD)
    }

    pub fn all_loops_guarded(
        &self,
        scope: &BTreeSet<Atom>,
        limit: usize,
    ) -> Result<Vec<Loop>, GraphError> {
        let members = self.scope_indices(scope);
        if members.len() > limit {
            return Err(GraphError::ScopeGuard {
                size: members.len(),
                limit,
            });
        }
        let mut loops = Vec::new();
        for mask in 1u64..(1u64 << members.len()) {
            let subset: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            if self.is_loop_indices(&subset) {
                loops.push(Loop::new(
                    subset.into_iter().map(|i| self.atoms[i].clone()).collect(),
                ));
            }
        }
        loops.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(loops)
    }

    /// A program is loop-free iff all SCCs are singletons without
    /// self-edges.
    pub fn has_loops(&self) -> bool {
        let all: BTreeSet<Atom> = self.atoms.iter().cloned().collect();
        !self.maximal_loops(&all).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(src: &str) -> DepGraph {
        build_depgraph(&Program::parse_source(src).unwrap())
    }

    fn scope<const N: usize>(names: [&str; N]) -> BTreeSet<Atom> {
        names.into_iter().map(Atom::new).collect()
    }

    #[test]
    fn edges_follow_positive_body_atoms_only() {
        let g = graph(
            "r1: a <- TM(b, c).\nr2: b <- 0.8.\nr3: c <- TM(a, not_l b).\nr4: 0 <- TL(a, b).",
        );
        let mut edges: Vec<(String, String)> = g
            .edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        edges.sort();
        assert_eq!(
            edges,
            vec![
                ("a".to_string(), "b".to_string()),
                ("a".to_string(), "c".to_string()),
                ("c".to_string(), "a".to_string()),
            ]
        );
    }

    #[test]
    fn progchange_has_the_two_atom_cycle() {
        let g = graph("r1: a <- 0.3.\nr2: a <- b.\nr3: b <- a.");
        assert!(g.edge(&Atom::new("a"), &Atom::new("b")));
        assert!(g.edge(&Atom::new("b"), &Atom::new("a")));
        assert_eq!(g.edges().count(), 2);
    }

    #[test]
    fn fact_programs_have_no_edges() {
        let g = graph("r1: a <- 0.5.\nr2: b <- 1.");
        assert_eq!(g.edges().count(), 0);
        assert!(!g.has_loops());
    }

    #[test]
    fn maximal_loops_are_cyclic_sccs() {
        let g = graph(
            "r1: a <- TM(b, c).\nr2: b <- 0.8.\nr3: c <- TM(a, not_l b).\nr4: 0 <- TL(a, b).",
        );
        assert_eq!(
            g.maximal_loops(&scope(["a", "b", "c"])),
            vec![Loop::from(["a", "c"])]
        );
        // progmin: the self-loop {a} is maximal within {a, p}
        let gm = graph("r1: a <- a.\nr2: p <- TL(not_l p, not_l a).");
        assert_eq!(
            gm.maximal_loops(&scope(["a", "p"])),
            vec![Loop::from(["a"])]
        );
        // acyclic induced subgraph
        let ga = graph("r1: a <- b.\nr2: b <- 0.5.");
        assert!(ga.maximal_loops(&scope(["a", "b"])).is_empty());
    }

    #[test]
    fn all_loops_enumerates_subsets_by_size() {
        // A pair with self-edges and cross edges carries three loops.
        let g = graph("r1: x <- TM(x, y).\nr2: y <- TM(y, x).");
        let loops = g.all_loops(&scope(["x", "y"])).unwrap();
        assert_eq!(
            loops,
            vec![Loop::from(["x"]), Loop::from(["y"]), Loop::from(["x", "y"])]
        );
        // progchange: only the pair, no self-edges
        let gc = graph("r1: a <- 0.3.\nr2: a <- b.\nr3: b <- a.");
        assert_eq!(
            gc.all_loops(&scope(["a", "b"])).unwrap(),
            vec![Loop::from(["a", "b"])]
        );
        assert_eq!(gc.all_loops(&BTreeSet::new()).unwrap(), vec![]);
    }

    #[test]
    fn all_loops_respects_the_scope_guard() {
        let g = graph("r1: a <- b.\nr2: b <- a.");
        let err = g.all_loops_guarded(&scope(["a", "b"]), 1);
        assert!(matches!(
            err,
            Err(GraphError::ScopeGuard { size: 2, limit: 1 })
        ));
    }

    #[test]
    fn every_maximal_loop_is_found_by_all_loops() {
        let g = graph(
            "r1: a <- b.\nr2: b <- a.\nr3: c <- TM(c, a).\nr4: d <- 0.2.\nr5: a <- TM(d, c).",
        );
        let sc = scope(["a", "b", "c", "d"]);
        let all = g.all_loops(&sc).unwrap();
        for m in g.maximal_loops(&sc) {
            assert!(all.contains(&m), "maximal loop {m} missing from all_loops");
        }
        // loops are pairwise path-connected inside themselves
        for l in &all {
            assert!(g.is_loop(l.atoms()));
        }
    }

    #[test]
    fn fully_out_connected_sets_contain_a_maximal_loop() {
        // every vertex of {a, b, c} has an out-edge within the set
        let g = graph("r1: a <- b.\nr2: b <- c.\nr3: c <- a.");
        assert!(!g.maximal_loops(&scope(["a", "b", "c"])).is_empty());
    }
}
