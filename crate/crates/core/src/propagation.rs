//! Unit propagation, the `⊢₁` judgments, and extraction of input resolution
//! derivations from unit refutations.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, PartialAssignment, Restricted, Var};
use crate::proof::{ProofStep, StepRecorder};

/// Propagation record: each unit with the index (in CNF order) of the clause
/// that forced it, and the falsified clause if propagation conflicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpTrace {
    pub units: Vec<(Literal, usize)>,
    pub conflict: Option<usize>,
}

impl UpTrace {
    pub fn is_conflict(&self) -> bool {
        self.conflict.is_some()
    }
}

/// Propagates `Γ` to fixpoint. Each round takes the first falsified clause
/// (conflict) or else the first unit clause in canonical clause order.
pub fn up_refutes(gamma: &Cnf) -> UpTrace {
    up_trace_under(gamma, &PartialAssignment::new())
}

fn up_trace_under(gamma: &Cnf, start: &PartialAssignment) -> UpTrace {
    let mut order: Vec<(usize, &Clause)> = gamma.iter().enumerate().collect();
    order.sort_by(|a, b| a.1.cmp(b.1));
    let mut alpha = start.clone();
    let mut units = Vec::new();
    loop {
        let mut forced = None;
        for &(idx, c) in &order {
            if alpha.satisfies(c) {
                continue;
            }
            let mut open = c.iter().filter(|&l| alpha.value(l).is_none());
            match (open.next(), open.next()) {
                (None, _) => {
                    return UpTrace {
                        units,
                        conflict: Some(idx),
                    }
                }
                (Some(l), None) if forced.is_none() => forced = Some((l, idx)),
                _ => {}
            }
        }
        match forced {
            Some((l, idx)) => {
                alpha.assign(l);
                units.push((l, idx));
            }
            None => {
                return UpTrace {
                    units,
                    conflict: None,
                }
            }
        }
    }
}

/// `Γ ⊢₁ L`: `Γ ∧ ¬L` propagates to a conflict. A tautological `L` holds at once.
pub fn up_derives(gamma: &Cnf, lits: &[Literal]) -> bool {
    Propagator::from_cnf(gamma).refutes_under(&negate(lits))
}

/// Reference implementation of [`up_derives`] on the traced propagator.
pub fn up_derives_traced(gamma: &Cnf, lits: &[Literal]) -> bool {
    match PartialAssignment::from_literals(negate(lits)) {
        Ok(alpha) => up_trace_under(gamma, &alpha).is_conflict(),
        Err(_) => true,
    }
}

fn negate(lits: &[Literal]) -> Vec<Literal> {
    lits.iter().map(|&l| !l).collect()
}

const UNASSIGNED: i8 = -1;

/// Two-watched-literal propagator over a growing clause database.
///
/// Queries assign a set of assumption literals, propagate, and undo everything
/// before returning, so the database can keep growing between queries.
#[derive(Debug, Clone, Default)]
pub struct Propagator {
    clauses: Vec<Vec<Literal>>,
    watches: Vec<Vec<usize>>,
    units: Vec<Literal>,
    has_empty: bool,
    values: Vec<i8>,
    trail: Vec<Literal>,
}

impl Propagator {
    pub fn new() -> Propagator {
        Propagator::default()
    }

    pub fn from_cnf(cnf: &Cnf) -> Propagator {
        let mut p = Propagator::new();
        p.reserve_vars(cnf.num_vars());
        for c in cnf.iter() {
            p.add_clause(c);
        }
        p
    }

    fn reserve_vars(&mut self, n: u32) {
        let n = n as usize;
        if self.values.len() < n + 1 {
            self.values.resize(n + 1, UNASSIGNED);
            self.watches.resize(2 * n, Vec::new());
        }
    }

    /// Adds a clause. Callers must not add the same clause twice if they care
    /// about memory; duplicates are harmless for correctness.
    pub fn add_clause(&mut self, c: &Clause) {
        if let Some(v) = c.max_var() {
            self.reserve_vars(v.index());
        }
        match c.len() {
            0 => self.has_empty = true,
            1 => self.units.push(c.literals()[0]),
            _ => {
                let idx = self.clauses.len();
                let lits = c.literals().to_vec();
                self.watches[lits[0].code()].push(idx);
                self.watches[lits[1].code()].push(idx);
                self.clauses.push(lits);
            }
        }
    }

    fn value(&self, l: Literal) -> i8 {
        match self.values.get(l.var().index() as usize) {
            Some(&v) if v != UNASSIGNED => (v == l.is_positive() as i8) as i8,
            _ => UNASSIGNED,
        }
    }

    /// Returns false on conflict.
    fn enqueue(&mut self, l: Literal) -> bool {
        match self.value(l) {
            1 => true,
            0 => false,
            _ => {
                let v = l.var().index();
                self.reserve_vars(v);
                self.values[v as usize] = l.is_positive() as i8;
                self.trail.push(l);
                true
            }
        }
    }

    /// Does the database together with the unit assumptions propagate to a conflict?
    pub fn refutes_under(&mut self, assumptions: &[Literal]) -> bool {
        let conflict = self.run(assumptions);
        for l in self.trail.drain(..) {
            self.values[l.var().index() as usize] = UNASSIGNED;
        }
        conflict
    }

    fn run(&mut self, assumptions: &[Literal]) -> bool {
        if self.has_empty {
            return true;
        }
        for &a in assumptions {
            if !self.enqueue(a) {
                return true;
            }
        }
        for i in 0..self.units.len() {
            let u = self.units[i];
            if !self.enqueue(u) {
                return true;
            }
        }
        let mut head = 0;
        while head < self.trail.len() {
            let falsified = !self.trail[head];
            head += 1;
            let mut watchers = std::mem::take(&mut self.watches[falsified.code()]);
            let mut keep = 0;
            let mut conflict = false;
            let mut i = 0;
            while i < watchers.len() {
                let ci = watchers[i];
                i += 1;
                if conflict {
                    watchers[keep] = ci;
                    keep += 1;
                    continue;
                }
                let clause = &mut self.clauses[ci];
                if clause[0] == falsified {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                let other_value = value_in(&self.values, other);
                if other_value == 1 {
                    watchers[keep] = ci;
                    keep += 1;
                    continue;
                }
                let replacement =
                    (2..clause.len()).find(|&k| value_in(&self.values, clause[k]) != 0);
                if let Some(k) = replacement {
                    clause.swap(1, k);
                    let new_watch = clause[1];
                    self.watches[new_watch.code()].push(ci);
                    continue;
                }
                watchers[keep] = ci;
                keep += 1;
                if other_value == 0 || !self.enqueue(other) {
                    conflict = true;
                }
            }
            watchers.truncate(keep);
            // New watches for `falsified` cannot have been added during the loop,
            // since the replacement literal is never false.
            self.watches[falsified.code()] = watchers;
            if conflict {
                return true;
            }
        }
        false
    }
}

fn value_in(values: &[i8], l: Literal) -> i8 {
    match values.get(l.var().index() as usize) {
        Some(&v) if v != UNASSIGNED => (v == l.is_positive() as i8) as i8,
        _ => UNASSIGNED,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropagationError {
    #[error("the clause is not derivable by unit propagation")]
    NotUpDerivable,
}

/// A resolution derivation appended to a CNF. Ids `1..=base_len` are the CNF's
/// clauses in order; step results continue from `base_len + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub base_len: usize,
    pub steps: Vec<ProofStep>,
}

impl Derivation {
    /// Number of CNFs in the sequence `(Γ₁, …, Γ_N)`.
    pub fn cnf_count(&self) -> usize {
        1 + self.steps.len()
    }

    pub fn final_clause(&self) -> Option<&Clause> {
        self.steps.last().and_then(|s| s.result())
    }
}

/// An input resolution chain: a clause of the CNF, optionally weakened, then
/// resolved in turn against further clauses of the CNF.
#[derive(Debug, Clone)]
struct Chain {
    base: Clause,
    weakened: Option<Clause>,
    links: Vec<(Clause, Var)>,
}

impl Chain {
    fn trivial(c: Clause) -> Chain {
        Chain {
            base: c,
            weakened: None,
            links: Vec::new(),
        }
    }

    fn result(&self) -> Clause {
        let mut cur = self.weakened.clone().unwrap_or_else(|| self.base.clone());
        for (side, v) in &self.links {
            cur = cur.resolve(side, *v).expect("chain link must resolve");
        }
        cur
    }
}

/// Derives `c` from `Γ` by input resolution, given `Γ ⊢₁ c`.
///
/// The derivation starts with at most one weakening, every later step resolves
/// against a clause of `Γ`, every derived clause is subsumed by `Γ ∪ {c}`, and
/// the number of CNFs is at most `|var(Γ) ∪ var(c)| + 1` (which is
/// `|var(Γ)| + 1` whenever `var(c) ⊆ var(Γ)`).
pub fn extract_input_resolution(gamma: &Cnf, c: &Clause) -> Result<Derivation, PropagationError> {
    if !up_derives(gamma, c.literals()) {
        return Err(PropagationError::NotUpDerivable);
    }
    let chain = build_chain(gamma, c);
    debug_assert_eq!(&chain.result(), c);
    let base: Vec<Clause> = gamma.iter().cloned().collect();
    let mut rec = StepRecorder::new(&base);
    if let Some(w) = &chain.weakened {
        if w != &chain.base {
            rec.weaken(&chain.base, w.clone());
        }
    }
    let mut cur = chain.weakened.clone().unwrap_or(chain.base.clone());
    for (side, v) in &chain.links {
        cur = rec.resolve_on(&cur, side, *v);
    }
    Ok(Derivation {
        base_len: gamma.len(),
        steps: rec.into_steps(),
    })
}

fn build_chain(gamma: &Cnf, c: &Clause) -> Chain {
    if gamma.contains(c) {
        return Chain::trivial(c.clone());
    }
    if gamma.has_empty_clause() {
        return Chain {
            base: Clause::empty(),
            weakened: Some(c.clone()),
            links: Vec::new(),
        };
    }
    // A unit {p} of Γ with p ∈ c: one weakening.
    if let Some(u) = gamma
        .canonical()
        .into_iter()
        .find(|u| u.len() == 1 && c.contains(u.literals()[0]))
    {
        return Chain {
            base: u.clone(),
            weakened: Some(c.clone()),
            links: Vec::new(),
        };
    }
    let occurring: BTreeSet<Var> = gamma.occurring_vars();
    let p = gamma
        .canonical()
        .into_iter()
        .find(|u| u.len() == 1)
        .map(|u| u.literals()[0])
        .or_else(|| c.iter().map(|l| !l).find(|l| occurring.contains(&l.var())))
        .expect("a propagating unit exists whenever Γ ⊢₁ c and ⊥ ∉ Γ");
    let alpha = PartialAssignment::from_literals([p]).unwrap();
    let restricted = gamma.restrict(&alpha);
    let c_restricted = match c.restrict(&alpha) {
        Restricted::Clause(r) => r,
        Restricted::Satisfied => unreachable!("p ∈ c is handled by the weakening case"),
    };
    let sub = build_chain(&restricted, &c_restricted);
    lift_chain(gamma, c, p, sub)
}

fn lift_leaf(gamma: &Cnf, d: &Clause, p: Literal) -> Clause {
    if gamma.contains(d) {
        d.clone()
    } else {
        let lifted = d.with(!p).expect("leaf cannot mention var(p)");
        debug_assert!(gamma.contains(&lifted));
        lifted
    }
}

fn lift_chain(gamma: &Cnf, c: &Clause, p: Literal, sub: Chain) -> Chain {
    let base = lift_leaf(gamma, &sub.base, p);
    let changed = base != sub.base;
    let mut weakened = sub
        .weakened
        .map(|w| if changed { w.with(!p).unwrap() } else { w });
    let links: Vec<(Clause, Var)> = sub
        .links
        .iter()
        .map(|(side, v)| (lift_leaf(gamma, side, p), *v))
        .collect();
    if c.contains(!p) {
        // c|α = c ∖ {¬p}: put ¬p into the first clause so every node carries it.
        match &mut weakened {
            Some(w) => *w = w.with(!p).unwrap(),
            None if !base.contains(!p) => weakened = Some(base.with(!p).unwrap()),
            None => {}
        }
        return Chain {
            base,
            weakened,
            links,
        };
    }
    let mut lifted = Chain {
        base,
        weakened,
        links,
    };
    if &lifted.result() != c {
        // The result is c ∨ ¬p, and {p} ∈ Γ.
        debug_assert!(gamma.contains(&Clause::unit(p)));
        lifted.links.push((Clause::unit(p), p.var()));
    }
    lifted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::clause_table;

    fn cl(codes: &[i32]) -> Clause {
        Clause::from_dimacs(codes)
    }

    fn cnf(clauses: &[&[i32]]) -> Cnf {
        clauses.iter().map(|c| cl(c)).collect()
    }

    fn lits(codes: &[i32]) -> Vec<Literal> {
        codes
            .iter()
            .map(|&c| Literal::from_dimacs(c).unwrap())
            .collect()
    }

    #[test]
    fn refutation_examples() {
        assert!(up_refutes(&cnf(&[&[1], &[-1]])).is_conflict());
        // x = 1, y = 2
        let t = up_refutes(&cnf(&[&[1], &[-1, 2], &[-2]]));
        assert!(t.is_conflict());
        assert_eq!(t.units.len(), 2);
        assert!(!up_refutes(&cnf(&[&[1, 2]])).is_conflict());
    }

    #[test]
    fn derives_examples() {
        let g = cnf(&[&[1], &[-1, 2]]);
        assert!(up_derives(&g, &lits(&[2])));
        assert!(up_derives(&g, &lits(&[-1, 2])));
        assert!(up_derives(&cnf(&[&[3, 4]]), &lits(&[5, -5])));
        assert!(!up_derives(&cnf(&[&[1, 2]]), &lits(&[1])));
    }

    #[test]
    fn propagator_grows_between_queries() {
        let mut p = Propagator::new();
        p.add_clause(&cl(&[1, 2, 3]));
        assert!(!p.refutes_under(&lits(&[-1, -2])));
        assert!(p.refutes_under(&lits(&[-1, -2, -3])));
        p.add_clause(&cl(&[-3]));
        assert!(p.refutes_under(&lits(&[-1, -2])));
        assert!(!p.refutes_under(&lits(&[-1])));
    }

    fn replay_ok(gamma: &Cnf, d: &Derivation, c: &Clause) {
        let table = clause_table(gamma, &d.steps).unwrap();
        assert_eq!(table.last().unwrap(), c);
    }

    #[test]
    fn extraction_base_case() {
        let g = cnf(&[&[1], &[-1]]);
        let d = extract_input_resolution(&g, &Clause::empty()).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert!(matches!(d.steps[0], ProofStep::Resolve { .. }));
        replay_ok(&g, &d, &Clause::empty());
    }

    #[test]
    fn extraction_single_weakening() {
        let g = cnf(&[&[1]]);
        let d = extract_input_resolution(&g, &cl(&[1, 2])).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert!(matches!(d.steps[0], ProofStep::Weaken { .. }));
    }

    #[test]
    fn extraction_chain_within_bound() {
        // x = 1, y = 2, z = 3
        let g = cnf(&[&[1], &[-1, 2], &[-2, 3]]);
        let d = extract_input_resolution(&g, &cl(&[3])).unwrap();
        assert!(d.cnf_count() <= 4);
        replay_ok(&g, &d, &cl(&[3]));
    }

    #[test]
    fn extraction_rejects_non_derivable() {
        assert_eq!(
            extract_input_resolution(&cnf(&[&[1, 2]]), &cl(&[1])),
            Err(PropagationError::NotUpDerivable)
        );
    }

    #[test]
    fn extraction_with_foreign_variable_needs_weakening_first() {
        let g = cnf(&[&[1], &[-1]]);
        let d = extract_input_resolution(&g, &cl(&[2])).unwrap();
        assert!(matches!(d.steps[0], ProofStep::Weaken { .. }));
        assert!(d.cnf_count() <= 3);
        replay_ok(&g, &d, &cl(&[2]));
    }
}
