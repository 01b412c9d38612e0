//! Replacing RAT additions by blocked clause additions and resolution, and
//! restricting RAT proofs of `H(Γ)` back to `Γ`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::builders::PairAllocation;
use crate::check::check;
use crate::cnf::{Clause, Cnf, Literal, PartialAssignment, Restricted, Var};
use crate::oracle::{is_satisfiable, TooManyVariables};
use crate::proof::{clause_table, Proof, ProofStep, StepRecorder, SystemTag};
use crate::propagation::{extract_input_resolution, PropagationError};
use crate::redundancy::{is_rat, RedundancyError};

pub const MAX_COVER_VARS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimulationError {
    #[error(transparent)]
    Pivot(#[from] RedundancyError),
    #[error("{clause} is not a RAT for {pivot}")]
    NotARat { clause: Clause, pivot: Literal },
    #[error("{found} variables exceed the limit of {limit}")]
    TooManyVariables { found: usize, limit: usize },
    #[error("the input is satisfiable")]
    SatisfiableInput,
    #[error("input proof is not verified: {0}")]
    InputNotVerified(String),
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<SimulationError>,
    },
    #[error("step {0} falls outside the restriction cases")]
    UnsupportedStep(usize),
    #[error(transparent)]
    Extraction(#[from] PropagationError),
}

impl From<TooManyVariables> for SimulationError {
    fn from(e: TooManyVariables) -> Self {
        SimulationError::TooManyVariables {
            found: e.found,
            limit: e.limit,
        }
    }
}

/// `{D ∖ C : D ∈ proj_{¬p}(Γ), (C ∖ {p}) ∪ D nontautological}`.
pub fn nonblocking_cnf(c: &Clause, p: Literal, gamma: &Cnf) -> Result<Cnf, SimulationError> {
    if !c.contains(p) {
        return Err(RedundancyError::PivotNotInClause {
            pivot: p,
            clause: c.clone(),
        }
        .into());
    }
    let rest = c.without(p);
    let mut out = Cnf::new(gamma.num_vars());
    for d in gamma.project(!p).iter() {
        if rest.union(d).is_ok() {
            out.insert(d.difference(c));
        }
    }
    Ok(out)
}

/// `μ(Γ)`: the clauses `E` such that `¬E` minimally satisfies `Γ`, in canonical order.
pub fn minimal_cover(gamma: &Cnf) -> Result<Cnf, SimulationError> {
    let found = gamma.occurring_vars().len();
    if found > MAX_COVER_VARS {
        return Err(SimulationError::TooManyVariables {
            found,
            limit: MAX_COVER_VARS,
        });
    }
    let clauses: Vec<&Clause> = gamma.canonical();
    let mut hits = BTreeSet::new();
    let mut chosen = Vec::new();
    hitting_sets(&clauses, &mut chosen, &mut hits);
    let mut out = Cnf::new(gamma.num_vars());
    for alpha in hits {
        if is_minimal(&clauses, &alpha) {
            out.insert(Clause::new(alpha.iter().map(|&l| !l)).unwrap());
        }
    }
    let mut sorted: Vec<Clause> = out.iter().cloned().collect();
    sorted.sort();
    Ok(Cnf::from_clauses(gamma.num_vars(), sorted).unwrap())
}

/// Every consistent literal set reached by repeatedly hitting the first
/// unsatisfied clause; all minimal satisfying assignments are among them.
fn hitting_sets(clauses: &[&Clause], chosen: &mut Vec<Literal>, out: &mut BTreeSet<Vec<Literal>>) {
    let open = clauses
        .iter()
        .find(|c| !c.iter().any(|l| chosen.contains(&l)));
    match open {
        None => {
            let mut set = chosen.clone();
            set.sort();
            out.insert(set);
        }
        Some(c) => {
            for l in c.iter() {
                if !chosen.contains(&!l) {
                    chosen.push(l);
                    hitting_sets(clauses, chosen, out);
                    chosen.pop();
                }
            }
        }
    }
}

fn is_minimal(clauses: &[&Clause], alpha: &[Literal]) -> bool {
    alpha.iter().all(|&drop| {
        clauses
            .iter()
            .any(|c| c.contains(drop) && !c.iter().any(|l| l != drop && alpha.contains(&l)))
    })
}

/// Saturation refutation without weakening, trimmed to the steps the empty
/// clause depends on. Clauses are processed shortest first.
pub fn refute_resolution(gamma: &Cnf) -> Result<Proof, SimulationError> {
    let mut rec = StepRecorder::new(gamma.iter());
    if gamma.has_empty_clause() {
        return Ok(rec.finish(SystemTag::Res));
    }
    let mut parents: HashMap<Clause, Option<(Clause, Clause, Var)>> =
        gamma.iter().map(|c| (c.clone(), None)).collect();
    let mut queue: BinaryHeap<Reverse<(usize, Clause)>> = gamma
        .iter()
        .map(|c| Reverse((c.len(), c.clone())))
        .collect();
    let mut processed: Vec<Clause> = Vec::new();
    let mut refuted = false;
    'saturate: while let Some(Reverse((_, given))) = queue.pop() {
        if processed.iter().any(|p| p.subsumes(&given)) {
            continue;
        }
        for other in &processed {
            let clash: Vec<Var> = given
                .iter()
                .filter(|&l| other.contains(!l))
                .map(|l| l.var())
                .collect();
            if clash.len() != 1 {
                continue;
            }
            let r = given.resolve(other, clash[0]).unwrap();
            if parents.contains_key(&r) {
                continue;
            }
            parents.insert(r.clone(), Some((given.clone(), other.clone(), clash[0])));
            if r.is_empty() {
                refuted = true;
                break 'saturate;
            }
            queue.push(Reverse((r.len(), r)));
        }
        processed.push(given);
    }
    if !refuted {
        return Err(SimulationError::SatisfiableInput);
    }
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    collect_needed(&Clause::empty(), &parents, &mut seen, &mut order);
    for c in order {
        let (a, b, v) = parents[&c].clone().unwrap();
        rec.resolve_on(&a, &b, v);
    }
    Ok(rec.finish(SystemTag::Res))
}

fn collect_needed(
    c: &Clause,
    parents: &HashMap<Clause, Option<(Clause, Clause, Var)>>,
    seen: &mut BTreeSet<Clause>,
    order: &mut Vec<Clause>,
) {
    // Iterative post-order to survive long derivations.
    let mut stack = vec![(c.clone(), false)];
    while let Some((cur, expanded)) = stack.pop() {
        if seen.contains(&cur) {
            continue;
        }
        match &parents[&cur] {
            None => {
                seen.insert(cur);
            }
            Some((a, b, _)) if !expanded => {
                stack.push((cur.clone(), true));
                stack.push((b.clone(), false));
                stack.push((a.clone(), false));
            }
            Some(_) => {
                seen.insert(cur.clone());
                order.push(cur);
            }
        }
    }
}

/// Sizes behind one RAT-to-BC replacement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    pub sigma_size: usize,
    pub mu_size: usize,
    /// CNF count of the refutation we built; it stands in for the minimum.
    pub refutation_size: usize,
    /// Occurring variables of `Γ`.
    pub n: usize,
    pub bound: usize,
    /// CNF count of the emitted derivation.
    pub actual: usize,
}

impl SimulationReport {
    pub fn within_bound(&self) -> bool {
        self.actual <= self.bound
    }
}

/// A bc derivation from `Γ` ending with `c`.
#[derive(Debug, Clone)]
pub struct Simulated {
    /// Steps with ids relative to `Γ` in its clause order.
    pub steps: Vec<ProofStep>,
    pub report: SimulationReport,
}

/// Derives the RAT `c` (for `p`) from `Γ` with resolution, weakening and
/// blocked clause additions only.
pub fn simulate_rat_step(
    c: &Clause,
    p: Literal,
    gamma: &Cnf,
) -> Result<Simulated, SimulationError> {
    if !is_rat(c, p, gamma)? {
        return Err(SimulationError::NotARat {
            clause: c.clone(),
            pivot: p,
        });
    }
    let sigma = nonblocking_cnf(c, p, gamma)?;
    let n = gamma.occurring_vars().len();
    let base: Vec<Clause> = gamma.iter().cloned().collect();
    let mut rec = StepRecorder::new(base.iter());
    if gamma.contains(c) {
        return Ok(Simulated {
            steps: Vec::new(),
            report: SimulationReport {
                sigma_size: sigma.len(),
                mu_size: 0,
                refutation_size: 1,
                n,
                bound: sigma.len() * (n + 1) + 1,
                actual: 1,
            },
        });
    }

    for d in sigma.iter() {
        let target = c.union(d).expect("Σ shares no variable with c");
        if rec.contains(&target) {
            continue;
        }
        let derivation = extract_input_resolution(gamma, &target)?;
        rec.replay(&base, &derivation.steps);
    }

    let (mu, refuted) = if is_satisfiable(&sigma)? {
        let mu = minimal_cover(&sigma)?;
        for e in mu.iter() {
            let added = c.union(e).expect("μ(Σ) shares no variable with c");
            if !rec.contains(&added) {
                rec.push(ProofStep::AddBc {
                    pivot: p,
                    result: added,
                });
            }
        }
        let joined = sigma.union(&mu);
        (mu.len(), joined)
    } else {
        (0, sigma.clone())
    };

    let refutation = refute_resolution(&refuted)?;
    let inputs: Vec<Clause> = refuted.iter().cloned().collect();
    let table = clause_table(&refuted, &refutation.steps).expect("refutation ids are valid");
    let lift = |d: &Clause| c.union(d).expect("refutation clauses avoid var(c)");
    for step in &refutation.steps {
        if let ProofStep::Resolve {
            left, right, pivot, ..
        } = step
        {
            let a = lift(&table[left - 1]);
            let b = lift(&table[right - 1]);
            rec.resolve_on(&a, &b, *pivot);
        }
    }
    debug_assert!(inputs.iter().all(|d| rec.contains(&lift(d))));

    let steps = rec.into_steps();
    let refutation_size = refutation.size();
    let report = SimulationReport {
        sigma_size: sigma.len(),
        mu_size: mu,
        refutation_size,
        n,
        bound: sigma.len() * (n + 1) + mu + refutation_size,
        actual: 1 + steps.len(),
    };
    Ok(Simulated { steps, report })
}

/// Replaces every RAT addition of a verified rat proof by its simulation.
pub fn translate_rat_to_bc(
    cnf: &Cnf,
    proof: &Proof,
) -> Result<(Proof, Vec<SimulationReport>), SimulationError> {
    let report = check(cnf, proof);
    if proof.system != SystemTag::Rat || !report.is_verified() {
        return Err(SimulationError::InputNotVerified(report.to_string()));
    }
    let old_table = clause_table(cnf, &proof.steps).expect("verified proof has valid ids");
    let mut rec = StepRecorder::new(cnf.iter());
    let mut current = cnf.clone();
    let mut reports = Vec::new();
    let m = cnf.len();
    for (i, step) in proof.steps.iter().enumerate() {
        let old = |id: usize| &old_table[id - 1];
        match step {
            ProofStep::AddRat { pivot, result } => {
                let sim = simulate_rat_step(result, *pivot, &current).map_err(|e| {
                    SimulationError::AtStep {
                        step: i + 1,
                        source: Box::new(e),
                    }
                })?;
                let base: Vec<Clause> = current.iter().cloned().collect();
                rec.replay(&base, &sim.steps);
                for s in &sim.steps {
                    current.insert(s.result().unwrap().clone());
                }
                reports.push(sim.report);
            }
            ProofStep::Resolve {
                left,
                right,
                pivot,
                result,
            } => {
                let emitted = ProofStep::Resolve {
                    left: rec.id_of(old(*left)).unwrap(),
                    right: rec.id_of(old(*right)).unwrap(),
                    pivot: *pivot,
                    result: result.clone(),
                };
                rec.push(emitted);
            }
            ProofStep::Weaken { source, result } => {
                let emitted = ProofStep::Weaken {
                    source: rec.id_of(old(*source)).unwrap(),
                    result: result.clone(),
                };
                rec.push(emitted);
            }
            other => rec.push(other.clone()),
        }
        let derived = &old_table[m + i];
        current.insert(derived.clone());
        debug_assert!(rec.contains(derived));
    }
    let out = rec.finish(SystemTag::Bc);
    let report = check(cnf, &out);
    if !report.is_verified() {
        return Err(SimulationError::InputNotVerified(format!(
            "translated proof failed: {report}"
        )));
    }
    Ok((out, reports))
}

/// Restricts a verified res proof under `alpha`, repairing steps whose pivot
/// is assigned with weakenings. The output refutes `cnf|α`.
pub fn restrict_res_proof(
    cnf: &Cnf,
    proof: &Proof,
    alpha: &PartialAssignment,
) -> Result<(Cnf, Proof), SimulationError> {
    let report = check(cnf, proof);
    if proof.system != SystemTag::Res || !report.is_verified() {
        return Err(SimulationError::InputNotVerified(report.to_string()));
    }
    let restricted = cnf.restrict(alpha);
    let mut r = Restrictor::new(cnf, &restricted, proof, alpha);
    for i in 0..proof.steps.len() {
        r.step(i, None)?;
    }
    Ok((restricted, r.rec.finish(SystemTag::Res)))
}

/// Maps a rat proof of `H(Γ)` to a rat proof of `Γ` by setting every pair
/// variable to 1.
pub fn restrict_h_rat_proof(
    gamma: &Cnf,
    pairs: &PairAllocation,
    proof: &Proof,
) -> Result<Proof, SimulationError> {
    let h = pairs.apply(gamma);
    let report = check(&h, proof);
    if proof.system != SystemTag::Rat || !report.is_verified() {
        return Err(SimulationError::InputNotVerified(report.to_string()));
    }
    let mut alpha = PartialAssignment::new();
    for &(x, y) in &pairs.pairs {
        alpha.set(Var::new(x), true);
        alpha.set(Var::new(y), true);
    }
    debug_assert!(h.restrict(&alpha).same_clauses(gamma));
    let mut r = Restrictor::new(&h, gamma, proof, &alpha);
    for i in 0..proof.steps.len() {
        r.step(i, Some(pairs))?;
    }
    Ok(r.rec.finish(SystemTag::Rat))
}

struct Restrictor<'a> {
    old_table: Vec<Clause>,
    m: usize,
    proof: &'a Proof,
    alpha: &'a PartialAssignment,
    rec: StepRecorder,
    current: Cnf,
}

impl<'a> Restrictor<'a> {
    fn new(
        original: &Cnf,
        restricted: &Cnf,
        proof: &'a Proof,
        alpha: &'a PartialAssignment,
    ) -> Restrictor<'a> {
        Restrictor {
            old_table: clause_table(original, &proof.steps).expect("verified proof has valid ids"),
            m: original.len(),
            proof,
            alpha,
            rec: StepRecorder::new(restricted.iter()),
            current: restricted.clone(),
        }
    }

    fn restrict(&self, c: &Clause) -> Option<Clause> {
        match c.restrict(self.alpha) {
            Restricted::Satisfied => None,
            Restricted::Clause(r) => Some(r),
        }
    }

    fn old(&self, id: usize) -> &Clause {
        &self.old_table[id - 1]
    }

    fn emit(&mut self, step: ProofStep) {
        self.current.insert(step.result().unwrap().clone());
        self.rec.push(step);
    }

    fn weaken_to(&mut self, source: &Clause, target: Clause) {
        if source != &target {
            let id = self
                .rec
                .id_of(source)
                .expect("restricted antecedent is present");
            self.emit(ProofStep::Weaken {
                source: id,
                result: target,
            });
        }
    }

    /// `pairs` is set for rat proofs of `H(Γ)`; RAT steps whose pivot is
    /// falsified are then expanded into input resolution.
    fn step(&mut self, i: usize, pairs: Option<&PairAllocation>) -> Result<(), SimulationError> {
        let derived = self.old_table[self.m + i].clone();
        let Some(target) = self.restrict(&derived) else {
            return Ok(());
        };
        match &self.proof.steps[i] {
            ProofStep::Resolve {
                left, right, pivot, ..
            } => {
                let a = self.old(*left).clone();
                let b = self.old(*right).clone();
                if self.alpha.value(pivot.positive()).is_some() {
                    // The premise whose pivot literal is falsified survives.
                    let keep = if self.alpha.satisfies(&a) { &b } else { &a };
                    let kept = self
                        .restrict(keep)
                        .ok_or(SimulationError::UnsupportedStep(i + 1))?;
                    self.weaken_to(&kept, target);
                } else {
                    let ra = self.restrict(&a);
                    let rb = self.restrict(&b);
                    let (Some(ra), Some(rb)) = (ra, rb) else {
                        return Err(SimulationError::UnsupportedStep(i + 1));
                    };
                    let step = ProofStep::Resolve {
                        left: self.rec.id_of(&ra).unwrap(),
                        right: self.rec.id_of(&rb).unwrap(),
                        pivot: *pivot,
                        result: target,
                    };
                    self.emit(step);
                }
            }
            ProofStep::Weaken { source, .. } => {
                let src = self
                    .restrict(&self.old(*source).clone())
                    .ok_or(SimulationError::UnsupportedStep(i + 1))?;
                self.weaken_to(&src, target);
            }
            ProofStep::AddBc { pivot, .. } | ProofStep::AddRat { pivot, .. } => {
                let falsified = self.alpha.value(*pivot) == Some(false);
                if falsified {
                    if self.current.contains(&target) {
                        return Ok(());
                    }
                    if pairs.is_none() {
                        return Err(SimulationError::UnsupportedStep(i + 1));
                    }
                    let derivation = extract_input_resolution(&self.current, &target)?;
                    let base: Vec<Clause> = self.current.iter().cloned().collect();
                    for s in &derivation.steps {
                        self.current.insert(s.result().unwrap().clone());
                    }
                    self.rec.replay(&base, &derivation.steps);
                } else {
                    let step = match &self.proof.steps[i] {
                        ProofStep::AddBc { .. } => ProofStep::AddBc {
                            pivot: *pivot,
                            result: target,
                        },
                        _ => ProofStep::AddRat {
                            pivot: *pivot,
                            result: target,
                        },
                    };
                    self.emit(step);
                }
            }
            _ => return Err(SimulationError::UnsupportedStep(i + 1)),
        }
        Ok(())
    }
}
