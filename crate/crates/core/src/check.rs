//! Step-by-step proof checking for each supported system.
//!
//! Systems are registered by name behind the [`ProofSystem`] trait; they differ
//! only in which step kinds they accept, what may precede the resolution phase,
//! and whether new variables are allowed.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cnf::{Clause, Cnf, Var};
use crate::proof::{ClauseId, Proof, ProofStep, SystemTag};
use crate::propagation::Propagator;
use crate::redundancy::{is_blocked, is_blocked_extension, is_rat_with, is_sbc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Verified,
    Rejected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "VERIFIED",
            Verdict::Rejected => "REJECTED",
        })
    }
}

/// Why a step was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum Rejection {
    #[error("clause id {0} does not refer to an earlier clause")]
    BadAntecedent(ClauseId),
    #[error("variable {0} does not clash between the antecedents")]
    PivotMissing(Var),
    #[error("the resolvent is tautological")]
    TautologicalResolvent,
    #[error("listed clause {listed} differs from the computed {computed}")]
    ResultMismatch { listed: Clause, computed: Clause },
    #[error("{0} is not a weakening of its antecedent")]
    NotWeakening(Clause),
    #[error("pivot does not occur in the added clause")]
    PivotNotInClause,
    #[error("witness is empty or not contained in the added clause")]
    BadWitness,
    #[error("{0} is not a blocked clause")]
    NotBlocked(Clause),
    #[error("{0} is not a RAT")]
    NotRat(Clause),
    #[error("{0} is not set-blocked")]
    NotSetBlocked(Clause),
    #[error("variable {0} is not allowed here")]
    NewVariable(Var),
    #[error("extension variable {0} is not fresh")]
    ExtensionReuse(Var),
    #[error("extension triple over {0} is tautological")]
    TautologicalExtension(Var),
    #[error("the Λ clauses are not a blocked extension")]
    NotBlockedExtension,
    #[error("`{0}` steps are not allowed in {1} proofs")]
    IllegalStep(char, SystemTag),
    #[error("`{0}` steps must precede all resolution steps")]
    PrefixOrder(char),
    #[error("the empty clause was not derived")]
    NoEmptyClause,
    #[error("proof declares system {found}, expected {expected}")]
    WrongSystem {
        found: SystemTag,
        expected: SystemTag,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    /// 1-based step index; 0 when the failure is not tied to a step.
    pub step: usize,
    pub reason: Rejection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub failure: Option<Failure>,
    pub size: usize,
}

impl CheckReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{} (size {})", self.verdict, self.size),
            Some(fail) if fail.step > 0 => {
                write!(f, "{} at step {}: {}", self.verdict, fail.step, fail.reason)
            }
            Some(fail) => write!(f, "{}: {}", self.verdict, fail.reason),
        }
    }
}

/// What may appear before the resolution phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefix {
    None,
    Extension,
    Lambda,
}

pub trait ProofSystem: Send + Sync {
    fn tag(&self) -> SystemTag;

    /// Step tags (see [`ProofStep::tag`]) accepted after the prefix.
    fn step_tags(&self) -> &'static [char];

    fn prefix(&self) -> Prefix {
        Prefix::None
    }

    /// Whether every variable must stay within the input's declared range.
    fn forbids_new_variables(&self) -> bool {
        true
    }

    fn check(&self, cnf: &Cnf, proof: &Proof) -> CheckReport {
        Checker::new(self, cnf, proof).run(true)
    }

    /// Like [`ProofSystem::check`] but without requiring the empty clause.
    fn check_derivation(&self, cnf: &Cnf, proof: &Proof) -> CheckReport {
        Checker::new(self, cnf, proof).run(false)
    }
}

struct Res;
struct Bc;
struct Rat;
struct Sbc;
struct Ger;
struct Er;

impl ProofSystem for Res {
    fn tag(&self) -> SystemTag {
        SystemTag::Res
    }
    fn step_tags(&self) -> &'static [char] {
        &['r', 'w']
    }
    fn forbids_new_variables(&self) -> bool {
        false
    }
}

impl ProofSystem for Bc {
    fn tag(&self) -> SystemTag {
        SystemTag::Bc
    }
    fn step_tags(&self) -> &'static [char] {
        &['r', 'w', 'b']
    }
}

impl ProofSystem for Rat {
    fn tag(&self) -> SystemTag {
        SystemTag::Rat
    }
    fn step_tags(&self) -> &'static [char] {
        &['r', 'w', 'b', 't']
    }
}

impl ProofSystem for Sbc {
    fn tag(&self) -> SystemTag {
        SystemTag::Sbc
    }
    fn step_tags(&self) -> &'static [char] {
        &['r', 'w', 'b', 's']
    }
}

impl ProofSystem for Ger {
    fn tag(&self) -> SystemTag {
        SystemTag::Ger
    }
    fn step_tags(&self) -> &'static [char] {
        &['r', 'w']
    }
    fn prefix(&self) -> Prefix {
        Prefix::Lambda
    }
}

impl ProofSystem for Er {
    fn tag(&self) -> SystemTag {
        SystemTag::Er
    }
    fn step_tags(&self) -> &'static [char] {
        &['r', 'w']
    }
    fn prefix(&self) -> Prefix {
        Prefix::Extension
    }
    fn forbids_new_variables(&self) -> bool {
        false
    }
}

/// Proof systems by name.
pub struct Registry {
    systems: BTreeMap<&'static str, Box<dyn ProofSystem>>,
}

impl Registry {
    pub fn empty() -> Registry {
        Registry {
            systems: BTreeMap::new(),
        }
    }

    pub fn standard() -> Registry {
        let mut r = Registry::empty();
        r.register(Box::new(Res));
        r.register(Box::new(Bc));
        r.register(Box::new(Rat));
        r.register(Box::new(Sbc));
        r.register(Box::new(Ger));
        r.register(Box::new(Er));
        r
    }

    pub fn register(&mut self, system: Box<dyn ProofSystem>) {
        self.systems.insert(system.tag().name(), system);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ProofSystem> {
        self.systems.get(name).map(|s| s.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.systems.keys().copied()
    }
}

/// Checks `proof` against `cnf` under the system named in its header.
pub fn check(cnf: &Cnf, proof: &Proof) -> CheckReport {
    let registry = Registry::standard();
    let system = registry
        .get(proof.system.name())
        .expect("every system tag is registered");
    system.check(cnf, proof)
}

/// Checks that every step of `proof` is valid; the empty clause is not required.
pub fn check_derivation(cnf: &Cnf, proof: &Proof) -> CheckReport {
    let registry = Registry::standard();
    let system = registry
        .get(proof.system.name())
        .expect("every system tag is registered");
    system.check_derivation(cnf, proof)
}

/// Checks `proof` under `expected`, rejecting a proof declaring another system.
pub fn check_as(cnf: &Cnf, proof: &Proof, expected: SystemTag) -> CheckReport {
    if proof.system != expected {
        return CheckReport {
            verdict: Verdict::Rejected,
            failure: Some(Failure {
                step: 0,
                reason: Rejection::WrongSystem {
                    found: proof.system,
                    expected,
                },
            }),
            size: proof.size(),
        };
    }
    check(cnf, proof)
}

struct Checker<'a, S: ?Sized> {
    system: &'a S,
    proof: &'a Proof,
    num_vars: u32,
    table: Vec<Clause>,
    current: Cnf,
    propagator: Option<Propagator>,
    extension_vars: HashSet<Var>,
}

type StepResult = Result<(), Rejection>;

impl<'a, S: ProofSystem + ?Sized> Checker<'a, S> {
    fn new(system: &'a S, cnf: &'a Cnf, proof: &'a Proof) -> Checker<'a, S> {
        let needs_propagator = proof.steps.iter().any(|s| s.tag() == 't');
        Checker {
            system,
            proof,
            num_vars: cnf.num_vars(),
            table: cnf.iter().cloned().collect(),
            current: cnf.clone(),
            propagator: needs_propagator.then(|| Propagator::from_cnf(cnf)),
            extension_vars: HashSet::new(),
        }
    }

    fn report(&self, failure: Option<Failure>) -> CheckReport {
        CheckReport {
            verdict: if failure.is_none() {
                Verdict::Verified
            } else {
                Verdict::Rejected
            },
            failure,
            size: self.proof.size(),
        }
    }

    fn run(mut self, require_empty: bool) -> CheckReport {
        let prefix = self.system.prefix();
        let mut in_prefix = true;
        let mut lambda = Vec::new();
        let mut lambda_end = 0;
        for (i, step) in self.proof.steps.iter().enumerate() {
            let tag = step.tag();
            let prefix_tag = match prefix {
                Prefix::None => None,
                Prefix::Extension => Some('e'),
                Prefix::Lambda => Some('x'),
            };
            let outcome = if Some(tag) == prefix_tag {
                if in_prefix {
                    match step {
                        ProofStep::LambdaMember { result } => {
                            lambda.push(result.clone());
                            lambda_end = i + 1;
                            self.check_vars(result)
                        }
                        ProofStep::Extend(_) => self.extension(step),
                        _ => unreachable!(),
                    }
                } else {
                    Err(Rejection::PrefixOrder(tag))
                }
            } else if self.system.step_tags().contains(&tag) {
                if in_prefix && prefix == Prefix::Lambda {
                    if let Err(reason) = self.close_lambda(&lambda) {
                        return self.report(Some(Failure {
                            step: lambda_end,
                            reason,
                        }));
                    }
                }
                in_prefix = false;
                self.step(step)
            } else {
                Err(Rejection::IllegalStep(tag, self.system.tag()))
            };
            if let Err(reason) = outcome {
                return self.report(Some(Failure {
                    step: i + 1,
                    reason,
                }));
            }
        }
        if in_prefix && prefix == Prefix::Lambda {
            if let Err(reason) = self.close_lambda(&lambda) {
                return self.report(Some(Failure {
                    step: lambda_end,
                    reason,
                }));
            }
        }
        if !require_empty || self.current.has_empty_clause() {
            self.report(None)
        } else {
            self.report(Some(Failure {
                step: 0,
                reason: Rejection::NoEmptyClause,
            }))
        }
    }

    fn check_vars(&self, c: &Clause) -> StepResult {
        if self.system.forbids_new_variables() {
            if let Some(v) = c.vars().find(|v| v.index() > self.num_vars) {
                return Err(Rejection::NewVariable(v));
            }
        }
        Ok(())
    }

    fn add(&mut self, c: Clause) {
        if let Some(p) = &mut self.propagator {
            if !self.current.contains(&c) {
                p.add_clause(&c);
            }
        }
        self.current.insert(c.clone());
        self.table.push(c);
    }

    fn lookup(&self, id: ClauseId) -> Result<&Clause, Rejection> {
        if id == 0 {
            return Err(Rejection::BadAntecedent(id));
        }
        self.table.get(id - 1).ok_or(Rejection::BadAntecedent(id))
    }

    fn close_lambda(&mut self, lambda: &[Clause]) -> StepResult {
        let base = self.current.clone();
        let lambda_cnf = Cnf::from_clauses(self.num_vars, lambda.iter().cloned())
            .map_err(|_| Rejection::NotBlockedExtension)?;
        if !is_blocked_extension(&base, &lambda_cnf) {
            return Err(Rejection::NotBlockedExtension);
        }
        for c in lambda {
            self.add(c.clone());
        }
        Ok(())
    }

    fn extension(&mut self, step: &ProofStep) -> StepResult {
        let ProofStep::Extend(ext) = step else {
            unreachable!()
        };
        let x = ext.var;
        if x.index() <= self.num_vars || self.extension_vars.contains(&x) {
            return Err(Rejection::ExtensionReuse(x));
        }
        for v in [ext.p.var(), ext.q.var()] {
            let earlier = v.index() <= self.num_vars || self.extension_vars.contains(&v);
            if !earlier {
                return Err(Rejection::NewVariable(v));
            }
        }
        let clauses = ext.clauses().ok_or(Rejection::TautologicalExtension(x))?;
        self.extension_vars.insert(x);
        for c in clauses {
            self.add(c);
        }
        Ok(())
    }

    fn step(&mut self, step: &ProofStep) -> StepResult {
        let result = step.result().expect("prefix steps are handled separately");
        self.check_vars(result)?;
        match step {
            ProofStep::Resolve {
                left, right, pivot, ..
            } => {
                let a = self.lookup(*left)?;
                let b = self.lookup(*right)?;
                let clashes = (a.contains(pivot.positive()) && b.contains(pivot.negative()))
                    || (a.contains(pivot.negative()) && b.contains(pivot.positive()));
                if !clashes {
                    return Err(Rejection::PivotMissing(*pivot));
                }
                let computed = a
                    .resolve(b, *pivot)
                    .map_err(|_| Rejection::TautologicalResolvent)?;
                if &computed != result {
                    return Err(Rejection::ResultMismatch {
                        listed: result.clone(),
                        computed,
                    });
                }
            }
            ProofStep::Weaken { source, .. } => {
                if !self.lookup(*source)?.is_subset(result) {
                    return Err(Rejection::NotWeakening(result.clone()));
                }
            }
            ProofStep::AddBc { pivot, .. } => {
                let ok = is_blocked(result, *pivot, &self.current)
                    .map_err(|_| Rejection::PivotNotInClause)?;
                if !ok {
                    return Err(Rejection::NotBlocked(result.clone()));
                }
            }
            ProofStep::AddRat { pivot, .. } => {
                let prop = self.propagator.as_mut().expect("propagator for rat steps");
                let ok = is_rat_with(result, *pivot, &self.current, prop)
                    .map_err(|_| Rejection::PivotNotInClause)?;
                if !ok {
                    return Err(Rejection::NotRat(result.clone()));
                }
            }
            ProofStep::AddSbc { witness, .. } => {
                let ok =
                    is_sbc(result, witness, &self.current).map_err(|_| Rejection::BadWitness)?;
                if !ok {
                    return Err(Rejection::NotSetBlocked(result.clone()));
                }
            }
            ProofStep::Extend(_) | ProofStep::LambdaMember { .. } => unreachable!(),
        }
        self.add(result.clone());
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HoistError {
    #[error("only bc proofs can be hoisted, found {0}")]
    WrongSystem(SystemTag),
    #[error("input proof is not verified: {0}")]
    InputNotVerified(String),
}

/// Moves every blocked clause addition to the front, keeping relative order,
/// and renumbers antecedent ids to match.
pub fn hoist_blocked_additions(cnf: &Cnf, proof: &Proof) -> Result<Proof, HoistError> {
    if proof.system != SystemTag::Bc {
        return Err(HoistError::WrongSystem(proof.system));
    }
    let report = check(cnf, proof);
    if !report.is_verified() {
        return Err(HoistError::InputNotVerified(report.to_string()));
    }
    let m = cnf.len();
    let (blocked, rest): (Vec<usize>, Vec<usize>) =
        (0..proof.steps.len()).partition(|&i| proof.steps[i].tag() == 'b');
    let mut new_id = vec![0; proof.steps.len()];
    for (pos, &i) in blocked.iter().chain(rest.iter()).enumerate() {
        new_id[i] = m + 1 + pos;
    }
    let remap = |id: ClauseId| if id <= m { id } else { new_id[id - m - 1] };
    let steps = blocked
        .iter()
        .chain(rest.iter())
        .map(|&i| match &proof.steps[i] {
            ProofStep::Resolve {
                left,
                right,
                pivot,
                result,
            } => ProofStep::Resolve {
                left: remap(*left),
                right: remap(*right),
                pivot: *pivot,
                result: result.clone(),
            },
            ProofStep::Weaken { source, result } => ProofStep::Weaken {
                source: remap(*source),
                result: result.clone(),
            },
            other => other.clone(),
        })
        .collect();
    Ok(Proof {
        system: SystemTag::Bc,
        steps,
    })
}
