//! Blocked, RAT and set-blocked clause checks, kernels, and blocked extensions.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, PartialAssignment};
use crate::proof::SbcWitness;
use crate::propagation::Propagator;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RedundancyError {
    #[error("pivot {pivot} does not occur in {clause}")]
    PivotNotInClause { pivot: Literal, clause: Clause },
    #[error("witness is not a subset of {clause}")]
    WitnessNotSubset { clause: Clause },
    #[error("witness is empty")]
    EmptyWitness,
}

fn require_pivot(c: &Clause, p: Literal) -> Result<(), RedundancyError> {
    if c.contains(p) {
        Ok(())
    } else {
        Err(RedundancyError::PivotNotInClause {
            pivot: p,
            clause: c.clone(),
        })
    }
}

/// Does `(c ∖ {p}) ∪ (d ∖ {¬p})` contain a complementary pair?
fn resolvent_is_tautology(c: &Clause, p: Literal, d: &Clause) -> bool {
    c.iter().any(|l| l != p && d.contains(!l))
}

/// `c` is blocked for `p` with respect to `gamma`.
pub fn is_blocked(c: &Clause, p: Literal, gamma: &Cnf) -> Result<bool, RedundancyError> {
    require_pivot(c, p)?;
    Ok(gamma
        .iter()
        .filter(|d| d.contains(!p))
        .all(|d| resolvent_is_tautology(c, p, d)))
}

/// Same predicate, decided by whether `¬(c ∖ {p})` satisfies the projection onto `¬p`.
pub fn is_blocked_by_projection(
    c: &Clause,
    p: Literal,
    gamma: &Cnf,
) -> Result<bool, RedundancyError> {
    require_pivot(c, p)?;
    let alpha = PartialAssignment::from_literals(c.without(p).negation())
        .expect("negation of a clause is consistent");
    Ok(alpha.satisfies_cnf(&gamma.project(!p)))
}

/// `c` is a resolution asymmetric tautology for `p` with respect to `gamma`.
pub fn is_rat(c: &Clause, p: Literal, gamma: &Cnf) -> Result<bool, RedundancyError> {
    let mut prop = Propagator::from_cnf(gamma);
    is_rat_with(c, p, gamma, &mut prop)
}

/// [`is_rat`] reusing a propagator that holds exactly the clauses of `gamma`.
pub fn is_rat_with(
    c: &Clause,
    p: Literal,
    gamma: &Cnf,
    prop: &mut Propagator,
) -> Result<bool, RedundancyError> {
    require_pivot(c, p)?;
    let rest = c.without(p);
    for d in gamma.iter().filter(|d| d.contains(!p)) {
        match rest.union(&d.without(!p)) {
            Err(_) => continue,
            Ok(u) => {
                if !prop.refutes_under(&u.negation()) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `c` is set-blocked for the witness `w` with respect to `gamma`.
pub fn is_sbc(c: &Clause, w: &SbcWitness, gamma: &Cnf) -> Result<bool, RedundancyError> {
    if w.is_empty() {
        return Err(RedundancyError::EmptyWitness);
    }
    if !w.literals().iter().all(|&l| c.contains(l)) {
        return Err(RedundancyError::WitnessNotSubset { clause: c.clone() });
    }
    let rest: Vec<Literal> = c.iter().filter(|&l| !w.contains(l)).collect();
    for d in gamma.iter() {
        let touches_negation = d.iter().any(|l| w.contains(!l));
        let touches_witness = d.iter().any(|l| w.contains(l));
        if !touches_negation || touches_witness {
            continue;
        }
        if !rest.iter().any(|&l| d.contains(!l)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of eliminating blocked clauses to fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelResult {
    pub kernel: Cnf,
    /// The maximal blocked sequence, in elimination order.
    pub elimination_order: Vec<Clause>,
    /// Pivot used for each eliminated clause.
    pub pivots: Vec<Literal>,
}

/// Working set for kernel computations with occurrence lists.
struct Eliminator<'a> {
    clauses: Vec<&'a Clause>,
    alive: Vec<bool>,
    occurs: HashMap<Literal, Vec<usize>>,
}

impl<'a> Eliminator<'a> {
    /// Clause indices follow canonical clause order.
    fn new(gamma: &'a Cnf) -> Eliminator<'a> {
        let clauses = gamma.canonical();
        let mut occurs: HashMap<Literal, Vec<usize>> = HashMap::new();
        for (i, c) in clauses.iter().enumerate() {
            for l in c.iter() {
                occurs.entry(l).or_default().push(i);
            }
        }
        Eliminator {
            alive: vec![true; clauses.len()],
            clauses,
            occurs,
        }
    }

    fn blocking_pivot(&self, i: usize) -> Option<Literal> {
        let c = self.clauses[i];
        c.iter().find(|&p| {
            self.occurs.get(&!p).is_none_or(|ds| {
                ds.iter()
                    .filter(|&&j| self.alive[j])
                    .all(|&j| resolvent_is_tautology(c, p, self.clauses[j]))
            })
        })
    }

    /// Clauses whose blocked status may change once clause `i` is gone.
    fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.clauses[i]
            .iter()
            .flat_map(move |l| self.occurs.get(&!l).into_iter().flatten().copied())
            .filter(move |&j| self.alive[j])
    }

    fn finish(self, gamma: &Cnf, order: Vec<(Clause, Literal)>) -> KernelResult {
        let mut kernel = gamma.clone();
        for (c, _) in &order {
            kernel.remove(c);
        }
        let (elimination_order, pivots) = order.into_iter().unzip();
        KernelResult {
            kernel,
            elimination_order,
            pivots,
        }
    }
}

/// Removes blocked clauses until none remain, always taking the first blocked
/// clause in canonical order.
pub fn kernel(gamma: &Cnf) -> KernelResult {
    let mut el = Eliminator::new(gamma);
    // Every live clause outside `pending` is known not to be blocked.
    let mut pending: BTreeSet<usize> = (0..el.clauses.len()).collect();
    let mut order = Vec::new();
    while let Some(i) = pending.pop_first() {
        if let Some(p) = el.blocking_pivot(i) {
            el.alive[i] = false;
            order.push((el.clauses[i].clone(), p));
            let touched: Vec<usize> = el.neighbours(i).collect();
            pending.extend(touched);
        }
    }
    el.finish(gamma, order)
}

/// Kernel computation where `choose(k)` picks which of the `k` currently
/// blocked clauses (in canonical order) to eliminate next.
pub fn kernel_with_choice(gamma: &Cnf, mut choose: impl FnMut(usize) -> usize) -> KernelResult {
    let mut el = Eliminator::new(gamma);
    let mut order = Vec::new();
    loop {
        let blocked: Vec<(usize, Literal)> = (0..el.clauses.len())
            .filter(|&i| el.alive[i])
            .filter_map(|i| el.blocking_pivot(i).map(|p| (i, p)))
            .collect();
        if blocked.is_empty() {
            break;
        }
        let (i, p) = blocked[choose(blocked.len()) % blocked.len()];
        el.alive[i] = false;
        order.push((el.clauses[i].clone(), p));
    }
    el.finish(gamma, order)
}

/// `ker(Γ ∪ Λ) = ker(Γ)` as clause sets.
pub fn is_blocked_extension(gamma: &Cnf, lambda: &Cnf) -> bool {
    let joined = gamma.union(lambda);
    kernel(&joined).kernel.same_clauses(&kernel(gamma).kernel)
}
