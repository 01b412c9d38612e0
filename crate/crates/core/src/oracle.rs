//! Exhaustive satisfiability for small formulas, used as ground truth.

use thiserror::Error;

use crate::cnf::{Clause, Cnf, PartialAssignment, Var};

pub const MAX_ORACLE_VARS: usize = 25;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("{found} occurring variables exceed the limit of {limit}")]
pub struct TooManyVariables {
    pub found: usize,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub satisfiable: bool,
    /// Total over `1..=num_vars`; unconstrained variables are 0.
    pub witness: Option<PartialAssignment>,
}

/// Backtracking search over the occurring variables, highest variable first,
/// trying 0 before 1. The first witness found is therefore the least one when
/// assignments are read as binary numbers with the lowest variable as the
/// least significant bit.
pub fn sat_brute(gamma: &Cnf) -> Result<OracleVerdict, TooManyVariables> {
    let vars: Vec<Var> = gamma.occurring_vars().into_iter().rev().collect();
    if vars.len() > MAX_ORACLE_VARS {
        return Err(TooManyVariables {
            found: vars.len(),
            limit: MAX_ORACLE_VARS,
        });
    }
    if gamma.has_empty_clause() {
        return Ok(OracleVerdict {
            satisfiable: false,
            witness: None,
        });
    }
    let depth_of = |v: Var| vars.iter().position(|&w| w == v).unwrap();
    // Clauses grouped by the depth at which their last variable is decided,
    // as (positive mask, negative mask) over depth bits.
    let mut due: Vec<Vec<(u32, u32)>> = vec![Vec::new(); vars.len()];
    for c in gamma.iter() {
        let (mut pos, mut neg, mut last) = (0u32, 0u32, 0);
        for l in c.iter() {
            let d = depth_of(l.var());
            last = last.max(d);
            if l.is_positive() {
                pos |= 1 << d;
            } else {
                neg |= 1 << d;
            }
        }
        due[last].push((pos, neg));
    }
    let ok_at = |depth: usize, bits: u32| {
        due[depth]
            .iter()
            .all(|&(pos, neg)| pos & bits != 0 || neg & !bits != 0)
    };
    let n = vars.len();
    let mut bits = 0u32;
    let mut depth = 0usize;
    let mut tried_one = vec![false; n];
    let found = 'search: loop {
        if depth == n {
            break 'search true;
        }
        if ok_at(depth, bits) {
            depth += 1;
            if depth < n {
                tried_one[depth] = false;
                bits &= !(1 << depth);
            }
            continue;
        }
        // Backtrack to the deepest level that can still flip to 1.
        loop {
            if !tried_one[depth] {
                tried_one[depth] = true;
                bits |= 1 << depth;
                break;
            }
            bits &= !(1 << depth);
            if depth == 0 {
                break 'search false;
            }
            depth -= 1;
        }
    };
    Ok(OracleVerdict {
        satisfiable: found,
        witness: found.then(|| total_witness(gamma, &vars, bits)),
    })
}

fn total_witness(gamma: &Cnf, vars: &[Var], bits: u32) -> PartialAssignment {
    let mut alpha = PartialAssignment::new();
    let top = vars
        .iter()
        .map(|v| v.index())
        .fold(gamma.num_vars(), u32::max);
    for v in 1..=top {
        alpha.set(Var::new(v), false);
    }
    for (d, &v) in vars.iter().enumerate() {
        alpha.set(v, bits & (1 << d) != 0);
    }
    alpha
}

pub fn is_satisfiable(gamma: &Cnf) -> Result<bool, TooManyVariables> {
    Ok(sat_brute(gamma)?.satisfiable)
}

/// Removing `c` and adding `c` both preserve satisfiability.
pub fn is_redundant(c: &Clause, gamma: &Cnf) -> Result<bool, TooManyVariables> {
    let mut without = gamma.clone();
    without.remove(c);
    let mut with = gamma.clone();
    with.insert(c.clone());
    let base = is_satisfiable(gamma)?;
    Ok(is_satisfiable(&without)? == base && is_satisfiable(&with)? == base)
}

/// Every total assignment satisfying `gamma` satisfies `c`.
pub fn implies(gamma: &Cnf, c: &Clause) -> Result<bool, TooManyVariables> {
    let mut g = gamma.clone();
    for l in c.iter() {
        g.insert(Clause::unit(!l));
    }
    Ok(!is_satisfiable(&g)?)
}
