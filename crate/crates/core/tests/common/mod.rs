#![allow(dead_code)]

use clausal_core::cnf::{Clause, Cnf, Literal, Var};
use clausal_core::proof::{Proof, ProofStep, SystemTag};
use clausal_core::redundancy::{is_blocked, is_rat};
use clausal_core::simulation::refute_resolution;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn lit(code: i32) -> Literal {
    Literal::from_dimacs(code).unwrap()
}

pub fn cl(codes: &[i32]) -> Clause {
    Clause::from_dimacs(codes)
}

/// A nontautological clause with `width` distinct variables from `1..=vars`.
pub fn random_clause(rng: &mut impl Rng, vars: u32, width: usize) -> Clause {
    let mut pool: Vec<u32> = (1..=vars).collect();
    pool.shuffle(rng);
    Clause::new(
        pool.into_iter()
            .take(width)
            .map(|v| Literal::new(Var::new(v), rng.gen())),
    )
    .unwrap()
}

pub fn random_cnf(rng: &mut impl Rng, vars: u32, clauses: usize, widths: (usize, usize)) -> Cnf {
    let mut cnf = Cnf::new(vars);
    for _ in 0..clauses {
        let w = rng.gen_range(widths.0..=widths.1).min(vars as usize);
        cnf.insert(random_clause(rng, vars, w));
    }
    cnf
}

/// A random clause drawn from the variables occurring in `gamma`.
pub fn clause_over(rng: &mut impl Rng, gamma: &Cnf, width: usize) -> Clause {
    let mut vars: Vec<Var> = gamma.occurring_vars().into_iter().collect();
    vars.shuffle(rng);
    Clause::new(
        vars.into_iter()
            .take(width)
            .map(|v| Literal::new(v, rng.gen())),
    )
    .unwrap()
}

/// An unsatisfiable CNF with a verified rat proof holding exactly one RAT
/// addition that is not already blocked and is used by the refutation, or
/// `None` if the draw failed.
pub fn single_rat_instance(rng: &mut impl Rng, vars: u32) -> Option<(Cnf, Proof)> {
    let m = rng.gen_range(4 * vars as usize..=6 * vars as usize);
    let gamma = random_cnf(rng, vars, m, (2, 3));
    for _ in 0..200 {
        let w = rng.gen_range(1..=3);
        let c = random_clause(rng, vars, w);
        if gamma.contains(&c) {
            continue;
        }
        let p = c.literals()[rng.gen_range(0..c.len())];
        if is_rat(&c, p, &gamma).unwrap() && !is_blocked(&c, p, &gamma).unwrap() {
            let mut with_c = gamma.clone();
            with_c.insert(c.clone());
            let refutation = refute_resolution(&with_c).ok()?;
            let added = gamma.len() + 1;
            let uses_c = refutation.steps.iter().any(|s| {
                matches!(s, ProofStep::Resolve { left, right, .. } if *left == added || *right == added)
            });
            if !uses_c {
                continue;
            }
            let mut steps = vec![ProofStep::AddRat {
                pivot: p,
                result: c,
            }];
            // Ids of `with_c` coincide with those of `gamma` plus the addition.
            steps.extend(refutation.steps);
            return Some((
                gamma,
                Proof {
                    system: SystemTag::Rat,
                    steps,
                },
            ));
        }
    }
    None
}

pub fn clause_strategy(vars: u32, max_len: usize) -> impl Strategy<Value = Clause> {
    prop::collection::vec((1..=vars, any::<bool>()), 0..=max_len)
        .prop_filter_map("tautological", |lits| {
            Clause::new(lits.into_iter().map(|(v, s)| Literal::new(Var::new(v), s))).ok()
        })
}

pub fn cnf_strategy(vars: u32, max_clauses: usize, max_len: usize) -> impl Strategy<Value = Cnf> {
    prop::collection::vec(clause_strategy(vars, max_len), 0..=max_clauses).prop_map(move |cs| {
        let mut cnf = Cnf::new(vars);
        for c in cs {
            cnf.insert(c);
        }
        cnf
    })
}

pub fn literal_strategy(vars: u32) -> impl Strategy<Value = Literal> {
    (1..=vars, any::<bool>()).prop_map(|(v, s)| Literal::new(Var::new(v), s))
}
