//! Formula families, an extended resolution proof of the pigeonhole principle,
//! the `G` and `H` transformations, and proof builders over them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::check;
use crate::cnf::{Clause, Cnf, Literal, Var};
use crate::proof::{ErProof, Extension, Proof, ProofStep, SbcWitness, StepRecorder, SystemTag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("n must be at least 1")]
    ZeroHoles,
    #[error("n = {0} is not a power of two greater than 1")]
    NotPowerOfTwo(usize),
    #[error("the er proof does not verify: {0}")]
    ErNotVerified(String),
    #[error("pair allocation does not match the er proof")]
    PairMismatch,
}

/// Variable of `p_{i,k}` (pigeon `i ∈ [n+1]`, hole `k ∈ [n]`), numbered row by row.
pub fn php_var(n: usize, i: usize, k: usize) -> Var {
    Var::new(((i - 1) * n + k) as u32)
}

/// Pigeon axioms `P_1, …, P_{n+1}`, then the hole axioms grouped by hole, each
/// unordered pair of pigeons once.
pub fn gen_php(n: usize) -> Result<Cnf, BuildError> {
    if n == 0 {
        return Err(BuildError::ZeroHoles);
    }
    let p = |i, k| php_var(n, i, k);
    let mut cnf = Cnf::new((n * (n + 1)) as u32);
    for i in 1..=n + 1 {
        cnf.insert(Clause::new((1..=n).map(|k| p(i, k).positive())).unwrap());
    }
    for k in 1..=n {
        for i in 1..=n + 1 {
            for j in i + 1..=n + 1 {
                cnf.insert(Clause::new([p(i, k).negative(), p(j, k).negative()]).unwrap());
            }
        }
    }
    Ok(cnf)
}

/// Binary pigeonhole: pigeon `i` owns bits `p^i_1..p^i_k` (variable `(i-1)k + ℓ`),
/// and no two pigeons share a hole `h ∈ {0,1}^k`.
pub fn gen_bphp(n: usize) -> Result<Cnf, BuildError> {
    if n < 2 || !n.is_power_of_two() {
        return Err(BuildError::NotPowerOfTwo(n));
    }
    let k = n.trailing_zeros() as usize;
    let bit = |i: usize, l: usize| Var::new(((i - 1) * k + l) as u32);
    let mut cnf = Cnf::new(((n + 1) * k) as u32);
    for i in 1..=n + 1 {
        for j in i + 1..=n + 1 {
            for h in 0..n {
                let lits = (1..=k).flat_map(|l| {
                    let one = h >> (l - 1) & 1 == 1;
                    [Literal::new(bit(i, l), !one), Literal::new(bit(j, l), !one)]
                });
                cnf.insert(Clause::new(lits).unwrap());
            }
        }
    }
    Ok(cnf)
}

/// Triple count of [`gen_cook_er_php`]: two per `(i, k)` at each level.
pub fn cook_triple_count(n: usize) -> usize {
    (2..=n).map(|m| 2 * m * (m - 1)).sum()
}

/// One reduction level: the level-`m` pigeon literals and the extension
/// variables defining level `m − 1`.
struct Level {
    m: usize,
    p: Vec<Vec<Literal>>,
    a: Vec<Vec<Literal>>,
    b: Vec<Vec<Literal>>,
}

impl Level {
    fn pigeon(&self, i: usize) -> Clause {
        Clause::new((1..=self.m).map(|k| self.p[i][k])).unwrap()
    }

    fn hole(&self, i: usize, j: usize, k: usize) -> Clause {
        Clause::new([!self.p[i][k], !self.p[j][k]]).unwrap()
    }
}

fn clause(lits: impl IntoIterator<Item = Literal>) -> Clause {
    Clause::new(lits).expect("construction never builds tautologies")
}

/// Extended resolution refutation of `PHP_n` by repeated reduction to `PHP_{m-1}`.
///
/// At level `m` the new pigeon literal for `(i, k)` is `¬b_{i,k}` where
/// `a_{i,k} ↔ P_{i,m} ∧ P_{m+1,k}` and `b_{i,k} ↔ ¬P_{i,k} ∧ ¬a_{i,k}`.
pub fn gen_cook_er_php(n: usize) -> Result<ErProof, BuildError> {
    let gamma = gen_php(n)?;
    let mut rec = StepRecorder::new(gamma.iter());
    let mut next = n * (n + 1) + 1;
    let mut fresh = || {
        let v = Var::new(next as u32);
        next += 1;
        v
    };

    let mut p: Vec<Vec<Literal>> = vec![Vec::new(); n + 2];
    for (i, row) in p.iter_mut().enumerate().skip(1) {
        *row = std::iter::once(php_var(n, 1, 1).positive())
            .chain((1..=n).map(|k| php_var(n, i, k).positive()))
            .collect();
    }
    let mut levels = Vec::new();
    for m in (2..=n).rev() {
        let mut a = vec![vec![php_var(n, 1, 1).positive(); m]; m + 1];
        let mut b = a.clone();
        for i in 1..=m {
            for k in 1..m {
                let av = fresh();
                rec.push(ProofStep::Extend(Extension {
                    var: av,
                    p: p[i][m],
                    q: p[m + 1][k],
                }));
                let bv = fresh();
                rec.push(ProofStep::Extend(Extension {
                    var: bv,
                    p: !p[i][k],
                    q: av.negative(),
                }));
                a[i][k] = av.positive();
                b[i][k] = bv.positive();
            }
        }
        let next_p: Vec<Vec<Literal>> = (0..=m)
            .map(|i| {
                (0..m)
                    .map(|k| if i == 0 || k == 0 { p[1][1] } else { !b[i][k] })
                    .collect()
            })
            .collect();
        levels.push(Level {
            m,
            p: std::mem::replace(&mut p, next_p),
            a,
            b,
        });
    }

    for lv in &levels {
        reduce_level(&mut rec, lv);
    }
    let last = Level {
        m: 1,
        p,
        a: Vec::new(),
        b: Vec::new(),
    };
    let r = rec.resolve(&last.pigeon(1), &last.hole(1, 2, 1));
    rec.resolve(&r, &last.pigeon(2));

    let steps = rec.into_steps();
    let split = steps.iter().take_while(|s| s.tag() == 'e').count();
    let triples = steps[..split]
        .iter()
        .map(|s| match s {
            ProofStep::Extend(e) => *e,
            _ => unreachable!(),
        })
        .collect();
    Ok(ErProof {
        triples,
        resolution: steps[split..].to_vec(),
    })
}

/// Derives the level-`(m−1)` pigeon and hole axioms from the level-`m` ones.
fn reduce_level(rec: &mut StepRecorder, lv: &Level) {
    let m = lv.m;
    let p = &lv.p;
    let a1 = |i: usize, k: usize| clause([!lv.a[i][k], p[i][m]]);
    let a2 = |i: usize, k: usize| clause([!lv.a[i][k], p[m + 1][k]]);
    let a3 = |i: usize, k: usize| clause([lv.a[i][k], !p[i][m], !p[m + 1][k]]);
    let b1 = |i: usize, k: usize| clause([!lv.b[i][k], !p[i][k]]);
    let b2 = |i: usize, k: usize| clause([!lv.b[i][k], !lv.a[i][k]]);
    let b3 = |i: usize, k: usize| clause([lv.b[i][k], p[i][k], lv.a[i][k]]);

    for i in 1..=m {
        let mut x = lv.pigeon(i);
        for k in 1..m {
            x = rec.resolve(&x, &b1(i, k));
        }
        let mut y = rec.resolve(&lv.pigeon(m + 1), &lv.hole(i, m + 1, m));
        for k in 1..m {
            let z = rec.resolve(&a3(i, k), &b2(i, k));
            y = rec.resolve(&y, &z);
        }
        rec.resolve(&x, &y);
    }

    for k in 1..m {
        for i in 1..=m {
            for j in i + 1..=m {
                let h = rec.resolve(&a1(i, k), &lv.hole(i, j, m));
                let aa = rec.resolve(&h, &a1(j, k));
                let ai_pj = rec.resolve(&a2(i, k), &lv.hole(j, m + 1, k));
                let aj_pi = rec.resolve(&a2(j, k), &lv.hole(i, m + 1, k));
                let t1 = rec.resolve(&b3(j, k), &lv.hole(i, j, k));
                let t2 = rec.resolve(&t1, &aj_pi);
                let t3 = rec.resolve(&b3(j, k), &ai_pj);
                let t4 = rec.resolve(&t3, &aa);
                let t5 = rec.resolve(&b3(i, k), &t2);
                rec.resolve(&t5, &t4);
            }
        }
    }
}

/// Checks `er` against `gamma` with the er checker.
pub fn verify_er(gamma: &Cnf, er: &ErProof) -> Result<(), BuildError> {
    let report = check(gamma, &er.to_proof());
    if report.is_verified() {
        Ok(())
    } else {
        Err(BuildError::ErNotVerified(report.to_string()))
    }
}

fn extension_clauses(er: &ErProof) -> Vec<Clause> {
    er.triples
        .iter()
        .flat_map(|e| e.clauses().expect("verified triples are not tautological"))
        .collect()
}

/// `Γ` followed by `x_i ∨ D` and then `¬x_i ∨ D` for every `D ∈ Γ`, for each
/// extension variable in triple order.
pub fn transform_g(gamma: &Cnf, er: &ErProof) -> Result<Cnf, BuildError> {
    verify_er(gamma, er)?;
    let mut g = gamma.clone();
    g.extend_vars(er.max_var(gamma.num_vars()));
    for e in &er.triples {
        let x = e.var.positive();
        for lit in [x, !x] {
            for d in gamma.iter() {
                g.insert(d.with(lit).expect("extension variables are fresh"));
            }
        }
    }
    Ok(g)
}

/// The `y` partner of each extension variable of an er proof.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAllocation {
    /// Declared variable count of the base CNF.
    pub base_vars: u32,
    /// `[x, y]` per triple, in triple order.
    pub pairs: Vec<(u32, u32)>,
}

impl PairAllocation {
    pub fn t(&self) -> usize {
        self.pairs.len()
    }

    pub fn num_vars(&self) -> u32 {
        self.pairs
            .iter()
            .map(|&(x, y)| x.max(y))
            .fold(self.base_vars, u32::max)
    }

    /// The clauses `¬x_i ∨ y_i`, `x_i ∨ ¬y_i` in pair order.
    pub fn pair_clauses(&self) -> Vec<Clause> {
        self.pairs
            .iter()
            .flat_map(|&(x, y)| {
                let (x, y) = (Var::new(x).positive(), Var::new(y).positive());
                [clause([!x, y]), clause([x, !y])]
            })
            .collect()
    }

    /// `H(Γ)` for this allocation.
    pub fn apply(&self, gamma: &Cnf) -> Cnf {
        let mut h = gamma.clone();
        h.extend_vars(self.num_vars());
        for c in self.pair_clauses() {
            h.insert(c);
        }
        h
    }

    pub fn is_pair_var(&self, v: Var) -> bool {
        self.pairs
            .iter()
            .any(|&(x, y)| x == v.index() || y == v.index())
    }
}

/// `Γ ∪ {¬x_i ∨ y_i, x_i ∨ ¬y_i}` with the `y_i` numbered after every variable
/// of the er proof.
pub fn transform_h(gamma: &Cnf, er: &ErProof) -> Result<(Cnf, PairAllocation), BuildError> {
    verify_er(gamma, er)?;
    let top = er.max_var(gamma.num_vars());
    let pairs = er
        .triples
        .iter()
        .enumerate()
        .map(|(i, e)| (e.var.index(), top + 1 + i as u32))
        .collect();
    let alloc = PairAllocation {
        base_vars: gamma.num_vars(),
        pairs,
    };
    Ok((alloc.apply(gamma), alloc))
}

fn er_table(gamma: &Cnf, er: &ErProof) -> Vec<Clause> {
    gamma.iter().cloned().chain(extension_clauses(er)).collect()
}

/// RAT additions for every extension clause, then the er resolution steps.
pub fn build_rat_proof_of_g(gamma: &Cnf, er: &ErProof) -> Result<Proof, BuildError> {
    let g = transform_g(gamma, er)?;
    let mut rec = StepRecorder::new(g.iter());
    for e in &er.triples {
        let x = e.var.positive();
        let [c1, c2, c3] = e.clauses().unwrap();
        rec.push(ProofStep::AddRat {
            pivot: !x,
            result: c1,
        });
        rec.push(ProofStep::AddRat {
            pivot: !x,
            result: c2,
        });
        rec.push(ProofStep::AddRat {
            pivot: x,
            result: c3,
        });
    }
    rec.replay(&er_table(gamma, er), &er.resolution);
    Ok(rec.finish(SystemTag::Rat))
}

fn check_pairs(er: &ErProof, pairs: &PairAllocation) -> Result<(), BuildError> {
    let same = pairs.pairs.len() == er.triples.len()
        && pairs
            .pairs
            .iter()
            .zip(&er.triples)
            .all(|(&(x, _), e)| x == e.var.index());
    if same {
        Ok(())
    } else {
        Err(BuildError::PairMismatch)
    }
}

/// The extension clauses as a blocked extension of `H(Γ)`, then the er
/// resolution steps.
pub fn build_ger_proof_of_h(
    gamma: &Cnf,
    er: &ErProof,
    pairs: &PairAllocation,
) -> Result<Proof, BuildError> {
    verify_er(gamma, er)?;
    check_pairs(er, pairs)?;
    let h = pairs.apply(gamma);
    let mut rec = StepRecorder::new(h.iter());
    for c in extension_clauses(er) {
        rec.push(ProofStep::LambdaMember { result: c });
    }
    rec.replay(&er_table(gamma, er), &er.resolution);
    Ok(rec.finish(SystemTag::Ger))
}

/// Set-blocked additions that recover each extension triple once resolved
/// against the pair clauses, then the er resolution steps.
pub fn build_sbc_proof_of_h(
    gamma: &Cnf,
    er: &ErProof,
    pairs: &PairAllocation,
) -> Result<Proof, BuildError> {
    verify_er(gamma, er)?;
    check_pairs(er, pairs)?;
    let h = pairs.apply(gamma);
    let mut rec = StepRecorder::new(h.iter());
    let mut added = Vec::new();
    for (e, &(_, y)) in er.triples.iter().zip(&pairs.pairs) {
        let x = e.var.positive();
        let y = Var::new(y).positive();
        let low = SbcWitness::new([!x, !y]);
        let high = SbcWitness::new([x, y]);
        let e1 = clause([!x, !y, e.p]);
        let e2 = clause([!x, !y, e.q]);
        let e3 = clause([x, y, !e.p, !e.q]);
        for (w, c) in [(&low, &e1), (&low, &e2), (&high, &e3)] {
            rec.push(ProofStep::AddSbc {
                witness: w.clone(),
                result: c.clone(),
            });
        }
        added.push((x, y, e1, e2, e3));
    }
    for (x, y, e1, e2, e3) in &added {
        let down = clause([!*x, *y]);
        let up = clause([*x, !*y]);
        rec.resolve_on(e1, &down, y.var());
        rec.resolve_on(e2, &down, y.var());
        rec.resolve_on(e3, &up, y.var());
    }
    rec.replay(&er_table(gamma, er), &er.resolution);
    Ok(rec.finish(SystemTag::Sbc))
}

/// `C_{i,j,k}` for `i ∈ [n−1]` and `j, k > i`.
fn sbc_php_clause(n: usize, i: usize, j: usize, k: usize) -> Clause {
    let p = |a, b| php_var(n, a, b).positive();
    let lits = [!p(i, k), !p(j, i)]
        .into_iter()
        .chain((1..=n + 1).filter(|&l| l != i).map(|l| p(l, k)))
        .chain((1..=n + 1).filter(|&l| l != j).map(|l| p(l, i)));
    clause(lits)
}

/// Set-blocked clause additions followed by a resolution refutation of `PHP_n`.
pub fn build_sbc_proof_of_php(n: usize) -> Result<Proof, BuildError> {
    let gamma = gen_php(n)?;
    let p = |a, b| php_var(n, a, b).positive();
    let hole = |i: usize, j: usize, k: usize| clause([!p(i, k), !p(j, k)]);
    let pigeon = |i: usize| clause((1..=n).map(|k| p(i, k)));
    let mut rec = StepRecorder::new(gamma.iter());

    let mut triples = Vec::new();
    for i in 1..n {
        for j in i + 1..=n + 1 {
            for k in i + 1..=n {
                let c = sbc_php_clause(n, i, j, k);
                let witness = SbcWitness::new([!p(i, k), !p(j, i), p(i, i), p(j, k)]);
                rec.push(ProofStep::AddSbc {
                    witness,
                    result: c.clone(),
                });
                triples.push((i, j, k, c));
            }
        }
    }

    let mut pairs = BTreeMap::new();
    for (i, j, k, c) in triples {
        let mut cur = c;
        for l in (1..=n + 1).filter(|&l| l != i) {
            cur = rec.resolve_on(&cur, &hole(i, l, k), php_var(n, l, k));
        }
        for l in (1..=n + 1).filter(|&l| l != j) {
            cur = rec.resolve_on(&cur, &hole(j, l, i), php_var(n, l, i));
        }
        pairs.insert((i, j, k), cur);
    }

    for i in 1..=n {
        for j in i + 1..=n + 1 {
            let mut cur = pigeon(i);
            for k in 1..=n {
                let side = match k.cmp(&i) {
                    std::cmp::Ordering::Less => clause([!p(i, k)]),
                    std::cmp::Ordering::Equal => hole(i, j, i),
                    std::cmp::Ordering::Greater => pairs[&(i, j, k)].clone(),
                };
                cur = rec.resolve_on(&cur, &side, php_var(n, i, k));
            }
        }
    }
    let mut cur = pigeon(n + 1);
    for i in 1..=n {
        cur = rec.resolve_on(&cur, &clause([!p(n + 1, i)]), php_var(n, n + 1, i));
    }
    debug_assert!(cur.is_empty());
    Ok(rec.finish(SystemTag::Sbc))
}

/// A builder's output: the CNF it refutes and the proof.
#[derive(Debug, Clone)]
pub struct Built {
    pub cnf: Cnf,
    pub proof: Proof,
}

/// Proof builders taking a base CNF and an er proof of it.
pub trait ProofBuilder: Send + Sync {
    fn name(&self) -> &'static str;
    fn system(&self) -> SystemTag;
    fn build(&self, gamma: &Cnf, er: &ErProof) -> Result<Built, BuildError>;
}

struct RatOfG;
struct GerOfH;
struct SbcOfH;

impl ProofBuilder for RatOfG {
    fn name(&self) -> &'static str {
        "rat-of-g"
    }
    fn system(&self) -> SystemTag {
        SystemTag::Rat
    }
    fn build(&self, gamma: &Cnf, er: &ErProof) -> Result<Built, BuildError> {
        Ok(Built {
            cnf: transform_g(gamma, er)?,
            proof: build_rat_proof_of_g(gamma, er)?,
        })
    }
}

impl ProofBuilder for GerOfH {
    fn name(&self) -> &'static str {
        "ger-of-h"
    }
    fn system(&self) -> SystemTag {
        SystemTag::Ger
    }
    fn build(&self, gamma: &Cnf, er: &ErProof) -> Result<Built, BuildError> {
        let (h, pairs) = transform_h(gamma, er)?;
        Ok(Built {
            cnf: h,
            proof: build_ger_proof_of_h(gamma, er, &pairs)?,
        })
    }
}

impl ProofBuilder for SbcOfH {
    fn name(&self) -> &'static str {
        "sbc-of-h"
    }
    fn system(&self) -> SystemTag {
        SystemTag::Sbc
    }
    fn build(&self, gamma: &Cnf, er: &ErProof) -> Result<Built, BuildError> {
        let (h, pairs) = transform_h(gamma, er)?;
        Ok(Built {
            cnf: h,
            proof: build_sbc_proof_of_h(gamma, er, &pairs)?,
        })
    }
}

/// Builders by name.
pub struct BuilderRegistry {
    builders: BTreeMap<&'static str, Box<dyn ProofBuilder>>,
}

impl BuilderRegistry {
    pub fn standard() -> BuilderRegistry {
        let mut r = BuilderRegistry {
            builders: BTreeMap::new(),
        };
        r.register(Box::new(RatOfG));
        r.register(Box::new(GerOfH));
        r.register(Box::new(SbcOfH));
        r
    }

    pub fn register(&mut self, builder: Box<dyn ProofBuilder>) {
        self.builders.insert(builder.name(), builder);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ProofBuilder> {
        self.builders.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }
}
