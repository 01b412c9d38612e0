//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clausal_core::builders::{
    build_ger_proof_of_h, build_rat_proof_of_g, build_sbc_proof_of_h, build_sbc_proof_of_php,
    gen_bphp, gen_cook_er_php, gen_php, transform_g, transform_h, PairAllocation,
};
use clausal_core::check::{check, check_derivation};
use clausal_core::cnf::{Clause, Cnf, Literal, Var};
use clausal_core::oracle::is_satisfiable;
use clausal_core::proof::{
    ErProof, Extension, Proof, ProofStep, SbcWitness, StepRecorder, SystemTag,
};
use clausal_core::propagation::{extract_input_resolution, up_derives};
use clausal_core::redundancy::{
    is_blocked, is_blocked_extension, is_rat, is_sbc, kernel, kernel_with_choice,
};
use clausal_core::simulation::{refute_resolution, restrict_h_rat_proof, translate_rat_to_bc};
use common::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn binom2(n: usize) -> usize {
    n * (n - 1) / 2
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let elapsed = start.elapsed();
    if elapsed <= limit {
        Ok(format!("{:.2}s", elapsed.as_secs_f64()))
    } else {
        Err(format!(
            "took {:.2}s, limit {:?}",
            elapsed.as_secs_f64(),
            limit
        ))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verified(cnf: &Cnf, proof: &Proof, what: &str) -> Result<(), String> {
    let report = check(cnf, proof);
    ensure(report.is_verified(), || format!("{what}: {report}"))
}

fn formula_counts() -> Result<String, String> {
    let start = Instant::now();
    for n in 1..=8 {
        let len = gen_php(n).unwrap().len();
        ensure(len == (n + 1) + n * binom2(n + 1), || {
            format!("|PHP_{n}| = {len}")
        })?;
    }
    for n in [2, 4, 8] {
        let len = gen_bphp(n).unwrap().len();
        ensure(len == binom2(n + 1) * n, || format!("|BPHP_{n}| = {len}"))?;
    }
    within(start, Duration::from_secs(1))
}

/// Least-squares cubic through `(x, y)`, returning the largest relative error.
fn cubic_fit_error(points: &[(f64, f64)]) -> f64 {
    let mut ata = [[0.0f64; 4]; 4];
    let mut aty = [0.0f64; 4];
    for &(x, y) in points {
        let row = [1.0, x, x * x, x * x * x];
        for i in 0..4 {
            aty[i] += row[i] * y;
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut m: Vec<Vec<f64>> = (0..4)
        .map(|i| ata[i].iter().copied().chain([aty[i]]).collect())
        .collect();
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot_row[col];
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    let coef: Vec<f64> = (0..4).map(|i| m[i][4] / m[i][i]).collect();
    points
        .iter()
        .map(|&(x, y)| {
            let fit = coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * x * x * x;
            ((fit - y) / y).abs()
        })
        .fold(0.0, f64::max)
}

fn sbc_php_upper_bound() -> Result<String, String> {
    let start = Instant::now();
    let mut sizes = Vec::new();
    for n in 1..=8 {
        let proof = build_sbc_proof_of_php(n).unwrap();
        verified(&gen_php(n).unwrap(), &proof, &format!("sbc PHP_{n}"))?;
        sizes.push((n as f64, proof.size() as f64));
    }
    let err = cubic_fit_error(&sizes[3..]);
    ensure(err <= 0.10, || format!("cubic fit error {err:.3}"))?;
    let t = within(start, Duration::from_secs(30))?;
    let listed: Vec<String> = sizes.iter().map(|&(_, s)| format!("{s}")).collect();
    Ok(format!(
        "sizes {}; cubic fit error {:.4}; {t}",
        listed.join(","),
        err
    ))
}

fn cook_er_proofs() -> Result<String, String> {
    let start = Instant::now();
    let er1 = gen_cook_er_php(1).unwrap();
    ensure(er1.triples.is_empty() && er1.resolution.len() == 2, || {
        "n = 1 is not Λ = ∅ with two resolutions".into()
    })?;
    let mut ts = Vec::new();
    for n in 1..=6 {
        let er = gen_cook_er_php(n).unwrap();
        verified(&gen_php(n).unwrap(), &er.to_proof(), &format!("er PHP_{n}"))?;
        ts.push(er.t().to_string());
    }
    let t = within(start, Duration::from_secs(30))?;
    Ok(format!("t = {}; {t}", ts.join(",")))
}

fn g_pipeline() -> Result<String, String> {
    for n in 1..=4 {
        let gamma = gen_php(n).unwrap();
        let er = gen_cook_er_php(n).unwrap();
        let g = transform_g(&gamma, &er).unwrap();
        let rat = build_rat_proof_of_g(&gamma, &er).unwrap();
        verified(&g, &rat, &format!("rat G(PHP_{n})"))?;
        ensure(rat.size() <= er.size(), || {
            format!("n = {n}: rat size {} > er size {}", rat.size(), er.size())
        })?;
        for e in &er.triples {
            ensure(g.project(e.var.negative()).same_clauses(&gamma), || {
                format!("n = {n}: projection onto ¬x{} differs", e.var)
            })?;
        }
    }
    Ok("n = 1..4 verified, sizes within er size, projections exact".into())
}

fn lambda_of(er: &ErProof, num_vars: u32) -> Cnf {
    let clauses = er.triples.iter().flat_map(|e| e.clauses().unwrap());
    Cnf::from_clauses(num_vars, clauses).unwrap()
}

fn h_pipelines() -> Result<String, String> {
    for n in 1..=4 {
        let gamma = gen_php(n).unwrap();
        let er = gen_cook_er_php(n).unwrap();
        let (h, pairs) = transform_h(&gamma, &er).unwrap();
        let ger = build_ger_proof_of_h(&gamma, &er, &pairs).unwrap();
        verified(&h, &ger, &format!("ger H(PHP_{n})"))?;
        let sbc = build_sbc_proof_of_h(&gamma, &er, &pairs).unwrap();
        verified(&h, &sbc, &format!("sbc H(PHP_{n})"))?;
        ensure(
            is_blocked_extension(&h, &lambda_of(&er, h.num_vars())),
            || format!("n = {n}: Λ is not a blocked extension of H"),
        )?;
        ensure(sbc.size() <= 2 * er.size(), || {
            format!("n = {n}: sbc size {} > 2 × {}", sbc.size(), er.size())
        })?;
    }
    Ok("n = 1..4 ger and sbc verified, Λ blocked, sbc ≤ 2·er".into())
}

fn kernel_facts() -> Result<String, String> {
    for n in 1..=3 {
        let php = gen_php(n).unwrap();
        ensure(kernel(&php).kernel == php, || {
            format!("ker(PHP_{n}) ≠ PHP_{n}")
        })?;
    }
    for n in 1..=2 {
        let gamma = gen_php(n).unwrap();
        let g = transform_g(&gamma, &gen_cook_er_php(n).unwrap()).unwrap();
        ensure(kernel(&g).kernel == g, || {
            format!("ker(G(PHP_{n})) ≠ G(PHP_{n})")
        })?;
    }
    let mut rng = rng(6);
    let mut mismatches = 0;
    for _ in 0..100 {
        let vars = rng.gen_range(2..=8);
        let m = rng.gen_range(1..=20);
        let gamma = random_cnf(&mut rng, vars, m, (1, 3));
        let reference = kernel(&gamma).kernel;
        for _ in 0..5 {
            let other = kernel_with_choice(&gamma, |k| rng.gen_range(0..k)).kernel;
            if !other.same_clauses(&reference) {
                mismatches += 1;
            }
        }
    }
    ensure(mismatches == 0, || {
        format!("{mismatches} kernel mismatches")
    })?;
    Ok("PHP_1..3 and G(PHP_1..2) are their own kernels; 500 orders agree".into())
}

fn simulation() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = rng(7);
    let mut instances = 0;
    let mut reports = Vec::new();
    let mut attempts = 0;
    while instances < 200 {
        attempts += 1;
        ensure(attempts < 20_000, || {
            "could not draw enough RAT instances".into()
        })?;
        let vars = rng.gen_range(4..=12);
        let Some((gamma, proof)) = single_rat_instance(&mut rng, vars) else {
            continue;
        };
        verified(&gamma, &proof, "random rat instance")?;
        let (bc, r) = translate_rat_to_bc(&gamma, &proof).map_err(|e| e.to_string())?;
        verified(&gamma, &bc, "translated instance")?;
        reports.extend(r);
        instances += 1;
    }
    let gamma = gen_php(2).unwrap();
    let er = gen_cook_er_php(2).unwrap();
    let g = transform_g(&gamma, &er).unwrap();
    let rat = build_rat_proof_of_g(&gamma, &er).unwrap();
    let (bc, r) = translate_rat_to_bc(&g, &rat).map_err(|e| e.to_string())?;
    verified(&g, &bc, "translated G(PHP_2)")?;
    reports.extend(r);
    let violations = reports.iter().filter(|r| !r.within_bound()).count();
    ensure(violations == 0, || format!("{violations} bound violations"))?;
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} simulated RAT steps, 0 bound violations; {t}",
        reports.len()
    ))
}

fn input_resolution_extraction() -> Result<String, String> {
    let mut rng = rng(8);
    let mut done = 0;
    let mut violations = Vec::new();
    while done < 500 {
        let vars = rng.gen_range(2..=7);
        let m = rng.gen_range(2..=10);
        let gamma = random_cnf(&mut rng, vars, m, (1, 3));
        if gamma.occurring_vars().is_empty() {
            continue;
        }
        let width = rng.gen_range(0..=gamma.occurring_vars().len().min(3));
        let c = clause_over(&mut rng, &gamma, width);
        if !up_derives(&gamma, c.literals()) {
            continue;
        }
        done += 1;
        let d = extract_input_resolution(&gamma, &c).map_err(|e| e.to_string())?;
        let proof = Proof {
            system: SystemTag::Res,
            steps: d.steps.clone(),
        };
        let report = check_derivation(&gamma, &proof);
        let mut problems = Vec::new();
        if !report.is_verified() {
            problems.push(report.to_string());
        }
        let final_clause = d.final_clause().cloned().unwrap_or_else(|| c.clone());
        if final_clause != c || (d.steps.is_empty() && !gamma.contains(&c)) {
            problems.push("does not end with C".into());
        }
        let m = gamma.len();
        for (i, s) in d.steps.iter().enumerate() {
            match s {
                ProofStep::Weaken { .. } if i == 0 => {}
                ProofStep::Resolve { left, right, .. } if *left <= m || *right <= m => {}
                _ => problems.push(format!("step {} is not input-shaped", i + 1)),
            }
        }
        if d.cnf_count() > gamma.occurring_vars().len() + 1 {
            problems.push(format!("N = {} too large", d.cnf_count()));
        }
        let mut with_c = gamma.clone();
        with_c.insert(c.clone());
        if !d
            .steps
            .iter()
            .all(|s| with_c.iter().any(|e| e.subsumes(s.result().unwrap())))
        {
            problems.push("a derived clause is not subsumed by Γ ∪ {C}".into());
        }
        if !problems.is_empty() {
            violations.push(format!(
                "Γ = {:?}, C = {c}: {}",
                gamma.canonical(),
                problems.join("; ")
            ));
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    Ok("500 derivations verified, input-shaped, within N ≤ |var(Γ)| + 1".into())
}

/// The Cook proof with two extra triples so that `H(PHP_1)` has pair variables.
fn padded_er(n: usize) -> (Cnf, ErProof) {
    let gamma = gen_php(n).unwrap();
    let er = gen_cook_er_php(n).unwrap();
    if er.t() > 0 {
        return (gamma, er);
    }
    let base = gamma.num_vars();
    let v = |i: u32| Var::new(base + i);
    let lit1 = Var::new(1).positive();
    let extra = [
        Extension {
            var: v(1),
            p: lit1,
            q: Var::new(2).positive(),
        },
        Extension {
            var: v(2),
            p: !lit1,
            q: v(1).positive(),
        },
    ];
    let mut rec = StepRecorder::new(gamma.iter());
    for e in extra {
        rec.push(ProofStep::Extend(e));
    }
    let table: Vec<Clause> = gamma.iter().cloned().collect();
    rec.replay(&table, &er.resolution);
    let steps = rec.into_steps();
    let er = ErProof {
        triples: extra.to_vec(),
        resolution: steps[extra.len()..].to_vec(),
    };
    (gamma, er)
}

#[derive(Default)]
struct CaseTally {
    satisfied: usize,
    pair_pivot_resolution: usize,
    restricted_resolution: usize,
    weakening: usize,
    expanded_rat: usize,
    restricted_rat: usize,
}

/// A resolvent of two clauses of `gamma` clashing on exactly one variable.
fn up_derivable_clause(rng: &mut impl Rng, gamma: &Cnf) -> Clause {
    let clauses: Vec<&Clause> = gamma.iter().collect();
    loop {
        let a = clauses[rng.gen_range(0..clauses.len())];
        let b = clauses[rng.gen_range(0..clauses.len())];
        let clash: Vec<Literal> = a.iter().filter(|&l| b.contains(!l)).collect();
        if clash.len() == 1 {
            return a.resolve(b, clash[0].var()).unwrap();
        }
    }
}

/// A random rat proof of `H(Γ)` touching pair variables in every way the
/// restriction distinguishes.
fn random_h_rat_proof(
    rng: &mut impl Rng,
    gamma: &Cnf,
    pairs: &PairAllocation,
    tally: &mut CaseTally,
) -> Proof {
    let h = pairs.apply(gamma);
    let mut rec = StepRecorder::new(h.iter());
    let mut current = h.clone();
    let base: Vec<&Clause> = gamma.iter().collect();
    let push = |rec: &mut StepRecorder, current: &mut Cnf, step: ProofStep| {
        current.insert(step.result().unwrap().clone());
        rec.push(step);
    };
    let fresh_literal = |rng: &mut dyn rand::RngCore, d: &Clause| -> Option<Literal> {
        let free: Vec<u32> = (1..=gamma.num_vars())
            .filter(|&v| !d.contains_var(Var::new(v)))
            .collect();
        free.choose(rng)
            .map(|&v| Literal::new(Var::new(v), rng.gen()))
    };
    for _ in 0..rng.gen_range(3..=8) {
        let &(x, y) = pairs.pairs.choose(rng).unwrap();
        let (x, y) = (Var::new(x).positive(), Var::new(y).positive());
        let d = (*base.choose(rng).unwrap()).clone();
        match rng.gen_range(0..5) {
            0 => {
                // Weaken into ¬y, then resolve the pair variable away.
                let mut w = d.with(!y).unwrap();
                if let Some(l) = fresh_literal(rng, &d) {
                    w = w.with(l).unwrap();
                }
                rec.weaken(&d, w.clone());
                current.insert(w.clone());
                tally.weakening += 1;
                let down = Clause::new([!x, y]).unwrap();
                let r = rec.resolve_on(&w, &down, y.var());
                current.insert(r);
                tally.pair_pivot_resolution += 1;
            }
            1 => {
                // Satisfied under the restriction throughout.
                let w = d.with(y).unwrap();
                rec.weaken(&d, w.clone());
                current.insert(w.clone());
                let up = Clause::new([x, !y]).unwrap();
                let r = rec.resolve_on(&w, &up, y.var());
                current.insert(r);
                tally.satisfied += 2;
            }
            2 => {
                let k = up_derivable_clause(rng, gamma);
                let pivot = if rng.gen() { !x } else { !y };
                let c = k.with(pivot).unwrap();
                if is_rat(&c, pivot, &current).unwrap() && !current.contains(&c) {
                    push(
                        &mut rec,
                        &mut current,
                        ProofStep::AddRat { pivot, result: c },
                    );
                    tally.expanded_rat += 1;
                }
            }
            3 => {
                if let Some(l) = fresh_literal(rng, &d) {
                    let c = d.with(l).unwrap().with(!y).unwrap();
                    if is_rat(&c, l, &current).unwrap() && !current.contains(&c) {
                        push(
                            &mut rec,
                            &mut current,
                            ProofStep::AddRat {
                                pivot: l,
                                result: c.clone(),
                            },
                        );
                        tally.restricted_rat += 1;
                        // Resolve the new clause on its surviving pivot when possible.
                        if let Some(other) = base.iter().find(|e| {
                            e.contains(!l) && c.iter().filter(|&m| e.contains(!m)).count() == 1
                        }) {
                            let r = rec.resolve_on(&c, other, l.var());
                            current.insert(r);
                            tally.restricted_resolution += 1;
                        }
                    }
                }
            }
            _ => {
                // Plain resolution between two base clauses.
                let e = (*base.choose(rng).unwrap()).clone();
                if d.iter().filter(|&l| e.contains(!l)).count() == 1 {
                    let r = rec.resolve(&d, &e);
                    current.insert(r);
                    tally.restricted_resolution += 1;
                }
            }
        }
    }
    let refutation = refute_resolution(gamma).unwrap();
    let table: Vec<Clause> = gamma.iter().cloned().collect();
    rec.replay(&table, &refutation.steps);
    tally.restricted_resolution += refutation.steps.len();
    rec.finish(SystemTag::Rat)
}

fn restriction_translator() -> Result<String, String> {
    let mut rng = rng(9);
    let mut tally = CaseTally::default();
    let mut violations = Vec::new();
    for round in 0..50 {
        let n = 1 + round % 2;
        let (gamma, er) = padded_er(n);
        let (h, pairs) = transform_h(&gamma, &er).unwrap();
        let proof = random_h_rat_proof(&mut rng, &gamma, &pairs, &mut tally);
        verified(&h, &proof, "constructed H proof")?;
        let out = restrict_h_rat_proof(&gamma, &pairs, &proof).map_err(|e| e.to_string())?;
        let report = check(&gamma, &out);
        let bound = proof.size() * (gamma.occurring_vars().len() + 1);
        if out.system != SystemTag::Rat || !report.is_verified() || out.size() > bound {
            violations.push(format!(
                "round {round}: {report}, size {} vs {bound}",
                out.size()
            ));
        }
    }
    ensure(violations.is_empty(), || violations.join("; "))?;
    let cases = [
        ("satisfied", tally.satisfied),
        ("pair-pivot resolution", tally.pair_pivot_resolution),
        ("resolution", tally.restricted_resolution),
        ("weakening", tally.weakening),
        ("expanded RAT", tally.expanded_rat),
        ("restricted RAT", tally.restricted_rat),
    ];
    let missing: Vec<&str> = cases.iter().filter(|c| c.1 == 0).map(|c| c.0).collect();
    ensure(missing.is_empty(), || {
        format!("cases never exercised: {missing:?}")
    })?;
    let listed: Vec<String> = cases.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!(
        "50 proofs restricted within bound ({})",
        listed.join(", ")
    ))
}

enum Candidate {
    Bc(Literal),
    Rat(Literal),
    Sbc(SbcWitness),
}

fn mutate(rng: &mut impl Rng, cnf: &Cnf, proof: &Proof) -> Option<Proof> {
    let mut out = proof.clone();
    let i = rng.gen_range(0..out.steps.len());
    let max_id = cnf.len() + i;
    let vars = cnf.num_vars().max(1);
    let tweak_clause = |rng: &mut dyn rand::RngCore, c: &Clause| -> Option<Clause> {
        match rng.gen_range(0..3) {
            0 if !c.is_empty() => {
                let l = c.literals()[rng.gen_range(0..c.len())];
                Clause::new(c.iter().map(|m| if m == l { !m } else { m })).ok()
            }
            1 if !c.is_empty() => {
                let l = c.literals()[rng.gen_range(0..c.len())];
                Some(c.without(l))
            }
            _ => {
                let v = Var::new(rng.gen_range(1..=vars));
                let l = Literal::new(v, rng.gen());
                c.with(l).ok().filter(|d| d != c)
            }
        }
    };
    let step = &mut out.steps[i];
    match step {
        ProofStep::Resolve {
            left,
            pivot,
            result,
            ..
        } => match rng.gen_range(0..3) {
            0 => {
                let new = rng.gen_range(1..=max_id);
                if new == *left {
                    return None;
                }
                *left = new;
            }
            1 => {
                let v = Var::new(rng.gen_range(1..=vars));
                if v == *pivot {
                    return None;
                }
                *pivot = v;
            }
            _ => *result = tweak_clause(rng, result)?,
        },
        ProofStep::Weaken { source, result } => {
            if rng.gen() {
                let new = rng.gen_range(1..=max_id);
                if new == *source {
                    return None;
                }
                *source = new;
            } else {
                *result = tweak_clause(rng, result)?;
            }
        }
        ProofStep::AddRat { pivot, result } | ProofStep::AddBc { pivot, result } => {
            let c = tweak_clause(rng, result)?;
            if !c.contains(*pivot) {
                return None;
            }
            *result = c;
        }
        _ => return None,
    }
    Some(out)
}

fn random_verified_proof(rng: &mut impl Rng) -> (Cnf, Proof) {
    loop {
        if rng.gen_bool(0.4) {
            let vars = rng.gen_range(4..=8);
            if let Some(found) = single_rat_instance(rng, vars) {
                return found;
            }
            continue;
        }
        let vars = rng.gen_range(3..=8);
        let m = rng.gen_range(3 * vars as usize..=6 * vars as usize);
        let gamma = random_cnf(rng, vars, m, (1, 3));
        if let Ok(proof) = refute_resolution(&gamma) {
            if !proof.steps.is_empty() {
                return (gamma, proof);
            }
        }
    }
}

fn soundness_fuzz() -> Result<String, String> {
    let mut rng = rng(10);
    let mut accepted = 0;
    let mut escapes = 0;
    let mut tries = 0;
    while accepted < 1000 {
        tries += 1;
        ensure(tries < 1_000_000, || "too few accepted additions".into())?;
        let vars = rng.gen_range(2..=15);
        let m = rng.gen_range(1..=3 * vars as usize);
        let gamma = random_cnf(&mut rng, vars, m, (1, 3));
        let width = rng.gen_range(1..=4.min(vars as usize));
        let c = random_clause(&mut rng, vars, width);
        if gamma.contains(&c) {
            continue;
        }
        let candidate = match rng.gen_range(0..3) {
            0 => Candidate::Bc(*c.literals().choose(&mut rng).unwrap()),
            1 => Candidate::Rat(*c.literals().choose(&mut rng).unwrap()),
            _ => {
                let k = rng.gen_range(1..=c.len());
                let w: Vec<Literal> = c.literals().choose_multiple(&mut rng, k).copied().collect();
                Candidate::Sbc(SbcWitness::new(w))
            }
        };
        let ok = match &candidate {
            Candidate::Bc(p) => is_blocked(&c, *p, &gamma).unwrap(),
            Candidate::Rat(p) => is_rat(&c, *p, &gamma).unwrap(),
            Candidate::Sbc(w) => is_sbc(&c, w, &gamma).unwrap(),
        };
        if !ok {
            continue;
        }
        accepted += 1;
        let mut with_c = gamma.clone();
        with_c.insert(c.clone());
        if is_satisfiable(&gamma).unwrap() != is_satisfiable(&with_c).unwrap() {
            escapes += 1;
        }
    }
    ensure(escapes == 0, || {
        format!("{escapes} redundancy soundness escapes")
    })?;

    let mut proof_escapes = 0;
    let mut mutants = 0;
    let mut killed = 0;
    for _ in 0..1000 {
        let (cnf, proof) = random_verified_proof(&mut rng);
        ensure(check(&cnf, &proof).is_verified(), || {
            "generated proof rejected".into()
        })?;
        if is_satisfiable(&cnf).unwrap() {
            proof_escapes += 1;
        }
        let mutant = loop {
            if let Some(m) = mutate(&mut rng, &cnf, &proof) {
                break m;
            }
        };
        mutants += 1;
        if !check(&cnf, &mutant).is_verified() {
            killed += 1;
        }
    }
    ensure(proof_escapes == 0, || {
        format!("{proof_escapes} verified proofs of satisfiable CNFs")
    })?;
    let rate = killed as f64 / mutants as f64;
    ensure(rate >= 0.99, || format!("mutation kill rate {rate:.4}"))?;
    Ok(format!(
        "1000 additions sound; 1000 proofs sound; kill rate {killed}/{mutants}"
    ))
}

type Criterion = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("formula counts", formula_counts),
        ("sbc proofs of PHP", sbc_php_upper_bound),
        ("er proofs of PHP", cook_er_proofs),
        ("G pipeline", g_pipeline),
        ("H pipelines", h_pipelines),
        ("kernel facts", kernel_facts),
        ("RAT to BC simulation", simulation),
        ("input resolution extraction", input_resolution_extraction),
        ("restriction translator", restriction_translator),
        ("soundness fuzz", soundness_fuzz),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
