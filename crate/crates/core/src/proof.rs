//! Proof objects, the line-based proof file format, and size accounting.
//!
//! Clause ids: the input clauses are numbered `1..=m` in CNF order, and every
//! step takes the next id for its result. An extension triple takes three ids,
//! for `¬x ∨ p`, `¬x ∨ q` and `x ∨ ¬p ∨ ¬q` in that order.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::cnf::{Clause, Cnf, Literal, Var};

pub type ClauseId = usize;

/// The proof system a proof is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemTag {
    Res,
    Bc,
    Rat,
    Sbc,
    Ger,
    Er,
}

impl SystemTag {
    pub const ALL: [SystemTag; 6] = [
        SystemTag::Res,
        SystemTag::Bc,
        SystemTag::Rat,
        SystemTag::Sbc,
        SystemTag::Ger,
        SystemTag::Er,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemTag::Res => "res",
            SystemTag::Bc => "bc",
            SystemTag::Rat => "rat",
            SystemTag::Sbc => "sbc",
            SystemTag::Ger => "ger",
            SystemTag::Er => "er",
        }
    }
}

impl fmt::Display for SystemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SystemTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown proof system `{s}`"))
    }
}

/// Witness `L ⊆ C` of a set-blocked clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SbcWitness(Vec<Literal>);

impl SbcWitness {
    /// Sorted, deduplicated witness. May be empty or tautological; the checker rejects those.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> SbcWitness {
        let mut v: Vec<Literal> = lits.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SbcWitness(v)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.0.binary_search(&lit).is_ok()
    }
}

/// An extension triple `x ↔ p ∧ q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Extension {
    pub var: Var,
    pub p: Literal,
    pub q: Literal,
}

impl Extension {
    /// `¬x ∨ p`, `¬x ∨ q`, `x ∨ ¬p ∨ ¬q`; `None` if `p = ¬q` or `x` occurs in `p`/`q`.
    pub fn clauses(&self) -> Option<[Clause; 3]> {
        let x = self.var.positive();
        Some([
            Clause::new([!x, self.p]).ok()?,
            Clause::new([!x, self.q]).ok()?,
            Clause::new([x, !self.p, !self.q]).ok()?,
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProofStep {
    Resolve {
        left: ClauseId,
        right: ClauseId,
        pivot: Var,
        result: Clause,
    },
    Weaken {
        source: ClauseId,
        result: Clause,
    },
    AddBc {
        pivot: Literal,
        result: Clause,
    },
    AddRat {
        pivot: Literal,
        result: Clause,
    },
    AddSbc {
        witness: SbcWitness,
        result: Clause,
    },
    Extend(Extension),
    LambdaMember {
        result: Clause,
    },
}

impl ProofStep {
    /// Number of clause ids this step consumes.
    pub fn id_count(&self) -> usize {
        match self {
            ProofStep::Extend(_) => 3,
            _ => 1,
        }
    }

    /// The single derived clause, if the step derives exactly one.
    pub fn result(&self) -> Option<&Clause> {
        match self {
            ProofStep::Resolve { result, .. }
            | ProofStep::Weaken { result, .. }
            | ProofStep::AddBc { result, .. }
            | ProofStep::AddRat { result, .. }
            | ProofStep::AddSbc { result, .. }
            | ProofStep::LambdaMember { result } => Some(result),
            ProofStep::Extend(_) => None,
        }
    }

    pub fn is_resolution(&self) -> bool {
        matches!(self, ProofStep::Resolve { .. } | ProofStep::Weaken { .. })
    }

    pub fn tag(&self) -> char {
        match self {
            ProofStep::Resolve { .. } => 'r',
            ProofStep::Weaken { .. } => 'w',
            ProofStep::AddBc { .. } => 'b',
            ProofStep::AddRat { .. } => 't',
            ProofStep::AddSbc { .. } => 's',
            ProofStep::Extend(_) => 'e',
            ProofStep::LambdaMember { .. } => 'x',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub system: SystemTag,
    pub steps: Vec<ProofStep>,
}

impl Proof {
    pub fn new(system: SystemTag) -> Proof {
        Proof {
            system,
            steps: Vec::new(),
        }
    }

    /// Clauses in the extension or blocked-extension prefix: `|Λ|`.
    pub fn lambda_size(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                ProofStep::Extend(_) => 3,
                ProofStep::LambdaMember { .. } => 1,
                _ => 0,
            })
            .sum()
    }

    /// Size of the proof as a sequence of CNFs; `|Λ| + |Π|` for ger and er.
    pub fn size(&self) -> usize {
        match self.system {
            SystemTag::Ger | SystemTag::Er => {
                let prefix = self
                    .steps
                    .iter()
                    .filter(|s| matches!(s, ProofStep::Extend(_) | ProofStep::LambdaMember { .. }))
                    .count();
                self.lambda_size() + 1 + (self.steps.len() - prefix)
            }
            _ => 1 + self.steps.len(),
        }
    }

    pub fn count(&self, tag: char) -> usize {
        self.steps.iter().filter(|s| s.tag() == tag).count()
    }
}

pub fn proof_size(proof: &Proof) -> usize {
    proof.size()
}

/// Replays ids to clauses without checking any inference.
/// Entry `id - 1` holds the clause with that id.
pub fn clause_table(cnf: &Cnf, steps: &[ProofStep]) -> Result<Vec<Clause>, ProofFormatError> {
    let mut table: Vec<Clause> = cnf.iter().cloned().collect();
    for (i, step) in steps.iter().enumerate() {
        match step {
            ProofStep::Resolve { left, right, .. } => {
                check_id(*left, table.len(), i)?;
                check_id(*right, table.len(), i)?;
            }
            ProofStep::Weaken { source, .. } => check_id(*source, table.len(), i)?,
            _ => {}
        }
        match step {
            ProofStep::Extend(ext) => {
                let cls = ext.clauses().ok_or(ProofFormatError::Step {
                    line: i + 1,
                    msg: "tautological extension triple".into(),
                })?;
                table.extend(cls);
            }
            other => table.push(other.result().unwrap().clone()),
        }
    }
    Ok(table)
}

fn check_id(id: ClauseId, len: usize, step: usize) -> Result<(), ProofFormatError> {
    if id == 0 || id > len {
        Err(ProofFormatError::Step {
            line: step + 1,
            msg: format!("clause id {id} is out of range"),
        })
    } else {
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofFormatError {
    #[error("missing `p proof <system>` header")]
    MissingHeader,
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("step {line}: {msg}")]
    Step { line: usize, msg: String },
}

fn line_err(line: usize, msg: impl Into<String>) -> ProofFormatError {
    ProofFormatError::Line {
        line,
        msg: msg.into(),
    }
}

/// Parses the proof file grammar. Antecedent ids must be positive; whether they
/// refer to an existing clause is decided by the checker.
pub fn parse_proof(text: &str) -> Result<Proof, ProofFormatError> {
    let mut system: Option<SystemTag> = None;
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.len() > crate::cnf::MAX_LINE_BYTES {
            return Err(line_err(line, "line too long"));
        }
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let tag = fields.next().unwrap();
        if tag == "p" {
            if system.is_some() {
                return Err(line_err(line, "duplicate header"));
            }
            if fields.next() != Some("proof") {
                return Err(line_err(line, "expected `p proof <system>`"));
            }
            let name = fields
                .next()
                .ok_or_else(|| line_err(line, "missing proof system"))?;
            system = Some(SystemTag::from_str(name).map_err(|e| line_err(line, e))?);
            if fields.next().is_some() {
                return Err(line_err(line, "trailing tokens after header"));
            }
            continue;
        }
        if system.is_none() {
            return Err(ProofFormatError::MissingHeader);
        }
        let nums: Vec<i64> = fields
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| line_err(line, format!("malformed token `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        let Some((&0, body)) = nums.split_last() else {
            return Err(line_err(line, "step is not terminated by 0"));
        };
        if body.contains(&0) {
            return Err(line_err(line, "unexpected 0 inside a step"));
        }
        steps.push(parse_step(tag, body, line)?);
    }
    Ok(Proof {
        system: system.ok_or(ProofFormatError::MissingHeader)?,
        steps,
    })
}

fn parse_step(tag: &str, body: &[i64], line: usize) -> Result<ProofStep, ProofFormatError> {
    let id = |v: i64| -> Result<ClauseId, ProofFormatError> {
        if v <= 0 {
            Err(line_err(line, format!("clause id {v} is out of range")))
        } else {
            Ok(v as ClauseId)
        }
    };
    let lit = |v: i64| -> Result<Literal, ProofFormatError> {
        i32::try_from(v)
            .ok()
            .and_then(|c| Literal::from_dimacs(c).ok())
            .ok_or_else(|| line_err(line, format!("bad literal {v}")))
    };
    let clause = |vs: &[i64]| -> Result<Clause, ProofFormatError> {
        let lits = vs.iter().map(|&v| lit(v)).collect::<Result<Vec<_>, _>>()?;
        Clause::new(lits).map_err(|_| line_err(line, "tautological clause"))
    };
    let need = |n: usize| -> Result<(), ProofFormatError> {
        if body.len() < n {
            Err(line_err(
                line,
                format!("`{tag}` step needs at least {n} fields"),
            ))
        } else {
            Ok(())
        }
    };
    Ok(match tag {
        "r" => {
            need(3)?;
            if body[2] <= 0 || body[2] > i32::MAX as i64 {
                return Err(line_err(line, "pivot must be a positive variable"));
            }
            ProofStep::Resolve {
                left: id(body[0])?,
                right: id(body[1])?,
                pivot: Var::new(body[2] as u32),
                result: clause(&body[3..])?,
            }
        }
        "w" => {
            need(1)?;
            ProofStep::Weaken {
                source: id(body[0])?,
                result: clause(&body[1..])?,
            }
        }
        "b" | "t" => {
            need(1)?;
            let pivot = lit(body[0])?;
            let result = clause(&body[1..])?;
            if tag == "b" {
                ProofStep::AddBc { pivot, result }
            } else {
                ProofStep::AddRat { pivot, result }
            }
        }
        "s" => {
            need(1)?;
            if body[0] <= 0 {
                return Err(line_err(line, "witness size must be positive"));
            }
            let k = body[0] as usize;
            if body.len() < 1 + k {
                return Err(line_err(line, "witness arity mismatch"));
            }
            let witness = body[1..1 + k]
                .iter()
                .map(|&v| lit(v))
                .collect::<Result<Vec<_>, _>>()?;
            let witness = SbcWitness::new(witness);
            if witness.len() != k {
                return Err(line_err(line, "witness arity mismatch"));
            }
            ProofStep::AddSbc {
                witness,
                result: clause(&body[1 + k..])?,
            }
        }
        "x" => ProofStep::LambdaMember {
            result: clause(body)?,
        },
        "e" => {
            if body.len() != 3 {
                return Err(line_err(line, "`e` step needs exactly <var> <p> <q>"));
            }
            if body[0] <= 0 || body[0] > i32::MAX as i64 {
                return Err(line_err(line, "extension variable must be positive"));
            }
            ProofStep::Extend(Extension {
                var: Var::new(body[0] as u32),
                p: lit(body[1])?,
                q: lit(body[2])?,
            })
        }
        other => return Err(line_err(line, format!("unknown step tag `{other}`"))),
    })
}

pub fn write_proof(proof: &Proof) -> String {
    let mut out = format!("p proof {}\n", proof.system);
    for step in &proof.steps {
        write_step(&mut out, step);
    }
    out
}

fn write_step(out: &mut String, step: &ProofStep) {
    let _ = match step {
        ProofStep::Resolve {
            left,
            right,
            pivot,
            result,
        } => writeln!(out, "r {left} {right} {pivot} {result}"),
        ProofStep::Weaken { source, result } => writeln!(out, "w {source} {result}"),
        ProofStep::AddBc { pivot, result } => writeln!(out, "b {pivot} {result}"),
        ProofStep::AddRat { pivot, result } => writeln!(out, "t {pivot} {result}"),
        ProofStep::AddSbc { witness, result } => {
            let _ = write!(out, "s {}", witness.len());
            for l in witness.literals() {
                let _ = write!(out, " {l}");
            }
            writeln!(out, " {result}")
        }
        ProofStep::Extend(e) => writeln!(out, "e {} {} {} 0", e.var, e.p, e.q),
        ProofStep::LambdaMember { result } => writeln!(out, "x {result}"),
    };
}

/// An extended resolution proof: extension triples followed by resolution steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErProof {
    pub triples: Vec<Extension>,
    pub resolution: Vec<ProofStep>,
}

impl ErProof {
    pub fn t(&self) -> usize {
        self.triples.len()
    }

    pub fn to_proof(&self) -> Proof {
        let mut steps: Vec<ProofStep> = self
            .triples
            .iter()
            .copied()
            .map(ProofStep::Extend)
            .collect();
        steps.extend(self.resolution.iter().cloned());
        Proof {
            system: SystemTag::Er,
            steps,
        }
    }

    /// Splits an er proof into triples and the resolution part.
    pub fn from_proof(proof: &Proof) -> Result<ErProof, ProofFormatError> {
        if proof.system != SystemTag::Er {
            return Err(ProofFormatError::Step {
                line: 0,
                msg: format!("expected an er proof, found {}", proof.system),
            });
        }
        let mut triples = Vec::new();
        let mut resolution = Vec::new();
        for (i, step) in proof.steps.iter().enumerate() {
            match step {
                ProofStep::Extend(e) if resolution.is_empty() => triples.push(*e),
                s if s.is_resolution() => resolution.push(s.clone()),
                s => {
                    return Err(ProofFormatError::Step {
                        line: i + 1,
                        msg: format!("`{}` step not allowed here in an er proof", s.tag()),
                    })
                }
            }
        }
        Ok(ErProof {
            triples,
            resolution,
        })
    }

    /// Largest variable in `base` or introduced by a triple.
    pub fn max_var(&self, base_vars: u32) -> u32 {
        self.triples
            .iter()
            .map(|e| e.var.index())
            .fold(base_vars, u32::max)
    }

    pub fn size(&self) -> usize {
        3 * self.triples.len() + 1 + self.resolution.len()
    }
}

/// Emits proof steps addressed by clause content, assigning ids as it goes.
///
/// Every clause lookup returns the first id holding that clause.
#[derive(Debug, Clone)]
pub struct StepRecorder {
    ids: HashMap<Clause, ClauseId>,
    next_id: ClauseId,
    steps: Vec<ProofStep>,
}

impl StepRecorder {
    pub fn new<'a>(inputs: impl IntoIterator<Item = &'a Clause>) -> StepRecorder {
        let mut rec = StepRecorder {
            ids: HashMap::new(),
            next_id: 1,
            steps: Vec::new(),
        };
        for c in inputs {
            rec.register(c.clone());
        }
        rec
    }

    fn register(&mut self, c: Clause) -> ClauseId {
        let id = self.next_id;
        self.next_id += 1;
        *self.ids.entry(c).or_insert(id)
    }

    pub fn id_of(&self, c: &Clause) -> Option<ClauseId> {
        self.ids.get(c).copied()
    }

    pub fn contains(&self, c: &Clause) -> bool {
        self.ids.contains_key(c)
    }

    fn expect_id(&self, c: &Clause) -> ClauseId {
        self.id_of(c)
            .unwrap_or_else(|| panic!("clause {c} has not been derived"))
    }

    pub fn steps(&self) -> &[ProofStep] {
        &self.steps
    }

    pub fn push(&mut self, step: ProofStep) {
        match &step {
            ProofStep::Extend(e) => {
                for c in e.clauses().expect("tautological extension") {
                    self.register(c);
                }
            }
            s => {
                let c = s.result().unwrap().clone();
                self.register(c);
            }
        }
        self.steps.push(step);
    }

    /// Resolves two known clauses on their unique clashing variable.
    pub fn resolve(&mut self, a: &Clause, b: &Clause) -> Clause {
        let clashes: Vec<Var> = a
            .iter()
            .filter(|&l| b.contains(!l))
            .map(|l| l.var())
            .collect();
        assert_eq!(
            clashes.len(),
            1,
            "{a} and {b} must clash on exactly one variable"
        );
        self.resolve_on(a, b, clashes[0])
    }

    pub fn resolve_on(&mut self, a: &Clause, b: &Clause, pivot: Var) -> Clause {
        let result = a
            .resolve(b, pivot)
            .unwrap_or_else(|e| panic!("resolving {a} and {b} on {pivot}: {e}"));
        let step = ProofStep::Resolve {
            left: self.expect_id(a),
            right: self.expect_id(b),
            pivot,
            result: result.clone(),
        };
        self.push(step);
        result
    }

    pub fn weaken(&mut self, source: &Clause, result: Clause) {
        debug_assert!(source.is_subset(&result));
        let step = ProofStep::Weaken {
            source: self.expect_id(source),
            result,
        };
        self.push(step);
    }

    /// Re-emits steps whose ids are relative to `base`, translating by content.
    pub fn replay(&mut self, base: &[Clause], steps: &[ProofStep]) {
        let mut table: Vec<Clause> = base.to_vec();
        for step in steps {
            let lookup = |id: ClauseId| &table[id - 1];
            let emitted = match step {
                ProofStep::Resolve {
                    left,
                    right,
                    pivot,
                    result,
                } => ProofStep::Resolve {
                    left: self.expect_id(lookup(*left)),
                    right: self.expect_id(lookup(*right)),
                    pivot: *pivot,
                    result: result.clone(),
                },
                ProofStep::Weaken { source, result } => ProofStep::Weaken {
                    source: self.expect_id(lookup(*source)),
                    result: result.clone(),
                },
                other => other.clone(),
            };
            match step {
                ProofStep::Extend(e) => table.extend(e.clauses().expect("tautological extension")),
                s => table.push(s.result().unwrap().clone()),
            }
            self.push(emitted);
        }
    }

    pub fn finish(self, system: SystemTag) -> Proof {
        Proof {
            system,
            steps: self.steps,
        }
    }

    pub fn into_steps(self) -> Vec<ProofStep> {
        self.steps
    }
}
