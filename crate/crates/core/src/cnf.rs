//! Literals, clauses, CNFs, partial assignments and DIMACS I/O.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::num::NonZeroI32;
use std::ops::Not;

use indexmap::IndexSet;
use thiserror::Error;

/// Longest accepted input line, in bytes.
pub const MAX_LINE_BYTES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("literal code 0 is not a literal")]
    ZeroLiteral,
    #[error("variable {var} exceeds the declared variable count {num_vars}")]
    VariableOutOfRange { var: u32, num_vars: u32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: longer than {MAX_LINE_BYTES} bytes")]
    LineTooLong { line: usize },
}

/// A propositional variable, numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Var(u32);

impl Var {
    pub fn new(index: u32) -> Var {
        assert!(index > 0, "variables are numbered from 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn negative(self) -> Literal {
        Literal::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable or its negation, stored as a nonzero DIMACS code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal(NonZeroI32);

impl Literal {
    pub fn new(var: Var, positive: bool) -> Literal {
        let code = var.0 as i32;
        Literal(NonZeroI32::new(if positive { code } else { -code }).unwrap())
    }

    pub fn from_dimacs(code: i32) -> Result<Literal, CnfError> {
        NonZeroI32::new(code)
            .map(Literal)
            .ok_or(CnfError::ZeroLiteral)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0.get()
    }

    pub fn var(self) -> Var {
        Var(self.0.get().unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0.get() > 0
    }

    /// Dense index: `2 * (var - 1) + polarity`.
    pub fn code(self) -> usize {
        2 * (self.var().0 as usize - 1) + self.is_positive() as usize
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(-self.0)
    }
}

// Variable ascending, negative polarity first.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.var()
            .cmp(&other.var())
            .then(self.is_positive().cmp(&other.is_positive()))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Marker for a literal set containing a complementary pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tautology;

/// Result of [`normalize_clause`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Clause(Clause),
    Tautology,
}

/// A nontautological set of literals in canonical order. The empty clause is ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn empty() -> Clause {
        Clause(Vec::new())
    }

    pub fn unit(lit: Literal) -> Clause {
        Clause(vec![lit])
    }

    /// Sorts and deduplicates, failing on a complementary pair.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Result<Clause, Tautology> {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return Err(Tautology);
        }
        Ok(Clause(lits))
    }

    /// Builds a clause from DIMACS codes; panics on tautologies or zero codes.
    /// Intended for tests and fixed constructions.
    pub fn from_dimacs(codes: &[i32]) -> Clause {
        match normalize_clause(codes) {
            Ok(Normalized::Clause(c)) => c,
            Ok(Normalized::Tautology) => panic!("tautological clause {codes:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().copied()
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

    pub fn contains_var(&self, var: Var) -> bool {
        self.contains(var.positive()) || self.contains(var.negative())
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|l| l.var())
    }

    pub fn max_var(&self) -> Option<Var> {
        self.0.last().map(|l| l.var())
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Clause) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut rest = other.0.iter();
        'outer: for l in &self.0 {
            for m in rest.by_ref() {
                match m.cmp(l) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Clause) -> Result<Clause, Tautology> {
        Clause::new(self.iter().chain(other.iter()))
    }

    /// True when the union of the two literal sets is tautological.
    pub fn clashes_with(&self, other: &Clause) -> bool {
        self.iter().any(|l| other.contains(!l))
    }

    pub fn without(&self, lit: Literal) -> Clause {
        Clause(self.iter().filter(|&l| l != lit).collect())
    }

    pub fn with(&self, lit: Literal) -> Result<Clause, Tautology> {
        if self.contains(!lit) {
            return Err(Tautology);
        }
        let mut lits = self.0.clone();
        if let Err(pos) = lits.binary_search(&lit) {
            lits.insert(pos, lit);
        }
        Ok(Clause(lits))
    }

    /// `self ∖ other` as literal sets.
    pub fn difference(&self, other: &Clause) -> Clause {
        Clause(self.iter().filter(|&l| !other.contains(l)).collect())
    }

    /// The resolvent on `var`, if one side holds `var` and the other `¬var`.
    pub fn resolve(&self, other: &Clause, var: Var) -> Result<Clause, ResolveError> {
        let (pos, neg) = (var.positive(), var.negative());
        let orientation_ok = (self.contains(pos) && other.contains(neg))
            || (self.contains(neg) && other.contains(pos));
        if !orientation_ok {
            return Err(ResolveError::PivotMissing);
        }
        Clause::new(self.iter().chain(other.iter()).filter(|l| l.var() != var))
            .map_err(|_| ResolveError::Tautological)
    }

    /// Negation of every literal, as a list of units (the assignment ¬C).
    pub fn negation(&self) -> Vec<Literal> {
        self.iter().map(|l| !l).collect()
    }

    pub fn restrict(&self, alpha: &PartialAssignment) -> Restricted {
        if self.iter().any(|l| alpha.value(l) == Some(true)) {
            return Restricted::Satisfied;
        }
        Restricted::Clause(Clause(
            self.iter().filter(|&l| alpha.value(l).is_none()).collect(),
        ))
    }

    pub fn subsumes(&self, other: &Clause) -> bool {
        self.is_subset(other)
    }
}

impl serde::Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.to_dimacs())
    }
}

impl serde::Serialize for Clause {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("pivot does not occur with opposite signs in the premises")]
    PivotMissing,
    #[error("resolvent is tautological")]
    Tautological,
}

/// Result of restricting a clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Restricted {
    Satisfied,
    Clause(Clause),
}

/// Sorts, deduplicates, and detects complementary pairs.
pub fn normalize_clause(codes: &[i32]) -> Result<Normalized, CnfError> {
    let lits = codes
        .iter()
        .map(|&c| Literal::from_dimacs(c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match Clause::new(lits) {
        Ok(c) => Normalized::Clause(c),
        Err(Tautology) => Normalized::Tautology,
    })
}

/// A partial map from variables to truth values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialAssignment {
    bindings: BTreeMap<Var, bool>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// The assignment making each given literal true. Fails on a complementary pair.
    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Result<Self, Tautology> {
        let mut alpha = Self::new();
        for l in lits {
            if !alpha.assign(l) {
                return Err(Tautology);
            }
        }
        Ok(alpha)
    }

    /// Makes `lit` true. Returns false if its variable is already bound the other way.
    pub fn assign(&mut self, lit: Literal) -> bool {
        match self.bindings.insert(lit.var(), lit.is_positive()) {
            Some(prev) if prev != lit.is_positive() => {
                self.bindings.insert(lit.var(), prev);
                false
            }
            _ => true,
        }
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.bindings.insert(var, value);
    }

    pub fn value(&self, lit: Literal) -> Option<bool> {
        self.bindings
            .get(&lit.var())
            .map(|&v| v == lit.is_positive())
    }

    pub fn satisfies(&self, clause: &Clause) -> bool {
        clause.iter().any(|l| self.value(l) == Some(true))
    }

    pub fn satisfies_cnf(&self, cnf: &Cnf) -> bool {
        cnf.iter().all(|c| self.satisfies(c))
    }

    /// The literal-set view `{p : α(p) = 1}`.
    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.bindings.iter().map(|(&v, &b)| Literal::new(v, b))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// A set of clauses over a declared variable universe `1..=num_vars`.
///
/// Clauses keep their insertion order, which is the order used for clause ids
/// and DIMACS output. Equality is set equality plus equal `num_vars`.
#[derive(Debug, Clone, Default)]
pub struct Cnf {
    clauses: IndexSet<Clause>,
    num_vars: u32,
}

impl PartialEq for Cnf {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.same_clauses(other)
    }
}

impl Eq for Cnf {}

impl Cnf {
    pub fn new(num_vars: u32) -> Cnf {
        Cnf {
            clauses: IndexSet::new(),
            num_vars,
        }
    }

    /// Builds a CNF, rejecting clauses over variables beyond `num_vars`.
    pub fn from_clauses(
        num_vars: u32,
        clauses: impl IntoIterator<Item = Clause>,
    ) -> Result<Cnf, CnfError> {
        let mut cnf = Cnf::new(num_vars);
        for c in clauses {
            if let Some(v) = c.max_var() {
                if v.0 > num_vars {
                    return Err(CnfError::VariableOutOfRange { var: v.0, num_vars });
                }
            }
            cnf.clauses.insert(c);
        }
        Ok(cnf)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Raises the variable universe; never shrinks it.
    pub fn extend_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    /// Adds a clause, growing `num_vars` if needed. Returns false if already present.
    pub fn insert(&mut self, clause: Clause) -> bool {
        if let Some(v) = clause.max_var() {
            self.num_vars = self.num_vars.max(v.0);
        }
        self.clauses.insert(clause)
    }

    pub fn remove(&mut self, clause: &Clause) -> bool {
        self.clauses.shift_remove(clause)
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.clauses.contains(clause)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Clause> + '_ {
        self.clauses.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Clause> {
        self.clauses.get_index(index)
    }

    pub fn index_of(&self, clause: &Clause) -> Option<usize> {
        self.clauses.get_index_of(clause)
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.contains(&Clause::empty())
    }

    pub fn same_clauses(&self, other: &Cnf) -> bool {
        self.len() == other.len() && self.iter().all(|c| other.contains(c))
    }

    /// Clauses sorted in canonical order.
    pub fn canonical(&self) -> Vec<&Clause> {
        let mut v: Vec<&Clause> = self.clauses.iter().collect();
        v.sort();
        v
    }

    /// `var(Γ)`: the variables that actually occur.
    pub fn occurring_vars(&self) -> BTreeSet<Var> {
        self.iter().flat_map(|c| c.vars()).collect()
    }

    pub fn union(&self, other: &Cnf) -> Cnf {
        let mut out = self.clone();
        out.extend_vars(other.num_vars);
        for c in other.iter() {
            out.insert(c.clone());
        }
        out
    }

    /// `Γ|α`: satisfied clauses dropped, falsified literals removed.
    pub fn restrict(&self, alpha: &PartialAssignment) -> Cnf {
        let mut out = Cnf::new(self.num_vars);
        for c in self.iter() {
            if let Restricted::Clause(r) = c.restrict(alpha) {
                out.insert(r);
            }
        }
        out
    }

    /// `proj_p(Γ) = {C ∖ {p} : C ∈ Γ, p ∈ C}`.
    pub fn project(&self, p: Literal) -> Cnf {
        let mut out = Cnf::new(self.num_vars);
        for c in self.iter().filter(|c| c.contains(p)) {
            out.insert(c.without(p));
        }
        out
    }

    /// `self ⊒ other`: every clause of `other` contains some clause of `self`.
    pub fn subsumes(&self, other: &Cnf) -> bool {
        other.iter().all(|d| self.iter().any(|c| c.is_subset(d)))
    }
}

impl FromIterator<Clause> for Cnf {
    fn from_iter<T: IntoIterator<Item = Clause>>(iter: T) -> Self {
        let mut cnf = Cnf::new(0);
        for c in iter {
            cnf.insert(c);
        }
        cnf
    }
}

/// Reads DIMACS CNF text.
///
/// Tautological clauses are dropped and duplicate clauses collapse; both are
/// logged as warnings, as is a clause count that disagrees with the header.
pub fn parse_dimacs(text: &str) -> Result<Cnf, CnfError> {
    let mut header: Option<(u32, usize)> = None;
    let mut cnf = Cnf::new(0);
    let mut pending: Vec<i32> = Vec::new();
    let mut clause_count = 0usize;
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        if line.len() > MAX_LINE_BYTES {
            return Err(CnfError::LineTooLong { line: lineno });
        }
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(lineno, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = fields[2]
                .parse::<u32>()
                .map_err(|_| parse_err(lineno, "bad variable count"))?;
            let clauses = fields[3]
                .parse::<usize>()
                .map_err(|_| parse_err(lineno, "bad clause count"))?;
            if vars > i32::MAX as u32 {
                return Err(parse_err(lineno, "variable count too large"));
            }
            cnf = Cnf::new(vars);
            header = Some((vars, clauses));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(parse_err(lineno, "clause before `p cnf` header"));
        };
        for tok in trimmed.split_whitespace() {
            let code: i32 = tok
                .parse()
                .map_err(|_| parse_err(lineno, &format!("malformed token `{tok}`")))?;
            if code == 0 {
                clause_count += 1;
                match normalize_clause(&pending)? {
                    Normalized::Clause(c) => {
                        if !cnf.clauses.insert(c) {
                            log::warn!("line {lineno}: duplicate clause ignored");
                        }
                    }
                    Normalized::Tautology => {
                        log::warn!("line {lineno}: tautological clause dropped");
                    }
                }
                pending.clear();
            } else {
                if code.unsigned_abs() > num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        var: code.unsigned_abs(),
                        num_vars,
                    });
                }
                pending.push(code);
            }
        }
    }
    let Some((_, declared)) = header else {
        return Err(parse_err(last_line.max(1), "missing `p cnf` header"));
    };
    if !pending.is_empty() {
        return Err(parse_err(last_line, "last clause is not terminated by 0"));
    }
    if declared != clause_count {
        log::warn!("header declares {declared} clauses, found {clause_count}");
    }
    Ok(cnf)
}

fn parse_err(line: usize, msg: &str) -> CnfError {
    CnfError::Parse {
        line,
        msg: msg.to_string(),
    }
}

/// Canonical DIMACS text: header, then one clause per line in insertion order.
pub fn write_dimacs(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars(), cnf.len());
    for c in cnf.iter() {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}
