//! Clausal proof systems with redundancy rules: clauses and CNFs, unit
//! propagation, blocked/RAT/set-blocked clause checks, a checker for
//! resolution, BC, RAT, SBC, GER and ER proofs, generators for pigeonhole
//! formulas and their proofs, and the RAT-to-BC simulation.

pub mod builders;
pub mod check;
pub mod cnf;
pub mod oracle;
pub mod proof;
pub mod propagation;
pub mod redundancy;
pub mod simulation;

pub use check::{check, check_derivation, CheckReport, Verdict};
pub use cnf::{Clause, Cnf, Literal, PartialAssignment, Var};
pub use proof::{ErProof, Proof, ProofStep, SystemTag};
