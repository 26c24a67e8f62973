//! decolog: a workbench for the decorated equational logic of computational
//! effects.
//!
//! The calculus decorates each term with its interaction level per effect —
//! exceptions (pure / thrower / catcher) and mutable state (pure / accessor /
//! modifier) — and distinguishes weak from strong equality between parallel
//! terms. On top of that sit:
//!
//! * [`signature`] — the ambient vocabulary (base types, exceptions,
//!   locations, pure operations) and its file format;
//! * [`terms`] — term formers, typing with decoration inference, duality,
//!   parsing and printing;
//! * [`logic`] — the three rule sets (`EXC`, `ST`, `COMBINED`) as data plus
//!   the instantiation and application engine;
//! * [`proofs`] — the proof-script language and checker;
//! * [`semantics`] — exhaustive finite-model semantics used as the oracle:
//!   every term denotes a total function, equations are decided by
//!   enumeration, and whole rule sets can be validated instance by instance;
//! * [`imp`] — a small imperative language with exceptions, its big-step
//!   interpreter, and the translation into decorated terms.
//!
//! Everything is deterministic: enumeration follows declaration order, and
//! loops get explicit fuel with a distinguished timeout outcome.

pub mod bundle;
pub mod imp;
pub mod lex;
pub mod logic;
pub mod proofs;
pub mod semantics;
pub mod signature;
pub mod terms;
