//! Instantiation and application of rule schemas.
//!
//! Axioms are instantiated from positional arguments; rules are applied to
//! previously derived premises plus explicit `with`-bindings. Premises are
//! matched structurally against the schema trees — already-bound term
//! variables compare modulo composition associativity, everything else is
//! literal — and there is no unification search.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::logic::rules::{
    find_rules, Effect, EqPat, FamilyKind, ParamKind, Rule, RuleSet, SFlagPat, SPat, SideCond,
    TPat, TyPat,
};
use crate::logic::{Equation, Strength};
use crate::signature::Signature;
use crate::terms::{infer, DType, DecoratedTerm, InferError};

/// An explicit argument or binding value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Term(DecoratedTerm),
    Name(String),
    Strength(Strength),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Term(t) => write!(f, "{t}"),
            Arg::Name(n) => write!(f, "{n}"),
            Arg::Strength(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Binding {
    Term(DecoratedTerm),
    Ty(DType),
    ExcName(String),
    LocName(String),
    Strength(Strength),
    Flag(bool),
}

type Bindings = BTreeMap<String, Binding>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unknown rule `{name}` in rule set {rs}")]
    UnknownRule { name: String, rs: RuleSet },
    #[error("`{name}` has premises and must be applied as a rule, not instantiated as an axiom")]
    NotAnAxiom { name: String },
    #[error("rule `{rule}` expects {expected} argument(s), got {got}")]
    Arity { rule: String, expected: usize, got: usize },
    #[error("rule `{rule}`: argument {index} must be {expected}")]
    ArgKind { rule: String, index: usize, expected: &'static str },
    #[error("rule `{rule}`: `{name}` is not a declared {kind}")]
    UnknownArgName { rule: String, name: String, kind: &'static str },
    #[error("rule `{rule}` expects {expected} premise(s), got {got}")]
    PremiseCount { rule: String, expected: usize, got: usize },
    #[error("rule `{rule}`, premise {index}: {msg}")]
    PremiseMismatch { rule: String, index: usize, msg: String },
    #[error("rule `{rule}`: side condition violated: {msg}")]
    SideCondition { rule: String, msg: String },
    #[error("rule `{rule}`: metavariable `{var}` is unbound; provide it with `with {var} := ...`")]
    Unbound { rule: String, var: String },
    #[error("rule `{rule}`: instantiation is ill-typed: {err}")]
    IllTyped { rule: String, err: InferError },
    #[error("rule `{rule}`: conclusion sides are not parallel: {lhs} vs {rhs}")]
    NotParallel { rule: String, lhs: String, rhs: String },
}

/// Instantiate an axiom schema with positional parameters, producing its
/// conclusion. Family names (`R8`, `R0`, ...) try their members in order.
pub fn instantiate_axiom(
    name: &str,
    args: &[Arg],
    sig: &Signature,
    which: RuleSet,
) -> Result<Equation, LogicError> {
    let rules = ruleset_for(which);
    let candidates = find_rules(&rules, name);
    if candidates.is_empty() {
        return Err(LogicError::UnknownRule { name: name.to_string(), rs: which });
    }
    let mut first_err = None;
    for r in &candidates {
        if !r.is_axiom() {
            first_err.get_or_insert(LogicError::NotAnAxiom { name: r.name.to_string() });
            continue;
        }
        match instantiate(r, args, sig) {
            Ok(eq) => return Ok(eq),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one candidate"))
}

/// Apply a rule to premises derived earlier, with explicit bindings for
/// metavariables that matching cannot determine.
pub fn apply_rule(
    name: &str,
    premises: &[Equation],
    bindings: &[(String, Arg)],
    sig: &Signature,
    which: RuleSet,
) -> Result<Equation, LogicError> {
    let rules = ruleset_for(which);
    let candidates = find_rules(&rules, name);
    if candidates.is_empty() {
        return Err(LogicError::UnknownRule { name: name.to_string(), rs: which });
    }
    let mut first_err = None;
    for r in &candidates {
        match apply_one(r, premises, bindings, sig) {
            Ok(eq) => return Ok(eq),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one candidate"))
}

fn ruleset_for(which: RuleSet) -> Vec<Rule> {
    crate::logic::rules::ruleset(which)
}

fn instantiate(r: &Rule, args: &[Arg], sig: &Signature) -> Result<Equation, LogicError> {
    if args.len() != r.params.len() {
        return Err(LogicError::Arity {
            rule: r.name.to_string(),
            expected: r.params.len(),
            got: args.len(),
        });
    }
    let mut b = Bindings::new();
    for (index, ((var, kind), arg)) in r.params.iter().zip(args).enumerate() {
        bind_arg(r, &mut b, var, *kind, arg, index, sig)?;
    }
    check_sides(r, &b, sig)?;
    conclude(r, &b, sig)
}

fn apply_one(
    r: &Rule,
    premises: &[Equation],
    bindings: &[(String, Arg)],
    sig: &Signature,
) -> Result<Equation, LogicError> {
    let mut b = Bindings::new();
    for (var, arg) in bindings {
        let binding = match arg {
            Arg::Term(t) => Binding::Term(t.clone()),
            Arg::Strength(s) => Binding::Strength(*s),
            Arg::Name(n) => {
                // Kind determined by the declaration; exceptions win ties.
                if sig.exception_value_type(n).is_some() {
                    Binding::ExcName(n.clone())
                } else if sig.location_value_type(n).is_some() {
                    Binding::LocName(n.clone())
                } else {
                    return Err(LogicError::UnknownArgName {
                        rule: r.name.to_string(),
                        name: n.clone(),
                        kind: "exception or location",
                    });
                }
            }
        };
        b.insert(var.clone(), binding);
    }

    if let Some(fam) = &r.family {
        let names: Vec<String> = match fam.kind {
            FamilyKind::AllExceptions => sig.exceptions().map(|(n, _)| n.to_string()).collect(),
            FamilyKind::AllLocations => sig.locations().map(|(n, _)| n.to_string()).collect(),
        };
        if premises.len() != names.len() {
            return Err(LogicError::PremiseCount {
                rule: r.name.to_string(),
                expected: names.len(),
                got: premises.len(),
            });
        }
        for (i, (name, prem)) in names.iter().zip(premises).enumerate() {
            let binding = match fam.kind {
                FamilyKind::AllExceptions => Binding::ExcName(name.clone()),
                FamilyKind::AllLocations => Binding::LocName(name.clone()),
            };
            b.insert(fam.var.to_string(), binding);
            match_premise(r, i, &fam.schema, prem, &mut b, sig)?;
        }
        b.remove(fam.var);
    } else {
        if premises.len() != r.premises.len() {
            return Err(LogicError::PremiseCount {
                rule: r.name.to_string(),
                expected: r.premises.len(),
                got: premises.len(),
            });
        }
        for (i, (schema, prem)) in r.premises.iter().zip(premises).enumerate() {
            match_premise(r, i, schema, prem, &mut b, sig)?;
        }
    }

    check_sides(r, &b, sig)?;
    conclude(r, &b, sig)
}

// ---------------------------------------------------------------------
// Argument binding.

fn bind_arg(
    r: &Rule,
    b: &mut Bindings,
    var: &str,
    kind: ParamKind,
    arg: &Arg,
    index: usize,
    sig: &Signature,
) -> Result<(), LogicError> {
    let wrong = |expected: &'static str| LogicError::ArgKind {
        rule: r.name.to_string(),
        index: index + 1,
        expected,
    };
    let binding = match (kind, arg) {
        (ParamKind::Term, Arg::Term(t)) => Binding::Term(t.clone()),
        (ParamKind::Strength, Arg::Strength(s)) => Binding::Strength(*s),
        (ParamKind::ExcName, Arg::Name(n)) => {
            if sig.exception_value_type(n).is_none() {
                return Err(LogicError::UnknownArgName {
                    rule: r.name.to_string(),
                    name: n.clone(),
                    kind: "exception",
                });
            }
            Binding::ExcName(n.clone())
        }
        (ParamKind::LocName, Arg::Name(n)) => {
            if sig.location_value_type(n).is_none() {
                return Err(LogicError::UnknownArgName {
                    rule: r.name.to_string(),
                    name: n.clone(),
                    kind: "location",
                });
            }
            Binding::LocName(n.clone())
        }
        (ParamKind::Term, _) => return Err(wrong("a term")),
        (ParamKind::Strength, _) => return Err(wrong("a strength (==, ~exc, ~st or ~~)")),
        (ParamKind::ExcName, _) => return Err(wrong("an exception name")),
        (ParamKind::LocName, _) => return Err(wrong("a location name")),
    };
    b.insert(var.to_string(), binding);
    Ok(())
}

// ---------------------------------------------------------------------
// Premise matching.

fn pat_vars(p: &TPat, out: &mut Vec<String>) {
    match p {
        TPat::Var(v) => out.push(v.to_string()),
        TPat::Comp(a, b) | TPat::Copair(a, b) | TPat::Pair(a, b) => {
            pat_vars(a, out);
            pat_vars(b, out);
        }
        TPat::If(x, y, z) => {
            pat_vars(x, out);
            pat_vars(y, out);
            pat_vars(z, out);
        }
        TPat::While(x, y) => {
            pat_vars(x, out);
            pat_vars(y, out);
        }
        TPat::Id(t) | TPat::FromEmpty(t) | TPat::ToUnit(t) => ty_vars(t, out),
        TPat::Inl(a, b) | TPat::Inr(a, b) | TPat::Proj1(a, b) | TPat::Proj2(a, b) => {
            ty_vars(a, out);
            ty_vars(b, out);
        }
        TPat::Tag(n) | TPat::Untag(n) | TPat::Lookup(n) | TPat::Update(n) => {
            out.push(n.to_string())
        }
    }
}

fn ty_vars(t: &TyPat, out: &mut Vec<String>) {
    match t {
        TyPat::Var(v) => out.push(v.to_string()),
        TyPat::ValueOf(n) => out.push(n.to_string()),
        TyPat::SourceOf(v) | TyPat::TargetOf(v) | TyPat::SumRightOfTarget(v) => {
            out.push(v.to_string())
        }
        TyPat::Empty | TyPat::Unit => {}
    }
}

fn match_premise(
    r: &Rule,
    index: usize,
    schema: &EqPat,
    supplied: &Equation,
    b: &mut Bindings,
    sig: &Signature,
) -> Result<(), LogicError> {
    let mismatch = |msg: String| LogicError::PremiseMismatch {
        rule: r.name.to_string(),
        index: index + 1,
        msg,
    };
    match_strength(&schema.strength, supplied.strength, b)
        .map_err(|m| mismatch(format!("strength: {m}")))?;
    for (pat, side, label) in
        [(&schema.lhs, &supplied.lhs, "left"), (&schema.rhs, &supplied.rhs, "right")]
    {
        let mut vars = Vec::new();
        pat_vars(pat, &mut vars);
        let fully_bound = vars.iter().all(|v| b.contains_key(v));
        if fully_bound {
            let derived = subst_term(r, pat, b, sig)?;
            if derived.normalize_assoc() != side.normalize_assoc() {
                return Err(mismatch(format!(
                    "{label} side: expected `{derived}`, found `{side}`"
                )));
            }
        } else {
            match_term(pat, side, b, sig).map_err(|m| mismatch(format!("{label} side: {m}")))?;
        }
    }
    Ok(())
}

// Plain-string errors inside matching; wrapped with context by the caller.
fn match_term(
    pat: &TPat,
    term: &DecoratedTerm,
    b: &mut Bindings,
    sig: &Signature,
) -> Result<(), String> {
    use DecoratedTerm as T;
    match (pat, term) {
        (TPat::Var(v), t) => match b.get(*v) {
            Some(Binding::Term(bound)) => {
                if bound.normalize_assoc() == t.normalize_assoc() {
                    Ok(())
                } else {
                    Err(format!("`{v}` already stands for `{bound}`, cannot also match `{t}`"))
                }
            }
            Some(_) => Err(format!("`{v}` is not a term variable")),
            None => {
                b.insert(v.to_string(), Binding::Term(t.clone()));
                Ok(())
            }
        },
        (TPat::Id(tp), T::Id(ty)) => match_ty(tp, ty, b, sig),
        (TPat::Comp(p1, p2), T::Comp(t1, t2)) => {
            match_term(p1, t1, b, sig)?;
            match_term(p2, t2, b, sig)
        }
        (TPat::Copair(p1, p2), T::Copair(t1, t2))
        | (TPat::Pair(p1, p2), T::Pair(t1, t2)) => {
            match_term(p1, t1, b, sig)?;
            match_term(p2, t2, b, sig)
        }
        (TPat::Inl(pa, pb), T::Inl(a, b2)) | (TPat::Inr(pa, pb), T::Inr(a, b2)) => {
            match_ty(pa, a, b, sig)?;
            match_ty(pb, b2, b, sig)
        }
        (TPat::Proj1(pa, pb), T::Proj1(a, b2)) | (TPat::Proj2(pa, pb), T::Proj2(a, b2)) => {
            match_ty(pa, a, b, sig)?;
            match_ty(pb, b2, b, sig)
        }
        (TPat::FromEmpty(tp), T::FromEmpty(ty)) | (TPat::ToUnit(tp), T::ToUnit(ty)) => {
            match_ty(tp, ty, b, sig)
        }
        (TPat::Tag(nv), T::Tag(n)) | (TPat::Untag(nv), T::Untag(n)) => {
            match_name(nv, n, true, b)
        }
        (TPat::Lookup(nv), T::Lookup(n)) | (TPat::Update(nv), T::Update(n)) => {
            match_name(nv, n, false, b)
        }
        (TPat::If(pb, pf, pg), T::If(tb, tf, tg)) => {
            match_term(pb, tb, b, sig)?;
            match_term(pf, tf, b, sig)?;
            match_term(pg, tg, b, sig)
        }
        (TPat::While(pb, pf), T::While(tb, tf)) => {
            match_term(pb, tb, b, sig)?;
            match_term(pf, tf, b, sig)
        }
        (pat, term) => Err(format!("shape mismatch: found `{term}` where {} was expected", pat_kind(pat))),
    }
}

fn pat_kind(p: &TPat) -> String {
    match p {
        TPat::Var(v) => format!("`{v}`"),
        TPat::Id(_) => "an identity".into(),
        TPat::Comp(..) => "a composition".into(),
        TPat::Copair(..) => "a copair".into(),
        TPat::Pair(..) => "a pair".into(),
        TPat::Inl(..) => "inl".into(),
        TPat::Inr(..) => "inr".into(),
        TPat::Proj1(..) => "pi1".into(),
        TPat::Proj2(..) => "pi2".into(),
        TPat::FromEmpty(_) => "from0".into(),
        TPat::ToUnit(_) => "to1".into(),
        TPat::Tag(_) => "a tag".into(),
        TPat::Untag(_) => "an untag".into(),
        TPat::Lookup(_) => "a lookup".into(),
        TPat::Update(_) => "an update".into(),
        TPat::If(..) => "an if".into(),
        TPat::While(..) => "a while".into(),
    }
}

fn match_name(var: &str, name: &str, is_exc: bool, b: &mut Bindings) -> Result<(), String> {
    let expected = if is_exc {
        Binding::ExcName(name.to_string())
    } else {
        Binding::LocName(name.to_string())
    };
    match b.get(var) {
        Some(bound) if *bound == expected => Ok(()),
        Some(_) => Err(format!("name variable `{var}` matched inconsistently")),
        None => {
            b.insert(var.to_string(), expected);
            Ok(())
        }
    }
}

fn match_ty(pat: &TyPat, ty: &DType, b: &mut Bindings, sig: &Signature) -> Result<(), String> {
    match pat {
        TyPat::Var(v) => match b.get(*v) {
            Some(Binding::Ty(bound)) => {
                if bound == ty {
                    Ok(())
                } else {
                    Err(format!("type variable `{v}` matched both {bound} and {ty}"))
                }
            }
            Some(_) => Err(format!("`{v}` is not a type variable")),
            None => {
                b.insert(v.to_string(), Binding::Ty(ty.clone()));
                Ok(())
            }
        },
        TyPat::Empty => {
            if *ty == DType::Empty {
                Ok(())
            } else {
                Err(format!("expected the empty type, found {ty}"))
            }
        }
        TyPat::Unit => {
            if *ty == DType::Unit {
                Ok(())
            } else {
                Err(format!("expected the unit type, found {ty}"))
            }
        }
        resolved => {
            // Accessor patterns: resolvable only once their variables are
            // bound; compare the resolved type.
            let expected = resolve_ty(resolved, b, sig).map_err(|e| e.to_string())?;
            if expected == *ty {
                Ok(())
            } else {
                Err(format!("expected {expected}, found {ty}"))
            }
        }
    }
}

fn match_strength(pat: &SPat, s: Strength, b: &mut Bindings) -> Result<(), String> {
    match pat {
        SPat::Lit(expected) => {
            if *expected == s {
                Ok(())
            } else {
                Err(format!("expected {expected}, found {s}"))
            }
        }
        SPat::Whole(v) => match b.get(*v) {
            Some(Binding::Strength(bound)) => {
                if *bound == s {
                    Ok(())
                } else {
                    Err(format!("premises use different strengths: {bound} vs {s}"))
                }
            }
            Some(_) => Err(format!("`{v}` is not a strength variable")),
            None => {
                b.insert(v.to_string(), Binding::Strength(s));
                Ok(())
            }
        },
        SPat::Flags(fx, fs) => {
            match_flag(fx, s.exc_strict, b)?;
            match_flag(fs, s.st_strict, b)
        }
    }
}

fn match_flag(pat: &SFlagPat, flag: bool, b: &mut Bindings) -> Result<(), String> {
    match pat {
        SFlagPat::Lit(expected) => {
            if *expected == flag {
                Ok(())
            } else if *expected {
                Err("expected a strict flag, found weak".into())
            } else {
                Err("expected a weak flag, found strict".into())
            }
        }
        SFlagPat::Var(v) => match b.get(*v) {
            Some(Binding::Flag(bound)) => {
                if *bound == flag {
                    Ok(())
                } else {
                    Err(format!("flag variable `{v}` matched inconsistently"))
                }
            }
            Some(_) => Err(format!("`{v}` is not a flag variable")),
            None => {
                b.insert(v.to_string(), Binding::Flag(flag));
                Ok(())
            }
        },
    }
}

// ---------------------------------------------------------------------
// Substitution into patterns.

fn get_term<'a>(r: &Rule, b: &'a Bindings, v: &str) -> Result<&'a DecoratedTerm, LogicError> {
    match b.get(v) {
        Some(Binding::Term(t)) => Ok(t),
        _ => Err(LogicError::Unbound { rule: r.name.to_string(), var: v.to_string() }),
    }
}

fn term_arrow(
    r: &Rule,
    b: &Bindings,
    v: &str,
    sig: &Signature,
) -> Result<crate::terms::Arrow, LogicError> {
    let t = get_term(r, b, v)?;
    infer(t, sig).map_err(|err| LogicError::IllTyped { rule: r.name.to_string(), err })
}

fn resolve_ty(pat: &TyPat, b: &Bindings, sig: &Signature) -> Result<DType, String> {
    match pat {
        TyPat::Var(v) => match b.get(*v) {
            Some(Binding::Ty(t)) => Ok(t.clone()),
            _ => Err(format!("type variable `{v}` is unbound")),
        },
        TyPat::Empty => Ok(DType::Empty),
        TyPat::Unit => Ok(DType::Unit),
        TyPat::ValueOf(n) => match b.get(*n) {
            Some(Binding::ExcName(name)) => sig
                .exception_value_type(name)
                .map(DType::base)
                .ok_or_else(|| format!("`{name}` is not a declared exception")),
            Some(Binding::LocName(name)) => sig
                .location_value_type(name)
                .map(DType::base)
                .ok_or_else(|| format!("`{name}` is not a declared location")),
            _ => Err(format!("name variable `{n}` is unbound")),
        },
        TyPat::SourceOf(v) | TyPat::TargetOf(v) | TyPat::SumRightOfTarget(v) => {
            let t = match b.get(*v) {
                Some(Binding::Term(t)) => t,
                _ => return Err(format!("term variable `{v}` is unbound")),
            };
            let arrow = infer(t, sig).map_err(|e| e.to_string())?;
            match pat {
                TyPat::SourceOf(_) => Ok(arrow.source),
                TyPat::TargetOf(_) => Ok(arrow.target),
                TyPat::SumRightOfTarget(_) => match arrow.target {
                    DType::Sum(_, r) => Ok(*r),
                    other => {
                        Err(format!("target of `{v}` must be a sum type, found {other}"))
                    }
                },
                _ => unreachable!(),
            }
        }
    }
}

fn subst_ty(r: &Rule, pat: &TyPat, b: &Bindings, sig: &Signature) -> Result<DType, LogicError> {
    resolve_ty(pat, b, sig).map_err(|msg| match pat {
        TyPat::Var(v) => LogicError::Unbound { rule: r.name.to_string(), var: v.to_string() },
        _ => LogicError::SideCondition { rule: r.name.to_string(), msg },
    })
}

fn subst_term(
    r: &Rule,
    pat: &TPat,
    b: &Bindings,
    sig: &Signature,
) -> Result<DecoratedTerm, LogicError> {
    use DecoratedTerm as T;
    Ok(match pat {
        TPat::Var(v) => get_term(r, b, v)?.clone(),
        TPat::Id(t) => T::Id(subst_ty(r, t, b, sig)?),
        TPat::Comp(a, c) => {
            T::comp(subst_term(r, a, b, sig)?, subst_term(r, c, b, sig)?)
        }
        TPat::Copair(a, c) => {
            T::copair(subst_term(r, a, b, sig)?, subst_term(r, c, b, sig)?)
        }
        TPat::Pair(a, c) => T::pair(subst_term(r, a, b, sig)?, subst_term(r, c, b, sig)?),
        TPat::Inl(a, c) => T::Inl(subst_ty(r, a, b, sig)?, subst_ty(r, c, b, sig)?),
        TPat::Inr(a, c) => T::Inr(subst_ty(r, a, b, sig)?, subst_ty(r, c, b, sig)?),
        TPat::Proj1(a, c) => T::Proj1(subst_ty(r, a, b, sig)?, subst_ty(r, c, b, sig)?),
        TPat::Proj2(a, c) => T::Proj2(subst_ty(r, a, b, sig)?, subst_ty(r, c, b, sig)?),
        TPat::FromEmpty(t) => T::FromEmpty(subst_ty(r, t, b, sig)?),
        TPat::ToUnit(t) => T::ToUnit(subst_ty(r, t, b, sig)?),
        TPat::Tag(n) => T::Tag(subst_name(r, n, b)?),
        TPat::Untag(n) => T::Untag(subst_name(r, n, b)?),
        TPat::Lookup(n) => T::Lookup(subst_name(r, n, b)?),
        TPat::Update(n) => T::Update(subst_name(r, n, b)?),
        TPat::If(x, y, z) => T::cond(
            subst_term(r, x, b, sig)?,
            subst_term(r, y, b, sig)?,
            subst_term(r, z, b, sig)?,
        ),
        TPat::While(x, y) => {
            T::while_loop(subst_term(r, x, b, sig)?, subst_term(r, y, b, sig)?)
        }
    })
}

fn subst_name(r: &Rule, var: &str, b: &Bindings) -> Result<String, LogicError> {
    match b.get(var) {
        Some(Binding::ExcName(n)) | Some(Binding::LocName(n)) => Ok(n.clone()),
        _ => Err(LogicError::Unbound { rule: r.name.to_string(), var: var.to_string() }),
    }
}

fn subst_strength(r: &Rule, pat: &SPat, b: &Bindings) -> Result<Strength, LogicError> {
    match pat {
        SPat::Lit(s) => Ok(*s),
        SPat::Whole(v) => match b.get(*v) {
            Some(Binding::Strength(s)) => Ok(*s),
            _ => Err(LogicError::Unbound { rule: r.name.to_string(), var: v.to_string() }),
        },
        SPat::Flags(a, c) => {
            Ok(Strength::new(subst_flag(r, a, b)?, subst_flag(r, c, b)?))
        }
    }
}

fn subst_flag(r: &Rule, pat: &SFlagPat, b: &Bindings) -> Result<bool, LogicError> {
    match pat {
        SFlagPat::Lit(v) => Ok(*v),
        SFlagPat::Var(v) => match b.get(*v) {
            Some(Binding::Flag(f)) => Ok(*f),
            _ => Err(LogicError::Unbound { rule: r.name.to_string(), var: v.to_string() }),
        },
    }
}

// ---------------------------------------------------------------------
// Side conditions and the conclusion.

fn check_sides(r: &Rule, b: &Bindings, sig: &Signature) -> Result<(), LogicError> {
    for side in &r.sides {
        match side {
            SideCond::DecAtMost { term, effect, max } => {
                let dec = term_arrow(r, b, term, sig)?.dec;
                let (level, what) = match effect {
                    Effect::Exc => (dec.exc, "exception"),
                    Effect::St => (dec.st, "state"),
                };
                if level > *max {
                    return Err(LogicError::SideCondition {
                        rule: r.name.to_string(),
                        msg: format!(
                            "term bound to `{term}` must have {what} decoration at most \
                             ({max}), has ({level})"
                        ),
                    });
                }
            }
            SideCond::PureIfWeak { flag, effect, term } => {
                let weak = match b.get(*flag) {
                    Some(Binding::Flag(f)) => !f,
                    _ => {
                        return Err(LogicError::Unbound {
                            rule: r.name.to_string(),
                            var: flag.to_string(),
                        })
                    }
                };
                if weak {
                    let dec = term_arrow(r, b, term, sig)?.dec;
                    let (level, what) = match effect {
                        Effect::Exc => (dec.exc, "exception"),
                        Effect::St => (dec.st, "state"),
                    };
                    if level != 0 {
                        return Err(LogicError::SideCondition {
                            rule: r.name.to_string(),
                            msg: format!(
                                "the substituted term `{term}` must be {what}-pure under a \
                                 {what}-weak premise, has decoration ({level})"
                            ),
                        });
                    }
                }
            }
            SideCond::DistinctNames(a, c) => {
                let na = subst_name(r, a, b)?;
                let nc = subst_name(r, c, b)?;
                if na == nc {
                    return Err(LogicError::SideCondition {
                        rule: r.name.to_string(),
                        msg: format!("names must differ, both are `{na}`"),
                    });
                }
            }
            SideCond::SourceIsEmpty(v) => {
                let arrow = term_arrow(r, b, v, sig)?;
                if arrow.source != DType::Empty {
                    return Err(LogicError::SideCondition {
                        rule: r.name.to_string(),
                        msg: format!(
                            "term bound to `{v}` must have source 0, has {}",
                            arrow.source
                        ),
                    });
                }
            }
            SideCond::TargetIsUnit(v) => {
                let arrow = term_arrow(r, b, v, sig)?;
                if arrow.target != DType::Unit {
                    return Err(LogicError::SideCondition {
                        rule: r.name.to_string(),
                        msg: format!(
                            "term bound to `{v}` must have target 1, has {}",
                            arrow.target
                        ),
                    });
                }
            }
        }
    }
    Ok(())
}

fn conclude(r: &Rule, b: &Bindings, sig: &Signature) -> Result<Equation, LogicError> {
    let lhs = subst_term(r, &r.conclusion.lhs, b, sig)?;
    let rhs = subst_term(r, &r.conclusion.rhs, b, sig)?;
    let strength = subst_strength(r, &r.conclusion.strength, b)?;
    let la =
        infer(&lhs, sig).map_err(|err| LogicError::IllTyped { rule: r.name.to_string(), err })?;
    let ra =
        infer(&rhs, sig).map_err(|err| LogicError::IllTyped { rule: r.name.to_string(), err })?;
    if la.source != ra.source || la.target != ra.target {
        return Err(LogicError::NotParallel {
            rule: r.name.to_string(),
            lhs: format!("{lhs} : {la}"),
            rhs: format!("{rhs} : {ra}"),
        });
    }
    Ok(Equation::new(lhs, rhs, strength))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_signature;
    use crate::terms::parse_term;

    fn sig() -> Signature {
        parse_signature(
            "base EV\nbase Val\nexception T : EV\nexception R : EV\n\
             location X : Val\nlocation Y : Val\n",
        )
        .unwrap()
    }

    fn term(src: &str) -> DecoratedTerm {
        parse_term(src, &sig()).unwrap()
    }

    #[test]
    fn r11_instantiates_to_the_weak_equation() {
        let eq =
            instantiate_axiom("R11", &[Arg::Name("T".into())], &sig(), RuleSet::Exc).unwrap();
        assert_eq!(eq.lhs, term("untag[T] o tag[T]"));
        assert_eq!(eq.rhs, term("id[EV]"));
        assert_eq!(eq.strength, Strength::WEAK_EXC);
    }

    #[test]
    fn r12_requires_distinct_names() {
        let err = instantiate_axiom(
            "R12",
            &[Arg::Name("T".into()), Arg::Name("T".into())],
            &sig(),
            RuleSet::Exc,
        )
        .unwrap_err();
        match err {
            LogicError::SideCondition { msg, .. } => assert!(msg.contains("must differ"), "{msg}"),
            other => panic!("expected side-condition error, got {other:?}"),
        }
    }

    #[test]
    fn r11_prime_instantiates_in_st() {
        let eq =
            instantiate_axiom("R11'", &[Arg::Name("X".into())], &sig(), RuleSet::St).unwrap();
        assert_eq!(eq.lhs, term("lookup[X] o update[X]"));
        assert_eq!(eq.rhs, term("id[Val]"));
        assert_eq!(eq.strength, Strength::WEAK_ST);
    }

    #[test]
    fn r11_prime_is_not_in_exc() {
        let err = instantiate_axiom("R11'", &[Arg::Name("X".into())], &sig(), RuleSet::Exc)
            .unwrap_err();
        assert!(matches!(err, LogicError::UnknownRule { .. }));
    }

    #[test]
    fn r6_substitutes_pure_terms_under_weak_premises() {
        let s = sig();
        let premise = Equation::new(
            term("untag[T] o tag[T]"),
            term("id[EV]"),
            Strength::WEAK_EXC,
        );
        let eq = apply_rule(
            "R6",
            &[premise],
            &[("g".into(), Arg::Term(term("from0[EV]")))],
            &s,
            RuleSet::Exc,
        )
        .unwrap();
        assert_eq!(eq.lhs, term("(untag[T] o tag[T]) o from0[EV]"));
        assert_eq!(eq.rhs, term("id[EV] o from0[EV]"));
        assert_eq!(eq.strength, Strength::WEAK_EXC);
    }

    #[test]
    fn r6_rejects_impure_substitution_under_weak_premise() {
        let s = sig();
        let premise = Equation::new(
            term("untag[T] o tag[T]"),
            term("id[EV]"),
            Strength::WEAK_EXC,
        );
        let err = apply_rule(
            "R6",
            &[premise],
            &[("g".into(), Arg::Term(term("tag[T]")))],
            &s,
            RuleSet::Exc,
        )
        .unwrap_err();
        match err {
            LogicError::SideCondition { msg, .. } => {
                assert!(msg.contains("exception-pure"), "{msg}")
            }
            other => panic!("expected side-condition error, got {other:?}"),
        }
    }

    #[test]
    fn r6_allows_impure_substitution_under_strong_premise() {
        let s = sig();
        let premise =
            Equation::new(term("id[EV]"), term("untag[T] o tag[T] o id[EV]"), Strength::STRONG);
        // Strong premise: the exception flag is strict, so g may throw.
        let eq = apply_rule(
            "R6",
            &[premise],
            &[("g".into(), Arg::Term(term("untag[T] o tag[R]")))],
            &s,
            RuleSet::Exc,
        );
        assert!(eq.is_ok(), "{eq:?}");
    }

    #[test]
    fn r2_family_downgrades_strong_to_weak_exc_first() {
        let s = sig();
        let premise = Equation::new(term("tag[T]"), term("tag[T] o id[EV]"), Strength::STRONG);
        let eq = apply_rule("R2", &[premise], &[], &s, RuleSet::Exc).unwrap();
        assert_eq!(eq.strength, Strength::WEAK_EXC);
    }

    #[test]
    fn transitivity_requires_matching_middles() {
        let s = sig();
        let p1 = Equation::new(term("tag[T]"), term("tag[T] o id[EV]"), Strength::STRONG);
        let p2 = Equation::new(term("id[0] o tag[T]"), term("tag[T]"), Strength::STRONG);
        // Middles `tag[T] o id[EV]` and `id[0] o tag[T]` differ.
        let err = apply_rule("R1t", &[p1.clone(), p2], &[], &s, RuleSet::Exc).unwrap_err();
        assert!(matches!(err, LogicError::PremiseMismatch { .. }));

        let p2 = Equation::new(term("tag[T] o id[EV]"), term("tag[T]"), Strength::STRONG);
        let eq = apply_rule("R1t", &[p1, p2], &[], &s, RuleSet::Exc).unwrap();
        assert_eq!(eq.lhs, term("tag[T]"));
        assert_eq!(eq.rhs, term("tag[T]"));
    }

    #[test]
    fn r13_needs_one_premise_per_exception() {
        let s = sig();
        let f = term("tag[T] o untag[T]");
        let g = term("id[0]");
        let prem = |name: &str| {
            Equation::new(
                DecoratedTerm::comp(f.clone(), DecoratedTerm::tag(name)),
                DecoratedTerm::comp(g.clone(), DecoratedTerm::tag(name)),
                Strength::WEAK_EXC,
            )
        };
        let err =
            apply_rule("R13", &[prem("T")], &[], &s, RuleSet::Exc).unwrap_err();
        assert!(matches!(err, LogicError::PremiseCount { expected: 2, got: 1, .. }));

        let eq = apply_rule("R13", &[prem("T"), prem("R")], &[], &s, RuleSet::Exc).unwrap();
        assert_eq!(eq, Equation::new(f, g, Strength::STRONG));
    }

    #[test]
    fn r13_rejects_premises_in_wrong_order() {
        let s = sig();
        let f = term("tag[T] o untag[T]");
        let g = term("id[0]");
        let prem = |name: &str| {
            Equation::new(
                DecoratedTerm::comp(f.clone(), DecoratedTerm::tag(name)),
                DecoratedTerm::comp(g.clone(), DecoratedTerm::tag(name)),
                Strength::WEAK_EXC,
            )
        };
        let err = apply_rule("R13", &[prem("R"), prem("T")], &[], &s, RuleSet::Exc).unwrap_err();
        assert!(matches!(err, LogicError::PremiseMismatch { .. }));
    }

    #[test]
    fn r0_identity_axioms() {
        let s = sig();
        let eq = instantiate_axiom(
            "R0a",
            &[Arg::Term(term("tag[T]"))],
            &s,
            RuleSet::Exc,
        )
        .unwrap();
        assert_eq!(eq.lhs, term("tag[T] o id[EV]"));
        assert_eq!(eq.rhs, term("tag[T]"));
        let eq = instantiate_axiom(
            "R0b",
            &[Arg::Term(term("tag[T]"))],
            &s,
            RuleSet::Exc,
        )
        .unwrap();
        assert_eq!(eq.lhs, term("id[0] o tag[T]"));
    }

    #[test]
    fn r8_copair_axioms_and_formation() {
        let s = sig();
        let f = Arg::Term(term("id[EV]"));
        let g = Arg::Term(term("untag[T]"));
        let eq = instantiate_axiom("R8a", &[f.clone(), g.clone()], &s, RuleSet::Exc).unwrap();
        assert_eq!(eq.lhs, term("< id[EV] | untag[T] > o inl[EV,0]"));
        assert_eq!(eq.strength, Strength::WEAK_EXC);
        let eq = instantiate_axiom("R8b", &[f, g], &s, RuleSet::Exc).unwrap();
        assert_eq!(eq.strength, Strength::STRONG);

        // Copair formation rejects a catching first branch.
        let err = instantiate_axiom(
            "R8a",
            &[Arg::Term(term("untag[T]")), Arg::Term(term("untag[R]"))],
            &s,
            RuleSet::Exc,
        )
        .unwrap_err();
        assert!(matches!(err, LogicError::IllTyped { .. }));
    }

    #[test]
    fn r10_requires_empty_source() {
        let s = sig();
        let err = instantiate_axiom(
            "R10",
            &[Arg::Term(term("id[EV]")), Arg::Term(term("id[EV]"))],
            &s,
            RuleSet::Exc,
        )
        .unwrap_err();
        assert!(matches!(err, LogicError::SideCondition { .. }));
    }

    #[test]
    fn combined_r8_prime_requires_exception_purity() {
        let s = sig();
        // Second component raises: rejected in COMBINED, the projection
        // would expose the exception.
        let err = instantiate_axiom(
            "R8'a",
            &[
                Arg::Term(term("id[EV]")),
                Arg::Term(term("from0[EV] o tag[T]")),
            ],
            &s,
            RuleSet::Combined,
        )
        .unwrap_err();
        assert!(matches!(err, LogicError::SideCondition { .. }));

        // The same instantiation is fine in plain ST (no throwers there at
        // all; the side condition is omitted).
        let ok = instantiate_axiom(
            "R8'a",
            &[Arg::Term(term("id[Val]")), Arg::Term(term("lookup[X] o to1[Val]"))],
            &s,
            RuleSet::St,
        );
        assert!(ok.is_ok(), "{ok:?}");
    }

    #[test]
    fn unbound_variables_are_reported() {
        let s = sig();
        let premise = Equation::new(term("id[EV]"), term("id[EV]"), Strength::STRONG);
        let err = apply_rule("R5l", &[premise], &[], &s, RuleSet::Exc).unwrap_err();
        match err {
            LogicError::Unbound { var, .. } => assert_eq!(var, "g"),
            other => panic!("expected unbound error, got {other:?}"),
        }
    }
}
