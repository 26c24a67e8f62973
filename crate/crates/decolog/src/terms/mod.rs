//! The decorated term calculus: types, term formers, typing with decoration
//! inference, and the structural duality map between the exception side and
//! the state side.
//!
//! Decorations classify how a term interacts with each effect. For
//! exceptions the levels are pure (0), thrower (1), catcher (2); for state
//! they are pure (0), accessor (1), modifier (2). Inference always computes
//! the least decoration: leaves carry fixed levels and every composite takes
//! the componentwise maximum of its parts.

pub(crate) mod parse;

pub use parse::{parse_term, parse_type};

use std::fmt;

use thiserror::Error;

use crate::signature::Signature;

/// Object types: base names, sums with an empty type, products with a unit
/// type. Sums and the empty type belong to the exception side, products and
/// the unit type to the state side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DType {
    Base(String),
    Sum(Box<DType>, Box<DType>),
    Empty,
    Prod(Box<DType>, Box<DType>),
    Unit,
}

impl DType {
    pub fn base(name: impl Into<String>) -> Self {
        DType::Base(name.into())
    }

    pub fn sum(a: DType, b: DType) -> Self {
        DType::Sum(Box::new(a), Box::new(b))
    }

    pub fn prod(a: DType, b: DType) -> Self {
        DType::Prod(Box::new(a), Box::new(b))
    }

    /// Sum/Empty swap with Prod/Unit; base names stay put.
    pub fn dual(&self) -> DType {
        match self {
            DType::Base(n) => DType::Base(n.clone()),
            DType::Sum(a, b) => DType::prod(a.dual(), b.dual()),
            DType::Empty => DType::Unit,
            DType::Prod(a, b) => DType::sum(a.dual(), b.dual()),
            DType::Unit => DType::Empty,
        }
    }

    pub fn contains_empty(&self) -> bool {
        match self {
            DType::Empty => true,
            DType::Sum(a, b) | DType::Prod(a, b) => a.contains_empty() || b.contains_empty(),
            _ => false,
        }
    }

    fn walk_bases(&self, f: &mut impl FnMut(&str)) {
        match self {
            DType::Base(n) => f(n),
            DType::Sum(a, b) | DType::Prod(a, b) => {
                a.walk_bases(f);
                b.walk_bases(f);
            }
            _ => {}
        }
    }

    /// First undeclared base name, if any.
    pub fn unknown_base(&self, sig: &Signature) -> Option<String> {
        let mut bad = None;
        self.walk_bases(&mut |n| {
            if bad.is_none() && !sig.has_base(n) {
                bad = Some(n.to_string());
            }
        });
        bad
    }
}

impl fmt::Display for DType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `+` binds loosest, `*` tighter; both printed right-associated.
        fn atom(t: &DType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                DType::Base(n) => write!(f, "{n}"),
                DType::Empty => write!(f, "0"),
                DType::Unit => write!(f, "1"),
                _ => {
                    write!(f, "(")?;
                    go(t, f)?;
                    write!(f, ")")
                }
            }
        }
        fn factor(t: &DType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                DType::Prod(a, b) => {
                    atom(a, f)?;
                    write!(f, "*")?;
                    factor(b, f)
                }
                _ => atom(t, f),
            }
        }
        fn go(t: &DType, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                DType::Sum(a, b) => {
                    factor(a, f)?;
                    write!(f, "+")?;
                    go(b, f)
                }
                _ => factor(t, f),
            }
        }
        go(self, f)
    }
}

/// Effect levels of a term: `exc` for exceptions, `st` for state, each in
/// {0, 1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decoration {
    pub exc: u8,
    pub st: u8,
}

impl Decoration {
    pub const PURE: Decoration = Decoration { exc: 0, st: 0 };

    pub fn new(exc: u8, st: u8) -> Self {
        debug_assert!(exc <= 2 && st <= 2);
        Decoration { exc, st }
    }

    /// Componentwise maximum; the decoration of a composite.
    pub fn join(self, other: Decoration) -> Decoration {
        Decoration { exc: self.exc.max(other.exc), st: self.st.max(other.st) }
    }

    /// Swap the two effect components.
    pub fn dual(self) -> Decoration {
        Decoration { exc: self.st, st: self.exc }
    }
}

impl fmt::Display for Decoration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.exc, self.st)
    }
}

/// Terms of the calculus. `Comp(f, g)` is `f` after `g`. `If` and `While`
/// are primitive rather than encoded through copairs: a copair encoding
/// would hit the copair restriction as soon as both branches catch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoratedTerm {
    Id(DType),
    Comp(Box<DecoratedTerm>, Box<DecoratedTerm>),
    Copair(Box<DecoratedTerm>, Box<DecoratedTerm>),
    Inl(DType, DType),
    Inr(DType, DType),
    FromEmpty(DType),
    Pair(Box<DecoratedTerm>, Box<DecoratedTerm>),
    Proj1(DType, DType),
    Proj2(DType, DType),
    ToUnit(DType),
    Tag(String),
    Untag(String),
    Lookup(String),
    Update(String),
    Op(String),
    If(Box<DecoratedTerm>, Box<DecoratedTerm>, Box<DecoratedTerm>),
    While(Box<DecoratedTerm>, Box<DecoratedTerm>),
}

impl DecoratedTerm {
    pub fn comp(f: DecoratedTerm, g: DecoratedTerm) -> Self {
        DecoratedTerm::Comp(Box::new(f), Box::new(g))
    }

    /// Right-nested composition of a non-empty chain, first-applied last.
    pub fn chain(terms: Vec<DecoratedTerm>) -> Self {
        let mut it = terms.into_iter().rev();
        let last = it.next().expect("chain of at least one term");
        it.fold(last, |acc, t| DecoratedTerm::comp(t, acc))
    }

    pub fn copair(f: DecoratedTerm, g: DecoratedTerm) -> Self {
        DecoratedTerm::Copair(Box::new(f), Box::new(g))
    }

    pub fn pair(f: DecoratedTerm, g: DecoratedTerm) -> Self {
        DecoratedTerm::Pair(Box::new(f), Box::new(g))
    }

    pub fn tag(name: impl Into<String>) -> Self {
        DecoratedTerm::Tag(name.into())
    }

    pub fn untag(name: impl Into<String>) -> Self {
        DecoratedTerm::Untag(name.into())
    }

    pub fn lookup(name: impl Into<String>) -> Self {
        DecoratedTerm::Lookup(name.into())
    }

    pub fn update(name: impl Into<String>) -> Self {
        DecoratedTerm::Update(name.into())
    }

    pub fn cond(b: DecoratedTerm, f: DecoratedTerm, g: DecoratedTerm) -> Self {
        DecoratedTerm::If(Box::new(b), Box::new(f), Box::new(g))
    }

    pub fn while_loop(b: DecoratedTerm, f: DecoratedTerm) -> Self {
        DecoratedTerm::While(Box::new(b), Box::new(f))
    }

    /// Structural duality: sums against products, tags against lookups,
    /// untags against updates, with every composition reversed. Exception
    /// names are reused as location names and vice versa. `Op`, `If` and
    /// `While` have no dual.
    pub fn dualize(&self) -> Result<DecoratedTerm, DualizeError> {
        use DecoratedTerm::*;
        Ok(match self {
            Id(t) => Id(t.dual()),
            Comp(f, g) => DecoratedTerm::comp(g.dualize()?, f.dualize()?),
            Copair(f, g) => DecoratedTerm::pair(f.dualize()?, g.dualize()?),
            Pair(f, g) => DecoratedTerm::copair(f.dualize()?, g.dualize()?),
            Inl(a, b) => Proj1(a.dual(), b.dual()),
            Inr(a, b) => Proj2(a.dual(), b.dual()),
            Proj1(a, b) => Inl(a.dual(), b.dual()),
            Proj2(a, b) => Inr(a.dual(), b.dual()),
            FromEmpty(t) => ToUnit(t.dual()),
            ToUnit(t) => FromEmpty(t.dual()),
            Tag(n) => Lookup(n.clone()),
            Untag(n) => Update(n.clone()),
            Lookup(n) => Tag(n.clone()),
            Update(n) => Untag(n.clone()),
            Op(n) => return Err(DualizeError::NonDualizable(format!("op[{n}]"))),
            If(..) => return Err(DualizeError::NonDualizable("if".into())),
            While(..) => return Err(DualizeError::NonDualizable("while".into())),
        })
    }

    /// Flatten nested compositions into an application-order list
    /// (first applied last, matching the printed order).
    fn comp_chain(&self, out: &mut Vec<DecoratedTerm>) {
        match self {
            DecoratedTerm::Comp(f, g) => {
                f.comp_chain(out);
                g.comp_chain(out);
            }
            other => out.push(other.clone()),
        }
    }

    /// Normalize composition associativity: every `Comp` chain is rebuilt
    /// right-nested, recursively. Equations are compared modulo this map.
    pub fn normalize_assoc(&self) -> DecoratedTerm {
        use DecoratedTerm::*;
        match self {
            Comp(..) => {
                let mut parts = Vec::new();
                self.comp_chain(&mut parts);
                DecoratedTerm::chain(parts.iter().map(|p| p.normalize_assoc()).collect())
            }
            Copair(f, g) => DecoratedTerm::copair(f.normalize_assoc(), g.normalize_assoc()),
            Pair(f, g) => DecoratedTerm::pair(f.normalize_assoc(), g.normalize_assoc()),
            If(b, f, g) => {
                DecoratedTerm::cond(b.normalize_assoc(), f.normalize_assoc(), g.normalize_assoc())
            }
            While(b, f) => DecoratedTerm::while_loop(b.normalize_assoc(), f.normalize_assoc()),
            leaf => leaf.clone(),
        }
    }

    /// Render in the concrete term grammar; `parse_term` inverts this
    /// exactly (structural identity).
    pub fn pretty(&self) -> String {
        self.to_string()
    }
}

// Display is the pretty-printer: `o` chains print flat and right-associated,
// with parentheses only around a left-nested composition.
impl fmt::Display for DecoratedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DecoratedTerm::*;
        match self {
            Id(t) => write!(f, "id[{t}]"),
            Comp(l, r) => {
                if matches!(**l, Comp(..)) {
                    write!(f, "({l}) o {r}")
                } else {
                    write!(f, "{l} o {r}")
                }
            }
            Copair(l, r) => write!(f, "< {l} | {r} >"),
            Pair(l, r) => write!(f, "( {l} , {r} )"),
            Inl(a, b) => write!(f, "inl[{a},{b}]"),
            Inr(a, b) => write!(f, "inr[{a},{b}]"),
            FromEmpty(t) => write!(f, "from0[{t}]"),
            ToUnit(t) => write!(f, "to1[{t}]"),
            Proj1(a, b) => write!(f, "pi1[{a},{b}]"),
            Proj2(a, b) => write!(f, "pi2[{a},{b}]"),
            Tag(n) => write!(f, "tag[{n}]"),
            Untag(n) => write!(f, "untag[{n}]"),
            Lookup(n) => write!(f, "lookup[{n}]"),
            Update(n) => write!(f, "update[{n}]"),
            Op(n) => write!(f, "op[{n}]"),
            If(b, l, r) => write!(f, "if({b}, {l}, {r})"),
            While(b, l) => write!(f, "while({b}, {l})"),
        }
    }
}

/// Source, target and least decoration of a well-typed term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub source: DType,
    pub target: DType,
    pub dec: Decoration,
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {}", self.source, self.target, self.dec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferError {
    #[error("at {path}: unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String, path: String },
    #[error("at {path}: type mismatch: {msg}")]
    Mismatch { msg: String, path: String },
    #[error(
        "at {path}: copair restriction: first branch has exception decoration ({exc}), \
         at most a thrower is allowed"
    )]
    CopairRestriction { exc: u8, path: String },
    #[error(
        "at {path}: pair restriction: first component has decoration (exc={exc}, st={st}), \
         needs exc=0 and st<=1"
    )]
    PairRestriction { exc: u8, st: u8, path: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DualizeError {
    #[error("term former `{0}` has no dual")]
    NonDualizable(String),
}

fn path_str(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Infer the arrow of a term: source and target types plus the least
/// decoration. Deterministic and total on well-typed terms.
pub fn infer(term: &DecoratedTerm, sig: &Signature) -> Result<Arrow, InferError> {
    let mut path = Vec::new();
    infer_at(term, sig, &mut path)
}

fn known(ty: &DType, sig: &Signature, path: &[usize]) -> Result<(), InferError> {
    match ty.unknown_base(sig) {
        Some(name) => {
            Err(InferError::UnknownName { kind: "base type", name, path: path_str(path) })
        }
        None => Ok(()),
    }
}

fn value_type(
    kind: &'static str,
    name: &str,
    lookup: Option<&str>,
    path: &[usize],
) -> Result<DType, InferError> {
    match lookup {
        Some(base) => Ok(DType::base(base)),
        None => Err(InferError::UnknownName {
            kind,
            name: name.to_string(),
            path: path_str(path),
        }),
    }
}

fn infer_at(
    term: &DecoratedTerm,
    sig: &Signature,
    path: &mut Vec<usize>,
) -> Result<Arrow, InferError> {
    use DecoratedTerm::*;
    let child = |i: usize, t: &DecoratedTerm, path: &mut Vec<usize>| {
        path.push(i);
        let r = infer_at(t, sig, path);
        path.pop();
        r
    };
    match term {
        Id(t) => {
            known(t, sig, path)?;
            Ok(Arrow { source: t.clone(), target: t.clone(), dec: Decoration::PURE })
        }
        Comp(f, g) => {
            let af = child(0, f, path)?;
            let ag = child(1, g, path)?;
            if ag.target != af.source {
                return Err(InferError::Mismatch {
                    msg: format!(
                        "composition `{f} o {g}`: left expects {}, right produces {}",
                        af.source, ag.target
                    ),
                    path: path_str(path),
                });
            }
            Ok(Arrow { source: ag.source, target: af.target, dec: af.dec.join(ag.dec) })
        }
        Copair(f, g) => {
            let af = child(0, f, path)?;
            let ag = child(1, g, path)?;
            if af.target != ag.target {
                return Err(InferError::Mismatch {
                    msg: format!(
                        "copair branches must share a target: {} vs {}",
                        af.target, ag.target
                    ),
                    path: path_str(path),
                });
            }
            if af.dec.exc > 1 {
                return Err(InferError::CopairRestriction { exc: af.dec.exc, path: path_str(path) });
            }
            Ok(Arrow {
                source: DType::sum(af.source, ag.source),
                target: af.target,
                dec: af.dec.join(ag.dec),
            })
        }
        Pair(f, g) => {
            let af = child(0, f, path)?;
            let ag = child(1, g, path)?;
            if af.source != ag.source {
                return Err(InferError::Mismatch {
                    msg: format!(
                        "pair components must share a source: {} vs {}",
                        af.source, ag.source
                    ),
                    path: path_str(path),
                });
            }
            if af.dec.st > 1 || af.dec.exc > 0 {
                return Err(InferError::PairRestriction {
                    exc: af.dec.exc,
                    st: af.dec.st,
                    path: path_str(path),
                });
            }
            Ok(Arrow {
                source: af.source,
                target: DType::prod(af.target, ag.target),
                dec: af.dec.join(ag.dec),
            })
        }
        Inl(a, b) => {
            known(a, sig, path)?;
            known(b, sig, path)?;
            Ok(Arrow {
                source: a.clone(),
                target: DType::sum(a.clone(), b.clone()),
                dec: Decoration::PURE,
            })
        }
        Inr(a, b) => {
            known(a, sig, path)?;
            known(b, sig, path)?;
            Ok(Arrow {
                source: b.clone(),
                target: DType::sum(a.clone(), b.clone()),
                dec: Decoration::PURE,
            })
        }
        FromEmpty(t) => {
            known(t, sig, path)?;
            Ok(Arrow { source: DType::Empty, target: t.clone(), dec: Decoration::PURE })
        }
        ToUnit(t) => {
            known(t, sig, path)?;
            Ok(Arrow { source: t.clone(), target: DType::Unit, dec: Decoration::PURE })
        }
        Proj1(a, b) => {
            known(a, sig, path)?;
            known(b, sig, path)?;
            Ok(Arrow {
                source: DType::prod(a.clone(), b.clone()),
                target: a.clone(),
                dec: Decoration::PURE,
            })
        }
        Proj2(a, b) => {
            known(a, sig, path)?;
            known(b, sig, path)?;
            Ok(Arrow {
                source: DType::prod(a.clone(), b.clone()),
                target: b.clone(),
                dec: Decoration::PURE,
            })
        }
        Tag(n) => {
            let v = value_type("exception", n, sig.exception_value_type(n), path)?;
            Ok(Arrow { source: v, target: DType::Empty, dec: Decoration::new(1, 0) })
        }
        Untag(n) => {
            let v = value_type("exception", n, sig.exception_value_type(n), path)?;
            Ok(Arrow { source: DType::Empty, target: v, dec: Decoration::new(2, 0) })
        }
        Lookup(n) => {
            let v = value_type("location", n, sig.location_value_type(n), path)?;
            Ok(Arrow { source: DType::Unit, target: v, dec: Decoration::new(0, 1) })
        }
        Update(n) => {
            let v = value_type("location", n, sig.location_value_type(n), path)?;
            Ok(Arrow { source: v, target: DType::Unit, dec: Decoration::new(0, 2) })
        }
        Op(n) => match sig.op_type(n) {
            Some((src, tgt)) => {
                Ok(Arrow { source: src.clone(), target: tgt.clone(), dec: Decoration::PURE })
            }
            None => Err(InferError::UnknownName {
                kind: "operation",
                name: n.clone(),
                path: path_str(path),
            }),
        },
        If(b, f, g) => {
            let ab = child(0, b, path)?;
            let (l, r) = match &ab.target {
                DType::Sum(l, r) => ((**l).clone(), (**r).clone()),
                other => {
                    return Err(InferError::Mismatch {
                        msg: format!("if-condition must target a sum type, got {other}"),
                        path: path_str(path),
                    })
                }
            };
            let af = child(1, f, path)?;
            let ag = child(2, g, path)?;
            if af.source != l || ag.source != r {
                return Err(InferError::Mismatch {
                    msg: format!(
                        "if-branch sources must match the condition's sum {}: got {} and {}",
                        ab.target, af.source, ag.source
                    ),
                    path: path_str(path),
                });
            }
            if af.target != ag.target {
                return Err(InferError::Mismatch {
                    msg: format!("if-branches must share a target: {} vs {}", af.target, ag.target),
                    path: path_str(path),
                });
            }
            Ok(Arrow {
                source: ab.source,
                target: af.target,
                dec: ab.dec.join(af.dec).join(ag.dec),
            })
        }
        While(b, f) => {
            let ab = child(0, b, path)?;
            let (l, r) = match &ab.target {
                DType::Sum(l, r) => ((**l).clone(), (**r).clone()),
                other => {
                    return Err(InferError::Mismatch {
                        msg: format!("while-condition must target a sum type, got {other}"),
                        path: path_str(path),
                    })
                }
            };
            let af = child(1, f, path)?;
            if af.source != l {
                return Err(InferError::Mismatch {
                    msg: format!(
                        "while-body source must match the condition's left summand {l}, got {}",
                        af.source
                    ),
                    path: path_str(path),
                });
            }
            if af.target != ab.source {
                return Err(InferError::Mismatch {
                    msg: format!(
                        "while-body must feed the condition: needs target {}, got {}",
                        ab.source, af.target
                    ),
                    path: path_str(path),
                });
            }
            Ok(Arrow { source: ab.source, target: r, dec: ab.dec.join(af.dec) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_signature;

    fn sig() -> Signature {
        parse_signature(
            "base EV\nbase Val\nexception T : EV\nexception R : EV\n\
             location X : Val\nlocation Y : Val\nop c0 : 1 -> Val\n",
        )
        .unwrap()
    }

    #[test]
    fn identity_is_pure() {
        let s = sig();
        let a = infer(&DecoratedTerm::Id(DType::base("EV")), &s).unwrap();
        assert_eq!(a, Arrow {
            source: DType::base("EV"),
            target: DType::base("EV"),
            dec: Decoration::PURE
        });
    }

    #[test]
    fn untag_after_tag_is_a_catcher() {
        // tag is a thrower, untag a catcher; the composite takes the max.
        let s = sig();
        let t = DecoratedTerm::comp(DecoratedTerm::untag("T"), DecoratedTerm::tag("T"));
        let a = infer(&t, &s).unwrap();
        assert_eq!(a.source, DType::base("EV"));
        assert_eq!(a.target, DType::base("EV"));
        assert_eq!(a.dec, Decoration::new(2, 0));
    }

    #[test]
    fn copair_of_two_catchers_is_rejected() {
        let s = sig();
        let t = DecoratedTerm::copair(DecoratedTerm::untag("T"), DecoratedTerm::untag("R"));
        match infer(&t, &s) {
            Err(InferError::CopairRestriction { exc: 2, .. }) => {}
            other => panic!("expected copair restriction, got {other:?}"),
        }
    }

    #[test]
    fn copair_first_branch_thrower_is_allowed() {
        let s = sig();
        let t = DecoratedTerm::copair(DecoratedTerm::tag("T"), DecoratedTerm::tag("R"));
        let a = infer(&t, &s).unwrap();
        assert_eq!(a.source, DType::sum(DType::base("EV"), DType::base("EV")));
        assert_eq!(a.dec, Decoration::new(1, 0));
    }

    #[test]
    fn update_after_lookup_recomputed_by_max_rule() {
        // Leaf decorations (0,1) and (0,2); componentwise max gives (0,2).
        let s = sig();
        let t = DecoratedTerm::comp(DecoratedTerm::lookup("X"), DecoratedTerm::update("X"));
        let a = infer(&t, &s).unwrap();
        assert_eq!(a.source, DType::base("Val"));
        assert_eq!(a.target, DType::base("Val"));
        assert_eq!(a.dec, Decoration::new(0, 2));
    }

    #[test]
    fn pair_restriction_rejects_modifier_first_component() {
        let s = sig();
        let t = DecoratedTerm::pair(
            DecoratedTerm::update("X"),
            DecoratedTerm::ToUnit(DType::base("Val")),
        );
        match infer(&t, &s) {
            Err(InferError::PairRestriction { st: 2, .. }) => {}
            other => panic!("expected pair restriction, got {other:?}"),
        }
    }

    #[test]
    fn pair_restriction_rejects_throwing_first_component() {
        let s = sig();
        let t = DecoratedTerm::pair(
            DecoratedTerm::comp(DecoratedTerm::FromEmpty(DType::base("EV")), DecoratedTerm::tag("T")),
            DecoratedTerm::Id(DType::base("EV")),
        );
        match infer(&t, &s) {
            Err(InferError::PairRestriction { exc: 1, .. }) => {}
            other => panic!("expected pair restriction, got {other:?}"),
        }
    }

    #[test]
    fn composition_mismatch_reports_path() {
        let s = sig();
        let t = DecoratedTerm::comp(
            DecoratedTerm::tag("T"),
            DecoratedTerm::comp(DecoratedTerm::lookup("X"), DecoratedTerm::Id(DType::Unit)),
        );
        match infer(&t, &s) {
            Err(InferError::Mismatch { path, .. }) => assert_eq!(path, "root"),
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn dualize_untag_tag() {
        let t = DecoratedTerm::comp(DecoratedTerm::untag("T"), DecoratedTerm::tag("T"));
        let d = t.dualize().unwrap();
        assert_eq!(
            d,
            DecoratedTerm::comp(DecoratedTerm::lookup("T"), DecoratedTerm::update("T"))
        );
    }

    #[test]
    fn dualize_canonical_copair() {
        let ev = DType::base("EV");
        let t = DecoratedTerm::copair(
            DecoratedTerm::Inl(ev.clone(), ev.clone()),
            DecoratedTerm::Inr(ev.clone(), ev.clone()),
        );
        let d = t.dualize().unwrap();
        assert_eq!(
            d,
            DecoratedTerm::pair(
                DecoratedTerm::Proj1(ev.clone(), ev.clone()),
                DecoratedTerm::Proj2(ev.clone(), ev),
            )
        );
    }

    #[test]
    fn dualize_is_an_involution() {
        let t = DecoratedTerm::comp(
            DecoratedTerm::copair(
                DecoratedTerm::tag("T"),
                DecoratedTerm::comp(DecoratedTerm::untag("T"), DecoratedTerm::Id(DType::Empty)),
            ),
            DecoratedTerm::Inl(DType::base("EV"), DType::base("EV")),
        );
        assert_eq!(t.dualize().unwrap().dualize().unwrap(), t);
    }

    #[test]
    fn dualize_swaps_inferred_decoration() {
        let s = sig();
        let t = DecoratedTerm::comp(DecoratedTerm::untag("T"), DecoratedTerm::tag("T"));
        let a = infer(&t, &s).unwrap();
        let d = t.dualize().unwrap();
        let ad = infer(&d, &s.dual()).unwrap();
        assert_eq!(ad.dec, a.dec.dual());
        assert_eq!(ad.source, a.source.dual());
        assert_eq!(ad.target, a.target.dual());
    }

    #[test]
    fn dualize_rejects_ops() {
        let t = DecoratedTerm::Op("c0".into());
        assert!(matches!(t.dualize(), Err(DualizeError::NonDualizable(_))));
    }

    #[test]
    fn normalize_assoc_flattens() {
        let a = DecoratedTerm::tag("T");
        let b = DecoratedTerm::untag("T");
        let c = DecoratedTerm::Id(DType::Empty);
        let left = DecoratedTerm::comp(DecoratedTerm::comp(a.clone(), b.clone()), c.clone());
        let right = DecoratedTerm::comp(a, DecoratedTerm::comp(b, c));
        assert_eq!(left.normalize_assoc(), right.normalize_assoc());
        assert_eq!(left.normalize_assoc(), right);
    }

    #[test]
    fn type_display_groups_correctly() {
        let t = DType::sum(
            DType::prod(DType::base("A"), DType::base("B")),
            DType::sum(DType::Empty, DType::Unit),
        );
        assert_eq!(t.to_string(), "A*B+0+1");
        let left = DType::sum(DType::sum(DType::base("A"), DType::base("B")), DType::base("C"));
        assert_eq!(left.to_string(), "(A+B)+C");
    }
}
