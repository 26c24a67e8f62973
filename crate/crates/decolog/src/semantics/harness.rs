//! Rule-soundness harness: enumerate instantiations of every rule over
//! depth-bounded term pools and report any instance whose premises hold in
//! the model while the conclusion fails. Timeouts (from loop unfolding in
//! the instantiated conclusion) are listed separately, never as
//! counterexamples.
//!
//! Terms with identical denotation tables are interchangeable for
//! premise/conclusion outcomes, so each pool bucket keeps one
//! representative per table — the one with the least decoration, which
//! admits the most instances past formation and side-condition checks.

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::{
    rule_vars, Effect, EqPat, Equation, Family, FamilyKind, Rule, RuleSet, SFlagPat,
    SPat, SideCond, TPat, TyPat, VarKind, Strength,
};
use crate::semantics::enumerate::{enumerate_terms, EnumOptions};
use crate::semantics::{denote, EValue, Model, Store, Timeout, Value};
use crate::signature::Signature;
use crate::terms::{DType, Decoration, DecoratedTerm};

#[derive(Debug, Clone)]
pub struct HarnessOptions {
    pub depth: usize,
    /// Check only the named rules (all when empty).
    pub only_rules: Vec<String>,
    /// Skip side-condition filtering for this rule: the sabotage switch the
    /// negative tests flip to prove the harness can find the witnesses.
    pub disable_sides_of: Option<String>,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions { depth: 3, only_rules: Vec::new(), disable_sides_of: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleStat {
    pub name: String,
    pub instances: usize,
    pub counterexamples: usize,
    pub timeouts: usize,
}

#[derive(Debug, Clone)]
pub struct FailureRecord {
    pub rule: String,
    pub conclusion: Equation,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub ruleset: RuleSet,
    pub stats: Vec<RuleStat>,
    pub counterexamples: Vec<FailureRecord>,
    pub timeouts: usize,
}

impl ValidationReport {
    pub fn clean(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule set {}", self.ruleset)?;
        for s in &self.stats {
            writeln!(
                f,
                "  {:6} instances {:8}  counterexamples {:4}  timeouts {:4}",
                s.name, s.instances, s.counterexamples, s.timeouts
            )?;
        }
        for c in &self.counterexamples {
            writeln!(f, "  COUNTEREXAMPLE {}: {} [{}]", c.rule, c.conclusion, c.detail)?;
        }
        write!(
            f,
            "{}",
            if self.clean() { "report clean" } else { "counterexamples found" }
        )
    }
}

/// The default type universe the harness draws terms from: the effect value
/// types plus the fragment's constants and one compound connective.
pub fn default_universe(sig: &Signature, which: RuleSet) -> Vec<DType> {
    let mut exc_bases: Vec<DType> = Vec::new();
    for (_, vt) in sig.exceptions() {
        let t = DType::base(vt);
        if !exc_bases.contains(&t) {
            exc_bases.push(t);
        }
    }
    let mut loc_bases: Vec<DType> = Vec::new();
    for (_, vt) in sig.locations() {
        let t = DType::base(vt);
        if !loc_bases.contains(&t) {
            loc_bases.push(t);
        }
    }
    let mut u = Vec::new();
    let add = |t: DType, u: &mut Vec<DType>| {
        if !u.contains(&t) {
            u.push(t);
        }
    };
    match which {
        RuleSet::Exc => {
            for b in exc_bases.clone() {
                add(b, &mut u);
            }
            add(DType::Empty, &mut u);
            if let Some(b) = exc_bases.first() {
                add(DType::sum(b.clone(), DType::Empty), &mut u);
            }
        }
        RuleSet::St => {
            for b in loc_bases.clone() {
                add(b, &mut u);
            }
            add(DType::Unit, &mut u);
            if let Some(b) = loc_bases.first() {
                add(DType::prod(b.clone(), b.clone()), &mut u);
            }
        }
        RuleSet::Combined => {
            for b in exc_bases.clone() {
                add(b, &mut u);
            }
            for b in loc_bases.clone() {
                add(b, &mut u);
            }
            add(DType::Empty, &mut u);
            add(DType::Unit, &mut u);
            if let Some(b) = exc_bases.first() {
                add(DType::sum(b.clone(), DType::Empty), &mut u);
            }
            if let Some(b) = loc_bases.first() {
                add(DType::prod(b.clone(), b.clone()), &mut u);
            }
        }
    }
    u
}

// ---------------------------------------------------------------------
// Input spaces and pools.

struct Space {
    inputs: Vec<(EValue, Store)>,
    index: BTreeMap<(EValue, Store), usize>,
    /// Inputs with an ordinary value come first; this many of them.
    ordinary_prefix: usize,
}

struct Spaces<'m> {
    model: &'m Model,
    by_type: BTreeMap<DType, Space>,
}

impl<'m> Spaces<'m> {
    fn new(model: &'m Model) -> Self {
        Spaces { model, by_type: BTreeMap::new() }
    }

    fn space(&mut self, ty: &DType) -> &Space {
        if !self.by_type.contains_key(ty) {
            let stores = self.model.stores();
            let ordinary = self.model.values_of(ty);
            let all = self.model.evalues_of(ty, true);
            let mut inputs = Vec::new();
            for ev in &all {
                for s in &stores {
                    inputs.push((ev.clone(), s.clone()));
                }
            }
            let index = inputs
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), i))
                .collect();
            let ordinary_prefix = ordinary.len() * stores.len();
            self.by_type.insert(ty.clone(), Space { inputs, index, ordinary_prefix });
        }
        self.by_type.get(ty).unwrap()
    }
}

#[derive(Clone)]
struct PoolEntry {
    term: DecoratedTerm,
    dec: Decoration,
    table: Vec<(EValue, Store)>,
}

type Pool = BTreeMap<(DType, DType), Vec<PoolEntry>>;

fn build_pool(
    model: &Model,
    which: RuleSet,
    depth: usize,
    spaces: &mut Spaces,
) -> Pool {
    let universe = default_universe(model.signature(), which);
    let terms = enumerate_terms(
        model.signature(),
        &universe,
        EnumOptions { fragment: which, depth, include_loops: false },
    );
    let mut pool = Pool::new();
    for (term, arrow) in terms {
        let space = spaces.space(&arrow.source);
        let mut table = Vec::with_capacity(space.inputs.len());
        let mut ok = true;
        for (ev, st) in &space.inputs {
            match denote(&term, model, ev, st) {
                Ok(out) => table.push(out),
                Err(Timeout) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue; // loop-free pools never hit this
        }
        let bucket = pool.entry((arrow.source, arrow.target)).or_default();
        match bucket.iter_mut().find(|e| e.table == table) {
            Some(existing) => {
                // Prefer the least-decorated representative.
                let old = (existing.dec.exc as u16 + existing.dec.st as u16, existing.dec);
                let new = (arrow.dec.exc as u16 + arrow.dec.st as u16, arrow.dec);
                if new < old {
                    existing.term = term;
                    existing.dec = arrow.dec;
                }
            }
            None => bucket.push(PoolEntry { term, dec: arrow.dec, table }),
        }
    }
    pool
}

// ---------------------------------------------------------------------
// Assignments.

#[derive(Debug, Clone)]
enum Chosen {
    Term { key: (DType, DType), idx: usize },
    Ty(DType),
    ExcName(String),
    LocName(String),
    Flag(bool),
    Strength(Strength),
}

struct Asg<'p> {
    pool: &'p Pool,
    map: BTreeMap<String, Chosen>,
}

impl<'p> Asg<'p> {
    fn entry(&self, var: &str) -> Option<&'p PoolEntry> {
        match self.map.get(var)? {
            Chosen::Term { key, idx } => Some(&self.pool[key][*idx]),
            _ => None,
        }
    }

    fn term_key(&self, var: &str) -> Option<&(DType, DType)> {
        match self.map.get(var)? {
            Chosen::Term { key, .. } => Some(key),
            _ => None,
        }
    }

    fn name(&self, var: &str) -> Option<&str> {
        match self.map.get(var)? {
            Chosen::ExcName(n) | Chosen::LocName(n) => Some(n),
            _ => None,
        }
    }

    fn ty(&self, var: &str) -> Option<&DType> {
        match self.map.get(var)? {
            Chosen::Ty(t) => Some(t),
            _ => None,
        }
    }

    fn flag(&self, var: &str) -> Option<bool> {
        match self.map.get(var)? {
            Chosen::Flag(b) => Some(*b),
            _ => None,
        }
    }

    fn strength_of(&self, pat: &SPat) -> Option<Strength> {
        match pat {
            SPat::Lit(s) => Some(*s),
            SPat::Whole(v) => match self.map.get(*v)? {
                Chosen::Strength(s) => Some(*s),
                _ => None,
            },
            SPat::Flags(a, b) => {
                let fa = match a {
                    SFlagPat::Lit(x) => *x,
                    SFlagPat::Var(v) => self.flag(v)?,
                };
                let fb = match b {
                    SFlagPat::Lit(x) => *x,
                    SFlagPat::Var(v) => self.flag(v)?,
                };
                Some(Strength::new(fa, fb))
            }
        }
    }
}

fn resolve_typat(pat: &TyPat, asg: &Asg, sig: &Signature) -> Option<DType> {
    match pat {
        TyPat::Var(v) => asg.ty(v).cloned(),
        TyPat::Empty => Some(DType::Empty),
        TyPat::Unit => Some(DType::Unit),
        TyPat::ValueOf(n) => {
            let name = asg.name(n)?;
            let base = sig
                .exception_value_type(name)
                .or_else(|| sig.location_value_type(name))?;
            Some(DType::base(base))
        }
        TyPat::SourceOf(v) => asg.term_key(v).map(|(s, _)| s.clone()),
        TyPat::TargetOf(v) => asg.term_key(v).map(|(_, t)| t.clone()),
        TyPat::SumRightOfTarget(v) => match asg.term_key(v) {
            Some((_, DType::Sum(_, r))) => Some((**r).clone()),
            _ => None,
        },
    }
}

// Source, target and (when entries are chosen) decoration of a pattern
// under an assignment. `None` when a variable is unbound or the pattern is
// ill-typed/ill-formed — such shapes are simply skipped.
fn pattern_arrow(
    pat: &TPat,
    asg: &Asg,
    sig: &Signature,
    with_dec: bool,
) -> Option<(DType, DType, Decoration)> {
    let dec0 = Decoration::PURE;
    match pat {
        TPat::Var(v) => {
            let (s, t) = asg.term_key(v)?.clone();
            let d = if with_dec { asg.entry(v)?.dec } else { dec0 };
            Some((s, t, d))
        }
        TPat::Id(ty) => {
            let t = resolve_typat(ty, asg, sig)?;
            Some((t.clone(), t, dec0))
        }
        TPat::Comp(f, g) => {
            let (ms, mt, fd) = pattern_arrow(f, asg, sig, with_dec)?;
            let (gs, gt, gd) = pattern_arrow(g, asg, sig, with_dec)?;
            (gt == ms).then_some((gs, mt, fd.join(gd)))
        }
        TPat::Copair(f, g) => {
            let (fs, ft, fd) = pattern_arrow(f, asg, sig, with_dec)?;
            let (gs, gt, gd) = pattern_arrow(g, asg, sig, with_dec)?;
            if ft != gt || (with_dec && fd.exc > 1) {
                return None;
            }
            Some((DType::sum(fs, gs), ft, fd.join(gd)))
        }
        TPat::Pair(f, g) => {
            let (fs, ft, fd) = pattern_arrow(f, asg, sig, with_dec)?;
            let (gs, gt, gd) = pattern_arrow(g, asg, sig, with_dec)?;
            if fs != gs || (with_dec && (fd.st > 1 || fd.exc > 0)) {
                return None;
            }
            Some((fs, DType::prod(ft, gt), fd.join(gd)))
        }
        TPat::Inl(a, b) => {
            let a = resolve_typat(a, asg, sig)?;
            let b = resolve_typat(b, asg, sig)?;
            Some((a.clone(), DType::sum(a, b), dec0))
        }
        TPat::Inr(a, b) => {
            let a = resolve_typat(a, asg, sig)?;
            let b = resolve_typat(b, asg, sig)?;
            Some((b.clone(), DType::sum(a, b), dec0))
        }
        TPat::Proj1(a, b) => {
            let a = resolve_typat(a, asg, sig)?;
            let b = resolve_typat(b, asg, sig)?;
            Some((DType::prod(a.clone(), b), a, dec0))
        }
        TPat::Proj2(a, b) => {
            let a = resolve_typat(a, asg, sig)?;
            let b = resolve_typat(b, asg, sig)?;
            Some((DType::prod(a, b.clone()), b, dec0))
        }
        TPat::FromEmpty(t) => {
            let t = resolve_typat(t, asg, sig)?;
            Some((DType::Empty, t, dec0))
        }
        TPat::ToUnit(t) => {
            let t = resolve_typat(t, asg, sig)?;
            Some((t, DType::Unit, dec0))
        }
        TPat::Tag(n) => {
            let name = asg.name(n)?;
            let v = DType::base(sig.exception_value_type(name)?);
            Some((v, DType::Empty, Decoration::new(1, 0)))
        }
        TPat::Untag(n) => {
            let name = asg.name(n)?;
            let v = DType::base(sig.exception_value_type(name)?);
            Some((DType::Empty, v, Decoration::new(2, 0)))
        }
        TPat::Lookup(n) => {
            let name = asg.name(n)?;
            let v = DType::base(sig.location_value_type(name)?);
            Some((DType::Unit, v, Decoration::new(0, 1)))
        }
        TPat::Update(n) => {
            let name = asg.name(n)?;
            let v = DType::base(sig.location_value_type(name)?);
            Some((v, DType::Unit, Decoration::new(0, 2)))
        }
        TPat::If(b, f, g) => {
            let (bs, bt, bd) = pattern_arrow(b, asg, sig, with_dec)?;
            let DType::Sum(l, r) = bt else { return None };
            let (fs, ft, fd) = pattern_arrow(f, asg, sig, with_dec)?;
            let (gs, gt, gd) = pattern_arrow(g, asg, sig, with_dec)?;
            (fs == *l && gs == *r && ft == gt)
                .then_some((bs, ft, bd.join(fd).join(gd)))
        }
        TPat::While(b, f) => {
            let (bs, bt, bd) = pattern_arrow(b, asg, sig, with_dec)?;
            let DType::Sum(l, r) = bt else { return None };
            let (fs, ft, fd) = pattern_arrow(f, asg, sig, with_dec)?;
            (fs == *l && ft == bs).then_some((bs, (*r).clone(), bd.join(fd)))
        }
    }
}

// Evaluate a pattern at one input via the pooled tables.
fn pat_eval(
    pat: &TPat,
    asg: &Asg,
    model: &Model,
    spaces: &mut Spaces,
    src: &DType,
    input: (EValue, Store),
) -> Result<(EValue, Store), Timeout> {
    match pat {
        TPat::Var(v) => {
            let entry = asg.entry(v).expect("bound term variable");
            let space = spaces.space(src);
            let idx = space.index[&input];
            Ok(entry.table[idx].clone())
        }
        TPat::Comp(f, g) => {
            let (gs, gt, _) = pattern_arrow(g, asg, model.signature(), false)
                .expect("formation checked");
            debug_assert_eq!(&gs, src);
            let mid = pat_eval(g, asg, model, spaces, src, input)?;
            pat_eval(f, asg, model, spaces, &gt, mid)
        }
        TPat::Id(_) => Ok(input),
        TPat::Inl(..) => Ok(match input {
            (EValue::Ordinary(v), s) => (EValue::Ordinary(Value::left(v)), s),
            exc => exc,
        }),
        TPat::Inr(..) => Ok(match input {
            (EValue::Ordinary(v), s) => (EValue::Ordinary(Value::right(v)), s),
            exc => exc,
        }),
        TPat::Proj1(..) => Ok(match input {
            (EValue::Ordinary(Value::Pair(a, _)), s) => (EValue::Ordinary(*a), s),
            (EValue::Ordinary(v), _) => unreachable!("pi1 on non-pair {v}"),
            exc => exc,
        }),
        TPat::Proj2(..) => Ok(match input {
            (EValue::Ordinary(Value::Pair(_, b)), s) => (EValue::Ordinary(*b), s),
            (EValue::Ordinary(v), _) => unreachable!("pi2 on non-pair {v}"),
            exc => exc,
        }),
        TPat::FromEmpty(_) => Ok(input),
        TPat::ToUnit(_) => Ok(match input {
            (EValue::Ordinary(_), s) => (EValue::Ordinary(Value::Unit), s),
            exc => exc,
        }),
        TPat::Tag(n) => {
            let name = asg.name(n).expect("bound name");
            Ok(match input {
                (EValue::Ordinary(v), s) => (EValue::Exceptional(name.to_string(), v), s),
                exc => exc,
            })
        }
        TPat::Untag(n) => {
            let name = asg.name(n).expect("bound name");
            Ok(match input {
                (EValue::Exceptional(t, v), s) if t == name => (EValue::Ordinary(v), s),
                other => other,
            })
        }
        TPat::Lookup(n) => {
            let name = asg.name(n).expect("bound name");
            let ix = model.location_index(name).expect("declared location");
            Ok(match input {
                (EValue::Ordinary(_), s) => {
                    let v = s[ix].clone();
                    (EValue::Ordinary(v), s)
                }
                exc => exc,
            })
        }
        TPat::Update(n) => {
            let name = asg.name(n).expect("bound name");
            let ix = model.location_index(name).expect("declared location");
            Ok(match input {
                (EValue::Ordinary(v), mut s) => {
                    s[ix] = v;
                    (EValue::Ordinary(Value::Unit), s)
                }
                exc => exc,
            })
        }
        TPat::Copair(f, g) => {
            let (fs, _, _) =
                pattern_arrow(f, asg, model.signature(), false).expect("formation checked");
            let (gs, _, _) =
                pattern_arrow(g, asg, model.signature(), false).expect("formation checked");
            match input {
                (EValue::Ordinary(Value::L(a)), s) => {
                    pat_eval(f, asg, model, spaces, &fs, (EValue::Ordinary(*a), s))
                }
                (EValue::Ordinary(Value::R(b)), s) => {
                    pat_eval(g, asg, model, spaces, &gs, (EValue::Ordinary(*b), s))
                }
                (EValue::Ordinary(v), _) => unreachable!("copair on non-sum {v}"),
                exc => pat_eval(g, asg, model, spaces, &gs, exc),
            }
        }
        TPat::Pair(f, g) => match input {
            (EValue::Ordinary(a), s) => {
                let (w, s0) = pat_eval(
                    f,
                    asg,
                    model,
                    spaces,
                    src,
                    (EValue::Ordinary(a.clone()), s.clone()),
                )?;
                debug_assert_eq!(s0, s);
                let EValue::Ordinary(w) = w else {
                    unreachable!("exception-pure pair component raised")
                };
                let (u, s1) = pat_eval(g, asg, model, spaces, src, (EValue::Ordinary(a), s))?;
                Ok(match u {
                    EValue::Ordinary(u) => (EValue::Ordinary(Value::pair(w, u)), s1),
                    exc => (exc, s1),
                })
            }
            exc => Ok(exc),
        },
        TPat::If(b, f, g) => match input {
            (EValue::Ordinary(_), _) => {
                let (fs, _, _) = pattern_arrow(f, asg, model.signature(), false)
                    .expect("formation checked");
                let (gs, _, _) = pattern_arrow(g, asg, model.signature(), false)
                    .expect("formation checked");
                let (bv, s1) = pat_eval(b, asg, model, spaces, src, input)?;
                match bv {
                    EValue::Ordinary(Value::L(l)) => {
                        pat_eval(f, asg, model, spaces, &fs, (EValue::Ordinary(*l), s1))
                    }
                    EValue::Ordinary(Value::R(r)) => {
                        pat_eval(g, asg, model, spaces, &gs, (EValue::Ordinary(*r), s1))
                    }
                    EValue::Ordinary(v) => unreachable!("if-condition gave non-sum {v}"),
                    exc => Ok((exc, s1)),
                }
            }
            exc => Ok(exc),
        },
        TPat::While(b, f) => match input {
            (EValue::Ordinary(a), s) => {
                let (fs, _, _) = pattern_arrow(f, asg, model.signature(), false)
                    .expect("formation checked");
                let mut a = a;
                let mut s = s;
                let mut fuel = model.fuel;
                loop {
                    if fuel == 0 {
                        return Err(Timeout);
                    }
                    fuel -= 1;
                    let (bv, s1) =
                        pat_eval(b, asg, model, spaces, src, (EValue::Ordinary(a), s))?;
                    match bv {
                        EValue::Ordinary(Value::L(l)) => {
                            let (fv, s2) = pat_eval(
                                f,
                                asg,
                                model,
                                spaces,
                                &fs,
                                (EValue::Ordinary(*l), s1),
                            )?;
                            match fv {
                                EValue::Ordinary(a2) => {
                                    a = a2;
                                    s = s2;
                                }
                                exc => return Ok((exc, s2)),
                            }
                        }
                        EValue::Ordinary(Value::R(r)) => return Ok((EValue::Ordinary(*r), s1)),
                        EValue::Ordinary(v) => unreachable!("while-condition gave non-sum {v}"),
                        exc => return Ok((exc, s1)),
                    }
                }
            }
            exc => Ok(exc),
        },
    }
}

enum EqOutcome {
    Holds,
    Fails(String),
    Timeout,
}

fn eq_outcome(
    eqp: &EqPat,
    asg: &Asg,
    model: &Model,
    spaces: &mut Spaces,
) -> EqOutcome {
    let sig = model.signature();
    let Some(strength) = asg.strength_of(&eqp.strength) else {
        return EqOutcome::Fails("unresolved strength".into());
    };
    let Some((src, _, _)) = pattern_arrow(&eqp.lhs, asg, sig, false) else {
        return EqOutcome::Fails("unresolved arrow".into());
    };
    let (count, prefix) = {
        let space = spaces.space(&src);
        (space.inputs.len(), space.ordinary_prefix)
    };
    let limit = if strength.exc_strict { count } else { prefix };
    for i in 0..limit {
        let input = {
            let space = spaces.space(&src);
            space.inputs[i].clone()
        };
        let l = pat_eval(&eqp.lhs, asg, model, spaces, &src, input.clone());
        let r = pat_eval(&eqp.rhs, asg, model, spaces, &src, input.clone());
        let (l, r) = match (l, r) {
            (Ok(l), Ok(r)) => (l, r),
            _ => return EqOutcome::Timeout,
        };
        if l.0 != r.0 || (strength.st_strict && l.1 != r.1) {
            return EqOutcome::Fails(format!(
                "input {} @ {{{}}}: lhs {}, rhs {}",
                input.0,
                model.format_store(&input.1),
                l.0,
                r.0
            ));
        }
    }
    EqOutcome::Holds
}

// Build the concrete term for reporting a counterexample.
fn subst(pat: &TPat, asg: &Asg, sig: &Signature) -> DecoratedTerm {
    match pat {
        TPat::Var(v) => asg.entry(v).expect("bound").term.clone(),
        TPat::Id(t) => DecoratedTerm::Id(resolve_typat(t, asg, sig).expect("resolved")),
        TPat::Comp(a, b) => DecoratedTerm::comp(subst(a, asg, sig), subst(b, asg, sig)),
        TPat::Copair(a, b) => DecoratedTerm::copair(subst(a, asg, sig), subst(b, asg, sig)),
        TPat::Pair(a, b) => DecoratedTerm::pair(subst(a, asg, sig), subst(b, asg, sig)),
        TPat::Inl(a, b) => DecoratedTerm::Inl(
            resolve_typat(a, asg, sig).expect("resolved"),
            resolve_typat(b, asg, sig).expect("resolved"),
        ),
        TPat::Inr(a, b) => DecoratedTerm::Inr(
            resolve_typat(a, asg, sig).expect("resolved"),
            resolve_typat(b, asg, sig).expect("resolved"),
        ),
        TPat::Proj1(a, b) => DecoratedTerm::Proj1(
            resolve_typat(a, asg, sig).expect("resolved"),
            resolve_typat(b, asg, sig).expect("resolved"),
        ),
        TPat::Proj2(a, b) => DecoratedTerm::Proj2(
            resolve_typat(a, asg, sig).expect("resolved"),
            resolve_typat(b, asg, sig).expect("resolved"),
        ),
        TPat::FromEmpty(t) => {
            DecoratedTerm::FromEmpty(resolve_typat(t, asg, sig).expect("resolved"))
        }
        TPat::ToUnit(t) => DecoratedTerm::ToUnit(resolve_typat(t, asg, sig).expect("resolved")),
        TPat::Tag(n) => DecoratedTerm::tag(asg.name(n).expect("bound")),
        TPat::Untag(n) => DecoratedTerm::untag(asg.name(n).expect("bound")),
        TPat::Lookup(n) => DecoratedTerm::lookup(asg.name(n).expect("bound")),
        TPat::Update(n) => DecoratedTerm::update(asg.name(n).expect("bound")),
        TPat::If(b, f, g) => DecoratedTerm::cond(
            subst(b, asg, sig),
            subst(f, asg, sig),
            subst(g, asg, sig),
        ),
        TPat::While(b, f) => {
            DecoratedTerm::while_loop(subst(b, asg, sig), subst(f, asg, sig))
        }
    }
}

fn side_ok(side: &SideCond, asg: &Asg) -> bool {
    match side {
        SideCond::DecAtMost { term, effect, max } => {
            let Some(entry) = asg.entry(term) else { return false };
            let level = match effect {
                Effect::Exc => entry.dec.exc,
                Effect::St => entry.dec.st,
            };
            level <= *max
        }
        SideCond::PureIfWeak { flag, effect, term } => {
            let Some(strict) = asg.flag(flag) else { return false };
            if strict {
                return true;
            }
            let Some(entry) = asg.entry(term) else { return false };
            match effect {
                Effect::Exc => entry.dec.exc == 0,
                Effect::St => entry.dec.st == 0,
            }
        }
        SideCond::DistinctNames(a, b) => match (asg.name(a), asg.name(b)) {
            (Some(x), Some(y)) => x != y,
            _ => false,
        },
        SideCond::SourceIsEmpty(v) => {
            matches!(asg.term_key(v), Some((DType::Empty, _)))
        }
        SideCond::TargetIsUnit(v) => {
            matches!(asg.term_key(v), Some((_, DType::Unit)))
        }
    }
}

// All equations of a rule, with the family expanded over declared names.
fn rule_equations<'r>(rule: &'r Rule, sig: &Signature) -> (Vec<(EqPat, Option<(String, FamilyKind)>)>, EqPat) {
    let mut premises: Vec<(EqPat, Option<(String, FamilyKind)>)> = rule
        .premises
        .iter()
        .map(|p| (p.clone(), None))
        .collect();
    if let Some(Family { kind, schema, .. }) = &rule.family {
        let names: Vec<String> = match kind {
            FamilyKind::AllExceptions => sig.exceptions().map(|(n, _)| n.to_string()).collect(),
            FamilyKind::AllLocations => sig.locations().map(|(n, _)| n.to_string()).collect(),
        };
        for n in names {
            premises.push((schema.clone(), Some((n, *kind))));
        }
    }
    (premises, rule.conclusion.clone())
}

/// Enumerate instantiations of every rule of the set over the model and
/// report counterexamples (premises hold, conclusion fails) and timeouts.
pub fn validate_ruleset(
    which: RuleSet,
    model: &Model,
    opts: &HarnessOptions,
) -> ValidationReport {
    let rules = crate::logic::ruleset(which);
    let sig = model.signature().clone();
    let mut spaces = Spaces::new(model);
    let pool = build_pool(model, which, opts.depth, &mut spaces);

    let mut stats = Vec::new();
    let mut counterexamples = Vec::new();
    let mut timeouts_total = 0usize;

    for rule in &rules {
        if !opts.only_rules.is_empty()
            && !opts.only_rules.iter().any(|n| n == rule.name)
        {
            continue;
        }
        let check_sides = opts.disable_sides_of.as_deref() != Some(rule.name);
        let vars = rule_vars(rule);
        let (premises, conclusion) = rule_equations(rule, &sig);

        let mut stat = RuleStat {
            name: rule.name.to_string(),
            instances: 0,
            counterexamples: 0,
            timeouts: 0,
        };

        // Candidate shapes per variable.
        let universe = default_universe(&sig, which);
        let bucket_keys: Vec<(DType, DType)> = pool.keys().cloned().collect();
        let exc_names: Vec<String> = sig.exceptions().map(|(n, _)| n.to_string()).collect();
        let loc_names: Vec<String> = sig.locations().map(|(n, _)| n.to_string()).collect();

        enum Cands {
            Buckets(Vec<(DType, DType)>),
            Tys(Vec<DType>),
            Excs(Vec<String>),
            Locs(Vec<String>),
            Flags,
            Strengths,
        }
        let var_cands: Vec<(String, Cands)> = vars
            .iter()
            .map(|(v, k)| {
                let c = match k {
                    VarKind::Term => Cands::Buckets(bucket_keys.clone()),
                    VarKind::Ty => Cands::Tys(universe.clone()),
                    VarKind::ExcName => Cands::Excs(exc_names.clone()),
                    VarKind::LocName => Cands::Locs(loc_names.clone()),
                    VarKind::Flag => Cands::Flags,
                    VarKind::StrengthWhole => Cands::Strengths,
                };
                (v.clone(), c)
            })
            .collect();

        // Stage 1: shapes (buckets for term vars, everything else concrete),
        // pruned by type-level pattern checks as soon as an equation's
        // variables are all shaped.
        fn eq_vars(e: &EqPat) -> Vec<String> {
            let mut out = Vec::new();
            crate::logic::eqpat_vars(e, &mut out);
            out
        }
        // Family premises bind their name variable per instance, so they
        // cannot be type-checked during shape pruning.
        let mut eq_var_sets: Vec<(Vec<String>, EqPat)> = premises
            .iter()
            .filter(|(_, fam)| fam.is_none())
            .map(|(p, _)| (eq_vars(p), p.clone()))
            .collect();
        eq_var_sets.push((eq_vars(&conclusion), conclusion.clone()));

        let mut shape_stack: Vec<(String, Chosen)> = Vec::new();
        let mut instances: Vec<BTreeMap<String, Chosen>> = Vec::new();

        // Recursive shape enumeration.
        fn shapes(
            var_cands: &[(String, Cands)],
            i: usize,
            stack: &mut Vec<(String, Chosen)>,
            pool: &Pool,
            sig: &Signature,
            eq_var_sets: &[(Vec<String>, EqPat)],
            rule: &Rule,
            out: &mut Vec<BTreeMap<String, Chosen>>,
        ) {
            if i == var_cands.len() {
                out.push(stack.iter().cloned().collect());
                return;
            }
            let (name, cands) = &var_cands[i];
            let try_choice = |c: Chosen,
                                  stack: &mut Vec<(String, Chosen)>,
                                  out: &mut Vec<BTreeMap<String, Chosen>>| {
                stack.push((name.clone(), c));
                // Prune: any equation fully shaped must type-check.
                let asg = Asg {
                    pool,
                    map: stack.iter().cloned().collect(),
                };
                let bound: Vec<&String> = stack.iter().map(|(n, _)| n).collect();
                let ok = eq_var_sets.iter().all(|(vs, e)| {
                    if !vs.iter().all(|v| bound.iter().any(|b| *b == v)) {
                        return true; // not yet shaped
                    }
                    match (
                        pattern_arrow(&e.lhs, &asg, sig, false),
                        pattern_arrow(&e.rhs, &asg, sig, false),
                    ) {
                        (Some((ls, lt, _)), Some((rs, rt, _))) => ls == rs && lt == rt,
                        _ => false,
                    }
                });
                if ok {
                    shapes(var_cands, i + 1, stack, pool, sig, eq_var_sets, rule, out);
                }
                stack.pop();
            };
            match cands {
                Cands::Buckets(keys) => {
                    for key in keys {
                        try_choice(
                            Chosen::Term { key: key.clone(), idx: usize::MAX },
                            stack,
                            out,
                        );
                    }
                }
                Cands::Tys(ts) => {
                    for t in ts {
                        try_choice(Chosen::Ty(t.clone()), stack, out);
                    }
                }
                Cands::Excs(ns) => {
                    for n in ns {
                        try_choice(Chosen::ExcName(n.clone()), stack, out);
                    }
                }
                Cands::Locs(ns) => {
                    for n in ns {
                        try_choice(Chosen::LocName(n.clone()), stack, out);
                    }
                }
                Cands::Flags => {
                    for b in [true, false] {
                        try_choice(Chosen::Flag(b), stack, out);
                    }
                }
                Cands::Strengths => {
                    for s in [
                        Strength::STRONG,
                        Strength::WEAK_EXC,
                        Strength::WEAK_ST,
                        Strength::WEAK_BOTH,
                    ] {
                        try_choice(Chosen::Strength(s), stack, out);
                    }
                }
            }
        }
        shapes(
            &var_cands,
            0,
            &mut shape_stack,
            &pool,
            &sig,
            &eq_var_sets,
            rule,
            &mut instances,
        );

        // Stage 2: for every shape, run the odometer over the chosen
        // buckets' entries.
        for shape in instances {
            let term_vars: Vec<String> = shape
                .iter()
                .filter(|(_, c)| matches!(c, Chosen::Term { .. }))
                .map(|(v, _)| v.clone())
                .collect();
            let sizes: Vec<usize> = term_vars
                .iter()
                .map(|v| match &shape[v] {
                    Chosen::Term { key, .. } => pool[key].len(),
                    _ => unreachable!(),
                })
                .collect();
            if sizes.iter().any(|s| *s == 0) {
                continue;
            }
            let mut odo = vec![0usize; term_vars.len()];
            loop {
                let mut map = shape.clone();
                for (v, idx) in term_vars.iter().zip(&odo) {
                    if let Chosen::Term { key, .. } = &shape[v] {
                        map.insert(v.clone(), Chosen::Term { key: key.clone(), idx: *idx });
                    }
                }
                let asg = Asg { pool: &pool, map };
                run_instance(
                    rule,
                    &premises,
                    &conclusion,
                    &asg,
                    model,
                    &mut spaces,
                    check_sides,
                    &mut stat,
                    &mut counterexamples,
                );
                // Advance odometer.
                let mut k = 0;
                loop {
                    if k == odo.len() {
                        break;
                    }
                    odo[k] += 1;
                    if odo[k] < sizes[k] {
                        break;
                    }
                    odo[k] = 0;
                    k += 1;
                }
                if k == odo.len() {
                    break;
                }
                if odo.iter().all(|x| *x == 0) {
                    break;
                }
            }
        }

        timeouts_total += stat.timeouts;
        stats.push(stat);
    }

    ValidationReport { ruleset: which, stats, counterexamples, timeouts: timeouts_total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::parse_model;
    use crate::signature::parse_signature;

    fn exc_model() -> Model {
        let sig = parse_signature("base EV\nexception T : EV\nexception R : EV\n").unwrap();
        parse_model("carrier EV = v0 v1\nfuel 100\n", &sig).unwrap()
    }

    fn st_model() -> Model {
        let sig =
            parse_signature("base Val\nlocation X : Val\nlocation Y : Val\n").unwrap();
        parse_model("carrier Val = v0 v1\nfuel 100\n", &sig).unwrap()
    }

    #[test]
    fn exc_rules_are_sound_at_depth_two() {
        let m = exc_model();
        let report = validate_ruleset(
            RuleSet::Exc,
            &m,
            &HarnessOptions { depth: 2, ..Default::default() },
        );
        assert!(report.clean(), "{report}");
        assert!(report.stats.iter().all(|s| s.name != "R11" || s.instances > 0));
    }

    #[test]
    fn st_rules_are_sound_at_depth_two() {
        let m = st_model();
        let report = validate_ruleset(
            RuleSet::St,
            &m,
            &HarnessOptions { depth: 2, ..Default::default() },
        );
        assert!(report.clean(), "{report}");
    }

    #[test]
    fn sabotaged_r6_is_caught() {
        let m = exc_model();
        let report = validate_ruleset(
            RuleSet::Exc,
            &m,
            &HarnessOptions {
                depth: 3,
                only_rules: vec!["R6".into()],
                disable_sides_of: Some("R6".into()),
            },
        );
        assert!(
            !report.clean(),
            "disabling R6's purity side condition must surface a counterexample"
        );
    }

    #[test]
    fn sabotaged_r4_is_caught() {
        let m = exc_model();
        let report = validate_ruleset(
            RuleSet::Exc,
            &m,
            &HarnessOptions {
                depth: 3,
                only_rules: vec!["R4".into()],
                disable_sides_of: Some("R4".into()),
            },
        );
        assert!(!report.clean());
    }

    #[test]
    fn sabotaged_r7_is_caught_in_st() {
        let m = st_model();
        let report = validate_ruleset(
            RuleSet::St,
            &m,
            &HarnessOptions {
                depth: 3,
                only_rules: vec!["R7".into()],
                disable_sides_of: Some("R7".into()),
            },
        );
        assert!(!report.clean());
    }
}

#[allow(clippy::too_many_arguments)]
fn run_instance(
    rule: &Rule,
    premises: &[(EqPat, Option<(String, FamilyKind)>)],
    conclusion: &EqPat,
    asg: &Asg,
    model: &Model,
    spaces: &mut Spaces,
    check_sides: bool,
    stat: &mut RuleStat,
    counterexamples: &mut Vec<FailureRecord>,
) {
    let sig = model.signature();

    // Formation with decorations, for every equation side.
    let mut shaped = Vec::new();
    for (p, fam) in premises {
        let asg2;
        let asg_ref: &Asg = if let Some((name, kind)) = fam {
            let mut map = asg.map.clone();
            let chosen = match kind {
                FamilyKind::AllExceptions => Chosen::ExcName(name.clone()),
                FamilyKind::AllLocations => Chosen::LocName(name.clone()),
            };
            map.insert(rule.family.as_ref().unwrap().var.to_string(), chosen);
            asg2 = Asg { pool: asg.pool, map };
            &asg2
        } else {
            asg
        };
        let la = pattern_arrow(&p.lhs, asg_ref, sig, true);
        let ra = pattern_arrow(&p.rhs, asg_ref, sig, true);
        match (la, ra) {
            (Some(l), Some(r)) if l.0 == r.0 && l.1 == r.1 => {}
            _ => return, // ill-formed instance, skip
        }
        shaped.push((p.clone(), asg_ref.map.clone()));
    }
    let la = pattern_arrow(&conclusion.lhs, asg, sig, true);
    let ra = pattern_arrow(&conclusion.rhs, asg, sig, true);
    match (la, ra) {
        (Some(l), Some(r)) if l.0 == r.0 && l.1 == r.1 => {}
        _ => return,
    }

    if check_sides && !rule.sides.iter().all(|s| side_ok(s, asg)) {
        return;
    }

    stat.instances += 1;

    // Premises must hold.
    for (p, map) in &shaped {
        let asg_p = Asg { pool: asg.pool, map: map.clone() };
        match eq_outcome(p, &asg_p, model, spaces) {
            EqOutcome::Holds => {}
            EqOutcome::Fails(_) => return,
            EqOutcome::Timeout => {
                stat.timeouts += 1;
                return;
            }
        }
    }

    match eq_outcome(conclusion, asg, model, spaces) {
        EqOutcome::Holds => {}
        EqOutcome::Timeout => stat.timeouts += 1,
        EqOutcome::Fails(detail) => {
            stat.counterexamples += 1;
            if counterexamples.len() < 32 {
                let strength = asg
                    .strength_of(&conclusion.strength)
                    .unwrap_or(Strength::STRONG);
                let eq = Equation::new(
                    subst(&conclusion.lhs, asg, sig),
                    subst(&conclusion.rhs, asg, sig),
                    strength,
                );
                counterexamples.push(FailureRecord {
                    rule: rule.name.to_string(),
                    conclusion: eq,
                    detail,
                });
            }
        }
    }
}
