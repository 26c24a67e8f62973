//! The rule sets as data: every axiom schema and inference rule of the
//! exception logic, the state logic, and their merge, with decidable side
//! conditions.
//!
//! Naming: families from the public identifiers `R0`..`R14` split into
//! lettered members (`R0a`, `R0b`, `R0c`, ...); primed names (`R4'`,
//! `R11'`, ...) are the state-side duals. A family name used in a proof
//! script tries its members in listed order.
//!
//! Decorations are always inferred as least decorations, so the decoration
//! hierarchy (any pure term may stand where a thrower or catcher is
//! expected) is implicit in every side condition bound; `R3` records it as
//! an explicit no-op coercion step.

use std::fmt;
use std::str::FromStr;

use crate::logic::Strength;

/// Which rule set a script or harness runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleSet {
    Exc,
    St,
    Combined,
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleSet::Exc => "EXC",
            RuleSet::St => "ST",
            RuleSet::Combined => "COMBINED",
        };
        write!(f, "{s}")
    }
}

impl FromStr for RuleSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "EXC" => Ok(RuleSet::Exc),
            "ST" => Ok(RuleSet::St),
            "COMBINED" => Ok(RuleSet::Combined),
            other => Err(format!("unknown rule set `{other}` (expected EXC, ST or COMBINED)")),
        }
    }
}

/// Type patterns inside rule schemas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TyPat {
    Var(&'static str),
    Empty,
    Unit,
    /// Value type of the exception or location bound to a name variable.
    ValueOf(&'static str),
    /// Source type of the term bound to a term variable.
    SourceOf(&'static str),
    /// Target type of the term bound to a term variable.
    TargetOf(&'static str),
    /// Right summand of the target of a term variable (loop exit type).
    SumRightOfTarget(&'static str),
}

/// Term patterns: the term formers with metavariables at the leaves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TPat {
    Var(&'static str),
    Id(TyPat),
    Comp(Box<TPat>, Box<TPat>),
    Copair(Box<TPat>, Box<TPat>),
    Pair(Box<TPat>, Box<TPat>),
    Inl(TyPat, TyPat),
    Inr(TyPat, TyPat),
    FromEmpty(TyPat),
    ToUnit(TyPat),
    Proj1(TyPat, TyPat),
    Proj2(TyPat, TyPat),
    Tag(&'static str),
    Untag(&'static str),
    Lookup(&'static str),
    Update(&'static str),
    If(Box<TPat>, Box<TPat>, Box<TPat>),
    While(Box<TPat>, Box<TPat>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SFlagPat {
    Lit(bool),
    Var(&'static str),
}

/// Strength patterns: a fixed strength, a whole-strength variable, or the
/// two flags patterned independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SPat {
    Lit(Strength),
    Whole(&'static str),
    Flags(SFlagPat, SFlagPat),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EqPat {
    pub lhs: TPat,
    pub rhs: TPat,
    pub strength: SPat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Effect {
    Exc,
    St,
}

/// Decidable side conditions, evaluated on the fully bound instantiation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SideCond {
    /// The effect component of the bound term's decoration is at most `max`.
    DecAtMost { term: &'static str, effect: Effect, max: u8 },
    /// When the flag variable is bound weak (false), the bound term must be
    /// pure in the given effect.
    PureIfWeak { flag: &'static str, effect: Effect, term: &'static str },
    DistinctNames(&'static str, &'static str),
    SourceIsEmpty(&'static str),
    TargetIsUnit(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParamKind {
    Term,
    ExcName,
    LocName,
    Strength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FamilyKind {
    AllExceptions,
    AllLocations,
}

/// One premise schema instantiated once per declared name of the family
/// kind, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub kind: FamilyKind,
    pub var: &'static str,
    pub schema: EqPat,
}

/// A named axiom schema (no premises) or inference rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: &'static str,
    /// Explicit instantiation parameters, in argument order.
    pub params: Vec<(&'static str, ParamKind)>,
    pub premises: Vec<EqPat>,
    pub family: Option<Family>,
    pub conclusion: EqPat,
    pub sides: Vec<SideCond>,
}

impl Rule {
    pub fn is_axiom(&self) -> bool {
        self.premises.is_empty() && self.family.is_none()
    }
}

// Shorthand constructors; the rule tables below read much better with them.
fn v(n: &'static str) -> TPat {
    TPat::Var(n)
}

fn comp(a: TPat, b: TPat) -> TPat {
    TPat::Comp(Box::new(a), Box::new(b))
}

fn copair(a: TPat, b: TPat) -> TPat {
    TPat::Copair(Box::new(a), Box::new(b))
}

fn pair(a: TPat, b: TPat) -> TPat {
    TPat::Pair(Box::new(a), Box::new(b))
}

fn eq(lhs: TPat, strength: SPat, rhs: TPat) -> EqPat {
    EqPat { lhs, rhs, strength }
}

const STRONG: SPat = SPat::Lit(Strength::STRONG);
const WEAK_EXC: SPat = SPat::Lit(Strength::WEAK_EXC);
const WEAK_ST: SPat = SPat::Lit(Strength::WEAK_ST);

fn flags(a: SFlagPat, b: SFlagPat) -> SPat {
    SPat::Flags(a, b)
}

fn fvar(n: &'static str) -> SFlagPat {
    SFlagPat::Var(n)
}

fn flit(b: bool) -> SFlagPat {
    SFlagPat::Lit(b)
}

fn axiom(
    name: &'static str,
    params: Vec<(&'static str, ParamKind)>,
    conclusion: EqPat,
    sides: Vec<SideCond>,
) -> Rule {
    Rule { name, params, premises: Vec::new(), family: None, conclusion, sides }
}

fn rule(
    name: &'static str,
    params: Vec<(&'static str, ParamKind)>,
    premises: Vec<EqPat>,
    conclusion: EqPat,
    sides: Vec<SideCond>,
) -> Rule {
    Rule { name, params, premises, family: None, conclusion, sides }
}

fn exc_pure(term: &'static str) -> SideCond {
    SideCond::DecAtMost { term, effect: Effect::Exc, max: 0 }
}

fn exc_at_most(term: &'static str, max: u8) -> SideCond {
    SideCond::DecAtMost { term, effect: Effect::Exc, max }
}

fn st_at_most(term: &'static str, max: u8) -> SideCond {
    SideCond::DecAtMost { term, effect: Effect::St, max }
}

// Rules shared by every rule set: equational logic plus the two-flag
// strength machinery.
fn shared_rules() -> Vec<Rule> {
    vec![
        // R0: category laws.
        axiom(
            "R0a",
            vec![("f", ParamKind::Term)],
            eq(comp(v("f"), TPat::Id(TyPat::SourceOf("f"))), STRONG, v("f")),
            vec![],
        ),
        axiom(
            "R0b",
            vec![("f", ParamKind::Term)],
            eq(comp(TPat::Id(TyPat::TargetOf("f")), v("f")), STRONG, v("f")),
            vec![],
        ),
        axiom(
            "R0c",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term), ("h", ParamKind::Term)],
            eq(
                comp(comp(v("f"), v("g")), v("h")),
                STRONG,
                comp(v("f"), comp(v("g"), v("h"))),
            ),
            vec![],
        ),
        // R1: both equalities are equivalence relations, at every strength.
        axiom(
            "R1r",
            vec![("f", ParamKind::Term), ("s", ParamKind::Strength)],
            eq(v("f"), SPat::Whole("s"), v("f")),
            vec![],
        ),
        rule(
            "R1s",
            vec![],
            vec![eq(v("f"), SPat::Whole("s"), v("g"))],
            eq(v("g"), SPat::Whole("s"), v("f")),
            vec![],
        ),
        rule(
            "R1t",
            vec![],
            vec![
                eq(v("f"), SPat::Whole("s"), v("g")),
                eq(v("g"), SPat::Whole("s"), v("h")),
            ],
            eq(v("f"), SPat::Whole("s"), v("h")),
            vec![],
        ),
        // R2: strength hierarchy, strict implies weak per flag.
        rule(
            "R2a",
            vec![],
            vec![eq(v("f"), flags(flit(true), fvar("ws")), v("g"))],
            eq(v("f"), flags(flit(false), fvar("ws")), v("g")),
            vec![],
        ),
        rule(
            "R2b",
            vec![],
            vec![eq(v("f"), flags(fvar("wx"), flit(true)), v("g"))],
            eq(v("f"), flags(fvar("wx"), flit(false)), v("g")),
            vec![],
        ),
        // R3: decoration hierarchy. Inference computes least decorations and
        // side conditions are upper bounds, so the upcast carries no content
        // here; the step is kept for proofs written rule-by-rule.
        rule(
            "R3",
            vec![],
            vec![eq(v("f"), SPat::Whole("s"), v("g"))],
            eq(v("f"), SPat::Whole("s"), v("g")),
            vec![],
        ),
        // R5: strong congruence on both sides.
        rule(
            "R5l",
            vec![("g", ParamKind::Term)],
            vec![eq(v("f1"), STRONG, v("f2"))],
            eq(comp(v("g"), v("f1")), STRONG, comp(v("g"), v("f2"))),
            vec![],
        ),
        rule(
            "R5r",
            vec![("g", ParamKind::Term)],
            vec![eq(v("f1"), STRONG, v("f2"))],
            eq(comp(v("f1"), v("g")), STRONG, comp(v("f2"), v("g"))),
            vec![],
        ),
        // R6: weak substitution. Pre-composing g under an exception-weak
        // premise is sound only when g cannot raise.
        rule(
            "R6",
            vec![("g", ParamKind::Term)],
            vec![eq(v("f1"), flags(fvar("wx"), fvar("ws")), v("f2"))],
            eq(
                comp(v("f1"), v("g")),
                flags(fvar("wx"), fvar("ws")),
                comp(v("f2"), v("g")),
            ),
            vec![SideCond::PureIfWeak { flag: "wx", effect: Effect::Exc, term: "g" }],
        ),
        // R7: weak replacement, the mirror of R6 on the state flag.
        rule(
            "R7",
            vec![("g", ParamKind::Term)],
            vec![eq(v("f1"), flags(fvar("wx"), fvar("ws")), v("f2"))],
            eq(
                comp(v("g"), v("f1")),
                flags(fvar("wx"), fvar("ws")),
                comp(v("g"), v("f2")),
            ),
            vec![SideCond::PureIfWeak { flag: "ws", effect: Effect::St, term: "g" }],
        ),
    ]
}

// R4: a weak equation between terms that both propagate exceptions upgrades
// to an exception-strict one.
fn r4() -> Rule {
    rule(
        "R4",
        vec![],
        vec![eq(v("f"), flags(flit(false), fvar("ws")), v("g"))],
        eq(v("f"), flags(flit(true), fvar("ws")), v("g")),
        vec![exc_at_most("f", 1), exc_at_most("g", 1)],
    )
}

// R4': dual upgrade on the state flag for terms that never write.
fn r4_prime() -> Rule {
    rule(
        "R4'",
        vec![],
        vec![eq(v("f"), flags(fvar("wx"), flit(false)), v("g"))],
        eq(v("f"), flags(fvar("wx"), flit(true)), v("g")),
        vec![st_at_most("f", 1), st_at_most("g", 1)],
    )
}

// Exception-side specific rules (the `combined` flag adds the side
// conditions the merged semantics needs).
fn exc_side_rules(_combined: bool) -> Vec<Rule> {
    vec![
        // R8: copair characteristic equations.
        axiom(
            "R8a",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            eq(
                comp(
                    copair(v("f"), v("g")),
                    TPat::Inl(TyPat::SourceOf("f"), TyPat::SourceOf("g")),
                ),
                WEAK_EXC,
                v("f"),
            ),
            vec![],
        ),
        axiom(
            "R8b",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            eq(
                comp(
                    copair(v("f"), v("g")),
                    TPat::Inr(TyPat::SourceOf("f"), TyPat::SourceOf("g")),
                ),
                STRONG,
                v("g"),
            ),
            vec![],
        ),
        // R9: copair uniqueness; a term out of a sum is determined by its
        // action on the two injections, exceptional inputs going with inr.
        rule(
            "R9",
            vec![],
            vec![
                eq(
                    comp(v("h1"), TPat::Inl(TyPat::Var("a"), TyPat::Var("b"))),
                    WEAK_EXC,
                    comp(v("h2"), TPat::Inl(TyPat::Var("a"), TyPat::Var("b"))),
                ),
                eq(
                    comp(v("h1"), TPat::Inr(TyPat::Var("a"), TyPat::Var("b"))),
                    STRONG,
                    comp(v("h2"), TPat::Inr(TyPat::Var("a"), TyPat::Var("b"))),
                ),
            ],
            eq(v("h1"), STRONG, v("h2")),
            vec![],
        ),
        // R10: the empty type has no ordinary values, so any two parallel
        // terms out of it agree exception-weakly.
        axiom(
            "R10",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            eq(v("f"), WEAK_EXC, v("g")),
            vec![SideCond::SourceIsEmpty("f"), SideCond::SourceIsEmpty("g")],
        ),
        // R11: untag recovers what tag encapsulated.
        axiom(
            "R11",
            vec![("t", ParamKind::ExcName)],
            eq(
                comp(TPat::Untag("t"), TPat::Tag("t")),
                WEAK_EXC,
                TPat::Id(TyPat::ValueOf("t")),
            ),
            vec![],
        ),
        // R12: untagging a foreign exception propagates it.
        axiom(
            "R12",
            vec![("t", ParamKind::ExcName), ("r", ParamKind::ExcName)],
            eq(
                comp(TPat::Untag("t"), TPat::Tag("r")),
                WEAK_EXC,
                comp(TPat::FromEmpty(TyPat::ValueOf("t")), TPat::Tag("r")),
            ),
            vec![SideCond::DistinctNames("t", "r")],
        ),
    ]
}

// State-side specific rules. In the merged logic the pair characteristic
// equations and the unit-weak axiom pick up exception-purity side
// conditions: a raising second component would make the projected value
// differ, and a raising term into the unit type is observably different
// from one that returns. The single-effect state fragment has no throwers,
// so there the conditions are omitted (and the lists stay exact duals).
fn st_side_rules(combined: bool) -> Vec<Rule> {
    let extra = |mut sides: Vec<SideCond>, added: &[SideCond]| {
        if combined {
            sides.extend(added.iter().cloned());
        }
        sides
    };
    vec![
        axiom(
            "R8'a",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            eq(
                comp(
                    TPat::Proj1(TyPat::TargetOf("f"), TyPat::TargetOf("g")),
                    pair(v("f"), v("g")),
                ),
                WEAK_ST,
                v("f"),
            ),
            extra(vec![], &[exc_pure("g")]),
        ),
        axiom(
            "R8'b",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            eq(
                comp(
                    TPat::Proj2(TyPat::TargetOf("f"), TyPat::TargetOf("g")),
                    pair(v("f"), v("g")),
                ),
                STRONG,
                v("g"),
            ),
            extra(vec![], &[exc_at_most("g", 1)]),
        ),
        rule(
            "R9'",
            vec![],
            vec![
                eq(
                    comp(TPat::Proj1(TyPat::Var("a"), TyPat::Var("b")), v("h1")),
                    WEAK_ST,
                    comp(TPat::Proj1(TyPat::Var("a"), TyPat::Var("b")), v("h2")),
                ),
                eq(
                    comp(TPat::Proj2(TyPat::Var("a"), TyPat::Var("b")), v("h1")),
                    STRONG,
                    comp(TPat::Proj2(TyPat::Var("a"), TyPat::Var("b")), v("h2")),
                ),
            ],
            eq(v("h1"), STRONG, v("h2")),
            vec![],
        ),
        axiom(
            "R10'",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            eq(v("f"), WEAK_ST, v("g")),
            extra(
                vec![SideCond::TargetIsUnit("f"), SideCond::TargetIsUnit("g")],
                &[exc_pure("f"), exc_pure("g")],
            ),
        ),
        axiom(
            "R11'",
            vec![("x", ParamKind::LocName)],
            eq(
                comp(TPat::Lookup("x"), TPat::Update("x")),
                WEAK_ST,
                TPat::Id(TyPat::ValueOf("x")),
            ),
            vec![],
        ),
        axiom(
            "R12'",
            vec![("x", ParamKind::LocName), ("y", ParamKind::LocName)],
            eq(
                comp(TPat::Lookup("y"), TPat::Update("x")),
                WEAK_ST,
                comp(TPat::Lookup("y"), TPat::ToUnit(TyPat::ValueOf("x"))),
            ),
            vec![SideCond::DistinctNames("x", "y")],
        ),
    ]
}

// R13: exception observation, single-effect only. Terms out of the empty
// type are determined by their action on every tagged value.
fn r13() -> Rule {
    Rule {
        name: "R13",
        params: vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
        premises: Vec::new(),
        family: Some(Family {
            kind: FamilyKind::AllExceptions,
            var: "T",
            schema: eq(
                comp(v("f"), TPat::Tag("T")),
                WEAK_EXC,
                comp(v("g"), TPat::Tag("T")),
            ),
        }),
        conclusion: eq(v("f"), STRONG, v("g")),
        sides: vec![SideCond::SourceIsEmpty("f"), SideCond::SourceIsEmpty("g")],
    }
}

// R13': state observation, single-effect only. Terms into the unit type are
// determined by every lookup after them.
fn r13_prime() -> Rule {
    Rule {
        name: "R13'",
        params: vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
        premises: Vec::new(),
        family: Some(Family {
            kind: FamilyKind::AllLocations,
            var: "X",
            schema: eq(
                comp(TPat::Lookup("X"), v("f")),
                WEAK_ST,
                comp(TPat::Lookup("X"), v("g")),
            ),
        }),
        conclusion: eq(v("f"), STRONG, v("g")),
        sides: vec![SideCond::TargetIsUnit("f"), SideCond::TargetIsUnit("g")],
    }
}

// R14: conditional and loop laws for the merged logic. The strong
// conclusions need the kept branch to propagate exceptions, since the
// primitive conditional always propagates exceptional inputs.
fn r14() -> Vec<Rule> {
    vec![
        rule(
            "R14a",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            vec![eq(v("b"), STRONG, TPat::Inl(TyPat::Var("L"), TyPat::Var("R")))],
            eq(
                TPat::If(Box::new(v("b")), Box::new(v("f")), Box::new(v("g"))),
                STRONG,
                v("f"),
            ),
            vec![exc_at_most("f", 1)],
        ),
        rule(
            "R14b",
            vec![("f", ParamKind::Term), ("g", ParamKind::Term)],
            vec![eq(v("b"), STRONG, TPat::Inr(TyPat::Var("L"), TyPat::Var("R")))],
            eq(
                TPat::If(Box::new(v("b")), Box::new(v("f")), Box::new(v("g"))),
                STRONG,
                v("g"),
            ),
            vec![exc_at_most("g", 1)],
        ),
        axiom(
            "R14c",
            vec![("b", ParamKind::Term), ("f", ParamKind::Term)],
            eq(
                TPat::While(Box::new(v("b")), Box::new(v("f"))),
                STRONG,
                TPat::If(
                    Box::new(v("b")),
                    Box::new(comp(
                        TPat::While(Box::new(v("b")), Box::new(v("f"))),
                        v("f"),
                    )),
                    Box::new(TPat::Id(TyPat::SumRightOfTarget("b"))),
                ),
            ),
            vec![],
        ),
    ]
}

/// The full rule list of a rule set, in stable order.
pub fn ruleset(which: RuleSet) -> Vec<Rule> {
    let mut out = shared_rules();
    match which {
        RuleSet::Exc => {
            out.insert(9, r4()); // after R3, before R5l
            out.extend(exc_side_rules(false));
            out.push(r13());
        }
        RuleSet::St => {
            out.insert(9, r4_prime());
            out.extend(st_side_rules(false));
            out.push(r13_prime());
        }
        RuleSet::Combined => {
            out.insert(9, r4_prime());
            out.insert(9, r4());
            out.extend(exc_side_rules(true));
            out.extend(st_side_rules(true));
            out.extend(r14());
        }
    }
    out
}

/// Exact-name lookup, falling back to family members: `R8` matches `R8a`
/// and `R8b`, `R8'` matches `R8'a` and `R8'b`, but `R8` never matches a
/// primed member.
pub fn find_rules<'a>(rules: &'a [Rule], query: &str) -> Vec<&'a Rule> {
    if let Some(r) = rules.iter().find(|r| r.name == query) {
        return vec![r];
    }
    rules
        .iter()
        .filter(|r| {
            r.name.strip_prefix(query).is_some_and(|rest| {
                !rest.is_empty() && rest.chars().all(|c| c.is_ascii_lowercase())
            })
        })
        .collect()
}

// ---------------------------------------------------------------------
// Variable inventory, used by the soundness harness to enumerate
// instantiations.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Term,
    Ty,
    ExcName,
    LocName,
    Flag,
    StrengthWhole,
}

fn record(out: &mut Vec<(String, VarKind)>, name: &str, kind: VarKind) {
    if !out.iter().any(|(n, _)| n == name) {
        out.push((name.to_string(), kind));
    }
}

fn typat_var_kinds(t: &TyPat, out: &mut Vec<(String, VarKind)>) {
    match t {
        TyPat::Var(v) => record(out, v, VarKind::Ty),
        // A ValueOf name variable must already be recorded through a
        // parameter or a tag/lookup pattern; accessors add their term var.
        TyPat::ValueOf(_) => {}
        TyPat::SourceOf(v) | TyPat::TargetOf(v) | TyPat::SumRightOfTarget(v) => {
            record(out, v, VarKind::Term)
        }
        TyPat::Empty | TyPat::Unit => {}
    }
}

fn tpat_var_kinds(t: &TPat, out: &mut Vec<(String, VarKind)>) {
    match t {
        TPat::Var(v) => record(out, v, VarKind::Term),
        TPat::Id(ty) | TPat::FromEmpty(ty) | TPat::ToUnit(ty) => typat_var_kinds(ty, out),
        TPat::Comp(a, b) | TPat::Copair(a, b) | TPat::Pair(a, b) => {
            tpat_var_kinds(a, out);
            tpat_var_kinds(b, out);
        }
        TPat::Inl(a, b) | TPat::Inr(a, b) | TPat::Proj1(a, b) | TPat::Proj2(a, b) => {
            typat_var_kinds(a, out);
            typat_var_kinds(b, out);
        }
        TPat::Tag(n) | TPat::Untag(n) => record(out, n, VarKind::ExcName),
        TPat::Lookup(n) | TPat::Update(n) => record(out, n, VarKind::LocName),
        TPat::If(a, b, c) => {
            tpat_var_kinds(a, out);
            tpat_var_kinds(b, out);
            tpat_var_kinds(c, out);
        }
        TPat::While(a, b) => {
            tpat_var_kinds(a, out);
            tpat_var_kinds(b, out);
        }
    }
}

fn spat_var_kinds(s: &SPat, out: &mut Vec<(String, VarKind)>) {
    match s {
        SPat::Lit(_) => {}
        SPat::Whole(v) => record(out, v, VarKind::StrengthWhole),
        SPat::Flags(a, b) => {
            for f in [a, b] {
                if let SFlagPat::Var(v) = f {
                    record(out, v, VarKind::Flag);
                }
            }
        }
    }
}

fn eqpat_var_kinds(e: &EqPat, out: &mut Vec<(String, VarKind)>) {
    tpat_var_kinds(&e.lhs, out);
    tpat_var_kinds(&e.rhs, out);
    spat_var_kinds(&e.strength, out);
}

/// All variable names in an equation pattern (terms, types, names, flags,
/// strengths).
pub fn eqpat_vars(e: &EqPat, out: &mut Vec<String>) {
    let mut kinds = Vec::new();
    eqpat_var_kinds(e, &mut kinds);
    for (n, _) in kinds {
        if !out.contains(&n) {
            out.push(n);
        }
    }
}

/// Every variable a rule instantiation must choose, with its kind:
/// parameters first (in declared order), then pattern variables in
/// traversal order. The family variable is excluded — it is bound per
/// premise.
pub fn rule_vars(rule: &Rule) -> Vec<(String, VarKind)> {
    let mut out = Vec::new();
    for (name, kind) in &rule.params {
        let k = match kind {
            ParamKind::Term => VarKind::Term,
            ParamKind::ExcName => VarKind::ExcName,
            ParamKind::LocName => VarKind::LocName,
            ParamKind::Strength => VarKind::StrengthWhole,
        };
        record(&mut out, name, k);
    }
    for p in &rule.premises {
        eqpat_var_kinds(p, &mut out);
    }
    if let Some(fam) = &rule.family {
        eqpat_var_kinds(&fam.schema, &mut out);
    }
    eqpat_var_kinds(&rule.conclusion, &mut out);
    if let Some(fam) = &rule.family {
        out.retain(|(n, _)| n != fam.var);
    }
    out
}

// ---------------------------------------------------------------------
// Structural duality on rules.

fn dual_typat(t: &TyPat) -> TyPat {
    match t {
        TyPat::Var(v) => TyPat::Var(v),
        TyPat::Empty => TyPat::Unit,
        TyPat::Unit => TyPat::Empty,
        TyPat::ValueOf(n) => TyPat::ValueOf(n),
        // Duality reverses arrows, so the endpoints trade places.
        TyPat::SourceOf(v) => TyPat::TargetOf(v),
        TyPat::TargetOf(v) => TyPat::SourceOf(v),
        TyPat::SumRightOfTarget(_) => {
            unreachable!("loop rules are combined-only and are never dualized")
        }
    }
}

fn dual_tpat(t: &TPat) -> TPat {
    match t {
        TPat::Var(v) => TPat::Var(v),
        TPat::Id(ty) => TPat::Id(dual_typat(ty)),
        TPat::Comp(a, b) => TPat::Comp(Box::new(dual_tpat(b)), Box::new(dual_tpat(a))),
        TPat::Copair(a, b) => TPat::Pair(Box::new(dual_tpat(a)), Box::new(dual_tpat(b))),
        TPat::Pair(a, b) => TPat::Copair(Box::new(dual_tpat(a)), Box::new(dual_tpat(b))),
        TPat::Inl(a, b) => TPat::Proj1(dual_typat(a), dual_typat(b)),
        TPat::Inr(a, b) => TPat::Proj2(dual_typat(a), dual_typat(b)),
        TPat::Proj1(a, b) => TPat::Inl(dual_typat(a), dual_typat(b)),
        TPat::Proj2(a, b) => TPat::Inr(dual_typat(a), dual_typat(b)),
        TPat::FromEmpty(ty) => TPat::ToUnit(dual_typat(ty)),
        TPat::ToUnit(ty) => TPat::FromEmpty(dual_typat(ty)),
        TPat::Tag(n) => TPat::Lookup(n),
        TPat::Untag(n) => TPat::Update(n),
        TPat::Lookup(n) => TPat::Tag(n),
        TPat::Update(n) => TPat::Untag(n),
        TPat::If(..) | TPat::While(..) => {
            unreachable!("loop rules are combined-only and are never dualized")
        }
    }
}

fn dual_spat(s: &SPat) -> SPat {
    match s {
        SPat::Lit(st) => SPat::Lit(st.dual()),
        SPat::Whole(v) => SPat::Whole(v),
        SPat::Flags(a, b) => SPat::Flags(*b, *a),
    }
}

fn dual_eqpat(e: &EqPat) -> EqPat {
    EqPat { lhs: dual_tpat(&e.lhs), rhs: dual_tpat(&e.rhs), strength: dual_spat(&e.strength) }
}

fn dual_effect(e: Effect) -> Effect {
    match e {
        Effect::Exc => Effect::St,
        Effect::St => Effect::Exc,
    }
}

fn dual_side(s: &SideCond) -> SideCond {
    match s {
        SideCond::DecAtMost { term, effect, max } => {
            SideCond::DecAtMost { term, effect: dual_effect(*effect), max: *max }
        }
        SideCond::PureIfWeak { flag, effect, term } => {
            SideCond::PureIfWeak { flag, effect: dual_effect(*effect), term }
        }
        SideCond::DistinctNames(a, b) => SideCond::DistinctNames(a, b),
        SideCond::SourceIsEmpty(v) => SideCond::TargetIsUnit(v),
        SideCond::TargetIsUnit(v) => SideCond::SourceIsEmpty(v),
    }
}

/// The duality image of a rule under the fixed renaming table. Keeps the
/// name; comparisons between rule sets are name-insensitive.
pub fn dualize_rule(r: &Rule) -> Rule {
    Rule {
        name: r.name,
        params: r
            .params
            .iter()
            .map(|(n, k)| {
                let k = match k {
                    ParamKind::ExcName => ParamKind::LocName,
                    ParamKind::LocName => ParamKind::ExcName,
                    other => *other,
                };
                (*n, k)
            })
            .collect(),
        premises: r.premises.iter().map(dual_eqpat).collect(),
        family: r.family.as_ref().map(|fam| Family {
            kind: match fam.kind {
                FamilyKind::AllExceptions => FamilyKind::AllLocations,
                FamilyKind::AllLocations => FamilyKind::AllExceptions,
            },
            var: fam.var,
            schema: dual_eqpat(&fam.schema),
        }),
        conclusion: dual_eqpat(&r.conclusion),
        sides: r.sides.iter().map(dual_side).collect(),
    }
}

// ---------------------------------------------------------------------
// Canonical forms: name-insensitive, variable-renaming-insensitive and
// equation-orientation-insensitive serializations, used to compare rule
// sets structurally.

struct Canon {
    map: Vec<(String, String)>,
}

impl Canon {
    fn new() -> Self {
        Canon { map: Vec::new() }
    }

    fn var(&mut self, kind: &str, name: &str) -> String {
        let key = format!("{kind}:{name}");
        if let Some((_, v)) = self.map.iter().find(|(k, _)| *k == key) {
            return v.clone();
        }
        let fresh = format!("x{}", self.map.len());
        self.map.push((key, fresh.clone()));
        fresh
    }

    fn typat(&mut self, t: &TyPat) -> String {
        match t {
            TyPat::Var(v) => self.var("ty", v),
            TyPat::Empty => "0".into(),
            TyPat::Unit => "1".into(),
            TyPat::ValueOf(n) => format!("V[{}]", self.var("name", n)),
            TyPat::SourceOf(v) => format!("src[{}]", self.var("term", v)),
            TyPat::TargetOf(v) => format!("tgt[{}]", self.var("term", v)),
            TyPat::SumRightOfTarget(v) => format!("sumr[{}]", self.var("term", v)),
        }
    }

    fn tpat(&mut self, t: &TPat) -> String {
        match t {
            TPat::Var(v) => self.var("term", v),
            TPat::Id(ty) => format!("id({})", self.typat(ty)),
            TPat::Comp(a, b) => format!("comp({},{})", self.tpat(a), self.tpat(b)),
            TPat::Copair(a, b) => format!("copair({},{})", self.tpat(a), self.tpat(b)),
            TPat::Pair(a, b) => format!("pair({},{})", self.tpat(a), self.tpat(b)),
            TPat::Inl(a, b) => format!("inl({},{})", self.typat(a), self.typat(b)),
            TPat::Inr(a, b) => format!("inr({},{})", self.typat(a), self.typat(b)),
            TPat::Proj1(a, b) => format!("pi1({},{})", self.typat(a), self.typat(b)),
            TPat::Proj2(a, b) => format!("pi2({},{})", self.typat(a), self.typat(b)),
            TPat::FromEmpty(ty) => format!("from0({})", self.typat(ty)),
            TPat::ToUnit(ty) => format!("to1({})", self.typat(ty)),
            TPat::Tag(n) => format!("tag({})", self.var("name", n)),
            TPat::Untag(n) => format!("untag({})", self.var("name", n)),
            TPat::Lookup(n) => format!("lookup({})", self.var("name", n)),
            TPat::Update(n) => format!("update({})", self.var("name", n)),
            TPat::If(b, f, g) => {
                format!("if({},{},{})", self.tpat(b), self.tpat(f), self.tpat(g))
            }
            TPat::While(b, f) => format!("while({},{})", self.tpat(b), self.tpat(f)),
        }
    }

    fn sflag(&mut self, s: &SFlagPat) -> String {
        match s {
            SFlagPat::Lit(b) => b.to_string(),
            SFlagPat::Var(v) => self.var("flag", v),
        }
    }

    fn spat(&mut self, s: &SPat) -> String {
        match s {
            SPat::Lit(st) => format!("({},{})", st.exc_strict, st.st_strict),
            SPat::Whole(v) => self.var("strength", v),
            SPat::Flags(a, b) => format!("({},{})", self.sflag(a), self.sflag(b)),
        }
    }

    fn eqpat(&mut self, e: &EqPat, flipped: bool) -> String {
        let (l, r) = if flipped { (&e.rhs, &e.lhs) } else { (&e.lhs, &e.rhs) };
        format!("{} ={}= {}", self.tpat(l), self.spat(&e.strength), self.tpat(r))
    }

    fn side(&mut self, s: &SideCond) -> String {
        match s {
            SideCond::DecAtMost { term, effect, max } => {
                format!("dec[{:?}]({})<={}", effect, self.var("term", term), max)
            }
            SideCond::PureIfWeak { flag, effect, term } => format!(
                "pureifweak[{:?}]({},{})",
                effect,
                self.var("flag", flag),
                self.var("term", term)
            ),
            SideCond::DistinctNames(a, b) => {
                format!("distinct({},{})", self.var("name", a), self.var("name", b))
            }
            SideCond::SourceIsEmpty(v) => format!("src0({})", self.var("term", v)),
            SideCond::TargetIsUnit(v) => format!("tgt1({})", self.var("term", v)),
        }
    }
}

/// A canonical serialization of a rule: metavariables renamed in traversal
/// order, the name dropped, and each equation oriented to give the
/// lexicographically least overall form. Two rules with equal canonical
/// forms are the same schema up to renaming and equation orientation.
pub fn rule_canonical(r: &Rule) -> String {
    let mut eqs: Vec<&EqPat> = r.premises.iter().collect();
    if let Some(fam) = &r.family {
        eqs.push(&fam.schema);
    }
    eqs.push(&r.conclusion);
    let n = eqs.len();
    let mut best: Option<String> = None;
    for mask in 0..(1u32 << n) {
        let mut canon = Canon::new();
        let mut parts = Vec::new();
        if let Some(fam) = &r.family {
            // Bind the family variable first so it gets a stable slot.
            let v = canon.var("name", fam.var);
            parts.push(format!("family[{:?}]({v})", fam.kind));
        }
        for (i, e) in eqs.iter().enumerate() {
            let flipped = mask & (1 << i) != 0;
            let label = if i + 1 == n { "concl" } else { "prem" };
            parts.push(format!("{label}: {}", canon.eqpat(e, flipped)));
        }
        let mut sides: Vec<String> = r.sides.iter().map(|s| canon.side(s)).collect();
        sides.sort();
        parts.extend(sides);
        let s = parts.join("; ");
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    }
    best.expect("at least one orientation")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(which: RuleSet) -> Vec<&'static str> {
        ruleset(which).iter().map(|r| r.name).collect()
    }

    #[test]
    fn exc_has_r11_but_not_its_dual() {
        let n = names(RuleSet::Exc);
        assert!(n.contains(&"R11"));
        assert!(!n.contains(&"R11'"));
        let n = names(RuleSet::St);
        assert!(n.contains(&"R11'"));
        assert!(!n.contains(&"R11"));
    }

    #[test]
    fn combined_contains_both_fragments_minus_observation() {
        let combined = names(RuleSet::Combined);
        for which in [RuleSet::Exc, RuleSet::St] {
            for name in names(which) {
                if name == "R13" || name == "R13'" {
                    assert!(!combined.contains(&name), "{name} must stay single-effect");
                } else {
                    assert!(combined.contains(&name), "{name} missing from COMBINED");
                }
            }
        }
        for name in ["R14a", "R14b", "R14c"] {
            assert!(combined.contains(&name));
        }
    }

    #[test]
    fn family_lookup_respects_primes() {
        let rules = ruleset(RuleSet::Combined);
        let r8 = find_rules(&rules, "R8");
        assert_eq!(r8.iter().map(|r| r.name).collect::<Vec<_>>(), vec!["R8a", "R8b"]);
        let r8p = find_rules(&rules, "R8'");
        assert_eq!(r8p.iter().map(|r| r.name).collect::<Vec<_>>(), vec!["R8'a", "R8'b"]);
        let exact = find_rules(&rules, "R11'");
        assert_eq!(exact.iter().map(|r| r.name).collect::<Vec<_>>(), vec!["R11'"]);
        assert!(find_rules(&rules, "R99").is_empty());
    }

    #[test]
    fn dualizing_exc_yields_st() {
        // Structural comparison under the renaming table; names ignored.
        let mut dual_exc: Vec<String> =
            ruleset(RuleSet::Exc).iter().map(|r| rule_canonical(&dualize_rule(r))).collect();
        let mut st: Vec<String> =
            ruleset(RuleSet::St).iter().map(rule_canonical).collect();
        dual_exc.sort();
        st.sort();
        assert_eq!(dual_exc, st);
    }

    #[test]
    fn dualize_rule_is_involutive() {
        for r in ruleset(RuleSet::Exc) {
            let twice = dualize_rule(&dualize_rule(&r));
            assert_eq!(rule_canonical(&twice), rule_canonical(&r), "{}", r.name);
        }
    }

    #[test]
    fn canonical_form_identifies_renamed_rules() {
        let a = rule(
            "X1",
            vec![],
            vec![eq(v("f"), SPat::Whole("s"), v("g"))],
            eq(v("g"), SPat::Whole("s"), v("f")),
            vec![],
        );
        let b = rule(
            "X2",
            vec![],
            vec![eq(v("p"), SPat::Whole("w"), v("q"))],
            eq(v("q"), SPat::Whole("w"), v("p")),
            vec![],
        );
        assert_eq!(rule_canonical(&a), rule_canonical(&b));
    }
}
