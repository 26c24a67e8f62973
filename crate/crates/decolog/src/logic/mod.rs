//! The three rule sets of the decorated logic — `EXC` for exceptions, `ST`
//! for state, `COMBINED` for both — represented as data: axiom schemas and
//! inference rules with decidable side conditions, plus the instantiation
//! and application engine.
//!
//! The engine is a checker, not a prover: premises are matched by
//! first-order structural matching seeded with explicitly given bindings,
//! with no search. Rule names (`R0a` … `R14c`, primed duals such as `R11'`)
//! are stable identifiers; a bare family name like `R2` or `R8` tries its
//! members in listed order.

mod engine;
mod rules;

pub use engine::{apply_rule, instantiate_axiom, Arg, LogicError};
pub use rules::{
    dualize_rule, eqpat_vars, find_rules, rule_canonical, rule_vars, ruleset, Effect, EqPat,
    Family, FamilyKind, ParamKind, Rule, RuleSet, SFlagPat, SPat, SideCond, TPat, TyPat, VarKind,
};

use std::fmt;

use crate::terms::DecoratedTerm;

/// Which of the two comparisons an equation is strict about. Strong
/// equality `==` is strict in both; the exception-weak equality `~exc`
/// skips exceptional inputs; the state-weak equality `~st` ignores final
/// states; `~~` does both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strength {
    pub exc_strict: bool,
    pub st_strict: bool,
}

impl Strength {
    pub const STRONG: Strength = Strength { exc_strict: true, st_strict: true };
    pub const WEAK_EXC: Strength = Strength { exc_strict: false, st_strict: true };
    pub const WEAK_ST: Strength = Strength { exc_strict: true, st_strict: false };
    pub const WEAK_BOTH: Strength = Strength { exc_strict: false, st_strict: false };

    pub fn new(exc_strict: bool, st_strict: bool) -> Self {
        Strength { exc_strict, st_strict }
    }

    /// Swap the two strictness flags; the duality image of this strength.
    pub fn dual(self) -> Strength {
        Strength { exc_strict: self.st_strict, st_strict: self.exc_strict }
    }

    /// `self` implies `other`: every comparison `other` makes, `self`
    /// already made.
    pub fn at_least(self, other: Strength) -> bool {
        (self.exc_strict || !other.exc_strict) && (self.st_strict || !other.st_strict)
    }

    pub fn parse(text: &str) -> Option<Strength> {
        match text {
            "==" => Some(Strength::STRONG),
            "~exc" => Some(Strength::WEAK_EXC),
            "~st" => Some(Strength::WEAK_ST),
            "~~" => Some(Strength::WEAK_BOTH),
            _ => None,
        }
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match (self.exc_strict, self.st_strict) {
            (true, true) => "==",
            (false, true) => "~exc",
            (true, false) => "~st",
            (false, false) => "~~",
        };
        write!(f, "{s}")
    }
}

/// A pair of parallel terms and the strength at which they are equated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equation {
    pub lhs: DecoratedTerm,
    pub rhs: DecoratedTerm,
    pub strength: Strength,
}

impl Equation {
    pub fn new(lhs: DecoratedTerm, rhs: DecoratedTerm, strength: Strength) -> Self {
        Equation { lhs, rhs, strength }
    }

    /// Compare both sides modulo composition associativity.
    pub fn matches(&self, other: &Equation) -> bool {
        self.strength == other.strength
            && self.lhs.normalize_assoc() == other.lhs.normalize_assoc()
            && self.rhs.normalize_assoc() == other.rhs.normalize_assoc()
    }

    /// Structural duality on both sides with the strength flags swapped.
    pub fn dualize(&self) -> Result<Equation, crate::terms::DualizeError> {
        Ok(Equation {
            lhs: self.lhs.dualize()?,
            rhs: self.rhs.dualize()?,
            strength: self.strength.dual(),
        })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.strength, self.rhs)
    }
}

#[cfg(test)]
mod strength_tests {
    use super::*;

    #[test]
    fn strength_hierarchy() {
        assert!(Strength::STRONG.at_least(Strength::WEAK_EXC));
        assert!(Strength::STRONG.at_least(Strength::WEAK_ST));
        assert!(Strength::WEAK_EXC.at_least(Strength::WEAK_BOTH));
        assert!(!Strength::WEAK_EXC.at_least(Strength::STRONG));
        assert!(!Strength::WEAK_ST.at_least(Strength::WEAK_EXC));
    }

    #[test]
    fn strength_round_trips_through_display() {
        for s in [Strength::STRONG, Strength::WEAK_EXC, Strength::WEAK_ST, Strength::WEAK_BOTH] {
            assert_eq!(Strength::parse(&s.to_string()), Some(s));
        }
    }

    #[test]
    fn dual_swaps_flags() {
        assert_eq!(Strength::WEAK_EXC.dual(), Strength::WEAK_ST);
        assert_eq!(Strength::STRONG.dual(), Strength::STRONG);
    }
}
