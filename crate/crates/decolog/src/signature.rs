//! Ambient vocabulary: base types, exception names with their value types,
//! state locations with their value types, and pure operation symbols.
//!
//! Signature files hold one declaration per line, `#` starts a comment:
//!
//! ```text
//! base <Name>
//! exception <Name> : <Base>
//! location <Name> : <Base>
//! op <name> : <Type> -> <Type>
//! ```
//!
//! Exception and location value types must be declared base types; pure
//! operations never mention the empty type. Signatures are immutable after
//! construction and safe to share across threads.

use std::fmt;

use thiserror::Error;

use crate::lex::{lex, Cursor, ParseError};
use crate::terms::{parse::type_expr, DType};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    base_types: Vec<String>,
    exceptions: Vec<(String, String)>,
    locations: Vec<(String, String)>,
    pure_ops: Vec<(String, (DType, DType))>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn add_base(&mut self, name: impl Into<String>) {
        self.base_types.push(name.into());
    }

    pub fn add_exception(&mut self, name: impl Into<String>, value_type: impl Into<String>) {
        self.exceptions.push((name.into(), value_type.into()));
    }

    pub fn add_location(&mut self, name: impl Into<String>, value_type: impl Into<String>) {
        self.locations.push((name.into(), value_type.into()));
    }

    pub fn add_op(&mut self, name: impl Into<String>, source: DType, target: DType) {
        self.pure_ops.push((name.into(), (source, target)));
    }

    pub fn has_base(&self, name: &str) -> bool {
        self.base_types.iter().any(|b| b == name)
    }

    pub fn exception_value_type(&self, name: &str) -> Option<&str> {
        self.exceptions.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn location_value_type(&self, name: &str) -> Option<&str> {
        self.locations.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn op_type(&self, name: &str) -> Option<&(DType, DType)> {
        self.pure_ops.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Base types in declaration order.
    pub fn bases(&self) -> impl Iterator<Item = &str> {
        self.base_types.iter().map(|s| s.as_str())
    }

    /// Exceptions as (name, value type) in declaration order.
    pub fn exceptions(&self) -> impl Iterator<Item = (&str, &str)> {
        self.exceptions.iter().map(|(n, v)| (n.as_str(), v.as_str()))
    }

    /// Locations as (name, value type) in declaration order.
    pub fn locations(&self) -> impl Iterator<Item = (&str, &str)> {
        self.locations.iter().map(|(n, v)| (n.as_str(), v.as_str()))
    }

    pub fn ops(&self) -> impl Iterator<Item = (&str, &(DType, DType))> {
        self.pure_ops.iter().map(|(n, t)| (n.as_str(), t))
    }

    /// The dual signature: exceptions become locations and vice versa,
    /// keeping declaration order. Base types and operations are unchanged.
    pub fn dual(&self) -> Signature {
        Signature {
            base_types: self.base_types.clone(),
            exceptions: self.locations.clone(),
            locations: self.exceptions.clone(),
            pure_ops: self.pure_ops.clone(),
        }
    }

    /// Check every invariant; an empty list means the signature is
    /// well-formed. Violations are data, not errors.
    pub fn validate(&self) -> Vec<Violation> {
        fn seen(
            out: &mut Vec<Violation>,
            names: &mut Vec<String>,
            name: &str,
            ns: &'static str,
        ) {
            if names.iter().any(|n| n == name) {
                out.push(Violation::DuplicateName { namespace: ns, name: name.to_string() });
            } else {
                names.push(name.to_string());
            }
        }
        let mut out = Vec::new();
        let mut bases = Vec::new();
        for b in &self.base_types {
            seen(&mut out, &mut bases, b, "base");
        }
        let mut excs = Vec::new();
        for (n, v) in &self.exceptions {
            seen(&mut out, &mut excs, n, "exception");
            if !self.has_base(v) {
                out.push(Violation::UnknownBase { referent: n.clone(), base: v.clone() });
            }
        }
        let mut locs = Vec::new();
        for (n, v) in &self.locations {
            seen(&mut out, &mut locs, n, "location");
            if !self.has_base(v) {
                out.push(Violation::UnknownBase { referent: n.clone(), base: v.clone() });
            }
        }
        let mut ops = Vec::new();
        for (n, (src, tgt)) in &self.pure_ops {
            seen(&mut out, &mut ops, n, "op");
            for ty in [src, tgt] {
                if let Some(base) = ty.unknown_base(self) {
                    out.push(Violation::UnknownBase { referent: n.clone(), base });
                }
                if ty.contains_empty() {
                    out.push(Violation::OpTouchesEmpty { op: n.clone() });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateName { namespace: &'static str, name: String },
    UnknownBase { referent: String, base: String },
    OpTouchesEmpty { op: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateName { namespace, name } => {
                write!(f, "duplicate {namespace} name `{name}`")
            }
            Violation::UnknownBase { referent, base } => {
                write!(f, "`{referent}` refers to undeclared base type `{base}`")
            }
            Violation::OpTouchesEmpty { op } => {
                write!(f, "pure op `{op}` touches the empty type")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {violation}")]
    Invalid { violation: Violation, line: u32 },
}

/// Parse and fully validate a signature.
pub fn parse_signature(text: &str) -> Result<Signature, SigError> {
    let mut sig = Signature::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let mut toks = lex(raw).map_err(|e| reline(e, line_no))?;
        if toks.is_empty() {
            continue;
        }
        for t in &mut toks {
            t.line = line_no;
        }
        let mut cur = Cursor::new(toks);
        let kw = cur.expect_ident("declaration keyword").map_err(|e| reline(e, line_no))?;
        match kw.as_str() {
            "base" => {
                let name = cur.expect_ident("base type name").map_err(|e| reline(e, line_no))?;
                if sig.has_base(&name) {
                    return Err(dup("base", name, line_no));
                }
                sig.add_base(name);
            }
            "exception" => {
                let (name, base) = name_colon_base(&mut cur, "exception", line_no)?;
                if sig.exception_value_type(&name).is_some() {
                    return Err(dup("exception", name, line_no));
                }
                check_base(&sig, &name, &base, line_no)?;
                sig.add_exception(name, base);
            }
            "location" => {
                let (name, base) = name_colon_base(&mut cur, "location", line_no)?;
                if sig.location_value_type(&name).is_some() {
                    return Err(dup("location", name, line_no));
                }
                check_base(&sig, &name, &base, line_no)?;
                sig.add_location(name, base);
            }
            "op" => {
                let name = cur.expect_ident("op name").map_err(|e| reline(e, line_no))?;
                cur.expect_sym(":").map_err(|e| reline(e, line_no))?;
                let src = type_expr(&mut cur).map_err(|e| reline(e, line_no))?;
                cur.expect_sym("->").map_err(|e| reline(e, line_no))?;
                let tgt = type_expr(&mut cur).map_err(|e| reline(e, line_no))?;
                if sig.op_type(&name).is_some() {
                    return Err(dup("op", name, line_no));
                }
                for ty in [&src, &tgt] {
                    if let Some(base) = ty.unknown_base(&sig) {
                        return Err(SigError::Invalid {
                            violation: Violation::UnknownBase { referent: name.clone(), base },
                            line: line_no,
                        });
                    }
                    if ty.contains_empty() {
                        return Err(SigError::Invalid {
                            violation: Violation::OpTouchesEmpty { op: name.clone() },
                            line: line_no,
                        });
                    }
                }
                sig.add_op(name, src, tgt);
            }
            other => {
                return Err(SigError::Parse(ParseError::new(
                    line_no,
                    1,
                    format!("expected `base`, `exception`, `location` or `op`, found `{other}`"),
                )))
            }
        }
        cur.expect_end().map_err(|e| reline(e, line_no))?;
    }
    debug_assert!(sig.validate().is_empty());
    Ok(sig)
}

fn reline(mut e: ParseError, line: u32) -> SigError {
    e.line = line;
    SigError::Parse(e)
}

fn dup(ns: &'static str, name: String, line: u32) -> SigError {
    SigError::Invalid { violation: Violation::DuplicateName { namespace: ns, name }, line }
}

fn check_base(sig: &Signature, referent: &str, base: &str, line: u32) -> Result<(), SigError> {
    if sig.has_base(base) {
        Ok(())
    } else {
        Err(SigError::Invalid {
            violation: Violation::UnknownBase {
                referent: referent.to_string(),
                base: base.to_string(),
            },
            line,
        })
    }
}

fn name_colon_base(
    cur: &mut Cursor,
    kind: &str,
    line: u32,
) -> Result<(String, String), SigError> {
    let name = cur.expect_ident(&format!("{kind} name")).map_err(|e| reline(e, line))?;
    cur.expect_sym(":").map_err(|e| reline(e, line))?;
    let base = cur.expect_ident("base type name").map_err(|e| reline(e, line))?;
    Ok((name, base))
}

// Pretty-printer; `parse_signature` is a left inverse of this on all valid
// signatures.
impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.base_types {
            writeln!(f, "base {b}")?;
        }
        for (n, v) in &self.exceptions {
            writeln!(f, "exception {n} : {v}")?;
        }
        for (n, v) in &self.locations {
            writeln!(f, "location {n} : {v}")?;
        }
        for (n, (src, tgt)) in &self.pure_ops {
            writeln!(f, "op {n} : {src} -> {tgt}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_exception_declaration() {
        let sig = parse_signature("base Nat2\nexception T : Nat2\n").unwrap();
        assert_eq!(sig.exception_value_type("T"), Some("Nat2"));
    }

    #[test]
    fn two_locations_share_a_value_type() {
        let sig = parse_signature("base Nat3\nlocation X : Nat3\nlocation Y : Nat3\n").unwrap();
        assert_eq!(sig.location_value_type("X"), Some("Nat3"));
        assert_eq!(sig.location_value_type("Y"), Some("Nat3"));
        assert_eq!(sig.locations().count(), 2);
    }

    #[test]
    fn unknown_value_type_is_rejected() {
        let err = parse_signature("exception T : Missing\n").unwrap_err();
        match err {
            SigError::Invalid { violation: Violation::UnknownBase { base, .. }, line } => {
                assert_eq!(base, "Missing");
                assert_eq!(line, 1);
            }
            other => panic!("expected unknown-type error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_exception_name_is_a_violation() {
        let err = parse_signature("base B\nexception T : B\nexception T : B\n").unwrap_err();
        assert!(matches!(
            err,
            SigError::Invalid { violation: Violation::DuplicateName { .. }, line: 3 }
        ));

        // The same invariant as data, through validate().
        let mut sig = Signature::new();
        sig.add_base("B");
        sig.add_exception("T", "B");
        sig.add_exception("T", "B");
        assert!(sig
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::DuplicateName { namespace: "exception", .. })));
    }

    #[test]
    fn op_touching_empty_is_a_violation() {
        let err = parse_signature("base B\nop bad : 0 -> B\n").unwrap_err();
        assert!(matches!(
            err,
            SigError::Invalid { violation: Violation::OpTouchesEmpty { .. }, .. }
        ));

        let mut sig = Signature::new();
        sig.add_base("B");
        sig.add_op("bad", DType::base("B"), DType::sum(DType::Empty, DType::base("B")));
        assert!(sig.validate().iter().any(|v| matches!(v, Violation::OpTouchesEmpty { .. })));
    }

    #[test]
    fn well_formed_signature_validates_clean() {
        let sig = parse_signature(
            "# a comment\nbase B\nexception T : B\nlocation X : B\nop f : B -> B*B\n",
        )
        .unwrap();
        assert!(sig.validate().is_empty());
    }

    #[test]
    fn parse_is_left_inverse_of_display() {
        let text = "base EV\nbase Val\nexception T : EV\nexception R : EV\n\
                    location X : Val\nop c0 : 1 -> Val\nop pick : Val*Val -> Val+Val\n";
        let sig = parse_signature(text).unwrap();
        let reparsed = parse_signature(&sig.to_string()).unwrap();
        assert_eq!(sig, reparsed);
    }

    #[test]
    fn parse_error_carries_position() {
        let err = parse_signature("base B\nexception T :\n").unwrap_err();
        match err {
            SigError::Parse(e) => assert_eq!(e.line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dual_swaps_exceptions_and_locations() {
        let sig = parse_signature("base B\nexception T : B\nlocation X : B\n").unwrap();
        let d = sig.dual();
        assert_eq!(d.exception_value_type("X"), Some("B"));
        assert_eq!(d.location_value_type("T"), Some("B"));
        assert_eq!(d.dual(), sig);
    }
}
