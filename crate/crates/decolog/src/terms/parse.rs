//! Recursive-descent parser for the term and type grammars.
//!
//! Terms:  `id[t]`, `f o g`, `< f | g >`, `( f , g )`, `inl[a,b]`,
//! `inr[a,b]`, `from0[t]`, `to1[t]`, `pi1[a,b]`, `pi2[a,b]`, `tag[T]`,
//! `untag[T]`, `lookup[X]`, `update[X]`, `op[name]`, `if(b, f, g)`,
//! `while(b, f)`. Composition is right-associative; `( f )` groups.
//!
//! Types:  `0`, `1`, base names, `A+B`, `A*B`, with `*` binding tighter
//! and both connectives right-associative.

use crate::lex::{Cursor, ParseError, Tok};
use crate::signature::Signature;
use crate::terms::{DType, DecoratedTerm};

pub fn parse_type(text: &str) -> Result<DType, ParseError> {
    let mut cur = Cursor::from_text(text)?;
    let t = type_expr(&mut cur)?;
    cur.expect_end()?;
    Ok(t)
}

pub(crate) fn type_expr(cur: &mut Cursor) -> Result<DType, ParseError> {
    let left = type_factor(cur)?;
    if cur.eat_sym("+") {
        let right = type_expr(cur)?;
        Ok(DType::sum(left, right))
    } else {
        Ok(left)
    }
}

fn type_factor(cur: &mut Cursor) -> Result<DType, ParseError> {
    let left = type_atom(cur)?;
    if cur.eat_sym("*") {
        let right = type_factor(cur)?;
        Ok(DType::prod(left, right))
    } else {
        Ok(left)
    }
}

fn type_atom(cur: &mut Cursor) -> Result<DType, ParseError> {
    match cur.peek() {
        Some(Tok::Int(0)) => {
            cur.next();
            Ok(DType::Empty)
        }
        Some(Tok::Int(1)) => {
            cur.next();
            Ok(DType::Unit)
        }
        Some(Tok::Ident(_)) => {
            let name = cur.expect_ident("type name")?;
            Ok(DType::Base(name))
        }
        Some(Tok::Sym("(")) => {
            cur.next();
            let t = type_expr(cur)?;
            cur.expect_sym(")")?;
            Ok(t)
        }
        Some(t) => Err(cur.err(format!("expected a type, found {t}"))),
        None => Err(cur.err("expected a type, found end of input")),
    }
}

/// Parse a complete term; names of exceptions, locations and operations are
/// checked against the signature, typing is not.
pub fn parse_term(text: &str, sig: &Signature) -> Result<DecoratedTerm, ParseError> {
    let mut cur = Cursor::from_text(text)?;
    let t = term_expr(&mut cur, sig)?;
    cur.expect_end()?;
    Ok(t)
}

pub(crate) fn term_expr(cur: &mut Cursor, sig: &Signature) -> Result<DecoratedTerm, ParseError> {
    let left = term_atom(cur, sig)?;
    if cur.eat_kw("o") {
        let right = term_expr(cur, sig)?;
        Ok(DecoratedTerm::comp(left, right))
    } else {
        Ok(left)
    }
}

fn bracketed_type(cur: &mut Cursor) -> Result<DType, ParseError> {
    cur.expect_sym("[")?;
    let t = type_expr(cur)?;
    cur.expect_sym("]")?;
    Ok(t)
}

fn bracketed_type_pair(cur: &mut Cursor) -> Result<(DType, DType), ParseError> {
    cur.expect_sym("[")?;
    let a = type_expr(cur)?;
    cur.expect_sym(",")?;
    let b = type_expr(cur)?;
    cur.expect_sym("]")?;
    Ok((a, b))
}

fn bracketed_name(
    cur: &mut Cursor,
    kind: &'static str,
    check: impl Fn(&str) -> bool,
) -> Result<String, ParseError> {
    cur.expect_sym("[")?;
    let (line, col) = cur.here();
    let name = cur.expect_ident(&format!("{kind} name"))?;
    if !check(&name) {
        return Err(ParseError::new(line, col, format!("unknown {kind} `{name}`")));
    }
    cur.expect_sym("]")?;
    Ok(name)
}

fn term_atom(cur: &mut Cursor, sig: &Signature) -> Result<DecoratedTerm, ParseError> {
    match cur.peek() {
        Some(Tok::Ident(kw)) => {
            let kw = kw.clone();
            match kw.as_str() {
                "id" => {
                    cur.next();
                    Ok(DecoratedTerm::Id(bracketed_type(cur)?))
                }
                "inl" => {
                    cur.next();
                    let (a, b) = bracketed_type_pair(cur)?;
                    Ok(DecoratedTerm::Inl(a, b))
                }
                "inr" => {
                    cur.next();
                    let (a, b) = bracketed_type_pair(cur)?;
                    Ok(DecoratedTerm::Inr(a, b))
                }
                "pi1" => {
                    cur.next();
                    let (a, b) = bracketed_type_pair(cur)?;
                    Ok(DecoratedTerm::Proj1(a, b))
                }
                "pi2" => {
                    cur.next();
                    let (a, b) = bracketed_type_pair(cur)?;
                    Ok(DecoratedTerm::Proj2(a, b))
                }
                "from0" => {
                    cur.next();
                    Ok(DecoratedTerm::FromEmpty(bracketed_type(cur)?))
                }
                "to1" => {
                    cur.next();
                    Ok(DecoratedTerm::ToUnit(bracketed_type(cur)?))
                }
                "tag" => {
                    cur.next();
                    let n =
                        bracketed_name(cur, "exception", |n| sig.exception_value_type(n).is_some())?;
                    Ok(DecoratedTerm::Tag(n))
                }
                "untag" => {
                    cur.next();
                    let n =
                        bracketed_name(cur, "exception", |n| sig.exception_value_type(n).is_some())?;
                    Ok(DecoratedTerm::Untag(n))
                }
                "lookup" => {
                    cur.next();
                    let n =
                        bracketed_name(cur, "location", |n| sig.location_value_type(n).is_some())?;
                    Ok(DecoratedTerm::Lookup(n))
                }
                "update" => {
                    cur.next();
                    let n =
                        bracketed_name(cur, "location", |n| sig.location_value_type(n).is_some())?;
                    Ok(DecoratedTerm::Update(n))
                }
                "op" => {
                    cur.next();
                    let n = bracketed_name(cur, "operation", |n| sig.op_type(n).is_some())?;
                    Ok(DecoratedTerm::Op(n))
                }
                "if" => {
                    cur.next();
                    cur.expect_sym("(")?;
                    let b = term_expr(cur, sig)?;
                    cur.expect_sym(",")?;
                    let f = term_expr(cur, sig)?;
                    cur.expect_sym(",")?;
                    let g = term_expr(cur, sig)?;
                    cur.expect_sym(")")?;
                    Ok(DecoratedTerm::cond(b, f, g))
                }
                "while" => {
                    cur.next();
                    cur.expect_sym("(")?;
                    let b = term_expr(cur, sig)?;
                    cur.expect_sym(",")?;
                    let f = term_expr(cur, sig)?;
                    cur.expect_sym(")")?;
                    Ok(DecoratedTerm::while_loop(b, f))
                }
                other => Err(cur.err(format!("expected a term, found `{other}`"))),
            }
        }
        Some(Tok::Sym("<")) => {
            cur.next();
            let f = term_expr(cur, sig)?;
            cur.expect_sym("|")?;
            let g = term_expr(cur, sig)?;
            cur.expect_sym(">")?;
            Ok(DecoratedTerm::copair(f, g))
        }
        Some(Tok::Sym("(")) => {
            cur.next();
            let f = term_expr(cur, sig)?;
            if cur.eat_sym(",") {
                let g = term_expr(cur, sig)?;
                cur.expect_sym(")")?;
                Ok(DecoratedTerm::pair(f, g))
            } else {
                cur.expect_sym(")")?;
                Ok(f)
            }
        }
        Some(t) => Err(cur.err(format!("expected a term, found {t}"))),
        None => Err(cur.err("expected a term, found end of input")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_signature;

    fn sig() -> Signature {
        parse_signature(
            "base EV\nbase Val\nexception T : EV\nexception R : EV\n\
             location X : Val\nop c0 : 1 -> Val\n",
        )
        .unwrap()
    }

    #[test]
    fn parses_composition() {
        let s = sig();
        let t = parse_term("untag[T] o tag[T]", &s).unwrap();
        assert_eq!(t, DecoratedTerm::comp(DecoratedTerm::untag("T"), DecoratedTerm::tag("T")));
    }

    #[test]
    fn parses_copair() {
        let s = sig();
        let t = parse_term("< tag[T] | tag[R] >", &s).unwrap();
        assert_eq!(t, DecoratedTerm::copair(DecoratedTerm::tag("T"), DecoratedTerm::tag("R")));
    }

    #[test]
    fn parses_pair_and_grouping() {
        let s = sig();
        let t = parse_term("( lookup[X] , lookup[X] )", &s).unwrap();
        assert_eq!(t, DecoratedTerm::pair(DecoratedTerm::lookup("X"), DecoratedTerm::lookup("X")));
        let grouped = parse_term("(untag[T] o tag[T]) o id[EV]", &s).unwrap();
        assert_eq!(
            grouped,
            DecoratedTerm::comp(
                DecoratedTerm::comp(DecoratedTerm::untag("T"), DecoratedTerm::tag("T")),
                DecoratedTerm::Id(DType::base("EV")),
            )
        );
    }

    #[test]
    fn undeclared_location_is_an_error() {
        let s = sig();
        let err = parse_term("lookup[Z]", &s).unwrap_err();
        assert!(err.msg.contains("unknown location `Z`"), "{err}");
    }

    #[test]
    fn composition_is_right_associative() {
        let s = sig();
        let t = parse_term("untag[T] o id[0] o tag[T]", &s).unwrap();
        assert_eq!(
            t,
            DecoratedTerm::comp(
                DecoratedTerm::untag("T"),
                DecoratedTerm::comp(DecoratedTerm::Id(DType::Empty), DecoratedTerm::tag("T")),
            )
        );
    }

    #[test]
    fn parses_if_and_while() {
        let s = sig();
        let b = "< inl[1,1] o to1[Val] | inr[1,1] o to1[Val] >";
        let t = parse_term(&format!("while(lookup[X] o {b} o lookup[X], id[1])"), &s);
        assert!(t.is_ok(), "{t:?}");
        let t = parse_term("if(inl[1,1], id[1], id[1])", &s).unwrap();
        assert!(matches!(t, DecoratedTerm::If(..)));
    }

    #[test]
    fn type_grammar_precedence() {
        assert_eq!(
            parse_type("EV+Val*EV").unwrap(),
            DType::sum(DType::base("EV"), DType::prod(DType::base("Val"), DType::base("EV")))
        );
        assert_eq!(parse_type("(0+1)*EV").unwrap(), DType::prod(
            DType::sum(DType::Empty, DType::Unit),
            DType::base("EV")
        ));
    }

    #[test]
    fn pretty_then_parse_is_identity_on_samples() {
        let s = sig();
        for src in [
            "untag[T] o tag[T]",
            "< id[EV] | untag[T] >",
            "( pi1[Val,Val] , pi2[Val,Val] )",
            "(untag[T] o tag[T]) o (tag[R] o id[EV])",
            "if(< inl[1,1] | inr[1,1] > o lookup[X] o id[1], id[1], to1[1])",
            "while(inl[1,1], id[1])",
            "inl[EV+EV,Val*(0+1)]",
        ] {
            let t = parse_term(src, &s).unwrap();
            let printed = t.pretty();
            let back = parse_term(&printed, &s).unwrap();
            assert_eq!(back, t, "round-trip failed for `{src}` -> `{printed}`");
        }
    }
}
