//! Shared lexer for the workbench's text formats.
//!
//! All grammars (signatures, terms, models, proof scripts, IMP programs)
//! use the same token shapes: identifiers, unsigned integers, and a fixed
//! set of punctuation symbols. `#` starts a comment that runs to the end
//! of the line.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: u32, col: u32, msg: impl Into<String>) -> Self {
        ParseError { line, col, msg: msg.into() }
    }
}

// Longest symbols first so maximal munch works by scanning in order.
const SYMBOLS: &[&str] = &[
    "->", ":=", "==", "~~", "~", "[", "]", "(", ")", "{", "}", "<", ">", "|", ",", ":", ";", "+",
    "-", "*", "=", "o",
];

/// Tokenize `text`. The `o` composition keyword is lexed as an identifier
/// and mapped to a symbol by the term parser, not here, so that names like
/// `op` keep working.
pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    'outer: while let Some(&c) = chars.peek() {
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while let Some(&c2) = chars.peek() {
                if c2 == '\n' {
                    continue 'outer;
                }
                chars.next();
                col += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = col;
            let mut n: u64 = 0;
            while let Some(&d) = chars.peek() {
                if let Some(v) = d.to_digit(10) {
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(v as u64))
                        .ok_or_else(|| ParseError::new(line, start, "integer literal overflow"))?;
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Int(n), line, col: start });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = col;
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_alphanumeric() || d == '_' || d == '\'' {
                    s.push(d);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), line, col: start });
            continue;
        }
        let rest: String = chars.clone().take(2).collect();
        let mut matched = None;
        for sym in SYMBOLS {
            if *sym == "o" {
                continue; // handled as an identifier
            }
            if rest.starts_with(sym) {
                matched = Some(*sym);
                break;
            }
        }
        match matched {
            Some(sym) => {
                for _ in 0..sym.chars().count() {
                    chars.next();
                }
                out.push(Token { tok: Tok::Sym(sym), line, col });
                col += sym.chars().count() as u32;
            }
            None => return Err(ParseError::new(line, col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

/// Token cursor with positioned errors; the common plumbing of every parser.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end_line: u32,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Self {
        let end_line = toks.last().map(|t| t.line).unwrap_or(1);
        Cursor { toks, pos: 0, end_line }
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor::new(lex(text)?))
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    pub fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.end_line, 0),
        }
    }

    pub fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, msg)
    }

    /// Consume `sym` or fail.
    pub fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.next();
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{sym}`, found {t}"))),
            None => Err(self.err(format!("expected `{sym}`, found end of input"))),
        }
    }

    /// Consume `sym` if present.
    pub fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.next();
            true
        } else {
            false
        }
    }

    /// Consume the identifier `kw` if present.
    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            match self.peek() {
                Some(t) => Err(self.err(format!("expected `{kw}`, found {t}"))),
                None => Err(self.err(format!("expected `{kw}`, found end of input"))),
            }
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected {what}, found {t}"))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    pub fn expect_int(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.next();
                Ok(n)
            }
            Some(t) => Err(self.err(format!("expected {what}, found {t}"))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            let t = self.peek().unwrap();
            Err(self.err(format!("unexpected trailing {t}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_symbols_and_idents() {
        let toks = lex("untag[T] o tag[T] ~exc id[VT] # comment").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("untag".into()),
                Tok::Sym("["),
                Tok::Ident("T".into()),
                Tok::Sym("]"),
                Tok::Ident("o".into()),
                Tok::Ident("tag".into()),
                Tok::Sym("["),
                Tok::Ident("T".into()),
                Tok::Sym("]"),
                Tok::Sym("~"),
                Tok::Ident("exc".into()),
                Tok::Ident("id".into()),
                Tok::Sym("["),
                Tok::Ident("VT".into()),
                Tok::Sym("]"),
            ]
        );
    }

    #[test]
    fn maximal_munch_relations() {
        let toks = lex("~~ == := -> =").unwrap();
        let syms: Vec<_> = toks
            .iter()
            .map(|t| match &t.tok {
                Tok::Sym(s) => *s,
                _ => panic!("expected symbol"),
            })
            .collect();
        assert_eq!(syms, vec!["~~", "==", ":=", "->", "="]);
    }

    #[test]
    fn tracks_positions() {
        let toks = lex("a\n  b").unwrap();
        assert_eq!((toks[0].line, toks[0].col), (1, 1));
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = lex("a @ b").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
