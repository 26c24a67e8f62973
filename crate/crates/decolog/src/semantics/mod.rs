//! Exhaustive finite-model semantics, the oracle of the workbench: every
//! well-typed term denotes a total function on (value, store) pairs, and
//! equations are decided by enumerating all inputs.
//!
//! A model fixes one interpretation in the family where the store survives
//! exceptions: raising keeps the state accumulated so far, and propagation
//! leaves it untouched. Loops run on explicit fuel; exceeding it yields a
//! distinguished `Timeout` rather than partiality.
//!
//! Model files hold one declaration per line, `#` starts a comment:
//!
//! ```text
//! carrier <Base> = v1 v2 ...
//! op <name> = (in -> out) (in -> out) ...
//! fuel <n>
//! ```
//!
//! Values are written as atoms, `*` for unit, `(a,b)` for pairs, and
//! `inl v` / `inr v` for sum injections.

pub mod enumerate;
pub mod harness;

pub use harness::{validate_ruleset, HarnessOptions, ValidationReport};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lex::{lex, Cursor, ParseError, Tok};
use crate::logic::Equation;
use crate::signature::Signature;
use crate::terms::{infer, DType, DecoratedTerm, InferError};

/// An element of some carrier: atoms for base types, `*` for unit, pairs
/// and sum injections for compound types. Atoms are shared strings so that
/// cloning values during evaluation stays cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Atom(Arc<str>),
    Unit,
    Pair(Box<Value>, Box<Value>),
    L(Box<Value>),
    R(Box<Value>),
}

impl Value {
    pub fn atom(s: impl AsRef<str>) -> Self {
        Value::Atom(Arc::from(s.as_ref()))
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn left(v: Value) -> Self {
        Value::L(Box::new(v))
    }

    pub fn right(v: Value) -> Self {
        Value::R(Box::new(v))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(s) => write!(f, "{s}"),
            Value::Unit => write!(f, "*"),
            Value::Pair(a, b) => write!(f, "({a},{b})"),
            Value::L(v) => write!(f, "inl {v}"),
            Value::R(v) => write!(f, "inr {v}"),
        }
    }
}

/// Either an ordinary value or an exception named `T` carrying an element
/// of `V_T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EValue {
    Ordinary(Value),
    Exceptional(String, Value),
}

impl EValue {
    pub fn is_ordinary(&self) -> bool {
        matches!(self, EValue::Ordinary(_))
    }
}

impl fmt::Display for EValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EValue::Ordinary(v) => write!(f, "ord {v}"),
            EValue::Exceptional(t, v) => write!(f, "exc {t}({v})"),
        }
    }
}

/// A store assigns each declared location a carrier value, indexed in
/// declaration order.
pub type Store = Vec<Value>;

/// Fuel exhaustion while unfolding a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("fuel exhausted while unfolding a loop")]
pub struct Timeout;

pub const DEFAULT_FUEL: u32 = 100;

/// Finite carriers for every base type plus total tables for every pure
/// operation; one concrete interpretation of the signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    sig: Signature,
    carriers: Vec<(String, Vec<Value>)>,
    op_interps: Vec<(String, Vec<(Value, Value)>)>,
    pub fuel: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {msg}")]
    Invalid { msg: String, line: u32 },
    #[error("{0}")]
    Incomplete(String),
}

impl Model {
    /// Build a model programmatically; carriers and op tables are validated
    /// the same way the file parser validates them.
    pub fn build(
        sig: &Signature,
        carriers: Vec<(String, Vec<Value>)>,
        op_interps: Vec<(String, Vec<(Value, Value)>)>,
        fuel: u32,
    ) -> Result<Model, ModelError> {
        let m = Model { sig: sig.clone(), carriers, op_interps, fuel };
        m.check_complete()?;
        Ok(m)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn carrier(&self, base: &str) -> &[Value] {
        self.carriers
            .iter()
            .find(|(n, _)| n == base)
            .map(|(_, vs)| vs.as_slice())
            .unwrap_or(&[])
    }

    fn op_table(&self, name: &str) -> &[(Value, Value)] {
        self.op_interps
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.as_slice())
            .unwrap_or(&[])
    }

    /// All elements of a type's carrier, in declaration order: sums list
    /// every left value before every right value, products vary the second
    /// component fastest.
    pub fn values_of(&self, ty: &DType) -> Vec<Value> {
        match ty {
            DType::Base(n) => self.carrier(n).to_vec(),
            DType::Empty => Vec::new(),
            DType::Unit => vec![Value::Unit],
            DType::Sum(a, b) => {
                let mut out: Vec<Value> =
                    self.values_of(a).into_iter().map(Value::left).collect();
                out.extend(self.values_of(b).into_iter().map(Value::right));
                out
            }
            DType::Prod(a, b) => {
                let bs = self.values_of(b);
                let mut out = Vec::new();
                for va in self.values_of(a) {
                    for vb in &bs {
                        out.push(Value::pair(va.clone(), vb.clone()));
                    }
                }
                out
            }
        }
    }

    /// Inputs enumerated by `holds`: ordinary values of `ty`, then — when
    /// `with_exceptional` — every exception in declaration order over its
    /// carrier.
    pub fn evalues_of(&self, ty: &DType, with_exceptional: bool) -> Vec<EValue> {
        let mut out: Vec<EValue> =
            self.values_of(ty).into_iter().map(EValue::Ordinary).collect();
        if with_exceptional {
            for (t, v) in self.sig.exceptions() {
                for val in self.carrier(v) {
                    out.push(EValue::Exceptional(t.to_string(), val.clone()));
                }
            }
        }
        out
    }

    /// Every store, locations varying the last-declared fastest.
    pub fn stores(&self) -> Vec<Store> {
        let mut out = vec![Vec::new()];
        for (_, vt) in self.sig.locations() {
            let carrier = self.carrier(vt).to_vec();
            let mut next = Vec::with_capacity(out.len() * carrier.len());
            for s in &out {
                for v in &carrier {
                    let mut s2 = s.clone();
                    s2.push(v.clone());
                    next.push(s2);
                }
            }
            out = next;
        }
        out
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.sig.locations().position(|(n, _)| n == name)
    }

    pub fn format_store(&self, store: &Store) -> String {
        self.sig
            .locations()
            .zip(store.iter())
            .map(|((n, _), v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Same carriers, ops and fuel over the dual signature, so exceptions
    /// and locations trade roles.
    pub fn dual(&self) -> Model {
        Model {
            sig: self.sig.dual(),
            carriers: self.carriers.clone(),
            op_interps: self.op_interps.clone(),
            fuel: self.fuel,
        }
    }

    fn check_complete(&self) -> Result<(), ModelError> {
        for b in self.sig.bases() {
            let c = self.carrier(b);
            if c.is_empty() {
                return Err(ModelError::Incomplete(format!(
                    "base type `{b}` has no (non-empty) carrier"
                )));
            }
        }
        for (name, (src, tgt)) in self.sig.ops() {
            let table = self.op_table(name);
            let domain = self.values_of(src);
            let codomain = self.values_of(tgt);
            if table.is_empty() {
                return Err(ModelError::Incomplete(format!("op `{name}` has no table")));
            }
            for v in &domain {
                let hits = table.iter().filter(|(i, _)| i == v).count();
                if hits == 0 {
                    return Err(ModelError::Incomplete(format!(
                        "op `{name}` has no entry for input {v}"
                    )));
                }
                if hits > 1 {
                    return Err(ModelError::Incomplete(format!(
                        "op `{name}` has {hits} entries for input {v}"
                    )));
                }
            }
            for (i, o) in table {
                if !domain.contains(i) {
                    return Err(ModelError::Incomplete(format!(
                        "op `{name}` entry input {i} is not in the carrier of {src}"
                    )));
                }
                if !codomain.contains(o) {
                    return Err(ModelError::Incomplete(format!(
                        "op `{name}` entry output {o} is not in the carrier of {tgt}"
                    )));
                }
            }
        }
        if self.fuel == 0 {
            return Err(ModelError::Incomplete("fuel must be positive".into()));
        }
        Ok(())
    }
}

fn parse_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    match cur.peek() {
        Some(Tok::Sym("*")) => {
            cur.next();
            Ok(Value::Unit)
        }
        Some(Tok::Sym("(")) => {
            cur.next();
            let a = parse_value(cur)?;
            cur.expect_sym(",")?;
            let b = parse_value(cur)?;
            cur.expect_sym(")")?;
            Ok(Value::pair(a, b))
        }
        Some(Tok::Ident(s)) if s == "inl" => {
            cur.next();
            Ok(Value::left(parse_value(cur)?))
        }
        Some(Tok::Ident(s)) if s == "inr" => {
            cur.next();
            Ok(Value::right(parse_value(cur)?))
        }
        Some(Tok::Ident(s)) => {
            let s = s.clone();
            cur.next();
            Ok(Value::atom(s))
        }
        Some(Tok::Int(n)) => {
            let s = n.to_string();
            cur.next();
            Ok(Value::atom(s))
        }
        Some(t) => Err(cur.err(format!("expected a value, found {t}"))),
        None => Err(cur.err("expected a value, found end of input")),
    }
}

/// Parse a model file against its signature and check completeness.
pub fn parse_model(text: &str, sig: &Signature) -> Result<Model, ModelError> {
    let mut carriers: Vec<(String, Vec<Value>)> = Vec::new();
    let mut op_interps: Vec<(String, Vec<(Value, Value)>)> = Vec::new();
    let mut fuel = DEFAULT_FUEL;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let mut toks = lex(raw).map_err(|mut e| {
            e.line = line_no;
            e
        })?;
        if toks.is_empty() {
            continue;
        }
        for t in &mut toks {
            t.line = line_no;
        }
        let mut cur = Cursor::new(toks);
        let bad_line = |msg: String| ModelError::Invalid { msg, line: line_no };
        let kw = cur.expect_ident("`carrier`, `op` or `fuel`")?;
        match kw.as_str() {
            "carrier" => {
                let base = cur.expect_ident("base type name")?;
                if !sig.has_base(&base) {
                    return Err(bad_line(format!("carrier for undeclared base type `{base}`")));
                }
                if carriers.iter().any(|(n, _)| *n == base) {
                    return Err(bad_line(format!("duplicate carrier for `{base}`")));
                }
                cur.expect_sym("=")?;
                let mut vs = Vec::new();
                while !cur.at_end() {
                    let v = parse_value(&mut cur)?;
                    if vs.contains(&v) {
                        return Err(bad_line(format!("duplicate carrier element {v}")));
                    }
                    vs.push(v);
                }
                carriers.push((base, vs));
            }
            "op" => {
                let name = cur.expect_ident("op name")?;
                if sig.op_type(&name).is_none() {
                    return Err(bad_line(format!("table for undeclared op `{name}`")));
                }
                if op_interps.iter().any(|(n, _)| *n == name) {
                    return Err(bad_line(format!("duplicate table for op `{name}`")));
                }
                cur.expect_sym("=")?;
                let mut table = Vec::new();
                while !cur.at_end() {
                    cur.expect_sym("(")?;
                    let i = parse_value(&mut cur)?;
                    cur.expect_sym("->")?;
                    let o = parse_value(&mut cur)?;
                    cur.expect_sym(")")?;
                    table.push((i, o));
                }
                op_interps.push((name, table));
            }
            "fuel" => {
                let n = cur.expect_int("fuel bound")?;
                cur.expect_end()?;
                if n == 0 || n > u32::MAX as u64 {
                    return Err(bad_line("fuel must be a positive 32-bit number".into()));
                }
                fuel = n as u32;
            }
            other => {
                return Err(bad_line(format!(
                    "expected `carrier`, `op` or `fuel`, found `{other}`"
                )))
            }
        }
    }
    Model::build(sig, carriers, op_interps, fuel)
}

/// Apply the denotation of `term` to one input. Requires `term` to be
/// well-typed under the model's signature; the input must inhabit the
/// source type.
pub fn denote(
    term: &DecoratedTerm,
    model: &Model,
    input: &EValue,
    store: &Store,
) -> Result<(EValue, Store), Timeout> {
    eval(term, model, input.clone(), store.clone())
}

fn eval(
    term: &DecoratedTerm,
    m: &Model,
    input: EValue,
    store: Store,
) -> Result<(EValue, Store), Timeout> {
    use DecoratedTerm::*;

    // Leaves that merely propagate exceptional inputs share this shape.
    macro_rules! ordinary {
        ($v:ident => $body:expr) => {
            match input {
                EValue::Exceptional(..) => Ok((input, store)),
                EValue::Ordinary($v) => $body,
            }
        };
    }

    match term {
        Id(_) => Ok((input, store)),
        Comp(f, g) => {
            let (mid, s1) = eval(g, m, input, store)?;
            eval(f, m, mid, s1)
        }
        Inl(..) => ordinary!(v => Ok((EValue::Ordinary(Value::left(v)), store))),
        Inr(..) => ordinary!(v => Ok((EValue::Ordinary(Value::right(v)), store))),
        FromEmpty(_) => match input {
            EValue::Exceptional(..) => Ok((input, store)),
            EValue::Ordinary(v) => unreachable!("ordinary value {v} at the empty type"),
        },
        ToUnit(_) => ordinary!(_v => Ok((EValue::Ordinary(Value::Unit), store))),
        Proj1(..) => ordinary!(v => match v {
            Value::Pair(a, _) => Ok((EValue::Ordinary(*a), store)),
            other => unreachable!("pi1 applied to non-pair {other}"),
        }),
        Proj2(..) => ordinary!(v => match v {
            Value::Pair(_, b) => Ok((EValue::Ordinary(*b), store)),
            other => unreachable!("pi2 applied to non-pair {other}"),
        }),
        Op(name) => ordinary!(v => {
            let out = m
                .op_table(name)
                .iter()
                .find(|(i, _)| *i == v)
                .map(|(_, o)| o.clone())
                .unwrap_or_else(|| unreachable!("op `{name}` has no entry for {v}"));
            Ok((EValue::Ordinary(out), store))
        }),
        Tag(t) => ordinary!(v => Ok((EValue::Exceptional(t.clone(), v), store))),
        Untag(t) => match input {
            EValue::Exceptional(ref t2, ref v) if t2 == t => {
                Ok((EValue::Ordinary(v.clone()), store))
            }
            EValue::Exceptional(..) => Ok((input, store)),
            EValue::Ordinary(v) => unreachable!("ordinary value {v} at the empty type"),
        },
        Lookup(x) => ordinary!(_v => {
            let ix = m.location_index(x).expect("declared location");
            Ok((EValue::Ordinary(store[ix].clone()), store))
        }),
        Update(x) => ordinary!(v => {
            let ix = m.location_index(x).expect("declared location");
            let mut s2 = store;
            s2[ix] = v;
            Ok((EValue::Ordinary(Value::Unit), s2))
        }),
        Copair(f, g) => match input {
            EValue::Ordinary(Value::L(a)) => eval(f, m, EValue::Ordinary(*a), store),
            EValue::Ordinary(Value::R(b)) => eval(g, m, EValue::Ordinary(*b), store),
            EValue::Ordinary(other) => unreachable!("copair applied to non-sum {other}"),
            // Exceptional arguments are treated by the copair as g treats
            // them.
            exceptional => eval(g, m, exceptional, store),
        },
        Pair(f, g) => match input {
            EValue::Exceptional(..) => Ok((input, store)),
            EValue::Ordinary(a) => {
                // Formation guarantees f reads but never writes the store
                // and never raises, so its output is ordinary and its final
                // state is the input state.
                let (w, s0) = eval(f, m, EValue::Ordinary(a.clone()), store.clone())?;
                debug_assert_eq!(s0, store);
                let w = match w {
                    EValue::Ordinary(w) => w,
                    EValue::Exceptional(t, _) => {
                        unreachable!("exception-pure pair component raised {t}")
                    }
                };
                let (u, s1) = eval(g, m, EValue::Ordinary(a), store)?;
                match u {
                    EValue::Ordinary(u) => {
                        Ok((EValue::Ordinary(Value::pair(w, u)), s1))
                    }
                    exceptional => Ok((exceptional, s1)),
                }
            }
        },
        If(b, f, g) => match input {
            EValue::Exceptional(..) => Ok((input, store)),
            ordinary => {
                let (bv, s1) = eval(b, m, ordinary, store)?;
                match bv {
                    EValue::Ordinary(Value::L(l)) => eval(f, m, EValue::Ordinary(*l), s1),
                    EValue::Ordinary(Value::R(r)) => eval(g, m, EValue::Ordinary(*r), s1),
                    EValue::Ordinary(other) => {
                        unreachable!("if-condition produced non-sum {other}")
                    }
                    exceptional => Ok((exceptional, s1)),
                }
            }
        },
        While(b, f) => match input {
            EValue::Exceptional(..) => Ok((input, store)),
            EValue::Ordinary(mut a) => {
                let mut s = store;
                let mut fuel = m.fuel;
                loop {
                    if fuel == 0 {
                        return Err(Timeout);
                    }
                    fuel -= 1;
                    let (bv, s1) = eval(b, m, EValue::Ordinary(a), s)?;
                    match bv {
                        EValue::Ordinary(Value::L(l)) => {
                            let (fv, s2) = eval(f, m, EValue::Ordinary(*l), s1)?;
                            match fv {
                                EValue::Ordinary(a2) => {
                                    a = a2;
                                    s = s2;
                                }
                                exceptional => return Ok((exceptional, s2)),
                            }
                        }
                        EValue::Ordinary(Value::R(r)) => {
                            return Ok((EValue::Ordinary(*r), s1))
                        }
                        EValue::Ordinary(other) => {
                            unreachable!("while-condition produced non-sum {other}")
                        }
                        exceptional => return Ok((exceptional, s1)),
                    }
                }
            }
        },
    }
}

/// Result of deciding one equation in one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Counterexample(Counterexample),
    Timeout,
}

impl Outcome {
    pub fn holds(&self) -> bool {
        matches!(self, Outcome::Holds)
    }
}

/// First disagreement found, in enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub input: EValue,
    pub store: Store,
    pub lhs: (EValue, Store),
    pub rhs: (EValue, Store),
}

impl Counterexample {
    pub fn render(&self, model: &Model) -> String {
        format!(
            "input {} @ {{{}}}: lhs {} @ {{{}}}, rhs {} @ {{{}}}",
            self.input,
            model.format_store(&self.store),
            self.lhs.0,
            model.format_store(&self.lhs.1),
            self.rhs.0,
            model.format_store(&self.rhs.1),
        )
    }
}

/// Decide an equation by enumeration. Ordinary inputs are always
/// enumerated; exceptional inputs only when the strength is
/// exception-strict. Output value components are always compared, output
/// stores only when the strength is state-strict.
pub fn holds(eq: &Equation, model: &Model) -> Result<Outcome, InferError> {
    let arrow = infer(&eq.lhs, model.signature())?;
    let rhs_arrow = infer(&eq.rhs, model.signature())?;
    debug_assert_eq!(arrow.source, rhs_arrow.source, "equation sides must be parallel");
    debug_assert_eq!(arrow.target, rhs_arrow.target, "equation sides must be parallel");
    let inputs = model.evalues_of(&arrow.source, eq.strength.exc_strict);
    let stores = model.stores();
    for input in &inputs {
        for store in &stores {
            let l = denote(&eq.lhs, model, input, store);
            let r = denote(&eq.rhs, model, input, store);
            let (l, r) = match (l, r) {
                (Ok(l), Ok(r)) => (l, r),
                _ => return Ok(Outcome::Timeout),
            };
            let differ = l.0 != r.0 || (eq.strength.st_strict && l.1 != r.1);
            if differ {
                return Ok(Outcome::Counterexample(Counterexample {
                    input: input.clone(),
                    store: store.clone(),
                    lhs: l,
                    rhs: r,
                }));
            }
        }
    }
    Ok(Outcome::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Strength;
    use crate::signature::parse_signature;
    use crate::terms::parse_term;

    fn exc_sig() -> Signature {
        parse_signature("base EV\nexception T : EV\nexception R : EV\n").unwrap()
    }

    fn exc_model() -> Model {
        parse_model("carrier EV = v0 v1\nfuel 100\n", &exc_sig()).unwrap()
    }

    fn st_sig() -> Signature {
        parse_signature("base Val\nlocation X : Val\nlocation Y : Val\n").unwrap()
    }

    fn st_model() -> Model {
        parse_model("carrier Val = v0 v1\nfuel 100\n", &st_sig()).unwrap()
    }

    fn eq(sig: &Signature, lhs: &str, rhs: &str, s: Strength) -> Equation {
        Equation::new(parse_term(lhs, sig).unwrap(), parse_term(rhs, sig).unwrap(), s)
    }

    #[test]
    fn untag_tag_recovers_ordinary_values() {
        let sig = exc_sig();
        let m = exc_model();
        let t = parse_term("untag[T] o tag[T]", &sig).unwrap();
        let (out, s) =
            denote(&t, &m, &EValue::Ordinary(Value::atom("v0")), &Vec::new()).unwrap();
        assert_eq!(out, EValue::Ordinary(Value::atom("v0")));
        assert_eq!(s, Vec::new());
    }

    #[test]
    fn untag_tag_on_matching_exception_recovers_payload() {
        // Tag propagates the incoming exception, untag[T] then recovers its
        // payload: the strong-inequality witness.
        let sig = exc_sig();
        let m = exc_model();
        let t = parse_term("untag[T] o tag[T]", &sig).unwrap();
        let input = EValue::Exceptional("T".into(), Value::atom("v1"));
        let (out, _) = denote(&t, &m, &input, &Vec::new()).unwrap();
        assert_eq!(out, EValue::Ordinary(Value::atom("v1")));
        // A foreign exception propagates through both.
        let input = EValue::Exceptional("R".into(), Value::atom("v0"));
        let (out, _) = denote(&t, &m, &input, &Vec::new()).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn lookup_after_update_reads_written_value() {
        let sig = st_sig();
        let m = st_model();
        let t = parse_term("lookup[X] o update[X]", &sig).unwrap();
        let store = vec![Value::atom("v0"), Value::atom("v0")];
        let (out, s) =
            denote(&t, &m, &EValue::Ordinary(Value::atom("v1")), &store).unwrap();
        assert_eq!(out, EValue::Ordinary(Value::atom("v1")));
        assert_eq!(s, vec![Value::atom("v1"), Value::atom("v0")]);
    }

    #[test]
    fn untag_tag_weakly_equals_identity() {
        let sig = exc_sig();
        let m = exc_model();
        let e = eq(&sig, "untag[T] o tag[T]", "id[EV]", Strength::WEAK_EXC);
        assert_eq!(holds(&e, &m).unwrap(), Outcome::Holds);
    }

    #[test]
    fn untag_tag_is_not_strongly_identity() {
        let sig = exc_sig();
        let m = exc_model();
        let e = eq(&sig, "untag[T] o tag[T]", "id[EV]", Strength::STRONG);
        match holds(&e, &m).unwrap() {
            Outcome::Counterexample(c) => {
                assert_eq!(c.input, EValue::Exceptional("T".into(), Value::atom("v0")));
                assert_eq!(c.lhs.0, EValue::Ordinary(Value::atom("v0")));
                assert_eq!(c.rhs.0, EValue::Exceptional("T".into(), Value::atom("v0")));
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn lookup_update_weakly_equals_identity_but_not_strongly() {
        let sig = st_sig();
        let m = st_model();
        let weak = eq(&sig, "lookup[X] o update[X]", "id[Val]", Strength::WEAK_ST);
        assert_eq!(holds(&weak, &m).unwrap(), Outcome::Holds);
        let strong = eq(&sig, "lookup[X] o update[X]", "id[Val]", Strength::STRONG);
        match holds(&strong, &m).unwrap() {
            Outcome::Counterexample(c) => {
                assert_eq!(c.lhs.0, c.rhs.0, "values agree, only the stores differ");
                assert_ne!(c.lhs.1, c.rhs.1);
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
    }

    #[test]
    fn distinct_location_commutation_holds_weakly() {
        let sig = st_sig();
        let m = st_model();
        let e = eq(
            &sig,
            "lookup[Y] o update[X]",
            "lookup[Y] o to1[Val]",
            Strength::WEAK_ST,
        );
        assert_eq!(holds(&e, &m).unwrap(), Outcome::Holds);
    }

    #[test]
    fn while_loop_times_out_without_progress() {
        let sig = exc_sig();
        let m = parse_model("carrier EV = v0\nfuel 5\n", &sig).unwrap();
        // Condition always chooses the left summand: loop forever.
        let t = parse_term("while(inl[1,1], id[1])", &sig).unwrap();
        assert_eq!(
            eval(&t, &m, EValue::Ordinary(Value::Unit), Vec::new()),
            Err(Timeout)
        );
    }

    #[test]
    fn while_loop_terminates_on_right() {
        let sig = exc_sig();
        let m = exc_model();
        // Condition immediately picks the right summand: exit with its payload.
        let t = parse_term("while(inr[EV,1], to1[EV])", &sig).unwrap();
        crate::terms::infer(&t, &sig).unwrap();
        let (out, _) = eval(&t, &m, EValue::Ordinary(Value::Unit), Vec::new()).unwrap();
        assert_eq!(out, EValue::Ordinary(Value::Unit));
    }

    #[test]
    fn model_parser_rejects_partial_tables() {
        let sig = parse_signature("base B\nop f : B -> B\n").unwrap();
        let err = parse_model("carrier B = x y\nop f = (x -> y)\n", &sig).unwrap_err();
        assert!(matches!(err, ModelError::Incomplete(_)), "{err:?}");
    }

    #[test]
    fn model_parser_rejects_unknowns() {
        let sig = parse_signature("base B\n").unwrap();
        assert!(parse_model("carrier C = x\n", &sig).is_err());
        assert!(parse_model("carrier B = x\nop g = (x -> x)\n", &sig).is_err());
    }

    #[test]
    fn compound_values_parse_in_tables() {
        let sig = parse_signature("base B\nop f : B*B -> B+1\n").unwrap();
        let m = parse_model(
            "carrier B = x y\n\
             op f = ((x,x) -> inl x) ((x,y) -> inr *) ((y,x) -> inr *) ((y,y) -> inl y)\n",
            &sig,
        )
        .unwrap();
        let t = DecoratedTerm::Op("f".into());
        let input = EValue::Ordinary(Value::pair(Value::atom("x"), Value::atom("y")));
        let (out, _) = denote(&t, &m, &input, &Vec::new()).unwrap();
        assert_eq!(out, EValue::Ordinary(Value::right(Value::Unit)));
    }

    #[test]
    fn store_enumeration_is_in_declaration_order() {
        let m = st_model();
        let stores = m.stores();
        assert_eq!(stores.len(), 4);
        assert_eq!(stores[0], vec![Value::atom("v0"), Value::atom("v0")]);
        assert_eq!(stores[1], vec![Value::atom("v0"), Value::atom("v1")]);
        assert_eq!(stores[3], vec![Value::atom("v1"), Value::atom("v1")]);
    }
}
