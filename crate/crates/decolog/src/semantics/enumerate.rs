//! Depth-bounded enumeration of well-typed terms over a fixed type
//! universe, used by the rule-soundness harness and the round-trip tests.
//!
//! Depth counts former nesting: leaves have depth 1 and every composite is
//! one deeper than its deepest child. Output order is deterministic:
//! ascending depth, formers in a fixed order, children in enumeration
//! order.

use std::collections::BTreeMap;

use crate::logic::RuleSet;
use crate::signature::Signature;
use crate::terms::{Arrow, DType, Decoration, DecoratedTerm};

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub fragment: RuleSet,
    pub depth: usize,
    /// Also build `if` and `while` formers (the harness leaves them to the
    /// loop rules; round-trip tests want them).
    pub include_loops: bool,
}

#[derive(Debug, Clone)]
struct Entry {
    term: DecoratedTerm,
    dec: Decoration,
}

type Key = (DType, DType);
type Bucket = BTreeMap<Key, Vec<Entry>>;

/// All well-typed terms of depth at most `opts.depth` whose every node has
/// source and target inside `universe`.
pub fn enumerate_terms(
    sig: &Signature,
    universe: &[DType],
    opts: EnumOptions,
) -> Vec<(DecoratedTerm, Arrow)> {
    let levels = enumerate_levels(sig, universe, opts);
    let mut out = Vec::new();
    for level in &levels {
        for ((src, tgt), entries) in level {
            for e in entries {
                out.push((
                    e.term.clone(),
                    Arrow { source: src.clone(), target: tgt.clone(), dec: e.dec },
                ));
            }
        }
    }
    out
}

fn enumerate_levels(sig: &Signature, universe: &[DType], opts: EnumOptions) -> Vec<Bucket> {
    let exc_side = matches!(opts.fragment, RuleSet::Exc | RuleSet::Combined);
    let st_side = matches!(opts.fragment, RuleSet::St | RuleSet::Combined);
    let has = |t: &DType| universe.contains(t);

    let mut leaves = Bucket::new();
    let push = |bucket: &mut Bucket, src: DType, tgt: DType, term, dec| {
        bucket.entry((src, tgt)).or_default().push(Entry { term, dec });
    };

    for t in universe {
        push(&mut leaves, t.clone(), t.clone(), DecoratedTerm::Id(t.clone()), Decoration::PURE);
    }
    if exc_side {
        if has(&DType::Empty) {
            for (name, vt) in sig.exceptions() {
                let v = DType::base(vt);
                if has(&v) {
                    push(
                        &mut leaves,
                        v.clone(),
                        DType::Empty,
                        DecoratedTerm::tag(name),
                        Decoration::new(1, 0),
                    );
                    push(
                        &mut leaves,
                        DType::Empty,
                        v,
                        DecoratedTerm::untag(name),
                        Decoration::new(2, 0),
                    );
                }
            }
            for t in universe {
                if *t != DType::Empty {
                    push(
                        &mut leaves,
                        DType::Empty,
                        t.clone(),
                        DecoratedTerm::FromEmpty(t.clone()),
                        Decoration::PURE,
                    );
                }
            }
        }
        for t in universe {
            if let DType::Sum(a, b) = t {
                if has(a) && has(b) {
                    push(
                        &mut leaves,
                        (**a).clone(),
                        t.clone(),
                        DecoratedTerm::Inl((**a).clone(), (**b).clone()),
                        Decoration::PURE,
                    );
                    push(
                        &mut leaves,
                        (**b).clone(),
                        t.clone(),
                        DecoratedTerm::Inr((**a).clone(), (**b).clone()),
                        Decoration::PURE,
                    );
                }
            }
        }
    }
    if st_side {
        if has(&DType::Unit) {
            for (name, vt) in sig.locations() {
                let v = DType::base(vt);
                if has(&v) {
                    push(
                        &mut leaves,
                        DType::Unit,
                        v.clone(),
                        DecoratedTerm::lookup(name),
                        Decoration::new(0, 1),
                    );
                    push(
                        &mut leaves,
                        v,
                        DType::Unit,
                        DecoratedTerm::update(name),
                        Decoration::new(0, 2),
                    );
                }
            }
            for t in universe {
                if *t != DType::Unit {
                    push(
                        &mut leaves,
                        t.clone(),
                        DType::Unit,
                        DecoratedTerm::ToUnit(t.clone()),
                        Decoration::PURE,
                    );
                }
            }
        }
        for t in universe {
            if let DType::Prod(a, b) = t {
                if has(a) && has(b) {
                    push(
                        &mut leaves,
                        t.clone(),
                        (**a).clone(),
                        DecoratedTerm::Proj1((**a).clone(), (**b).clone()),
                        Decoration::PURE,
                    );
                    push(
                        &mut leaves,
                        t.clone(),
                        (**b).clone(),
                        DecoratedTerm::Proj2((**a).clone(), (**b).clone()),
                        Decoration::PURE,
                    );
                }
            }
        }
    }

    let mut levels = vec![leaves];
    for d in 1..opts.depth {
        let mut level = Bucket::new();
        grow_level(&levels, d, universe, exc_side, st_side, opts.include_loops, &mut level);
        levels.push(level);
    }
    levels
}

// Entries at depth exactly `d` (levels are 1-based depths).
fn exact(levels: &[Bucket], d: usize, key: &Key) -> Vec<Entry> {
    levels[d - 1].get(key).map(|v| v.to_vec()).unwrap_or_default()
}

// Entries at depth strictly below `d`.
fn below(levels: &[Bucket], d: usize, key: &Key) -> Vec<Entry> {
    let mut out = Vec::new();
    for level in &levels[..d - 1] {
        if let Some(es) = level.get(key) {
            out.extend(es.iter().cloned());
        }
    }
    out
}

// All (f, g) pairs with max depth exactly `d`, through `mk`.
fn pairs_at(
    levels: &[Bucket],
    d: usize,
    f_key: &Key,
    g_key: &Key,
    mut mk: impl FnMut(&Entry, &Entry),
) {
    let fx = exact(levels, d, f_key);
    let fb = below(levels, d, f_key);
    let gx = exact(levels, d, g_key);
    let gb = below(levels, d, g_key);
    for f in &fx {
        for g in gx.iter().chain(&gb) {
            mk(f, g);
        }
    }
    for f in &fb {
        for g in &gx {
            mk(f, g);
        }
    }
}

fn grow_level(
    levels: &[Bucket],
    d: usize,
    universe: &[DType],
    exc_side: bool,
    st_side: bool,
    include_loops: bool,
    level: &mut Bucket,
) {
    // Composition f o g with g : src -> mid, f : mid -> tgt.
    for mid in universe {
        for tgt in universe {
            for src in universe {
                let f_key = (mid.clone(), tgt.clone());
                let g_key = (src.clone(), mid.clone());
                let mut entries = Vec::new();
                pairs_at(levels, d, &f_key, &g_key, |f, g| {
                    entries.push(Entry {
                        term: DecoratedTerm::comp(f.term.clone(), g.term.clone()),
                        dec: f.dec.join(g.dec),
                    });
                });
                if !entries.is_empty() {
                    level
                        .entry((src.clone(), tgt.clone()))
                        .or_default()
                        .extend(entries);
                }
            }
        }
    }
    if exc_side {
        for sum in universe {
            let DType::Sum(a, b) = sum else { continue };
            if !universe.contains(a) || !universe.contains(b) {
                continue;
            }
            for tgt in universe {
                let f_key = ((**a).clone(), tgt.clone());
                let g_key = ((**b).clone(), tgt.clone());
                let mut entries = Vec::new();
                pairs_at(levels, d, &f_key, &g_key, |f, g| {
                    if f.dec.exc <= 1 {
                        entries.push(Entry {
                            term: DecoratedTerm::copair(f.term.clone(), g.term.clone()),
                            dec: f.dec.join(g.dec),
                        });
                    }
                });
                if !entries.is_empty() {
                    level
                        .entry((sum.clone(), tgt.clone()))
                        .or_default()
                        .extend(entries);
                }
            }
        }
    }
    if st_side {
        for prod in universe {
            let DType::Prod(a, b) = prod else { continue };
            if !universe.contains(a) || !universe.contains(b) {
                continue;
            }
            for src in universe {
                let f_key = (src.clone(), (**a).clone());
                let g_key = (src.clone(), (**b).clone());
                let mut entries = Vec::new();
                pairs_at(levels, d, &f_key, &g_key, |f, g| {
                    if f.dec.st <= 1 && f.dec.exc == 0 {
                        entries.push(Entry {
                            term: DecoratedTerm::pair(f.term.clone(), g.term.clone()),
                            dec: f.dec.join(g.dec),
                        });
                    }
                });
                if !entries.is_empty() {
                    level
                        .entry((src.clone(), prod.clone()))
                        .or_default()
                        .extend(entries);
                }
            }
        }
    }
    if include_loops {
        for sum in universe {
            let DType::Sum(l, r) = sum else { continue };
            if !universe.contains(l) || !universe.contains(r) {
                continue;
            }
            for src in universe {
                let b_key = (src.clone(), sum.clone());
                // while(b, f): f feeds the condition's source.
                let f_key = ((**l).clone(), src.clone());
                let mut entries = Vec::new();
                pairs_at(levels, d, &b_key, &f_key, |b, f| {
                    entries.push(Entry {
                        term: DecoratedTerm::while_loop(b.term.clone(), f.term.clone()),
                        dec: b.dec.join(f.dec),
                    });
                });
                if !entries.is_empty() {
                    level
                        .entry((src.clone(), (**r).clone()))
                        .or_default()
                        .extend(entries);
                }
                // if(b, f, g): all triples with max depth exactly d.
                for tgt in universe {
                    let fl_key = ((**l).clone(), tgt.clone());
                    let gr_key = ((**r).clone(), tgt.clone());
                    let bx = exact(levels, d, &b_key);
                    let bb = below(levels, d, &b_key);
                    let fx = exact(levels, d, &fl_key);
                    let fb = below(levels, d, &fl_key);
                    let gx = exact(levels, d, &gr_key);
                    let gb = below(levels, d, &gr_key);
                    let mut entries = Vec::new();
                    for (bs, fs, gs, ok) in [
                        (&bx, &fx, &gx, true),
                        (&bx, &fx, &gb, true),
                        (&bx, &fb, &gx, true),
                        (&bx, &fb, &gb, true),
                        (&bb, &fx, &gx, true),
                        (&bb, &fx, &gb, true),
                        (&bb, &fb, &gx, true),
                        (&bb, &fb, &gb, false),
                    ] {
                        if !ok {
                            continue;
                        }
                        for b in bs.iter() {
                            for f in fs.iter() {
                                for g in gs.iter() {
                                    entries.push(Entry {
                                        term: DecoratedTerm::cond(
                                            b.term.clone(),
                                            f.term.clone(),
                                            g.term.clone(),
                                        ),
                                        dec: b.dec.join(f.dec).join(g.dec),
                                    });
                                }
                            }
                        }
                    }
                    if !entries.is_empty() {
                        level
                            .entry((src.clone(), tgt.clone()))
                            .or_default()
                            .extend(entries);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::parse_signature;
    use crate::terms::infer;

    fn sig() -> Signature {
        parse_signature("base EV\nexception T : EV\nexception R : EV\n").unwrap()
    }

    fn universe() -> Vec<DType> {
        vec![DType::base("EV"), DType::Empty, DType::sum(DType::base("EV"), DType::Empty)]
    }

    #[test]
    fn enumerated_terms_are_well_typed_with_matching_arrows() {
        let s = sig();
        let terms = enumerate_terms(
            &s,
            &universe(),
            EnumOptions { fragment: RuleSet::Exc, depth: 3, include_loops: false },
        );
        assert!(terms.len() > 50, "expected a substantial pool, got {}", terms.len());
        for (t, arrow) in &terms {
            let inferred = infer(t, &s).unwrap_or_else(|e| panic!("{t} ill-typed: {e}"));
            assert_eq!(&inferred, arrow, "stored arrow mismatch for {t}");
        }
    }

    #[test]
    fn decoration_of_composites_is_componentwise_max() {
        let s = sig();
        let terms = enumerate_terms(
            &s,
            &universe(),
            EnumOptions { fragment: RuleSet::Exc, depth: 3, include_loops: false },
        );
        for (t, _) in &terms {
            if let DecoratedTerm::Comp(f, g) = t {
                let df = infer(f, &s).unwrap().dec;
                let dg = infer(g, &s).unwrap().dec;
                let dt = infer(t, &s).unwrap().dec;
                assert_eq!(dt, df.join(dg));
            }
        }
    }

    #[test]
    fn exc_fragment_terms_are_state_pure() {
        let s = parse_signature(
            "base EV\nbase Val\nexception T : EV\nlocation X : Val\n",
        )
        .unwrap();
        let terms = enumerate_terms(
            &s,
            &universe(),
            EnumOptions { fragment: RuleSet::Exc, depth: 3, include_loops: false },
        );
        for (t, arrow) in &terms {
            assert_eq!(arrow.dec.st, 0, "{t} is not state-pure");
        }
    }

    #[test]
    fn depth_respects_bound() {
        fn depth(t: &DecoratedTerm) -> usize {
            use DecoratedTerm::*;
            match t {
                Comp(a, b) | Copair(a, b) | Pair(a, b) | While(a, b) => {
                    1 + depth(a).max(depth(b))
                }
                If(a, b, c) => 1 + depth(a).max(depth(b)).max(depth(c)),
                _ => 1,
            }
        }
        let terms = enumerate_terms(
            &sig(),
            &universe(),
            EnumOptions { fragment: RuleSet::Exc, depth: 3, include_loops: false },
        );
        assert!(terms.iter().all(|(t, _)| depth(t) <= 3));
        assert!(terms.iter().any(|(t, _)| depth(t) == 3));
    }

    #[test]
    fn loops_enumerate_when_requested() {
        let s = parse_signature("base EV\nexception T : EV\n").unwrap();
        let u = vec![DType::Unit, DType::sum(DType::Unit, DType::Unit)];
        let terms = enumerate_terms(
            &s,
            &u,
            EnumOptions { fragment: RuleSet::Combined, depth: 3, include_loops: true },
        );
        assert!(terms.iter().any(|(t, _)| matches!(t, DecoratedTerm::While(..))));
        assert!(terms.iter().any(|(t, _)| matches!(t, DecoratedTerm::If(..))));
        for (t, arrow) in &terms {
            let inferred = infer(t, &s).unwrap_or_else(|e| panic!("{t} ill-typed: {e}"));
            assert_eq!(&inferred, arrow);
        }
    }
}
