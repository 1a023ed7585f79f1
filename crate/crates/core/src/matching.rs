//! Net morphisms, occurrences and isomorphism.
//!
//! A morphism `f: N1 -> N2` preserves pre/post domains exactly, may map an
//! element onto one with a smaller label, and never decreases the marking.
//! Labels are compared in the target net's alphabet.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lset::{check_morphism, LSetError, LSetMorphism};
use crate::net::{Multiset, PTNet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("map is not total: `{0}` has no image")]
    NotTotal(String),
    #[error("image `{0}` is not in the target net")]
    UnknownTarget(String),
    #[error("pre/post domains not preserved at transition `{0}`")]
    StructureViolation(String),
    #[error("subtype condition fails at `{0}`")]
    SubtypeViolation(String),
    #[error("marking decreases at place `{0}`")]
    MarkingViolation(String),
    #[error("decoration not preserved at `{0}`")]
    DecorationViolation(String),
    #[error("occurrence is not injective")]
    NotInjective,
}

/// A pair of maps on places and transitions.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetMorphism {
    pub places: BTreeMap<String, String>,
    pub transitions: BTreeMap<String, String>,
}

impl NetMorphism {
    pub fn identity(net: &PTNet) -> Self {
        NetMorphism {
            places: net.places().keys().map(|p| (p.clone(), p.clone())).collect(),
            transitions: net
                .transitions()
                .keys()
                .map(|t| (t.clone(), t.clone()))
                .collect(),
        }
    }

    pub fn place(&self, p: &str) -> &str {
        &self.places[p]
    }

    pub fn transition(&self, t: &str) -> &str {
        &self.transitions[t]
    }

    pub fn is_injective(&self) -> bool {
        let ps: BTreeSet<&String> = self.places.values().collect();
        let ts: BTreeSet<&String> = self.transitions.values().collect();
        ps.len() == self.places.len() && ts.len() == self.transitions.len()
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &NetMorphism) -> NetMorphism {
        NetMorphism {
            places: self
                .places
                .iter()
                .map(|(k, v)| (k.clone(), after.places[v].clone()))
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|(k, v)| (k.clone(), after.transitions[v].clone()))
                .collect(),
        }
    }

    /// Inverse of an injective morphism, defined on its image.
    pub fn inverse(&self) -> NetMorphism {
        NetMorphism {
            places: self.places.iter().map(|(k, v)| (v.clone(), k.clone())).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|(k, v)| (v.clone(), k.clone()))
                .collect(),
        }
    }

    /// The place and transition components as labelled-set morphisms.
    pub fn components(
        &self,
        source: &PTNet,
        target: &PTNet,
    ) -> Result<(LSetMorphism, LSetMorphism), LSetError> {
        Ok((
            check_morphism(&source.place_set(), &target.place_set(), self.places.clone())?,
            check_morphism(
                &source.transition_set(),
                &target.transition_set(),
                self.transitions.clone(),
            )?,
        ))
    }

    pub fn image_places(&self) -> BTreeSet<&str> {
        self.places.values().map(String::as_str).collect()
    }

    pub fn image_transitions(&self) -> BTreeSet<&str> {
        self.transitions.values().map(String::as_str).collect()
    }
}

fn map_multiset(m: &Multiset, f: &BTreeMap<String, String>) -> Multiset {
    m.map_ids(|p| f.get(p).cloned())
}

fn decorations_agree(source: &PTNet, target: &PTNet, f: &NetMorphism) -> Result<(), MorphismError> {
    let (Some(d1), Some(d2)) = (source.decorations(), target.decorations()) else {
        return Ok(());
    };
    for (p, q) in &f.places {
        if let (Some(c1), Some(c2)) = (d1.capacity.get(p), d2.capacity.get(q)) {
            if c1 != c2 {
                return Err(MorphismError::DecorationViolation(p.clone()));
            }
        }
    }
    for (t, u) in &f.transitions {
        if let (Some(a), Some(b)) = (d1.tlb.get(t), d2.tlb.get(u)) {
            if a != b {
                return Err(MorphismError::DecorationViolation(t.clone()));
            }
        }
        if let (Some(a), Some(b)) = (d1.renewal(t), d2.renewal(u)) {
            if a != b {
                return Err(MorphismError::DecorationViolation(t.clone()));
            }
        }
    }
    Ok(())
}

/// Validates `f` as a net morphism `source -> target`, reporting the first
/// violated condition.
pub fn check_net_morphism(
    source: &PTNet,
    target: &PTNet,
    f: NetMorphism,
) -> Result<NetMorphism, MorphismError> {
    let ns = target.name_space();
    for (p, place) in source.places() {
        let q = f.places.get(p).ok_or_else(|| MorphismError::NotTotal(p.clone()))?;
        let image = target
            .places()
            .get(q)
            .ok_or_else(|| MorphismError::UnknownTarget(q.clone()))?;
        if !ns.places.leq_or_false(&image.label, &place.label) {
            return Err(MorphismError::SubtypeViolation(p.clone()));
        }
    }
    for (t, tr) in source.transitions() {
        let u = f
            .transitions
            .get(t)
            .ok_or_else(|| MorphismError::NotTotal(t.clone()))?;
        let image = target
            .transitions()
            .get(u)
            .ok_or_else(|| MorphismError::UnknownTarget(u.clone()))?;
        if map_multiset(&tr.pre, &f.places) != image.pre
            || map_multiset(&tr.post, &f.places) != image.post
        {
            return Err(MorphismError::StructureViolation(t.clone()));
        }
        if !ns.transitions.leq_or_false(&image.label, &tr.label) {
            return Err(MorphismError::SubtypeViolation(t.clone()));
        }
    }
    for p in source.places().keys() {
        if source.marking().get(p) > target.marking().get(&f.places[p]) {
            return Err(MorphismError::MarkingViolation(p.clone()));
        }
    }
    decorations_agree(source, target, &f)?;
    Ok(f)
}

/// Injective with labels and marking preserved on the nose.
pub fn is_strict(source: &PTNet, target: &PTNet, f: &NetMorphism) -> bool {
    f.is_injective()
        && f
            .places
            .iter()
            .all(|(p, q)| source.place_label(p) == target.place_label(q))
        && f
            .transitions
            .iter()
            .all(|(t, u)| source.transition_label(t) == target.transition_label(u))
        && f
            .places
            .iter()
            .all(|(p, q)| source.marking().get(p) == target.marking().get(q))
}

/// An injective morphism from a rule's left-hand side into a host net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence(NetMorphism);

impl Occurrence {
    /// Validates `f` as an injective morphism `pattern -> host`.
    pub fn new(pattern: &PTNet, host: &PTNet, f: NetMorphism) -> Result<Self, MorphismError> {
        if !f.is_injective() {
            return Err(MorphismError::NotInjective);
        }
        Ok(Occurrence(check_net_morphism(pattern, host, f)?))
    }

    pub fn morphism(&self) -> &NetMorphism {
        &self.0
    }

    pub fn into_morphism(self) -> NetMorphism {
        self.0
    }
}

impl Deref for Occurrence {
    type Target = NetMorphism;

    fn deref(&self) -> &NetMorphism {
        &self.0
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Injective, labels may shrink, markings may grow.
    Occurrence,
    /// Bijective and strict.
    Isomorphism,
}

fn weights(m: &Multiset) -> Vec<u64> {
    let mut w: Vec<u64> = m.iter().map(|(_, v)| v).collect();
    w.sort_unstable();
    w
}

struct Search<'a> {
    pattern: &'a PTNet,
    host: &'a PTNet,
    mode: Mode,
    transitions: Vec<&'a str>,
    transition_candidates: Vec<Vec<&'a str>>,
    places: Vec<&'a str>,
    place_candidates: Vec<Vec<&'a str>>,
    limit: Option<usize>,
}

impl<'a> Search<'a> {
    fn new(pattern: &'a PTNet, host: &'a PTNet, mode: Mode) -> Self {
        let strict = mode == Mode::Isomorphism;
        let pns = host.name_space();

        let label_ok_t = |l_host: &str, l_pat: &str| {
            if strict {
                l_host == l_pat
            } else {
                pns.transitions.leq_or_false(l_host, l_pat)
            }
        };
        let label_ok_p = |l_host: &str, l_pat: &str| {
            if strict {
                l_host == l_pat
            } else {
                pns.places.leq_or_false(l_host, l_pat)
            }
        };

        let mut ts: Vec<(&str, Vec<&str>)> = pattern
            .transitions()
            .iter()
            .map(|(t, tr)| {
                let (wpre, wpost) = (weights(&tr.pre), weights(&tr.post));
                let cands = host
                    .transitions()
                    .iter()
                    .filter(|(_, u)| {
                        label_ok_t(&u.label, &tr.label)
                            && weights(&u.pre) == wpre
                            && weights(&u.post) == wpost
                    })
                    .map(|(u, _)| u.as_str())
                    .collect();
                (t.as_str(), cands)
            })
            .collect();
        ts.sort_by_key(|(t, c)| (c.len(), *t));

        // Places adjacent to the ordered transitions come first, so arcs prune
        // their candidates early.
        let mut order: Vec<&str> = Vec::new();
        let mut seen = BTreeSet::new();
        for (t, _) in &ts {
            let tr = &pattern.transitions()[*t];
            for p in tr.pre.support().chain(tr.post.support()) {
                if seen.insert(p) {
                    order.push(p);
                }
            }
        }
        for p in pattern.places().keys() {
            if seen.insert(p.as_str()) {
                order.push(p);
            }
        }
        let degree = |net: &PTNet, p: &str| net.adjacent_transitions(p).len();
        let place_candidates = order
            .iter()
            .map(|p| {
                let pl = &pattern.places()[*p];
                let (m, d) = (pattern.marking().get(p), degree(pattern, p));
                host.places()
                    .iter()
                    .filter(|(q, ql)| {
                        let (mq, dq) = (host.marking().get(q), degree(host, q));
                        label_ok_p(&ql.label, &pl.label)
                            && if strict { m == mq && d == dq } else { m <= mq && d <= dq }
                    })
                    .map(|(q, _)| q.as_str())
                    .collect()
            })
            .collect();

        let (transitions, transition_candidates) = ts.into_iter().unzip();
        Search {
            pattern,
            host,
            mode,
            transitions,
            transition_candidates,
            places: order,
            place_candidates,
            limit: None,
        }
    }

    fn run(&self) -> Vec<NetMorphism> {
        if self.mode == Mode::Isomorphism
            && (self.pattern.places().len() != self.host.places().len()
                || self.pattern.transitions().len() != self.host.transitions().len())
        {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut state = State::default();
        self.assign_transition(0, &mut state, &mut out);
        out
    }

    fn done(&self, out: &[NetMorphism]) -> bool {
        self.limit.is_some_and(|l| out.len() >= l)
    }

    fn arcs_agree(&self, t: &str, u: &str, p: &str, q: &str) -> bool {
        let (tr, ur) = (&self.pattern.transitions()[t], &self.host.transitions()[u]);
        tr.pre.get(p) == ur.pre.get(q) && tr.post.get(p) == ur.post.get(q)
    }

    fn assign_transition(&self, i: usize, state: &mut State<'a>, out: &mut Vec<NetMorphism>) {
        if self.done(out) {
            return;
        }
        if i == self.transitions.len() {
            self.assign_place(0, state, out);
            return;
        }
        let t = self.transitions[i];
        for &u in &self.transition_candidates[i] {
            if state.used_t.contains(u) {
                continue;
            }
            // Only places are assigned after transitions, so no arc checks yet.
            state.used_t.insert(u);
            state.ft.push((t, u));
            self.assign_transition(i + 1, state, out);
            state.ft.pop();
            state.used_t.remove(u);
        }
    }

    fn assign_place(&self, i: usize, state: &mut State<'a>, out: &mut Vec<NetMorphism>) {
        if self.done(out) {
            return;
        }
        if i == self.places.len() {
            let f = NetMorphism {
                places: state
                    .fp
                    .iter()
                    .map(|(p, q)| (p.to_string(), q.to_string()))
                    .collect(),
                transitions: state
                    .ft
                    .iter()
                    .map(|(t, u)| (t.to_string(), u.to_string()))
                    .collect(),
            };
            if check_net_morphism(self.pattern, self.host, f.clone()).is_ok()
                && (self.mode == Mode::Occurrence || is_strict(self.pattern, self.host, &f))
            {
                out.push(f);
            }
            return;
        }
        let p = self.places[i];
        for &q in &self.place_candidates[i] {
            if state.used_p.contains(q) {
                continue;
            }
            if !state.ft.iter().all(|&(t, u)| self.arcs_agree(t, u, p, q)) {
                continue;
            }
            state.used_p.insert(q);
            state.fp.push((p, q));
            self.assign_place(i + 1, state, out);
            state.fp.pop();
            state.used_p.remove(q);
        }
    }
}

#[derive(Default)]
struct State<'a> {
    ft: Vec<(&'a str, &'a str)>,
    fp: Vec<(&'a str, &'a str)>,
    used_t: BTreeSet<&'a str>,
    used_p: BTreeSet<&'a str>,
}

/// All injective occurrences of `pattern` in `host`, sorted.
pub fn find_occurrences(pattern: &PTNet, host: &PTNet) -> Vec<Occurrence> {
    let mut found: Vec<Occurrence> = Search::new(pattern, host, Mode::Occurrence)
        .run()
        .into_iter()
        .map(Occurrence)
        .collect();
    found.sort();
    found
}

/// A strict bijective morphism `a -> b`, if the nets are isomorphic.
pub fn isomorphic(a: &PTNet, b: &PTNet) -> Option<NetMorphism> {
    if a.decorations().is_some() != b.decorations().is_some() {
        return None;
    }
    let mut search = Search::new(a, b, Mode::Isomorphism);
    search.limit = Some(1);
    let witness = search.run().into_iter().next()?;
    match (a.decorations(), b.decorations()) {
        (Some(da), Some(db)) => {
            let ok = da.tags == db.tags
                && da.capacity.len() == db.capacity.len()
                && da.tlb.len() == db.tlb.len()
                && da.rnw.len() == db.rnw.len();
            ok.then_some(witness)
        }
        _ => Some(witness),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::net::Multiset;
    use crate::poset::{NameSpacePair, PosetG, TOP};

    fn ms(pairs: &[(&str, u64)]) -> Multiset {
        Multiset::from_pairs(pairs.iter().copied())
    }

    fn alphabet() -> Arc<NameSpacePair> {
        Arc::new(NameSpacePair::new(
            PosetG::flat(["p"], TOP).unwrap(),
            PosetG::new(
                ["step", "step1", "step2", "task1"],
                [("step1", "step"), ("step2", "step")],
                TOP,
            )
            .unwrap(),
        ))
    }

    /// a --t1--> b --t2--> c
    fn chain(l1: &str, l2: &str, marking: &[(&str, u64)]) -> PTNet {
        let mut n = PTNet::new(alphabet());
        for p in ["a", "b", "c"] {
            n.add_place(p, "p").unwrap();
        }
        n.add_transition("t1", l1, ms(&[("a", 1)]), ms(&[("b", 1)])).unwrap();
        n.add_transition("t2", l2, ms(&[("b", 1)]), ms(&[("c", 1)])).unwrap();
        n.set_marking(ms(marking)).unwrap();
        n
    }

    fn single(label: &str, with_places: bool) -> PTNet {
        let mut n = PTNet::new(alphabet());
        if with_places {
            n.add_place("x", TOP).unwrap();
            n.add_place("y", TOP).unwrap();
            n.add_transition("t", label, ms(&[("x", 1)]), ms(&[("y", 1)])).unwrap();
        } else {
            n.add_transition("t", label, Multiset::new(), Multiset::new()).unwrap();
        }
        n
    }

    #[test]
    fn identity_is_valid_and_strict() {
        let n = chain("step1", "step2", &[("a", 1)]);
        let id = NetMorphism::identity(&n);
        assert!(check_net_morphism(&n, &n, id.clone()).is_ok());
        assert!(is_strict(&n, &n, &id));
    }

    #[test]
    fn collapsing_places_breaks_structure() {
        let mut src = PTNet::new(alphabet());
        src.add_place("a", "p").unwrap();
        src.add_place("b", "p").unwrap();
        src.add_place("o", "p").unwrap();
        src.add_transition("t", "step", ms(&[("a", 1), ("b", 1)]), ms(&[("o", 1)]))
            .unwrap();
        let mut tgt = PTNet::new(alphabet());
        tgt.add_place("a", "p").unwrap();
        tgt.add_place("o", "p").unwrap();
        tgt.add_transition("t", "step", ms(&[("a", 1)]), ms(&[("o", 1)])).unwrap();
        let f = NetMorphism {
            places: [("a", "a"), ("b", "a"), ("o", "o")]
                .iter()
                .map(|(x, y)| (x.to_string(), y.to_string()))
                .collect(),
            transitions: [("t".to_string(), "t".to_string())].into(),
        };
        assert_eq!(
            check_net_morphism(&src, &tgt, f).unwrap_err(),
            MorphismError::StructureViolation("t".into())
        );
    }

    #[test]
    fn marking_violation() {
        let pattern = chain("step1", "step2", &[("a", 2)]);
        let host = chain("step1", "step2", &[("a", 1)]);
        assert_eq!(
            check_net_morphism(&pattern, &host, NetMorphism::identity(&pattern)).unwrap_err(),
            MorphismError::MarkingViolation("a".into())
        );
    }

    #[test]
    fn strictness() {
        let general = chain("step", "step", &[]);
        let specific = chain("step1", "step2", &[]);
        let id = NetMorphism::identity(&general);
        assert!(check_net_morphism(&general, &specific, id.clone()).is_ok());
        assert!(!is_strict(&general, &specific, &id));
        // Other direction violates the subtype condition.
        assert_eq!(
            check_net_morphism(&specific, &general, id.clone()).unwrap_err(),
            MorphismError::SubtypeViolation("t1".into())
        );
        let more = chain("step", "step", &[("a", 1)]);
        assert!(check_net_morphism(&general, &more, id.clone()).is_ok());
        assert!(!is_strict(&general, &more, &id));
    }

    #[test]
    fn top_labelled_transition_matches_every_isolated_transition() {
        let pattern = single(TOP, false);
        let mut host = PTNet::new(alphabet());
        for (i, l) in ["step", "step1", "task1"].iter().enumerate() {
            host.add_transition(format!("t{i}"), *l, Multiset::new(), Multiset::new())
                .unwrap();
        }
        assert_eq!(find_occurrences(&pattern, &host).len(), 3);
    }

    #[test]
    fn step_pattern_matches_only_steps() {
        let host = chain("step1", "task1", &[]);
        let found = find_occurrences(&single("step", true), &host);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].transition("t"), "t1");
        assert_eq!(found[0].place("x"), "a");
    }

    #[test]
    fn self_matches_are_automorphisms() {
        let n = chain("step", "step", &[]);
        assert_eq!(find_occurrences(&n, &n).len(), 1);
        // Two parallel copies of a --t--> b swap freely.
        let mut par = PTNet::new(alphabet());
        for p in ["a", "b", "c", "d"] {
            par.add_place(p, "p").unwrap();
        }
        par.add_transition("t", "step", ms(&[("a", 1)]), ms(&[("b", 1)])).unwrap();
        par.add_transition("u", "step", ms(&[("c", 1)]), ms(&[("d", 1)])).unwrap();
        assert_eq!(find_occurrences(&par, &par).len(), 2);
    }

    #[test]
    fn isomorphism() {
        let n = chain("step1", "step2", &[("a", 1)]);
        assert_eq!(isomorphic(&n, &n), Some(NetMorphism::identity(&n)));
        let more = chain("step1", "step2", &[("a", 2)]);
        assert_eq!(isomorphic(&n, &more), None);
        let renamed = n
            .rename(|p| format!("r{p}"), |t| format!("r{t}"))
            .unwrap();
        let w = isomorphic(&n, &renamed).unwrap();
        assert_eq!(w.transition("t1"), "rt1");
        assert!(isomorphic(&renamed, &n).is_some());
        assert_eq!(isomorphic(&n, &chain("step2", "step1", &[("a", 1)])), None);
    }
}
