//! Labelled place/transition nets.
//!
//! Places and transitions are identified by string ids and labelled over the
//! net's [`NameSpacePair`]. Nets are values: firing returns a new net.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lset::LabelledSet;
use crate::poset::NameSpacePair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("label `{label}` of `{element}` is not in the alphabet")]
    UnknownLabel { element: String, label: String },
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("firing vector is not enabled")]
    VectorNotEnabled,
    #[error("capacity of place `{0}` exceeded")]
    CapacityExceeded(String),
    #[error("subtraction leaves a negative coefficient at `{0}`")]
    NegativeCoefficient(String),
    #[error("invalid decoration: {0}")]
    Decoration(String),
}

/// A finitely supported multiset over ids. Zero coefficients are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset(BTreeMap<String, u64>);

impl Multiset {
    pub fn new() -> Self {
        Multiset(BTreeMap::new())
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut m = Multiset::new();
        for (k, v) in pairs {
            m.insert(k, v);
        }
        m
    }

    /// Adds `count` copies of `id`.
    pub fn insert(&mut self, id: impl Into<String>, count: u64) {
        if count > 0 {
            *self.0.entry(id.into()).or_insert(0) += count;
        }
    }

    pub fn set(&mut self, id: impl Into<String>, count: u64) {
        let id = id.into();
        if count == 0 {
            self.0.remove(&id);
        } else {
            self.0.insert(id, count);
        }
    }

    pub fn get(&self, id: &str) -> u64 {
        self.0.get(id).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn support(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.keys().map(String::as_str)
    }

    /// Sum of all coefficients.
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    /// Pointwise `self <= other`.
    pub fn leq(&self, other: &Multiset) -> bool {
        self.0.iter().all(|(k, &v)| v <= other.get(k))
    }

    pub fn add(&self, other: &Multiset) -> Multiset {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.insert(k, v);
        }
        out
    }

    pub fn sub(&self, other: &Multiset) -> Result<Multiset, NetError> {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            let have = out.get(k);
            if have < v {
                return Err(NetError::NegativeCoefficient(k.to_string()));
            }
            out.set(k, have - v);
        }
        Ok(out)
    }

    pub fn scale(&self, k: u64) -> Multiset {
        Multiset(
            self.0
                .iter()
                .filter(|_| k > 0)
                .map(|(id, v)| (id.clone(), v * k))
                .collect(),
        )
    }

    /// Image under an id map, summing coefficients that collide. Ids without
    /// an image are dropped.
    pub fn map_ids(&self, f: impl Fn(&str) -> Option<String>) -> Multiset {
        let mut out = Multiset::new();
        for (k, v) in self.iter() {
            if let Some(img) = f(k) {
                out.insert(img, v);
            }
        }
        out
    }

    /// Keeps only the ids satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&str) -> bool) -> Multiset {
        Multiset(
            self.0
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, &v)| (k.clone(), v))
                .collect(),
        )
    }

    /// Sorted `id:count` entries.
    pub fn digest(&self) -> Vec<String> {
        self.iter().map(|(k, v)| format!("{k}:{v}")).collect()
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .iter()
            .map(|(k, v)| if v == 1 { k.to_string() } else { format!("{v}·{k}") })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub label: String,
    pub pre: Multiset,
    pub post: Multiset,
}

/// Optional capacity and transition-tag decorations.
///
/// Places without a capacity entry are unbounded. `tags` is the tag alphabet,
/// `tlb` tags transitions, and `rnw` names the endomorphism of `tags` that
/// renews a transition's tag whenever it fires.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Decorations {
    pub capacity: BTreeMap<String, u64>,
    pub tags: BTreeSet<String>,
    pub tlb: BTreeMap<String, String>,
    pub rnw: BTreeMap<String, String>,
    pub endomorphisms: BTreeMap<String, BTreeMap<String, String>>,
}

impl Decorations {
    /// The renewal function attached to `t`, if any.
    pub fn renewal(&self, t: &str) -> Option<&BTreeMap<String, String>> {
        self.rnw.get(t).and_then(|name| self.endomorphisms.get(name))
    }

    fn validate(&self, net: &PTNet) -> Result<(), NetError> {
        for p in self.capacity.keys() {
            if !net.places.contains_key(p) {
                return Err(NetError::UnknownPlace(p.clone()));
            }
        }
        for (name, f) in &self.endomorphisms {
            for w in &self.tags {
                match f.get(w) {
                    Some(v) if self.tags.contains(v) => {}
                    _ => {
                        return Err(NetError::Decoration(format!(
                            "endomorphism `{name}` is not total on the tag set at `{w}`"
                        )))
                    }
                }
            }
        }
        for (t, w) in &self.tlb {
            if !net.transitions.contains_key(t) {
                return Err(NetError::UnknownTransition(t.clone()));
            }
            if !self.tags.contains(w) {
                return Err(NetError::Decoration(format!("tag `{w}` of `{t}` is not in W")));
            }
        }
        for (t, name) in &self.rnw {
            if !net.transitions.contains_key(t) {
                return Err(NetError::UnknownTransition(t.clone()));
            }
            if !self.endomorphisms.contains_key(name) {
                return Err(NetError::Decoration(format!(
                    "unknown endomorphism `{name}` for `{t}`"
                )));
            }
        }
        Ok(())
    }

    /// Union of two decoration blocks; overlapping entries must agree.
    pub fn merge(&self, other: &Decorations) -> Result<Decorations, NetError> {
        fn join<V: Clone + PartialEq>(
            a: &BTreeMap<String, V>,
            b: &BTreeMap<String, V>,
            what: &str,
        ) -> Result<BTreeMap<String, V>, NetError> {
            let mut out = a.clone();
            for (k, v) in b {
                match out.get(k) {
                    Some(w) if w != v => {
                        return Err(NetError::Decoration(format!("conflicting {what} for `{k}`")))
                    }
                    _ => {
                        out.insert(k.clone(), v.clone());
                    }
                }
            }
            Ok(out)
        }
        Ok(Decorations {
            capacity: join(&self.capacity, &other.capacity, "capacity")?,
            tags: self.tags.union(&other.tags).cloned().collect(),
            tlb: join(&self.tlb, &other.tlb, "tag")?,
            rnw: join(&self.rnw, &other.rnw, "renewal")?,
            endomorphisms: join(&self.endomorphisms, &other.endomorphisms, "endomorphism")?,
        })
    }
}

/// Number of times each transition fires in a parallel step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiringVector(pub BTreeMap<String, u64>);

impl FiringVector {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        FiringVector(
            pairs
                .into_iter()
                .map(|(t, k)| (t.into(), k))
                .filter(|(_, k)| *k > 0)
                .collect(),
        )
    }

    pub fn single(t: &str) -> Self {
        FiringVector::from_pairs([(t, 1)])
    }

    pub fn add(&self, other: &FiringVector) -> FiringVector {
        let mut out = self.0.clone();
        for (t, k) in &other.0 {
            *out.entry(t.clone()).or_insert(0) += k;
        }
        FiringVector(out)
    }
}

/// A marked, labelled place/transition net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PTNet {
    name_space: Arc<NameSpacePair>,
    places: BTreeMap<String, Place>,
    transitions: BTreeMap<String, Transition>,
    marking: Multiset,
    decorations: Option<Decorations>,
}

impl PTNet {
    /// An empty net over `name_space`.
    pub fn new(name_space: Arc<NameSpacePair>) -> Self {
        PTNet {
            name_space,
            places: BTreeMap::new(),
            transitions: BTreeMap::new(),
            marking: Multiset::new(),
            decorations: None,
        }
    }

    pub fn name_space(&self) -> &Arc<NameSpacePair> {
        &self.name_space
    }

    pub fn places(&self) -> &BTreeMap<String, Place> {
        &self.places
    }

    pub fn transitions(&self) -> &BTreeMap<String, Transition> {
        &self.transitions
    }

    pub fn marking(&self) -> &Multiset {
        &self.marking
    }

    pub fn decorations(&self) -> Option<&Decorations> {
        self.decorations.as_ref()
    }

    pub fn place(&self, p: &str) -> Result<&Place, NetError> {
        self.places
            .get(p)
            .ok_or_else(|| NetError::UnknownPlace(p.to_string()))
    }

    pub fn transition(&self, t: &str) -> Result<&Transition, NetError> {
        self.transitions
            .get(t)
            .ok_or_else(|| NetError::UnknownTransition(t.to_string()))
    }

    pub fn place_label(&self, p: &str) -> Option<&str> {
        self.places.get(p).map(|x| x.label.as_str())
    }

    pub fn transition_label(&self, t: &str) -> Option<&str> {
        self.transitions.get(t).map(|x| x.label.as_str())
    }

    pub fn add_place(&mut self, id: impl Into<String>, label: impl Into<String>) -> Result<(), NetError> {
        let (id, label) = (id.into(), label.into());
        if self.places.contains_key(&id) {
            return Err(NetError::DuplicateId(id));
        }
        if !self.name_space.places.contains(&label) {
            return Err(NetError::UnknownLabel { element: id, label });
        }
        self.places.insert(id, Place { label });
        Ok(())
    }

    pub fn add_transition(
        &mut self,
        id: impl Into<String>,
        label: impl Into<String>,
        pre: Multiset,
        post: Multiset,
    ) -> Result<(), NetError> {
        let (id, label) = (id.into(), label.into());
        if self.transitions.contains_key(&id) {
            return Err(NetError::DuplicateId(id));
        }
        if !self.name_space.transitions.contains(&label) {
            return Err(NetError::UnknownLabel { element: id, label });
        }
        if let Some(p) = pre.support().chain(post.support()).find(|p| !self.places.contains_key(*p)) {
            return Err(NetError::UnknownPlace(p.to_string()));
        }
        self.transitions.insert(id, Transition { label, pre, post });
        Ok(())
    }

    pub fn set_marking(&mut self, marking: Multiset) -> Result<(), NetError> {
        if let Some(p) = marking.support().find(|p| !self.places.contains_key(*p)) {
            return Err(NetError::UnknownPlace(p.to_string()));
        }
        self.check_capacity(&marking, self.decorations.as_ref())?;
        self.marking = marking;
        Ok(())
    }

    pub fn set_decorations(&mut self, decorations: Option<Decorations>) -> Result<(), NetError> {
        if let Some(d) = &decorations {
            d.validate(self)?;
            self.check_capacity(&self.marking, Some(d))?;
        }
        self.decorations = decorations;
        Ok(())
    }

    fn check_capacity(&self, marking: &Multiset, deco: Option<&Decorations>) -> Result<(), NetError> {
        if let Some(d) = deco {
            for (p, &cap) in &d.capacity {
                if marking.get(p) > cap {
                    return Err(NetError::CapacityExceeded(p.clone()));
                }
            }
        }
        Ok(())
    }

    /// Re-checks every structural invariant. Nets built through the public
    /// API always pass; this is for nets assembled by constructions.
    pub fn validate(&self) -> Result<(), NetError> {
        for (id, p) in &self.places {
            if !self.name_space.places.contains(&p.label) {
                return Err(NetError::UnknownLabel {
                    element: id.clone(),
                    label: p.label.clone(),
                });
            }
        }
        for (id, t) in &self.transitions {
            if !self.name_space.transitions.contains(&t.label) {
                return Err(NetError::UnknownLabel {
                    element: id.clone(),
                    label: t.label.clone(),
                });
            }
            for p in t.pre.support().chain(t.post.support()) {
                if !self.places.contains_key(p) {
                    return Err(NetError::UnknownPlace(p.to_string()));
                }
            }
        }
        for p in self.marking.support() {
            if !self.places.contains_key(p) {
                return Err(NetError::UnknownPlace(p.to_string()));
            }
        }
        if let Some(d) = &self.decorations {
            d.validate(self)?;
        }
        self.check_capacity(&self.marking, self.decorations.as_ref())
    }

    pub fn enabled(&self, t: &str) -> Result<bool, NetError> {
        Ok(self.transition(t)?.pre.leq(&self.marking))
    }

    /// Transitions enabled at the current marking, in id order.
    pub fn enabled_transitions(&self) -> Vec<&str> {
        self.transitions
            .iter()
            .filter(|(_, t)| t.pre.leq(&self.marking))
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Fires `t` once.
    pub fn fire(&self, t: &str) -> Result<PTNet, NetError> {
        if !self.enabled(t)? {
            return Err(NetError::NotEnabled(t.to_string()));
        }
        self.fire_parallel(&FiringVector::single(t))
    }

    /// Fires every transition `t` of `v` `v[t]` times at once.
    pub fn fire_parallel(&self, v: &FiringVector) -> Result<PTNet, NetError> {
        let mut consumed = Multiset::new();
        let mut produced = Multiset::new();
        for (t, &k) in &v.0 {
            let tr = self.transition(t)?;
            consumed = consumed.add(&tr.pre.scale(k));
            produced = produced.add(&tr.post.scale(k));
        }
        if !consumed.leq(&self.marking) {
            return Err(match v.0.len() {
                1 => NetError::NotEnabled(v.0.keys().next().cloned().unwrap_or_default()),
                _ => NetError::VectorNotEnabled,
            });
        }
        let marking = self.marking.sub(&consumed)?.add(&produced);
        self.check_capacity(&marking, self.decorations.as_ref())?;

        let mut next = self.clone();
        next.marking = marking;
        if let Some(d) = next.decorations.as_mut() {
            for (t, &k) in &v.0 {
                let Some(f) = self.decorations.as_ref().and_then(|d| d.renewal(t)) else {
                    continue;
                };
                if let Some(tag) = d.tlb.get_mut(t) {
                    for _ in 0..k {
                        *tag = f[tag.as_str()].clone();
                    }
                }
            }
        }
        Ok(next)
    }

    /// Places adjacent to `t`: `•t ∪ t•`.
    pub fn neighbourhood(&self, t: &str) -> Result<BTreeSet<String>, NetError> {
        let tr = self.transition(t)?;
        Ok(tr
            .pre
            .support()
            .chain(tr.post.support())
            .map(str::to_string)
            .collect())
    }

    /// Transitions with an arc to or from `p`.
    pub fn adjacent_transitions(&self, p: &str) -> Vec<&str> {
        self.transitions
            .iter()
            .filter(|(_, t)| t.pre.get(p) > 0 || t.post.get(p) > 0)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// The sub-net on the given places and transitions. Arcs of kept
    /// transitions must stay inside the kept places.
    pub fn restrict(
        &self,
        places: &BTreeSet<String>,
        transitions: &BTreeSet<String>,
    ) -> Result<PTNet, NetError> {
        let mut out = PTNet::new(self.name_space.clone());
        for p in places {
            out.places.insert(p.clone(), self.place(p)?.clone());
        }
        for t in transitions {
            let tr = self.transition(t)?;
            if let Some(p) = tr.pre.support().chain(tr.post.support()).find(|p| !places.contains(*p)) {
                return Err(NetError::UnknownPlace(p.to_string()));
            }
            out.transitions.insert(t.clone(), tr.clone());
        }
        out.marking = self.marking.restrict(|p| places.contains(p));
        out.decorations = self.decorations.as_ref().map(|d| Decorations {
            capacity: d
                .capacity
                .iter()
                .filter(|(p, _)| places.contains(*p))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
            tags: d.tags.clone(),
            tlb: d
                .tlb
                .iter()
                .filter(|(t, _)| transitions.contains(*t))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            rnw: d
                .rnw
                .iter()
                .filter(|(t, _)| transitions.contains(*t))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            endomorphisms: d.endomorphisms.clone(),
        });
        Ok(out)
    }

    /// `Net(t)`: the transition with its pre- and post-places, and the
    /// marking restricted to those places.
    pub fn net_of_transition(&self, t: &str) -> Result<PTNet, NetError> {
        let places = self.neighbourhood(t)?;
        self.restrict(&places, &BTreeSet::from([t.to_string()]))
    }

    /// Renames ids through injective functions. Labels are unchanged.
    pub fn rename(
        &self,
        place: impl Fn(&str) -> String,
        transition: impl Fn(&str) -> String,
    ) -> Result<PTNet, NetError> {
        let mut out = PTNet::new(self.name_space.clone());
        for (p, pl) in &self.places {
            let id = place(p);
            if out.places.insert(id.clone(), pl.clone()).is_some() {
                return Err(NetError::DuplicateId(id));
            }
        }
        let mp = |x: &str| Some(place(x));
        for (t, tr) in &self.transitions {
            let id = transition(t);
            let renamed = Transition {
                label: tr.label.clone(),
                pre: tr.pre.map_ids(mp),
                post: tr.post.map_ids(mp),
            };
            if out.transitions.insert(id.clone(), renamed).is_some() {
                return Err(NetError::DuplicateId(id));
            }
        }
        out.marking = self.marking.map_ids(mp);
        out.decorations = self.decorations.as_ref().map(|d| Decorations {
            capacity: d.capacity.iter().map(|(k, v)| (place(k), *v)).collect(),
            tags: d.tags.clone(),
            tlb: d.tlb.iter().map(|(k, v)| (transition(k), v.clone())).collect(),
            rnw: d.rnw.iter().map(|(k, v)| (transition(k), v.clone())).collect(),
            endomorphisms: d.endomorphisms.clone(),
        });
        Ok(out)
    }

    /// Moves the net to another alphabet, translating every label.
    pub fn relabel(
        &self,
        name_space: Arc<NameSpacePair>,
        place: impl Fn(&str) -> String,
        transition: impl Fn(&str) -> String,
    ) -> Result<PTNet, NetError> {
        let mut out = self.clone();
        out.name_space = name_space;
        for p in out.places.values_mut() {
            p.label = place(&p.label);
        }
        for t in out.transitions.values_mut() {
            t.label = transition(&t.label);
        }
        out.validate()?;
        Ok(out)
    }

    /// Same net over another alphabet that contains all of its labels.
    pub fn with_name_space(&self, name_space: Arc<NameSpacePair>) -> Result<PTNet, NetError> {
        self.relabel(name_space, str::to_string, str::to_string)
    }

    /// Places as a labelled set over `A_P`.
    pub fn place_set(&self) -> LabelledSet {
        LabelledSet::new(
            Arc::new(self.name_space.places.clone()),
            self.places.iter().map(|(p, pl)| (p.clone(), pl.label.clone())).collect(),
        )
        .expect("net labels are validated on insertion")
    }

    /// Transitions as a labelled set over `A_T`.
    pub fn transition_set(&self) -> LabelledSet {
        LabelledSet::new(
            Arc::new(self.name_space.transitions.clone()),
            self.transitions.iter().map(|(t, tr)| (t.clone(), tr.label.clone())).collect(),
        )
        .expect("net labels are validated on insertion")
    }

    /// Total number of tokens.
    pub fn token_count(&self) -> u64 {
        self.marking.total()
    }

    /// Assembles a net from parts, then validates it.
    pub(crate) fn from_parts(
        name_space: Arc<NameSpacePair>,
        places: BTreeMap<String, Place>,
        transitions: BTreeMap<String, Transition>,
        marking: Multiset,
        decorations: Option<Decorations>,
    ) -> Result<PTNet, NetError> {
        let net = PTNet {
            name_space,
            places,
            transitions,
            marking,
            decorations,
        };
        net.validate()?;
        Ok(net)
    }
}
