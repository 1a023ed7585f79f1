//! Labelled sets over a poset alphabet and their morphisms.
//!
//! A morphism may move an element to a target with a *smaller* label:
//! `label(f(x)) <= label(x)`. The class M of injective, strictly
//! label-preserving morphisms is the class along which pushouts are formed.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::poset::{PosetError, PosetG};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LSetError {
    #[error("`{0}` is not in the carrier")]
    UnknownElement(String),
    #[error("label `{label}` of `{element}` is not in the alphabet")]
    UnknownLabel { element: String, label: String },
    #[error("map is not total: `{0}` has no image")]
    NotTotal(String),
    #[error("subtype condition fails at `{0}`")]
    SubtypeViolation(String),
    #[error("morphism is not in M (injective and strict)")]
    NotM,
    #[error("morphisms do not form a span or cospan")]
    Shape,
    #[error("labelled sets use different alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// A finite set with a label for each element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledSet {
    alphabet: Arc<PosetG>,
    labels: BTreeMap<String, String>,
}

impl LabelledSet {
    pub fn new(
        alphabet: Arc<PosetG>,
        labels: BTreeMap<String, String>,
    ) -> Result<Self, LSetError> {
        for (x, l) in &labels {
            if !alphabet.contains(l) {
                return Err(LSetError::UnknownLabel {
                    element: x.clone(),
                    label: l.clone(),
                });
            }
        }
        Ok(LabelledSet { alphabet, labels })
    }

    pub fn from_pairs<I, S>(alphabet: Arc<PosetG>, pairs: I) -> Result<Self, LSetError>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        LabelledSet::new(
            alphabet,
            pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        )
    }

    pub fn empty(alphabet: Arc<PosetG>) -> Self {
        LabelledSet {
            alphabet,
            labels: BTreeMap::new(),
        }
    }

    pub fn alphabet(&self) -> &Arc<PosetG> {
        &self.alphabet
    }

    pub fn label(&self, x: &str) -> Option<&str> {
        self.labels.get(x).map(String::as_str)
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    pub fn carrier(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.labels.keys().map(String::as_str)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.labels.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Result of [`is_m`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MFlag {
    pub injective: bool,
    pub strict: bool,
}

impl MFlag {
    pub fn is_m(self) -> bool {
        self.injective && self.strict
    }
}

/// A validated morphism of labelled sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LSetMorphism {
    source: LabelledSet,
    target: LabelledSet,
    map: BTreeMap<String, String>,
}

impl LSetMorphism {
    pub fn source(&self) -> &LabelledSet {
        &self.source
    }

    pub fn target(&self) -> &LabelledSet {
        &self.target
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn apply(&self, x: &str) -> &str {
        &self.map[x]
    }

    pub fn identity(s: &LabelledSet) -> Self {
        LSetMorphism {
            source: s.clone(),
            target: s.clone(),
            map: s.carrier().map(|x| (x.to_string(), x.to_string())).collect(),
        }
    }
}

/// Validates a candidate map between labelled sets.
pub fn check_morphism(
    source: &LabelledSet,
    target: &LabelledSet,
    map: BTreeMap<String, String>,
) -> Result<LSetMorphism, LSetError> {
    if source.alphabet != target.alphabet {
        return Err(LSetError::AlphabetMismatch);
    }
    for (x, lx) in &source.labels {
        let y = map.get(x).ok_or_else(|| LSetError::NotTotal(x.clone()))?;
        let ly = target
            .label(y)
            .ok_or_else(|| LSetError::UnknownElement(y.clone()))?;
        if !source.alphabet.leq(ly, lx)? {
            return Err(LSetError::SubtypeViolation(x.clone()));
        }
    }
    if let Some(extra) = map.keys().find(|k| !source.contains(k)) {
        return Err(LSetError::UnknownElement(extra.clone()));
    }
    Ok(LSetMorphism {
        source: source.clone(),
        target: target.clone(),
        map,
    })
}

pub fn is_m(f: &LSetMorphism) -> MFlag {
    let image: BTreeSet<&String> = f.map.values().collect();
    MFlag {
        injective: image.len() == f.map.len(),
        strict: f
            .map
            .iter()
            .all(|(x, y)| f.source.label(x) == f.target.label(y)),
    }
}

/// A commuting square produced by [`pushout_along_m`] or [`pullback`].
///
/// For a pushout of `S1 <-f- S0 -g-> S2`, `object` is `S3`, `first` is
/// `g': S1 -> S3` and `second` is `f': S2 -> S3`.
/// For a pullback of `S1 -g-> S0 <-f- S2`, `object` is `S3`, `first` is
/// `f': S3 -> S1` and `second` is `g': S3 -> S2`.
#[derive(Debug, Clone)]
pub struct Square {
    pub object: LabelledSet,
    pub first: LSetMorphism,
    pub second: LSetMorphism,
}

/// Pushout of `S1 <-f- S0 -g-> S2` where `f` is in M.
///
/// The carrier is `S2` plus the elements of `S1` outside `f(S0)`. Elements of
/// `S2` are tagged `2:`; the glued class of `s2 ∈ g(S0)` is named after its
/// smallest `S1` member with tag `1:`; the remaining `S1` elements are tagged
/// `1:`. Glued elements carry their `S2` label, the rest their `S1` label.
pub fn pushout_along_m(f: &LSetMorphism, g: &LSetMorphism) -> Result<Square, LSetError> {
    if f.source != g.source {
        return Err(LSetError::Shape);
    }
    if !is_m(f).is_m() {
        return Err(LSetError::NotM);
    }
    let (s1, s2) = (&f.target, &g.target);
    if s1.alphabet != s2.alphabet {
        return Err(LSetError::AlphabetMismatch);
    }

    // For each glued s2, the smallest S1 element sharing its class.
    let mut glued: BTreeMap<&str, &str> = BTreeMap::new();
    for s0 in f.source.carrier() {
        let (x1, x2) = (f.apply(s0), g.apply(s0));
        glued
            .entry(x2)
            .and_modify(|r| {
                if x1 < *r {
                    *r = x1;
                }
            })
            .or_insert(x1);
    }

    let mut labels = BTreeMap::new();
    let mut from_second = BTreeMap::new();
    for (x2, l2) in &s2.labels {
        let id = match glued.get(x2.as_str()) {
            Some(x1) => format!("1:{x1}"),
            None => format!("2:{x2}"),
        };
        labels.insert(id.clone(), l2.clone());
        from_second.insert(x2.clone(), id);
    }
    let f_image: BTreeMap<&str, &str> = f
        .map
        .iter()
        .map(|(s0, x1)| (x1.as_str(), s0.as_str()))
        .collect();
    let mut from_first = BTreeMap::new();
    for (x1, l1) in &s1.labels {
        let id = match f_image.get(x1.as_str()) {
            Some(s0) => from_second[g.apply(s0)].clone(),
            None => {
                let id = format!("1:{x1}");
                labels.insert(id.clone(), l1.clone());
                id
            }
        };
        from_first.insert(x1.clone(), id);
    }

    let object = LabelledSet::new(s1.alphabet.clone(), labels)?;
    Ok(Square {
        first: check_morphism(s1, &object, from_first)?,
        second: check_morphism(s2, &object, from_second)?,
        object,
    })
}

/// Renders the id of a pair in a pullback carrier.
pub fn pair_id(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// Pullback of the cospan `S1 -g-> S0 <-f- S2`.
///
/// The carrier is `{(s1, s2) | g(s1) = f(s2)}`, each pair labelled with the
/// join of its components' labels.
pub fn pullback(g: &LSetMorphism, f: &LSetMorphism) -> Result<Square, LSetError> {
    if g.target != f.target {
        return Err(LSetError::Shape);
    }
    let (s1, s2) = (&g.source, &f.source);
    let alphabet = &g.target.alphabet;
    let mut labels = BTreeMap::new();
    let mut to_first = BTreeMap::new();
    let mut to_second = BTreeMap::new();
    for (x1, l1) in &s1.labels {
        for (x2, l2) in &s2.labels {
            if g.apply(x1) == f.apply(x2) {
                let id = pair_id(x1, x2);
                labels.insert(id.clone(), alphabet.join(l1, l2)?);
                to_first.insert(id.clone(), x1.clone());
                to_second.insert(id, x2.clone());
            }
        }
    }
    let object = LabelledSet::new(alphabet.clone(), labels)?;
    Ok(Square {
        first: check_morphism(&object, s1, to_first)?,
        second: check_morphism(&object, s2, to_second)?,
        object,
    })
}

/// The free labelling: every element gets the greatest label.
pub fn free_label(alphabet: Arc<PosetG>, set: &BTreeSet<String>) -> LabelledSet {
    let top = alphabet.greatest().to_string();
    LabelledSet {
        labels: set.iter().map(|x| (x.clone(), top.clone())).collect(),
        alphabet,
    }
}

/// Drops the labels.
pub fn forget(set: &LabelledSet) -> BTreeSet<String> {
    set.labels.keys().cloned().collect()
}
