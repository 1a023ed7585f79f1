//! Double-pushout rewriting of labelled nets.
//!
//! A rule is a span `L <-l- K -r-> R` of strict injective morphisms. A step
//! removes `o(L \ l(K))` from the host to get the context `D`, then glues in
//! `R \ r(K)`. Ids of the host survive; created elements get fresh ids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::matching::{check_net_morphism, find_occurrences, is_strict, MorphismError, NetMorphism, Occurrence};
use crate::net::{Decorations, Multiset, NetError, PTNet, Place, Transition};
use crate::poset::NameSpacePair;

/// Where a rule may be applied.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Global,
    /// Local to the subnet with this id.
    Local(String),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Global => f.write_str("global"),
            Scope::Local(s) => write!(f, "local:{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GluingViolation {
    #[error("deleting place `{place}` leaves transition `{transition}` dangling")]
    Dangling { place: String, transition: String },
    #[error("marking of place `{place}` exceeds the tokens the rule deletes")]
    Marking { place: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpoError {
    #[error("rule `{rule}`: {side} morphism is not strict and injective")]
    NotStrict { rule: String, side: &'static str },
    #[error("rule `{rule}`: invalid {side} morphism: {source}")]
    InvalidSpan {
        rule: String,
        side: &'static str,
        source: MorphismError,
    },
    #[error("gluing condition fails: {0}")]
    Gluing(#[from] GluingViolation),
    #[error("invalid occurrence: {0}")]
    Occurrence(#[from] MorphismError),
    #[error("label `{label}` of `{element}` is not in the host alphabet")]
    AlphabetError { element: String, label: String },
    #[error("created id `{0}` already exists in the host")]
    NameCollision(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// A validated rule `L <-l- K -r-> R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    name: String,
    scope: Scope,
    lhs: PTNet,
    interface: PTNet,
    rhs: PTNet,
    left: NetMorphism,
    right: NetMorphism,
}

impl Rule {
    pub fn new(
        name: impl Into<String>,
        scope: Scope,
        lhs: PTNet,
        interface: PTNet,
        rhs: PTNet,
        left: NetMorphism,
        right: NetMorphism,
    ) -> Result<Rule, DpoError> {
        let name = name.into();
        for (side, tgt, f) in [("left", &lhs, &left), ("right", &rhs, &right)] {
            check_net_morphism(&interface, tgt, f.clone()).map_err(|source| DpoError::InvalidSpan {
                rule: name.clone(),
                side,
                source,
            })?;
            if !is_strict(&interface, tgt, f) {
                return Err(DpoError::NotStrict { rule: name, side });
            }
        }
        Ok(Rule {
            name,
            scope,
            lhs,
            interface,
            rhs,
            left,
            right,
        })
    }

    /// The rule whose interface is included identically in both sides.
    pub fn with_identity_span(
        name: impl Into<String>,
        scope: Scope,
        lhs: PTNet,
        interface: PTNet,
        rhs: PTNet,
    ) -> Result<Rule, DpoError> {
        let id = NetMorphism::identity(&interface);
        Rule::new(name, scope, lhs, interface, rhs, id.clone(), id)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn lhs(&self) -> &PTNet {
        &self.lhs
    }

    pub fn interface(&self) -> &PTNet {
        &self.interface
    }

    pub fn rhs(&self) -> &PTNet {
        &self.rhs
    }

    pub fn left(&self) -> &NetMorphism {
        &self.left
    }

    pub fn right(&self) -> &NetMorphism {
        &self.right
    }

    pub fn renamed(&self, name: impl Into<String>, scope: Scope) -> Rule {
        Rule {
            name: name.into(),
            scope,
            ..self.clone()
        }
    }

    /// The same span with every label translated into `name_space`.
    pub fn relabel(
        &self,
        name: impl Into<String>,
        scope: Scope,
        name_space: Arc<NameSpacePair>,
        place: impl Fn(&str) -> String,
        transition: impl Fn(&str) -> String,
    ) -> Result<Rule, DpoError> {
        let moved = |n: &PTNet| n.relabel(name_space.clone(), &place, &transition);
        Rule::new(
            name,
            scope,
            moved(&self.lhs)?,
            moved(&self.interface)?,
            moved(&self.rhs)?,
            self.left.clone(),
            self.right.clone(),
        )
    }

    /// `R <- K -> L`.
    pub fn inverse(&self, name: impl Into<String>) -> Rule {
        Rule {
            name: name.into(),
            scope: self.scope.clone(),
            lhs: self.rhs.clone(),
            interface: self.interface.clone(),
            rhs: self.lhs.clone(),
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// Elements of `L` outside `l(K)`: places, transitions.
    pub fn deleted(&self) -> (BTreeSet<&str>, BTreeSet<&str>) {
        let (kp, kt) = (self.left.image_places(), self.left.image_transitions());
        (
            self.lhs.places().keys().map(String::as_str).filter(|p| !kp.contains(p)).collect(),
            self.lhs
                .transitions()
                .keys()
                .map(String::as_str)
                .filter(|t| !kt.contains(t))
                .collect(),
        )
    }

    /// Elements of `R` outside `r(K)`: places, transitions.
    pub fn created(&self) -> (BTreeSet<&str>, BTreeSet<&str>) {
        let (kp, kt) = (self.right.image_places(), self.right.image_transitions());
        (
            self.rhs.places().keys().map(String::as_str).filter(|p| !kp.contains(p)).collect(),
            self.rhs
                .transitions()
                .keys()
                .map(String::as_str)
                .filter(|t| !kt.contains(t))
                .collect(),
        )
    }
}

/// Reports the first violation of the dangling or marking condition.
pub fn check_gluing(rule: &Rule, host: &PTNet, o: &Occurrence) -> Result<(), GluingViolation> {
    let (dp, dt) = rule.deleted();
    let deleted_t: BTreeSet<&str> = dt.iter().map(|t| o.transition(t)).collect();
    for p in &dp {
        let q = o.place(p);
        if let Some(t) = host.adjacent_transitions(q).into_iter().find(|t| !deleted_t.contains(t)) {
            return Err(GluingViolation::Dangling {
                place: q.to_string(),
                transition: t.to_string(),
            });
        }
        if host.marking().get(q) > rule.lhs.marking().get(p) {
            return Err(GluingViolation::Marking { place: q.to_string() });
        }
    }
    Ok(())
}

pub fn gluing_condition(rule: &Rule, host: &PTNet, o: &Occurrence) -> bool {
    check_gluing(rule, host, o).is_ok()
}

/// Occurrences of the rule's left side that satisfy the gluing condition.
pub fn applicable_occurrences(rule: &Rule, host: &PTNet) -> Vec<Occurrence> {
    find_occurrences(&rule.lhs, host)
        .into_iter()
        .filter(|o| gluing_condition(rule, host, o))
        .collect()
}

/// The context `D` together with `K -> D`. `D -> N` is the inclusion.
pub fn pushout_complement(rule: &Rule, host: &PTNet, o: &Occurrence) -> Result<(PTNet, NetMorphism), DpoError> {
    let o = Occurrence::new(&rule.lhs, host, o.morphism().clone())?;
    check_gluing(rule, host, &o)?;
    let (dp, dt) = rule.deleted();
    let gone_p: BTreeSet<&str> = dp.iter().map(|p| o.place(p)).collect();
    let gone_t: BTreeSet<&str> = dt.iter().map(|t| o.transition(t)).collect();
    let keep_p: BTreeSet<String> = host
        .places()
        .keys()
        .filter(|p| !gone_p.contains(p.as_str()))
        .cloned()
        .collect();
    let keep_t: BTreeSet<String> = host
        .transitions()
        .keys()
        .filter(|t| !gone_t.contains(t.as_str()))
        .cloned()
        .collect();
    let mut context = host.restrict(&keep_p, &keep_t)?;
    let k_to_d = rule.left.then(o.morphism());

    // Tokens the rule removes from preserved places; zero for strict spans.
    let mut removed = Multiset::new();
    for (k, lk) in &rule.left.places {
        let delta = rule.lhs.marking().get(lk) - rule.interface.marking().get(k);
        removed.insert(k_to_d.place(k), delta);
    }
    let marking = context.marking().sub(&removed)?;
    context.set_marking(marking)?;
    Ok((context, k_to_d))
}

/// How created elements are named in the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FreshNames {
    /// `rule#n`, with `n` counting up from 0 and skipping ids in use.
    #[default]
    Counter,
    /// The element's id in `R`; clashes are an error.
    Keep,
}

/// One rewriting step `N => M`.
#[derive(Debug, Clone)]
pub struct TransformStep {
    pub rule: String,
    pub occurrence: Occurrence,
    pub context: PTNet,
    pub result: PTNet,
    /// `R -> M`.
    pub comatch: NetMorphism,
    /// `K -> D`.
    pub interface_to_context: NetMorphism,
    /// `D -> N`, an inclusion.
    pub context_to_host: NetMorphism,
    /// `D -> M`, an inclusion.
    pub context_to_result: NetMorphism,
}

pub fn transform(host: &PTNet, rule: &Rule, o: &Occurrence) -> Result<TransformStep, DpoError> {
    transform_with(host, rule, o, FreshNames::Counter)
}

pub fn transform_with(
    host: &PTNet,
    rule: &Rule,
    o: &Occurrence,
    names: FreshNames,
) -> Result<TransformStep, DpoError> {
    let (context, k_to_d) = pushout_complement(rule, host, o)?;
    let (cp, ct) = rule.created();

    let mut used: BTreeSet<String> = context
        .places()
        .keys()
        .chain(context.transitions().keys())
        .cloned()
        .collect();
    let mut counter = 0usize;
    let mut fresh = |r_id: &str| -> Result<String, DpoError> {
        match names {
            FreshNames::Keep => {
                if !used.insert(r_id.to_string()) {
                    return Err(DpoError::NameCollision(r_id.to_string()));
                }
                Ok(r_id.to_string())
            }
            FreshNames::Counter => loop {
                let id = format!("{}#{counter}", rule.name);
                counter += 1;
                if used.insert(id.clone()) {
                    return Ok(id);
                }
            },
        }
    };

    // R -> M: through K for preserved elements, fresh ids for the rest.
    let r_inv = rule.right.inverse();
    let mut comatch = NetMorphism::default();
    for p in rule.rhs.places().keys() {
        let id = match r_inv.places.get(p) {
            Some(k) => k_to_d.places[k].clone(),
            None => fresh(p)?,
        };
        comatch.places.insert(p.clone(), id);
    }
    for t in rule.rhs.transitions().keys() {
        let id = match r_inv.transitions.get(t) {
            Some(k) => k_to_d.transitions[k].clone(),
            None => fresh(t)?,
        };
        comatch.transitions.insert(t.clone(), id);
    }

    let ns = host.name_space();
    let mut places: BTreeMap<String, Place> = context.places().clone();
    for p in &cp {
        let label = rule.rhs.place_label(p).expect("place of R");
        if !ns.places.contains(label) {
            return Err(DpoError::AlphabetError {
                element: p.to_string(),
                label: label.to_string(),
            });
        }
        places.insert(comatch.places[*p].clone(), Place { label: label.to_string() });
    }
    let mut transitions: BTreeMap<String, Transition> = context.transitions().clone();
    let mp = |x: &str| comatch.places.get(x).cloned();
    for t in &ct {
        let tr = &rule.rhs.transitions()[*t];
        if !ns.transitions.contains(&tr.label) {
            return Err(DpoError::AlphabetError {
                element: t.to_string(),
                label: tr.label.clone(),
            });
        }
        transitions.insert(
            comatch.transitions[*t].clone(),
            Transition {
                label: tr.label.clone(),
                pre: tr.pre.map_ids(mp),
                post: tr.post.map_ids(mp),
            },
        );
    }

    // m_M = m_D + (m_R - m_K) transported into M.
    let added = rule.rhs.marking().map_ids(mp);
    let kept = rule.interface.marking().map_ids(|k| k_to_d.places.get(k).cloned());
    let marking: Multiset = context.marking().add(&added).sub(&kept)?;

    let decorations = match (context.decorations(), rule.rhs.decorations()) {
        (d, None) => d.cloned(),
        (d, Some(rd)) => {
            let moved = Decorations {
                capacity: rd
                    .capacity
                    .iter()
                    .map(|(p, c)| (comatch.places[p].clone(), *c))
                    .collect(),
                tags: rd.tags.clone(),
                tlb: rd
                    .tlb
                    .iter()
                    .map(|(t, w)| (comatch.transitions[t].clone(), w.clone()))
                    .collect(),
                rnw: rd
                    .rnw
                    .iter()
                    .map(|(t, e)| (comatch.transitions[t].clone(), e.clone()))
                    .collect(),
                endomorphisms: rd.endomorphisms.clone(),
            };
            Some(match d {
                Some(d) => d.merge(&moved)?,
                None => moved,
            })
        }
    };

    let result = PTNet::from_parts(ns.clone(), places, transitions, marking, decorations)?;
    let inclusion = NetMorphism::identity(&context);
    Ok(TransformStep {
        rule: rule.name.clone(),
        occurrence: o.clone(),
        context,
        result,
        comatch,
        interface_to_context: k_to_d,
        context_to_host: inclusion.clone(),
        context_to_result: inclusion,
    })
}

/// Images of `o` and of `o ∘ k` on places and on transitions.
fn images(o: &NetMorphism, k: &NetMorphism) -> [(BTreeSet<String>, BTreeSet<String>); 2] {
    [
        (
            o.places.values().cloned().collect(),
            k.places.values().map(|x| o.places[x].clone()).collect(),
        ),
        (
            o.transitions.values().cloned().collect(),
            k.transitions.values().map(|x| o.transitions[x].clone()).collect(),
        ),
    ]
}

fn independent(a: &NetMorphism, a_k: &NetMorphism, b: &NetMorphism, b_k: &NetMorphism) -> bool {
    images(a, a_k)
        .iter()
        .zip(images(b, b_k).iter())
        .all(|((a_all, a_kept), (b_all, b_kept))| {
            a_all
                .intersection(b_all)
                .all(|x| a_kept.contains(x) && b_kept.contains(x))
        })
}

/// `o1(L1) ∩ o2(L2) ⊆ o1(l1(K1)) ∩ o2(l2(K2))` on places and transitions.
pub fn parallel_independent(r1: &Rule, o1: &Occurrence, r2: &Rule, o2: &Occurrence) -> bool {
    independent(o1, &r1.left, o2, &r2.left)
}

/// The comatch of `step` meets `o2(L2)` only in items both rules preserve.
pub fn sequential_independent(step: &TransformStep, r1: &Rule, r2: &Rule, o2: &Occurrence) -> bool {
    independent(&step.comatch, &r1.right, o2, &r2.left)
}
