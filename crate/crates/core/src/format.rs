//! JSON documents for nets, rules, hierarchies and flattened models.
//!
//! Nested nets may omit `name_space`, in which case they inherit the one of
//! the enclosing document.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dpo::{DpoError, Rule, Scope};
use crate::hier::{flatten_full, Flattened, GlobalPart, HierError, HierNet, Substitution};
use crate::matching::{isomorphic, NetMorphism};
use crate::net::{Decorations, Multiset, NetError, PTNet};
use crate::poset::{NameSpacePair, PosetError, PosetG, TOP};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error("cyclic layout reference through `{0}`")]
    CyclicLayout(String),
    #[error("cached flat net does not match the hierarchy")]
    StaleCache,
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Dpo(#[from] DpoError),
    #[error(transparent)]
    Hier(#[from] HierError),
}

fn top() -> String {
    TOP.to_string()
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDoc {
    pub elements: Vec<String>,
    #[serde(default)]
    pub relation: Vec<(String, String)>,
    #[serde(default = "top")]
    pub greatest: String,
}

impl PosetDoc {
    pub fn build(&self) -> Result<PosetG, PosetError> {
        PosetG::new(
            self.elements.iter().cloned(),
            self.relation.iter().cloned(),
            &self.greatest,
        )
    }

    pub fn of(p: &PosetG) -> Self {
        PosetDoc {
            elements: p.elements().map(str::to_string).collect(),
            relation: p
                .generators()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            greatest: p.greatest().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NameSpaceDoc {
    pub places: PosetDoc,
    pub transitions: PosetDoc,
}

impl NameSpaceDoc {
    pub fn build(&self) -> Result<Arc<NameSpacePair>, PosetError> {
        Ok(Arc::new(NameSpacePair::new(
            self.places.build()?,
            self.transitions.build()?,
        )))
    }

    pub fn of(ns: &NameSpacePair) -> Self {
        NameSpaceDoc {
            places: PosetDoc::of(&ns.places),
            transitions: PosetDoc::of(&ns.transitions),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub id: String,
    #[serde(default = "top")]
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Place to transition: part of the pre-domain.
    In,
    /// Transition to place: part of the post-domain.
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub transition: String,
    pub place: String,
    #[serde(default = "one")]
    pub weight: u64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name_space: Option<NameSpaceDoc>,
    #[serde(default)]
    pub places: Vec<ElementDoc>,
    #[serde(default)]
    pub transitions: Vec<ElementDoc>,
    #[serde(default)]
    pub arcs: Vec<ArcDoc>,
    #[serde(default)]
    pub marking: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decorations: Option<Decorations>,
}

impl NetDoc {
    /// Builds the net over its own name space, or `inherited` when absent.
    pub fn build(&self, inherited: Option<&Arc<NameSpacePair>>) -> Result<PTNet, FormatError> {
        let ns = match (&self.name_space, inherited) {
            (Some(doc), _) => doc.build()?,
            (None, Some(ns)) => ns.clone(),
            (None, None) => return Err(FormatError::Invalid("net without a name_space".into())),
        };
        let mut net = PTNet::new(ns);
        for p in &self.places {
            net.add_place(&p.id, &p.label)?;
        }
        let mut pre: BTreeMap<&str, Multiset> = BTreeMap::new();
        let mut post: BTreeMap<&str, Multiset> = BTreeMap::new();
        for a in &self.arcs {
            if !self.transitions.iter().any(|t| t.id == a.transition) {
                return Err(NetError::UnknownTransition(a.transition.clone()).into());
            }
            let side = match a.direction {
                Direction::In => &mut pre,
                Direction::Out => &mut post,
            };
            let m = side.entry(&a.transition).or_default();
            let w = m.get(&a.place) + a.weight;
            m.set(&a.place, w);
        }
        for t in &self.transitions {
            net.add_transition(
                &t.id,
                &t.label,
                pre.remove(t.id.as_str()).unwrap_or_default(),
                post.remove(t.id.as_str()).unwrap_or_default(),
            )?;
        }
        net.set_marking(Multiset::from_pairs(self.marking.iter().map(|(p, &k)| (p.as_str(), k))))?;
        net.set_decorations(self.decorations.clone())?;
        Ok(net)
    }

    /// The document of `net`; the name space is written only if asked for.
    pub fn of(net: &PTNet, with_name_space: bool) -> Self {
        let mut arcs = Vec::new();
        for (t, tr) in net.transitions() {
            for (dir, m) in [(Direction::In, &tr.pre), (Direction::Out, &tr.post)] {
                for (p, w) in m.iter() {
                    arcs.push(ArcDoc {
                        transition: t.clone(),
                        place: p.to_string(),
                        weight: w,
                        direction: dir,
                    });
                }
            }
        }
        NetDoc {
            name_space: with_name_space.then(|| NameSpaceDoc::of(net.name_space())),
            places: net
                .places()
                .iter()
                .map(|(id, p)| ElementDoc { id: id.clone(), label: p.label.clone() })
                .collect(),
            transitions: net
                .transitions()
                .iter()
                .map(|(id, t)| ElementDoc { id: id.clone(), label: t.label.clone() })
                .collect(),
            arcs,
            marking: net.marking().iter().map(|(p, k)| (p.to_string(), k)).collect(),
            decorations: net.decorations().cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub name: String,
    /// `global`, `local`, or `local:<instance>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name_space: Option<NameSpaceDoc>,
    #[serde(rename = "L")]
    pub lhs: NetDoc,
    #[serde(rename = "K")]
    pub interface: NetDoc,
    #[serde(rename = "R")]
    pub rhs: NetDoc,
    /// `K -> L`; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<NetMorphism>,
    /// `K -> R`; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<NetMorphism>,
}

pub fn parse_scope(s: &str, default_local: &str) -> Result<Scope, FormatError> {
    match s {
        "global" => Ok(Scope::Global),
        "local" => Ok(Scope::Local(default_local.to_string())),
        _ => s
            .strip_prefix("local:")
            .map(|i| Scope::Local(i.to_string()))
            .ok_or_else(|| FormatError::Invalid(format!("unknown scope `{s}`"))),
    }
}

impl RuleDoc {
    pub fn build(&self, inherited: Option<&Arc<NameSpacePair>>, default_scope: Scope) -> Result<Rule, FormatError> {
        let own = self.name_space.as_ref().map(NameSpaceDoc::build).transpose()?;
        let ns = own.as_ref().or(inherited);
        let interface = self.interface.build(ns)?;
        let id = NetMorphism::identity(&interface);
        let scope = match (&self.scope, &default_scope) {
            (None, _) => default_scope,
            (Some(s), Scope::Local(i)) => parse_scope(s, i)?,
            (Some(s), Scope::Global) => parse_scope(s, "root")?,
        };
        Ok(Rule::new(
            &self.name,
            scope,
            self.lhs.build(ns)?,
            interface,
            self.rhs.build(ns)?,
            self.l.clone().unwrap_or_else(|| id.clone()),
            self.r.clone().unwrap_or(id),
        )?)
    }

    pub fn of(rule: &Rule, with_name_space: bool) -> Self {
        let id = NetMorphism::identity(rule.interface());
        let non_identity = |f: &NetMorphism| (f != &id).then(|| f.clone());
        RuleDoc {
            name: rule.name().to_string(),
            scope: Some(rule.scope().to_string()),
            name_space: with_name_space.then(|| NameSpaceDoc::of(rule.lhs().name_space())),
            lhs: NetDoc::of(rule.lhs(), false),
            interface: NetDoc::of(rule.interface(), false),
            rhs: NetDoc::of(rule.rhs(), false),
            l: non_identity(rule.left()),
            r: non_identity(rule.right()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subnet: Option<Box<HierDoc>>,
    /// Name of an entry in the root's `layouts`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<String>,
    pub interface: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// The level's alphabet; subnets inherit their host's when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name_space: Option<NameSpaceDoc>,
    pub net: NetDoc,
    #[serde(default)]
    pub subst_alphabet: BTreeSet<String>,
    #[serde(default)]
    pub connecting_alphabet: BTreeSet<String>,
    /// Must list exactly the keys of `subst` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subst_transitions: Option<Vec<String>>,
    #[serde(default)]
    pub subst: BTreeMap<String, SubstDoc>,
    #[serde(default)]
    pub local_rules: Vec<RuleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_name_space: Option<NameSpaceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub global_rules: Vec<RuleDoc>,
    /// Reusable subnet layouts, root only.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub layouts: BTreeMap<String, HierDoc>,
    /// Cached result of flattening.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat: Option<FlatDoc>,
}

impl HierDoc {
    pub fn build(&self) -> Result<HierNet, FormatError> {
        let mut hn = self.build_level(None, &self.layouts, &mut Vec::new())?;
        if self.global_name_space.is_some() || !self.global_rules.is_empty() {
            let ns = match &self.global_name_space {
                Some(doc) => doc.build()?,
                None => hn.net.name_space().clone(),
            };
            let rules = self
                .global_rules
                .iter()
                .map(|r| r.build(Some(&ns), Scope::Global))
                .collect::<Result<_, _>>()?;
            hn.global = Some(GlobalPart { name_space: ns, rules });
        }
        Ok(hn)
    }

    fn build_level(
        &self,
        inherited: Option<&Arc<NameSpacePair>>,
        layouts: &BTreeMap<String, HierDoc>,
        stack: &mut Vec<String>,
    ) -> Result<HierNet, FormatError> {
        let own = self.name_space.as_ref().map(NameSpaceDoc::build).transpose()?;
        let ns = own.as_ref().or(inherited);
        let net = self.net.build(ns)?;
        let ns = net.name_space().clone();
        let name = self.name.clone().unwrap_or_else(|| "root".into());
        if let Some(listed) = &self.subst_transitions {
            let listed: BTreeSet<&String> = listed.iter().collect();
            if listed != self.subst.keys().collect() {
                return Err(FormatError::Invalid(format!(
                    "`{name}`: subst_transitions does not match the keys of subst"
                )));
            }
        }
        let mut substitutions = BTreeMap::new();
        for (t, s) in &self.subst {
            let subnet = match (&s.subnet, &s.layout) {
                (Some(doc), None) => doc.build_level(Some(&ns), layouts, stack)?,
                (None, Some(layout)) => {
                    if stack.contains(layout) {
                        return Err(FormatError::CyclicLayout(layout.clone()));
                    }
                    let doc = layouts
                        .get(layout)
                        .ok_or_else(|| FormatError::Invalid(format!("unknown layout `{layout}`")))?;
                    stack.push(layout.clone());
                    let built = doc.build_level(Some(&ns), layouts, stack);
                    stack.pop();
                    built?
                }
                _ => {
                    return Err(FormatError::Invalid(format!(
                        "substitution `{t}` needs exactly one of subnet and layout"
                    )))
                }
            };
            substitutions.insert(
                t.clone(),
                Substitution {
                    subnet,
                    interface: s.interface.clone(),
                },
            );
        }
        let local_rules = self
            .local_rules
            .iter()
            .map(|r| r.build(Some(&ns), Scope::Local(name.clone())))
            .collect::<Result<_, _>>()?;
        Ok(HierNet {
            name,
            net,
            subst_alphabet: self.subst_alphabet.clone(),
            connecting_alphabet: self.connecting_alphabet.clone(),
            substitutions,
            local_rules,
            global: None,
        })
    }

    /// The document of `hn` with every subnet written inline.
    pub fn of(hn: &HierNet) -> Self {
        let mut doc = HierDoc::level(hn, true);
        if let Some(g) = &hn.global {
            doc.global_name_space = Some(NameSpaceDoc::of(&g.name_space));
            doc.global_rules = g.rules.iter().map(|r| RuleDoc::of(r, false)).collect();
        }
        doc
    }

    fn level(hn: &HierNet, root: bool) -> Self {
        HierDoc {
            name: (!root || hn.name != "root").then(|| hn.name.clone()),
            name_space: Some(NameSpaceDoc::of(hn.net.name_space())),
            net: NetDoc::of(&hn.net, false),
            subst_alphabet: hn.subst_alphabet.clone(),
            connecting_alphabet: hn.connecting_alphabet.clone(),
            subst_transitions: None,
            subst: hn
                .substitutions
                .iter()
                .map(|(t, s)| {
                    let sub = SubstDoc {
                        subnet: Some(Box::new(HierDoc::level(&s.subnet, false))),
                        layout: None,
                        interface: s.interface.clone(),
                    };
                    (t.clone(), sub)
                })
                .collect(),
            local_rules: hn.local_rules.iter().map(|r| RuleDoc::of(r, false)).collect(),
            global_name_space: None,
            global_rules: Vec::new(),
            layouts: BTreeMap::new(),
            flat: None,
        }
    }
}

/// A flat net with its rules, sharing one name space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatDoc {
    pub name_space: NameSpaceDoc,
    pub net: NetDoc,
    #[serde(default)]
    pub rules: Vec<RuleDoc>,
}

/// A runnable model: a flat net and the rules that may rewrite it.
#[derive(Debug, Clone)]
pub struct Model {
    pub net: PTNet,
    pub rules: Vec<Rule>,
}

impl FlatDoc {
    pub fn build(&self) -> Result<Model, FormatError> {
        let ns = self.name_space.build()?;
        Ok(Model {
            net: self.net.build(Some(&ns))?,
            rules: self
                .rules
                .iter()
                .map(|r| r.build(Some(&ns), Scope::Global))
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn of(net: &PTNet, rules: &[Rule]) -> Self {
        FlatDoc {
            name_space: NameSpaceDoc::of(net.name_space()),
            net: NetDoc::of(net, false),
            rules: rules.iter().map(|r| RuleDoc::of(r, false)).collect(),
        }
    }

    pub fn of_flattened(flat: &Flattened) -> Self {
        FlatDoc::of(&flat.net, &flat.rules)
    }
}

/// Any input document.
#[derive(Debug, Clone)]
pub enum Document {
    /// A plain net with its own name space.
    Net(NetDoc),
    Flat(FlatDoc),
    Hier(Box<HierDoc>),
}

impl Document {
    pub fn parse(text: &str) -> Result<Document, FormatError> {
        let value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| FormatError::Invalid("top level must be an object".into()))?;
        let doc = if obj.contains_key("rules") {
            Document::Flat(serde_json::from_value(value)?)
        } else if obj.contains_key("net") {
            Document::Hier(Box::new(serde_json::from_value(value)?))
        } else {
            Document::Net(serde_json::from_value(value)?)
        };
        Ok(doc)
    }

    /// Flattens when needed. A cached flat component of a hierarchy is used
    /// as is, unless `verify_cache` asks to recompute and compare it.
    pub fn model(&self, verify_cache: bool) -> Result<Model, FormatError> {
        match self {
            Document::Net(n) => Ok(Model {
                net: n.build(None)?,
                rules: Vec::new(),
            }),
            Document::Flat(f) => f.build(),
            Document::Hier(h) => {
                if let Some(cached) = &h.flat {
                    let model = cached.build()?;
                    if verify_cache {
                        let fresh = flatten_full(&h.build()?)?;
                        let same_rules = fresh.rules.len() == model.rules.len()
                            && fresh
                                .rules
                                .iter()
                                .zip(&model.rules)
                                .all(|(a, b)| a.name() == b.name());
                        if !same_rules || isomorphic(&fresh.net, &model.net).is_none() {
                            return Err(FormatError::StaleCache);
                        }
                    }
                    return Ok(model);
                }
                let flat = flatten_full(&h.build()?)?;
                Ok(Model {
                    net: flat.net,
                    rules: flat.rules,
                })
            }
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize") + "\n"
}
