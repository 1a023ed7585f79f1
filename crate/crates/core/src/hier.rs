//! Hierarchical nets: substitution transitions, their subnets, and flattening.
//!
//! A substitution transition `t` stands for a subnet. Its pre- and
//! post-places are connecting places, shared by id with the subnet. Flattening
//! applies the rule `Net(t) <- CP(t) -> subnet` at every substitution
//! transition.
//!
//! Subnet elements are instantiated with the prefix `t/` (composing to
//! `t/u/x` along nested paths); connecting places keep the host id. Labels are
//! prefixed the same way, except those in the host's connecting alphabet.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dpo::{parallel_independent, transform_with, DpoError, FreshNames, Rule, Scope};
use crate::matching::{find_occurrences, Occurrence};
use crate::net::{NetError, PTNet};
use crate::poset::{name_space, part_name, LocalAlphabet, NameSpacePair, PosetError, PosetG, TOP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierError {
    #[error("`{0}` is not a substitution transition")]
    NotSubstitution(String),
    #[error("Net({0}) has more than one occurrence anchored at `{0}`")]
    AmbiguousOccurrence(String),
    #[error("Net({0}) has no occurrence anchored at `{0}`")]
    MissingOccurrence(String),
    #[error("substitutions at `{0}` and `{1}` are not parallel independent")]
    NotIndependent(String, String),
    #[error("cyclic hierarchy through `{0}`")]
    CyclicHierarchy(String),
    #[error("name collision: {0}")]
    NameCollision(String),
    #[error("subnet of `{transition}` does not fit: {reason}")]
    Interface { transition: String, reason: String },
    #[error("hierarchy is not well defined: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Diagnostic>),
    #[error(transparent)]
    Dpo(#[from] DpoError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// One problem found by [`diagnostics`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    /// Instance path, `root` for the top level.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// The subnet behind a substitution transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub subnet: HierNet,
    /// Connecting places, by id in both host and subnet.
    pub interface: Vec<String>,
}

/// Global alphabet and rules; present at the root only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalPart {
    pub name_space: Arc<NameSpacePair>,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierNet {
    pub name: String,
    pub net: PTNet,
    /// `A_sT`: labels reserved for substitution transitions.
    pub subst_alphabet: BTreeSet<String>,
    /// `A_cP`: labels of connecting places.
    pub connecting_alphabet: BTreeSet<String>,
    pub substitutions: BTreeMap<String, Substitution>,
    pub local_rules: Vec<Rule>,
    pub global: Option<GlobalPart>,
}

impl HierNet {
    /// A hierarchy of one level with no substitution transitions.
    pub fn new(net: PTNet) -> Self {
        HierNet {
            name: "root".into(),
            net,
            subst_alphabet: BTreeSet::new(),
            connecting_alphabet: BTreeSet::new(),
            substitutions: BTreeMap::new(),
            local_rules: Vec::new(),
            global: None,
        }
    }

    pub fn substitution_transitions(&self) -> BTreeSet<&str> {
        self.substitutions.keys().map(String::as_str).collect()
    }

    /// `cP`: the neighbourhood of all substitution transitions.
    pub fn connecting_places(&self) -> BTreeSet<String> {
        self.substitutions
            .keys()
            .filter_map(|t| self.net.neighbourhood(t).ok())
            .flatten()
            .collect()
    }

    /// Substitution transitions at every level.
    pub fn total_substitutions(&self) -> usize {
        self.substitutions
            .values()
            .map(|s| 1 + s.subnet.total_substitutions())
            .sum()
    }

    /// `CP(t)`: the pre- and post-places of `t`, without transitions.
    pub fn connecting_interface(&self, t: &str) -> Result<PTNet, HierError> {
        if !self.substitutions.contains_key(t) {
            return Err(HierError::NotSubstitution(t.to_string()));
        }
        Ok(connecting_interface(&self.net, t)?)
    }
}

/// `CP(t)` of any transition.
pub fn connecting_interface(net: &PTNet, t: &str) -> Result<PTNet, NetError> {
    net.restrict(&net.neighbourhood(t)?, &BTreeSet::new())
}

/// Where a label of the accumulated alphabet comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Origin {
    /// Owned by one instance; becomes that instance's copy in the name space.
    Owned { copy: String, base: String },
    /// A connecting label shared across a hierarchy border; stays global.
    Shared { base: String },
}

#[derive(Debug)]
struct Instance<'a> {
    hn: &'a HierNet,
    /// Id prefix; empty at the root.
    path: String,
    /// Part name in the combined name space.
    copy: String,
    places: BTreeMap<String, String>,
    transitions: BTreeMap<String, String>,
    place_labels: BTreeMap<String, String>,
    transition_labels: BTreeMap<String, String>,
    /// Local substitution transition id to child instance.
    children: BTreeMap<String, usize>,
}

impl Instance<'_> {
    fn rule_name(&self, name: &str) -> String {
        if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}/{name}", self.path)
        }
    }
}

/// Every instance of a hierarchy with its names in the accumulated alphabet.
#[derive(Debug)]
struct Expansion<'a> {
    instances: Vec<Instance<'a>>,
    name_space: Arc<NameSpacePair>,
    place_origin: BTreeMap<String, Origin>,
    transition_origin: BTreeMap<String, Origin>,
}

fn lookup(map: &BTreeMap<String, String>, x: &str) -> String {
    map.get(x).cloned().unwrap_or_else(|| x.to_string())
}

impl<'a> Expansion<'a> {
    fn new(root: &'a HierNet) -> Result<Self, HierError> {
        let mut ex = Expansion {
            instances: Vec::new(),
            name_space: Arc::new(NameSpacePair::trivial()),
            place_origin: BTreeMap::new(),
            transition_origin: BTreeMap::new(),
        };
        ex.visit(root, None)?;
        let mut acc = NameSpacePair::trivial();
        for inst in &ex.instances {
            let ns = inst.hn.net.name_space();
            let moved = NameSpacePair::new(
                ns.places.rename(|l| lookup(&inst.place_labels, l))?,
                ns.transitions.rename(|l| lookup(&inst.transition_labels, l))?,
            );
            acc = acc.union(&moved)?;
        }
        ex.name_space = Arc::new(acc);
        Ok(ex)
    }

    fn visit(&mut self, hn: &'a HierNet, parent: Option<(usize, &str)>) -> Result<usize, HierError> {
        let ns = hn.net.name_space();
        let mut inst = Instance {
            hn,
            path: String::new(),
            copy: hn.name.clone(),
            places: BTreeMap::new(),
            transitions: BTreeMap::new(),
            place_labels: BTreeMap::new(),
            transition_labels: BTreeMap::new(),
            children: BTreeMap::new(),
        };
        match parent {
            None => {
                inst.places = hn.net.places().keys().map(|p| (p.clone(), p.clone())).collect();
                inst.transitions = hn
                    .net
                    .transitions()
                    .keys()
                    .map(|t| (t.clone(), t.clone()))
                    .collect();
                inst.place_labels = ns.places.elements().map(|l| (l.into(), l.into())).collect();
                inst.transition_labels = ns
                    .transitions
                    .elements()
                    .map(|l| (l.into(), l.into()))
                    .collect();
                for l in ns.places.elements().filter(|l| *l != TOP) {
                    let origin = if hn.connecting_alphabet.contains(l) {
                        Origin::Shared { base: l.into() }
                    } else {
                        Origin::Owned { copy: inst.copy.clone(), base: l.into() }
                    };
                    self.place_origin.insert(l.into(), origin);
                }
                for l in ns.transitions.elements().filter(|l| *l != TOP) {
                    self.transition_origin
                        .insert(l.into(), Origin::Owned { copy: inst.copy.clone(), base: l.into() });
                }
            }
            Some((pi, t)) => {
                let host = &self.instances[pi];
                let sub = &host.hn.substitutions[t];
                let path = host.transitions[t].clone();
                let interface: BTreeSet<&str> = sub.interface.iter().map(String::as_str).collect();
                for p in hn.net.places().keys() {
                    let id = if interface.contains(p.as_str()) {
                        host.places.get(p).cloned().ok_or_else(|| HierError::Interface {
                            transition: t.to_string(),
                            reason: format!("interface place `{p}` is not in the host"),
                        })?
                    } else {
                        format!("{path}/{p}")
                    };
                    inst.places.insert(p.clone(), id);
                }
                for u in hn.net.transitions().keys() {
                    inst.transitions.insert(u.clone(), format!("{path}/{u}"));
                }
                for l in ns.places.elements() {
                    let moved = if l == TOP {
                        TOP.to_string()
                    } else if host.hn.connecting_alphabet.contains(l) {
                        lookup(&host.place_labels, l)
                    } else {
                        let moved = format!("{path}/{l}");
                        let origin = if hn.connecting_alphabet.contains(l) {
                            Origin::Shared { base: l.into() }
                        } else {
                            Origin::Owned { copy: path.clone(), base: l.into() }
                        };
                        self.place_origin.insert(moved.clone(), origin);
                        moved
                    };
                    inst.place_labels.insert(l.into(), moved);
                }
                for l in ns.transitions.elements() {
                    let moved = if l == TOP {
                        TOP.to_string()
                    } else {
                        let moved = format!("{path}/{l}");
                        self.transition_origin
                            .insert(moved.clone(), Origin::Owned { copy: path.clone(), base: l.into() });
                        moved
                    };
                    inst.transition_labels.insert(l.into(), moved);
                }
                inst.copy = path.clone();
                inst.path = path;
            }
        }
        let idx = self.instances.len();
        self.instances.push(inst);
        for (t, sub) in &hn.substitutions {
            if !hn.net.transitions().contains_key(t) {
                return Err(HierError::NotSubstitution(t.clone()));
            }
            let child = self.visit(&sub.subnet, Some((idx, t)))?;
            self.instances[idx].children.insert(t.clone(), child);
        }
        Ok(idx)
    }

    /// The instance's own net, renamed and relabelled into the accumulated
    /// alphabet.
    fn instantiate(&self, idx: usize) -> Result<PTNet, HierError> {
        let inst = &self.instances[idx];
        let renamed = inst
            .hn
            .net
            .rename(|p| inst.places[p].clone(), |t| inst.transitions[t].clone())?;
        Ok(renamed.relabel(
            self.name_space.clone(),
            |l| lookup(&inst.place_labels, l),
            |l| lookup(&inst.transition_labels, l),
        )?)
    }

    /// The substitution rule at local transition `t` of instance `idx`, with
    /// its anchored occurrence in `host`.
    fn substitution(
        &self,
        idx: usize,
        t: &str,
        host: &PTNet,
        subnet: PTNet,
    ) -> Result<(Rule, Occurrence), HierError> {
        let inst = &self.instances[idx];
        let anchor = &inst.transitions[t];
        let lhs = host.net_of_transition(anchor)?;
        let interface = connecting_interface(host, anchor)?;
        let declared: BTreeSet<&String> = inst.hn.substitutions[t]
            .interface
            .iter()
            .map(|p| &inst.places[p])
            .collect();
        let actual: BTreeSet<&String> = interface.places().keys().collect();
        if declared != actual {
            return Err(HierError::Interface {
                transition: anchor.clone(),
                reason: format!("declared interface {declared:?} differs from the neighbourhood {actual:?}"),
            });
        }
        let rule = Rule::with_identity_span(
            format!("subst:{anchor}"),
            Scope::Local(inst.copy.clone()),
            lhs,
            interface,
            subnet,
        )
        .map_err(|e| HierError::Interface {
            transition: anchor.clone(),
            reason: e.to_string(),
        })?;
        let occurrence = anchored_occurrence(&rule, host, anchor)?;
        Ok((rule, occurrence))
    }

    /// The instance's net with every substitution transition replaced by its
    /// flattened subnet. `order` may permute the substitution transitions of
    /// each instance, identified by its path.
    fn flatten(&self, idx: usize, order: &dyn Fn(&str, &mut Vec<String>)) -> Result<PTNet, HierError> {
        let inst = &self.instances[idx];
        let mut net = self.instantiate(idx)?;
        let mut ts: Vec<String> = inst.children.keys().cloned().collect();
        order(&inst.path, &mut ts);
        for t in ts {
            let child = self.flatten(inst.children[&t], order)?;
            let (rule, o) = self.substitution(idx, &t, &net, child)?;
            net = transform_with(&net, &rule, &o, FreshNames::Keep)?.result;
        }
        Ok(net)
    }

    fn local_rules(&self) -> Result<Vec<Rule>, HierError> {
        let mut rules = Vec::new();
        for inst in &self.instances {
            for r in &inst.hn.local_rules {
                rules.push(r.relabel(
                    inst.rule_name(r.name()),
                    Scope::Local(inst.copy.clone()),
                    self.name_space.clone(),
                    |l| lookup(&inst.place_labels, l),
                    |l| lookup(&inst.transition_labels, l),
                )?);
            }
        }
        Ok(rules)
    }

    fn owners(&self) -> BTreeMap<String, Owned> {
        self.instances
            .iter()
            .map(|inst| {
                let owned = Owned {
                    places: inst.places.values().cloned().collect(),
                    transitions: inst
                        .transitions
                        .iter()
                        .filter(|(t, _)| !inst.children.contains_key(*t))
                        .map(|(_, id)| id.clone())
                        .collect(),
                };
                (inst.copy.clone(), owned)
            })
            .collect()
    }
}

fn anchored_occurrence(rule: &Rule, host: &PTNet, anchor: &str) -> Result<Occurrence, HierError> {
    let mut found: Vec<Occurrence> = find_occurrences(rule.lhs(), host)
        .into_iter()
        .filter(|o| o.transition(anchor) == anchor)
        .collect();
    match found.len() {
        0 => Err(HierError::MissingOccurrence(anchor.to_string())),
        1 => Ok(found.remove(0)),
        _ => Err(HierError::AmbiguousOccurrence(anchor.to_string())),
    }
}

/// Elements of the flat net that belong to one instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Owned {
    pub places: BTreeSet<String>,
    pub transitions: BTreeSet<String>,
}

/// A flat net with its rules and alphabet.
#[derive(Debug, Clone)]
pub struct Flattened {
    pub net: PTNet,
    pub rules: Vec<Rule>,
    pub name_space: Arc<NameSpacePair>,
    /// Instance part name to the flat elements it contributed.
    pub owners: BTreeMap<String, Owned>,
}

impl Flattened {
    /// Occurrences of local rules that reach outside their own instance.
    pub fn scope_violations(&self) -> Vec<(String, Occurrence)> {
        let mut out = Vec::new();
        for rule in &self.rules {
            let Scope::Local(copy) = rule.scope() else { continue };
            let Some(owned) = self.owners.get(copy) else { continue };
            for o in find_occurrences(rule.lhs(), &self.net) {
                let inside = o.places.values().all(|p| owned.places.contains(p))
                    && o.transitions.values().all(|t| owned.transitions.contains(t));
                if !inside {
                    out.push((rule.name().to_string(), o));
                }
            }
        }
        out
    }
}

/// The substitution rules of the top level with their occurrences.
#[derive(Debug, Clone)]
pub struct SubstitutionSet {
    /// The top-level net over the accumulated alphabet.
    pub host: PTNet,
    /// One entry per substitution transition, sorted by its id.
    pub items: Vec<(Rule, Occurrence)>,
}

impl SubstitutionSet {
    /// Applies the substitutions in the given order of indices.
    pub fn apply(&self, order: &[usize]) -> Result<PTNet, HierError> {
        let mut net = self.host.clone();
        for &i in order {
            let (rule, o) = &self.items[i];
            net = transform_with(&net, rule, o, FreshNames::Keep)?.result;
        }
        Ok(net)
    }
}

/// `S^N`: every top-level substitution with its unique anchored occurrence.
/// Subnets are inserted unflattened. Fails unless all pairs are parallel
/// independent.
pub fn substitutions(hn: &HierNet) -> Result<SubstitutionSet, HierError> {
    let ex = Expansion::new(hn)?;
    let host = ex.instantiate(0)?;
    let mut items = Vec::new();
    for (t, &child) in &ex.instances[0].children {
        items.push(ex.substitution(0, t, &host, ex.instantiate(child)?)?);
    }
    for (i, (r1, o1)) in items.iter().enumerate() {
        for (r2, o2) in &items[i + 1..] {
            if !parallel_independent(r1, o1, r2, o2) {
                return Err(HierError::NotIndependent(r1.name().into(), r2.name().into()));
            }
        }
    }
    Ok(SubstitutionSet { host, items })
}

/// Replaces each top-level substitution transition by its subnet's own net.
pub fn flatten_once(hn: &HierNet) -> Result<PTNet, HierError> {
    let set = substitutions(hn)?;
    set.apply(&(0..set.items.len()).collect::<Vec<_>>())
}

/// Flattens bottom-up over the accumulated alphabet. Local rules of every
/// instance are carried along, relabelled the same way as the elements.
pub fn flatten_recursive(hn: &HierNet) -> Result<Flattened, HierError> {
    flatten_recursive_ordered(hn, &|_, _| {})
}

/// As [`flatten_recursive`], with `order(path, ts)` free to permute the
/// substitution transitions `ts` of the instance at `path` (empty at the root).
pub fn flatten_recursive_ordered(
    hn: &HierNet,
    order: &dyn Fn(&str, &mut Vec<String>),
) -> Result<Flattened, HierError> {
    let ex = Expansion::new(hn)?;
    Ok(Flattened {
        net: ex.flatten(0, order)?,
        rules: ex.local_rules()?,
        name_space: ex.name_space.clone(),
        owners: ex.owners(),
    })
}

/// Flattens and moves everything into the combined name space, where each
/// global label lies above its per-instance copies. Global rules keep their
/// labels and so match inside any instance through subtyping.
pub fn flatten_full(hn: &HierNet) -> Result<Flattened, HierError> {
    let ex = Expansion::new(hn)?;
    let flat = Flattened {
        net: ex.flatten(0, &|_, _| {})?,
        rules: ex.local_rules()?,
        name_space: ex.name_space.clone(),
        owners: ex.owners(),
    };

    let global = match &hn.global {
        Some(g) => (*g.name_space).clone(),
        None => {
            let mut acc = NameSpacePair::trivial();
            for inst in &ex.instances {
                acc = acc.union(inst.hn.net.name_space())?;
            }
            acc
        }
    };
    let combined = |global: &PosetG, local: &dyn Fn(&NameSpacePair) -> &PosetG| -> Result<PosetG, PosetError> {
        let locals: Vec<LocalAlphabet<'_>> = ex
            .instances
            .iter()
            .map(|inst| LocalAlphabet::subset(&inst.copy, local(inst.hn.net.name_space()), global))
            .collect();
        Ok(name_space(global, &locals)?.poset)
    };
    let frak = Arc::new(NameSpacePair::new(
        combined(&global.places, &|ns| &ns.places)?,
        combined(&global.transitions, &|ns| &ns.transitions)?,
    ));
    let translate = |origins: &BTreeMap<String, Origin>, l: &str| match origins.get(l) {
        Some(Origin::Owned { copy, base }) => part_name(copy, base),
        Some(Origin::Shared { base }) => base.clone(),
        None => l.to_string(),
    };
    let pl = |l: &str| translate(&ex.place_origin, l);
    let tl = |l: &str| translate(&ex.transition_origin, l);

    let net = flat.net.relabel(frak.clone(), pl, tl)?;
    let mut rules = Vec::new();
    if let Some(g) = &hn.global {
        for r in &g.rules {
            rules.push(r.relabel(r.name(), Scope::Global, frak.clone(), str::to_string, str::to_string)?);
        }
    }
    for r in &flat.rules {
        rules.push(r.relabel(r.name(), r.scope().clone(), frak.clone(), pl, tl)?);
    }
    Ok(Flattened {
        net,
        rules,
        name_space: frak,
        owners: flat.owners,
    })
}

/// Result of [`apply_as_long_as_possible`].
#[derive(Debug, Clone)]
pub struct SubstitutionRun {
    pub net: PTNet,
    /// Substitution transitions in the order they were replaced.
    pub applied: Vec<String>,
}

/// Starting from the top-level net, repeatedly replaces a randomly chosen
/// substitution transition present in the net by its subnet's own net, until
/// none is left.
pub fn apply_as_long_as_possible(hn: &HierNet, seed: u64) -> Result<SubstitutionRun, HierError> {
    let ex = Expansion::new(hn)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = ex.instantiate(0)?;
    // Flat-id of each substitution transition -> (owning instance, local id).
    let mut pending: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, inst) in ex.instances.iter().enumerate() {
        for t in inst.children.keys() {
            pending.insert(inst.transitions[t].clone(), (idx, t.clone()));
        }
    }
    let mut applied = Vec::new();
    loop {
        let mut options = Vec::new();
        for (anchor, (idx, t)) in &pending {
            if net.transitions().contains_key(anchor) {
                let child = ex.instances[*idx].children[t];
                options.push(ex.substitution(*idx, t, &net, ex.instantiate(child)?)?);
            }
        }
        if options.is_empty() {
            break;
        }
        let (rule, o) = options.swap_remove(rng.gen_range(0..options.len()));
        let anchor = rule.name().trim_start_matches("subst:").to_string();
        net = transform_with(&net, &rule, &o, FreshNames::Keep)?.result;
        pending.remove(&anchor);
        applied.push(anchor);
    }
    if let Some(anchor) = pending.keys().next() {
        return Err(HierError::MissingOccurrence(anchor.clone()));
    }
    Ok(SubstitutionRun { net, applied })
}

fn check_level(hn: &HierNet, location: &str, parent_cp: &BTreeSet<String>, out: &mut Vec<Diagnostic>) {
    let mut report = |message: String| {
        out.push(Diagnostic {
            location: location.to_string(),
            message,
        })
    };
    let ns = hn.net.name_space();
    if let Err(e) = hn.net.validate() {
        report(format!("invalid net: {e}"));
    }
    for l in &hn.subst_alphabet {
        if !ns.transitions.contains(l) {
            report(format!("substitution label `{l}` is not a transition label"));
        }
    }
    for l in &hn.connecting_alphabet {
        if !ns.places.contains(l) {
            report(format!("connecting label `{l}` is not a place label"));
        }
    }
    let mut seen = BTreeMap::new();
    for (t, tr) in hn.net.transitions() {
        let is_subst = hn.substitutions.contains_key(t);
        let in_alphabet = hn.subst_alphabet.contains(&tr.label);
        if is_subst && !in_alphabet {
            report(format!("substitution transition `{t}` has label `{}` outside A_sT", tr.label));
        }
        if !is_subst && in_alphabet {
            report(format!("transition `{t}` uses the substitution label `{}`", tr.label));
        }
        if is_subst {
            if let Some(other) = seen.insert(tr.label.clone(), t.clone()) {
                report(format!("substitution transitions `{other}` and `{t}` share label `{}`", tr.label));
            }
        }
    }
    for p in hn.connecting_places() {
        let label = hn.net.place_label(&p).unwrap_or_default();
        if !hn.connecting_alphabet.contains(label) {
            report(format!("connecting place `{p}` has label `{label}` outside A_cP"));
        }
    }
    for (t, sub) in &hn.substitutions {
        let Ok(neighbours) = hn.net.neighbourhood(t) else {
            report(format!("substitution transition `{t}` is not in the net"));
            continue;
        };
        let declared: BTreeSet<String> = sub.interface.iter().cloned().collect();
        if declared != neighbours {
            report(format!("interface of `{t}` is {declared:?}, expected {neighbours:?}"));
        }
        for p in &neighbours {
            match sub.subnet.net.place_label(p) {
                None => report(format!("subnet of `{t}` lacks connecting place `{p}`")),
                Some(l) if Some(l) != hn.net.place_label(p) => {
                    report(format!("connecting place `{p}` is labelled `{l}` in the subnet of `{t}`"))
                }
                Some(_) => {
                    if sub.subnet.net.marking().get(p) != hn.net.marking().get(p) {
                        report(format!("connecting place `{p}` has a different marking in the subnet of `{t}`"));
                    }
                }
            }
        }
        if let Ok(lhs) = hn.net.net_of_transition(t) {
            let anchored = find_occurrences(&lhs, &hn.net)
                .into_iter()
                .filter(|o| o.transition(t) == t)
                .count();
            if anchored > 1 {
                report(format!("Net({t}) has {anchored} occurrences anchored at `{t}`"));
            }
        }
    }
    let cp: BTreeSet<String> = hn.connecting_alphabet.union(parent_cp).cloned().collect();
    for rule in &hn.local_rules {
        for (side, n) in [("L", rule.lhs()), ("K", rule.interface()), ("R", rule.rhs())] {
            for (t, tr) in n.transitions() {
                if hn.subst_alphabet.contains(&tr.label) {
                    report(format!(
                        "rule `{}` contains substitution transition `{t}` in {side}",
                        rule.name()
                    ));
                }
                if !ns.transitions.contains(&tr.label) {
                    report(format!("rule `{}` uses unknown label `{}`", rule.name(), tr.label));
                }
            }
            for (p, pl) in n.places() {
                if !ns.places.contains(&pl.label) {
                    report(format!("rule `{}` uses unknown label `{}` at `{p}`", rule.name(), pl.label));
                }
            }
        }
        let (dp, _) = rule.deleted();
        let (cp_new, _) = rule.created();
        for (what, set, n) in [("deletes", dp, rule.lhs()), ("adds", cp_new, rule.rhs())] {
            for p in set {
                let label = n.place_label(p).unwrap_or_default();
                if cp.contains(label) {
                    report(format!("rule `{}` {what} connecting place `{p}`", rule.name()));
                }
            }
        }
    }
    for (t, sub) in &hn.substitutions {
        let loc = if location == "root" { t.clone() } else { format!("{location}/{t}") };
        check_level(&sub.subnet, &loc, &hn.connecting_alphabet, out);
    }
}

/// Every violation of the structural conditions, followed by any failure of
/// the full flattening. Empty exactly when the hierarchy is well defined.
pub fn diagnostics(hn: &HierNet) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_level(hn, "root", &BTreeSet::new(), &mut out);
    if out.is_empty() {
        if let Err(e) = flatten_full(hn) {
            out.push(Diagnostic {
                location: "root".into(),
                message: format!("flattening fails: {e}"),
            });
        }
    }
    out
}

pub fn is_well_defined(hn: &HierNet) -> bool {
    diagnostics(hn).is_empty()
}
