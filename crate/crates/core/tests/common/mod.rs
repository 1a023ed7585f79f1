//! Fixture loading, random generators and brute-force oracles shared by the
//! integration tests. The oracles enumerate maps exhaustively and use none of
//! the library's search code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;
use std::sync::Arc;

use hrpn::format::{Document, HierDoc, Model, PosetDoc};
use hrpn::hier::HierNet;
use hrpn::lset::{check_morphism, LSetMorphism, LabelledSet, Square};
use hrpn::matching::NetMorphism;
use hrpn::net::{Multiset, PTNet};
use hrpn::poset::{NameSpacePair, PosetG, TOP};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

pub type Map = BTreeMap<String, String>;

/// Hierarchical fixtures, each with at most three substitution transitions
/// per level.
pub const HIER_FIXTURES: [&str; 5] = [
    "fig_flatten.json",
    "shared_place.json",
    "three_subst.json",
    "nested.json",
    "intro_example.json",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn document(name: &str) -> Document {
    Document::parse(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn hier_doc(name: &str) -> HierDoc {
    match document(name) {
        Document::Hier(h) => *h,
        _ => panic!("{name} is not hierarchical"),
    }
}

pub fn hier(name: &str) -> HierNet {
    hier_doc(name).build().unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn model(name: &str) -> Model {
    document(name).model(false).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[derive(Deserialize)]
pub struct NameSpaceFixture {
    pub global: PosetDoc,
    pub locals: BTreeMap<String, PosetDoc>,
}

pub fn name_space_fixture() -> (PosetG, Vec<(String, PosetG)>) {
    let f: NameSpaceFixture = serde_json::from_str(&fixture_text("name_space.json")).unwrap();
    let locals = f.locals.iter().map(|(id, p)| (id.clone(), p.build().unwrap())).collect();
    (f.global.build().unwrap(), locals)
}

// ---------------------------------------------------------------- posets

/// A random tree-shaped poset below `⊤`, so that any two elements have a join.
pub fn tree_poset(rng: &mut ChaCha8Rng, size: usize, prefix: &str) -> PosetG {
    let names: Vec<String> = (0..size.saturating_sub(1)).map(|i| format!("{prefix}{i}")).collect();
    let mut relation = Vec::new();
    for (i, n) in names.iter().enumerate() {
        let parent = rng.gen_range(0..=i);
        if parent < i {
            relation.push((n.clone(), names[parent].clone()));
        }
    }
    PosetG::new(names, relation, TOP).unwrap()
}

pub fn ancestors(p: &PosetG, x: &str) -> Vec<String> {
    p.elements()
        .filter(|u| p.leq_or_false(x, u))
        .map(str::to_string)
        .collect()
}

pub fn descendants(p: &PosetG, x: &str) -> Vec<String> {
    p.elements()
        .filter(|u| p.leq_or_false(u, x))
        .map(str::to_string)
        .collect()
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty choice")
}

// ---------------------------------------------------------------- lsets

pub fn random_lset(rng: &mut ChaCha8Rng, alphabet: &Arc<PosetG>, size: usize, prefix: &str) -> LabelledSet {
    let labels: Vec<String> = alphabet.elements().map(str::to_string).collect();
    LabelledSet::new(
        alphabet.clone(),
        (0..size)
            .map(|i| (format!("{prefix}{i}"), pick(rng, &labels).clone()))
            .collect(),
    )
    .unwrap()
}

fn lset(alphabet: &Arc<PosetG>, labels: Vec<(String, String)>) -> LabelledSet {
    LabelledSet::new(alphabet.clone(), labels.into_iter().collect()).unwrap()
}

/// A span `S1 <-f- S0 -g-> S2` with `f` in M and all carriers of at most five
/// elements.
pub fn random_m_span(rng: &mut ChaCha8Rng) -> (LSetMorphism, LSetMorphism) {
    let size = rng.gen_range(1..=6);
    let alphabet = Arc::new(tree_poset(rng, size, "l"));
    let n2 = rng.gen_range(1..=5);
    let s2 = random_lset(rng, &alphabet, n2, "b");
    let s2_ids: Vec<String> = s2.carrier().map(str::to_string).collect();
    let n0 = rng.gen_range(0..=3);
    let mut l0 = Vec::new();
    let mut g = Map::new();
    for i in 0..n0 {
        let target = pick(rng, &s2_ids).clone();
        let label = pick(rng, &ancestors(&alphabet, s2.label(&target).unwrap())).clone();
        l0.push((format!("s{i}"), label));
        g.insert(format!("s{i}"), target);
    }
    let s0 = lset(&alphabet, l0.clone());
    let extra = rng.gen_range(0..=(5 - n0).min(3));
    let mut l1: Vec<(String, String)> = l0.iter().map(|(s, l)| (format!("a{s}"), l.clone())).collect();
    let labels: Vec<String> = alphabet.elements().map(str::to_string).collect();
    for i in 0..extra {
        l1.push((format!("x{i}"), pick(rng, &labels).clone()));
    }
    l1.shuffle(rng);
    let s1 = lset(&alphabet, l1);
    let f: Map = l0.iter().map(|(s, _)| (s.clone(), format!("a{s}"))).collect();
    (check_morphism(&s0, &s1, f).unwrap(), check_morphism(&s0, &s2, g).unwrap())
}

/// A cospan `S1 -g-> S0 <-f- S2`; `f` is in M when `strict_f`.
pub fn random_cospan(rng: &mut ChaCha8Rng, strict_f: bool) -> (LSetMorphism, LSetMorphism) {
    let size = rng.gen_range(1..=6);
    let alphabet = Arc::new(tree_poset(rng, size, "l"));
    let n0 = rng.gen_range(1..=5);
    let s0 = random_lset(rng, &alphabet, n0, "c");
    let g = cospan_leg(rng, &alphabet, &s0, "u", false);
    let f = cospan_leg(rng, &alphabet, &s0, "v", strict_f);
    (g, f)
}

fn cospan_leg(rng: &mut ChaCha8Rng, alphabet: &Arc<PosetG>, s0: &LabelledSet, prefix: &str, strict: bool) -> LSetMorphism {
    let s0_ids: Vec<String> = s0.carrier().map(str::to_string).collect();
    let n = if strict { rng.gen_range(0..=s0_ids.len()) } else { rng.gen_range(0..=5) };
    let mut targets = s0_ids.clone();
    targets.shuffle(rng);
    let mut labels = Vec::new();
    let mut map = Map::new();
    for i in 0..n {
        let target = if strict { targets[i].clone() } else { pick(rng, &s0_ids).clone() };
        let l0 = s0.label(&target).unwrap();
        let label = if strict { l0.to_string() } else { pick(rng, &ancestors(alphabet, l0)).clone() };
        labels.push((format!("{prefix}{i}"), label));
        map.insert(format!("{prefix}{i}"), target);
    }
    let s = lset(alphabet, labels);
    check_morphism(&s, s0, map).unwrap()
}

pub fn compose(first: &Map, then: &Map) -> Map {
    first.iter().map(|(a, b)| (a.clone(), then[b].clone())).collect()
}

/// Every label-respecting map `source -> target`, by enumeration.
pub fn all_morphisms(source: &LabelledSet, target: &LabelledSet) -> Vec<Map> {
    let alphabet = source.alphabet();
    let xs: Vec<&str> = source.carrier().collect();
    let choices: Vec<Vec<&str>> = xs
        .iter()
        .map(|x| {
            let lx = source.label(x).unwrap();
            target
                .carrier()
                .filter(|y| alphabet.leq_or_false(target.label(y).unwrap(), lx))
                .collect()
        })
        .collect();
    if xs.is_empty() {
        return vec![Map::new()];
    }
    choices
        .into_iter()
        .multi_cartesian_product()
        .map(|ys| xs.iter().zip(ys).map(|(x, y)| (x.to_string(), y.to_string())).collect())
        .collect()
}

/// Test objects for universal properties: small random labelled sets plus
/// the given extra ones.
pub fn test_objects(rng: &mut ChaCha8Rng, alphabet: &Arc<PosetG>, max: usize, extra: &[LabelledSet]) -> Vec<LabelledSet> {
    let mut out: Vec<LabelledSet> = (1..=max).map(|n| random_lset(rng, alphabet, n, "z")).collect();
    out.extend(extra.iter().cloned());
    out
}

/// Checks the universal property of a pushout square against `objects`.
pub fn pushout_universal(f: &LSetMorphism, g: &LSetMorphism, sq: &Square, objects: &[LabelledSet]) -> Result<usize, String> {
    if compose(f.map(), sq.first.map()) != compose(g.map(), sq.second.map()) {
        return Err("square does not commute".into());
    }
    let mut cocones = 0;
    for x in objects {
        let mut induced = HashSet::new();
        let mut count = 0;
        for u in all_morphisms(&sq.object, x) {
            induced.insert((compose(sq.first.map(), &u), compose(sq.second.map(), &u)));
            count += 1;
        }
        if induced.len() != count {
            return Err("two mediating morphisms induce the same cocone".into());
        }
        for h1 in all_morphisms(f.target(), x) {
            for h2 in second_legs(f, g, &h1, x) {
                cocones += 1;
                if !induced.contains(&(h1.clone(), h2.clone())) {
                    return Err(format!("cocone {h1:?} {h2:?} has no mediating morphism"));
                }
            }
        }
    }
    Ok(cocones)
}

/// Every `h2: S2 -> X` with `h2 . g = h1 . f`: forced on the image of `g`,
/// free elsewhere.
fn second_legs(f: &LSetMorphism, g: &LSetMorphism, h1: &Map, x: &LabelledSet) -> Vec<Map> {
    let mut forced = Map::new();
    for (s0, x1) in f.map() {
        let y = &h1[x1];
        if let Some(prev) = forced.insert(g.apply(s0).to_string(), y.clone()) {
            if &prev != y {
                return Vec::new();
            }
        }
    }
    let s2 = g.target();
    let alphabet = s2.alphabet();
    let fits = |x2: &str, y: &str| alphabet.leq_or_false(x.label(y).unwrap(), s2.label(x2).unwrap());
    if forced.iter().any(|(x2, y)| !fits(x2, y)) {
        return Vec::new();
    }
    let free: Vec<&str> = s2.carrier().filter(|x2| !forced.contains_key(*x2)).collect();
    if free.is_empty() {
        return vec![forced];
    }
    free.iter()
        .map(|x2| x.carrier().filter(|y| fits(x2, y)).collect::<Vec<_>>())
        .multi_cartesian_product()
        .map(|ys| {
            let mut h2 = forced.clone();
            h2.extend(free.iter().zip(ys).map(|(a, b)| (a.to_string(), b.to_string())));
            h2
        })
        .collect()
}

/// Checks the universal property of a pullback square against `objects`.
pub fn pullback_universal(g: &LSetMorphism, f: &LSetMorphism, sq: &Square, objects: &[LabelledSet]) -> Result<usize, String> {
    if compose(sq.first.map(), g.map()) != compose(sq.second.map(), f.map()) {
        return Err("square does not commute".into());
    }
    let mut cones = 0;
    for y in objects {
        let mut induced = HashSet::new();
        let mut count = 0;
        for u in all_morphisms(y, &sq.object) {
            induced.insert((compose(&u, sq.first.map()), compose(&u, sq.second.map())));
            count += 1;
        }
        if induced.len() != count {
            return Err("two mediating morphisms induce the same cone".into());
        }
        let bs = all_morphisms(y, f.source());
        for a in all_morphisms(y, g.source()) {
            let via_g = compose(&a, g.map());
            for b in &bs {
                if via_g == compose(b, f.map()) {
                    cones += 1;
                    if !induced.contains(&(a.clone(), b.clone())) {
                        return Err(format!("cone {a:?} {b:?} has no mediating morphism"));
                    }
                }
            }
        }
    }
    Ok(cones)
}

// ---------------------------------------------------------------- nets

pub fn ms(pairs: &[(&str, u64)]) -> Multiset {
    Multiset::from_pairs(pairs.iter().copied())
}

pub fn random_name_space(rng: &mut ChaCha8Rng) -> Arc<NameSpacePair> {
    let (np, nt) = (rng.gen_range(1..=4), rng.gen_range(1..=5));
    Arc::new(NameSpacePair::new(tree_poset(rng, np, "p"), tree_poset(rng, nt, "t")))
}

/// A random net with arc weights up to 2 and up to 3 tokens per place.
pub fn random_net(rng: &mut ChaCha8Rng, ns: &Arc<NameSpacePair>, places: usize, transitions: usize) -> PTNet {
    let pl: Vec<String> = ns.places.elements().map(str::to_string).collect();
    let tl: Vec<String> = ns.transitions.elements().map(str::to_string).collect();
    let mut net = PTNet::new(ns.clone());
    let ids: Vec<String> = (0..places).map(|i| format!("p{i}")).collect();
    for p in &ids {
        net.add_place(p, pick(rng, &pl)).unwrap();
    }
    for i in 0..transitions {
        let mut side = || {
            let mut m = Multiset::new();
            for p in &ids {
                if rng.gen_bool(0.3) {
                    m.insert(p, rng.gen_range(1..=2));
                }
            }
            m
        };
        let (pre, post) = (side(), side());
        net.add_transition(format!("t{i}"), pick(rng, &tl).clone(), pre, post).unwrap();
    }
    let marking = Multiset::from_pairs(ids.iter().map(|p| (p.as_str(), rng.gen_range(0..=3))));
    net.set_marking(marking).unwrap();
    net
}

/// A pattern cut out of `host`: some transitions with their neighbourhoods and
/// a few more places, renamed, with labels raised and tokens lowered. It has
/// at least one occurrence in `host` by construction.
pub fn random_pattern(rng: &mut ChaCha8Rng, host: &PTNet) -> PTNet {
    let ns = host.name_space();
    let mut ts: Vec<&String> = host.transitions().keys().collect();
    ts.shuffle(rng);
    ts.truncate(rng.gen_range(0..=ts.len().min(3)));
    let mut places: BTreeSet<String> = BTreeSet::new();
    for t in &ts {
        places.extend(host.neighbourhood(t).unwrap());
    }
    for p in host.places().keys() {
        if places.len() < 4 && rng.gen_bool(0.25) {
            places.insert(p.clone());
        }
    }
    let pid = |p: &str| format!("q_{p}");
    let mut net = PTNet::new(ns.clone());
    for p in &places {
        let up = ancestors(&ns.places, host.place_label(p).unwrap());
        net.add_place(pid(p), pick(rng, &up).clone()).unwrap();
    }
    for t in &ts {
        let tr = &host.transitions()[*t];
        let up = ancestors(&ns.transitions, &tr.label);
        let map = |m: &Multiset| m.map_ids(|p| Some(pid(p)));
        net.add_transition(format!("u_{t}"), pick(rng, &up).clone(), map(&tr.pre), map(&tr.post))
            .unwrap();
    }
    let marking = Multiset::from_pairs(
        places
            .iter()
            .map(|p| (pid(p), rng.gen_range(0..=host.marking().get(p)))),
    );
    net.set_marking(marking).unwrap();
    net
}

fn mapped(m: &Multiset, f: &BTreeMap<&str, &str>) -> BTreeMap<String, u64> {
    m.iter().map(|(p, k)| (f[p].to_string(), k)).collect()
}

fn plain(m: &Multiset) -> BTreeMap<String, u64> {
    m.iter().map(|(p, k)| (p.to_string(), k)).collect()
}

/// Every injective morphism `pattern -> host`, by enumerating injections.
pub fn naive_occurrences(pattern: &PTNet, host: &PTNet) -> BTreeSet<NetMorphism> {
    let ns = host.name_space();
    let lp: Vec<&str> = pattern.places().keys().map(String::as_str).collect();
    let lt: Vec<&str> = pattern.transitions().keys().map(String::as_str).collect();
    let hp: Vec<&str> = host.places().keys().map(String::as_str).collect();
    let ht: Vec<&str> = host.transitions().keys().map(String::as_str).collect();
    let mut out = BTreeSet::new();
    for tp in ht.iter().copied().permutations(lt.len()) {
        let labels_ok = lt.iter().zip(&tp).all(|(a, b)| {
            ns.transitions
                .leq_or_false(host.transition_label(b).unwrap(), pattern.transition_label(a).unwrap())
        });
        if !labels_ok {
            continue;
        }
        for pp in hp.iter().copied().permutations(lp.len()) {
            let fp: BTreeMap<&str, &str> = lp.iter().copied().zip(pp.iter().copied()).collect();
            let places_ok = lp.iter().all(|p| {
                ns.places.leq_or_false(host.place_label(fp[p]).unwrap(), pattern.place_label(p).unwrap())
                    && pattern.marking().get(p) <= host.marking().get(fp[p])
            });
            let arcs_ok = lt.iter().zip(&tp).all(|(a, b)| {
                let (ta, tb) = (&pattern.transitions()[*a], &host.transitions()[*b]);
                mapped(&ta.pre, &fp) == plain(&tb.pre) && mapped(&ta.post, &fp) == plain(&tb.post)
            });
            if places_ok && arcs_ok {
                out.insert(NetMorphism {
                    places: fp.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
                    transitions: lt.iter().zip(&tp).map(|(a, b)| (a.to_string(), b.to_string())).collect(),
                });
            }
        }
    }
    out
}

/// Isomorphism by enumerating bijections; labels and markings must agree.
pub fn naive_isomorphic(a: &PTNet, b: &PTNet) -> bool {
    if a.places().len() != b.places().len() || a.transitions().len() != b.transitions().len() {
        return false;
    }
    let ap: Vec<&str> = a.places().keys().map(String::as_str).collect();
    let at: Vec<&str> = a.transitions().keys().map(String::as_str).collect();
    let bp: Vec<&str> = b.places().keys().map(String::as_str).collect();
    let bt: Vec<&str> = b.transitions().keys().map(String::as_str).collect();
    for pp in bp.iter().copied().permutations(bp.len()) {
        let fp: BTreeMap<&str, &str> = ap.iter().copied().zip(pp.iter().copied()).collect();
        let places_ok = ap
            .iter()
            .all(|p| a.place_label(p) == b.place_label(fp[p]) && a.marking().get(p) == b.marking().get(fp[p]));
        if !places_ok {
            continue;
        }
        for tp in bt.iter().copied().permutations(bt.len()) {
            let ok = at.iter().zip(&tp).all(|(x, y)| {
                let (tx, ty) = (&a.transitions()[*x], &b.transitions()[*y]);
                tx.label == ty.label && mapped(&tx.pre, &fp) == plain(&ty.pre) && mapped(&tx.post, &fp) == plain(&ty.post)
            });
            if ok {
                return true;
            }
        }
    }
    false
}

/// Host elements touched by an occurrence, and those it keeps.
pub fn footprint(rule: &hrpn::dpo::Rule, o: &NetMorphism) -> (BTreeSet<String>, BTreeSet<String>) {
    let l = rule.left();
    let mut all = BTreeSet::new();
    let mut kept = BTreeSet::new();
    for (x, y) in &o.places {
        all.insert(format!("p:{y}"));
        if l.places.values().any(|v| v == x) {
            kept.insert(format!("p:{y}"));
        }
    }
    for (x, y) in &o.transitions {
        all.insert(format!("t:{y}"));
        if l.transitions.values().any(|v| v == x) {
            kept.insert(format!("t:{y}"));
        }
    }
    (all, kept)
}

/// Independence decided from footprints: the overlap must be kept by both.
pub fn oracle_independent(r1: &hrpn::dpo::Rule, o1: &NetMorphism, r2: &hrpn::dpo::Rule, o2: &NetMorphism) -> bool {
    let (a1, k1) = footprint(r1, o1);
    let (a2, k2) = footprint(r2, o2);
    a1.intersection(&a2).all(|x| k1.contains(x) && k2.contains(x))
}

/// Carries an occurrence in the host of `step` over to its result. Only valid
/// when the occurrence avoids everything the step deleted.
pub fn transport(o: &NetMorphism, step: &hrpn::dpo::TransformStep) -> NetMorphism {
    let back = step.context_to_host.inverse();
    let along = &step.context_to_result;
    NetMorphism {
        places: o.places.iter().map(|(x, y)| (x.clone(), along.place(back.place(y)).to_string())).collect(),
        transitions: o
            .transitions
            .iter()
            .map(|(x, y)| (x.clone(), along.transition(back.transition(y)).to_string()))
            .collect(),
    }
}

// ---------------------------------------------------------------- poset maps

/// Monotone and greatest-preserving, checked on all pairs.
pub fn is_poset_morphism(source: &PosetG, target: &PosetG, f: &Map) -> bool {
    f[source.greatest()] == target.greatest()
        && source.elements().all(|a| {
            source
                .elements()
                .all(|b| !source.leq_or_false(a, b) || target.leq_or_false(&f[a], &f[b]))
        })
}

pub fn all_poset_morphisms(source: &PosetG, target: &PosetG) -> Vec<Map> {
    let xs: Vec<&str> = source.elements().collect();
    let ys: Vec<&str> = target.elements().collect();
    std::iter::repeat(ys)
        .take(xs.len())
        .multi_cartesian_product()
        .map(|img| xs.iter().zip(img).map(|(x, y)| (x.to_string(), y.to_string())).collect::<Map>())
        .filter(|f| is_poset_morphism(source, target, f))
        .collect()
}

// ---------------------------------------------------------------- rewriting

/// Every applicable (rule index, occurrence) in `net`.
pub fn applicable(rules: &[hrpn::dpo::Rule], net: &PTNet) -> Vec<(usize, hrpn::matching::Occurrence)> {
    rules
        .iter()
        .enumerate()
        .flat_map(|(i, r)| hrpn::dpo::applicable_occurrences(r, net).into_iter().map(move |o| (i, o)))
        .collect()
}

/// Applies `r1` then `r2` and the other way round; true when the results are
/// isomorphic.
pub fn diamond(
    net: &PTNet,
    r1: &hrpn::dpo::Rule,
    o1: &hrpn::matching::Occurrence,
    r2: &hrpn::dpo::Rule,
    o2: &hrpn::matching::Occurrence,
) -> Result<bool, String> {
    use hrpn::dpo::transform;
    use hrpn::matching::Occurrence;
    let one_way = |ra: &hrpn::dpo::Rule, oa: &Occurrence, rb: &hrpn::dpo::Rule, ob: &Occurrence| {
        let first = transform(net, ra, oa).map_err(|e| e.to_string())?;
        let moved = Occurrence::new(rb.lhs(), &first.result, transport(ob, &first)).map_err(|e| e.to_string())?;
        if !hrpn::dpo::sequential_independent(&first, ra, rb, &moved) {
            return Err(format!("{} then {} is not sequentially independent", ra.name(), rb.name()));
        }
        transform(&first.result, rb, &moved).map(|s| s.result).map_err(|e| e.to_string())
    };
    let a = one_way(r1, o1, r2, o2)?;
    let b = one_way(r2, o2, r1, o1)?;
    Ok(hrpn::matching::isomorphic(&a, &b).is_some())
}

/// Nets reachable from a model by seeded simulation, the start included.
pub fn reachable_states(m: &Model, seeds: std::ops::Range<u64>, steps: usize) -> Vec<PTNet> {
    let mut out = vec![m.net.clone()];
    for seed in seeds {
        let (_, net) = hrpn::sim::simulate(m, steps, seed).unwrap();
        out.push(net);
    }
    out
}

// ---------------------------------------------------------------- hierarchy

/// Flat nets for every combination of substitution orders, one permutation
/// per instance. Also returns the largest number of substitutions at a level.
pub fn flat_nets_all_orders(hn: &HierNet) -> (Vec<PTNet>, usize) {
    use std::cell::RefCell;
    let seen: RefCell<BTreeMap<String, Vec<String>>> = RefCell::new(BTreeMap::new());
    hrpn::hier::flatten_recursive_ordered(hn, &|path, ts| {
        seen.borrow_mut().insert(path.to_string(), ts.clone());
    })
    .unwrap();
    let levels = seen.into_inner();
    let widest = levels.values().map(Vec::len).max().unwrap_or(0);
    let per_level: Vec<Vec<Vec<String>>> = levels
        .values()
        .map(|ts| ts.iter().cloned().permutations(ts.len()).collect())
        .collect();
    let paths: Vec<&String> = levels.keys().collect();
    let mut out = Vec::new();
    for choice in per_level.into_iter().multi_cartesian_product() {
        let chosen: BTreeMap<&str, &Vec<String>> = paths.iter().map(|p| p.as_str()).zip(choice.iter()).collect();
        let flat = hrpn::hier::flatten_recursive_ordered(hn, &|path, ts| {
            *ts = chosen[path].clone();
        })
        .unwrap();
        out.push(flat.net);
    }
    (out, widest)
}

/// Expected flat sizes: each subnet contributes its elements minus the
/// fused connecting places and the replaced transition.
pub fn expected_size(hn: &HierNet) -> (usize, usize) {
    hn.substitutions.values().fold(
        (hn.net.places().len(), hn.net.transitions().len()),
        |(p, t), s| {
            let (sp, st) = expected_size(&s.subnet);
            (p + sp - s.interface.len(), t + st - 1)
        },
    )
}
