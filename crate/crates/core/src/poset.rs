//! Finite partial orders with a greatest element.
//!
//! Every label alphabet in the engine is a [`PosetG`]: a finite set of names,
//! a generating relation, and a designated greatest element that dominates
//! everything. The reflexive-transitive closure is computed once at
//! construction and answers all `leq` queries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Reserved name of the greatest element produced by constructions.
pub const TOP: &str = "⊤";

/// Separator between a part id and an element name in coproducts.
pub const PART_SEPARATOR: &str = "::";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("relation is cyclic: `{0}` <= `{1}` <= `{0}`")]
    Cycle(String, String),
    #[error("`{0}` and `{1}` have no unique least upper bound")]
    NoJoin(String, String),
    #[error("map is not total: `{0}` has no image")]
    NotTotal(String),
    #[error("map is not order-preserving: `{0}` <= `{1}` but images are unrelated")]
    NotOrderPreserving(String, String),
    #[error("map does not send the greatest element to the greatest element")]
    GreatestNotPreserved,
    #[error("invalid embedding: {0}")]
    Embedding(String),
    #[error("name collision: `{0}`")]
    NameCollision(String),
    #[error("posets have different greatest elements `{0}` and `{1}`")]
    GreatestMismatch(String, String),
}

/// A finite partial order with a greatest element.
///
/// Elements are kept sorted; `leq` is answered from a dense closure matrix.
#[derive(Clone)]
pub struct PosetG {
    names: Vec<String>,
    index: HashMap<String, usize>,
    generators: BTreeSet<(usize, usize)>,
    greatest: usize,
    closure: Vec<Vec<bool>>,
}

impl PosetG {
    /// Builds a poset from its elements, a generating relation and the
    /// greatest element. The greatest element is added to the carrier when
    /// missing, and `x <= greatest` is implied for every `x`.
    pub fn new<E, S, R, T>(elements: E, relation: R, greatest: &str) -> Result<Self, PosetError>
    where
        E: IntoIterator<Item = S>,
        S: Into<String>,
        R: IntoIterator<Item = (T, T)>,
        T: Into<String>,
    {
        let mut set: BTreeSet<String> = elements.into_iter().map(Into::into).collect();
        set.insert(greatest.to_string());
        let names: Vec<String> = set.into_iter().collect();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut generators = BTreeSet::new();
        for (a, b) in relation {
            let (a, b): (String, String) = (a.into(), b.into());
            let ia = *index.get(&a).ok_or_else(|| PosetError::UnknownElement(a.clone()))?;
            let ib = *index.get(&b).ok_or(PosetError::UnknownElement(b))?;
            generators.insert((ia, ib));
        }
        let greatest = index[greatest];
        let closure = close(names.len(), &generators, greatest);
        let poset = PosetG {
            names,
            index,
            generators,
            greatest,
            closure,
        };
        poset.check_antisymmetry()?;
        Ok(poset)
    }

    /// The one-point poset `{⊤}`, initial and final among posets with
    /// greatest element.
    pub fn singleton() -> Self {
        PosetG::new([TOP], Vec::<(&str, &str)>::new(), TOP).expect("singleton is a poset")
    }

    /// A poset where the only relations are `x <= greatest`.
    pub fn flat<E, S>(elements: E, greatest: &str) -> Result<Self, PosetError>
    where
        E: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PosetG::new(elements, Vec::<(&str, &str)>::new(), greatest)
    }

    fn check_antisymmetry(&self) -> Result<(), PosetError> {
        let n = self.names.len();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.closure[a][b] && self.closure[b][a] {
                    return Err(PosetError::Cycle(
                        self.names[a].clone(),
                        self.names[b].clone(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn greatest(&self) -> &str {
        &self.names[self.greatest]
    }

    /// Elements in sorted order.
    pub fn elements(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.names.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// The generating pairs as given (after name resolution).
    pub fn generators(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.generators
            .iter()
            .map(|&(a, b)| (self.names[a].as_str(), self.names[b].as_str()))
    }

    /// The full `<=` relation: reflexive-transitive closure of the generators
    /// together with `x <= greatest`.
    pub fn closure(&self) -> BTreeSet<(String, String)> {
        let mut out = BTreeSet::new();
        for (a, row) in self.closure.iter().enumerate() {
            for (b, &le) in row.iter().enumerate() {
                if le {
                    out.insert((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        out
    }

    fn idx(&self, name: &str) -> Result<usize, PosetError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, a: &str, b: &str) -> Result<bool, PosetError> {
        Ok(self.closure[self.idx(a)?][self.idx(b)?])
    }

    /// `leq` that treats unknown names as unrelated.
    pub fn leq_or_false(&self, a: &str, b: &str) -> bool {
        self.leq(a, b).unwrap_or(false)
    }

    /// Least upper bound of `a` and `b`.
    ///
    /// Fails with [`PosetError::NoJoin`] when the minimal upper bounds are not
    /// unique; the greatest element is never picked as a fallback.
    pub fn join(&self, a: &str, b: &str) -> Result<String, PosetError> {
        let (ia, ib) = (self.idx(a)?, self.idx(b)?);
        if self.closure[ia][ib] {
            return Ok(b.to_string());
        }
        if self.closure[ib][ia] {
            return Ok(a.to_string());
        }
        let uppers: Vec<usize> = (0..self.names.len())
            .filter(|&u| self.closure[ia][u] && self.closure[ib][u])
            .collect();
        let least: Vec<usize> = uppers
            .iter()
            .copied()
            .filter(|&u| uppers.iter().all(|&v| self.closure[u][v]))
            .collect();
        match least.as_slice() {
            [u] => Ok(self.names[*u].clone()),
            _ => Err(PosetError::NoJoin(a.to_string(), b.to_string())),
        }
    }

    /// Poset on the union of both carriers and relations. Both operands must
    /// share the greatest element.
    pub fn union(&self, other: &PosetG) -> Result<PosetG, PosetError> {
        if self.greatest() != other.greatest() {
            return Err(PosetError::GreatestMismatch(
                self.greatest().to_string(),
                other.greatest().to_string(),
            ));
        }
        let elements = self.elements().chain(other.elements());
        let relation = self.generators().chain(other.generators());
        PosetG::new(elements, relation, self.greatest())
    }

    /// Renames every element through `f`. `f` must be injective; the
    /// greatest element is renamed like any other.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Result<PosetG, PosetError> {
        let renamed: Vec<String> = self.names.iter().map(|n| f(n)).collect();
        let unique: BTreeSet<&String> = renamed.iter().collect();
        if unique.len() != renamed.len() {
            return Err(PosetError::NameCollision(format!(
                "renaming of `{}` is not injective",
                self.names.join(", ")
            )));
        }
        let relation: Vec<(String, String)> = self
            .generators
            .iter()
            .map(|&(a, b)| (renamed[a].clone(), renamed[b].clone()))
            .collect();
        PosetG::new(renamed.clone(), relation, &renamed[self.greatest])
    }

    /// Maximal elements strictly below `greatest`, useful for diagnostics.
    pub fn covers_of_top(&self) -> Vec<&str> {
        (0..self.names.len())
            .filter(|&a| a != self.greatest)
            .filter(|&a| {
                !(0..self.names.len())
                    .any(|b| b != a && b != self.greatest && self.closure[a][b])
            })
            .map(|a| self.names[a].as_str())
            .collect()
    }
}

fn close(n: usize, generators: &BTreeSet<(usize, usize)>, greatest: usize) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
        row[greatest] = true;
    }
    for &(a, b) in generators {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

impl PartialEq for PosetG {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.greatest == other.greatest
            && self.closure == other.closure
    }
}

impl Eq for PosetG {}

impl fmt::Debug for PosetG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PosetG")
            .field("elements", &self.names)
            .field("relation", &self.generators().collect::<Vec<_>>())
            .field("greatest", &self.greatest())
            .finish()
    }
}

/// An order-preserving map between posets that preserves the greatest element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetMap {
    map: BTreeMap<String, String>,
}

impl PosetMap {
    /// Validates `map` as a morphism `source -> target`.
    pub fn new(
        source: &PosetG,
        target: &PosetG,
        map: BTreeMap<String, String>,
    ) -> Result<Self, PosetError> {
        for x in source.elements() {
            let y = map.get(x).ok_or_else(|| PosetError::NotTotal(x.to_string()))?;
            if !target.contains(y) {
                return Err(PosetError::UnknownElement(y.clone()));
            }
        }
        if map[source.greatest()] != target.greatest() {
            return Err(PosetError::GreatestNotPreserved);
        }
        for (a, b) in source.closure() {
            if !target.leq(&map[&a], &map[&b])? {
                return Err(PosetError::NotOrderPreserving(a, b));
            }
        }
        Ok(PosetMap { map })
    }

    pub fn identity(p: &PosetG) -> Self {
        PosetMap {
            map: p.elements().map(|x| (x.to_string(), x.to_string())).collect(),
        }
    }

    pub fn apply(&self, x: &str) -> Option<&str> {
        self.map.get(x).map(String::as_str)
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<&String> = self.map.values().collect();
        image.len() == self.map.len()
    }

    /// True when `a <= b` holds exactly when the images are related.
    pub fn is_order_embedding(&self, source: &PosetG, target: &PosetG) -> bool {
        source.elements().all(|a| {
            source.elements().all(|b| {
                source.leq_or_false(a, b) == target.leq_or_false(&self.map[a], &self.map[b])
            })
        })
    }

    pub fn compose(&self, after: &PosetMap) -> PosetMap {
        PosetMap {
            map: self
                .map
                .iter()
                .map(|(k, v)| (k.clone(), after.map[v].clone()))
                .collect(),
        }
    }
}

/// Place and transition alphabets of a net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameSpacePair {
    pub places: PosetG,
    pub transitions: PosetG,
}

impl NameSpacePair {
    pub fn new(places: PosetG, transitions: PosetG) -> Self {
        NameSpacePair {
            places,
            transitions,
        }
    }

    /// `({⊤}, {⊤})`: every label is the greatest element.
    pub fn trivial() -> Self {
        NameSpacePair::new(PosetG::singleton(), PosetG::singleton())
    }

    pub fn union(&self, other: &NameSpacePair) -> Result<NameSpacePair, PosetError> {
        Ok(NameSpacePair::new(
            self.places.union(&other.places)?,
            self.transitions.union(&other.transitions)?,
        ))
    }
}

/// Renders the coproduct name of `name` coming from part `part`.
pub fn part_name(part: &str, name: &str) -> String {
    format!("{part}{PART_SEPARATOR}{name}")
}

/// Coproduct in the category of posets with greatest element: disjoint union
/// of the parts with all greatest elements identified to [`TOP`].
///
/// Element `x` of part `id` becomes `id::x`. Returns the coproduct and one
/// injection per part, in input order.
pub fn coproduct(parts: &[(&str, &PosetG)]) -> Result<(PosetG, Vec<PosetMap>), PosetError> {
    let mut elements = vec![TOP.to_string()];
    let mut relation = Vec::new();
    let mut maps = Vec::with_capacity(parts.len());
    let ids: BTreeSet<&str> = parts.iter().map(|(id, _)| *id).collect();
    if ids.len() != parts.len() {
        return Err(PosetError::NameCollision("duplicate part id".into()));
    }
    for (id, part) in parts {
        let inj: BTreeMap<String, String> = part
            .elements()
            .map(|x| {
                let image = if x == part.greatest() {
                    TOP.to_string()
                } else {
                    part_name(id, x)
                };
                (x.to_string(), image)
            })
            .collect();
        elements.extend(inj.values().cloned());
        relation.extend(
            part.generators()
                .map(|(a, b)| (inj[a].clone(), inj[b].clone())),
        );
        maps.push(inj);
    }
    let unique: BTreeSet<&String> = elements.iter().collect();
    if unique.len() != elements.len() - parts.len() {
        return Err(PosetError::NameCollision(
            "coproduct element names are not disjoint".into(),
        ));
    }
    let sum = PosetG::new(elements, relation, TOP)?;
    let injections = parts
        .iter()
        .zip(maps)
        .map(|((_, part), m)| PosetMap::new(part, &sum, m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((sum, injections))
}

/// A local alphabet together with its inclusion into the global one.
#[derive(Debug, Clone)]
pub struct LocalAlphabet<'a> {
    pub id: &'a str,
    pub poset: &'a PosetG,
    pub inclusion: BTreeMap<String, String>,
}

impl<'a> LocalAlphabet<'a> {
    /// A local alphabet whose elements keep their names in the global one.
    pub fn subset(id: &'a str, poset: &'a PosetG, global: &PosetG) -> Self {
        let inclusion = poset
            .elements()
            .map(|x| {
                let image = if x == poset.greatest() {
                    global.greatest().to_string()
                } else {
                    x.to_string()
                };
                (x.to_string(), image)
            })
            .collect();
        LocalAlphabet {
            id,
            poset,
            inclusion,
        }
    }
}

/// The combined local/global name space and its injections.
#[derive(Debug, Clone)]
pub struct NameSpace {
    pub poset: PosetG,
    /// `c_i` for every local alphabet, in input order.
    pub local_injections: Vec<PosetMap>,
    /// `c_A`: global names keep their own name.
    pub global_injection: PosetMap,
}

/// Builds the name space in which every global name lies above each of its
/// local copies.
///
/// Local element `x` of alphabet `id` becomes `id::x`; global elements keep
/// their names; all greatest elements become [`TOP`]. The order is generated
/// by the transported local orders, the global order, and `c_i(x) <= c_A(inc_i(x))`.
pub fn name_space(global: &PosetG, locals: &[LocalAlphabet<'_>]) -> Result<NameSpace, PosetError> {
    for local in locals {
        let inc = PosetMap::new(local.poset, global, local.inclusion.clone())
            .map_err(|e| PosetError::Embedding(format!("`{}`: {e}", local.id)))?;
        if !inc.is_injective() {
            return Err(PosetError::Embedding(format!(
                "inclusion of `{}` is not injective",
                local.id
            )));
        }
        if !inc.is_order_embedding(local.poset, global) {
            return Err(PosetError::Embedding(format!(
                "inclusion of `{}` is not an order embedding",
                local.id
            )));
        }
    }

    let global_map: BTreeMap<String, String> = global
        .elements()
        .map(|x| {
            let image = if x == global.greatest() { TOP } else { x };
            (x.to_string(), image.to_string())
        })
        .collect();

    let parts: Vec<(&str, &PosetG)> = locals.iter().map(|l| (l.id, l.poset)).collect();
    let (sum, local_maps) = coproduct(&parts)?;

    let mut elements: Vec<String> = sum.elements().map(str::to_string).collect();
    for g in global_map.values() {
        if g != TOP && sum.contains(g) {
            return Err(PosetError::NameCollision(g.clone()));
        }
        elements.push(g.clone());
    }
    let mut relation: Vec<(String, String)> = sum
        .generators()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    relation.extend(
        global
            .generators()
            .map(|(a, b)| (global_map[a].clone(), global_map[b].clone())),
    );
    for (local, c_i) in locals.iter().zip(&local_maps) {
        for (x, image) in &local.inclusion {
            relation.push((
                c_i.apply(x).expect("total").to_string(),
                global_map[image].clone(),
            ));
        }
    }
    let poset = PosetG::new(elements, relation, TOP)?;
    let local_injections = locals
        .iter()
        .zip(local_maps)
        .map(|(l, m)| PosetMap::new(l.poset, &poset, m.as_map().clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let global_injection = PosetMap::new(global, &poset, global_map)?;
    Ok(NameSpace {
        poset,
        local_injections,
        global_injection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(p: &PosetG) -> BTreeSet<(String, String)> {
        p.closure()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    /// Transition alphabet of the tasks/steps example.
    fn steps() -> PosetG {
        PosetG::new(
            [
                "initialise",
                "task1",
                "task2",
                "task3",
                "fork",
                "join",
                "step",
                "step1",
                "step2",
                "intermediate step",
                "parallel step",
            ],
            [
                ("step1", "step"),
                ("step2", "step"),
                ("intermediate step", "step"),
                ("parallel step", "step"),
            ],
            TOP,
        )
        .unwrap()
    }

    #[test]
    fn closure_adds_greatest_and_reflexive_pairs() {
        let p = PosetG::new(["x", "g"], Vec::<(&str, &str)>::new(), "g").unwrap();
        let expected: BTreeSet<_> = [pair("x", "x"), pair("g", "g"), pair("x", "g")].into();
        assert_eq!(pairs(&p), expected);
    }

    #[test]
    fn closure_is_transitive() {
        let p = PosetG::new(["a", "b", "g"], [("a", "b")], "g").unwrap();
        let expected: BTreeSet<_> = [
            pair("a", "a"),
            pair("b", "b"),
            pair("g", "g"),
            pair("a", "b"),
            pair("a", "g"),
            pair("b", "g"),
        ]
        .into();
        assert_eq!(pairs(&p), expected);
    }

    #[test]
    fn cycles_are_rejected() {
        let err = PosetG::new(["a", "b"], [("a", "b"), ("b", "a")], TOP).unwrap_err();
        assert!(matches!(err, PosetError::Cycle(..)));
        // A cycle through the greatest element is a cycle too.
        let err = PosetG::new(["a"], [(TOP, "a")], TOP).unwrap_err();
        assert!(matches!(err, PosetError::Cycle(..)));
    }

    #[test]
    fn unknown_relation_endpoint() {
        let err = PosetG::new(["a"], [("a", "zz")], TOP).unwrap_err();
        assert_eq!(err, PosetError::UnknownElement("zz".into()));
    }

    #[test]
    fn step_order() {
        let p = steps();
        assert!(p.leq("step1", "step").unwrap());
        assert!(!p.leq("task1", "step").unwrap());
        assert!(!p.leq("step", "step1").unwrap());
        assert!(p.leq("fork", "fork").unwrap());
        assert!(p.leq("task1", TOP).unwrap());
        assert!(matches!(p.leq("nope", "step"), Err(PosetError::UnknownElement(_))));
    }

    #[test]
    fn joins() {
        let p = steps();
        assert_eq!(p.join("step1", "step").unwrap(), "step");
        assert_eq!(p.join("step", "step1").unwrap(), "step");
        assert_eq!(p.join("step1", "step1").unwrap(), "step1");
        assert_eq!(p.join("step1", "step2").unwrap(), "step");
        assert_eq!(p.join("step1", "task1").unwrap(), TOP);

        let antichain = PosetG::flat(["a", "b"], "g").unwrap();
        assert_eq!(antichain.join("a", "b").unwrap(), "g");
    }

    #[test]
    fn ambiguous_join_is_an_error() {
        // a, b both below c and d, which are incomparable.
        let p = PosetG::new(
            ["a", "b", "c", "d"],
            [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")],
            TOP,
        )
        .unwrap();
        assert_eq!(
            p.join("a", "b").unwrap_err(),
            PosetError::NoJoin("a".into(), "b".into())
        );
    }

    #[test]
    fn coproduct_of_singleton() {
        let (sum, inj) = coproduct(&[("0", &PosetG::singleton())]).unwrap();
        assert_eq!(sum.elements().collect::<Vec<_>>(), vec![TOP]);
        assert_eq!(inj[0].apply(TOP), Some(TOP));
    }

    #[test]
    fn coproduct_duplicates_all_but_greatest() {
        let part = PosetG::flat(["a"], "g").unwrap();
        let (sum, inj) = coproduct(&[("1", &part), ("2", &part)]).unwrap();
        assert_eq!(sum.len(), 3);
        assert!(sum.contains("1::a") && sum.contains("2::a"));
        assert!(!sum.leq("1::a", "2::a").unwrap());
        for m in &inj {
            assert!(sum.leq(m.apply("a").unwrap(), m.apply("g").unwrap()).unwrap());
        }
    }

    #[test]
    fn poset_map_validation() {
        let p = PosetG::new(["a", "b"], [("a", "b")], TOP).unwrap();
        let flat = PosetG::flat(["x", "y"], TOP).unwrap();
        let m = |pairs: &[(&str, &str)]| -> BTreeMap<String, String> {
            pairs
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect()
        };
        assert!(PosetMap::new(&p, &flat, m(&[("a", "x"), ("b", "x"), (TOP, TOP)])).is_ok());
        assert_eq!(
            PosetMap::new(&p, &flat, m(&[("a", "x"), ("b", "y"), (TOP, TOP)])).unwrap_err(),
            PosetError::NotOrderPreserving("a".into(), "b".into())
        );
        assert_eq!(
            PosetMap::new(&p, &flat, m(&[("a", "x"), ("b", "x"), (TOP, "x")])).unwrap_err(),
            PosetError::GreatestNotPreserved
        );
        assert_eq!(
            PosetMap::new(&p, &flat, m(&[("a", "x"), (TOP, TOP)])).unwrap_err(),
            PosetError::NotTotal("b".into())
        );
    }

    #[test]
    fn name_space_single_local_equal_to_global() {
        let global = PosetG::flat(["a"], TOP).unwrap();
        let ns = name_space(&global, &[LocalAlphabet::subset("l", &global, &global)]).unwrap();
        let elems: Vec<&str> = ns.poset.elements().collect();
        assert_eq!(elems.len(), 3);
        assert!(ns.poset.leq("l::a", "a").unwrap());
        assert!(!ns.poset.leq("a", "l::a").unwrap());
    }

    #[test]
    fn name_space_without_locals_is_global() {
        let global = steps();
        let ns = name_space(&global, &[]).unwrap();
        assert_eq!(ns.poset, global);
    }

    #[test]
    fn name_space_rejects_non_embeddings() {
        let global = PosetG::flat(["a", "b"], TOP).unwrap();
        let local = PosetG::new(["a", "b"], [("a", "b")], TOP).unwrap();
        let err = name_space(&global, &[LocalAlphabet::subset("l", &local, &global)]).unwrap_err();
        assert!(matches!(err, PosetError::Embedding(_)));

        let local = PosetG::flat(["a", "b"], TOP).unwrap();
        let mut collapse = LocalAlphabet::subset("l", &local, &global);
        collapse.inclusion.insert("b".into(), "a".into());
        let err = name_space(&global, &[collapse]).unwrap_err();
        assert!(matches!(err, PosetError::Embedding(_)));
    }

    #[test]
    fn union_and_rename() {
        let a = PosetG::new(["x", "y"], [("x", "y")], TOP).unwrap();
        let b = PosetG::new(["y", "z"], [("y", "z")], TOP).unwrap();
        let u = a.union(&b).unwrap();
        assert!(u.leq("x", "z").unwrap());
        let r = a.rename(|n| if n == TOP { n.into() } else { format!("p/{n}") }).unwrap();
        assert!(r.leq("p/x", "p/y").unwrap());
        assert!(a.rename(|_| "same".into()).is_err());
    }
}
