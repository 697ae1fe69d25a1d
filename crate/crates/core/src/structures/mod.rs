//! Finite relational structures and their combinatorics.

mod dense;
mod format;
mod ops;
mod search;

pub use dense::Dense;
pub use format::{parse_structure, serialize_structure};
pub use ops::{
    cartesian_product, disjoint_union, embedding_quasi_order_probe, enumerate_substructures,
    induced_substructure, label_expand, n_copy, n_disjoint_sum, relabel, tuple_pin_expand,
    underlying_graph, Substructures,
};
pub use search::{find_embedding, find_embedding_hinted, find_homomorphism, is_embedding, is_homomorphism};

use crate::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

pub type Element = u32;

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Relation symbols with arities plus an ordered list of constant symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Vocabulary {
    relations: BTreeMap<String, usize>,
    constants: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts<R, C>(relations: R, constants: C) -> Result<Self>
    where
        R: IntoIterator<Item = (String, usize)>,
        C: IntoIterator<Item = String>,
    {
        let mut v = Vocabulary::new();
        for (name, arity) in relations {
            v.add_relation(&name, arity)?;
        }
        for c in constants {
            v.add_constant(&c)?;
        }
        Ok(v)
    }

    /// Convenience for literals: `Vocabulary::with(&[("E", 2)], &["c"])`.
    pub fn with(relations: &[(&str, usize)], constants: &[&str]) -> Self {
        Self::from_parts(
            relations.iter().map(|(n, a)| (n.to_string(), *a)),
            constants.iter().map(|c| c.to_string()),
        )
        .expect("valid literal vocabulary")
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<()> {
        if !is_identifier(name) {
            return Err(Error::invalid(format!("bad relation name {name:?}")));
        }
        if arity == 0 {
            return Err(Error::invalid(format!("relation {name} has arity 0")));
        }
        if self.has_symbol(name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        self.relations.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<()> {
        if !is_identifier(name) {
            return Err(Error::invalid(format!("bad constant name {name:?}")));
        }
        if self.has_symbol(name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        self.constants.push(name.to_string());
        Ok(())
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.relations.contains_key(name) || self.constants.iter().any(|c| c == name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }
}

/// A finite relational structure with optional constants.
///
/// Invariant: every fact component and constant lies in the universe, every
/// constant is interpreted, and an empty universe has no constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Structure {
    vocab: Vocabulary,
    universe: BTreeSet<Element>,
    relations: BTreeMap<String, BTreeSet<Vec<Element>>>,
    constants: BTreeMap<String, Element>,
}

impl Structure {
    /// A structure with no facts; constants must be set before use.
    pub fn new(vocab: Vocabulary, universe: impl IntoIterator<Item = Element>) -> Self {
        let relations = vocab.relations().map(|(n, _)| (n.to_string(), BTreeSet::new())).collect();
        Structure { vocab, universe: universe.into_iter().collect(), relations, constants: BTreeMap::new() }
    }

    /// Graph on `0..n` over `{E/2}` with the given directed edges.
    pub fn digraph(universe: impl IntoIterator<Item = Element>, edges: &[(Element, Element)]) -> Self {
        let mut s = Structure::new(Vocabulary::with(&[("E", 2)], &[]), universe);
        for &(a, b) in edges {
            s.add_fact("E", vec![a, b]).expect("edge inside universe");
        }
        s
    }

    /// Symmetric graph over `{E/2}`.
    pub fn graph(universe: impl IntoIterator<Item = Element>, edges: &[(Element, Element)]) -> Self {
        let sym: Vec<_> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        Self::digraph(universe, &sym)
    }

    /// Undirected path with `n` edges on elements `1..=n+1`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..=n as Element).map(|i| (i, i + 1)).collect();
        Self::graph(1..=(n as Element + 1), &edges)
    }

    /// Loop-free complete graph on `1..=n`.
    pub fn clique(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 1..=n as Element {
            for b in 1..=n as Element {
                if a != b {
                    edges.push((a, b));
                }
            }
        }
        Self::digraph(1..=n as Element, &edges)
    }

    pub fn add_element(&mut self, e: Element) {
        self.universe.insert(e);
    }

    pub fn add_fact(&mut self, name: &str, tuple: Vec<Element>) -> Result<()> {
        let arity = self.vocab.arity(name).ok_or_else(|| Error::Unknown(name.to_string()))?;
        if tuple.len() != arity {
            return Err(Error::Arity { name: name.to_string(), expected: arity, got: tuple.len() });
        }
        if let Some(&e) = tuple.iter().find(|e| !self.universe.contains(e)) {
            return Err(Error::OutsideUniverse(e));
        }
        self.relations.get_mut(name).expect("declared").insert(tuple);
        Ok(())
    }

    pub fn set_constant(&mut self, name: &str, e: Element) -> Result<()> {
        if !self.vocab.is_constant(name) {
            return Err(Error::Unknown(name.to_string()));
        }
        if !self.universe.contains(&e) {
            return Err(Error::OutsideUniverse(e));
        }
        self.constants.insert(name.to_string(), e);
        Ok(())
    }

    /// Checks that every constant is interpreted.
    pub fn validate(&self) -> Result<()> {
        for c in self.vocab.constants() {
            if !self.constants.contains_key(c) {
                return Err(Error::invalid(format!("constant {c} is not interpreted")));
            }
        }
        Ok(())
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn universe(&self) -> &BTreeSet<Element> {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn is_empty(&self) -> bool {
        self.universe.is_empty()
    }

    pub fn contains(&self, e: Element) -> bool {
        self.universe.contains(&e)
    }

    pub fn max_element(&self) -> Option<Element> {
        self.universe.iter().next_back().copied()
    }

    pub fn facts(&self, name: &str) -> Option<&BTreeSet<Vec<Element>>> {
        self.relations.get(name)
    }

    pub fn all_facts(&self) -> impl Iterator<Item = (&str, &Vec<Element>)> {
        self.relations.iter().flat_map(|(n, ts)| ts.iter().map(move |t| (n.as_str(), t)))
    }

    pub fn holds(&self, name: &str, tuple: &[Element]) -> bool {
        self.relations.get(name).is_some_and(|ts| ts.contains(tuple))
    }

    pub fn constant(&self, name: &str) -> Option<Element> {
        self.constants.get(name).copied()
    }

    /// Constant interpretations in vocabulary order.
    pub fn constant_values(&self) -> Vec<Element> {
        self.vocab.constants().iter().map(|c| self.constants[c]).collect()
    }

    pub fn fact_count(&self) -> usize {
        self.relations.values().map(|s| s.len()).sum()
    }

    /// Copy over a different (super- or sub-) vocabulary: facts and
    /// constants of symbols absent from `vocab` are dropped.
    pub fn with_vocabulary(&self, vocab: Vocabulary) -> Result<Structure> {
        let mut out = Structure::new(vocab.clone(), self.universe.iter().copied());
        for (name, ts) in &self.relations {
            if let Some(a) = vocab.arity(name) {
                for t in ts {
                    if t.len() != a {
                        return Err(Error::Arity { name: name.clone(), expected: a, got: t.len() });
                    }
                    out.add_fact(name, t.clone())?;
                }
            }
        }
        for (c, &e) in &self.constants {
            if vocab.is_constant(c) {
                out.set_constant(c, e)?;
            }
        }
        Ok(out)
    }

    pub fn pointed(self, tuple: Vec<Element>) -> Result<PointedStructure> {
        PointedStructure::new(self, tuple)
    }

    pub fn unpointed(self) -> PointedStructure {
        PointedStructure { structure: self, tuple: Vec::new() }
    }
}

/// A structure with a distinguished tuple (repetitions allowed).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointedStructure {
    pub structure: Structure,
    pub tuple: Vec<Element>,
}

impl PointedStructure {
    pub fn new(structure: Structure, tuple: Vec<Element>) -> Result<Self> {
        if let Some(&e) = tuple.iter().find(|e| !structure.contains(**e)) {
            return Err(Error::OutsideUniverse(e));
        }
        Ok(PointedStructure { structure, tuple })
    }
}

/// A finite map between element ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ElementMap {
    pub mapping: BTreeMap<Element, Element>,
}

impl ElementMap {
    pub fn get(&self, e: Element) -> Option<Element> {
        self.mapping.get(&e).copied()
    }

    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<_> = self.mapping.values().collect();
        image.len() == self.mapping.len()
    }
}

impl FromIterator<(Element, Element)> for ElementMap {
    fn from_iter<I: IntoIterator<Item = (Element, Element)>>(iter: I) -> Self {
        ElementMap { mapping: iter.into_iter().collect() }
    }
}
