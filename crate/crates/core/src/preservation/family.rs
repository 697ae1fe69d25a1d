use crate::classes::word_to_structure_over;
use crate::logic::{models_with, Formula};
use crate::structures::{find_embedding, Element, PointedStructure, Structure, Vocabulary};
use crate::{Caps, Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Generator classes understood by [`Family::generate`].
pub const CLASS_NAMES: &[&str] =
    &["graphs", "digraphs", "paths", "path_unions[:c]", "linear_orders", "unary[:r]", "words:<letters>"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Class {
    Graphs,
    Digraphs,
    Paths,
    PathUnions(Option<usize>),
    LinearOrders,
    Unary(usize),
    Words(BTreeSet<char>),
}

#[derive(Debug, Clone)]
enum Source {
    Explicit(Vec<Structure>),
    Generated { class: Class, max_size: usize },
    Union(Vec<Family>),
}

/// A finite slice of an isomorphism-closed class: its members, a membership
/// test for arbitrary structures, and an optional sentence `V` conjoined to
/// membership ("modulo V").
#[derive(Debug, Clone)]
pub struct Family {
    name: String,
    source: Source,
    members: Vec<Structure>,
    modulo: Option<Formula>,
    caps: Caps,
}

fn symmetric_irreflexive(s: &Structure) -> bool {
    s.facts("E").into_iter().flatten().all(|t| t[0] != t[1] && s.holds("E", &[t[1], t[0]]))
}

fn neighbours(s: &Structure) -> BTreeMap<Element, BTreeSet<Element>> {
    let mut adj: BTreeMap<Element, BTreeSet<Element>> = s.universe().iter().map(|&e| (e, BTreeSet::new())).collect();
    for t in s.facts("E").into_iter().flatten() {
        adj.get_mut(&t[0]).unwrap().insert(t[1]);
    }
    adj
}

/// Components of a symmetric graph if it is a forest of paths, else `None`.
fn path_components(s: &Structure) -> Option<usize> {
    let adj = neighbours(s);
    if adj.values().any(|n| n.len() > 2) {
        return None;
    }
    let edges: usize = adj.values().map(BTreeSet::len).sum::<usize>() / 2;
    let mut seen = BTreeSet::new();
    let mut components = 0;
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            stack.extend(adj[&v].iter().filter(|w| seen.insert(**w)));
        }
    }
    // A forest has exactly |V| − #components edges.
    (edges + components == s.size()).then_some(components)
}

fn is_linear_order(s: &Structure) -> bool {
    let u: Vec<Element> = s.universe().iter().copied().collect();
    u.iter().all(|&x| {
        s.holds("Le", &[x, x])
            && u.iter().all(|&y| {
                (x == y || s.holds("Le", &[x, y]) != s.holds("Le", &[y, x]))
                    && u.iter().all(|&z| !(s.holds("Le", &[x, y]) && s.holds("Le", &[y, z])) || s.holds("Le", &[x, z]))
            })
    })
}

impl Class {
    fn parse(name: &str) -> Result<Self> {
        if let Some(letters) = name.strip_prefix("words:") {
            if letters.is_empty() {
                return Err(Error::invalid("words need at least one letter"));
            }
            return Ok(Class::Words(letters.chars().collect()));
        }
        let (base, param) = match name.split_once(':') {
            Some((b, p)) => (b, Some(p.parse::<usize>().map_err(|_| Error::invalid(format!("bad class parameter in {name}")))?)),
            None => (name, None),
        };
        Ok(match (base, param) {
            ("graphs", None) => Class::Graphs,
            ("digraphs", None) => Class::Digraphs,
            ("paths", None) => Class::Paths,
            ("path_unions", c) => Class::PathUnions(c),
            ("linear_orders", None) => Class::LinearOrders,
            ("unary", r) => Class::Unary(r.unwrap_or(1)),
            _ => return Err(Error::Unknown(name.to_string())),
        })
    }

    fn vocabulary(&self) -> Vocabulary {
        match self {
            Class::LinearOrders => Vocabulary::with(&[("Le", 2)], &[]),
            Class::Unary(1) => Vocabulary::with(&[("P", 1)], &[]),
            Class::Unary(r) => {
                let names: Vec<String> = (1..=*r).map(|i| format!("P_{i}")).collect();
                Vocabulary::with(&names.iter().map(|n| (n.as_str(), 1)).collect::<Vec<_>>(), &[])
            }
            Class::Words(letters) => word_to_structure_over("", letters).expect("valid alphabet").vocabulary().clone(),
            _ => Vocabulary::with(&[("E", 2)], &[]),
        }
    }

    fn size_limit(&self) -> usize {
        match self {
            Class::Graphs => 6,
            Class::Digraphs => 4,
            Class::Words(letters) => match letters.len() {
                1 => 24,
                2 => 12,
                _ => 6,
            },
            _ => 12,
        }
    }

    fn contains(&self, s: &Structure) -> bool {
        if s.vocabulary() != &self.vocabulary() || s.is_empty() {
            return false;
        }
        match self {
            Class::Graphs => symmetric_irreflexive(s),
            Class::Digraphs | Class::Unary(_) => true,
            Class::Paths => symmetric_irreflexive(s) && path_components(s) == Some(1),
            Class::PathUnions(c) => {
                symmetric_irreflexive(s) && path_components(s).is_some_and(|n| c.is_none_or(|c| n <= c))
            }
            Class::LinearOrders => is_linear_order(s),
            Class::Words(_) => {
                let labels: Vec<String> = s.vocabulary().relations().filter(|(_, k)| *k == 1).map(|(r, _)| r.to_string()).collect();
                is_linear_order(s) && s.universe().iter().all(|&e| labels.iter().filter(|l| s.holds(l, &[e])).count() == 1)
            }
        }
    }

    /// One representative per isomorphism type, sizes `1..=n`.
    fn generate(&self, n: usize) -> Vec<Structure> {
        let mut out = Vec::new();
        for size in 1..=n {
            let u: Vec<Element> = (1..=size as Element).collect();
            match self {
                Class::Graphs => {
                    let pairs: Vec<(Element, Element)> =
                        u.iter().flat_map(|&a| u.iter().filter(move |&&b| a < b).map(move |&b| (a, b))).collect();
                    out.extend(canonical_masks(size, &pairs).into_iter().map(|m| Structure::graph(u.clone(), &pick(&pairs, m))));
                }
                Class::Digraphs => {
                    let pairs: Vec<(Element, Element)> = u.iter().flat_map(|&a| u.iter().map(move |&b| (a, b))).collect();
                    out.extend(canonical_masks(size, &pairs).into_iter().map(|m| Structure::digraph(u.clone(), &pick(&pairs, m))));
                }
                Class::Paths => out.push(Structure::path(size - 1)),
                Class::PathUnions(c) => {
                    for parts in partitions(size, size) {
                        if c.is_none_or(|c| parts.len() <= c) {
                            out.push(path_union(&parts));
                        }
                    }
                }
                Class::LinearOrders => {
                    let mut s = Structure::new(self.vocabulary(), u.iter().copied());
                    for &a in &u {
                        for &b in u.iter().filter(|&&b| b >= a) {
                            s.add_fact("Le", vec![a, b]).unwrap();
                        }
                    }
                    out.push(s);
                }
                Class::Words(letters) => {
                    let letters: Vec<char> = letters.iter().copied().collect();
                    let alphabet: BTreeSet<char> = letters.iter().copied().collect();
                    let mut word = vec![0usize; size];
                    loop {
                        let w: String = word.iter().map(|&i| letters[i]).collect();
                        out.push(word_to_structure_over(&w, &alphabet).expect("letters in the alphabet"));
                        let Some(i) = (0..size).rev().find(|&i| word[i] + 1 < letters.len()) else { break };
                        word[i] += 1;
                        word[i + 1..].iter_mut().for_each(|x| *x = 0);
                    }
                }
                Class::Unary(r) => {
                    let vocab = self.vocabulary();
                    let names: Vec<String> = vocab.relations().map(|(n, _)| n.to_string()).collect();
                    // Non-decreasing colour sequences = multisets of colours.
                    let colours = 1usize << r;
                    let mut seq = vec![0usize; size];
                    loop {
                        let mut s = Structure::new(vocab.clone(), u.iter().copied());
                        for (e, &c) in u.iter().zip(&seq) {
                            for (bit, name) in names.iter().enumerate() {
                                if c >> bit & 1 == 1 {
                                    s.add_fact(name, vec![*e]).unwrap();
                                }
                            }
                        }
                        out.push(s);
                        let Some(i) = (0..size).rev().find(|&i| seq[i] + 1 < colours) else { break };
                        let v = seq[i] + 1;
                        seq[i..].iter_mut().for_each(|x| *x = v);
                    }
                }
            }
        }
        out
    }
}

/// Edge masks over `slots` that no vertex permutation maps to a smaller
/// mask: one per isomorphism type. Undirected slots match either orientation.
fn canonical_masks(n: usize, slots: &[(Element, Element)]) -> Vec<u64> {
    let index: BTreeMap<(Element, Element), usize> = slots.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    let remap: Vec<Vec<usize>> = permutations(n)
        .iter()
        .map(|p| {
            slots
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (p[a as usize - 1] as Element + 1, p[b as usize - 1] as Element + 1);
                    index.get(&(x, y)).or_else(|| index.get(&(y, x))).copied().unwrap()
                })
                .collect()
        })
        .collect();
    (0..1u64 << slots.len())
        .filter(|&mask| {
            remap.iter().all(|r| {
                let img = (0..slots.len()).filter(|&i| mask >> i & 1 == 1).fold(0u64, |acc, i| acc | 1 << r[i]);
                img >= mask
            })
        })
        .collect()
}

fn pick(slots: &[(Element, Element)], mask: u64) -> Vec<(Element, Element)> {
    slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| *p).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            p.swap(j, k - 1);
        }
    }
    heap(n, &mut p, &mut out);
    out
}

/// Non-increasing partitions of `n` with parts at most `max`.
fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Disjoint union of paths with the given vertex counts, ids `1..`.
pub fn path_union(parts: &[usize]) -> Structure {
    let total: usize = parts.iter().sum();
    let mut edges = Vec::new();
    let mut next = 1;
    for &p in parts {
        for i in 0..p.saturating_sub(1) {
            edges.push((next + i as Element, next + i as Element + 1));
        }
        next += p as Element;
    }
    Structure::graph(1..=total as Element, &edges)
}

/// Same isomorphism type, pins included.
pub fn isomorphic(a: &PointedStructure, b: &PointedStructure) -> Result<bool> {
    if a.structure.size() != b.structure.size()
        || a.structure.fact_count() != b.structure.fact_count()
        || a.structure.vocabulary() != b.structure.vocabulary()
        || a.tuple.len() != b.tuple.len()
    {
        return Ok(false);
    }
    Ok(find_embedding(a, b)?.is_some())
}

impl Family {
    /// Explicit members sharing one vocabulary; membership is isomorphism to a member.
    pub fn explicit(members: Vec<Structure>) -> Result<Self> {
        if let Some(first) = members.first() {
            if members.iter().any(|m| m.vocabulary() != first.vocabulary()) {
                return Err(Error::VocabularyMismatch("family members differ in vocabulary".into()));
            }
        }
        Ok(Family {
            name: "explicit".into(),
            source: Source::Explicit(members.clone()),
            members,
            modulo: None,
            caps: Caps::default(),
        })
    }

    /// Members of a named class (see [`CLASS_NAMES`]) up to `max_size`,
    /// one per isomorphism type.
    pub fn generate(class: &str, max_size: usize) -> Result<Self> {
        let name = format!("{class}/{max_size}");
        let class = Class::parse(class)?;
        if max_size > class.size_limit() {
            return Err(Error::cap("family size bound", max_size, class.size_limit()));
        }
        let members = class.generate(max_size);
        Ok(Family { name, source: Source::Generated { class, max_size }, members, modulo: None, caps: Caps::default() })
    }

    /// Members of either family; membership in either.
    pub fn union(self, other: Family) -> Result<Self> {
        if let (Some(a), Some(b)) = (self.vocabulary(), other.vocabulary()) {
            if a != b {
                return Err(Error::VocabularyMismatch("union of families over different vocabularies".into()));
            }
        }
        let mut members = self.members.clone();
        for m in other.members() {
            let p = m.clone().unpointed();
            let mut dup = false;
            for x in &members {
                if isomorphic(&x.clone().unpointed(), &p)? {
                    dup = true;
                    break;
                }
            }
            if !dup {
                members.push(m.clone());
            }
        }
        members.sort_by_key(Structure::size);
        let caps = self.caps;
        Ok(Family {
            name: format!("{}+{}", self.name, other.name),
            source: Source::Union(vec![self, other]),
            members,
            modulo: None,
            caps,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Largest size up to which the members are complete.
    pub fn max_size(&self) -> usize {
        match &self.source {
            Source::Generated { max_size, .. } => *max_size,
            Source::Explicit(ms) => ms.iter().map(Structure::size).max().unwrap_or(0),
            Source::Union(fs) => fs.iter().map(Family::max_size).min().unwrap_or(0),
        }
    }

    /// Restricts the family to models of the sentence `v`.
    pub fn modulo(mut self, v: Formula) -> Result<Self> {
        if !v.is_sentence() {
            return Err(Error::invalid("modulo needs a sentence"));
        }
        let mut kept = Vec::new();
        for m in std::mem::take(&mut self.members) {
            if models_with(&m, &v, &self.caps)? {
                kept.push(m);
            }
        }
        self.members = kept;
        self.name = format!("{} mod {v}", self.name);
        self.modulo = Some(v);
        Ok(self)
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        if let Source::Union(fs) = &mut self.source {
            fs.iter_mut().for_each(|f| f.caps = caps);
        }
        self
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn members(&self) -> &[Structure] {
        &self.members
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.members.first().map(Structure::vocabulary)
    }

    /// Membership of an arbitrary structure in the underlying class (and `V`).
    /// Generated families test the class at any size; the size bound only
    /// limits enumeration.
    pub fn contains(&self, s: &Structure) -> Result<bool> {
        let base = match &self.source {
            Source::Generated { class, .. } => class.contains(s),
            Source::Explicit(ms) => {
                let p = s.clone().unpointed();
                let mut found = false;
                for m in ms {
                    if isomorphic(&m.clone().unpointed(), &p)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Source::Union(fs) => {
                let mut found = false;
                for f in fs {
                    if f.contains(s)? {
                        found = true;
                        break;
                    }
                }
                found
            }
        };
        match (&self.modulo, base) {
            (Some(v), true) => models_with(s, v, &self.caps),
            _ => Ok(base),
        }
    }
}
