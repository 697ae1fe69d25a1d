use super::{Element, Structure};
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone)]
enum Rel {
    Unary(Vec<bool>),
    Binary(Vec<bool>),
    General(HashSet<Vec<u32>>),
}

/// Index-based view of a structure: elements become `0..n` in ascending id
/// order, relations are addressed by their position in the vocabulary.
#[derive(Debug, Clone)]
pub struct Dense {
    n: usize,
    elements: Vec<Element>,
    index: HashMap<Element, u32>,
    names: Vec<String>,
    arities: Vec<usize>,
    rels: Vec<Rel>,
    constants: Vec<u32>,
}

impl Dense {
    pub fn new(s: &Structure) -> Self {
        let elements: Vec<Element> = s.universe().iter().copied().collect();
        let n = elements.len();
        let index: HashMap<Element, u32> = elements.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
        let mut names = Vec::new();
        let mut arities = Vec::new();
        let mut rels = Vec::new();
        for (name, arity) in s.vocabulary().relations() {
            let facts = s.facts(name).into_iter().flatten();
            let rel = match arity {
                1 => {
                    let mut v = vec![false; n];
                    for t in facts {
                        v[index[&t[0]] as usize] = true;
                    }
                    Rel::Unary(v)
                }
                2 => {
                    let mut v = vec![false; n * n];
                    for t in facts {
                        v[index[&t[0]] as usize * n + index[&t[1]] as usize] = true;
                    }
                    Rel::Binary(v)
                }
                _ => Rel::General(facts.map(|t| t.iter().map(|e| index[e]).collect()).collect()),
            };
            names.push(name.to_string());
            arities.push(arity);
            rels.push(rel);
        }
        let constants = s.constant_values().iter().map(|e| index[e]).collect();
        Dense { n, elements, index, names, arities, rels, constants }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn element(&self, i: u32) -> Element {
        self.elements[i as usize]
    }

    pub fn index_of(&self, e: Element) -> Option<u32> {
        self.index.get(&e).copied()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn relation_count(&self) -> usize {
        self.rels.len()
    }

    pub fn arity(&self, r: usize) -> usize {
        self.arities[r]
    }

    pub fn constants(&self) -> &[u32] {
        &self.constants
    }

    #[inline]
    pub fn holds(&self, r: usize, args: &[u32]) -> bool {
        match &self.rels[r] {
            Rel::Unary(v) => v[args[0] as usize],
            Rel::Binary(v) => v[args[0] as usize * self.n + args[1] as usize],
            Rel::General(s) => s.contains(args),
        }
    }

    #[inline]
    pub fn holds1(&self, r: usize, a: u32) -> bool {
        match &self.rels[r] {
            Rel::Unary(v) => v[a as usize],
            _ => self.holds(r, &[a]),
        }
    }

    #[inline]
    pub fn holds2(&self, r: usize, a: u32, b: u32) -> bool {
        match &self.rels[r] {
            Rel::Binary(v) => v[a as usize * self.n + b as usize],
            _ => self.holds(r, &[a, b]),
        }
    }
}
