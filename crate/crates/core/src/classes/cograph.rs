use super::label_predicate;
use crate::structures::{Structure, Vocabulary};
use crate::treerep::{NodeId, Tree};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Cotree labels: leaves `leaf:i:σ` (part i ≥ 1, letter σ), internal nodes
/// `fn:<bits>` with an n×n symmetric table in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CotreeLabel {
    Leaf { part: usize, letter: String },
    Fn { n: usize, bits: Vec<bool> },
}

impl CotreeLabel {
    /// f(i, j) for 1-based parts.
    pub fn adjacent(&self, i: usize, j: usize) -> Result<bool> {
        match self {
            CotreeLabel::Fn { n, bits } if (1..=*n).contains(&i) && (1..=*n).contains(&j) => Ok(bits[(i - 1) * n + (j - 1)]),
            CotreeLabel::Fn { n, .. } => Err(Error::invalid(format!("parts ({i},{j}) outside a {n}x{n} table"))),
            CotreeLabel::Leaf { .. } => Err(Error::invalid("leaf labels carry no adjacency table")),
        }
    }
}

pub fn parse_cotree_label(s: &str) -> Result<CotreeLabel> {
    if let Some(rest) = s.strip_prefix("leaf:") {
        let (part, letter) = rest.split_once(':').ok_or_else(|| Error::invalid(format!("{s:?}: expected leaf:i:σ")))?;
        let part: usize = part.parse().map_err(|_| Error::invalid(format!("{s:?}: part must be a positive integer")))?;
        if part == 0 || letter.is_empty() {
            return Err(Error::invalid(format!("{s:?}: parts start at 1 and letters are non-empty")));
        }
        return Ok(CotreeLabel::Leaf { part, letter: letter.to_string() });
    }
    if let Some(rest) = s.strip_prefix("fn:") {
        let bits: Vec<bool> = rest
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("{s:?}: table bits are 0 or 1"))),
            })
            .collect::<Result<_>>()?;
        let n = (bits.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != bits.len() {
            return Err(Error::invalid(format!("{s:?}: table length is not a positive square")));
        }
        if (0..n).any(|i| (0..n).any(|j| bits[i * n + j] != bits[j * n + i])) {
            return Err(Error::invalid(format!("{s:?}: table is not symmetric")));
        }
        return Ok(CotreeLabel::Fn { n, bits });
    }
    Err(Error::invalid(format!("{s:?} is not a cotree label")))
}

pub(crate) fn feasible(t: &Tree) -> Result<()> {
    for n in 0..t.len() {
        match (parse_cotree_label(t.label(n))?, t.is_leaf(n)) {
            (CotreeLabel::Leaf { .. }, true) | (CotreeLabel::Fn { .. }, false) => {}
            _ => return Err(Error::invalid(format!("node {n}: leaf labels go on leaves, tables on internal nodes"))),
        }
    }
    Ok(())
}

fn gca(t: &Tree, u: NodeId, v: NodeId) -> NodeId {
    let mut x = u;
    while !t.is_ancestor(x, v) {
        x = t.parent(x).expect("root is an ancestor of everything");
    }
    x
}

/// The labelled graph on the leaves: `E` per the table at the greatest
/// common ancestor, part predicates `P_i`, letter predicates `L_σ`.
/// Vocabulary comes from `alphabet` (all labels of the enclosing tree).
pub(crate) fn str_cograph(t: &Tree, alphabet: &BTreeSet<String>) -> Result<Structure> {
    feasible(t)?;
    let (mut parts, mut letters) = (BTreeSet::new(), BTreeSet::new());
    for l in alphabet {
        if let CotreeLabel::Leaf { part, letter } = parse_cotree_label(l)? {
            parts.insert(part);
            letters.insert(letter);
        }
    }
    let mut vocab = Vocabulary::new();
    vocab.add_relation("E", 2)?;
    for p in &parts {
        vocab.add_relation(&format!("P_{p}"), 1)?;
    }
    for l in &letters {
        vocab.add_relation(&label_predicate(l), 1)?;
    }
    let leaves = t.leaves();
    let mut info = BTreeMap::new();
    let mut g = Structure::new(vocab, leaves.iter().map(|&n| t.origin(n)));
    for &n in &leaves {
        let CotreeLabel::Leaf { part, letter } = parse_cotree_label(t.label(n))? else { unreachable!() };
        g.add_fact(&format!("P_{part}"), vec![t.origin(n)])?;
        g.add_fact(&label_predicate(&letter), vec![t.origin(n)])?;
        info.insert(n, part);
    }
    for (x, &u) in leaves.iter().enumerate() {
        for &v in &leaves[x + 1..] {
            if parse_cotree_label(t.label(gca(t, u, v)))?.adjacent(info[&u], info[&v])? {
                g.add_fact("E", vec![t.origin(u), t.origin(v)])?;
                g.add_fact("E", vec![t.origin(v), t.origin(u)])?;
            }
        }
    }
    Ok(g)
}

/// The n-partite cograph represented by a cotree.
pub fn cotree_to_graph(t: &Tree) -> Result<Structure> {
    str_cograph(t, &t.labels())
}
