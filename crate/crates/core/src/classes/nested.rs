use super::{letter_predicate, word_vocab, NESTING, ORDER};
use crate::structures::Structure;
use crate::treerep::{Shape, Tree};
use crate::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub const CONCAT: &str = "∘";

/// A word with a non-crossing forward matching. Positions are 1-based and
/// edges are kept sorted by call position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NestedWord {
    letters: Vec<char>,
    edges: Vec<(usize, usize)>,
}

fn letter_ok(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '∘')
}

impl NestedWord {
    pub fn new(letters: Vec<char>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = letters.len();
        if let Some(c) = letters.iter().find(|c| !letter_ok(**c)) {
            return Err(Error::invalid(format!("{c:?} cannot be a nested-word letter")));
        }
        edges.sort_unstable();
        let mut used = vec![false; n + 1];
        for &(i, j) in &edges {
            if !(1 <= i && i < j && j <= n) {
                return Err(Error::invalid(format!("edge ({i},{j}) is not a forward edge within 1..{n}")));
            }
            for p in [i, j] {
                if std::mem::replace(&mut used[p], true) {
                    return Err(Error::invalid(format!("position {p} lies on two edges")));
                }
            }
        }
        for (x, &(i1, j1)) in edges.iter().enumerate() {
            for &(i2, j2) in &edges[x + 1..] {
                if i2 < j1 && j1 < j2 {
                    return Err(Error::invalid(format!("edges ({i1},{j1}) and ({i2},{j2}) cross")));
                }
            }
        }
        Ok(NestedWord { letters, edges })
    }

    /// A plain word with no nesting edges.
    pub fn word(s: &str) -> Result<Self> {
        NestedWord::new(s.chars().collect(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn call_at(&self, i: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.0 == i).map(|e| e.1)
    }

    /// `u ↑_e v`: v's positions placed right after position `e` of u.
    pub fn insert(&self, e: usize, v: &NestedWord) -> Result<NestedWord> {
        if e < 1 || e > self.len() {
            return Err(Error::invalid(format!("position {e} outside 1..{}", self.len())));
        }
        let k = v.len();
        let shift = |p: usize| if p <= e { p } else { p + k };
        let mut letters = self.letters[..e].to_vec();
        letters.extend(&v.letters);
        letters.extend(&self.letters[e..]);
        let mut edges: Vec<_> = self.edges.iter().map(|&(i, j)| (shift(i), shift(j))).collect();
        edges.extend(v.edges.iter().map(|&(i, j)| (i + e, j + e)));
        NestedWord::new(letters, edges)
    }

    /// `u · v`, the insert at the last position (empty u gives v).
    pub fn concat(&self, v: &NestedWord) -> Result<NestedWord> {
        if self.is_empty() {
            return Ok(v.clone());
        }
        self.insert(self.len(), v)
    }

    /// Linear order `Le`, letter predicates over the word's own letters, `Nest`.
    pub fn to_structure(&self) -> Result<Structure> {
        self.to_structure_over(&self.letters.iter().copied().collect())
    }

    pub fn to_structure_over(&self, alphabet: &BTreeSet<char>) -> Result<Structure> {
        if let Some(c) = self.letters.iter().find(|c| !alphabet.contains(c)) {
            return Err(Error::invalid(format!("letter {c:?} outside the alphabet")));
        }
        let n = self.len() as u32;
        let mut s = Structure::new(word_vocab(alphabet, true)?, 1..=n);
        for i in 1..=n {
            for j in i..=n {
                s.add_fact(ORDER, vec![i, j])?;
            }
            s.add_fact(&letter_predicate(self.letters[i as usize - 1]), vec![i])?;
        }
        for &(i, j) in &self.edges {
            s.add_fact(NESTING, vec![i as u32, j as u32])?;
        }
        Ok(s)
    }
}

impl fmt::Display for NestedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "letters: {}", self.letters.iter().collect::<String>())?;
        write!(f, "edges:")?;
        for (i, j) in &self.edges {
            write!(f, " ({i},{j})")?;
        }
        writeln!(f)
    }
}

impl FromStr for NestedWord {
    type Err = Error;

    /// `letters: abaabba` then `edges: (2,6) (4,5)`; the edges line may be omitted.
    fn from_str(text: &str) -> Result<Self> {
        let mut letters = None;
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let syntax = |col: usize, msg: &str| Error::Syntax { line: i + 1, col, msg: msg.into() };
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if let Some(rest) = t.strip_prefix("letters:") {
                letters = Some(rest.trim().chars().collect::<Vec<char>>());
            } else if let Some(rest) = t.strip_prefix("edges:") {
                let cleaned: String = rest.chars().filter(|c| !c.is_whitespace()).collect();
                let mut body = cleaned.as_str();
                while !body.is_empty() {
                    let inner = body.strip_prefix('(').ok_or_else(|| syntax(1, "expected '('"))?;
                    let close = inner.find(')').ok_or_else(|| syntax(1, "expected ')'"))?;
                    let (a, b) = inner[..close].split_once(',').ok_or_else(|| syntax(1, "expected 'i,j'"))?;
                    let num = |s: &str| s.parse::<usize>().map_err(|_| syntax(1, "edge endpoints are positive integers"));
                    edges.push((num(a)?, num(b)?));
                    body = &inner[close + 1..];
                }
            } else {
                return Err(syntax(1, "expected 'letters:' or 'edges:'"));
            }
        }
        let letters = letters.ok_or_else(|| Error::Syntax { line: 1, col: 1, msg: "missing 'letters:' line".into() })?;
        NestedWord::new(letters, edges)
    }
}

fn pair_label(a: char, b: char) -> String {
    format!("({a},{b})")
}

fn parse_pair(label: &str) -> Option<(char, char)> {
    let cs: Vec<char> = label.chars().collect();
    match cs.as_slice() {
        ['(', a, ',', b, ')'] if letter_ok(*a) && letter_ok(*b) => Some((*a, *b)),
        _ => None,
    }
}

fn parse_letter(label: &str) -> Option<char> {
    let mut cs = label.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) if letter_ok(c) => Some(c),
        _ => None,
    }
}

/// Letters mentioned by a tree label of the nested-word alphabets.
pub(crate) fn label_letters(label: &str) -> Result<Vec<char>> {
    if label == CONCAT {
        return Ok(Vec::new());
    }
    if let Some(c) = parse_letter(label) {
        return Ok(vec![c]);
    }
    if let Some((a, b)) = parse_pair(label) {
        return Ok(vec![a, b]);
    }
    Err(Error::invalid(format!("{label:?} is not a nested-word tree label")))
}

fn factors(w: &NestedWord, lo: usize, hi: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    let mut i = lo;
    while i <= hi {
        let a = w.letters[i - 1];
        match w.call_at(i) {
            Some(j) => {
                let inner = factors(w, i + 1, j - 1);
                let label = pair_label(a, w.letters[j - 1]);
                out.push(match inner.len() {
                    0 => Shape::leaf(label),
                    1 => Shape::node(label, inner),
                    _ => Shape::node(label, vec![Shape::node(CONCAT, inner)]),
                });
                i = j + 1;
            }
            None => {
                out.push(Shape::leaf(a.to_string()));
                i += 1;
            }
        }
    }
    out
}

/// Encodes a nested word: a letter is a leaf, an edge `(i,j)` is a node
/// labelled `(λ(i),λ(j))` over the encoding of its interior, and several
/// top-level factors hang below a `∘` root.
pub fn nested_word_to_tree(w: &NestedWord) -> Tree {
    let mut fs = factors(w, 1, w.len());
    match fs.len() {
        0 => Tree::empty(),
        1 => Tree::from_shape(fs.pop().unwrap()),
        _ => Tree::from_shape(Shape::node(CONCAT, fs)),
    }
}

fn decode(t: &Tree, n: usize, letters: &mut Vec<char>, edges: &mut Vec<(usize, usize)>) -> Result<()> {
    let label = t.label(n);
    let bad = || Error::invalid(format!("node {n} labelled {label:?} is not representation-feasible"));
    if t.is_leaf(n) {
        if let Some(c) = parse_letter(label) {
            letters.push(c);
        } else if let Some((a, b)) = parse_pair(label) {
            letters.extend([a, b]);
            edges.push((letters.len() - 1, letters.len()));
        } else {
            return Err(bad());
        }
        return Ok(());
    }
    if label == CONCAT {
        for &c in t.children(n) {
            decode(t, c, letters, edges)?;
        }
        return Ok(());
    }
    // A pair node wraps the concatenation of its children.
    let (a, b) = parse_pair(label).ok_or_else(bad)?;
    letters.push(a);
    let start = letters.len();
    for &c in t.children(n) {
        decode(t, c, letters, edges)?;
    }
    letters.push(b);
    edges.push((start, letters.len()));
    Ok(())
}

/// Inverse of [`nested_word_to_tree`] on representation-feasible trees.
pub fn tree_to_nested_word(t: &Tree) -> Result<NestedWord> {
    let (mut letters, mut edges) = (Vec::new(), Vec::new());
    if let Some(r) = t.root() {
        decode(t, r, &mut letters, &mut edges)?;
    }
    NestedWord::new(letters, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> NestedWord {
        NestedWord::new("abaabba".chars().collect(), vec![(2, 6), (4, 5)]).unwrap()
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(NestedWord::new("ab".chars().collect(), vec![(2, 1)]).is_err());
        assert!(NestedWord::new("abcd".chars().collect(), vec![(1, 3), (2, 4)]).is_err());
        assert!(NestedWord::new("abc".chars().collect(), vec![(1, 2), (2, 3)]).is_err());
        assert!(NestedWord::new("abcd".chars().collect(), vec![(1, 4), (2, 3)]).is_ok());
    }

    #[test]
    fn insert_and_concat() {
        let u = NestedWord::new("ab".chars().collect(), vec![(1, 2)]).unwrap();
        let c = NestedWord::word("c").unwrap();
        let r = u.insert(1, &c).unwrap();
        assert_eq!(r.letters(), &['a', 'c', 'b']);
        assert_eq!(r.edges(), &[(1, 3)]);
        assert_eq!(u.insert(1, &NestedWord::default()).unwrap(), u);
        assert_eq!(u.insert(2, &c).unwrap(), u.concat(&c).unwrap());
        assert!(u.insert(3, &c).is_err());
    }

    #[test]
    fn fixture_encoding() {
        let w = fixture();
        let t = nested_word_to_tree(&w);
        assert_eq!(t.to_string(), "∘\n  a\n  (b,b)\n    ∘\n      a\n      (a,b)\n  a\n");
        assert_eq!(tree_to_nested_word(&t).unwrap(), w);
        assert_eq!(w.to_structure().unwrap().facts(NESTING).unwrap().len(), 2);
    }

    #[test]
    fn small_encodings() {
        assert_eq!(nested_word_to_tree(&NestedWord::word("a").unwrap()).to_string(), "a\n");
        let ab = NestedWord::new("ab".chars().collect(), vec![(1, 2)]).unwrap();
        assert_eq!(nested_word_to_tree(&ab).to_string(), "(a,b)\n");
        assert!(tree_to_nested_word(&Tree::empty()).unwrap().is_empty());
        assert!(tree_to_nested_word(&crate::treerep::parse_tree("a\n  b\n").unwrap()).is_err());
        let wide = crate::treerep::parse_tree("(a,b)\n  c\n  d\n").unwrap();
        assert_eq!(tree_to_nested_word(&wide).unwrap(), NestedWord::new("acdb".chars().collect(), vec![(1, 4)]).unwrap());
    }

    #[test]
    fn text_format() {
        let w = fixture();
        assert_eq!(w.to_string(), "letters: abaabba\nedges: (2,6) (4,5)\n");
        assert_eq!(w.to_string().parse::<NestedWord>().unwrap(), w);
        assert!("edges: (1,2)".parse::<NestedWord>().is_err());
    }
}
