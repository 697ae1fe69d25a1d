//! Concrete representation maps: words, unordered/ordered/ranked trees,
//! nested words and n-partite cographs.

mod cograph;
mod nested;

pub use cograph::{cotree_to_graph, parse_cotree_label, CotreeLabel};
pub use nested::{nested_word_to_tree, tree_to_nested_word, NestedWord};

use crate::structures::{is_identifier, Structure, Vocabulary};
use crate::treerep::{RepresentationOracle, Tree};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

pub const ORDER: &str = "Le";
pub const SIBLING: &str = "Sib";
pub const NESTING: &str = "Nest";

/// Injective map from arbitrary labels to identifier suffixes: ASCII
/// alphanumerics are kept, every other char becomes `_<hex>_`.
pub fn sanitize(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else {
            out.push_str(&format!("_{:x}_", c as u32));
        }
    }
    out
}

/// Unary predicate carrying a tree label.
pub fn label_predicate(label: &str) -> String {
    format!("L_{}", sanitize(label))
}

/// Unary predicate carrying a word letter: the letter itself when it is an
/// identifier, otherwise a sanitised `L_` name.
pub fn letter_predicate(c: char) -> String {
    let s = c.to_string();
    if is_identifier(&s) && s != ORDER && s != NESTING {
        s
    } else {
        label_predicate(&s)
    }
}

fn word_vocab(letters: &BTreeSet<char>, nesting: bool) -> Result<Vocabulary> {
    let mut v = Vocabulary::new();
    v.add_relation(ORDER, 2)?;
    if nesting {
        v.add_relation(NESTING, 2)?;
    }
    for &c in letters {
        v.add_relation(&letter_predicate(c), 1)?;
    }
    Ok(v)
}

/// Word structure over the letters of `w`: positions 1..|w|, reflexive `Le`.
pub fn word_to_structure(w: &str) -> Result<Structure> {
    word_to_structure_over(w, &w.chars().collect())
}

/// As [`word_to_structure`] but with a fixed alphabet, so words of different
/// content share one vocabulary.
pub fn word_to_structure_over(w: &str, alphabet: &BTreeSet<char>) -> Result<Structure> {
    let letters: Vec<char> = w.chars().collect();
    if let Some(c) = letters.iter().find(|c| !alphabet.contains(c)) {
        return Err(Error::invalid(format!("letter {c:?} outside the alphabet")));
    }
    let n = letters.len() as u32;
    let mut s = Structure::new(word_vocab(alphabet, false)?, 1..=n);
    for i in 1..=n {
        for j in i..=n {
            s.add_fact(ORDER, vec![i, j])?;
        }
        s.add_fact(&letter_predicate(letters[i as usize - 1]), vec![i])?;
    }
    Ok(s)
}

fn tree_vocab(alphabet: &BTreeSet<String>, sibling: bool) -> Result<Vocabulary> {
    let mut v = Vocabulary::new();
    v.add_relation(ORDER, 2)?;
    if sibling {
        v.add_relation(SIBLING, 2)?;
    }
    for l in alphabet {
        v.add_relation(&label_predicate(l), 1)?;
    }
    Ok(v)
}

fn labelled(t: &Tree, alphabet: &BTreeSet<String>, sibling: bool) -> Result<Structure> {
    let mut s = Structure::new(tree_vocab(alphabet, sibling)?, (0..t.len()).map(|n| t.origin(n)));
    for n in 0..t.len() {
        if !alphabet.contains(t.label(n)) {
            return Err(Error::invalid(format!("label {:?} outside the alphabet", t.label(n))));
        }
        s.add_fact(&label_predicate(t.label(n)), vec![t.origin(n)])?;
    }
    Ok(s)
}

/// Preorder linear order plus labels: the tree read as a word.
pub fn str_words(t: &Tree, alphabet: &BTreeSet<String>) -> Result<Structure> {
    let mut s = labelled(t, alphabet, false)?;
    for i in 0..t.len() {
        for j in i..t.len() {
            s.add_fact(ORDER, vec![t.origin(i), t.origin(j)])?;
        }
    }
    Ok(s)
}

/// Reflexive ancestor order plus labels; sibling order is forgotten.
pub fn str_unordered(t: &Tree, alphabet: &BTreeSet<String>) -> Result<Structure> {
    let mut s = labelled(t, alphabet, false)?;
    for a in 0..t.len() {
        for b in a..a + t.subtree_size(a) {
            s.add_fact(ORDER, vec![t.origin(a), t.origin(b)])?;
        }
    }
    Ok(s)
}

/// Ancestor order, labels, and `Sib`: the reflexive left-to-right order
/// among children of the same parent.
pub fn str_ordered(t: &Tree, alphabet: &BTreeSet<String>) -> Result<Structure> {
    let mut s = str_unordered(t, alphabet)?.with_vocabulary(tree_vocab(alphabet, true)?)?;
    for n in 0..t.len() {
        let kids = t.children(n);
        for i in 0..kids.len() {
            for j in i..kids.len() {
                s.add_fact(SIBLING, vec![t.origin(kids[i]), t.origin(kids[j])])?;
            }
        }
    }
    Ok(s)
}

/// Every internal node labelled σ has exactly ρ(σ) children.
pub fn check_ranked(t: &Tree, rho: &BTreeMap<String, usize>) -> bool {
    (0..t.len()).filter(|&n| !t.is_leaf(n)).all(|n| rho.get(t.label(n)) == Some(&t.children(n).len()))
}

fn any_tree(_: &Tree) -> Result<()> {
    Ok(())
}

fn str_nested(t: &Tree, alphabet: &BTreeSet<String>) -> Result<Structure> {
    let mut letters = BTreeSet::new();
    for l in alphabet {
        letters.extend(nested::label_letters(l)?);
    }
    tree_to_nested_word(t)?.to_structure_over(&letters)
}

fn nested_feasible(t: &Tree) -> Result<()> {
    tree_to_nested_word(t).map(|_| ())
}

pub const ORACLE_NAMES: [&str; 6] = ["words", "unordered", "ordered", "ranked", "nested", "cograph"];

/// The builtin representation maps with their favourability flags.
pub fn builtin_oracle(name: &str) -> Result<RepresentationOracle> {
    let base = RepresentationOracle {
        name: "",
        leaf_alphabet: "any label",
        internal_alphabet: "any label",
        str_fn: str_unordered,
        feasible: any_tree,
        node_elements: true,
        height_favourable: true,
        degree_favourable: true,
        min_rank: 0,
        closed_under_subtrees: true,
    };
    Ok(match name {
        "words" => RepresentationOracle { name: "words", str_fn: str_words, ..base },
        "unordered" => RepresentationOracle { name: "unordered", ..base },
        "ordered" => RepresentationOracle { name: "ordered", str_fn: str_ordered, degree_favourable: false, min_rank: 2, ..base },
        "ranked" => RepresentationOracle {
            name: "ranked",
            str_fn: str_ordered,
            degree_favourable: false,
            min_rank: 2,
            closed_under_subtrees: false,
            ..base
        },
        "nested" => RepresentationOracle {
            name: "nested",
            leaf_alphabet: "letters and (a,b) pairs",
            internal_alphabet: "(a,b) pairs and the concatenation mark",
            str_fn: str_nested,
            feasible: nested_feasible,
            node_elements: false,
            min_rank: 2,
            ..base
        },
        "cograph" => RepresentationOracle {
            name: "cograph",
            leaf_alphabet: "leaf:i:σ",
            internal_alphabet: "fn:<row-major bits>",
            str_fn: cograph::str_cograph,
            feasible: cograph::feasible,
            node_elements: false,
            ..base
        },
        _ => return Err(Error::Unknown(format!("oracle {name}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::find_embedding;
    use crate::treerep::parse_tree;

    #[test]
    fn words() {
        assert!(word_to_structure("").unwrap().is_empty());
        let ab = word_to_structure("ab").unwrap();
        assert_eq!(ab.facts(ORDER).unwrap().len(), 3);
        assert!(ab.holds("a", &[1]) && ab.holds("b", &[2]));
        assert!(word_to_structure_over("c", &['a'].into()).is_err());
    }

    #[test]
    fn unordered_forgets_sibling_order() {
        let t1 = parse_tree("r\n  a\n  b\n    c\n").unwrap();
        let t2 = parse_tree("r\n  b\n    c\n  a\n").unwrap();
        let al = t1.labels();
        let (s1, s2) = (str_unordered(&t1, &al).unwrap(), str_unordered(&t2, &al).unwrap());
        assert!(find_embedding(&s1.clone().unpointed(), &s2.clone().unpointed()).unwrap().is_some());
        let (o1, o2) = (str_ordered(&t1, &al).unwrap(), str_ordered(&t2, &al).unwrap());
        assert!(find_embedding(&o1.unpointed(), &o2.unpointed()).unwrap().is_none());
        let single = str_unordered(&Tree::leaf("x"), &["x".to_string()].into()).unwrap();
        assert_eq!(single.size(), 1);
        assert!(single.holds(ORDER, &[0, 0]));
    }

    #[test]
    fn ranked_check() {
        let rho: BTreeMap<String, usize> = [("f".to_string(), 2)].into();
        assert!(check_ranked(&parse_tree("f\n  a\n  f\n    b\n    c\n").unwrap(), &rho));
        assert!(!check_ranked(&parse_tree("f\n  a\n").unwrap(), &rho));
        assert!(check_ranked(&Tree::leaf("a"), &rho));
    }

    #[test]
    fn oracle_flags() {
        assert_eq!(builtin_oracle("unordered").unwrap().min_rank, 0);
        assert_eq!(builtin_oracle("ordered").unwrap().min_rank, 2);
        assert!(!builtin_oracle("ranked").unwrap().degree_favourable);
        assert!(builtin_oracle("nested").unwrap().degree_favourable);
        assert!(builtin_oracle("trees").is_err());
    }

    #[test]
    fn sanitize_is_injective_on_samples() {
        let labels = ["a_b", "a-b", "a b", "(a,b)", "∘", "a5f"];
        let out: BTreeSet<String> = labels.iter().map(|l| sanitize(l)).collect();
        assert_eq!(out.len(), labels.len());
    }
}
