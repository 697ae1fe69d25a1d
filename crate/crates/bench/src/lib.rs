//! Inputs shared by the criterion benches.

use fmtk::classes::{nested_word_to_tree, NestedWord};
use fmtk::{Element, Structure, Tree, Vocabulary};

/// `p` elements labelled `P` followed by `q` unlabelled ones.
pub fn unary(p: usize, q: usize) -> Structure {
    let mut s = Structure::new(Vocabulary::with(&[("P", 1)], &[]), 1..=(p + q) as Element);
    for e in 1..=p as Element {
        s.add_fact("P", vec![e]).expect("declared relation");
    }
    s
}

/// The nested word `(ab)^n` with every `(a, b)` pair nested as one factor,
/// encoded as a tree.
pub fn nested_tree(n: usize) -> Tree {
    let letters: Vec<char> = "ab".repeat(n).chars().collect();
    let edges = (0..n).map(|i| (2 * i + 1, 2 * i + 2)).collect();
    nested_word_to_tree(&NestedWord::new(letters, edges).expect("well-nested"))
}
