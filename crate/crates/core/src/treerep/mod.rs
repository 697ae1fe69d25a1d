//! Labelled ordered trees, tree surgery, and type-driven pruning.
//!
//! Node ids are preorder positions (root = 0). Each node also carries an
//! origin id that survives surgery, so a pruned tree can be matched back to
//! the tree it came from.

mod reduce;

pub use reduce::{degree_reduce, height_reduce, reduce, OracleUse, Reduction, ReduceStats, RepresentationOracle, StrFn};

use crate::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

pub type NodeId = usize;

/// Recursive form used while rebuilding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub label: String,
    pub origin: u32,
    pub children: Vec<Shape>,
}

impl Shape {
    pub fn leaf(label: impl Into<String>) -> Shape {
        Shape { label: label.into(), origin: 0, children: Vec::new() }
    }

    pub fn node(label: impl Into<String>, children: Vec<Shape>) -> Shape {
        Shape { label: label.into(), origin: 0, children }
    }

    fn renumber(&mut self, next: &mut u32) {
        self.origin = *next;
        *next += 1;
        self.children.iter_mut().for_each(|c| c.renumber(next));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tree {
    label: Vec<String>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    origin: Vec<u32>,
    size: Vec<usize>,
}

impl Tree {
    pub fn empty() -> Tree {
        Tree::default()
    }

    /// Builds a tree whose origins are its preorder positions.
    pub fn from_shape(mut s: Shape) -> Tree {
        s.renumber(&mut 0);
        Tree::from_shape_keep(&s)
    }

    /// Builds a tree keeping the origins stored in `s`.
    pub fn from_shape_keep(s: &Shape) -> Tree {
        fn go(t: &mut Tree, s: &Shape, parent: Option<NodeId>) -> NodeId {
            let id = t.label.len();
            t.label.push(s.label.clone());
            t.parent.push(parent);
            t.children.push(Vec::new());
            t.origin.push(s.origin);
            t.size.push(1);
            for c in &s.children {
                let cid = go(t, c, Some(id));
                t.children[id].push(cid);
                t.size[id] += t.size[cid];
            }
            id
        }
        let mut t = Tree::empty();
        go(&mut t, s, None);
        t
    }

    pub fn leaf(label: impl Into<String>) -> Tree {
        Tree::from_shape(Shape::leaf(label))
    }

    pub fn shape(&self, n: NodeId) -> Shape {
        Shape {
            label: self.label[n].clone(),
            origin: self.origin[n],
            children: self.children[n].iter().map(|&c| self.shape(c)).collect(),
        }
    }

    /// The whole tree as a shape; `None` when empty.
    pub fn to_shape(&self) -> Option<Shape> {
        (!self.is_empty()).then(|| self.shape(0))
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn root(&self) -> Option<NodeId> {
        (!self.is_empty()).then_some(0)
    }

    pub fn label(&self, n: NodeId) -> &str {
        &self.label[n]
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent[n]
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.children[n]
    }

    pub fn origin(&self, n: NodeId) -> u32 {
        self.origin[n]
    }

    pub fn node_by_origin(&self, o: u32) -> Option<NodeId> {
        self.origin.iter().position(|&x| x == o)
    }

    pub fn subtree_size(&self, n: NodeId) -> usize {
        self.size[n]
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.children[n].is_empty()
    }

    /// Reflexive: every node is its own ancestor. Uses preorder intervals.
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> bool {
        a <= b && b < a + self.size[a]
    }

    pub fn depth(&self, n: NodeId) -> usize {
        let mut d = 0;
        let mut x = n;
        while let Some(p) = self.parent[x] {
            d += 1;
            x = p;
        }
        d
    }

    /// Edges on the longest root-leaf path; 0 for empty and singleton trees.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|n| self.depth(n)).max().unwrap_or(0)
    }

    /// Largest number of children of any node.
    pub fn degree(&self) -> usize {
        self.children.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.label.iter().cloned().collect()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.len()).filter(|&n| self.is_leaf(n)).collect()
    }

    fn check(&self, n: NodeId) -> Result<()> {
        if n >= self.len() {
            return Err(Error::invalid(format!("unknown node {n}")));
        }
        Ok(())
    }

    fn check_non_root(&self, n: NodeId) -> Result<()> {
        self.check(n)?;
        if n == 0 {
            return Err(Error::invalid("operation needs a non-root node"));
        }
        Ok(())
    }

    fn max_origin(&self) -> u32 {
        self.origin.iter().copied().max().unwrap_or(0)
    }

    /// Renumbers `s` with origins past this tree's so copies stay distinguishable.
    fn fresh_copy(&self, s: &Tree) -> Result<Shape> {
        let mut sh = s.to_shape().ok_or_else(|| Error::invalid("empty tree argument"))?;
        sh.renumber(&mut (self.max_origin() + 1));
        Ok(sh)
    }

    /// Rebuilds with node `a` replaced by `with` in its parent's child list.
    fn splice(&self, a: NodeId, with: &[Shape]) -> Tree {
        fn go(t: &Tree, n: NodeId, a: NodeId, with: &[Shape]) -> Shape {
            let mut children = Vec::new();
            for &c in &t.children[n] {
                if c == a {
                    children.extend(with.iter().cloned());
                } else {
                    children.push(go(t, c, a, with));
                }
            }
            Shape { label: t.label[n].clone(), origin: t.origin[n], children }
        }
        Tree::from_shape_keep(&go(self, 0, a, with))
    }

    /// Rebuilds with node `a`'s child list replaced by `keep` (a subsequence).
    pub(crate) fn with_children(&self, a: NodeId, keep: &[NodeId]) -> Tree {
        fn go(t: &Tree, n: NodeId, a: NodeId, keep: &[NodeId]) -> Shape {
            let kids: Vec<NodeId> = if n == a { keep.to_vec() } else { t.children[n].clone() };
            Shape { label: t.label[n].clone(), origin: t.origin[n], children: kids.iter().map(|&c| go(t, c, a, keep)).collect() }
        }
        Tree::from_shape_keep(&go(self, 0, a, keep))
    }

    /// The tree rooted at `root` keeping only the listed nodes (a set closed
    /// under descendants of every kept non-root node), origins preserved.
    pub(crate) fn restrict(&self, root: NodeId, nodes: &[NodeId]) -> Tree {
        let keep: std::collections::HashSet<NodeId> = nodes.iter().copied().collect();
        fn go(t: &Tree, n: NodeId, keep: &std::collections::HashSet<NodeId>) -> Shape {
            Shape {
                label: t.label[n].clone(),
                origin: t.origin[n],
                children: t.children[n].iter().filter(|c| keep.contains(c)).map(|&c| go(t, c, keep)).collect(),
            }
        }
        Tree::from_shape_keep(&go(self, root, &keep))
    }

    /// `t[t≥a ↦ t≥b]` for an ancestor `a` of `b`, keeping origins.
    pub(crate) fn promote(&self, a: NodeId, b: NodeId) -> Tree {
        if a == 0 {
            return self.subtree_at(b).unwrap();
        }
        self.splice(a, &[self.shape(b)])
    }

    /// `t≥a`, origins preserved.
    pub fn subtree_at(&self, a: NodeId) -> Result<Tree> {
        self.check(a)?;
        Ok(Tree::from_shape_keep(&self.shape(a)))
    }

    /// `t − t≥a`.
    pub fn delete_subtree(&self, a: NodeId) -> Result<Tree> {
        self.check_non_root(a)?;
        Ok(self.splice(a, &[]))
    }

    /// `t[t≥a ↦ s]`; the copy of `s` gets fresh origins.
    pub fn replace(&self, a: NodeId, s: &Tree) -> Result<Tree> {
        self.check_non_root(a)?;
        Ok(self.splice(a, &[self.fresh_copy(s)?]))
    }

    /// `t ⊙ s`: s's root children appended after t's. Both need size ≥ 2.
    pub fn merge(&self, s: &Tree) -> Result<Tree> {
        if self.len() < 2 || s.len() < 2 {
            return Err(Error::invalid("merge needs trees of size at least 2"));
        }
        if self.label[0] != s.label[0] {
            return Err(Error::invalid(format!("root labels differ: {} vs {}", self.label[0], s.label[0])));
        }
        let mut root = self.shape(0);
        root.children.extend(self.fresh_copy(s)?.children);
        Ok(Tree::from_shape_keep(&root))
    }

    /// `s` inserted as the next sibling of non-root `a`.
    pub fn join_right(&self, a: NodeId, s: &Tree) -> Result<Tree> {
        self.check_non_root(a)?;
        Ok(self.splice(a, &[self.shape(a), self.fresh_copy(s)?]))
    }

    /// `s` inserted as the previous sibling of non-root `a`.
    pub fn join_left(&self, a: NodeId, s: &Tree) -> Result<Tree> {
        self.check_non_root(a)?;
        Ok(self.splice(a, &[self.fresh_copy(s)?, self.shape(a)]))
    }

    /// `s` hung as the sole child of leaf `a`.
    pub fn join_below(&self, a: NodeId, s: &Tree) -> Result<Tree> {
        self.check(a)?;
        if !self.is_leaf(a) {
            return Err(Error::invalid("join_below needs a leaf"));
        }
        self.join_child(a, s)
    }

    /// `s` appended as the last child of any node `a` (unordered-tree join).
    pub fn join_child(&self, a: NodeId, s: &Tree) -> Result<Tree> {
        self.check(a)?;
        let copy = self.fresh_copy(s)?;
        let mut sh = self.shape(a);
        sh.children.push(copy);
        if a == 0 {
            return Ok(Tree::from_shape_keep(&sh));
        }
        Ok(self.splice(a, &[sh]))
    }

    /// Same shape and labels, ignoring origins.
    pub fn same_shape(&self, other: &Tree) -> bool {
        self.label == other.label && self.children == other.children
    }
}

/// Reads the indented tree format: one label per line, two spaces per level.
pub fn parse_tree(text: &str) -> Result<Tree> {
    // Open path from the root to the most recent node.
    let mut stack: Vec<Shape> = Vec::new();
    let fold = |stack: &mut Vec<Shape>, depth: usize| {
        while stack.len() > depth {
            let done = stack.pop().unwrap();
            stack.last_mut().unwrap().children.push(done);
        }
    };
    let mut seen_root = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        let err = |msg: &str| Err(Error::Syntax { line, col: indent + 1, msg: msg.into() });
        if raw[indent..].starts_with('\t') {
            return err("tabs are not allowed in indentation");
        }
        if indent % 2 != 0 {
            return err("indentation must be a multiple of two spaces");
        }
        let depth = indent / 2;
        if depth == 0 && seen_root {
            return err("a tree has exactly one root");
        }
        if depth > stack.len() {
            return err("indentation skips a level");
        }
        seen_root = true;
        fold(&mut stack, depth);
        stack.push(Shape::leaf(raw[indent..].trim_end()));
    }
    fold(&mut stack, 1);
    Ok(stack.pop().map(Tree::from_shape).unwrap_or_default())
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in 0..self.len() {
            writeln!(f, "{}{}", "  ".repeat(self.depth(n)), self.label[n])?;
        }
        Ok(())
    }
}
