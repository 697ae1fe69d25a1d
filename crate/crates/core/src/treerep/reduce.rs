use super::{NodeId, Tree};
use crate::equivalence::{equivalent, Logic, TypeContext, TypeId};
use crate::structures::{find_embedding_hinted, Dense, ElementMap, PointedStructure, Structure};
use crate::{Caps, Error, Result};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Maps a tree to a structure. The label set of the whole input tree is
/// passed so every pruned tree gets the same vocabulary.
pub type StrFn = fn(&Tree, &BTreeSet<String>) -> Result<Structure>;

#[derive(Clone)]
pub struct RepresentationOracle {
    pub name: &'static str,
    pub leaf_alphabet: &'static str,
    pub internal_alphabet: &'static str,
    pub str_fn: StrFn,
    /// Rejects trees that are not representation-feasible.
    pub feasible: fn(&Tree) -> Result<()>,
    /// Elements of `str` are node origins and `str` of a subtree (or of a
    /// root with a suffix of its children) is the induced substructure.
    /// Enables root pinning and typing over views of one structure.
    pub node_elements: bool,
    pub height_favourable: bool,
    pub degree_favourable: bool,
    pub min_rank: usize,
    pub closed_under_subtrees: bool,
}

impl std::fmt::Debug for RepresentationOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RepresentationOracle")
            .field("name", &self.name)
            .field("height_favourable", &self.height_favourable)
            .field("degree_favourable", &self.degree_favourable)
            .field("min_rank", &self.min_rank)
            .finish()
    }
}

impl RepresentationOracle {
    pub fn structure(&self, t: &Tree, alphabet: &BTreeSet<String>) -> Result<Structure> {
        (self.str_fn)(t, alphabet)
    }

    /// `Str(t)`, pinned at the root when elements are nodes.
    pub fn rooted(&self, t: &Tree, alphabet: &BTreeSet<String>) -> Result<PointedStructure> {
        let s = self.structure(t, alphabet)?;
        match t.root() {
            Some(r) if self.node_elements => s.pointed(vec![t.origin(r)]),
            _ => Ok(s.unpointed()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleUse {
    pub oracle: RepresentationOracle,
    pub m: usize,
    pub logic: Logic,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReduceStats {
    pub input_size: usize,
    pub output_size: usize,
    /// Node count after each splice; strictly decreasing.
    pub sizes: Vec<usize>,
    /// Distinct type vectors of rooted subtrees seen by height reduction.
    pub height_types: usize,
    /// Distinct type vectors of child-suffix trees seen by degree reduction.
    pub degree_types: usize,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub tree: Tree,
    pub stats: ReduceStats,
}

#[derive(Clone, Copy, PartialEq)]
enum Need {
    Height,
    Degree,
    Both,
}

type Snapshot = Vec<Option<(Structure, Dense)>>;

struct Engine<'a> {
    uses: &'a [OracleUse],
    caps: &'a Caps,
    alphabet: BTreeSet<String>,
    ctxs: Vec<TypeContext>,
    height_seen: HashSet<Vec<TypeId>>,
    degree_seen: HashSet<Vec<TypeId>>,
    sizes: Vec<usize>,
}

impl<'a> Engine<'a> {
    fn new(t: &Tree, uses: &'a [OracleUse], caps: &'a Caps, need: Need) -> Result<Self> {
        if uses.is_empty() {
            return Err(Error::invalid("at least one oracle is required"));
        }
        for u in uses {
            let o = &u.oracle;
            if u.m < o.min_rank {
                return Err(Error::invalid(format!("rank {} is below the minimum {} of oracle {}", u.m, o.min_rank, o.name)));
            }
            if matches!(need, Need::Height | Need::Both) && !o.height_favourable {
                return Err(Error::invalid(format!("oracle {} is not height-reduction favourable", o.name)));
            }
            if matches!(need, Need::Degree | Need::Both) && !o.degree_favourable {
                return Err(Error::invalid(format!("oracle {} is not degree-reduction favourable", o.name)));
            }
            (o.feasible)(t)?;
        }
        Ok(Engine {
            uses,
            caps,
            alphabet: t.labels(),
            ctxs: uses.iter().map(|_| TypeContext::new()).collect(),
            height_seen: HashSet::new(),
            degree_seen: HashSet::new(),
            sizes: Vec::new(),
        })
    }

    /// `Str_i(t)` with its dense view, for oracles that allow induced typing.
    fn snapshot(&self, t: &Tree) -> Result<Snapshot> {
        self.uses
            .iter()
            .map(|u| {
                if u.oracle.node_elements {
                    let s = u.oracle.structure(t, &self.alphabet)?;
                    let d = Dense::new(&s);
                    Ok(Some((s, d)))
                } else {
                    Ok(None)
                }
            })
            .collect()
    }

    /// Type vector of the part of `t` spanned by `nodes` (preorder, closed
    /// downward except at `root`'s dropped children), pinned at `root` when
    /// the oracle allows it.
    fn vector(&mut self, t: &Tree, snap: &Snapshot, nodes: &[NodeId], root: NodeId) -> Result<Vec<TypeId>> {
        let mut v = Vec::with_capacity(self.uses.len());
        let mut part: Option<Tree> = None;
        for (i, u) in self.uses.iter().enumerate() {
            let id = match &snap[i] {
                Some((s, d)) => {
                    let mut view: Vec<u32> = nodes.iter().map(|&n| d.index_of(t.origin(n)).unwrap()).collect();
                    view.sort_unstable();
                    self.ctxs[i].type_of_induced(s, d, &view, &[t.origin(root)], u.m, u.logic, self.caps)?
                }
                None => {
                    let p = part.get_or_insert_with(|| t.restrict(root, nodes));
                    let a = u.oracle.rooted(p, &self.alphabet)?;
                    self.ctxs[i].type_of(&a, u.m, u.logic, self.caps)?
                }
            };
            v.push(id);
        }
        Ok(v)
    }

    fn step(&mut self, old: &Tree, new: &Tree) -> Result<()> {
        if new.len() >= old.len() {
            return Err(Error::Verification(format!("splice did not shrink the tree ({} -> {})", old.len(), new.len())));
        }
        self.sizes.push(new.len());
        Ok(())
    }

    /// Repeatedly cuts a run of children at each node, bottom-up, whenever two
    /// child suffixes have the same type vector.
    fn degree_pass(&mut self, mut t: Tree) -> Result<Tree> {
        let mut order: Vec<u32> = Vec::with_capacity(t.len());
        fn post(t: &Tree, n: NodeId, out: &mut Vec<u32>) {
            t.children(n).iter().for_each(|&c| post(t, c, out));
            out.push(t.origin(n));
        }
        if let Some(r) = t.root() {
            post(&t, r, &mut order);
        }
        let mut snap = self.snapshot(&t)?;
        for o in order {
            while let Some(a) = t.node_by_origin(o) {
                let kids = t.children(a).to_vec();
                if kids.len() < 2 {
                    break;
                }
                let mut vecs = Vec::with_capacity(kids.len());
                for j in 0..kids.len() {
                    let mut nodes = vec![a];
                    for &c in &kids[j..] {
                        nodes.extend(c..c + t.subtree_size(c));
                    }
                    let v = self.vector(&t, &snap, &nodes, a)?;
                    self.degree_seen.insert(v.clone());
                    vecs.push(v);
                }
                let mut best: Option<(usize, usize, usize)> = None;
                for j in 0..kids.len() {
                    let mut removed = 0;
                    for k in j + 1..kids.len() {
                        removed += t.subtree_size(kids[k - 1]);
                        if vecs[j] == vecs[k] && best.is_none_or(|(r, _, _)| removed > r) {
                            best = Some((removed, j, k));
                        }
                    }
                }
                let Some((_, j, k)) = best else { break };
                let keep: Vec<NodeId> = kids[..j].iter().chain(&kids[k..]).copied().collect();
                let next = t.with_children(a, &keep);
                self.step(&t, &next)?;
                t = next;
                snap = self.snapshot(&t)?;
            }
        }
        Ok(t)
    }

    /// Replaces `t≥a` by `t≥b` whenever an ancestor and a descendant have the
    /// same rooted type vector, until no such pair remains.
    fn height_pass(&mut self, mut t: Tree) -> Result<Tree> {
        let mut cache: HashMap<u32, Vec<TypeId>> = HashMap::new();
        loop {
            let n = t.len();
            let snap = self.snapshot(&t)?;
            let mut vecs = Vec::with_capacity(n);
            for x in 0..n {
                let v = match cache.get(&t.origin(x)) {
                    Some(v) => v.clone(),
                    None => {
                        let nodes: Vec<NodeId> = (x..x + t.subtree_size(x)).collect();
                        let v = self.vector(&t, &snap, &nodes, x)?;
                        cache.insert(t.origin(x), v.clone());
                        v
                    }
                };
                self.height_seen.insert(v.clone());
                vecs.push(v);
            }
            let mut best: Option<(usize, NodeId, NodeId)> = None;
            for b in 0..n {
                let mut a = t.parent(b);
                while let Some(x) = a {
                    if vecs[x] == vecs[b] {
                        let cand = (n - t.subtree_size(x) + t.subtree_size(b), x, b);
                        if best.is_none_or(|cur| cand < cur) {
                            best = Some(cand);
                        }
                    }
                    a = t.parent(x);
                }
            }
            let Some((_, a, b)) = best else { return Ok(t) };
            let mut up = t.parent(a);
            while let Some(x) = up {
                cache.remove(&t.origin(x));
                up = t.parent(x);
            }
            let next = t.promote(a, b);
            self.step(&t, &next)?;
            t = next;
        }
    }

    /// Independent re-check of the output against the input.
    fn finish(self, input: &Tree, output: Tree) -> Result<Reduction> {
        for u in self.uses {
            let o = &u.oracle;
            let s = o.structure(&output, &self.alphabet)?.unpointed();
            let t = o.structure(input, &self.alphabet)?.unpointed();
            if !equivalent(&s, &t, u.m, u.logic, self.caps)? {
                return Err(Error::Verification(format!("{}: output is not {}-equivalent to the input", o.name, u.m)));
            }
            let hint: ElementMap = s.structure.universe().iter().map(|&e| (e, e)).collect();
            if find_embedding_hinted(&s, &t, &hint)?.is_none() {
                return Err(Error::Verification(format!("{}: output does not embed into the input", o.name)));
            }
        }
        Ok(Reduction {
            stats: ReduceStats {
                input_size: input.len(),
                output_size: output.len(),
                sizes: self.sizes,
                height_types: self.height_seen.len(),
                degree_types: self.degree_seen.len(),
            },
            tree: output,
        })
    }
}

/// Prunes whole runs of children until every node's child suffixes have
/// pairwise distinct type vectors. Degree ends up at most `degree_types`.
pub fn degree_reduce(t: &Tree, uses: &[OracleUse], caps: &Caps) -> Result<Reduction> {
    let mut e = Engine::new(t, uses, caps, Need::Degree)?;
    let out = e.degree_pass(t.clone())?;
    e.finish(t, out)
}

/// Collapses ancestor/descendant pairs of equal rooted type until every
/// root-leaf path has distinct vectors. Height ends up below `height_types`.
pub fn height_reduce(t: &Tree, uses: &[OracleUse], caps: &Caps) -> Result<Reduction> {
    let mut e = Engine::new(t, uses, caps, Need::Height)?;
    let out = e.height_pass(t.clone())?;
    e.finish(t, out)
}

/// Height then degree reduction, repeated to a fixpoint.
pub fn reduce(t: &Tree, uses: &[OracleUse], caps: &Caps) -> Result<Reduction> {
    let mut e = Engine::new(t, uses, caps, Need::Both)?;
    let mut cur = t.clone();
    loop {
        let before = cur.len();
        cur = e.height_pass(cur)?;
        cur = e.degree_pass(cur)?;
        if cur.len() == before {
            break;
        }
    }
    e.finish(t, cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::builtin_oracle;
    use crate::treerep::Shape;

    fn uses(names: &[&str], m: usize) -> Vec<OracleUse> {
        names.iter().map(|n| OracleUse { oracle: builtin_oracle(n).unwrap(), m, logic: Logic::FO }).collect()
    }

    fn chain(n: usize, label: &str) -> Tree {
        let mut s = Shape::leaf(label);
        for _ in 1..n {
            s = Shape::node(label, vec![s]);
        }
        Tree::from_shape(s)
    }

    const CAPS: Caps = Caps { fo_universe: 256, mso_universe: 8 };

    #[test]
    fn star_collapses() {
        let star = Tree::from_shape(Shape::node("r", (0..20).map(|_| Shape::leaf("x")).collect()));
        let r = degree_reduce(&star, &uses(&["unordered"], 1), &CAPS).unwrap();
        assert!(r.tree.degree() <= r.stats.degree_types);
        assert!(r.tree.len() < star.len());
        assert!(r.stats.sizes.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn word_chain_keeps_threshold() {
        let t = chain(30, "a");
        let r = height_reduce(&t, &uses(&["words"], 2), &CAPS).unwrap();
        // Linear orders of length ≥ 2^m − 1 are ≡_m; the pruned word sits at that threshold.
        assert!(r.tree.len() >= 3, "{}", r.tree.len());
        let o = builtin_oracle("words").unwrap();
        let al = t.labels();
        let (a, b) = (o.structure(&r.tree, &al).unwrap().unpointed(), o.structure(&t, &al).unwrap().unpointed());
        assert!(crate::equivalence::ef_game_decide(&a, &b, 2, Logic::FO, &CAPS).unwrap());
        assert!(r.tree.height() <= r.stats.height_types);
        let ranked = height_reduce(&t, &uses(&["ranked"], 2), &CAPS).unwrap();
        assert!(ranked.tree.height() <= ranked.stats.height_types);
    }

    #[test]
    fn preconditions() {
        let t = chain(3, "a");
        assert!(degree_reduce(&t, &uses(&["ranked"], 2), &CAPS).is_err());
        assert!(height_reduce(&t, &uses(&["ordered"], 1), &CAPS).is_err());
        let small = degree_reduce(&t, &uses(&["unordered"], 1), &CAPS).unwrap();
        assert!(small.tree.same_shape(&t));
    }

    #[test]
    fn reduce_is_idempotent() {
        let t = Tree::from_shape(Shape::node(
            "r",
            vec![
                Shape::node("a", vec![Shape::leaf("b"), Shape::leaf("b"), Shape::leaf("b")]),
                Shape::node("a", vec![Shape::leaf("b")]),
                Shape::node("a", vec![Shape::node("a", vec![Shape::node("a", vec![Shape::leaf("b")])])]),
            ],
        ));
        let u = uses(&["words", "unordered"], 2);
        let once = reduce(&t, &u, &CAPS).unwrap();
        let twice = reduce(&once.tree, &u, &CAPS).unwrap();
        assert!(once.tree.same_shape(&twice.tree));
    }
}
