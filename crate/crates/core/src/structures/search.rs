use super::{Dense, Element, ElementMap, PointedStructure, Structure};
use crate::{Error, Result};
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Embedding,
    Homomorphism,
}

fn check_compatible(a: &PointedStructure, b: &PointedStructure) -> Result<()> {
    if a.structure.vocabulary() != b.structure.vocabulary() {
        return Err(Error::VocabularyMismatch("source and target vocabularies differ".into()));
    }
    if a.tuple.len() != b.tuple.len() {
        return Err(Error::TupleLength(a.tuple.len(), b.tuple.len()));
    }
    Ok(())
}

/// Complete search for an embedding `(A, ā) ↪ (B, b̄)`: injective, pins and
/// constants respected, every relation preserved in both directions.
pub fn find_embedding(a: &PointedStructure, b: &PointedStructure) -> Result<Option<ElementMap>> {
    find_embedding_hinted(a, b, &ElementMap::default())
}

/// As [`find_embedding`], trying the hinted image of each element first.
/// The hint only changes value order; the search stays complete.
pub fn find_embedding_hinted(a: &PointedStructure, b: &PointedStructure, hint: &ElementMap) -> Result<Option<ElementMap>> {
    check_compatible(a, b)?;
    Ok(Search::new(a, b, Mode::Embedding, hint).run())
}

/// Complete search for a homomorphism `(A, ā) → (B, b̄)`.
pub fn find_homomorphism(a: &PointedStructure, b: &PointedStructure) -> Result<Option<ElementMap>> {
    check_compatible(a, b)?;
    Ok(Search::new(a, b, Mode::Homomorphism, &ElementMap::default()).run())
}

fn pins(a: &PointedStructure, b: &PointedStructure) -> Vec<(Element, Element)> {
    let mut out: Vec<_> = a.tuple.iter().copied().zip(b.tuple.iter().copied()).collect();
    out.extend(a.structure.constant_values().into_iter().zip(b.structure.constant_values()));
    out
}

fn total_and_pinned(h: &ElementMap, a: &PointedStructure, b: &PointedStructure) -> bool {
    h.mapping.len() == a.structure.size()
        && a.structure.universe().iter().all(|e| h.get(*e).is_some_and(|v| b.structure.contains(v)))
        && pins(a, b).iter().all(|&(x, y)| h.get(x) == Some(y))
}

/// Re-checks the embedding predicate for a candidate map.
pub fn is_embedding(h: &ElementMap, a: &PointedStructure, b: &PointedStructure) -> bool {
    if !total_and_pinned(h, a, b) || !h.is_injective() {
        return false;
    }
    let inverse: HashMap<Element, Element> = h.mapping.iter().map(|(&x, &y)| (y, x)).collect();
    for (name, _) in a.structure.vocabulary().relations() {
        let fa = a.structure.facts(name).into_iter().flatten();
        if fa.into_iter().any(|t| !b.structure.holds(name, &t.iter().map(|e| h.mapping[e]).collect::<Vec<_>>())) {
            return false;
        }
        for t in b.structure.facts(name).into_iter().flatten() {
            let pre: Option<Vec<Element>> = t.iter().map(|e| inverse.get(e).copied()).collect();
            if let Some(pre) = pre {
                if !a.structure.holds(name, &pre) {
                    return false;
                }
            }
        }
    }
    true
}

/// Re-checks the homomorphism predicate for a candidate map.
pub fn is_homomorphism(h: &ElementMap, a: &PointedStructure, b: &PointedStructure) -> bool {
    total_and_pinned(h, a, b)
        && a.structure.all_facts().all(|(name, t)| {
            let img: Vec<Element> = t.iter().map(|e| h.mapping[e]).collect();
            b.structure.holds(name, &img)
        })
}

/// Index tuples of one relation's facts.
type Facts = Vec<Vec<u32>>;

struct Search {
    mode: Mode,
    da: Dense,
    db: Dense,
    binary: Vec<usize>,
    /// Facts of relations with arity ≥ 3, as index tuples, per side.
    high: Vec<(usize, Facts, Facts)>,
    domains: Vec<Vec<u32>>,
    hint: Vec<Option<u32>>,
}

impl Search {
    fn new(a: &PointedStructure, b: &PointedStructure, mode: Mode, hint: &ElementMap) -> Self {
        let da = Dense::new(&a.structure);
        let db = Dense::new(&b.structure);
        let (na, nb) = (da.len(), db.len());
        let binary: Vec<usize> = (0..da.relation_count()).filter(|&r| da.arity(r) == 2).collect();
        let mut high = Vec::new();
        for r in (0..da.relation_count()).filter(|&r| da.arity(r) >= 3) {
            let name = a.structure.vocabulary().relations().nth(r).unwrap().0;
            let idx = |s: &Structure, d: &Dense| -> Vec<Vec<u32>> {
                s.facts(name).into_iter().flatten().map(|t| t.iter().map(|e| d.index_of(*e).unwrap()).collect()).collect()
            };
            high.push((r, idx(&a.structure, &da), idx(&b.structure, &db)));
        }

        let compatible = |x: u32, y: u32| -> bool {
            (0..da.relation_count()).all(|r| {
                let k = da.arity(r);
                let (p, q) = (da.holds(r, &vec![x; k]), db.holds(r, &vec![y; k]));
                match mode {
                    Mode::Embedding => p == q,
                    Mode::Homomorphism => !p || q,
                }
            })
        };
        let mut domains: Vec<Vec<u32>> =
            (0..na as u32).map(|x| (0..nb as u32).filter(|&y| compatible(x, y)).collect()).collect();
        for (x, y) in pins(a, b) {
            let (xi, yi) = (da.index_of(x).unwrap() as usize, db.index_of(y).unwrap());
            domains[xi].retain(|&v| v == yi);
        }
        let hint = (0..na as u32)
            .map(|x| hint.get(da.element(x)).and_then(|y| db.index_of(y)))
            .collect();
        Search { mode, da, db, binary, high, domains, hint }
    }

    fn run(mut self) -> Option<ElementMap> {
        let na = self.da.len();
        if na > 0 && self.db.is_empty() {
            return None;
        }
        let mut assign = vec![None; na];
        let domains = std::mem::take(&mut self.domains);
        if domains.iter().any(|d| d.is_empty()) {
            return None;
        }
        if self.solve(&mut assign, domains) {
            Some(
                assign
                    .iter()
                    .enumerate()
                    .map(|(x, v)| (self.da.element(x as u32), self.db.element(v.unwrap())))
                    .collect(),
            )
        } else {
            None
        }
    }

    fn pair_ok(&self, x: u32, v: u32, u: u32, w: u32) -> bool {
        self.binary.iter().all(|&r| {
            let (p1, q1) = (self.da.holds2(r, x, u), self.db.holds2(r, v, w));
            let (p2, q2) = (self.da.holds2(r, u, x), self.db.holds2(r, w, v));
            match self.mode {
                Mode::Embedding => p1 == q1 && p2 == q2,
                Mode::Homomorphism => (!p1 || q1) && (!p2 || q2),
            }
        })
    }

    fn high_ok(&self, assign: &[Option<u32>]) -> bool {
        for (r, fa, fb) in &self.high {
            for t in fa {
                let img: Option<Vec<u32>> = t.iter().map(|&e| assign[e as usize]).collect();
                if let Some(img) = img {
                    if !self.db.holds(*r, &img) {
                        return false;
                    }
                }
            }
            if self.mode == Mode::Embedding {
                let inverse: BTreeMap<u32, u32> =
                    assign.iter().enumerate().filter_map(|(x, v)| v.map(|v| (v, x as u32))).collect();
                for t in fb {
                    let pre: Option<Vec<u32>> = t.iter().map(|e| inverse.get(e).copied()).collect();
                    if let Some(pre) = pre {
                        if !self.da.holds(*r, &pre) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn solve(&self, assign: &mut Vec<Option<u32>>, domains: Vec<Vec<u32>>) -> bool {
        let Some(x) = (0..assign.len()).filter(|&i| assign[i].is_none()).min_by_key(|&i| domains[i].len()) else {
            return true;
        };
        let mut order = domains[x].clone();
        if let Some(h) = self.hint[x] {
            if let Some(p) = order.iter().position(|&v| v == h) {
                order.remove(p);
                order.insert(0, h);
            }
        }
        for v in order {
            assign[x] = Some(v);
            if !self.high_ok(assign) {
                assign[x] = None;
                continue;
            }
            let mut next = domains.clone();
            next[x] = vec![v];
            let mut dead = false;
            for u in 0..assign.len() {
                if assign[u].is_some() {
                    continue;
                }
                next[u].retain(|&w| {
                    (self.mode == Mode::Homomorphism || w != v) && self.pair_ok(x as u32, v, u as u32, w)
                });
                if next[u].is_empty() {
                    dead = true;
                    break;
                }
            }
            if !dead && self.solve(assign, next) {
                return true;
            }
            assign[x] = None;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: Structure) -> PointedStructure {
        s.unpointed()
    }

    #[test]
    fn path_embeds_in_longer_path() {
        let h = find_embedding(&p(Structure::path(2)), &p(Structure::path(9))).unwrap().unwrap();
        assert!(is_embedding(&h, &p(Structure::path(2)), &p(Structure::path(9))));
    }

    #[test]
    fn triangle_does_not_embed_in_path() {
        assert!(find_embedding(&p(Structure::clique(3)), &p(Structure::path(9))).unwrap().is_none());
    }

    #[test]
    fn pinned_self_embedding_is_identity() {
        let a = Structure::path(3).pointed(vec![1, 2, 3, 4]).unwrap();
        let h = find_embedding(&a, &a).unwrap().unwrap();
        assert!(h.mapping.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn edge_maps_to_loop() {
        let edge = p(Structure::digraph([1, 2], &[(1, 2)]));
        let lp = p(Structure::digraph([7], &[(7, 7)]));
        let h = find_homomorphism(&edge, &lp).unwrap().unwrap();
        assert_eq!(h.get(1), Some(7));
        assert_eq!(h.get(2), Some(7));
        assert!(find_embedding(&edge, &lp).unwrap().is_none());
    }

    #[test]
    fn loop_has_no_hom_into_k2() {
        let lp = p(Structure::digraph([1], &[(1, 1)]));
        assert!(find_homomorphism(&lp, &p(Structure::clique(2))).unwrap().is_none());
    }

    #[test]
    fn non_edges_must_be_preserved_by_embeddings() {
        let two = p(Structure::digraph([1, 2], &[]));
        assert!(find_embedding(&two, &p(Structure::clique(2))).unwrap().is_none());
        assert!(find_homomorphism(&two, &p(Structure::clique(2))).unwrap().is_some());
    }

    #[test]
    fn ternary_relations_are_checked() {
        let v = crate::Vocabulary::with(&[("T", 3)], &[]);
        let mut a = Structure::new(v.clone(), [1, 2, 3]);
        a.add_fact("T", vec![1, 2, 3]).unwrap();
        let mut b = Structure::new(v, [1, 2, 3]);
        b.add_fact("T", vec![3, 2, 1]).unwrap();
        let h = find_embedding(&p(a.clone()), &p(b.clone())).unwrap().unwrap();
        assert_eq!(h.get(1), Some(3));
        assert!(find_homomorphism(&p(a.clone()), &p(b.clone())).unwrap().is_some());
        b.add_fact("T", vec![1, 1, 1]).unwrap();
        assert!(find_embedding(&p(a), &p(b)).unwrap().is_none());
    }

    #[test]
    fn mismatches_are_errors() {
        let a = Structure::path(1).pointed(vec![1]).unwrap();
        assert!(matches!(find_embedding(&a, &p(Structure::path(1))), Err(Error::TupleLength(1, 0))));
        let q = p(Structure::new(crate::Vocabulary::with(&[("P", 1)], &[]), [1]));
        assert!(matches!(find_homomorphism(&q, &p(Structure::path(1))), Err(Error::VocabularyMismatch(_))));
    }
}
