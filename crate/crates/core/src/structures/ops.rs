use super::{find_embedding, Element, ElementMap, PointedStructure, Structure, Vocabulary};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// The substructure induced on `x`. Constants must be interpreted inside `x`.
pub fn induced_substructure(a: &Structure, x: &BTreeSet<Element>) -> Result<Structure> {
    if let Some(&e) = x.iter().find(|e| !a.contains(**e)) {
        return Err(Error::OutsideUniverse(e));
    }
    for c in a.vocabulary().constants() {
        let e = a.constant(c).ok_or_else(|| Error::invalid(format!("constant {c} uninterpreted")))?;
        if !x.contains(&e) {
            return Err(Error::invalid(format!("constant {c} = {e} lies outside the subset")));
        }
    }
    let mut out = Structure::new(a.vocabulary().clone(), x.iter().copied());
    for (name, t) in a.all_facts() {
        if t.iter().all(|e| x.contains(e)) {
            out.add_fact(name, t.clone())?;
        }
    }
    for c in a.vocabulary().constants() {
        out.set_constant(c, a.constant(c).unwrap())?;
    }
    Ok(out)
}

/// Induced substructures on `mustContain ⊆ X`, `|X| ≤ maxSize`, ordered by
/// size and then lexicographically on the ascending element list.
pub struct Substructures<'a> {
    a: &'a Structure,
    must: Vec<Element>,
    pool: Vec<Element>,
    max_extra: usize,
    size: usize,
    combo: Option<Vec<usize>>,
}

pub fn enumerate_substructures<'a>(
    a: &'a Structure,
    max_size: usize,
    must_contain: &BTreeSet<Element>,
) -> Result<Substructures<'a>> {
    if let Some(&e) = must_contain.iter().find(|e| !a.contains(**e)) {
        return Err(Error::OutsideUniverse(e));
    }
    for e in a.constant_values() {
        if !must_contain.contains(&e) {
            return Err(Error::invalid(format!("constant value {e} not in the required set")));
        }
    }
    let pool: Vec<Element> = a.universe().iter().copied().filter(|e| !must_contain.contains(e)).collect();
    let exhausted = max_size < must_contain.len();
    let max_extra = if exhausted { 0 } else { (max_size - must_contain.len()).min(pool.len()) };
    Ok(Substructures {
        a,
        must: must_contain.iter().copied().collect(),
        pool,
        max_extra,
        size: 0,
        combo: if exhausted { None } else { Some(Vec::new()) },
    })
}

impl Iterator for Substructures<'_> {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        let combo = self.combo.clone()?;
        let mut x: BTreeSet<Element> = self.must.iter().copied().collect();
        x.extend(combo.iter().map(|&i| self.pool[i]));
        // Advance to the next combination of the same size, else grow.
        let n = self.pool.len();
        let mut next = combo;
        let mut i = self.size;
        loop {
            if i == 0 {
                self.size += 1;
                self.combo = (self.size <= self.max_extra).then(|| (0..self.size).collect());
                break;
            }
            i -= 1;
            if next[i] < n - self.size + i {
                next[i] += 1;
                for j in i + 1..self.size {
                    next[j] = next[j - 1] + 1;
                }
                self.combo = Some(next);
                break;
            }
        }
        Some(induced_substructure(self.a, &x).expect("validated subset"))
    }
}

fn require_constant_free(s: &Structure, what: &str) -> Result<()> {
    if s.vocabulary().constants().is_empty() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} is undefined for structures with constants")))
    }
}

/// Copy of `s` with every element `e` renamed to `f(e)`; `f` must be injective.
pub fn relabel(s: &Structure, f: impl Fn(Element) -> Element) -> Structure {
    let mut out = Structure::new(s.vocabulary().clone(), s.universe().iter().map(|&e| f(e)));
    for (name, t) in s.all_facts() {
        out.add_fact(name, t.iter().map(|&e| f(e)).collect()).expect("relabeled fact");
    }
    for c in s.vocabulary().constants() {
        out.set_constant(c, f(s.constant(c).unwrap())).expect("relabeled constant");
    }
    out
}

fn offset_after(s: &Structure) -> Element {
    s.max_element().map_or(0, |m| m + 1)
}

/// Disjoint union: `a` keeps its ids, `b` is shifted by `max(a) + 1`.
pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    require_constant_free(a, "disjoint union")?;
    if a.vocabulary() != b.vocabulary() {
        return Err(Error::VocabularyMismatch("disjoint union of different vocabularies".into()));
    }
    let shift = offset_after(a);
    let b2 = relabel(b, |e| e + shift);
    let mut out = a.clone();
    for &e in b2.universe() {
        out.add_element(e);
    }
    for (name, t) in b2.all_facts() {
        out.add_fact(name, t.clone())?;
    }
    Ok(out)
}

/// n-disjoint sum of pointed parts over a shared constant-free vocabulary:
/// the union plus unary `P_i` marking part `i` and constants `c_j` naming the
/// concatenated tuples. Part `i` is shifted past all previous parts.
pub fn n_disjoint_sum(parts: &[PointedStructure]) -> Result<Structure> {
    let first = parts.first().ok_or_else(|| Error::invalid("n-disjoint sum of zero parts"))?;
    let base = first.structure.vocabulary();
    require_constant_free(&first.structure, "n-disjoint sum")?;
    let mut vocab = base.clone();
    for i in 1..=parts.len() {
        vocab.add_relation(&format!("P_{i}"), 1)?;
    }
    let total_k: usize = parts.iter().map(|p| p.tuple.len()).sum();
    for j in 1..=total_k {
        vocab.add_constant(&format!("c_{j}"))?;
    }
    let mut out = Structure::new(vocab, []);
    let mut shift = 0;
    let mut c = 1;
    for (i, part) in parts.iter().enumerate() {
        if part.structure.vocabulary() != base {
            return Err(Error::VocabularyMismatch(format!("part {} differs from part 1", i + 1)));
        }
        let s = relabel(&part.structure, |e| e + shift);
        for &e in s.universe() {
            out.add_element(e);
            out.add_fact(&format!("P_{}", i + 1), vec![e])?;
        }
        for (name, t) in s.all_facts() {
            out.add_fact(name, t.clone())?;
        }
        for &a in &part.tuple {
            out.set_constant(&format!("c_{c}"), a + shift)?;
            c += 1;
        }
        shift += offset_after(&part.structure);
    }
    Ok(out)
}

/// n-copy of `a` with one tuple per copy. For one tuple this is `(a, ā_1)`;
/// otherwise the n-disjoint sum of the copies plus `Sim` relating every pair
/// of copies of the same element (reflexive pairs included).
pub fn n_copy(a: &Structure, tuples: &[Vec<Element>]) -> Result<PointedStructure> {
    if tuples.is_empty() {
        return Err(Error::invalid("n-copy needs at least one tuple"));
    }
    if tuples.len() == 1 {
        return a.clone().pointed(tuples[0].clone());
    }
    let parts = tuples.iter().map(|t| a.clone().pointed(t.clone())).collect::<Result<Vec<_>>>()?;
    let sum = n_disjoint_sum(&parts)?;
    let mut vocab = sum.vocabulary().clone();
    vocab.add_relation("Sim", 2)?;
    let mut out = sum.with_vocabulary(vocab)?;
    let step = offset_after(a);
    let n = tuples.len() as Element;
    for &e in a.universe() {
        for i in 0..n {
            for j in 0..n {
                out.add_fact("Sim", vec![i * step + e, j * step + e])?;
            }
        }
    }
    Ok(out.unpointed())
}

/// Tensor product: a tuple of pairs is a fact iff both projections are.
/// The pair of the i-th and j-th elements (ascending) gets id `i·|B| + j`.
pub fn cartesian_product(a: &Structure, b: &Structure) -> Result<Structure> {
    require_constant_free(a, "cartesian product")?;
    if a.vocabulary() != b.vocabulary() {
        return Err(Error::VocabularyMismatch("product of different vocabularies".into()));
    }
    let ea: Vec<Element> = a.universe().iter().copied().collect();
    let eb: Vec<Element> = b.universe().iter().copied().collect();
    let ia: BTreeMap<Element, Element> = ea.iter().enumerate().map(|(i, &e)| (e, i as Element)).collect();
    let ib: BTreeMap<Element, Element> = eb.iter().enumerate().map(|(i, &e)| (e, i as Element)).collect();
    let w = eb.len() as Element;
    let mut out = Structure::new(a.vocabulary().clone(), 0..(ea.len() as Element * w));
    for (name, _) in a.vocabulary().relations() {
        for ta in a.facts(name).into_iter().flatten() {
            for tb in b.facts(name).into_iter().flatten() {
                let t = ta.iter().zip(tb).map(|(x, y)| ia[x] * w + ib[y]).collect();
                out.add_fact(name, t)?;
            }
        }
    }
    Ok(out)
}

/// Symmetric `E` joining `a, b` whenever some binary relation holds either way.
pub fn underlying_graph(a: &Structure) -> Result<Structure> {
    require_constant_free(a, "underlying graph")?;
    let mut out = Structure::new(Vocabulary::with(&[("E", 2)], &[]), a.universe().iter().copied());
    for (name, arity) in a.vocabulary().relations() {
        match arity {
            1 => {}
            2 => {
                for t in a.facts(name).into_iter().flatten() {
                    out.add_fact("E", vec![t[0], t[1]])?;
                    out.add_fact("E", vec![t[1], t[0]])?;
                }
            }
            _ => return Err(Error::invalid(format!("relation {name} has arity {arity} > 2"))),
        }
    }
    Ok(out)
}

/// Adds unary `Q_0 … Q_{p-1}` with `Q_i` the elements labelled `i`.
pub fn label_expand(a: &Structure, labeling: &BTreeMap<Element, usize>, p: usize) -> Result<Structure> {
    let mut vocab = a.vocabulary().clone();
    for i in 0..p {
        vocab.add_relation(&format!("Q_{i}"), 1)?;
    }
    let mut out = a.with_vocabulary(vocab)?;
    for &e in a.universe() {
        let l = *labeling.get(&e).ok_or_else(|| Error::invalid(format!("element {e} unlabeled")))?;
        if l >= p {
            return Err(Error::invalid(format!("label {l} of element {e} is not below {p}")));
        }
        out.add_fact(&format!("Q_{l}"), vec![e])?;
    }
    Ok(out)
}

/// `a_i` gets label `i-1`, every other element label `k`.
pub fn tuple_pin_expand(a: &Structure, tuple: &[Element]) -> Result<Structure> {
    let k = tuple.len();
    let distinct: BTreeSet<_> = tuple.iter().collect();
    if distinct.len() != k {
        return Err(Error::invalid("pinned tuple has repeated elements"));
    }
    let mut labeling: BTreeMap<Element, usize> = a.universe().iter().map(|&e| (e, k)).collect();
    for (i, &e) in tuple.iter().enumerate() {
        if !a.contains(e) {
            return Err(Error::OutsideUniverse(e));
        }
        labeling.insert(e, i);
    }
    label_expand(a, &labeling, k + 1)
}

/// First pair `i < j` (0-based, lexicographic) with `seq[i] ↪ seq[j]`.
pub fn embedding_quasi_order_probe(seq: &[PointedStructure]) -> Result<Option<(usize, usize, ElementMap)>> {
    for j in 1..seq.len() {
        if seq[j].tuple.len() != seq[0].tuple.len() {
            return Err(Error::TupleLength(seq[0].tuple.len(), seq[j].tuple.len()));
        }
    }
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if let Some(h) = find_embedding(&seq[i], &seq[j])? {
                return Ok(Some((i, j, h)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[Element]) -> BTreeSet<Element> {
        xs.iter().copied().collect()
    }

    #[test]
    fn induced_path_endpoints_are_edgeless() {
        let s = induced_substructure(&Structure::path(2), &set(&[1, 3])).unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(s.fact_count(), 0);
        assert_eq!(induced_substructure(&Structure::path(2), &set(&[1, 2, 3])).unwrap(), Structure::path(2));
        assert!(induced_substructure(&Structure::path(2), &set(&[])).unwrap().is_empty());
        assert!(induced_substructure(&Structure::path(2), &set(&[9])).is_err());
    }

    #[test]
    fn constants_must_stay() {
        let mut s = Structure::new(Vocabulary::with(&[], &["c"]), [1, 2]);
        s.set_constant("c", 1).unwrap();
        assert!(induced_substructure(&s, &set(&[2])).is_err());
    }

    #[test]
    fn enumeration_counts_and_order() {
        let a = Structure::path(2);
        let subs: Vec<_> = enumerate_substructures(&a, 3, &set(&[])).unwrap().collect();
        assert_eq!(subs.len(), 8);
        let sizes: Vec<usize> = subs.iter().map(|s| s.size()).collect();
        assert_eq!(sizes, vec![0, 1, 1, 1, 2, 2, 2, 3]);
        let firsts: Vec<Vec<Element>> = subs[4..7].iter().map(|s| s.universe().iter().copied().collect()).collect();
        assert_eq!(firsts, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        let all: Vec<_> = enumerate_substructures(&a, 3, &set(&[1, 2, 3])).unwrap().collect();
        assert_eq!(all, vec![a.clone()]);
        assert_eq!(enumerate_substructures(&a, 0, &set(&[1])).unwrap().count(), 0);
        assert_eq!(enumerate_substructures(&a, 2, &set(&[2])).unwrap().count(), 3);
    }

    #[test]
    fn unions_and_sums() {
        let k1 = Structure::digraph([0], &[]);
        let u = disjoint_union(&k1, &k1).unwrap();
        assert_eq!(u.size(), 2);
        let p1 = Structure::path(1);
        let u = disjoint_union(&p1, &p1).unwrap();
        assert_eq!((u.size(), u.fact_count()), (4, 4));
        let empty = Structure::digraph([], &[]);
        assert_eq!(disjoint_union(&p1, &empty).unwrap(), p1);

        let s = n_disjoint_sum(&[k1.clone().unpointed(), k1.clone().unpointed()]).unwrap();
        assert_eq!(s.facts("P_1").unwrap().len(), 1);
        assert!(s.holds("P_1", &[0]) && s.holds("P_2", &[1]));

        let s = n_disjoint_sum(&[p1.clone().pointed(vec![2]).unwrap(), p1.clone().pointed(vec![1]).unwrap()]).unwrap();
        assert_eq!(s.constant("c_1"), Some(2));
        assert_eq!(s.constant("c_2"), Some(4));
    }

    #[test]
    fn copies() {
        let k1 = Structure::digraph([0], &[]);
        let one = n_copy(&k1, &[vec![0]]).unwrap();
        assert_eq!(one.structure, k1);
        assert_eq!(one.tuple, vec![0]);
        let two = n_copy(&k1, &[vec![], vec![]]).unwrap().structure;
        assert_eq!(two.facts("Sim").unwrap().len(), 4);
        let p1 = Structure::path(1);
        let two = n_copy(&p1, &[vec![], vec![]]).unwrap().structure;
        assert_eq!(two.size(), 4);
        assert_eq!(two.facts("Sim").unwrap().len(), 8);
    }

    #[test]
    fn tensor_product() {
        let e = Structure::digraph([1, 2], &[(1, 2)]);
        let p = cartesian_product(&e, &e).unwrap();
        assert_eq!(p.size(), 4);
        assert_eq!(p.facts("E").unwrap().iter().cloned().collect::<Vec<_>>(), vec![vec![0, 3]]);
        let empty = Structure::digraph([], &[]);
        assert!(cartesian_product(&e, &empty).unwrap().is_empty());
    }

    #[test]
    fn underlying() {
        let g = underlying_graph(&Structure::digraph([1, 2], &[(1, 2)])).unwrap();
        assert!(g.holds("E", &[2, 1]) && g.holds("E", &[1, 2]));
        let mut s = Structure::new(Vocabulary::with(&[("A", 2), ("B", 2)], &[]), [1, 2]);
        s.add_fact("A", vec![1, 2]).unwrap();
        s.add_fact("B", vec![2, 1]).unwrap();
        assert_eq!(underlying_graph(&s).unwrap().fact_count(), 2);
    }

    #[test]
    fn labels() {
        let a = Structure::path(2);
        let pinned = tuple_pin_expand(&a, &[2]).unwrap();
        assert_eq!(pinned.facts("Q_0").unwrap().len(), 1);
        assert!(pinned.holds("Q_1", &[1]) && pinned.holds("Q_1", &[3]));
        let k0 = tuple_pin_expand(&a, &[]).unwrap();
        assert_eq!(k0.facts("Q_0").unwrap().len(), 3);
        let k2 = tuple_pin_expand(&Structure::path(1), &[1, 2]).unwrap();
        assert!(k2.facts("Q_2").unwrap().is_empty());
        assert!(tuple_pin_expand(&a, &[1, 1]).is_err());
        assert_eq!(pinned.with_vocabulary(a.vocabulary().clone()).unwrap(), a);
    }

    #[test]
    fn probe() {
        let seq: Vec<_> = (1..=3).map(|n| Structure::path(n).unpointed()).collect();
        let (i, j, _) = embedding_quasi_order_probe(&seq).unwrap().unwrap();
        assert_eq!((i, j), (0, 1));
        let seq: Vec<_> = [3, 2, 1].iter().map(|&n| Structure::clique(n).unpointed()).collect();
        assert!(embedding_quasi_order_probe(&seq).unwrap().is_none());
    }
}
