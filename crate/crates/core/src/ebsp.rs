//! The EBSP condition: around any k elements of a family member there is a
//! small induced substructure in the family with the same rank-m type.
//! Searches, empirical witness functions, the k-to-0 label reduction and
//! the bounded theory decision built on it.

use crate::equivalence::{Logic, TypeContext, TypeId};
use crate::logic::{models_with, Formula};
use crate::preservation::Family;
use crate::structures::{induced_substructure, tuple_pin_expand, Dense, Element, Structure};
use crate::{Caps, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::ops::ControlFlow;

/// Partition of the free elements into classes whose transpositions are
/// automorphisms of `a` fixing `fixed` pointwise. Subsets that differ only
/// by swapping within classes are isomorphic over the fixed part, and the
/// prefix choice in every class is the lexicographically least of them.
fn twin_classes(a: &Structure, fixed: &BTreeSet<Element>) -> Vec<usize> {
    let elems: Vec<Element> = a.universe().iter().copied().collect();
    let swap_ok = |x: Element, y: Element| {
        let sw = |e: &Element| if *e == x { y } else if *e == y { x } else { *e };
        a.all_facts().all(|(r, t)| a.holds(r, &t.iter().map(sw).collect::<Vec<_>>()))
    };
    let mut reps: Vec<Element> = Vec::new();
    let mut class = Vec::with_capacity(elems.len());
    for &e in &elems {
        let c = if fixed.contains(&e) {
            None
        } else {
            reps.iter().position(|&r| !fixed.contains(&r) && swap_ok(r, e))
        };
        class.push(c.unwrap_or_else(|| {
            reps.push(e);
            reps.len() - 1
        }));
    }
    class
}

/// Calls `visit` on every subset of dense indices of `size` elements that
/// contains `must` and takes a prefix of each twin class, in lexicographic
/// order, until it breaks.
fn canonical_subsets(
    class: &[usize],
    must: &[u32],
    size: usize,
    visit: &mut dyn FnMut(&[u32]) -> Result<ControlFlow<()>>,
) -> Result<()> {
    struct Walk<'a> {
        class: &'a [usize],
        pool: Vec<u32>,
        must: &'a [u32],
        closed: Vec<u32>,
        chosen: Vec<u32>,
    }
    impl Walk<'_> {
        fn go(
            &mut self,
            pos: usize,
            left: usize,
            visit: &mut dyn FnMut(&[u32]) -> Result<ControlFlow<()>>,
        ) -> Result<ControlFlow<()>> {
            if left == 0 {
                let mut view: Vec<u32> = self.chosen.iter().chain(self.must).copied().collect();
                view.sort_unstable();
                return visit(&view);
            }
            let mut flow = ControlFlow::Continue(());
            let mut end = pos;
            while end + left <= self.pool.len() {
                let c = self.class[self.pool[end] as usize];
                if self.closed[c] == 0 {
                    self.chosen.push(self.pool[end]);
                    flow = self.go(end + 1, left - 1, visit)?;
                    self.chosen.pop();
                    if flow.is_break() {
                        break;
                    }
                }
                // Skipping a class member closes the class for the rest of the walk.
                self.closed[c] += 1;
                end += 1;
            }
            for i in pos..end {
                self.closed[self.class[self.pool[i] as usize]] -= 1;
            }
            Ok(flow)
        }
    }
    let pool: Vec<u32> = (0..class.len() as u32).filter(|i| !must.contains(i)).collect();
    if size < must.len() || size - must.len() > pool.len() {
        return Ok(());
    }
    let classes = class.iter().max().map_or(0, |c| c + 1);
    let mut walk = Walk { class, pool, must, closed: vec![0; classes], chosen: Vec::new() };
    walk.go(0, size - must.len(), visit).map(drop)
}

/// The smallest, then lexicographically first, nonempty induced
/// substructure of `a` that contains `tuple` and the constants, has at most
/// `bound` elements, passes `member`, and has the rank-`m` type of
/// `(a, tuple)`.
fn search(
    a: &Structure,
    tuple: &[Element],
    m: usize,
    bound: usize,
    logic: Logic,
    caps: &Caps,
    member: &dyn Fn(&Structure) -> Result<bool>,
) -> Result<Option<Structure>> {
    if let Some(&e) = tuple.iter().find(|e| !a.contains(**e)) {
        return Err(Error::OutsideUniverse(e));
    }
    let mut ctx = TypeContext::new();
    let target = ctx.type_of(&a.clone().pointed(tuple.to_vec())?, m, logic, caps)?;
    let d = Dense::new(a);
    let fixed: BTreeSet<Element> = tuple.iter().copied().chain(a.constant_values()).collect();
    let must: Vec<u32> = fixed.iter().map(|e| d.index_of(*e).expect("checked above")).collect();
    let class = twin_classes(a, &fixed);
    let mut found = None;
    for size in must.len().max(1)..=bound.min(a.size()) {
        canonical_subsets(&class, &must, size, &mut |view| {
            if ctx.type_of_induced(a, &d, view, tuple, m, logic, caps)? != target {
                return Ok(ControlFlow::Continue(()));
            }
            let set: BTreeSet<Element> = view.iter().map(|&i| d.element(i)).collect();
            let b = induced_substructure(a, &set)?;
            if !member(&b)? {
                return Ok(ControlFlow::Continue(()));
            }
            found = Some(b);
            Ok(ControlFlow::Break(()))
        })?;
        if let Some(b) = found {
            verify(a, &b, tuple, m, bound, logic, caps, &mut ctx, target, member)?;
            return Ok(Some(b));
        }
    }
    Ok(None)
}

/// Re-checks the five conditions on a found `b` from scratch.
#[allow(clippy::too_many_arguments)]
fn verify(
    a: &Structure,
    b: &Structure,
    tuple: &[Element],
    m: usize,
    bound: usize,
    logic: Logic,
    caps: &Caps,
    ctx: &mut TypeContext,
    target: TypeId,
    member: &dyn Fn(&Structure) -> Result<bool>,
) -> Result<()> {
    let fail = |what: &str| Err(Error::Verification(format!("EBSP witness fails {what}")));
    if !member(b)? {
        return fail("membership");
    }
    if !b.universe().is_subset(a.universe()) || induced_substructure(a, b.universe())? != *b {
        return fail("induced substructure");
    }
    if !tuple.iter().all(|e| b.contains(*e)) {
        return fail("tuple containment");
    }
    if b.size() > bound {
        return fail("the size bound");
    }
    if ctx.type_of(&b.clone().pointed(tuple.to_vec())?, m, logic, caps)? != target {
        return fail("type equality");
    }
    Ok(())
}

fn require_member(family: &Family, a: &Structure) -> Result<()> {
    if !family.contains(a)? {
        return Err(Error::invalid(format!("structure is not in family {}", family.name())));
    }
    Ok(())
}

/// A witness `B` for `(a, tuple)` at rank `m` within `bound`, if any.
/// Repeated tuple entries are allowed; their set is pinned.
pub fn ebsp_condition(
    family: &Family,
    a: &Structure,
    tuple: &[Element],
    m: usize,
    bound: usize,
    logic: Logic,
) -> Result<Option<Structure>> {
    require_member(family, a)?;
    search(a, tuple, m, bound, logic, family.caps(), &|b| family.contains(b))
}

/// `θ'(m) = Σ_{i ≤ m} θ(i)`, a non-decreasing witness function above `θ`.
pub fn monotonize(theta: &[usize]) -> Vec<usize> {
    theta
        .iter()
        .scan(0, |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSample {
    pub size: usize,
    pub tuple: Vec<Element>,
    pub m: usize,
    pub min_bound: usize,
}

/// Smallest witness sizes per sample and rank; `max_bound[m]` is the
/// empirical `θ(m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessProfile {
    pub family: String,
    pub logic: Logic,
    pub k: usize,
    pub samples: Vec<WitnessSample>,
    pub max_bound: Vec<usize>,
}

impl WitnessProfile {
    pub fn sample_count(&self) -> usize {
        self.samples.iter().filter(|s| s.m == 0).count()
    }

    pub fn monotonized(&self) -> Vec<usize> {
        monotonize(&self.max_bound)
    }

    /// One row per rank under the header `m,k,logic,family,max_bound,sample_count`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record(["m", "k", "logic", "family", "max_bound", "sample_count"]).map_err(io)?;
        let n = self.sample_count().to_string();
        for (m, b) in self.max_bound.iter().enumerate() {
            w.write_record([&m.to_string(), &self.k.to_string(), &self.logic.to_string(), &self.family, &b.to_string(), &n])
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Profile over ranks `0..=m` for the given samples. The smallest witness is
/// found directly by the size-ordered search, so no bisection over the
/// bound is needed.
pub fn witness_profile_on(
    family: &Family,
    samples: &[(Structure, Vec<Element>)],
    k: usize,
    m: usize,
    logic: Logic,
) -> Result<WitnessProfile> {
    let mut out = WitnessProfile { family: family.name().into(), logic, k, samples: Vec::new(), max_bound: vec![0; m + 1] };
    for (a, t) in samples {
        if t.len() != k {
            return Err(Error::TupleLength(k, t.len()));
        }
        for r in 0..=m {
            let b = ebsp_condition(family, a, t, r, a.size(), logic)?
                .ok_or_else(|| Error::Verification(format!("no witness of size at most {} at rank {r}", a.size())))?;
            out.max_bound[r] = out.max_bound[r].max(b.size());
            out.samples.push(WitnessSample { size: a.size(), tuple: t.clone(), m: r, min_bound: b.size() });
        }
    }
    Ok(out)
}

/// `count` members drawn uniformly with uniform `k`-tuples, seeded.
pub fn sample_members(family: &Family, k: usize, count: usize, seed: u64) -> Result<Vec<(Structure, Vec<Element>)>> {
    let members = family.members();
    if members.is_empty() {
        return Err(Error::invalid(format!("family {} has no members to sample", family.name())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let a = members[rng.gen_range(0..members.len())].clone();
            let elems: Vec<Element> = a.universe().iter().copied().collect();
            let t = (0..k).map(|_| elems[rng.gen_range(0..elems.len())]).collect();
            (a, t)
        })
        .collect())
}

pub fn estimate_witness(
    family: &Family,
    k: usize,
    m: usize,
    logic: Logic,
    samples: usize,
    seed: u64,
) -> Result<WitnessProfile> {
    witness_profile_on(family, &sample_members(family, k, samples, seed)?, k, m, logic)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub structure: Structure,
    /// Rank at which the labelled search ran: `m`, or `m + k` when the
    /// rank-`m` labelled witness failed the pinned condition.
    pub rank: usize,
}

/// Searches the label expansion `(a, Q_0..Q_k)` at `k = 0`, strips the
/// labels and re-verifies the original pinned condition. Labels carry no
/// adjacency to the pinned elements, so a rank-`m` labelled witness can
/// fail; rank `m + k` cannot, since spoiler may pebble the `k` labelled
/// singletons first.
pub fn reduce_k_to_zero(
    family: &Family,
    a: &Structure,
    tuple: &[Element],
    m: usize,
    bound: usize,
    logic: Logic,
) -> Result<Option<Reduction>> {
    require_member(family, a)?;
    let k = tuple.len();
    let labelled = tuple_pin_expand(a, tuple)?;
    if k == 0 {
        return Ok(ebsp_condition(family, a, tuple, m, bound, logic)?.map(|structure| Reduction { structure, rank: m }));
    }
    let vocab = a.vocabulary().clone();
    let member = |b: &Structure| -> Result<bool> {
        let pinned = (0..k).all(|i| b.facts(&format!("Q_{i}")).is_some_and(|f| f.len() == 1));
        Ok(pinned && family.contains(&b.with_vocabulary(vocab.clone())?)?)
    };
    let caps = family.caps();
    let mut ctx = TypeContext::new();
    let target = ctx.type_of(&a.clone().pointed(tuple.to_vec())?, m, logic, caps)?;
    for rank in [m, m + k] {
        let Some(b) = search(&labelled, &[], rank, bound, logic, caps, &member)? else { return Ok(None) };
        let b = b.with_vocabulary(vocab.clone())?;
        if verify(a, &b, tuple, m, bound, logic, caps, &mut ctx, target, &|b| family.contains(b)).is_ok() {
            return Ok(Some(Reduction { structure: b, rank }));
        }
    }
    Err(Error::Verification("labelled witness at rank m + k fails the pinned condition".into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryDecision {
    pub holds: bool,
    pub rank: usize,
    pub p: usize,
    /// The first member of size at most `p` refuting the sentence.
    pub certificate: Option<Structure>,
}

/// Decides `φ` on the family from its members of size at most
/// `p = witness(rank φ)`: correct whenever `witness` is a witness function
/// for the family at `k = 0`.
pub fn decide_bounded_theory(
    family: &Family,
    witness: impl Fn(usize) -> usize,
    phi: &Formula,
    logic: Logic,
) -> Result<TheoryDecision> {
    if !phi.is_sentence() {
        return Err(Error::invalid("theory decision needs a sentence"));
    }
    if logic == Logic::FO && !phi.is_fo() {
        return Err(Error::invalid("set quantifiers in an FO theory query"));
    }
    let rank = phi.rank();
    let p = witness(rank);
    if p > family.max_size() {
        return Err(Error::cap("theory decision size", p, family.max_size()));
    }
    let mut small: Vec<&Structure> = family.members().iter().filter(|b| b.size() <= p).collect();
    small.sort_by_key(|b| b.size());
    for b in small {
        if !models_with(b, phi, family.caps())? {
            return Ok(TheoryDecision { holds: false, rank, p, certificate: Some(b.clone()) });
        }
    }
    Ok(TheoryDecision { holds: true, rank, p, certificate: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::word_to_structure_over;
    use crate::equivalence::equivalent;
    use crate::logic::parse_formula;
    use crate::structures::{enumerate_substructures, Vocabulary};

    fn unary(p: usize, q: usize) -> Structure {
        let mut s = Structure::new(Vocabulary::with(&[("P", 1)], &[]), 1..=(p + q) as Element);
        for e in 1..=p as Element {
            s.add_fact("P", vec![e]).unwrap();
        }
        s
    }

    /// Plain size-then-lexicographic enumeration, no twin reduction.
    fn brute(family: &Family, a: &Structure, t: &[Element], m: usize, logic: Logic) -> Option<Structure> {
        let must: BTreeSet<Element> = t.iter().copied().chain(a.constant_values()).collect();
        let pa = a.clone().pointed(t.to_vec()).unwrap();
        enumerate_substructures(a, a.size(), &must).unwrap().filter(|b| !b.is_empty()).find(|b| {
            family.contains(b).unwrap()
                && equivalent(&pa, &b.clone().pointed(t.to_vec()).unwrap(), m, logic, family.caps()).unwrap()
        })
    }

    #[test]
    fn unary_five_and_five() {
        let fam = Family::generate("unary", 4).unwrap();
        let a = unary(5, 5);
        let b = ebsp_condition(&fam, &a, &[], 2, 4, Logic::FO).unwrap().unwrap();
        assert_eq!(b.universe().iter().copied().collect::<Vec<_>>(), vec![1, 2, 6, 7]);
        assert!(ebsp_condition(&fam, &a, &[], 2, 3, Logic::FO).unwrap().is_none());
        assert_eq!(ebsp_condition(&fam, &a, &[], 2, 10, Logic::FO).unwrap().unwrap().size(), 4);
    }

    #[test]
    fn long_word_shrinks_to_three_letters() {
        let fam = Family::generate("words:a", 3).unwrap().with_caps(Caps::with_fo(32));
        let a = word_to_structure_over(&"a".repeat(20), &['a'].into()).unwrap();
        let b = ebsp_condition(&fam, &a, &[], 2, 10, Logic::FO).unwrap().unwrap();
        assert_eq!(b.size(), 3);
        let short = word_to_structure_over("aa", &['a'].into()).unwrap();
        assert!(!equivalent(&a.clone().unpointed(), &short.unpointed(), 2, Logic::FO, fam.caps()).unwrap());
    }

    #[test]
    fn whole_structure_always_qualifies() {
        let fam = Family::generate("graphs", 5).unwrap();
        for a in fam.members() {
            for m in 0..3 {
                assert!(ebsp_condition(&fam, a, &[1], m, a.size(), Logic::FO).unwrap().is_some());
            }
        }
        assert!(ebsp_condition(&fam, &Structure::digraph([1, 2], &[(1, 2)]), &[], 1, 2, Logic::FO).is_err());
    }

    #[test]
    fn twin_search_matches_brute_force() {
        for (fam, logic) in [
            (Family::generate("graphs", 5).unwrap(), Logic::FO),
            (Family::generate("path_unions", 6).unwrap(), Logic::FO),
            (Family::generate("unary:2", 4).unwrap(), Logic::MSO),
        ] {
            for a in fam.members() {
                for t in [vec![], vec![1], vec![2, 1], vec![1, 1]].into_iter().filter(|t| t.iter().all(|e| a.contains(*e))) {
                    for m in 1..3 {
                        let got = ebsp_condition(&fam, a, &t, m, a.size(), logic).unwrap();
                        assert_eq!(got, brute(&fam, a, &t, m, logic), "{} {t:?} m={m}", fam.name());
                    }
                }
            }
        }
    }

    #[test]
    fn twins_are_swappable() {
        let a = unary(3, 2);
        let class = twin_classes(&a, &[2].into());
        assert_eq!(class, vec![0, 1, 0, 2, 2]);
        let mut seen = Vec::new();
        canonical_subsets(&class, &[1], 3, &mut |v| {
            seen.push(v.to_vec());
            Ok(ControlFlow::Continue(()))
        })
        .unwrap();
        assert_eq!(seen, vec![vec![0, 1, 2], vec![0, 1, 3], vec![1, 3, 4]]);
    }

    #[test]
    fn monotonize_is_prefix_sums() {
        assert_eq!(monotonize(&[1, 3, 2]), vec![1, 4, 6]);
        assert_eq!(monotonize(&[]), Vec::<usize>::new());
    }

    #[test]
    fn profiles_of_finite_families() {
        let single = Family::explicit(vec![Structure::path(3)]).unwrap();
        let p = estimate_witness(&single, 0, 2, Logic::FO, 5, 1).unwrap();
        assert_eq!(p.max_bound[2], 4);
        assert_eq!(p.sample_count(), 5);
        let fam = Family::generate("path_unions:2", 5).unwrap();
        let p = estimate_witness(&fam, 1, 2, Logic::FO, 20, 3).unwrap();
        assert!(p.max_bound.iter().all(|&b| b <= 5));
        assert!(p.monotonized().windows(2).all(|w| w[0] <= w[1]));
        let csv = p.to_csv().unwrap();
        assert!(csv.starts_with("m,k,logic,family,max_bound,sample_count\n0,1,fo,path_unions:2/5,"), "{csv}");
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn unary_profile_respects_the_colour_bound() {
        let fam = Family::generate("unary:2", 8).unwrap();
        for m in 0..3 {
            let p = estimate_witness(&fam, 1, m, Logic::FO, 30, 11).unwrap();
            assert!(p.max_bound[m] <= m * 4 + 1, "{:?}", p.max_bound);
        }
    }

    #[test]
    fn reduction_matches_direct_search_on_unary() {
        let fam = Family::generate("unary:2", 6).unwrap();
        for a in fam.members() {
            for m in 0..3 {
                let direct = ebsp_condition(&fam, a, &[1], m, a.size(), Logic::FO).unwrap().unwrap();
                let red = reduce_k_to_zero(&fam, a, &[1], m, a.size(), Logic::FO).unwrap().unwrap();
                assert_eq!((red.structure.size(), red.rank), (direct.size(), m));
            }
        }
        let a = unary(2, 2);
        let zero = reduce_k_to_zero(&fam, &a, &[], 1, 4, Logic::FO);
        assert!(zero.is_err(), "unary:2 family has another vocabulary");
        let one = Family::generate("unary", 4).unwrap();
        let red = reduce_k_to_zero(&one, &a, &[], 1, 4, Logic::FO).unwrap().unwrap();
        assert_eq!(Some(red.structure), ebsp_condition(&one, &a, &[], 1, 4, Logic::FO).unwrap());
        assert!(reduce_k_to_zero(&one, &a, &[1, 1], 1, 4, Logic::FO).is_err());
    }

    #[test]
    fn reduction_falls_back_when_labels_miss_adjacency() {
        let fam = Family::generate("graphs", 4).unwrap();
        let a = Structure::path(2);
        let red = reduce_k_to_zero(&fam, &a, &[1], 1, 3, Logic::FO).unwrap().unwrap();
        assert_eq!(red.rank, 2);
        assert_eq!(red.structure, a);
    }

    #[test]
    fn bounded_theory_over_words() {
        let fam = Family::generate("words:ab", 4).unwrap();
        let theta = |m: usize| m + 1;
        let all = decide_bounded_theory(&fam, theta, &parse_formula("forall x. (a(x) | b(x))").unwrap(), Logic::FO).unwrap();
        assert!(all.holds && all.certificate.is_none());
        let some = decide_bounded_theory(&fam, theta, &parse_formula("exists x. a(x)").unwrap(), Logic::FO).unwrap();
        let cx = some.certificate.unwrap();
        assert!(!some.holds);
        assert_eq!(cx, word_to_structure_over("b", &['a', 'b'].into()).unwrap());
        let never = decide_bounded_theory(&fam, theta, &Formula::False, Logic::FO).unwrap();
        assert_eq!(never.certificate.unwrap().size(), 1);
        assert!(decide_bounded_theory(&fam, |_| 9, &Formula::True, Logic::FO).is_err());
    }
}
