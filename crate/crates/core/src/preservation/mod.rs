//! Cruxes and covers over finite families: PSC(k) and PCE(k) verdicts,
//! the GLT(k)/HPT translations and the counterexample fixtures.

mod counter;
mod family;
mod translate;

pub use counter::{glt_counterexample, glt_counterexample_for, is_partial_isomorphism, rho_map, GltCounterexample};
pub use family::{isomorphic, path_union, Family, CLASS_NAMES};
pub use translate::{glt_translate, hpt_translate, is_forall_exists_positive, phi_k_paths};

use crate::logic::{models_with, Formula};
use crate::structures::{find_homomorphism, induced_substructure, serialize_structure, Element, PointedStructure, Structure};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest universe whose subsets are enumerated exhaustively.
const MAX_SUBSET_UNIVERSE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Violated,
    Inconclusive,
}

/// A family-level verdict, serialisable as
/// `{property, k, verdict, witness?, counterexample?, note?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub property: String,
    pub k: usize,
    pub verdict: Outcome,
    /// Element sets backing the verdict: cover universes for PCE(k).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<Element>>>,
    /// The offending family member, in the structure text format.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    fn new(property: &str, k: usize, verdict: Outcome) -> Self {
        Verdict { property: property.to_string(), k, verdict, witness: None, counterexample: None, note: None }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Outcome::Holds
    }
}

/// Minimal cruxes of size at most `k`, by size then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CruxReport {
    pub cruxes: Vec<BTreeSet<Element>>,
    pub min_size: Option<usize>,
}

/// Every non-empty induced substructure of `a` (constants kept), classified.
struct Subsets {
    elems: Vec<Element>,
    /// `(mask, in family, models φ)`; the last is false outside the family.
    table: Vec<(u64, bool, bool)>,
}

impl Subsets {
    fn new(a: &Structure, phi: &Formula, family: &Family) -> Result<Self> {
        let elems: Vec<Element> = a.universe().iter().copied().collect();
        if elems.len() > MAX_SUBSET_UNIVERSE {
            return Err(Error::cap("universe for subset enumeration", elems.len(), MAX_SUBSET_UNIVERSE));
        }
        let consts = a.constant_values().iter().fold(0u64, |m, c| m | 1 << elems.binary_search(c).unwrap());
        let mut table = Vec::new();
        for mask in 1u64..1 << elems.len() {
            if mask & consts != consts {
                continue;
            }
            let b = induced_substructure(a, &Self::set_of(&elems, mask))?;
            let member = family.contains(&b)?;
            let sat = member && models_with(&b, phi, family.caps())?;
            table.push((mask, member, sat));
        }
        Ok(Subsets { elems, table })
    }

    fn set_of(elems: &[Element], mask: u64) -> BTreeSet<Element> {
        elems.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect()
    }

    fn mask_of(&self, c: &BTreeSet<Element>) -> Result<u64> {
        c.iter().try_fold(0u64, |m, e| Ok(m | 1 << self.elems.binary_search(e).map_err(|_| Error::OutsideUniverse(*e))?))
    }

    /// No family member refuting φ contains `c`.
    fn is_crux(&self, c: u64) -> bool {
        !self.table.iter().any(|&(s, member, sat)| member && !sat && s & c == c)
    }

    fn combinations(&self, size: usize) -> impl Iterator<Item = u64> + '_ {
        let n = self.elems.len();
        let mut idx: Option<Vec<usize>> = (size <= n).then(|| (0..size).collect());
        std::iter::from_fn(move || {
            let cur = idx.clone()?;
            let mask = cur.iter().fold(0u64, |m, i| m | 1 << i);
            idx = (0..size).rev().find(|&i| cur[i] < n - size + i).map(|i| {
                let mut next = cur.clone();
                next[i] += 1;
                for j in i + 1..size {
                    next[j] = next[j - 1] + 1;
                }
                next
            });
            Some(mask)
        })
    }
}

fn check_member(a: &Structure, phi: &Formula, family: &Family) -> Result<()> {
    if !phi.is_sentence() {
        return Err(Error::invalid("the property must be a sentence"));
    }
    if !family.contains(a)? {
        return Err(Error::invalid("structure is not in the family"));
    }
    if !models_with(a, phi, family.caps())? {
        return Err(Error::invalid("structure does not model the sentence"));
    }
    Ok(())
}

/// Every induced substructure of `a` that contains `c` and belongs to the
/// family models `φ`. Requires `a` in the family with `a ⊨ φ`.
pub fn is_k_crux(a: &Structure, c: &BTreeSet<Element>, phi: &Formula, family: &Family) -> Result<bool> {
    check_member(a, phi, family)?;
    let subsets = Subsets::new(a, phi, family)?;
    let mask = subsets.mask_of(c)?;
    Ok(subsets.is_crux(mask))
}

/// All minimal cruxes of size at most `k`. Supersets of cruxes are cruxes,
/// so a candidate containing an earlier crux is skipped.
pub fn find_cruxes(a: &Structure, phi: &Formula, family: &Family, k: usize) -> Result<CruxReport> {
    check_member(a, phi, family)?;
    let subsets = Subsets::new(a, phi, family)?;
    Ok(cruxes_in(&subsets, k))
}

fn cruxes_in(subsets: &Subsets, k: usize) -> CruxReport {
    let mut found: Vec<u64> = Vec::new();
    for size in 0..=k.min(subsets.elems.len()) {
        for c in subsets.combinations(size) {
            if !found.iter().any(|f| c & f == *f) && subsets.is_crux(c) {
                found.push(c);
            }
        }
    }
    CruxReport {
        min_size: found.first().map(|m| m.count_ones() as usize),
        cruxes: found.iter().map(|&m| Subsets::set_of(&subsets.elems, m)).collect(),
    }
}

/// PSC(k) on the family: every member modelling `φ` has a crux of size ≤ k.
pub fn check_psc_k(family: &Family, phi: &Formula, k: usize) -> Result<Verdict> {
    for a in family.members() {
        if !models_with(a, phi, family.caps())? {
            continue;
        }
        let subsets = Subsets::new(a, phi, family)?;
        if cruxes_in(&subsets, k).cruxes.is_empty() {
            let mut v = Verdict::new("PSC", k, Outcome::Violated);
            v.counterexample = Some(serialize_structure(a));
            v.note = Some(format!("no crux of size at most {k}"));
            return Ok(v);
        }
    }
    Ok(Verdict::new("PSC", k, Outcome::Holds))
}

fn check_substructures(a: &Structure, r: &[Structure]) -> Result<()> {
    for (i, b) in r.iter().enumerate() {
        if b.vocabulary() != a.vocabulary() || induced_substructure(a, b.universe()).ok().as_ref() != Some(b) {
            return Err(Error::invalid(format!("cover member {} is not an induced substructure", i + 1)));
        }
    }
    Ok(())
}

/// `a` is a k-ary covered extension of `r`: each member is an induced
/// substructure of `a`, and every set of at most `k` elements lies inside
/// some member.
pub fn is_k_ary_cover(a: &Structure, r: &[Structure], k: usize) -> Result<bool> {
    check_substructures(a, r)?;
    let elems: Vec<Element> = a.universe().iter().copied().collect();
    if elems.len() > MAX_SUBSET_UNIVERSE {
        return Err(Error::cap("universe for subset enumeration", elems.len(), MAX_SUBSET_UNIVERSE));
    }
    let probe = Subsets { elems, table: Vec::new() };
    let members: Vec<u64> = r.iter().map(|b| probe.mask_of(b.universe())).collect::<Result<_>>()?;
    // Covering every set of size exactly min(k, n) covers all smaller ones.
    let size = k.min(probe.elems.len());
    let covered = probe.combinations(size).all(|c| members.iter().any(|m| m & c == c));
    Ok(covered)
}

/// PCE(k) on the family: no member refuting `φ` is a k-ary covered extension
/// of family members modelling `φ`. A cover, when one exists, is reported
/// with at most `cover_cap` members; if every cover is larger the verdict is
/// inconclusive.
pub fn check_pce_k(family: &Family, phi: &Formula, k: usize, cover_cap: usize) -> Result<Verdict> {
    if !phi.is_sentence() {
        return Err(Error::invalid("the property must be a sentence"));
    }
    let mut inconclusive = None;
    for a in family.members() {
        if models_with(a, phi, family.caps())? {
            continue;
        }
        let subsets = Subsets::new(a, phi, family)?;
        let good: Vec<u64> = subsets.table.iter().filter(|t| t.2).map(|t| t.0).collect();
        // Only maximal members matter for covering.
        let maximal: Vec<u64> = good.iter().copied().filter(|&g| !good.iter().any(|&h| h != g && h & g == g)).collect();
        let targets: Vec<u64> = subsets.combinations(k.min(subsets.elems.len())).collect();
        if !targets.iter().all(|t| maximal.iter().any(|m| m & t == *t)) {
            continue;
        }
        match smallest_cover(&maximal, &targets, cover_cap) {
            Some(cover) => {
                let mut v = Verdict::new("PCE", k, Outcome::Violated);
                v.counterexample = Some(serialize_structure(a));
                v.witness = Some(cover.iter().map(|&m| Subsets::set_of(&subsets.elems, m).into_iter().collect()).collect());
                return Ok(v);
            }
            None => inconclusive.get_or_insert_with(|| serialize_structure(a)),
        };
    }
    Ok(match inconclusive {
        Some(a) => {
            let mut v = Verdict::new("PCE", k, Outcome::Inconclusive);
            v.counterexample = Some(a);
            v.note = Some(format!("no cover within the cap of {cover_cap}"));
            v
        }
        None => Verdict::new("PCE", k, Outcome::Holds),
    })
}

/// A cover of `targets` by at most `cap` of `sets`, fewest members first.
fn smallest_cover(sets: &[u64], targets: &[u64], cap: usize) -> Option<Vec<u64>> {
    fn go(sets: &[u64], targets: &[u64], left: usize, chosen: &mut Vec<u64>) -> bool {
        let Some(&t) = targets.iter().find(|&&t| !chosen.iter().any(|c| c & t == t)) else {
            return true;
        };
        if left == 0 {
            return false;
        }
        // Some member must cover `t`; branch only on those.
        for &s in sets {
            if s & t == t {
                chosen.push(s);
                if go(sets, targets, left - 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    (0..=cap).find_map(|size| {
        let mut chosen = Vec::new();
        go(sets, targets, size, &mut chosen).then_some(chosen)
    })
}

/// All `k`-tuples over the ascending universe, lexicographically.
pub fn k_tuples(a: &Structure, k: usize) -> Vec<Vec<Element>> {
    let elems: Vec<Element> = a.universe().iter().copied().collect();
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t| elems.iter().map(move |&e| [t.clone(), vec![e]].concat())).collect();
    }
    out
}

/// `r[i]` maps homomorphically onto `(a, ā_i)` for the i-th k-tuple `ā_i`.
pub fn is_k_ary_hom_cover(a: &Structure, r: &[PointedStructure], k: usize) -> Result<bool> {
    let tuples = k_tuples(a, k);
    if r.len() != tuples.len() {
        return Err(Error::invalid(format!("{} structures for {} tuples", r.len(), tuples.len())));
    }
    for (b, t) in r.iter().zip(tuples) {
        let target = a.clone().pointed(t)?;
        if find_homomorphism(b, &target)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}
