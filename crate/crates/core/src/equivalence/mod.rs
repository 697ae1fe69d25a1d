//! Rank-m types, the Ehrenfeucht–Fraïssé game, and class counting.

mod game;

pub use game::ef_game_decide;

use crate::structures::{Dense, Element, PointedStructure, Structure, Vocabulary};
use crate::{Caps, Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    FO,
    MSO,
}

impl Logic {
    pub fn is_mso(self) -> bool {
        self == Logic::MSO
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Logic::FO => "fo",
            Logic::MSO => "mso",
        })
    }
}

impl std::str::FromStr for Logic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fo" => Ok(Logic::FO),
            "mso" => Ok(Logic::MSO),
            _ => Err(Error::invalid(format!("unknown logic {s:?}"))),
        }
    }
}

#[derive(Debug)]
pub struct TypeNode {
    pub logic: Logic,
    pub rank: usize,
    /// Packed atomic type of the pinned tuple, constants and set parameters.
    pub atomic: Vec<u64>,
    pub point_extensions: Vec<RankType>,
    pub set_extensions: Vec<RankType>,
    fp: [u8; 16],
}

/// Canonical (m, ℒ)-type. Extension sets are deduplicated and sorted by
/// fingerprint, so equal types compare equal structurally.
#[derive(Debug, Clone)]
pub struct RankType(Arc<TypeNode>);

impl RankType {
    pub fn node(&self) -> &TypeNode {
        &self.0
    }

    pub fn logic(&self) -> Logic {
        self.0.logic
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    /// Stable hex digest of the canonical Merkle hash.
    pub fn fingerprint(&self) -> String {
        self.0.fp.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl PartialEq for RankType {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        let (a, b) = (&self.0, &other.0);
        let fps = |v: &[RankType]| v.iter().map(|t| t.0.fp).collect::<Vec<_>>();
        a.fp == b.fp
            && a.logic == b.logic
            && a.rank == b.rank
            && a.atomic == b.atomic
            && fps(&a.point_extensions) == fps(&b.point_extensions)
            && fps(&a.set_extensions) == fps(&b.set_extensions)
    }
}

impl Eq for RankType {}

impl Hash for RankType {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.fp.hash(state);
    }
}

impl fmt::Display for RankType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.0.logic, self.0.rank, self.fingerprint())
    }
}

/// Type identifier, comparable only within one [`TypeContext`].
pub type TypeId = u32;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    rank: u32,
    atomic: u32,
    points: Box<[u32]>,
    sets: Box<[u32]>,
}

/// Hash-consing table for types of structures over one vocabulary.
/// Ids from the same context are equal iff the types are equal.
#[derive(Default)]
pub struct TypeContext {
    vocab: Option<Vocabulary>,
    atomics: HashMap<Box<[u64]>, u32>,
    atomic_list: Vec<Box<[u64]>>,
    keys: HashMap<Key, u32>,
    key_list: Vec<(Logic, Key)>,
}

impl TypeContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct types interned so far, over all ranks.
    pub fn interned(&self) -> usize {
        self.key_list.len()
    }

    pub fn type_of(&mut self, a: &PointedStructure, m: usize, logic: Logic, caps: &Caps) -> Result<TypeId> {
        let d = Dense::new(&a.structure);
        let view: Vec<u32> = (0..d.len() as u32).collect();
        self.type_of_induced(&a.structure, &d, &view, &a.tuple, m, logic, caps)
    }

    /// Type of the substructure of `s` induced by the dense indices in
    /// `view` (ascending), pinned at `tuple`. `d` must be `Dense::new(s)`.
    /// Avoids materialising the substructure when many subsets of one
    /// structure are typed.
    #[allow(clippy::too_many_arguments)]
    pub fn type_of_induced(
        &mut self,
        s: &Structure,
        d: &Dense,
        view: &[u32],
        tuple: &[Element],
        m: usize,
        logic: Logic,
        caps: &Caps,
    ) -> Result<TypeId> {
        caps.check(view.len(), logic.is_mso())?;
        match &self.vocab {
            None => self.vocab = Some(s.vocabulary().clone()),
            Some(v) if v != s.vocabulary() => {
                return Err(Error::VocabularyMismatch("type context is bound to another vocabulary".into()))
            }
            _ => {}
        }
        let mut pos = vec![u32::MAX; d.len()];
        for (i, &x) in view.iter().enumerate() {
            pos[x as usize] = i as u32;
        }
        if d.constants().iter().any(|&c| pos[c as usize] == u32::MAX) {
            return Err(Error::invalid("induced universe must contain every constant"));
        }
        let mut tuple: Vec<u32> = tuple
            .iter()
            .map(|e| d.index_of(*e).filter(|&i| pos[i as usize] != u32::MAX).ok_or(Error::OutsideUniverse(*e)))
            .collect::<Result<_>>()?;
        let mut b = Builder { d, view, pos, logic, ctx: self, sets: Vec::new(), buf: Vec::new(), seq: Vec::new() };
        Ok(b.ty(&mut tuple, m))
    }

    /// Converts an id into a context-free [`RankType`].
    pub fn materialize(&self, id: TypeId) -> RankType {
        let mut memo = HashMap::new();
        self.mat(id, &mut memo)
    }

    fn mat(&self, id: TypeId, memo: &mut HashMap<TypeId, RankType>) -> RankType {
        if let Some(t) = memo.get(&id) {
            return t.clone();
        }
        let (logic, key) = &self.key_list[id as usize];
        let mut pts: Vec<RankType> = key.points.iter().map(|&c| self.mat(c, memo)).collect();
        let mut sets: Vec<RankType> = key.sets.iter().map(|&c| self.mat(c, memo)).collect();
        pts.sort_by_key(|a| a.0.fp);
        sets.sort_by_key(|a| a.0.fp);
        let atomic = self.atomic_list[key.atomic as usize].to_vec();
        let mut h = Sha256::new();
        h.update([*logic as u8]);
        h.update((key.rank as u64).to_le_bytes());
        h.update((atomic.len() as u64).to_le_bytes());
        for w in &atomic {
            h.update(w.to_le_bytes());
        }
        h.update(b"P");
        pts.iter().for_each(|t| h.update(t.0.fp));
        h.update(b"S");
        sets.iter().for_each(|t| h.update(t.0.fp));
        let digest = h.finalize();
        let mut fp = [0u8; 16];
        fp.copy_from_slice(&digest[..16]);
        let t = RankType(Arc::new(TypeNode { logic: *logic, rank: key.rank as usize, atomic, point_extensions: pts, set_extensions: sets, fp }));
        memo.insert(id, t.clone());
        t
    }
}

struct Builder<'a> {
    d: &'a Dense,
    view: &'a [u32],
    /// Dense index to position in `view`; set parameters are masks over positions.
    pos: Vec<u32>,
    logic: Logic,
    ctx: &'a mut TypeContext,
    sets: Vec<u64>,
    buf: Vec<u64>,
    seq: Vec<u32>,
}

struct Bits<'a> {
    words: &'a mut Vec<u64>,
    used: u32,
}

impl Bits<'_> {
    #[inline]
    fn push(&mut self, bit: bool) {
        if self.used == 64 {
            self.words.push(0);
            self.used = 0;
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << self.used;
        }
        self.used += 1;
    }

    fn push_small(&mut self, v: usize, width: u32) {
        for i in 0..width {
            self.push(v >> i & 1 == 1);
        }
    }
}

impl Builder<'_> {
    /// Atomic type of `tuple ++ constants` with the current set parameters.
    fn atomic(&mut self, tuple: &[u32]) -> u32 {
        let mut seq = std::mem::take(&mut self.seq);
        seq.clear();
        seq.extend(tuple.iter().chain(self.d.constants()));
        let len = seq.len();
        self.buf.clear();
        self.buf.push(0);
        let mut bits = Bits { words: &mut self.buf, used: 0 };
        bits.push_small(len, 16);
        let width = usize::BITS - len.leading_zeros();
        for i in 0..len {
            let first = seq.iter().position(|&x| x == seq[i]).unwrap();
            bits.push_small(first, width);
        }
        let mut args = Vec::new();
        for r in 0..self.d.relation_count() {
            let k = self.d.arity(r);
            match k {
                1 => seq.iter().for_each(|&a| bits.push(self.d.holds1(r, a))),
                2 => {
                    for &a in &seq {
                        for &b in &seq {
                            bits.push(self.d.holds2(r, a, b));
                        }
                    }
                }
                _ => {
                    let total = len.pow(k as u32);
                    for code in 0..total {
                        args.clear();
                        let mut c = code;
                        for _ in 0..k {
                            args.push(seq[c % len]);
                            c /= len;
                        }
                        bits.push(self.d.holds(r, &args));
                    }
                }
            }
        }
        for &s in &self.sets {
            seq.iter().for_each(|&a| bits.push(s >> self.pos[a as usize] & 1 == 1));
        }
        self.seq = seq;
        if let Some(&id) = self.ctx.atomics.get(&self.buf[..]) {
            return id;
        }
        let id = self.ctx.atomic_list.len() as u32;
        let boxed: Box<[u64]> = self.buf.clone().into_boxed_slice();
        self.ctx.atomics.insert(boxed.clone(), id);
        self.ctx.atomic_list.push(boxed);
        id
    }

    fn ty(&mut self, tuple: &mut Vec<u32>, m: usize) -> TypeId {
        let atomic = self.atomic(tuple);
        let n = self.view.len();
        let (mut points, mut sets) = (Vec::new(), Vec::new());
        if m > 0 {
            for &b in self.view {
                tuple.push(b);
                points.push(self.ty(tuple, m - 1));
                tuple.pop();
            }
            points.sort_unstable();
            points.dedup();
            if self.logic.is_mso() {
                for mask in 0..1u64 << n {
                    self.sets.push(mask);
                    sets.push(self.ty(tuple, m - 1));
                    self.sets.pop();
                }
                sets.sort_unstable();
                sets.dedup();
            }
        }
        let key = Key { rank: m as u32, atomic, points: points.into(), sets: sets.into() };
        if let Some(&id) = self.ctx.keys.get(&key) {
            return id;
        }
        let id = self.ctx.key_list.len() as u32;
        self.ctx.keys.insert(key.clone(), id);
        self.ctx.key_list.push((self.logic, key));
        id
    }
}

fn check_pair(a: &PointedStructure, b: &PointedStructure) -> Result<()> {
    if a.structure.vocabulary() != b.structure.vocabulary() {
        return Err(Error::VocabularyMismatch("structures over different vocabularies".into()));
    }
    if a.tuple.len() != b.tuple.len() {
        return Err(Error::TupleLength(a.tuple.len(), b.tuple.len()));
    }
    Ok(())
}

/// The canonical rank-m type of `(A, ā)` in the given logic.
pub fn rank_type(a: &PointedStructure, m: usize, logic: Logic, caps: &Caps) -> Result<RankType> {
    let mut ctx = TypeContext::new();
    let id = ctx.type_of(a, m, logic, caps)?;
    Ok(ctx.materialize(id))
}

/// `(A, ā) ≡_{m,ℒ} (B, b̄)` by type comparison.
pub fn equivalent(a: &PointedStructure, b: &PointedStructure, m: usize, logic: Logic, caps: &Caps) -> Result<bool> {
    check_pair(a, b)?;
    let mut ctx = TypeContext::new();
    Ok(ctx.type_of(a, m, logic, caps)? == ctx.type_of(b, m, logic, caps)?)
}

/// Number of distinct rank-m types across the family.
pub fn count_equivalence_classes(family: &[PointedStructure], m: usize, logic: Logic, caps: &Caps) -> Result<usize> {
    let mut ctx = TypeContext::new();
    let mut seen = BTreeSet::new();
    for (i, a) in family.iter().enumerate() {
        if i > 0 {
            check_pair(&family[0], a)?;
        }
        seen.insert(ctx.type_of(a, m, logic, caps)?);
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{disjoint_union, Structure};

    fn p(s: Structure) -> PointedStructure {
        s.unpointed()
    }

    const CAPS: Caps = Caps { fo_universe: 16, mso_universe: 8 };

    #[test]
    fn path_threshold() {
        assert_eq!(rank_type(&p(Structure::path(9)), 2, Logic::FO, &CAPS).unwrap(), rank_type(&p(Structure::path(10)), 2, Logic::FO, &CAPS).unwrap());
        assert!(!equivalent(&p(Structure::path(1)), &p(Structure::path(9)), 2, Logic::FO, &CAPS).unwrap());
    }

    #[test]
    fn one_vs_two_points() {
        let k1 = Structure::digraph([0], &[]);
        let two = disjoint_union(&k1, &k1).unwrap();
        assert_ne!(rank_type(&p(k1), 2, Logic::FO, &CAPS).unwrap(), rank_type(&p(two), 2, Logic::FO, &CAPS).unwrap());
    }

    #[test]
    fn rank_zero_is_partial_isomorphism() {
        let s = Structure::digraph([1, 2, 3], &[(1, 2)]);
        let t = |tuple: Vec<u32>| rank_type(&s.clone().pointed(tuple).unwrap(), 0, Logic::FO, &CAPS).unwrap();
        assert_eq!(t(vec![1, 2]), t(vec![1, 2]));
        assert_ne!(t(vec![1, 2]), t(vec![2, 1]));
        assert_ne!(t(vec![1, 3]), t(vec![1, 1]));
        assert!(t(vec![1]).node().point_extensions.is_empty());
    }

    #[test]
    fn fingerprints_are_stable() {
        let a = rank_type(&p(Structure::path(3)), 2, Logic::MSO, &CAPS).unwrap();
        let b = rank_type(&p(Structure::path(3)), 2, Logic::MSO, &CAPS).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 32);
    }

    #[test]
    fn class_counts() {
        let copies: Vec<_> = (0..3).map(|_| p(Structure::path(2))).collect();
        assert_eq!(count_equivalence_classes(&copies, 3, Logic::FO, &CAPS).unwrap(), 1);
        let paths: Vec<_> = (0..=12).map(|n| p(Structure::path(n))).collect();
        let v = count_equivalence_classes(&paths, 2, Logic::FO, &CAPS).unwrap();
        assert!(v <= 10, "{v}");
        assert_eq!(count_equivalence_classes(&paths, 0, Logic::FO, &CAPS).unwrap(), 1);
    }

    #[test]
    fn caps_and_mismatch() {
        assert!(matches!(rank_type(&p(Structure::path(9)), 1, Logic::MSO, &CAPS), Err(Error::CapExceeded { .. })));
        let q = p(Structure::new(Vocabulary::with(&[("P", 1)], &[]), [1]));
        assert!(equivalent(&q, &p(Structure::path(1)), 1, Logic::FO, &CAPS).is_err());
    }
}
