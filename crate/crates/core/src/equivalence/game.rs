use super::{check_pair, Logic};
use crate::structures::{Dense, PointedStructure};
use crate::{Caps, Error, Result};

/// Decides the m-round Ehrenfeucht–Fraïssé game by exhaustive minimax.
/// Independent of the type construction; used to cross-check it.
pub fn ef_game_decide(a: &PointedStructure, b: &PointedStructure, m: usize, logic: Logic, caps: &Caps) -> Result<bool> {
    check_pair(a, b)?;
    caps.check(a.structure.size(), logic.is_mso())?;
    caps.check(b.structure.size(), logic.is_mso())?;
    let da = Dense::new(&a.structure);
    let db = Dense::new(&b.structure);
    let idx = |d: &Dense, t: &[u32]| -> Result<Vec<u32>> { t.iter().map(|e| d.index_of(*e).ok_or(Error::OutsideUniverse(*e))).collect() };
    let mut g = Game {
        a: Side { d: &da, seq: idx(&da, &a.tuple)?, sets: Vec::new() },
        b: Side { d: &db, seq: idx(&db, &b.tuple)?, sets: Vec::new() },
        mso: logic.is_mso(),
    };
    Ok(g.duplicator_wins(m))
}

struct Side<'a> {
    d: &'a Dense,
    seq: Vec<u32>,
    sets: Vec<u64>,
}

impl Side<'_> {
    fn full(&self) -> Vec<u32> {
        self.seq.iter().chain(self.d.constants()).copied().collect()
    }
}

struct Game<'a> {
    a: Side<'a>,
    b: Side<'a>,
    mso: bool,
}

impl Game<'_> {
    /// The chosen elements and constants induce a partial isomorphism that
    /// also respects membership in every chosen set.
    fn partial_iso(&self) -> bool {
        let (sa, sb) = (self.a.full(), self.b.full());
        let n = sa.len();
        for i in 0..n {
            for j in 0..n {
                if (sa[i] == sa[j]) != (sb[i] == sb[j]) {
                    return false;
                }
            }
        }
        for (x, y) in self.a.sets.iter().zip(&self.b.sets) {
            if (0..n).any(|i| (x >> sa[i] & 1) != (y >> sb[i] & 1)) {
                return false;
            }
        }
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        for r in 0..self.a.d.relation_count() {
            let k = self.a.d.arity(r);
            if n == 0 && k > 0 {
                continue;
            }
            let mut pos = vec![0usize; k];
            loop {
                ta.clear();
                tb.clear();
                ta.extend(pos.iter().map(|&p| sa[p]));
                tb.extend(pos.iter().map(|&p| sb[p]));
                if self.a.d.holds(r, &ta) != self.b.d.holds(r, &tb) {
                    return false;
                }
                let Some(i) = (0..k).find(|&i| pos[i] + 1 < n) else { break };
                pos[i] += 1;
                pos[..i].iter_mut().for_each(|p| *p = 0);
            }
        }
        true
    }

    fn duplicator_wins(&mut self, m: usize) -> bool {
        if !self.partial_iso() {
            return false;
        }
        if m == 0 {
            return true;
        }
        self.point_moves(m, false) && self.point_moves(m, true) && (!self.mso || (self.set_moves(m, false) && self.set_moves(m, true)))
    }

    fn swap(&mut self) {
        std::mem::swap(&mut self.a, &mut self.b);
    }

    /// Spoiler picks in the first structure (second if `flip`), duplicator answers.
    fn point_moves(&mut self, m: usize, flip: bool) -> bool {
        if flip {
            self.swap();
        }
        let (na, nb) = (self.a.d.len() as u32, self.b.d.len() as u32);
        let mut ok = true;
        'spoiler: for x in 0..na {
            self.a.seq.push(x);
            for y in 0..nb {
                self.b.seq.push(y);
                let w = if flip { self.swapped(m) } else { self.duplicator_wins(m - 1) };
                self.b.seq.pop();
                if w {
                    self.a.seq.pop();
                    continue 'spoiler;
                }
            }
            self.a.seq.pop();
            ok = false;
            break;
        }
        if flip {
            self.swap();
        }
        ok
    }

    fn set_moves(&mut self, m: usize, flip: bool) -> bool {
        if flip {
            self.swap();
        }
        let (na, nb) = (self.a.d.len(), self.b.d.len());
        let mut ok = true;
        'spoiler: for x in 0..1u64 << na {
            self.a.sets.push(x);
            for y in 0..1u64 << nb {
                self.b.sets.push(y);
                let w = if flip { self.swapped(m) } else { self.duplicator_wins(m - 1) };
                self.b.sets.pop();
                if w {
                    self.a.sets.pop();
                    continue 'spoiler;
                }
            }
            self.a.sets.pop();
            ok = false;
            break;
        }
        if flip {
            self.swap();
        }
        ok
    }

    /// Evaluates the continuation with sides restored to their original roles.
    fn swapped(&mut self, m: usize) -> bool {
        self.swap();
        let w = self.duplicator_wins(m - 1);
        self.swap();
        w
    }
}
