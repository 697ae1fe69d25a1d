use super::{Formula, Term};
use crate::structures::{Dense, Element, Structure};
use crate::{Caps, Error, Result};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
enum T {
    Slot(usize),
    Const(u32),
}

#[derive(Debug, Clone)]
enum C {
    True,
    False,
    Rel(usize, Vec<T>),
    Eq(T, T),
    In(usize, T),
    Not(Box<C>),
    And(Vec<C>),
    Or(Vec<C>),
    Imp(Box<C>, Box<C>),
    Ex(usize, Box<C>),
    All(usize, Box<C>),
    ExS(usize, Box<C>),
    AllS(usize, Box<C>),
}

struct Compiler<'a> {
    dense: &'a Dense,
    structure: &'a Structure,
    points: Vec<(String, usize)>,
    sets: Vec<(String, usize)>,
    free_points: Vec<(String, usize)>,
    free_sets: Vec<(String, usize)>,
    n_points: usize,
    n_sets: usize,
}

impl Compiler<'_> {
    fn term(&mut self, t: &Term) -> Result<T> {
        match t {
            Term::Const(c) => {
                let e = self.structure.constant(c).ok_or_else(|| Error::Unknown(c.clone()))?;
                Ok(T::Const(self.dense.index_of(e).unwrap()))
            }
            Term::Var(v) => {
                if let Some((_, s)) = self.points.iter().rev().find(|(n, _)| n == v) {
                    return Ok(T::Slot(*s));
                }
                if let Some((_, s)) = self.free_points.iter().find(|(n, _)| n == v) {
                    return Ok(T::Slot(*s));
                }
                let s = self.n_points;
                self.n_points += 1;
                self.free_points.push((v.clone(), s));
                Ok(T::Slot(s))
            }
        }
    }

    fn set_slot(&mut self, x: &str) -> usize {
        if let Some((_, s)) = self.sets.iter().rev().find(|(n, _)| n == x) {
            return *s;
        }
        if let Some((_, s)) = self.free_sets.iter().find(|(n, _)| n == x) {
            return *s;
        }
        let s = self.n_sets;
        self.n_sets += 1;
        self.free_sets.push((x.to_string(), s));
        s
    }

    fn compile(&mut self, f: &Formula) -> Result<C> {
        use Formula::*;
        Ok(match f {
            True => C::True,
            False => C::False,
            Rel(r, ts) => {
                let idx = self.dense.relation_index(r).ok_or_else(|| Error::Unknown(r.clone()))?;
                if self.dense.arity(idx) != ts.len() {
                    return Err(Error::Arity { name: r.clone(), expected: self.dense.arity(idx), got: ts.len() });
                }
                C::Rel(idx, ts.iter().map(|t| self.term(t)).collect::<Result<_>>()?)
            }
            Eq(a, b) => C::Eq(self.term(a)?, self.term(b)?),
            In(x, t) => {
                let s = self.set_slot(x);
                C::In(s, self.term(t)?)
            }
            Not(g) => C::Not(Box::new(self.compile(g)?)),
            And(fs) => C::And(fs.iter().map(|g| self.compile(g)).collect::<Result<_>>()?),
            Or(fs) => C::Or(fs.iter().map(|g| self.compile(g)).collect::<Result<_>>()?),
            Implies(a, b) => C::Imp(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Exists(v, g) | Forall(v, g) => {
                let s = self.n_points;
                self.n_points += 1;
                self.points.push((v.clone(), s));
                let body = self.compile(g);
                self.points.pop();
                let body = Box::new(body?);
                if matches!(f, Exists(..)) {
                    C::Ex(s, body)
                } else {
                    C::All(s, body)
                }
            }
            ExistsSet(v, g) | ForallSet(v, g) => {
                let s = self.n_sets;
                self.n_sets += 1;
                self.sets.push((v.clone(), s));
                let body = self.compile(g);
                self.sets.pop();
                let body = Box::new(body?);
                if matches!(f, ExistsSet(..)) {
                    C::ExS(s, body)
                } else {
                    C::AllS(s, body)
                }
            }
        })
    }
}

/// A formula compiled against one structure, evaluable under many
/// assignments of its free variables.
pub struct Evaluator {
    dense: Dense,
    code: C,
    n_points: usize,
    n_sets: usize,
    free_points: Vec<(String, usize)>,
    free_sets: Vec<(String, usize)>,
}

impl Evaluator {
    pub fn new(structure: &Structure, f: &Formula, caps: &Caps) -> Result<Self> {
        caps.check(structure.size(), !f.is_fo())?;
        let dense = Dense::new(structure);
        let mut c = Compiler {
            dense: &dense,
            structure,
            points: Vec::new(),
            sets: Vec::new(),
            free_points: Vec::new(),
            free_sets: Vec::new(),
            n_points: 0,
            n_sets: 0,
        };
        let code = c.compile(f)?;
        let (n_points, n_sets, free_points, free_sets) = (c.n_points, c.n_sets, c.free_points, c.free_sets);
        Ok(Evaluator { dense, code, n_points, n_sets, free_points, free_sets })
    }

    /// Evaluates with free point variables bound by name.
    pub fn eval(&self, points: &BTreeMap<String, Element>, sets: &BTreeMap<String, BTreeSet<Element>>) -> Result<bool> {
        let mut p = vec![0u32; self.n_points];
        let mut s = vec![0u64; self.n_sets];
        for (name, slot) in &self.free_points {
            let e = points.get(name).ok_or_else(|| Error::Unbound(name.clone()))?;
            p[*slot] = self.dense.index_of(*e).ok_or(Error::OutsideUniverse(*e))?;
        }
        for (name, slot) in &self.free_sets {
            let set = sets.get(name).ok_or_else(|| Error::Unbound(name.clone()))?;
            for &e in set {
                s[*slot] |= 1 << self.dense.index_of(e).ok_or(Error::OutsideUniverse(e))?;
            }
        }
        Ok(self.run(&self.code, &mut p, &mut s))
    }

    /// Evaluates with the named variables bound positionally to `tuple`.
    pub fn eval_tuple(&self, vars: &[String], tuple: &[Element]) -> Result<bool> {
        let env: BTreeMap<String, Element> = vars.iter().cloned().zip(tuple.iter().copied()).collect();
        self.eval(&env, &BTreeMap::new())
    }

    #[inline]
    fn t(&self, t: &T, p: &[u32]) -> u32 {
        match t {
            T::Slot(s) => p[*s],
            T::Const(c) => *c,
        }
    }

    fn run(&self, c: &C, p: &mut [u32], s: &mut [u64]) -> bool {
        let n = self.dense.len() as u32;
        match c {
            C::True => true,
            C::False => false,
            C::Rel(r, ts) => match ts.len() {
                1 => self.dense.holds1(*r, self.t(&ts[0], p)),
                2 => self.dense.holds2(*r, self.t(&ts[0], p), self.t(&ts[1], p)),
                _ => {
                    let args: Vec<u32> = ts.iter().map(|t| self.t(t, p)).collect();
                    self.dense.holds(*r, &args)
                }
            },
            C::Eq(a, b) => self.t(a, p) == self.t(b, p),
            C::In(x, t) => s[*x] >> self.t(t, p) & 1 == 1,
            C::Not(g) => !self.run(g, p, s),
            C::And(gs) => gs.iter().all(|g| self.run(g, p, s)),
            C::Or(gs) => gs.iter().any(|g| self.run(g, p, s)),
            C::Imp(a, b) => !self.run(a, p, s) || self.run(b, p, s),
            C::Ex(v, g) => (0..n).any(|e| {
                p[*v] = e;
                self.run(g, p, s)
            }),
            C::All(v, g) => (0..n).all(|e| {
                p[*v] = e;
                self.run(g, p, s)
            }),
            C::ExS(x, g) => (0..1u64 << n).any(|m| {
                s[*x] = m;
                self.run(g, p, s)
            }),
            C::AllS(x, g) => (0..1u64 << n).all(|m| {
                s[*x] = m;
                self.run(g, p, s)
            }),
        }
    }
}

/// Truth of `f` in `a` under the given environments, default caps.
pub fn evaluate(
    a: &Structure,
    points: &BTreeMap<String, Element>,
    sets: &BTreeMap<String, BTreeSet<Element>>,
    f: &Formula,
) -> Result<bool> {
    evaluate_with(a, points, sets, f, &Caps::default())
}

pub fn evaluate_with(
    a: &Structure,
    points: &BTreeMap<String, Element>,
    sets: &BTreeMap<String, BTreeSet<Element>>,
    f: &Formula,
    caps: &Caps,
) -> Result<bool> {
    Evaluator::new(a, f, caps)?.eval(points, sets)
}

/// `a ⊨ f` for a sentence, default caps.
pub fn models(a: &Structure, f: &Formula) -> Result<bool> {
    models_with(a, f, &Caps::default())
}

pub fn models_with(a: &Structure, f: &Formula, caps: &Caps) -> Result<bool> {
    evaluate_with(a, &BTreeMap::new(), &BTreeMap::new(), f, caps)
}
