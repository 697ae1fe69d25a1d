//! FO/MSO formulas: syntax, parsing, evaluation and syntactic transformations.

mod eval;
mod ops;
mod parse;

pub use eval::{evaluate, evaluate_with, models, models_with, Evaluator};
pub use ops::{canonical_conjunctive_query, fresh_name, relativize, rename_bound_apart, size_bound_sentence, substitute};
pub use parse::{parse_formula, parse_formula_with, FreeVars, ParseOptions};

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(v) | Term::Const(v) => v,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// FO/MSO abstract syntax. `And`/`Or` are n-ary; the empty conjunction is
/// true and the empty disjunction false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    /// Set-variable membership `X(t)`.
    In(String, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
}

pub fn var(v: &str) -> Term {
    Term::Var(v.to_string())
}

pub fn rel(name: &str, vars: &[&str]) -> Formula {
    Formula::Rel(name.to_string(), vars.iter().map(|v| var(v)).collect())
}

pub fn eq(a: &str, b: &str) -> Formula {
    Formula::Eq(var(a), var(b))
}

/// Conjunction with the unit laws applied: `[] ↦ true`, `[f] ↦ f`.
pub fn and(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        0 => Formula::True,
        1 => fs.pop().unwrap(),
        _ => Formula::And(fs),
    }
}

/// Disjunction with the unit laws applied: `[] ↦ false`, `[f] ↦ f`.
pub fn or(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        0 => Formula::False,
        1 => fs.pop().unwrap(),
        _ => Formula::Or(fs),
    }
}

pub fn not(f: Formula) -> Formula {
    Formula::Not(Box::new(f))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

pub fn exists(v: &str, f: Formula) -> Formula {
    Formula::Exists(v.to_string(), Box::new(f))
}

pub fn forall(v: &str, f: Formula) -> Formula {
    Formula::Forall(v.to_string(), Box::new(f))
}

pub fn exists_all<S: AsRef<str>>(vs: &[S], f: Formula) -> Formula {
    vs.iter().rev().fold(f, |acc, v| exists(v.as_ref(), acc))
}

pub fn forall_all<S: AsRef<str>>(vs: &[S], f: Formula) -> Formula {
    vs.iter().rev().fold(f, |acc, v| forall(v.as_ref(), acc))
}

impl Formula {
    /// Quantifier rank, counting point and set quantifiers alike.
    pub fn rank(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Rel(..) | Eq(..) | In(..) => 0,
            Not(f) => f.rank(),
            And(fs) | Or(fs) => fs.iter().map(|f| f.rank()).max().unwrap_or(0),
            Implies(a, b) => a.rank().max(b.rank()),
            Exists(_, f) | Forall(_, f) | ExistsSet(_, f) | ForallSet(_, f) => 1 + f.rank(),
        }
    }

    /// True iff no set quantifier and no set atom occurs.
    pub fn is_fo(&self) -> bool {
        let mut fo = true;
        self.visit(&mut |f| {
            if matches!(f, Formula::In(..) | Formula::ExistsSet(..) | Formula::ForallSet(..)) {
                fo = false;
            }
        });
        fo
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.rank() == 0
    }

    pub fn visit(&self, g: &mut impl FnMut(&Formula)) {
        use Formula::*;
        g(self);
        match self {
            Not(f) | Exists(_, f) | Forall(_, f) | ExistsSet(_, f) | ForallSet(_, f) => f.visit(g),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.visit(g)),
            Implies(a, b) => {
                a.visit(g);
                b.visit(g);
            }
            _ => {}
        }
    }

    fn collect_free(&self, bound_p: &mut Vec<String>, bound_s: &mut Vec<String>, out_p: &mut BTreeSet<String>, out_s: &mut BTreeSet<String>) {
        use Formula::*;
        let term = |t: &Term, bound_p: &Vec<String>, out_p: &mut BTreeSet<String>| {
            if let Term::Var(v) = t {
                if !bound_p.contains(v) {
                    out_p.insert(v.clone());
                }
            }
        };
        match self {
            True | False => {}
            Rel(_, ts) => ts.iter().for_each(|t| term(t, bound_p, out_p)),
            Eq(a, b) => {
                term(a, bound_p, out_p);
                term(b, bound_p, out_p);
            }
            In(x, t) => {
                if !bound_s.contains(x) {
                    out_s.insert(x.clone());
                }
                term(t, bound_p, out_p);
            }
            Not(f) => f.collect_free(bound_p, bound_s, out_p, out_s),
            And(fs) | Or(fs) => fs.iter().for_each(|f| f.collect_free(bound_p, bound_s, out_p, out_s)),
            Implies(a, b) => {
                a.collect_free(bound_p, bound_s, out_p, out_s);
                b.collect_free(bound_p, bound_s, out_p, out_s);
            }
            Exists(v, f) | Forall(v, f) => {
                bound_p.push(v.clone());
                f.collect_free(bound_p, bound_s, out_p, out_s);
                bound_p.pop();
            }
            ExistsSet(v, f) | ForallSet(v, f) => {
                bound_s.push(v.clone());
                f.collect_free(bound_p, bound_s, out_p, out_s);
                bound_s.pop();
            }
        }
    }

    /// Free point variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut p = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut Vec::new(), &mut p, &mut BTreeSet::new());
        p
    }

    /// Free set variables.
    pub fn free_set_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut Vec::new(), &mut BTreeSet::new(), &mut s);
        s
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty() && self.free_set_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free, point or set.
    pub fn variable_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Rel(_, ts) => out.extend(ts.iter().filter_map(|t| match t {
                Term::Var(v) => Some(v.clone()),
                _ => None,
            })),
            Formula::Eq(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::In(x, t) => {
                out.insert(x.clone());
                if let Term::Var(v) = t {
                    out.insert(v.clone());
                }
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) | Formula::ExistsSet(v, _) | Formula::ForallSet(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Relation symbols with the arities they are used at.
    pub fn relations_used(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Rel(r, ts) = f {
                out.insert((r.clone(), ts.len()));
            }
        });
        out
    }

    /// True iff built from atoms, `true`, `false`, `∧`, `∨`, `∃` only.
    pub fn is_existential_positive(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |f| {
            if matches!(f, Formula::Not(_) | Formula::Implies(..) | Formula::Forall(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) | Formula::In(..)) {
                ok = false;
            }
        });
        ok
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        let chain = |f: &mut fmt::Formatter<'_>, fs: &[Formula], op: &str, unit: &str| -> fmt::Result {
            match fs.len() {
                0 => f.write_str(unit),
                1 => write!(f, "{}", fs[0]),
                _ => {
                    f.write_str("(")?;
                    for (i, g) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " {op} ")?;
                        }
                        write!(f, "{g}")?;
                    }
                    f.write_str(")")
                }
            }
        };
        match self {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Rel(r, ts) => {
                write!(f, "{r}(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Eq(a, b) => write!(f, "{a}={b}"),
            In(x, t) => write!(f, "{x}({t})"),
            Not(g) => write!(f, "!{g}"),
            And(fs) => chain(f, fs, "&", "true"),
            Or(fs) => chain(f, fs, "|", "false"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            Exists(v, g) => write!(f, "exists {v}. {g}"),
            Forall(v, g) => write!(f, "forall {v}. {g}"),
            ExistsSet(v, g) => write!(f, "Exists {v}. {g}"),
            ForallSet(v, g) => write!(f, "Forall {v}. {g}"),
        }
    }
}
