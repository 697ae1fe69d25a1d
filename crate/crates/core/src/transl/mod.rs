//! Translation schemes `Ξ = (ξ, (ξ_R))` of dimension `t`: `Ξ*` on
//! structures, `Ξ#` on formulas, and operation trees built from them.

mod builtin;

pub use builtin::{builtin_scheme, operation_tree_eval, OpKind, Operation, Registry, DIAMOND, SCHEME_NAMES};

use crate::logic::{
    and, exists_all, forall_all, implies, parse_formula_with, rename_bound_apart, substitute, Evaluator, Formula,
    FreeVars, ParseOptions, Term,
};
use crate::structures::{Element, Structure, Vocabulary};
use crate::{Caps, Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Most tuples `Ξ*` will enumerate for the universe or for one relation.
const MAX_TUPLES: usize = 1 << 20;

/// Name of the scheme variable for coordinate `j` of argument `i` (both 1-based).
pub fn scheme_var(i: usize, j: usize) -> String {
    format!("x{i}_{j}")
}

fn scheme_vars(args: usize, dim: usize) -> Vec<String> {
    (1..=args).flat_map(|i| (1..=dim).map(move |j| scheme_var(i, j))).collect()
}

fn constants_used(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    f.visit(&mut |g| {
        let ts: Vec<&Term> = match g {
            Formula::Rel(_, ts) => ts.iter().collect(),
            Formula::Eq(a, b) => vec![a, b],
            Formula::In(_, t) => vec![t],
            _ => vec![],
        };
        out.extend(ts.into_iter().filter_map(|t| match t {
            Term::Const(c) => Some(c.clone()),
            Term::Var(_) => None,
        }));
    });
    out
}

/// Every relation and constant of `f` is in `v` at the right arity.
fn check_over(f: &Formula, v: &Vocabulary) -> Result<()> {
    for (r, k) in f.relations_used() {
        match v.arity(&r) {
            None => return Err(Error::Unknown(r)),
            Some(a) if a != k => return Err(Error::Arity { name: r, expected: a, got: k }),
            _ => {}
        }
    }
    match constants_used(f).into_iter().find(|c| !v.is_constant(c)) {
        Some(c) => Err(Error::Unknown(c)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationScheme {
    dim: usize,
    source: Vocabulary,
    target: Vocabulary,
    domain: Formula,
    relations: BTreeMap<String, Formula>,
}

impl TranslationScheme {
    /// Validates: `dim ≥ 1`; MSO only when `dim = 1`; no free set variables;
    /// `ξ` free in `x1_1..x1_t`, `ξ_R` free in `x{i}_{j}` with `i ≤ arity(R)`;
    /// one formula per target relation; formulas over `source`.
    pub fn new(
        dim: usize,
        source: Vocabulary,
        target: Vocabulary,
        domain: Formula,
        relations: BTreeMap<String, Formula>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("scheme dimension must be at least 1"));
        }
        if let Some(c) = target.constants().first() {
            return Err(Error::invalid(format!("target vocabulary has constant {c}")));
        }
        let check = |f: &Formula, allowed: &[String]| -> Result<()> {
            if dim > 1 && !f.is_fo() {
                return Err(Error::invalid("set quantifiers need a scheme of dimension 1"));
            }
            if let Some(x) = f.free_set_vars().into_iter().next() {
                return Err(Error::Unbound(x));
            }
            if let Some(v) = f.free_vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::Unbound(v));
            }
            check_over(f, &source)
        };
        check(&domain, &scheme_vars(1, dim))?;
        for (r, k) in target.relations() {
            let f = relations.get(r).ok_or_else(|| Error::invalid(format!("no formula for target relation {r}")))?;
            check(f, &scheme_vars(k, dim))?;
        }
        if let Some(r) = relations.keys().find(|r| target.arity(r).is_none()) {
            return Err(Error::Unknown(r.clone()));
        }
        Ok(TranslationScheme { dim, source, target, domain, relations })
    }

    /// Identity over `v`: `ξ = (x1_1 = x1_1)`, `ξ_R = R(x1_1, …)`.
    pub fn identity(v: &Vocabulary) -> Result<Self> {
        if !v.constants().is_empty() {
            return Err(Error::invalid("identity scheme over a vocabulary with constants"));
        }
        let x = Term::Var(scheme_var(1, 1));
        let relations = v
            .relations()
            .map(|(r, k)| (r.to_string(), Formula::Rel(r.to_string(), (1..=k).map(|i| Term::Var(scheme_var(i, 1))).collect())))
            .collect();
        Self::new(1, v.clone(), v.clone(), Formula::Eq(x.clone(), x), relations)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &Vocabulary {
        &self.source
    }

    pub fn target(&self) -> &Vocabulary {
        &self.target
    }

    pub fn domain(&self) -> &Formula {
        &self.domain
    }

    pub fn relation(&self, r: &str) -> Option<&Formula> {
        self.relations.get(r)
    }

    fn formulas(&self) -> impl Iterator<Item = &Formula> {
        std::iter::once(&self.domain).chain(self.relations.values())
    }

    /// `rank(Ξ)`: the largest quantifier rank among `ξ` and the `ξ_R`.
    pub fn rank(&self) -> usize {
        self.formulas().map(Formula::rank).max().unwrap_or(0)
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.formulas().all(Formula::is_quantifier_free)
    }

    pub fn is_fo(&self) -> bool {
        self.formulas().all(Formula::is_fo)
    }

    /// `Ξ*(A)` with the default numbering base `max(A) + 1`.
    pub fn apply_structure(&self, a: &Structure, caps: &Caps) -> Result<Structure> {
        let base = a.max_element().map_or(1, |m| m + 1);
        self.apply_structure_with_base(a, base, caps)
    }

    /// `Ξ*(A)`. A satisfying tuple `(a_1..a_t)` gets id `Σ a_j·base^(t−j)`
    /// (the element itself when `t = 1`), so ids are row-major over ascending
    /// ids and a shared base makes `Ξ*(B) ⊆ Ξ*(A)` literal for `B ⊆ A`.
    pub fn apply_structure_with_base(&self, a: &Structure, base: Element, caps: &Caps) -> Result<Structure> {
        for (r, k) in self.source.relations() {
            if a.vocabulary().arity(r) != Some(k) {
                return Err(Error::VocabularyMismatch(format!("structure lacks source relation {r}/{k}")));
            }
        }
        if let Some(c) = self.source.constants().iter().find(|c| !a.vocabulary().is_constant(c)) {
            return Err(Error::VocabularyMismatch(format!("structure lacks source constant {c}")));
        }
        if a.max_element().is_some_and(|m| m >= base) {
            return Err(Error::invalid(format!("numbering base {base} does not exceed the largest element")));
        }
        let elems: Vec<Element> = a.universe().iter().copied().collect();
        let t = self.dim;
        tuple_count(elems.len(), t)?;
        let id = |tuple: &[Element]| -> Result<Element> {
            tuple
                .iter()
                .try_fold(0u64, |acc, &e| acc.checked_mul(base as u64).and_then(|x| x.checked_add(e as u64)))
                .and_then(|x| Element::try_from(x).ok())
                .ok_or_else(|| Error::cap("translated element id", usize::MAX, Element::MAX as usize))
        };

        let dom_vars = scheme_vars(1, t);
        let dom = Evaluator::new(a, &self.domain, caps)?;
        let mut universe: Vec<(Element, Vec<Element>)> = Vec::new();
        for tuple in tuples(&elems, t) {
            if dom.eval_tuple(&dom_vars, &tuple)? {
                universe.push((id(&tuple)?, tuple));
            }
        }
        let mut out = Structure::new(self.target.clone(), universe.iter().map(|(e, _)| *e));
        for (r, k) in self.target.relations() {
            tuple_count(universe.len(), k)?;
            let vars = scheme_vars(k, t);
            let ev = Evaluator::new(a, &self.relations[r], caps)?;
            for pick in tuples(&(0..universe.len()).collect::<Vec<_>>(), k) {
                let flat: Vec<Element> = pick.iter().flat_map(|&i| universe[i].1.iter().copied()).collect();
                if ev.eval_tuple(&vars, &flat)? {
                    out.add_fact(r, pick.iter().map(|&i| universe[i].0).collect())?;
                }
            }
        }
        Ok(out)
    }

    /// `Ξ#(φ)` for `φ` over the target vocabulary.
    pub fn apply_formula(&self, phi: &Formula) -> Result<Formula> {
        self.apply_formula_named(phi).map(|(f, _)| f)
    }

    /// `Ξ#(φ)` with the names standing for each free variable of `φ`: the
    /// variable itself when `t = 1`, else `t` fresh coordinates `v_1..v_t`.
    /// An assignment `v ↦ ā` of `Ξ*(A)` corresponds to binding the
    /// coordinates of `v` to `ā` in `A`.
    pub fn apply_formula_named(&self, phi: &Formula) -> Result<(Formula, BTreeMap<String, Vec<String>>)> {
        if self.dim > 1 && !phi.is_fo() {
            return Err(Error::invalid("set quantifiers need a scheme of dimension 1"));
        }
        check_over(phi, &self.target)?;
        let mut names = phi.variable_names();
        for f in self.formulas() {
            names.extend(f.variable_names());
        }
        let split = self.splitter(phi);
        let mut tr = Translator { scheme: self, split: &split, avoid: names };
        for v in split.values().flatten() {
            tr.avoid.insert(v.clone());
        }
        let out = tr.go(phi)?;
        let free = phi.free_vars().into_iter().map(|v| (v.clone(), split[&v].clone())).collect();
        Ok((out, free))
    }

    /// Coordinate names for every point variable of `φ`, all distinct from
    /// each other and from the names `φ` already uses.
    fn splitter(&self, phi: &Formula) -> BTreeMap<String, Vec<String>> {
        let used = phi.variable_names();
        let points: Vec<String> = point_vars(phi).into_iter().collect();
        if self.dim == 1 {
            return points.into_iter().map(|v| (v.clone(), vec![v])).collect();
        }
        let mut sep = String::from("_");
        loop {
            let map: BTreeMap<String, Vec<String>> = points
                .iter()
                .map(|v| (v.clone(), (1..=self.dim).map(|j| format!("{v}{sep}{j}")).collect()))
                .collect();
            let mut seen = BTreeSet::new();
            if map.values().flatten().all(|n| !used.contains(n) && seen.insert(n.clone())) {
                return map;
            }
            sep.push('_');
        }
    }
}

fn point_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = f.free_vars();
    f.visit(&mut |g| {
        if let Formula::Exists(v, _) | Formula::Forall(v, _) = g {
            out.insert(v.clone());
        }
    });
    out
}

fn tuple_count(n: usize, k: usize) -> Result<usize> {
    let count = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    if count > MAX_TUPLES {
        return Err(Error::cap("tuples to enumerate", count, MAX_TUPLES));
    }
    Ok(count)
}

/// All `k`-tuples over `items` in lexicographic order.
fn tuples<T: Copy>(items: &[T], k: usize) -> impl Iterator<Item = Vec<T>> + '_ {
    let n = items.len();
    let total = if k == 0 { 1 } else { n.pow(k as u32) };
    (0..total).map(move |mut code| {
        let mut t = vec![items.first().copied(); k];
        for slot in t.iter_mut().rev() {
            *slot = Some(items[code % n]);
            code /= n;
        }
        t.into_iter().map(Option::unwrap).collect()
    })
}

struct Translator<'a> {
    scheme: &'a TranslationScheme,
    split: &'a BTreeMap<String, Vec<String>>,
    avoid: BTreeSet<String>,
}

impl Translator<'_> {
    /// A scheme formula with its free `x{i}_{j}` replaced by the coordinates
    /// of the `i`-th argument, bound variables renamed apart first.
    fn instance(&mut self, f: &Formula, args: &[&str]) -> Result<Formula> {
        let f = rename_bound_apart(f, &mut self.avoid);
        let free = f.free_vars();
        let mut mapping = BTreeMap::new();
        for (i, a) in args.iter().enumerate() {
            for (j, c) in self.split[*a].iter().enumerate() {
                let key = scheme_var(i + 1, j + 1);
                if free.contains(&key) {
                    mapping.insert(key, Term::Var(c.clone()));
                }
            }
        }
        substitute(&f, &mapping)
    }

    fn dom(&mut self, v: &str) -> Result<Formula> {
        let d = self.scheme.domain.clone();
        self.instance(&d, &[v])
    }

    fn var(t: &Term) -> Result<&str> {
        match t {
            Term::Var(v) => Ok(v),
            Term::Const(c) => Err(Error::Unknown(c.clone())),
        }
    }

    fn go(&mut self, f: &Formula) -> Result<Formula> {
        use Formula::*;
        Ok(match f {
            True | False => f.clone(),
            Rel(r, ts) => {
                let args: Vec<&str> = ts.iter().map(Self::var).collect::<Result<_>>()?;
                let xi = self.scheme.relations[r].clone();
                let mut parts = vec![self.instance(&xi, &args)?];
                for a in &args {
                    parts.push(self.dom(a)?);
                }
                and(parts)
            }
            Eq(a, b) => {
                let (a, b) = (Self::var(a)?, Self::var(b)?);
                let mut parts: Vec<Formula> = self.split[a]
                    .iter()
                    .zip(&self.split[b])
                    .map(|(u, v)| Eq(Term::Var(u.clone()), Term::Var(v.clone())))
                    .collect();
                parts.push(self.dom(a)?);
                parts.push(self.dom(b)?);
                and(parts)
            }
            In(x, t) => {
                let v = Self::var(t)?;
                and(vec![In(x.clone(), Term::Var(v.to_string())), self.dom(v)?])
            }
            Not(g) => Not(Box::new(self.go(g)?)),
            And(gs) => And(gs.iter().map(|g| self.go(g)).collect::<Result<_>>()?),
            Or(gs) => Or(gs.iter().map(|g| self.go(g)).collect::<Result<_>>()?),
            Implies(a, b) => Implies(Box::new(self.go(a)?), Box::new(self.go(b)?)),
            Exists(v, g) => {
                let body = self.go(g)?;
                let d = self.dom(v)?;
                exists_all(&self.split[v], and(vec![body, d]))
            }
            Forall(v, g) => {
                let body = self.go(g)?;
                let d = self.dom(v)?;
                forall_all(&self.split[v], implies(d, body))
            }
            // Every translated `X(u)` is guarded by `ξ(u)`, so `X` effectively
            // ranges over subsets of the domain.
            ExistsSet(x, g) => ExistsSet(x.clone(), Box::new(self.go(g)?)),
            ForallSet(x, g) => ForallSet(x.clone(), Box::new(self.go(g)?)),
        })
    }
}

impl fmt::Display for TranslationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        f.write_str("source")?;
        for (r, k) in self.source.relations() {
            write!(f, " {r}/{k}")?;
        }
        for c in self.source.constants() {
            write!(f, " {c}")?;
        }
        writeln!(f)?;
        writeln!(f, "domain: {}", self.domain)?;
        for (r, k) in self.target.relations() {
            writeln!(f, "rel {r}/{k}: {}", self.relations[r])?;
        }
        Ok(())
    }
}

/// Parses the scheme text format:
///
/// ```text
/// dim 2
/// source E/2 P_1/1 P_2/1
/// domain: P_1(x1_1) & P_2(x1_2)
/// rel E: E(x1_1,x2_1) & E(x1_2,x2_2)
/// ```
///
/// `source` is optional (inferred from the formulas, constant-free when
/// absent); `rel R/k:` fixes an arity, `rel R:` takes the largest argument
/// index among the free variables. Blank lines and `#` comments are skipped.
pub fn parse_scheme(text: &str) -> Result<TranslationScheme> {
    let mut dim = None;
    let mut source: Option<Vocabulary> = None;
    let mut domain = None;
    let mut rels: Vec<(usize, String, Option<usize>, String)> = Vec::new();
    let syntax = |line: usize, msg: &str| Error::Syntax { line, col: 1, msg: msg.to_string() };
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("dim ") {
            let t: usize = rest.trim().parse().map_err(|_| syntax(ln, "expected a dimension"))?;
            if dim.replace(t).is_some() {
                return Err(syntax(ln, "repeated dim line"));
            }
        } else if let Some(rest) = line.strip_prefix("source") {
            let mut v = Vocabulary::new();
            for sym in rest.split_whitespace() {
                match sym.split_once('/') {
                    Some((r, k)) => v.add_relation(r, k.parse().map_err(|_| syntax(ln, "bad arity"))?)?,
                    None => v.add_constant(sym)?,
                }
            }
            source = Some(v);
        } else if let Some(rest) = line.strip_prefix("domain:") {
            if domain.replace((ln, rest.to_string())).is_some() {
                return Err(syntax(ln, "repeated domain line"));
            }
        } else if let Some(rest) = line.strip_prefix("rel ") {
            let (head, body) = rest.split_once(':').ok_or_else(|| syntax(ln, "expected ':' after the relation"))?;
            let head = head.trim();
            let (name, arity) = match head.split_once('/') {
                Some((r, k)) => (r.trim(), Some(k.trim().parse().map_err(|_| syntax(ln, "bad arity"))?)),
                None => (head, None),
            };
            if name.is_empty() {
                return Err(syntax(ln, "missing relation name"));
            }
            rels.push((ln, name.to_string(), arity, body.to_string()));
        } else {
            return Err(syntax(ln, "expected dim, source, domain or rel"));
        }
    }
    let dim = dim.ok_or_else(|| syntax(1, "missing dim line"))?;
    let (dln, dtext) = domain.ok_or_else(|| syntax(1, "missing domain line"))?;
    let parse = |ln: usize, body: &str, src: Option<&Vocabulary>| -> Result<Formula> {
        let opts = ParseOptions { vocab: src, free: FreeVars::Any };
        parse_formula_with(body, &opts).map_err(|e| match e {
            Error::Syntax { line, col, msg } => Error::Syntax { line: ln + line - 1, col, msg },
            other => other,
        })
    };
    let domain = parse(dln, &dtext, source.as_ref())?;
    let mut target = Vocabulary::new();
    let mut relations = BTreeMap::new();
    for (ln, name, arity, body) in rels {
        let f = parse(ln, &body, source.as_ref())?;
        let k = arity.unwrap_or_else(|| {
            f.free_vars()
                .iter()
                .filter_map(|v| v.strip_prefix('x')?.split_once('_')?.0.parse::<usize>().ok())
                .max()
                .unwrap_or(1)
        });
        target.add_relation(&name, k)?;
        relations.insert(name, f);
    }
    let source = match source {
        Some(s) => s,
        None => {
            let mut v = Vocabulary::new();
            for f in std::iter::once(&domain).chain(relations.values()) {
                for (r, k) in f.relations_used() {
                    match v.arity(&r) {
                        None => v.add_relation(&r, k)?,
                        Some(a) if a != k => return Err(Error::Arity { name: r, expected: a, got: k }),
                        _ => {}
                    }
                }
            }
            v
        }
    };
    TranslationScheme::new(dim, source, target, domain, relations)
}

impl std::str::FromStr for TranslationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_scheme(s)
    }
}
