use super::{and, eq, exists_all, forall, or, Formula, Term};
use crate::structures::{Element, PointedStructure};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// The first of `base`, `base_1`, `base_2`, … not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}_{i}")).find(|n| !avoid.contains(n)).unwrap()
}

/// Quantifier-free `ψ|_x̄`: true of `ā` in `A` iff the substructure induced
/// by `{a_1..a_k}` models `ψ`. `∃z χ ↦ ⋁_i χ[z↦x_i]`, `∀z χ ↦ ⋀_i χ[z↦x_i]`.
pub fn relativize(psi: &Formula, xs: &[String]) -> Result<Formula> {
    if !psi.is_fo() {
        return Err(Error::invalid("relativization needs an FO sentence"));
    }
    if let Some(v) = psi.free_vars().into_iter().next() {
        return Err(Error::Unbound(v));
    }
    let used = psi.variable_names();
    if let Some(x) = xs.iter().find(|x| used.contains(*x)) {
        return Err(Error::Capture(x.clone()));
    }
    let mut distinct: Vec<String> = Vec::new();
    for x in xs {
        if !distinct.contains(x) {
            distinct.push(x.clone());
        }
    }
    Ok(rel(psi, &distinct, &mut BTreeMap::new()))
}

fn rel(f: &Formula, xs: &[String], env: &mut BTreeMap<String, String>) -> Formula {
    use Formula::*;
    let t = |t: &Term, env: &BTreeMap<String, String>| match t {
        Term::Var(v) => Term::Var(env.get(v).cloned().unwrap_or_else(|| v.clone())),
        c => c.clone(),
    };
    match f {
        True | False => f.clone(),
        Rel(r, ts) => Rel(r.clone(), ts.iter().map(|x| t(x, env)).collect()),
        Eq(a, b) => Eq(t(a, env), t(b, env)),
        In(..) | ExistsSet(..) | ForallSet(..) => unreachable!("checked FO"),
        Not(g) => Not(Box::new(rel(g, xs, env))),
        And(gs) => And(gs.iter().map(|g| rel(g, xs, env)).collect()),
        Or(gs) => Or(gs.iter().map(|g| rel(g, xs, env)).collect()),
        Implies(a, b) => Implies(Box::new(rel(a, xs, env)), Box::new(rel(b, xs, env))),
        Exists(z, g) | Forall(z, g) => {
            let saved = env.get(z).cloned();
            let parts: Vec<Formula> = xs
                .iter()
                .map(|x| {
                    env.insert(z.clone(), x.clone());
                    rel(g, xs, env)
                })
                .collect();
            match saved {
                Some(s) => env.insert(z.clone(), s),
                None => env.remove(z),
            };
            if matches!(f, Exists(..)) {
                or(parts)
            } else {
                and(parts)
            }
        }
    }
}

/// `∃x_1…∃x_n ∀y ⋁_i y = x_i`: the universe has at most `n` elements.
pub fn size_bound_sentence(n: usize) -> Formula {
    let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let body = or(xs.iter().map(|x| eq("y", x)).collect());
    exists_all(&xs, forall("y", body))
}

/// Canonical conjunctive query of `(A, ā)`: tuple elements become the free
/// variables `x_1..x_k` (repeats add equalities), the remaining elements are
/// existentially quantified as `x_{k+1}..`, and the body conjoins every fact.
/// Constants of `A` appear as equalities `c = x_i`.
pub fn canonical_conjunctive_query(a: &PointedStructure) -> Formula {
    let k = a.tuple.len();
    let mut name: BTreeMap<Element, String> = BTreeMap::new();
    let mut body = Vec::new();
    for (i, &e) in a.tuple.iter().enumerate() {
        let v = format!("x{}", i + 1);
        match name.get(&e) {
            Some(first) => body.push(eq(&v, first)),
            None => {
                name.insert(e, v);
            }
        }
    }
    let mut quantified = Vec::new();
    for &e in a.structure.universe() {
        name.entry(e).or_insert_with(|| {
            let v = format!("x{}", k + quantified.len() + 1);
            quantified.push(v.clone());
            v
        });
    }
    for (r, t) in a.structure.all_facts() {
        body.push(Formula::Rel(r.to_string(), t.iter().map(|e| Term::Var(name[e].clone())).collect()));
    }
    for c in a.structure.vocabulary().constants() {
        let e = a.structure.constant(c).expect("validated structure");
        body.push(Formula::Eq(Term::Const(c.clone()), Term::Var(name[&e].clone())));
    }
    exists_all(&quantified, and(body))
}

/// Capture-avoiding replacement of free variables and constants by terms.
/// Errors if a key does not occur or a target would be captured by a binder.
pub fn substitute(f: &Formula, mapping: &BTreeMap<String, Term>) -> Result<Formula> {
    let mut seen = BTreeSet::new();
    let out = subst(f, mapping, &mut Vec::new(), &mut seen)?;
    if let Some(k) = mapping.keys().find(|k| !seen.contains(*k)) {
        if mapping[k].name() != k {
            return Err(Error::Unknown(k.clone()));
        }
    }
    Ok(out)
}

fn subst(f: &Formula, m: &BTreeMap<String, Term>, bound: &mut Vec<String>, seen: &mut BTreeSet<String>) -> Result<Formula> {
    use Formula::*;
    let mut t = |t: &Term, bound: &Vec<String>| -> Result<Term> {
        let key = t.name();
        if matches!(t, Term::Var(_)) && bound.iter().any(|b| b == key) {
            return Ok(t.clone());
        }
        match m.get(key) {
            Some(target) => {
                seen.insert(key.to_string());
                if let Term::Var(v) = target {
                    if bound.contains(v) {
                        return Err(Error::Capture(v.clone()));
                    }
                }
                Ok(target.clone())
            }
            None => Ok(t.clone()),
        }
    };
    Ok(match f {
        True | False => f.clone(),
        Rel(r, ts) => Rel(r.clone(), ts.iter().map(|x| t(x, bound)).collect::<Result<_>>()?),
        Eq(a, b) => Eq(t(a, bound)?, t(b, bound)?),
        In(x, a) => In(x.clone(), t(a, bound)?),
        Not(g) => Not(Box::new(subst(g, m, bound, seen)?)),
        And(gs) => And(gs.iter().map(|g| subst(g, m, bound, seen)).collect::<Result<_>>()?),
        Or(gs) => Or(gs.iter().map(|g| subst(g, m, bound, seen)).collect::<Result<_>>()?),
        Implies(a, b) => Implies(Box::new(subst(a, m, bound, seen)?), Box::new(subst(b, m, bound, seen)?)),
        Exists(v, g) | Forall(v, g) => {
            bound.push(v.clone());
            let body = subst(g, m, bound, seen);
            bound.pop();
            let body = Box::new(body?);
            if matches!(f, Exists(..)) {
                Exists(v.clone(), body)
            } else {
                Forall(v.clone(), body)
            }
        }
        ExistsSet(v, g) => ExistsSet(v.clone(), Box::new(subst(g, m, bound, seen)?)),
        ForallSet(v, g) => ForallSet(v.clone(), Box::new(subst(g, m, bound, seen)?)),
    })
}

/// Renames every bound point variable to a name outside `avoid`, growing
/// `avoid` with each name used.
pub fn rename_bound_apart(f: &Formula, avoid: &mut BTreeSet<String>) -> Formula {
    fn go(f: &Formula, avoid: &mut BTreeSet<String>, env: &mut Vec<(String, String)>) -> Formula {
        use Formula::*;
        let t = |t: &Term, env: &Vec<(String, String)>| match t {
            Term::Var(v) => Term::Var(env.iter().rev().find(|(o, _)| o == v).map_or_else(|| v.clone(), |(_, n)| n.clone())),
            c => c.clone(),
        };
        match f {
            True | False => f.clone(),
            Rel(r, ts) => Rel(r.clone(), ts.iter().map(|x| t(x, env)).collect()),
            Eq(a, b) => Eq(t(a, env), t(b, env)),
            In(x, a) => In(x.clone(), t(a, env)),
            Not(g) => Not(Box::new(go(g, avoid, env))),
            And(gs) => And(gs.iter().map(|g| go(g, avoid, env)).collect()),
            Or(gs) => Or(gs.iter().map(|g| go(g, avoid, env)).collect()),
            Implies(a, b) => Implies(Box::new(go(a, avoid, env)), Box::new(go(b, avoid, env))),
            Exists(v, g) | Forall(v, g) => {
                let fresh = fresh_name(v, avoid);
                avoid.insert(fresh.clone());
                env.push((v.clone(), fresh.clone()));
                let body = Box::new(go(g, avoid, env));
                env.pop();
                if matches!(f, Exists(..)) {
                    Exists(fresh, body)
                } else {
                    Forall(fresh, body)
                }
            }
            ExistsSet(v, g) => ExistsSet(v.clone(), Box::new(go(g, avoid, env))),
            ForallSet(v, g) => ForallSet(v.clone(), Box::new(go(g, avoid, env))),
        }
    }
    go(f, avoid, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::super::{models, parse_formula, Evaluator};
    use super::*;
    use crate::structures::{find_homomorphism, induced_substructure, Structure};
    use crate::Caps;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn relativize_quantifier_free_is_unchanged() {
        assert_eq!(relativize(&Formula::True, &names(&["x1"])).unwrap(), Formula::True);
    }

    #[test]
    fn relativize_bounded_example() {
        let psi = parse_formula("exists z. forall w. E(z,w)").unwrap();
        let r = relativize(&psi, &names(&["x1", "x2"])).unwrap();
        assert_eq!(r.to_string(), "((E(x1,x1) & E(x1,x2)) | (E(x2,x1) & E(x2,x2)))");
        assert_eq!(r.rank(), 0);
    }

    #[test]
    fn relativize_agrees_on_directed_edge() {
        let psi = parse_formula("exists z. forall w. E(z,w)").unwrap();
        let xs = names(&["x1", "x2"]);
        let r = relativize(&psi, &xs).unwrap();
        let a = Structure::digraph([1, 2], &[(1, 2)]);
        let lhs = Evaluator::new(&a, &r, &Caps::default()).unwrap().eval_tuple(&xs, &[1, 2]).unwrap();
        let rhs = models(&induced_substructure(&a, &[1, 2].into()).unwrap(), &psi).unwrap();
        assert!(!lhs && !rhs);
    }

    #[test]
    fn relativize_rejects_bad_input() {
        assert!(matches!(relativize(&parse_formula("E(x,x)").unwrap(), &names(&["y"])), Err(Error::Unbound(_))));
        assert!(matches!(relativize(&parse_formula("exists x. E(x,x)").unwrap(), &names(&["x"])), Err(Error::Capture(_))));
        assert!(relativize(&parse_formula("Exists X. true").unwrap(), &[]).is_err());
    }

    #[test]
    fn empty_tuple_relativization() {
        let r = relativize(&parse_formula("(exists x. true | forall y. false)").unwrap(), &[]).unwrap();
        assert_eq!(r.to_string(), "(false | true)");
    }

    #[test]
    fn size_bounds() {
        let f = size_bound_sentence(2);
        assert_eq!(f.rank(), 3);
        assert!(models(&Structure::path(0), &f).unwrap());
        assert!(!models(&Structure::path(2), &f).unwrap());
        assert!(models(&Structure::digraph([], &[]), &size_bound_sentence(0)).unwrap());
        assert!(!models(&Structure::path(0), &size_bound_sentence(0)).unwrap());
    }

    #[test]
    fn ccq_shapes() {
        let edge = Structure::digraph([1, 2], &[(1, 2)]).unpointed();
        assert_eq!(canonical_conjunctive_query(&edge).to_string(), "exists x1. exists x2. E(x1,x2)");
        let two = Structure::digraph([1, 2], &[]).unpointed();
        assert_eq!(canonical_conjunctive_query(&two).to_string(), "exists x1. exists x2. true");
        let pinned = Structure::digraph([1, 2], &[(1, 2)]).pointed(vec![2, 2]).unwrap();
        assert_eq!(canonical_conjunctive_query(&pinned).to_string(), "exists x3. (x2=x1 & E(x3,x1))");
    }

    #[test]
    fn chandra_merlin_on_triangle() {
        let edge = Structure::digraph([1, 2], &[(1, 2)]).unpointed();
        let tri = Structure::clique(3);
        let q = canonical_conjunctive_query(&edge);
        assert!(models(&tri, &q).unwrap());
        assert!(find_homomorphism(&edge, &tri.unpointed()).unwrap().is_some());
    }

    #[test]
    fn substitution() {
        let f = parse_formula("E(c_1,c_2)").unwrap();
        let m: BTreeMap<_, _> = [("c_1".to_string(), Term::Var("x".into()))].into();
        assert_eq!(substitute(&f, &m).unwrap().to_string(), "E(x,c_2)");
        let id: BTreeMap<_, _> = [("c_1".to_string(), Term::Var("c_1".into()))].into();
        assert_eq!(substitute(&f, &id).unwrap(), f);
        let g = parse_formula("exists x. E(c_1,x)").unwrap();
        assert_eq!(substitute(&g, &m), Err(Error::Capture("x".into())));
        let missing: BTreeMap<_, _> = [("zz".to_string(), Term::Var("x".into()))].into();
        assert_eq!(substitute(&f, &missing), Err(Error::Unknown("zz".into())));
    }

    #[test]
    fn renaming_apart() {
        let f = parse_formula("exists x. (E(x,y) & forall x. P(x))").unwrap();
        let mut avoid: BTreeSet<String> = ["x".to_string(), "y".to_string()].into();
        let g = rename_bound_apart(&f, &mut avoid);
        assert_eq!(g.to_string(), "exists x_1. (E(x_1,y) & forall x_2. P(x_2))");
    }
}
