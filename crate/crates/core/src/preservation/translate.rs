use super::family::{isomorphic, Family};
use super::k_tuples;
use crate::logic::{
    and, canonical_conjunctive_query, exists_all, forall, forall_all, fresh_name, implies, models_with, not, or,
    relativize, size_bound_sentence, Formula, Term,
};
use crate::structures::PointedStructure;
use crate::{Error, Result};

/// Most pointed structures `hpt_translate` will inspect.
const MAX_POINTED: usize = 1 << 16;

/// `χ = ∃x̄ ∀ȳ ψ|_{x̄ȳ}` with `|x̄| = k`, `|ȳ| = p` and
/// `ψ = ((|U| ≤ p ∧ V) → φ)`. Pass `true` for `V` when there is no class
/// sentence.
pub fn glt_translate(phi: &Formula, k: usize, p: usize, class_sentence: &Formula) -> Result<Formula> {
    if !phi.is_fo() || !phi.is_sentence() {
        return Err(Error::invalid("GLT translation needs an FO sentence"));
    }
    if !class_sentence.is_fo() || !class_sentence.is_sentence() {
        return Err(Error::invalid("the class sentence must be an FO sentence"));
    }
    let psi = implies(and(vec![size_bound_sentence(p), class_sentence.clone()]), phi.clone());
    let mut avoid = psi.variable_names();
    let mut fresh = |base: &str| {
        let n = fresh_name(base, &avoid);
        avoid.insert(n.clone());
        n
    };
    let xs: Vec<String> = (1..=k).map(|i| fresh(&format!("u{i}"))).collect();
    let ys: Vec<String> = (1..=p).map(|i| fresh(&format!("w{i}"))).collect();
    let all: Vec<String> = xs.iter().chain(&ys).cloned().collect();
    let body = relativize(&psi, &all)?;
    Ok(exists_all(&xs, forall_all(&ys, body)))
}

/// `∀x_1..x_k ⋁ ξ_(B,b̄)(x̄)` over family members `B ⊨ φ` of size at most
/// `p` and all k-tuples `b̄`, one disjunct per pinned isomorphism type.
pub fn hpt_translate(phi: &Formula, k: usize, p: usize, family: &Family) -> Result<Formula> {
    if !phi.is_sentence() {
        return Err(Error::invalid("HPT translation needs a sentence"));
    }
    let mut reps: Vec<PointedStructure> = Vec::new();
    let mut seen = 0;
    for b in family.members().iter().filter(|b| b.size() <= p) {
        if !models_with(b, phi, family.caps())? {
            continue;
        }
        for t in k_tuples(b, k) {
            seen += 1;
            if seen > MAX_POINTED {
                return Err(Error::cap("pointed models", seen, MAX_POINTED));
            }
            let pb = b.clone().pointed(t)?;
            let mut dup = false;
            for r in &reps {
                if isomorphic(r, &pb)? {
                    dup = true;
                    break;
                }
            }
            if !dup {
                reps.push(pb);
            }
        }
    }
    let xs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    Ok(forall_all(&xs, or(reps.iter().map(canonical_conjunctive_query).collect())))
}

/// `∀^k` prefix followed by an existential-positive body.
pub fn is_forall_exists_positive(f: &Formula, k: usize) -> bool {
    let mut body = f;
    for _ in 0..k {
        match body {
            Formula::Forall(_, g) => body = g,
            _ => return false,
        }
    }
    body.is_existential_positive()
}

fn distinct(xs: &[String]) -> Vec<Formula> {
    let mut out = Vec::new();
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            out.push(not(Formula::Eq(Term::Var(a.clone()), Term::Var(b.clone()))));
        }
    }
    out
}

/// At least `k` vertices of degree 0, or at least `k + 1` of degree ≤ 1.
pub fn phi_k_paths(k: usize) -> Formula {
    let e = |a: &str, b: &str| Formula::Rel("E".into(), vec![Term::Var(a.into()), Term::Var(b.into())]);
    let xs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let mut isolated = distinct(&xs);
    isolated.extend(xs.iter().map(|x| forall("y", not(e(x, "y")))));
    let zs: Vec<String> = (1..=k + 1).map(|i| format!("x{i}")).collect();
    let mut low = distinct(&zs);
    low.extend(zs.iter().map(|x| {
        forall_all(
            &["y", "z"],
            implies(and(vec![e(x, "y"), e(x, "z")]), Formula::Eq(Term::Var("y".into()), Term::Var("z".into()))),
        )
    }));
    or(vec![exists_all(&xs, and(isolated)), exists_all(&zs, and(low))])
}
