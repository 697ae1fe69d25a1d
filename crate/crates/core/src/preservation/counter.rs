use crate::logic::{parse_formula_with, Formula, FreeVars, ParseOptions};
use crate::structures::{Element, ElementMap, Structure, Vocabulary};
use crate::{Error, Result};
use std::collections::BTreeSet;

/// The sentence `ψ_k` with the structures `A ⊨ ψ_k` and `B ⊭ ψ_k` from the
/// failure of GLT(k) in the finite. Both have universe `1..=(8n+1)(k+1)`,
/// the usual order `Le` and successor `S`, `c = 1`, `d = max`; `P^A` marks
/// the middle of each of the `k+1` blocks and `P^B` drops block `i_star`.
#[derive(Debug, Clone)]
pub struct GltCounterexample {
    pub k: usize,
    pub n: usize,
    pub i_star: usize,
    pub a: Structure,
    pub b: Structure,
    pub psi: Formula,
}

fn vocabulary() -> Vocabulary {
    Vocabulary::with(&[("Le", 2), ("S", 2), ("P", 1)], &["c", "d"])
}

fn psi(k: usize) -> Formula {
    let xs: Vec<String> = (1..=k + 1).map(|i| format!("p{i}")).collect();
    let all_p = xs.iter().map(|x| format!("P({x})")).collect::<Vec<_>>().join(" & ");
    let mut same: Vec<String> = Vec::new();
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            same.push(format!("{a}={b}"));
        }
    }
    let quant: String = xs.iter().map(|x| format!("forall {x}. ")).collect();
    let xi5 = format!("{quant}(({all_p}) -> ({}))", if same.is_empty() { "false".into() } else { same.join(" | ") });
    let text = format!(
        "(forall x. forall y. forall z. (Le(x,x) & ((Le(x,y) & Le(y,x)) -> x=y) & ((Le(x,y) & Le(y,z)) -> Le(x,z)) & (Le(x,y) | Le(y,x))))
         & (forall x. (Le(c,x) & Le(x,d)))
         & (forall x. forall y. (S(x,y) -> (Le(x,y) & x!=y & forall z. ((Le(x,z) & Le(z,y)) -> (z=x | z=y)))))
         & !((forall x. (x!=d -> exists y. S(x,y))) & {xi5})"
    );
    parse_formula_with(&text, &ParseOptions { vocab: Some(&vocabulary()), free: FreeVars::Only(vec![]) })
        .expect("well-formed fixture")
}

fn block_len(n: usize) -> Element {
    8 * n as Element + 1
}

/// The fixture with `i* = k`.
pub fn glt_counterexample(k: usize, n: usize) -> Result<GltCounterexample> {
    build(k, n, k)
}

/// The fixture with `i*` the first block free of `witnesses`.
pub fn glt_counterexample_for(k: usize, n: usize, witnesses: &[Element]) -> Result<GltCounterexample> {
    if witnesses.len() > k {
        return Err(Error::invalid(format!("{} witnesses for k = {k}", witnesses.len())));
    }
    let len = block_len(n);
    let i_star = (0..=k)
        .find(|&i| witnesses.iter().all(|&w| (w - 1) / len != i as Element))
        .expect("k witnesses miss one of k+1 blocks");
    build(k, n, i_star)
}

fn build(k: usize, n: usize, i_star: usize) -> Result<GltCounterexample> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let len = block_len(n);
    let max = len * (k as Element + 1);
    let mut a = Structure::new(vocabulary(), 1..=max);
    for x in 1..=max {
        for y in x..=max {
            a.add_fact("Le", vec![x, y])?;
        }
        if x < max {
            a.add_fact("S", vec![x, x + 1])?;
        }
    }
    a.set_constant("c", 1)?;
    a.set_constant("d", max)?;
    let mut b = a.clone();
    for i in 0..=k as Element {
        let p = 4 * n as Element + 1 + i * len;
        a.add_fact("P", vec![p])?;
        if i != i_star as Element {
            b.add_fact("P", vec![p])?;
        }
    }
    Ok(GltCounterexample { k, n, i_star, a, b, psi: psi(k) })
}

/// The partial map `ρ: B → A` fixing `1`, `max` and the witnesses, defined
/// on `ē` (at most `n` elements) by the contiguous-segment recipe: maximal
/// runs of `ē ∪ fixed` that leave block `i*` or contain a fixed point stay
/// put; runs strictly inside the block are packed, in order and one apart,
/// from offset `n + 1` past the left-anchored run, away from the `P` point.
pub fn rho_map(cx: &GltCounterexample, witnesses: &[Element], e: &[Element]) -> Result<ElementMap> {
    let len = block_len(cx.n);
    let max = len * (cx.k as Element + 1);
    let lo = len * cx.i_star as Element + 1;
    let hi = lo + len - 1;
    if e.len() > cx.n {
        return Err(Error::invalid(format!("tuple longer than n = {}", cx.n)));
    }
    if let Some(&w) = witnesses.iter().find(|&&w| (lo..=hi).contains(&w)) {
        return Err(Error::invalid(format!("witness {w} lies in block {}", cx.i_star)));
    }
    if let Some(&x) = e.iter().chain(witnesses).find(|&&x| x == 0 || x > max) {
        return Err(Error::OutsideUniverse(x));
    }
    let fixed: BTreeSet<Element> = [1, max].into_iter().chain(witnesses.iter().copied()).collect();
    let points: BTreeSet<Element> = fixed.iter().chain(e).copied().collect();
    let mut runs: Vec<Vec<Element>> = Vec::new();
    for &x in &points {
        match runs.last_mut() {
            Some(r) if *r.last().unwrap() + 1 == x => r.push(x),
            _ => runs.push(vec![x]),
        }
    }
    let anchored = |r: &Vec<Element>| r.iter().any(|x| !(lo..=hi).contains(x) || fixed.contains(x));
    let left_end = runs.iter().filter(|r| anchored(r) && r.contains(&lo)).map(|r| *r.last().unwrap()).max();
    let mut next = (lo + cx.n as Element).max(left_end.map_or(0, |x| x + 2));
    let mut map = ElementMap::default();
    for r in &runs {
        if anchored(r) {
            map.mapping.extend(r.iter().map(|&x| (x, x)));
        } else {
            for (i, &x) in r.iter().enumerate() {
                map.mapping.insert(x, next + i as Element);
            }
            next += r.len() as Element + 1;
        }
    }
    Ok(map)
}

/// `h` is injective, respects constants, and every relation holds on a
/// tuple of its domain in `from` iff it holds on the image in `to`.
pub fn is_partial_isomorphism(h: &ElementMap, from: &Structure, to: &Structure) -> bool {
    if from.vocabulary() != to.vocabulary() || !h.is_injective() {
        return false;
    }
    let dom: Vec<Element> = h.mapping.keys().copied().collect();
    if dom.iter().any(|&x| !from.contains(x) || !to.contains(h.mapping[&x])) {
        return false;
    }
    for c in from.vocabulary().constants() {
        let (x, y) = (from.constant(c).unwrap(), to.constant(c).unwrap());
        if h.mapping.get(&x).is_some_and(|&v| v != y) || h.mapping.iter().any(|(&u, &v)| v == y && u != x) {
            return false;
        }
    }
    if dom.is_empty() {
        return true;
    }
    for (r, k) in from.vocabulary().relations() {
        let mut t = vec![0usize; k];
        loop {
            let src: Vec<Element> = t.iter().map(|&i| dom[i]).collect();
            let img: Vec<Element> = src.iter().map(|x| h.mapping[x]).collect();
            if from.holds(r, &src) != to.holds(r, &img) {
                return false;
            }
            let Some(i) = (0..k).rev().find(|&i| t[i] + 1 < dom.len()) else { break };
            t[i] += 1;
            t[i + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    true
}
