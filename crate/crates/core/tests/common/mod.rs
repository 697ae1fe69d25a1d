//! Seeded generators shared by the property tests and the acceptance run.
#![allow(dead_code)]

use fmtk::classes::{builtin_oracle, NestedWord};
use fmtk::equivalence::{equivalent, Logic, TypeContext};
use fmtk::logic::{and, exists, forall, not, or, Formula, Term};
use fmtk::structures::{Element, PointedStructure, Structure, Vocabulary};
use fmtk::Caps;
use fmtk::treerep::{Shape, Tree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashMap};

pub type Gen = ChaCha8Rng;

pub fn rng(seed: u64) -> Gen {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Universe `1..=n`; each possible fact present with probability `p`;
/// constants land on random elements (so `n ≥ 1` when there are any).
pub fn structure(g: &mut Gen, vocab: &Vocabulary, n: usize, p: f64) -> Structure {
    let mut s = Structure::new(vocab.clone(), 1..=n as Element);
    for (r, k) in vocab.relations() {
        let mut t = vec![1 as Element; k];
        if n == 0 {
            continue;
        }
        loop {
            if g.gen_bool(p) {
                s.add_fact(r, t.clone()).unwrap();
            }
            let Some(i) = (0..k).rev().find(|&i| (t[i] as usize) < n) else { break };
            t[i] += 1;
            t[i + 1..].iter_mut().for_each(|x| *x = 1);
        }
    }
    for c in vocab.constants() {
        s.set_constant(c, g.gen_range(1..=n as Element)).unwrap();
    }
    s
}

pub fn graph(g: &mut Gen, n: usize, p: f64) -> Structure {
    let mut edges = Vec::new();
    for a in 1..=n as Element {
        for b in a + 1..=n as Element {
            if g.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Structure::graph(1..=n as Element, &edges)
}

pub fn digraph(g: &mut Gen, n: usize, p: f64) -> Structure {
    structure(g, &Vocabulary::with(&[("E", 2)], &[]), n, p)
}

/// Random formula of quantifier rank at most `rank` whose free variables
/// lie in `scope`; set quantifiers only when `mso`. With an empty scope
/// and no constants the top level is forced to quantify.
pub fn formula(g: &mut Gen, vocab: &Vocabulary, rank: usize, scope: &[String], mso: bool) -> Formula {
    fn go(g: &mut Gen, v: &Vocabulary, rank: usize, pts: &mut Vec<String>, sets: &mut Vec<String>, mso: bool, size: usize) -> Formula {
        let terms: Vec<Term> =
            pts.iter().map(|x| Term::Var(x.clone())).chain(v.constants().iter().map(|c| Term::Const(c.clone()))).collect();
        let quantify = rank > 0 && (terms.is_empty() || g.gen_bool(0.45));
        if quantify {
            let set = mso && g.gen_bool(0.35);
            let name = if set { format!("X{}", sets.len() + 1) } else { format!("v{}", pts.len() + 1) };
            let univ = g.gen_bool(0.5);
            let body = if set {
                sets.push(name.clone());
                let b = go(g, v, rank - 1, pts, sets, mso, size);
                sets.pop();
                b
            } else {
                pts.push(name.clone());
                let b = go(g, v, rank - 1, pts, sets, mso, size);
                pts.pop();
                b
            };
            return match (set, univ) {
                (false, false) => exists(&name, body),
                (false, true) => forall(&name, body),
                (true, false) => Formula::ExistsSet(name, Box::new(body)),
                (true, true) => Formula::ForallSet(name, Box::new(body)),
            };
        }
        if size > 0 && g.gen_bool(0.5) {
            let a = go(g, v, rank, pts, sets, mso, size - 1);
            return match g.gen_range(0..3) {
                0 => not(a),
                1 => and(vec![a, go(g, v, rank, pts, sets, mso, size - 1)]),
                _ => or(vec![a, go(g, v, rank, pts, sets, mso, size - 1)]),
            };
        }
        if terms.is_empty() {
            return if g.gen_bool(0.5) { Formula::True } else { Formula::False };
        }
        let rels: Vec<(String, usize)> = v.relations().map(|(r, k)| (r.to_string(), k)).collect();
        match g.gen_range(0..10) {
            0..=1 => Formula::Eq(terms.choose(g).unwrap().clone(), terms.choose(g).unwrap().clone()),
            2 if !sets.is_empty() => Formula::In(sets.choose(g).unwrap().clone(), terms.choose(g).unwrap().clone()),
            _ if !rels.is_empty() => {
                let (r, k) = rels.choose(g).unwrap().clone();
                Formula::Rel(r, (0..k).map(|_| terms.choose(g).unwrap().clone()).collect())
            }
            _ => Formula::Eq(terms.choose(g).unwrap().clone(), terms.choose(g).unwrap().clone()),
        }
    }
    go(g, vocab, rank, &mut scope.to_vec(), &mut Vec::new(), mso, 3)
}

pub fn sentence(g: &mut Gen, vocab: &Vocabulary, rank: usize, mso: bool) -> Formula {
    formula(g, vocab, rank, &[], mso)
}

/// Random recursive tree on `n ≥ 1` nodes with labels from `labels`.
pub fn tree(g: &mut Gen, n: usize, labels: &[&str]) -> Tree {
    let mut parent = vec![usize::MAX];
    for i in 1..n {
        parent.push(g.gen_range(0..i));
    }
    let lab: Vec<String> = (0..n).map(|_| labels.choose(g).unwrap().to_string()).collect();
    fn build(i: usize, parent: &[usize], lab: &[String]) -> Shape {
        let kids = (i + 1..parent.len()).filter(|&j| parent[j] == i).map(|j| build(j, parent, lab)).collect();
        Shape::node(lab[i].clone(), kids)
    }
    Tree::from_shape(build(0, &parent, &lab))
}

/// Random well-nested word of length `n` over `letters`.
pub fn nested_word(g: &mut Gen, n: usize, letters: &[char]) -> NestedWord {
    let word: Vec<char> = (0..n).map(|_| *letters.choose(g).unwrap()).collect();
    let mut edges = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for p in 1..=n {
        match g.gen_range(0..3) {
            0 => open.push(p),
            1 => {
                if let Some(i) = open.pop() {
                    edges.push((i, p));
                }
            }
            _ => {}
        }
    }
    NestedWord::new(word, edges).unwrap()
}

/// All words of length `n` over `letters` with every non-crossing matching.
pub fn all_nested_words(n: usize, letters: &[char]) -> Vec<NestedWord> {
    fn matchings(lo: usize, hi: usize) -> Vec<Vec<(usize, usize)>> {
        // Matchings on positions lo..=hi; position lo is unmatched or calls some j.
        if lo > hi {
            return vec![vec![]];
        }
        let mut out: Vec<Vec<(usize, usize)>> = matchings(lo + 1, hi);
        for j in lo + 1..=hi {
            for inner in matchings(lo + 1, j - 1) {
                for rest in matchings(j + 1, hi) {
                    let mut m = vec![(lo, j)];
                    m.extend(inner.iter().chain(&rest));
                    out.push(m);
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    let ms = matchings(1, n);
    let total = letters.len().pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let word: Vec<char> = (0..n)
            .map(|_| {
                let l = letters[c % letters.len()];
                c /= letters.len();
                l
            })
            .collect();
        for m in &ms {
            out.push(NestedWord::new(word.clone(), m.clone()).unwrap());
        }
    }
    out
}

/// Random cotree over parts `1..=parts`, letters `letters`, with internal
/// labels drawn from `tables` and root label `root`.
pub fn cotree(g: &mut Gen, leaves: usize, parts: usize, letters: &[&str], tables: &[&str], root: &str) -> Tree {
    fn go(g: &mut Gen, leaves: usize, parts: usize, letters: &[&str], tables: &[&str], label: Option<&str>) -> Shape {
        if leaves == 1 && label.is_none() {
            return Shape::leaf(format!("leaf:{}:{}", g.gen_range(1..=parts), letters.choose(g).unwrap()));
        }
        let k = g.gen_range(2..=leaves.clamp(2, 3));
        let mut sizes = vec![1; k];
        for _ in k..leaves {
            let i = g.gen_range(0..k);
            sizes[i] += 1;
        }
        let lab = label.map_or_else(|| tables.choose(g).unwrap().to_string(), str::to_string);
        Shape::node(lab, sizes.into_iter().map(|s| go(g, s, parts, letters, tables, None)).collect())
    }
    Tree::from_shape(go(g, leaves.max(2), parts, letters, tables, Some(root)))
}


pub const MSO_CAPS: Caps = Caps { fo_universe: 64, mso_universe: 12 };

/// Two indices with equal rank-`m` types, from the largest type class of
/// the pool (distinct when that class has two members).
pub fn equal_type_pair(pool: &[PointedStructure], m: usize, logic: Logic) -> (usize, usize) {
    let mut ctx = TypeContext::new();
    let mut classes: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, p) in pool.iter().enumerate() {
        classes.entry(ctx.type_of(p, m, logic, &MSO_CAPS).unwrap()).or_default().push(i);
    }
    let best = classes.into_values().max_by_key(|v| (v.len(), std::cmp::Reverse(v[0]))).unwrap();
    (best[0], *best.last().unwrap())
}

fn labels(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Which tree join a composition instance exercises.
#[derive(Clone, Copy, Debug)]
pub enum Join {
    Right,
    Left,
    Below,
    Child,
}

/// One composition instance for tree joins: pinned-equivalent `(t_i, a_i)`
/// and equivalent `s_i` must give pinned-equivalent joins. Ordered joins
/// use the ordered map, `Child` the unordered one.
pub fn tree_join_instance(g: &mut Gen, join: Join, m: usize) -> bool {
    let oracle = builtin_oracle(if matches!(join, Join::Child) { "unordered" } else { "ordered" }).unwrap();
    let al = labels(&["a", "b"]);
    let mut ts = Vec::new();
    while ts.len() < 16 {
        let n = g.gen_range(2..=4);
        let t = tree(g, n, &["a", "b"]);
        let cands: Vec<usize> = (0..t.len())
            .filter(|&n| match join {
                Join::Right | Join::Left => n != 0,
                Join::Below => t.is_leaf(n),
                Join::Child => true,
            })
            .collect();
        let a = *cands.choose(g).unwrap();
        ts.push((t, a));
    }
    let tp: Vec<PointedStructure> =
        ts.iter().map(|(t, a)| oracle.structure(t, &al).unwrap().pointed(vec![t.origin(*a)]).unwrap()).collect();
    let ss: Vec<Tree> = (0..16)
        .map(|_| {
            let n = g.gen_range(1..=3);
            tree(g, n, &["a", "b"])
        })
        .collect();
    let sp: Vec<PointedStructure> = ss.iter().map(|s| oracle.structure(s, &al).unwrap().unpointed()).collect();
    let (i, j) = equal_type_pair(&tp, m, Logic::MSO);
    let (k, l) = equal_type_pair(&sp, m, Logic::MSO);
    let go = |(t, a): &(Tree, usize), s: &Tree| {
        let out = match join {
            Join::Right => t.join_right(*a, s),
            Join::Left => t.join_left(*a, s),
            Join::Below => t.join_below(*a, s),
            Join::Child => t.join_child(*a, s),
        }
        .unwrap();
        oracle.structure(&out, &al).unwrap().pointed(vec![t.origin(*a)]).unwrap()
    };
    equivalent(&go(&ts[i], &ss[k]), &go(&ts[j], &ss[l]), m, Logic::MSO, &MSO_CAPS).unwrap()
}

/// Nested words: `(u_i, e_i)` pinned-equivalent and `v_i` equivalent give
/// equivalent inserts; `u_i`, `v_i` equivalent give equivalent concatenations.
pub fn nested_instance(g: &mut Gen, m: usize) -> bool {
    let al: BTreeSet<char> = ['a', 'b'].into();
    let us: Vec<(NestedWord, usize)> = (0..16)
        .map(|_| {
            let n = g.gen_range(1..=4);
            let u = nested_word(g, n, &['a', 'b']);
            let e = g.gen_range(1..=u.len());
            (u, e)
        })
        .collect();
    let vs: Vec<NestedWord> = (0..16)
        .map(|_| {
            let n = g.gen_range(1..=3);
            nested_word(g, n, &['a', 'b'])
        })
        .collect();
    let up: Vec<PointedStructure> =
        us.iter().map(|(u, e)| u.to_structure_over(&al).unwrap().pointed(vec![*e as u32]).unwrap()).collect();
    let uu: Vec<PointedStructure> = us.iter().map(|(u, _)| u.to_structure_over(&al).unwrap().unpointed()).collect();
    let vp: Vec<PointedStructure> = vs.iter().map(|v| v.to_structure_over(&al).unwrap().unpointed()).collect();
    let (i, j) = equal_type_pair(&up, m, Logic::MSO);
    let (k, l) = equal_type_pair(&vp, m, Logic::MSO);
    let st = |w: NestedWord| w.to_structure_over(&al).unwrap().unpointed();
    let ins = equivalent(&st(us[i].0.insert(us[i].1, &vs[k]).unwrap()), &st(us[j].0.insert(us[j].1, &vs[l]).unwrap()), m, Logic::MSO, &MSO_CAPS);
    let (p, q) = equal_type_pair(&uu, m, Logic::MSO);
    let cat = equivalent(&st(us[p].0.concat(&vs[k]).unwrap()), &st(us[q].0.concat(&vs[l]).unwrap()), m, Logic::MSO, &MSO_CAPS);
    ins.unwrap() && cat.unwrap()
}

pub const COTREE_ROOT: &str = "fn:0110";
pub const COTREE_TABLES: [&str; 4] = ["fn:0110", "fn:1001", "fn:1111", "fn:0000"];

fn cotree_alphabet() -> BTreeSet<String> {
    let mut al = labels(&COTREE_TABLES);
    al.extend(["leaf:1:a", "leaf:2:a", "leaf:1:b", "leaf:2:b"].map(String::from));
    al
}

/// Cographs: equivalent cotrees with equal root labels merge into
/// equivalent cotrees.
pub fn cograph_instance(g: &mut Gen, m: usize) -> bool {
    let oracle = builtin_oracle("cograph").unwrap();
    let al = cotree_alphabet();
    let pool = |g: &mut Gen| -> (Vec<Tree>, Vec<PointedStructure>) {
        let ts: Vec<Tree> = (0..16)
            .map(|_| {
                let n = g.gen_range(2..=4);
                cotree(g, n, 2, &["a", "b"], &COTREE_TABLES, COTREE_ROOT)
            })
            .collect();
        let ps = ts.iter().map(|t| oracle.structure(t, &al).unwrap().unpointed()).collect();
        (ts, ps)
    };
    let (ts, tp) = pool(g);
    let (ss, sp) = pool(g);
    let (i, j) = equal_type_pair(&tp, m, Logic::MSO);
    let (k, l) = equal_type_pair(&sp, m, Logic::MSO);
    let go = |t: &Tree, s: &Tree| oracle.structure(&t.merge(s).unwrap(), &al).unwrap().unpointed();
    equivalent(&go(&ts[i], &ss[k]), &go(&ts[j], &ss[l]), m, Logic::MSO, &MSO_CAPS).unwrap()
}
