use super::{parse_scheme, TranslationScheme};
use crate::structures::{n_copy, n_disjoint_sum};
use crate::structures::Structure;
use crate::treerep::Tree;
use crate::{Caps, Error, Result};
use std::collections::BTreeMap;

/// Leaf label of an operation tree: the slot for the next input structure.
pub const DIAMOND: &str = "◇";

pub const SCHEME_NAMES: &[&str] = &[
    "identity",
    "disjoint_union",
    "join",
    "cartesian",
    "tensor",
    "across_connect",
    "complement",
    "transpose",
    "line_graph",
    "xi1",
];

const SUM2: &str = "source E/2 P_1/1 P_2/1";

/// Quantifier-free graph schemes over `{E}` or its sum/copy expansions, plus
/// `xi1`: linear order `Le` to its successor graph via a universal `ξ_E`.
pub fn builtin_scheme(name: &str) -> Result<TranslationScheme> {
    let text = match name {
        "identity" => "dim 1\nsource E/2\ndomain: x1_1=x1_1\nrel E: E(x1_1,x2_1)".to_string(),
        "disjoint_union" => format!("dim 1\n{SUM2}\ndomain: x1_1=x1_1\nrel E: E(x1_1,x2_1)"),
        "join" => format!(
            "dim 1\n{SUM2}\ndomain: x1_1=x1_1\n\
             rel E: E(x1_1,x2_1) | (P_1(x1_1) & P_2(x2_1)) | (P_2(x1_1) & P_1(x2_1))"
        ),
        "cartesian" | "tensor" => format!(
            "dim 2\n{SUM2}\ndomain: P_1(x1_1) & P_2(x1_2)\nrel E: E(x1_1,x2_1) & E(x1_2,x2_2)"
        ),
        "across_connect" => "dim 1\nsource E/2 P_1/1 P_2/1 Sim/2\ndomain: x1_1=x1_1\n\
             rel E: E(x1_1,x2_1) | (P_1(x1_1) & P_2(x2_1) & Sim(x1_1,x2_1))"
            .to_string(),
        "complement" => "dim 1\nsource E/2\ndomain: x1_1=x1_1\nrel E: !E(x1_1,x2_1) & x1_1!=x2_1".to_string(),
        "transpose" => "dim 1\nsource E/2\ndomain: x1_1=x1_1\nrel E: E(x2_1,x1_1)".to_string(),
        "line_graph" => "dim 2\nsource E/2\ndomain: E(x1_1,x1_2)\nrel E: x1_2=x2_1".to_string(),
        "xi1" => "dim 1\nsource Le/2\ndomain: x1_1=x1_1\n\
             rel E: forall z. ((Le(x1_1,z) & x1_1!=z) -> Le(x2_1,z))"
            .to_string(),
        _ => return Err(Error::Unknown(name.to_string())),
    };
    parse_scheme(&text)
}

/// How an operation combines its inputs before applying its scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    /// n-disjoint sum of the `arity` inputs.
    Sum,
    /// n-copy of the single input with this many copies.
    Copy(usize),
}

#[derive(Debug, Clone)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub kind: OpKind,
    pub scheme: TranslationScheme,
}

impl Operation {
    pub fn new(name: &str, arity: usize, kind: OpKind, scheme: TranslationScheme) -> Result<Self> {
        if arity == 0 || (matches!(kind, OpKind::Copy(n) if n == 0 || arity != 1)) {
            return Err(Error::invalid(format!("operation {name}: bad arity {arity} for {kind:?}")));
        }
        Ok(Operation { name: name.to_string(), arity, kind, scheme })
    }

    pub fn apply(&self, inputs: &[Structure], caps: &Caps) -> Result<Structure> {
        if inputs.len() != self.arity {
            return Err(Error::Arity { name: self.name.clone(), expected: self.arity, got: inputs.len() });
        }
        let combined = match self.kind {
            OpKind::Sum => n_disjoint_sum(&inputs.iter().map(|s| s.clone().unpointed()).collect::<Vec<_>>())?,
            OpKind::Copy(n) => n_copy(&inputs[0], &vec![Vec::new(); n])?.structure,
        };
        self.scheme.apply_structure(&combined, caps)
    }
}

/// Named operations; fixed once built.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    ops: BTreeMap<String, Operation>,
}

impl Registry {
    /// Graph operations: binary `disjoint_union`, `join`, `cartesian`
    /// (alias `tensor`); unary `across_connect` (2 copies), `complement`,
    /// `transpose`, `line_graph`.
    pub fn builtin() -> Self {
        let mut r = Registry::default();
        let table: [(&str, usize, OpKind); 8] = [
            ("disjoint_union", 2, OpKind::Sum),
            ("join", 2, OpKind::Sum),
            ("cartesian", 2, OpKind::Sum),
            ("tensor", 2, OpKind::Sum),
            ("across_connect", 1, OpKind::Copy(2)),
            ("complement", 1, OpKind::Copy(1)),
            ("transpose", 1, OpKind::Copy(1)),
            ("line_graph", 1, OpKind::Copy(1)),
        ];
        for (name, arity, kind) in table {
            let op = Operation::new(name, arity, kind, builtin_scheme(name).expect("builtin scheme")).expect("builtin op");
            r.register(op).expect("distinct builtin names");
        }
        r
    }

    pub fn register(&mut self, op: Operation) -> Result<()> {
        if op.name == DIAMOND || self.ops.contains_key(&op.name) {
            return Err(Error::Duplicate(op.name));
        }
        self.ops.insert(op.name.clone(), op);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Operation> {
        self.ops.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(String::as_str)
    }
}

/// Evaluates an operation tree: `◇` leaves take `leaves` left to right,
/// every other node applies its registered operation to its children.
pub fn operation_tree_eval(tree: &Tree, leaves: &[Structure], registry: &Registry, caps: &Caps) -> Result<Structure> {
    let root = tree.root().ok_or_else(|| Error::invalid("empty operation tree"))?;
    let slots = tree.leaves().len();
    if slots != leaves.len() {
        return Err(Error::Arity { name: DIAMOND.to_string(), expected: slots, got: leaves.len() });
    }
    let mut next = 0;
    eval(tree, root, leaves, &mut next, registry, caps)
}

fn eval(tree: &Tree, n: usize, leaves: &[Structure], next: &mut usize, reg: &Registry, caps: &Caps) -> Result<Structure> {
    let label = tree.label(n);
    if tree.is_leaf(n) {
        if label != DIAMOND {
            return Err(Error::invalid(format!("leaf labelled {label}, expected {DIAMOND}")));
        }
        *next += 1;
        return Ok(leaves[*next - 1].clone());
    }
    let op = reg.get(label).ok_or_else(|| Error::Unknown(label.to_string()))?;
    let kids = tree.children(n);
    if kids.len() != op.arity {
        return Err(Error::Arity { name: op.name.clone(), expected: op.arity, got: kids.len() });
    }
    let inputs = kids.iter().map(|&c| eval(tree, c, leaves, next, reg, caps)).collect::<Result<Vec<_>>>()?;
    op.apply(&inputs, caps)
}
