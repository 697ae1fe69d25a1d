use super::{Element, Structure, Vocabulary};
use crate::{Error, Result};
use std::fmt::Write;

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, col, msg: msg.into() }
}

/// Whitespace-separated tokens with 1-based column offsets.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn element(tok: &str, line: usize, col: usize) -> Result<Element> {
    tok.parse().map_err(|_| syntax(line, col, format!("expected element id, found {tok:?}")))
}

/// Parses the line-oriented structure format:
///
/// ```text
/// # comment
/// vocab E/2 P/1 c/const
/// universe 1 2 3
/// E 1 2
/// c = 3
/// ```
pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (ln, vline) = lines.next().ok_or_else(|| syntax(1, 1, "missing vocab line"))?;
    let toks = tokens(vline);
    if toks.first().map(|t| t.1) != Some("vocab") {
        return Err(syntax(ln, 1, "expected `vocab`"));
    }
    let mut vocab = Vocabulary::new();
    for &(col, tok) in &toks[1..] {
        let (name, kind) = tok.split_once('/').ok_or_else(|| syntax(ln, col, format!("expected NAME/ARITY, found {tok:?}")))?;
        let res = if kind == "const" {
            vocab.add_constant(name)
        } else {
            let arity: usize = kind.parse().map_err(|_| syntax(ln, col, format!("bad arity {kind:?}")))?;
            vocab.add_relation(name, arity)
        };
        res.map_err(|e| syntax(ln, col, e.to_string()))?;
    }

    let (ln, uline) = lines.next().ok_or_else(|| syntax(ln + 1, 1, "missing universe line"))?;
    let toks = tokens(uline);
    if toks.first().map(|t| t.1) != Some("universe") {
        return Err(syntax(ln, 1, "expected `universe`"));
    }
    let mut universe = Vec::new();
    for &(col, tok) in &toks[1..] {
        universe.push(element(tok, ln, col)?);
    }
    let mut s = Structure::new(vocab, universe);

    for (ln, line) in lines {
        let toks = tokens(line);
        let (col, name) = toks[0];
        if toks.len() == 3 && toks[1].1 == "=" {
            let e = element(toks[2].1, ln, toks[2].0)?;
            if !s.vocabulary().is_constant(name) {
                return Err(syntax(ln, col, format!("unknown constant {name}")));
            }
            if s.constant(name).is_some() {
                return Err(Error::Duplicate(name.to_string()));
            }
            s.set_constant(name, e)?;
            continue;
        }
        let expected = s.vocabulary().arity(name).ok_or_else(|| syntax(ln, col, format!("unknown relation {name}")))?;
        let tuple = toks[1..].iter().map(|&(c, t)| element(t, ln, c)).collect::<Result<Vec<_>>>()?;
        if tuple.len() != expected {
            return Err(Error::Arity { name: name.to_string(), expected, got: tuple.len() });
        }
        s.add_fact(name, tuple)?;
    }
    s.validate()?;
    Ok(s)
}

/// Canonical text: relations by name, tuples and elements ascending,
/// constants in vocabulary order.
pub fn serialize_structure(s: &Structure) -> String {
    let mut out = String::from("vocab");
    for (name, arity) in s.vocabulary().relations() {
        write!(out, " {name}/{arity}").unwrap();
    }
    for c in s.vocabulary().constants() {
        write!(out, " {c}/const").unwrap();
    }
    out.push_str("\nuniverse");
    for e in s.universe() {
        write!(out, " {e}").unwrap();
    }
    out.push('\n');
    for (name, tuple) in s.all_facts() {
        out.push_str(name);
        for e in tuple {
            write!(out, " {e}").unwrap();
        }
        out.push('\n');
    }
    for c in s.vocabulary().constants() {
        if let Some(e) = s.constant(c) {
            writeln!(out, "{c} = {e}").unwrap();
        }
    }
    out
}
