//! Input files. Every parse error is reported against its path.

use crate::report::{CliError, CliResult};
use fmtk::classes::NestedWord;
use fmtk::logic::{parse_formula_with, FreeVars, ParseOptions};
use fmtk::preservation::Family;
use fmtk::structures::parse_structure;
use fmtk::transl::{builtin_scheme, parse_scheme, TranslationScheme, SCHEME_NAMES};
use fmtk::treerep::parse_tree;
use fmtk::{Caps, Formula, Structure, Tree, Vocabulary};
use std::path::Path;

pub fn text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError { kind: "io", ..CliError::usage(format!("{}: {e}", path.display())) })
}

fn parsed<T>(path: &Path, f: impl FnOnce(&str) -> fmtk::Result<T>) -> CliResult<T> {
    let src = text(path)?;
    f(&src).map_err(|e| CliError::from_core(Some(&path.display().to_string()), e))
}

pub fn structure(path: &Path) -> CliResult<Structure> {
    parsed(path, parse_structure)
}

/// Constants resolve against `vocab` when one is given.
pub fn formula(path: &Path, vocab: Option<&Vocabulary>) -> CliResult<Formula> {
    parsed(path, |s| parse_formula_with(s.trim(), &ParseOptions { vocab, free: FreeVars::Any }))
}

pub fn sentence(path: &Path, vocab: Option<&Vocabulary>) -> CliResult<Formula> {
    let f = formula(path, vocab)?;
    if !f.is_sentence() {
        return Err(CliError::usage(format!("{}: expected a sentence", path.display())));
    }
    Ok(f)
}

pub fn tree(path: &Path) -> CliResult<Tree> {
    parsed(path, parse_tree)
}

pub fn nested_word(path: &Path) -> CliResult<NestedWord> {
    parsed(path, str::parse)
}

/// A builtin scheme name, or a scheme file.
pub fn scheme(spec: &str) -> CliResult<TranslationScheme> {
    if SCHEME_NAMES.contains(&spec) {
        return Ok(builtin_scheme(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::usage(format!("{spec}: neither a builtin scheme ({}) nor a file", SCHEME_NAMES.join(", "))));
    }
    parsed(path, parse_scheme)
}

/// `CLASS/N` parts joined by `+`, or `@FILE` holding structures separated by
/// `---` lines. Generated classes are listed in `fmtk::preservation::CLASS_NAMES`.
pub fn family(spec: &str, modulo: Option<&Path>, caps: Caps) -> CliResult<Family> {
    let mut fam = if let Some(file) = spec.strip_prefix('@') {
        explicit_family(Path::new(file))?
    } else {
        let mut out: Option<Family> = None;
        for part in spec.split('+') {
            let (class, n) = part
                .rsplit_once('/')
                .and_then(|(c, n)| Some((c, n.parse::<usize>().ok()?)))
                .ok_or_else(|| CliError::usage(format!("family part {part:?} is not CLASS/N")))?;
            let f = Family::generate(class, n)?;
            out = Some(match out {
                Some(prev) => prev.union(f)?,
                None => f,
            });
        }
        out.ok_or_else(|| CliError::usage("empty family"))?
    };
    fam = fam.with_caps(caps);
    if let Some(path) = modulo {
        let v = sentence(path, fam.vocabulary())?;
        fam = fam.modulo(v)?;
    }
    Ok(fam)
}

fn explicit_family(path: &Path) -> CliResult<Family> {
    let src = text(path)?;
    let name = path.display().to_string();
    let mut members = Vec::new();
    let mut chunk = String::new();
    let mut first_line = 1;
    let lines: Vec<&str> = src.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        let last = i + 1 == lines.len();
        let sep = line.trim() == "---";
        if !sep {
            chunk.push_str(line);
            chunk.push('\n');
        }
        if (sep || last) && !chunk.trim().is_empty() {
            let s = parse_structure(&chunk).map_err(|e| shift(&name, first_line - 1, e))?;
            members.push(s);
        }
        if sep || last {
            chunk.clear();
            first_line = i + 2;
        }
    }
    Ok(Family::explicit(members)?)
}

/// Rebases a chunk-relative syntax error onto the whole file.
fn shift(name: &str, offset: usize, e: fmtk::Error) -> CliError {
    let e = match e {
        fmtk::Error::Syntax { line, col, msg } => fmtk::Error::Syntax { line: line + offset, col, msg },
        other => other,
    };
    CliError::from_core(Some(name), e)
}
