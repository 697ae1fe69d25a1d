use super::{and, implies, not, or, Formula, Term};
use crate::structures::Vocabulary;
use crate::{Error, Result};

/// Which unbound lowercase names are accepted as free variables.
#[derive(Debug, Clone, Default)]
pub enum FreeVars {
    #[default]
    Any,
    /// Only these; anything else unbound is an error.
    Only(Vec<String>),
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions<'a> {
    /// Resolves constants and checks relation arities when present.
    pub vocab: Option<&'a Vocabulary>,
    pub free: FreeVars,
}

/// Parses with no vocabulary; every unbound lowercase name is a free variable.
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_formula_with(text, &ParseOptions::default())
}

pub fn parse_formula_with(text: &str, opts: &ParseOptions) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { text, toks, pos: 0, opts, points: Vec::new(), sets: Vec::new() };
    let f = p.chain()?;
    if p.pos < p.toks.len() {
        return Err(p.error_at(p.pos, "unexpected trailing input"));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Arrow,
    Bang,
    Eq,
    Neq,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' => Tok::And,
            '|' => Tok::Or,
            '=' => Tok::Eq,
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            '!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            '!' => Tok::Bang,
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let (line, col) = position(text, i);
                return Err(Error::Syntax { line, col, msg: format!("unexpected character {:?}", text[i..].chars().next().unwrap()) });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    opts: &'a ParseOptions<'a>,
    points: Vec<String>,
    sets: Vec<String>,
}

fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

impl Parser<'_> {
    fn error_at(&self, tok: usize, msg: impl Into<String>) -> Error {
        let offset = self.toks.get(tok).map_or(self.text.len(), |t| t.0);
        let (line, col) = position(self.text, offset);
        Error::Syntax { line, col, msg: msg.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_at(self.pos, format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error_at(self.pos, "expected identifier")),
        }
    }

    fn chain(&mut self) -> Result<Formula> {
        let first = self.unary()?;
        let op = match self.peek() {
            Some(t @ (Tok::And | Tok::Or | Tok::Arrow)) => t.clone(),
            _ => return Ok(first),
        };
        if op == Tok::Arrow {
            self.pos += 1;
            let rhs = self.unary()?;
            if matches!(self.peek(), Some(Tok::And | Tok::Or | Tok::Arrow)) {
                return Err(self.error_at(self.pos, "`->` needs parentheses when chained"));
            }
            return Ok(implies(first, rhs));
        }
        let mut parts = vec![first];
        while let Some(t) = self.peek() {
            if *t == op {
                self.pos += 1;
                parts.push(self.unary()?);
            } else if matches!(t, Tok::And | Tok::Or | Tok::Arrow) {
                return Err(self.error_at(self.pos, "mixed connectives need parentheses"));
            } else {
                break;
            }
        }
        Ok(if op == Tok::And { Formula::And(parts) } else { Formula::Or(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.chain()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(kw)) if matches!(kw.as_str(), "exists" | "forall" | "Exists" | "Forall") => {
                let at = self.pos;
                self.pos += 1;
                let v = self.ident()?;
                let set = is_upper(&kw);
                if set != is_upper(&v) {
                    return Err(self.error_at(at + 1, if set { "set variables start uppercase" } else { "point variables start lowercase" }));
                }
                self.expect(Tok::Dot, "`.` after the bound variable")?;
                let scope = if set { &mut self.sets } else { &mut self.points };
                scope.push(v.clone());
                let body = self.unary();
                let scope = if set { &mut self.sets } else { &mut self.points };
                scope.pop();
                let body = Box::new(body?);
                Ok(match kw.as_str() {
                    "exists" => Formula::Exists(v, body),
                    "forall" => Formula::Forall(v, body),
                    "Exists" => Formula::ExistsSet(v, body),
                    _ => Formula::ForallSet(v, body),
                })
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(and(vec![]))
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(or(vec![]))
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.error_at(self.pos, "expected a formula")),
        }
    }

    fn term(&mut self, name: String, at: usize) -> Result<Term> {
        if self.points.contains(&name) {
            return Ok(Term::Var(name));
        }
        if self.opts.vocab.is_some_and(|v| v.is_constant(&name)) {
            return Ok(Term::Const(name));
        }
        if is_upper(&name) {
            return Err(self.error_at(at, format!("{name} is neither a constant nor a point variable")));
        }
        match &self.opts.free {
            FreeVars::Any => Ok(Term::Var(name)),
            FreeVars::Only(list) if list.contains(&name) => Ok(Term::Var(name)),
            FreeVars::Only(_) => Err(Error::Unbound(name)),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let at = self.pos;
        let name = self.ident()?;
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    let a = self.pos;
                    let t = self.ident()?;
                    args.push(self.term(t, a)?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)` closing the argument list")?;
            if self.sets.contains(&name) {
                if args.len() != 1 {
                    return Err(Error::Arity { name, expected: 1, got: args.len() });
                }
                return Ok(Formula::In(name, args.pop().unwrap()));
            }
            if args.is_empty() {
                return Err(self.error_at(at, "relation atoms need at least one argument"));
            }
            if let Some(v) = self.opts.vocab {
                match v.arity(&name) {
                    Some(a) if a != args.len() => return Err(Error::Arity { name, expected: a, got: args.len() }),
                    None if is_upper(&name) && matches!(self.opts.free, FreeVars::Any) => {
                        // A free set variable.
                        if args.len() != 1 {
                            return Err(Error::Arity { name, expected: 1, got: args.len() });
                        }
                        return Ok(Formula::In(name, args.pop().unwrap()));
                    }
                    None => return Err(Error::Unknown(name)),
                    _ => {}
                }
            }
            return Ok(Formula::Rel(name, args));
        }
        let lhs = self.term(name, at)?;
        let neg = match self.peek() {
            Some(Tok::Eq) => false,
            Some(Tok::Neq) => true,
            _ => return Err(self.error_at(self.pos, "expected `(`, `=` or `!=`")),
        };
        self.pos += 1;
        let a = self.pos;
        let r = self.ident()?;
        let rhs = self.term(r, a)?;
        let e = Formula::Eq(lhs, rhs);
        Ok(if neg { not(e) } else { e })
    }
}
