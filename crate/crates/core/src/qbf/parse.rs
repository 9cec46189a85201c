//! Text and QDIMACS readers for quantified formulas.

use std::collections::HashMap;

use super::{Expr, QbfFormula, Quantifier};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    And,
    Or,
    Not,
    Colon,
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        match c {
            c if c.is_whitespace() => {}
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            '&' => out.push(Tok::And),
            '|' => out.push(Tok::Or),
            '!' | '~' | '-' => out.push(Tok::Not),
            ':' | '.' => out.push(Tok::Colon),
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i + 1 < cs.len() && (cs[i + 1].is_alphanumeric() || cs[i + 1] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(cs[start..=i].iter().collect()));
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    names: &'a HashMap<String, usize>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn or_expr(&mut self) -> Result<Expr> {
        let mut e = self.and_expr()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            e = Expr::or(e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Not) => Ok(Expr::not(self.unary()?)),
            Some(Tok::LParen) => {
                let e = self.or_expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(Error::Parse("expected ')'".into())),
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "true" | "1" => Ok(Expr::Const(true)),
                "false" | "0" => Ok(Expr::Const(false)),
                _ => self
                    .names
                    .get(&name)
                    .map(|&i| Expr::Var(i))
                    .ok_or_else(|| Error::Parse(format!("variable '{name}' is not quantified"))),
            },
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse `forall x1 exists x2 x3 : (x1 | !x2) & x3`.
///
/// Operators: `!`/`~`/`-` (not), `&` (and), `|` (or), with the usual precedence.
pub fn parse_text(s: &str) -> Result<QbfFormula> {
    let toks = lex(s)?;
    let mut prefix = Vec::new();
    let mut names = HashMap::new();
    let mut pos = 0;
    let mut current: Option<Quantifier> = None;
    loop {
        match toks.get(pos) {
            Some(Tok::Colon) => {
                pos += 1;
                break;
            }
            Some(Tok::Ident(w)) if w == "forall" => current = Some(Quantifier::Forall),
            Some(Tok::Ident(w)) if w == "exists" => current = Some(Quantifier::Exists),
            Some(Tok::Ident(w)) => {
                let q = current.ok_or_else(|| Error::Parse(format!("variable '{w}' before any quantifier")))?;
                if names.insert(w.clone(), prefix.len()).is_some() {
                    return Err(Error::Parse(format!("variable '{w}' quantified twice")));
                }
                prefix.push(q);
            }
            _ => return Err(Error::Parse("expected quantifier prefix followed by ':'".into())),
        }
        pos += 1;
    }
    let mut p = Parser { toks: &toks[pos..], pos: 0, names: &names };
    let matrix = p.or_expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse("trailing input after formula".into()));
    }
    QbfFormula::new(prefix, matrix)
}

/// Parse QDIMACS. Unquantified variables are existential and outermost.
pub fn parse_qdimacs(s: &str) -> Result<QbfFormula> {
    let mut nvars = None;
    let mut blocks: Vec<(Quantifier, Vec<usize>)> = Vec::new();
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut cur: Vec<i64> = Vec::new();
    for line in s.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut words = line.split_whitespace();
        match words.clone().next() {
            Some("p") => {
                words.next();
                if words.next() != Some("cnf") {
                    return Err(Error::Parse("expected 'p cnf'".into()));
                }
                let v: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::Parse("bad variable count".into()))?;
                nvars = Some(v);
            }
            Some(q @ ("a" | "e")) => {
                words.next();
                let quant = if q == "a" { Quantifier::Forall } else { Quantifier::Exists };
                let mut vs = Vec::new();
                for w in words {
                    let v: usize = w.parse().map_err(|_| Error::Parse(format!("bad literal '{w}'")))?;
                    if v == 0 {
                        break;
                    }
                    vs.push(v);
                }
                blocks.push((quant, vs));
            }
            _ => {
                for w in words {
                    let l: i64 = w.parse().map_err(|_| Error::Parse(format!("bad literal '{w}'")))?;
                    if l == 0 {
                        clauses.push(std::mem::take(&mut cur));
                    } else {
                        cur.push(l);
                    }
                }
            }
        }
    }
    if !cur.is_empty() {
        clauses.push(cur);
    }
    let nvars = nvars.ok_or_else(|| Error::Parse("missing 'p cnf' header".into()))?;
    let mut index = HashMap::new();
    let mut prefix = Vec::new();
    let quantified: std::collections::HashSet<usize> = blocks.iter().flat_map(|b| b.1.iter().copied()).collect();
    for v in 1..=nvars {
        if !quantified.contains(&v) {
            index.insert(v, prefix.len());
            prefix.push(Quantifier::Exists);
        }
    }
    for (q, vs) in &blocks {
        for &v in vs {
            if v > nvars || index.insert(v, prefix.len()).is_some() {
                return Err(Error::Parse(format!("variable {v} out of range or quantified twice")));
            }
            prefix.push(*q);
        }
    }
    let lit = |l: i64| -> Result<Expr> {
        let v = index
            .get(&(l.unsigned_abs() as usize))
            .copied()
            .ok_or_else(|| Error::Parse(format!("literal {l} out of range")))?;
        Ok(if l < 0 { Expr::not(Expr::Var(v)) } else { Expr::Var(v) })
    };
    let mut matrix: Option<Expr> = None;
    for c in &clauses {
        let mut ce: Option<Expr> = None;
        for &l in c {
            let e = lit(l)?;
            ce = Some(match ce {
                None => e,
                Some(prev) => Expr::or(prev, e),
            });
        }
        let ce = ce.unwrap_or(Expr::Const(false));
        matrix = Some(match matrix {
            None => ce,
            Some(prev) => Expr::and(prev, ce),
        });
    }
    QbfFormula::new(prefix, matrix.unwrap_or(Expr::Const(true)))
}

/// Choose the reader from the content: QDIMACS if a `p cnf` line is present.
pub fn parse_any(s: &str) -> Result<QbfFormula> {
    if s.lines().any(|l| l.trim_start().starts_with("p ")) {
        parse_qdimacs(s)
    } else {
        parse_text(s)
    }
}
