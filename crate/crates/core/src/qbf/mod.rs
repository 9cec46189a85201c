//! Quantified boolean formulas and their compilation into rounded linear systems.

pub mod parse;
pub mod program;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// 0-based variable index.
    Var(usize),
    Const(bool),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    /// Number of logical operation nodes.
    pub fn op_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Not(a) => 1 + a.op_count(),
            Expr::And(a, b) | Expr::Or(a, b) => 1 + a.op_count() + b.op_count(),
        }
    }

    pub fn eval(&self, vals: &[bool]) -> bool {
        match self {
            Expr::Var(i) => vals[*i],
            Expr::Const(c) => *c,
            Expr::Not(a) => !a.eval(vals),
            Expr::And(a, b) => a.eval(vals) && b.eval(vals),
            Expr::Or(a, b) => a.eval(vals) || b.eval(vals),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Not(a) => a.max_var(),
            Expr::And(a, b) | Expr::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn remap(&self, f: &dyn Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Var(i) => Expr::Var(f(*i)),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Not(a) => Expr::not(a.remap(f)),
            Expr::And(a, b) => Expr::and(a.remap(f), b.remap(f)),
            Expr::Or(a, b) => Expr::or(a.remap(f), b.remap(f)),
        }
    }

    /// Render with variable names `x1, x2, ...`.
    pub fn render(&self) -> String {
        match self {
            Expr::Var(i) => format!("x{}", i + 1),
            Expr::Const(c) => (if *c { "true" } else { "false" }).into(),
            Expr::Not(a) => format!("!{}", a.render()),
            Expr::And(a, b) => format!("({} & {})", a.render(), b.render()),
            Expr::Or(a, b) => format!("({} | {})", a.render(), b.render()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// A prenex formula; `prefix[i]` quantifies variable `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QbfFormula {
    pub prefix: Vec<Quantifier>,
    pub matrix: Expr,
}

impl QbfFormula {
    pub fn new(prefix: Vec<Quantifier>, matrix: Expr) -> Result<Self> {
        if let Some(m) = matrix.max_var() {
            if m >= prefix.len() {
                return Err(Error::Parse(format!("variable x{} is not quantified", m + 1)));
            }
        }
        Ok(QbfFormula { prefix, matrix })
    }

    pub fn n(&self) -> usize {
        self.prefix.len()
    }

    pub fn ell(&self) -> usize {
        self.matrix.op_count()
    }

    /// Strictly alternating, starting universal and ending existential.
    pub fn is_canonical(&self) -> bool {
        !self.prefix.is_empty()
            && self.prefix.iter().enumerate().all(|(i, q)| *q == if i % 2 == 0 { Quantifier::Forall } else { Quantifier::Exists })
            && self.prefix.len() % 2 == 0
    }

    /// Insert unused variables so that the prefix alternates `forall, exists, ...`, ending in `exists`.
    pub fn padded(&self) -> QbfFormula {
        let mut prefix = Vec::new();
        let mut map = Vec::with_capacity(self.prefix.len());
        for q in &self.prefix {
            let want = if prefix.len() % 2 == 0 { Quantifier::Forall } else { Quantifier::Exists };
            if *q != want {
                prefix.push(want);
            }
            map.push(prefix.len());
            prefix.push(*q);
        }
        if prefix.is_empty() {
            prefix.push(Quantifier::Forall);
        }
        if prefix.len() % 2 == 1 {
            prefix.push(Quantifier::Exists);
        }
        let matrix = self.matrix.remap(&|i| map[i]);
        QbfFormula { prefix, matrix }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, q) in self.prefix.iter().enumerate() {
            s.push_str(match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            });
            s.push_str(&format!(" x{} ", i + 1));
        }
        format!("{s}: {}", self.matrix.render())
    }
}

/// Largest formula evaluated by brute force.
pub const EVAL_LIMIT: usize = 16;

/// Truth value by enumerating assignments.
pub fn evaluate_qbf(f: &QbfFormula) -> Result<bool> {
    if f.n() > EVAL_LIMIT {
        return Err(Error::TooLarge(format!("{} variables exceed the evaluation limit {EVAL_LIMIT}", f.n())));
    }
    fn go(f: &QbfFormula, vals: &mut Vec<bool>) -> bool {
        let i = vals.len();
        if i == f.n() {
            return f.matrix.eval(vals);
        }
        let mut branch = |v: bool| {
            vals.push(v);
            let r = go(f, vals);
            vals.pop();
            r
        };
        match f.prefix[i] {
            Quantifier::Forall => branch(false) && branch(true),
            Quantifier::Exists => branch(false) || branch(true),
        }
    }
    Ok(go(f, &mut Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Quantifier::*;

    fn x(i: usize) -> Expr {
        Expr::Var(i)
    }

    #[test]
    fn evaluate_examples() {
        let f = QbfFormula::new(vec![Forall, Exists], Expr::or(x(0), x(1))).unwrap();
        assert!(evaluate_qbf(&f).unwrap());
        let f = QbfFormula::new(vec![Forall, Exists], Expr::and(x(0), x(1))).unwrap();
        assert!(!evaluate_qbf(&f).unwrap());
        let f = QbfFormula::new(vec![Forall, Exists], Expr::Const(true)).unwrap();
        assert!(evaluate_qbf(&f).unwrap());
        let big = QbfFormula::new(vec![Forall; 17], Expr::Const(true)).unwrap();
        assert!(matches!(evaluate_qbf(&big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn padding_alternates_and_preserves_truth() {
        let f = QbfFormula::new(vec![Exists, Exists, Forall], Expr::or(Expr::and(x(0), x(1)), x(2))).unwrap();
        let p = f.padded();
        assert!(p.is_canonical());
        assert_eq!(p.prefix, vec![Forall, Exists, Forall, Exists, Forall, Exists]);
        assert_eq!(evaluate_qbf(&f).unwrap(), evaluate_qbf(&p).unwrap());
        let g = QbfFormula::new(vec![Forall, Exists], x(1)).unwrap();
        assert_eq!(g.padded(), g);
    }

    #[test]
    fn unquantified_variable_rejected() {
        assert!(QbfFormula::new(vec![Forall], x(3)).is_err());
    }
}
