//! Rounded rotations of the integer lattice: orbit periodicity experiments on a disk.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::interval::{cos_sin, pi, reduce, Interval};
use crate::numerics::{field, field_order, parse_rational, Angle, CycloNum, FieldCtx, Rational};
use crate::rounding::{round_complex, GridPoint, RealRoundingKind, RoundingSpec};

pub type Point = (i64, i64);

/// Precision cap for the interval path, in bits.
pub const INTERVAL_CAP: u64 = 1 << 12;
const INTERVAL_START: u64 = 64;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// A real-valued expression over rationals, `pi`, and rational powers.
#[derive(Clone, Debug, PartialEq)]
pub enum RealExpr {
    Num(Rational),
    Pi,
    Neg(Box<RealExpr>),
    Add(Box<RealExpr>, Box<RealExpr>),
    Sub(Box<RealExpr>, Box<RealExpr>),
    Mul(Box<RealExpr>, Box<RealExpr>),
    Div(Box<RealExpr>, Box<RealExpr>),
    Pow(Box<RealExpr>, Rational),
}

enum Shape {
    Const(Rational),
    PiTimes(Rational),
    Other,
}

impl RealExpr {
    /// Parse e.g. `2^(2/5)/10 pi`, `pi/42`, `1/14 pi`. Juxtaposition multiplies.
    pub fn parse(s: &str) -> Result<RealExpr> {
        let toks = tokenize(s)?;
        let mut p = ExprParser { toks, pos: 0 };
        let e = p.sum()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in angle {s:?}")));
        }
        Ok(e)
    }

    fn shape(&self) -> Shape {
        use Shape::*;
        match self {
            RealExpr::Num(r) => Const(r.clone()),
            RealExpr::Pi => PiTimes(Rational::one()),
            RealExpr::Neg(a) => match a.shape() {
                Const(r) => Const(-r),
                PiTimes(r) => PiTimes(-r),
                Other => Other,
            },
            RealExpr::Add(a, b) | RealExpr::Sub(a, b) => {
                let sub = matches!(self, RealExpr::Sub(..));
                let f = |x: Rational, y: Rational| if sub { x - y } else { x + y };
                match (a.shape(), b.shape()) {
                    (Const(x), Const(y)) => Const(f(x, y)),
                    (PiTimes(x), PiTimes(y)) => PiTimes(f(x, y)),
                    _ => Other,
                }
            }
            RealExpr::Mul(a, b) => match (a.shape(), b.shape()) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(x), PiTimes(y)) | (PiTimes(y), Const(x)) => PiTimes(x * y),
                _ => Other,
            },
            RealExpr::Div(a, b) => match (a.shape(), b.shape()) {
                (_, Const(y)) if y.is_zero() => Other,
                (Const(x), Const(y)) => Const(x / y),
                (PiTimes(x), Const(y)) => PiTimes(x / y),
                _ => Other,
            },
            RealExpr::Pow(a, e) => match a.shape() {
                Const(x) if e.is_integer() && !(x.is_zero() && e.is_negative()) => {
                    let k = e.to_integer().to_i32().unwrap_or(i32::MAX);
                    if k.abs() > 64 {
                        Other
                    } else {
                        Const(num_traits::Pow::pow(&x, k))
                    }
                }
                _ => Other,
            },
        }
    }

    /// `Some(c)` when the expression is exactly `c * pi` for rational `c`.
    pub fn as_pi_multiple(&self) -> Option<Rational> {
        match self.shape() {
            Shape::PiTimes(c) => Some(c),
            Shape::Const(c) if c.is_zero() => Some(c),
            _ => None,
        }
    }

    /// Enclosure at `prec` fractional bits.
    pub fn enclose(&self, prec: u64) -> Result<Interval> {
        Ok(match self {
            RealExpr::Num(r) => rational_interval(r, prec),
            RealExpr::Pi => pi(prec),
            RealExpr::Neg(a) => a.enclose(prec)?.neg(),
            RealExpr::Add(a, b) => a.enclose(prec)?.add(&b.enclose(prec)?),
            RealExpr::Sub(a, b) => a.enclose(prec)?.sub(&b.enclose(prec)?),
            RealExpr::Mul(a, b) => a.enclose(prec)?.mul(&b.enclose(prec)?),
            RealExpr::Div(a, b) => div_interval(&a.enclose(prec)?, &b.enclose(prec)?)?,
            RealExpr::Pow(a, e) => {
                let base = a.enclose(prec)?;
                if base.lo.sign() != num_bigint::Sign::Plus {
                    return Err(Error::ValidationFailed("powers need a certified positive base".into()));
                }
                let p = e.numer().to_i64().ok_or_else(|| Error::TooLarge("exponent".into()))?;
                let q = e.denom().to_u32().ok_or_else(|| Error::TooLarge("exponent".into()))?;
                if p.abs() > 64 || q > 64 {
                    return Err(Error::TooLarge("exponent".into()));
                }
                let mut acc = Interval::exact_int(&BigInt::one(), prec);
                for _ in 0..p.abs() {
                    acc = acc.mul(&base);
                }
                if p < 0 {
                    acc = div_interval(&Interval::exact_int(&BigInt::one(), prec), &acc)?;
                }
                nth_root(&acc, q)
            }
        })
    }
}

fn rational_interval(r: &Rational, prec: u64) -> Interval {
    let s = r * Rational::from_integer(BigInt::one() << prec);
    Interval::from_bounds(s.floor().to_integer(), s.ceil().to_integer(), prec)
}

fn div_interval(a: &Interval, b: &Interval) -> Result<Interval> {
    if b.sign().is_none() {
        return Err(Error::ValidationFailed("division by an interval containing zero".into()));
    }
    let scale = BigInt::one() << a.prec;
    let q = |x: &BigInt, y: &BigInt| Rational::new(x * &scale, y.clone());
    let c = [q(&a.lo, &b.lo), q(&a.lo, &b.hi), q(&a.hi, &b.lo), q(&a.hi, &b.hi)];
    let mn = c.iter().min().unwrap().floor().to_integer();
    let mx = c.iter().max().unwrap().ceil().to_integer();
    Ok(Interval::from_bounds(mn, mx, a.prec))
}

fn nth_root(x: &Interval, q: u32) -> Interval {
    if q == 1 {
        return x.clone();
    }
    let shift = x.prec * (q as u64 - 1);
    let lo = (&x.lo << shift).nth_root(q);
    let hi = (&x.hi << shift).nth_root(q) + 1u32;
    Interval::from_bounds(lo, hi, x.prec)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Pi,
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            let lit: String = cs[st..i].iter().collect();
            out.push(Tok::Num(parse_rational(&lit)?));
        } else if cs[i..].starts_with(&['p', 'i']) {
            out.push(Tok::Pi);
            i += 2;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected '{c}' in angle {s:?}")));
        }
    }
    Ok(out)
}

struct ExprParser {
    toks: Vec<Tok>,
    pos: usize,
}

impl ExprParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn sum(&mut self) -> Result<RealExpr> {
        let mut e = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let r = self.product()?;
            e = if c == '+' { RealExpr::Add(Box::new(e), Box::new(r)) } else { RealExpr::Sub(Box::new(e), Box::new(r)) };
        }
        Ok(e)
    }

    fn product(&mut self) -> Result<RealExpr> {
        let mut e = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Tok::Op(c @ ('*' | '/'))) => {
                    self.pos += 1;
                    let r = self.unary()?;
                    e = if c == '*' { RealExpr::Mul(Box::new(e), Box::new(r)) } else { RealExpr::Div(Box::new(e), Box::new(r)) };
                }
                Some(Tok::Num(_) | Tok::Pi | Tok::Op('(')) => {
                    let r = self.unary()?;
                    e = RealExpr::Mul(Box::new(e), Box::new(r));
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> Result<RealExpr> {
        if self.peek() == Some(&Tok::Op('-')) {
            self.pos += 1;
            return Ok(RealExpr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.pos += 1;
            let ex = self.unary()?;
            let r = match ex.shape() {
                Shape::Const(r) => r,
                _ => return Err(Error::Parse("exponents must be rational constants".into())),
            };
            return Ok(RealExpr::Pow(Box::new(base), r));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RealExpr> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match t {
            Some(Tok::Num(r)) => Ok(RealExpr::Num(r)),
            Some(Tok::Pi) => Ok(RealExpr::Pi),
            Some(Tok::Op('(')) => {
                let e = self.sum()?;
                if self.toks.get(self.pos) != Some(&Tok::Op(')')) {
                    return Err(Error::Parse("expected ')' in angle".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?} in angle"))),
        }
    }
}

/// A rotation angle: an exact rational multiple of pi, or a general real expression.
#[derive(Clone, Debug)]
pub enum Theta {
    Exact(Angle),
    Real(RealExpr),
}

impl Theta {
    /// Exact when the expression folds to `c * pi` with small rational `c`.
    pub fn parse(s: &str) -> Result<Theta> {
        if let Ok(a) = Angle::parse(s) {
            return Ok(Theta::Exact(a));
        }
        let e = RealExpr::parse(s)?;
        if let Some(c) = e.as_pi_multiple() {
            if let (Some(p), Some(q)) = (c.numer().to_i64(), c.denom().to_i64()) {
                if q <= 1 << 20 {
                    return Ok(Theta::Exact(Angle::new(p, q)));
                }
            }
        }
        Ok(Theta::Real(e))
    }

    pub fn describe(&self) -> String {
        match self {
            Theta::Exact(a) => a.to_string(),
            Theta::Real(e) => format!("{e:?}"),
        }
    }

    /// The same angle as an expression, for the interval path.
    pub fn as_expr(&self) -> RealExpr {
        match self {
            Theta::Exact(a) => RealExpr::Mul(Box::new(RealExpr::Num(Rational::new(a.p().into(), a.q().into()))), Box::new(RealExpr::Pi)),
            Theta::Real(e) => e.clone(),
        }
    }
}

/// Minimal-error rounding of `(x, y) * e^{i theta}` to the integer lattice.
pub trait Rotor: Send + Sync {
    fn rotate(&self, p: Point) -> Result<Point>;
}

/// Exact path for rational multiples of pi: a float filter with a cyclotomic fallback.
pub struct ExactRotor {
    ctx: Arc<FieldCtx>,
    zeta: CycloNum,
    cos: f64,
    sin: f64,
    spec: RoundingSpec,
}

impl ExactRotor {
    pub fn new(angle: &Angle) -> Result<Self> {
        let ctx = field(field_order([angle], None));
        let zeta = CycloNum::embed_polar(&Rational::one(), angle, &ctx)?;
        // double enclosure from a 128-bit interval; error far below the filter margin
        let t = RealExpr::Mul(Box::new(RealExpr::Num(Rational::new(angle.p().into(), angle.q().into()))), Box::new(RealExpr::Pi));
        let (c, s) = reduced_cos_sin(&t, 128)?;
        Ok(ExactRotor {
            ctx,
            zeta,
            cos: c.mid_f64(),
            sin: s.mid_f64(),
            spec: RoundingSpec::argand(RealRoundingKind::MinimalErrorUp, Rational::one()),
        })
    }

    fn slow(&self, p: Point) -> Result<Point> {
        let z = CycloNum::from_gaussian(&self.ctx, &Rational::from_integer(p.0.into()), &Rational::from_integer(p.1.into()))?;
        match round_complex(&z.mul(&self.zeta), &self.spec)? {
            GridPoint::Argand { re, im } => Ok((to_i64(&re)?, to_i64(&im)?)),
            GridPoint::Polar { .. } => unreachable!(),
        }
    }
}

fn to_i64(r: &Rational) -> Result<i64> {
    r.to_integer().to_i64().ok_or_else(|| Error::TooLarge(format!("coordinate {r}")))
}

/// `floor(v + 1/2)` if `v` is safely away from a half-integer.
fn filtered_round(v: f64, margin: f64) -> Option<i64> {
    let u = v + 0.5;
    let f = u.floor();
    if u - f > margin && f + 1.0 - u > margin {
        Some(f as i64)
    } else {
        None
    }
}

impl Rotor for ExactRotor {
    fn rotate(&self, p: Point) -> Result<Point> {
        let (a, b) = (p.0 as f64, p.1 as f64);
        if p.0.abs() < 1 << 40 && p.1.abs() < 1 << 40 {
            // enclosure and evaluation error is below (|a|+|b|) * 2^-50
            let margin = 1e-12 * (1.0 + a.abs() + b.abs());
            if let (Some(x), Some(y)) = (filtered_round(a * self.cos - b * self.sin, margin), filtered_round(a * self.sin + b * self.cos, margin)) {
                return Ok((x, y));
            }
        }
        self.slow(p)
    }
}

fn reduced_cos_sin(theta: &RealExpr, prec: u64) -> Result<(Interval, Interval)> {
    let work = prec + 32;
    let t = theta.enclose(work)?;
    let two_pi = pi(work).scale_int(&BigInt::from(2));
    let k = (t.mid_f64() / (2.0 * std::f64::consts::PI)).round();
    if !k.is_finite() || k.abs() > 1e12 {
        return Err(Error::TooLarge("angle".into()));
    }
    let t = t.sub(&two_pi.scale_int(&BigInt::from(k as i64)));
    if t.hi.abs().max(t.lo.abs()) > (BigInt::from(4) << work) {
        return Err(Error::ValidationFailed("angle reduction failed".into()));
    }
    let (c, s) = cos_sin(&t);
    Ok((reduce(&c, prec), reduce(&s, prec)))
}

/// Interval path: enclosures of cos and sin refined until rounding is certain.
pub struct IntervalRotor {
    tables: Vec<(u64, Interval, Interval)>,
}

impl IntervalRotor {
    pub fn new(theta: &RealExpr) -> Result<Self> {
        let mut tables = Vec::new();
        let mut prec = INTERVAL_START;
        while prec <= INTERVAL_CAP {
            let (c, s) = reduced_cos_sin(theta, prec)?;
            tables.push((prec, c, s));
            prec *= 2;
        }
        Ok(IntervalRotor { tables })
    }

    fn round_at(v: &Interval) -> Option<i64> {
        let half = BigInt::one() << (v.prec - 1);
        let lo = (&v.lo + &half) >> v.prec;
        let hi = (&v.hi + &half) >> v.prec;
        if lo == hi {
            lo.to_i64()
        } else {
            None
        }
    }
}

impl Rotor for IntervalRotor {
    fn rotate(&self, p: Point) -> Result<Point> {
        for (prec, c, s) in &self.tables {
            let a = Interval::exact_int(&BigInt::from(p.0), *prec);
            let b = Interval::exact_int(&BigInt::from(p.1), *prec);
            let x = a.mul(c).sub(&b.mul(s));
            let y = a.mul(s).add(&b.mul(c));
            if let (Some(x), Some(y)) = (Self::round_at(&x), Self::round_at(&y)) {
                return Ok((x, y));
            }
        }
        Err(Error::UndecidableTie)
    }
}

/// Build the rotor for `theta`: exact for rational multiples of pi unless `force_interval`.
pub fn rotor_for(theta: &Theta, force_interval: bool) -> Result<Box<dyn Rotor>> {
    match theta {
        Theta::Exact(a) if !force_interval => Ok(Box::new(ExactRotor::new(a)?)),
        _ => Ok(Box::new(IntervalRotor::new(&theta.as_expr())?)),
    }
}

/// One rounded rotation step.
pub fn rotate_round(p: Point, theta: &Theta) -> Result<Point> {
    rotor_for(theta, false)?.rotate(p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    pub start: Point,
    pub transient: u64,
    /// `None` if the budget ran out first.
    pub period: Option<u64>,
    pub visited: Vec<(Point, u64)>,
    /// Set if a rounding could not be certified.
    pub error: Option<String>,
}

/// Iterate from `start` until a state repeats or `budget` steps have been taken.
pub fn run_orbit(rotor: &dyn Rotor, start: Point, budget: u64) -> OrbitRecord {
    let mut seen: HashMap<Point, u64> = HashMap::new();
    let mut visited = Vec::new();
    let mut p = start;
    let mut step = 0u64;
    loop {
        if let Some(&first) = seen.get(&p) {
            return OrbitRecord { start, transient: first, period: Some(step - first), visited, error: None };
        }
        seen.insert(p, step);
        visited.push((p, step));
        if step == budget {
            return OrbitRecord { start, transient: step, period: None, visited, error: None };
        }
        match rotor.rotate(p) {
            Ok(q) => p = q,
            Err(e) => {
                return OrbitRecord { start, transient: step, period: None, visited, error: Some(e.to_string()) };
            }
        }
        step += 1;
    }
}

#[derive(Clone, Debug, Default)]
pub struct GridReport {
    pub radius: u64,
    pub theta: String,
    /// First generation at which any orbit occupied the cell.
    pub cells: BTreeMap<Point, u64>,
    pub unresolved: Vec<Point>,
    pub orbits: Vec<OrbitRecord>,
}

pub fn disk_points(r: u64) -> Vec<Point> {
    let r = r as i64;
    let mut v = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            if x * x + y * y <= r * r {
                v.push((x, y));
            }
        }
    }
    v
}

/// Run every lattice point of the closed disk of radius `r`; start points are processed in parallel.
pub fn run_disk(r: u64, theta: &Theta, budget: u64, force_interval: bool) -> Result<GridReport> {
    if budget == 0 {
        return Err(Error::ValidationFailed("budget must be positive".into()));
    }
    let rotor = rotor_for(theta, force_interval)?;
    let starts = disk_points(r);
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(starts.len().max(1));
    let chunk = starts.len().div_ceil(threads).max(1);
    let rotor_ref: &dyn Rotor = rotor.as_ref();
    let mut orbits: Vec<OrbitRecord> = std::thread::scope(|sc| {
        let handles: Vec<_> = starts
            .chunks(chunk)
            .map(|ch| sc.spawn(move || ch.iter().map(|&s| run_orbit(rotor_ref, s, budget)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("orbit worker panicked")).collect()
    });
    orbits.sort_by_key(|o| o.start);
    let mut cells = BTreeMap::new();
    let mut unresolved = Vec::new();
    for o in &orbits {
        for (p, g) in &o.visited {
            let e = cells.entry(*p).or_insert(*g);
            if *g < *e {
                *e = *g;
            }
        }
        if o.period.is_none() {
            unresolved.push(o.start);
        }
    }
    Ok(GridReport { radius: r, theta: theta.describe(), cells, unresolved, orbits })
}

/// Write `x,y,first_generation` rows in lexicographic order.
pub fn write_grid<W: Write>(report: &GridReport, mut w: W) -> Result<()> {
    writeln!(w, "x,y,first_generation")?;
    for ((x, y), g) in &report.cells {
        writeln!(w, "{x},{y},{g}")?;
    }
    Ok(())
}

pub fn emit_grid(report: &GridReport, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_grid(report, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Bounding box `(min_x, max_x, min_y, max_y)` of the occupied cells.
pub fn bounding_box(report: &GridReport) -> Option<(i64, i64, i64, i64)> {
    let xs = report.cells.keys().map(|p| p.0);
    let ys = report.cells.keys().map(|p| p.1);
    Some((xs.clone().min()?, xs.max()?, ys.clone().min()?, ys.max()?))
}
