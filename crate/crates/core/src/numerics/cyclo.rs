//! Exact arithmetic in the cyclotomic field Q(zeta_L).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use super::interval::{unit_table, Interval};
use super::{Angle, Rational};
use crate::error::{Error, Result};

/// First precision tried by interval refinement.
pub const START_PRECISION: u64 = 64;
/// Hard cap on interval refinement.
pub const PRECISION_CAP: u64 = 1 << 16;

/// Shared per-order data: the cyclotomic polynomial and reduced powers of zeta.
pub struct FieldCtx {
    order: usize,
    degree: usize,
    phi: Vec<BigInt>,
    pow: Vec<Vec<BigInt>>,
    cos_f64: Vec<f64>,
    sin_f64: Vec<f64>,
    tables: Mutex<HashMap<u64, Arc<Vec<(Interval, Interval)>>>>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx(L={}, n={})", self.order, self.degree)
    }
}

static FIELDS: Lazy<Mutex<HashMap<usize, Arc<FieldCtx>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn poly_divide_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic; coefficients are stored lowest degree first
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    q
}

fn cyclotomic(l: usize) -> Vec<BigInt> {
    // x^l - 1 divided by every Phi_d with d | l, d < l
    let mut p = vec![BigInt::zero(); l + 1];
    p[0] = -BigInt::one();
    p[l] = BigInt::one();
    for d in 1..l {
        if l % d == 0 {
            p = poly_divide_exact(&p, &cyclotomic(d));
        }
    }
    p
}

/// The shared context for order `l`.
pub fn field(l: usize) -> Arc<FieldCtx> {
    assert!(l >= 1);
    let mut g = FIELDS.lock().unwrap();
    if let Some(c) = g.get(&l) {
        return c.clone();
    }
    let phi = cyclotomic(l);
    let n = phi.len() - 1;
    let mut pow = Vec::with_capacity(l);
    let mut cur = vec![BigInt::zero(); n];
    cur[0] = BigInt::one();
    for _ in 0..l {
        pow.push(cur.clone());
        // multiply by x and reduce with the monic phi
        let top = cur[n - 1].clone();
        let mut next = vec![BigInt::zero(); n];
        for j in (1..n).rev() {
            next[j] = cur[j - 1].clone();
        }
        if !top.is_zero() {
            for j in 0..n {
                next[j] -= &top * &phi[j];
            }
        }
        cur = next;
    }
    let t = unit_table(l, 96);
    let cos_f64 = t.iter().map(|(c, _)| c.mid_f64()).collect();
    let sin_f64 = t.iter().map(|(_, s)| s.mid_f64()).collect();
    let mut tables = HashMap::new();
    tables.insert(96, Arc::new(t));
    let ctx = Arc::new(FieldCtx { order: l, degree: n, phi, pow, cos_f64, sin_f64, tables: Mutex::new(tables) });
    g.insert(l, ctx.clone());
    ctx
}

impl FieldCtx {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Degree of the field, Euler's totient of the order.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cyclotomic_poly(&self) -> &[BigInt] {
        &self.phi
    }

    fn table(&self, prec: u64) -> Arc<Vec<(Interval, Interval)>> {
        let mut g = self.tables.lock().unwrap();
        g.entry(prec).or_insert_with(|| Arc::new(unit_table(self.order, prec))).clone()
    }
}

/// Element of Q(zeta_L) stored as integer coefficients over a common positive denominator.
#[derive(Clone)]
pub struct CycloNum {
    ctx: Arc<FieldCtx>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for CycloNum {
    fn eq(&self, o: &Self) -> bool {
        self.ctx.order == o.ctx.order && self.den == o.den && self.num == o.num
    }
}
impl Eq for CycloNum {}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        let mut first = true;
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*z^{j}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")/{} in Q(z_{})", self.den, self.ctx.order)
    }
}

impl CycloNum {
    fn build(ctx: &Arc<FieldCtx>, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = den.clone();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den = &den / &g;
        }
        if num.iter().all(|c| c.is_zero()) {
            den = BigInt::one();
        }
        CycloNum { ctx: ctx.clone(), num, den }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        CycloNum { ctx: ctx.clone(), num: vec![BigInt::zero(); ctx.degree], den: BigInt::one() }
    }

    pub fn from_rational(ctx: &Arc<FieldCtx>, r: &Rational) -> Self {
        let mut num = vec![BigInt::zero(); ctx.degree];
        num[0] = r.numer().clone();
        Self::build(ctx, num, r.denom().clone())
    }

    pub fn from_int(ctx: &Arc<FieldCtx>, v: i64) -> Self {
        Self::from_rational(ctx, &Rational::from_integer(BigInt::from(v)))
    }

    /// `zeta_L^k` for any integer `k`.
    pub fn zeta_pow(ctx: &Arc<FieldCtx>, k: i64) -> Self {
        let l = ctx.order as i64;
        let idx = k.rem_euclid(l) as usize;
        CycloNum { ctx: ctx.clone(), num: ctx.pow[idx].clone(), den: BigInt::one() }
    }

    /// The imaginary unit; requires `4 | L`.
    pub fn i(ctx: &Arc<FieldCtx>) -> Result<Self> {
        if ctx.order % 4 != 0 {
            return Err(Error::OrderMismatch { order: ctx.order });
        }
        Ok(Self::zeta_pow(ctx, (ctx.order / 4) as i64))
    }

    /// `re + i*im` for rationals; requires `4 | L`.
    pub fn from_gaussian(ctx: &Arc<FieldCtx>, re: &Rational, im: &Rational) -> Result<Self> {
        let a = Self::from_rational(ctx, re);
        if im.is_zero() {
            return Ok(a);
        }
        Ok(a.add(&Self::i(ctx)?.scale(im)))
    }

    /// `modulus * e^{i angle}`.
    pub fn embed_polar(modulus: &Rational, angle: &Angle, ctx: &Arc<FieldCtx>) -> Result<Self> {
        let q2 = 2 * angle.q() as usize;
        if ctx.order % q2 != 0 {
            return Err(Error::OrderMismatch { order: ctx.order });
        }
        let k = angle.p() * (ctx.order / q2) as i64;
        Ok(Self::zeta_pow(ctx, k).scale(modulus))
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    /// The value as a rational if it lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Coefficient of `zeta^j` in the reduced basis.
    pub fn coefficient(&self, j: usize) -> Rational {
        Rational::new(self.num[j].clone(), self.den.clone())
    }

    pub fn coefficients(&self) -> Vec<Rational> {
        (0..self.ctx.degree).map(|j| self.coefficient(j)).collect()
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.ctx.order, o.ctx.order, "mixing cyclotomic fields");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        if self.den == o.den {
            let num = self.num.iter().zip(&o.num).map(|(a, b)| a + b).collect();
            return Self::build(&self.ctx, num, self.den.clone());
        }
        let num = self.num.iter().zip(&o.num).map(|(a, b)| a * &o.den + b * &self.den).collect();
        Self::build(&self.ctx, num, &self.den * &o.den)
    }

    pub fn neg(&self) -> Self {
        CycloNum { ctx: self.ctx.clone(), num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(&self.ctx);
        }
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        Self::build(&self.ctx, num, &self.den * r.denom())
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        self.add(&Self::from_rational(&self.ctx, r))
    }

    fn reduce_raw(&self, raw: &[BigInt]) -> Vec<BigInt> {
        let n = self.ctx.degree;
        let mut out: Vec<BigInt> = raw.iter().take(n).cloned().collect();
        out.resize(n, BigInt::zero());
        for (t, c) in raw.iter().enumerate().skip(n) {
            if c.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(&self.ctx.pow[t]) {
                if !p.is_zero() {
                    *o += c * p;
                }
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let n = self.ctx.degree;
        let mut raw = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.num.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        let num = self.reduce_raw(&raw);
        Self::build(&self.ctx, num, &self.den * &o.den)
    }

    /// Multiply by `zeta^k`.
    pub fn mul_zeta(&self, k: i64) -> Self {
        let l = self.ctx.order;
        let shift = k.rem_euclid(l as i64) as usize;
        let mut raw = vec![BigInt::zero(); l];
        for (j, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                raw[(j + shift) % l] += c;
            }
        }
        CycloNum { ctx: self.ctx.clone(), num: self.reduce_raw(&raw), den: self.den.clone() }
    }

    /// Complex conjugate, mapping zeta to its inverse.
    pub fn conj(&self) -> Self {
        let l = self.ctx.order;
        let mut raw = vec![BigInt::zero(); l];
        for (j, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                raw[(l - j) % l] += c;
            }
        }
        CycloNum { ctx: self.ctx.clone(), num: self.reduce_raw(&raw), den: self.den.clone() }
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// Real part, `(z + conj z) / 2`.
    pub fn re(&self) -> Self {
        self.add(&self.conj()).scale(&Rational::new(BigInt::one(), BigInt::from(2)))
    }

    /// Imaginary part as a real element; requires `4 | L`.
    pub fn im(&self) -> Result<Self> {
        let d = self.sub(&self.conj());
        // (z - conj z) / (2i) = -i (z - conj z) / 2
        let mi = Self::i(&self.ctx)?.neg();
        Ok(d.mul(&mi).scale(&Rational::new(BigInt::one(), BigInt::from(2))))
    }

    pub fn modulus_sq(&self) -> Self {
        self.mul(&self.conj())
    }

    /// Floating approximation of the complex value (not certified).
    pub fn approx(&self) -> (f64, f64) {
        let d = super::interval::big_to_f64_scaled(&self.den, 0);
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = super::interval::big_to_f64_scaled(c, 0);
            re += v * self.ctx.cos_f64[j];
            im += v * self.ctx.sin_f64[j];
        }
        (re / d, im / d)
    }

    fn fast_sign(&self) -> Option<i8> {
        let mut s = 0.0f64;
        let mut a = 0.0f64;
        let mut k = 0usize;
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.bits() > 1000 {
                return None;
            }
            let v = c.to_f64()?;
            s += v * self.ctx.cos_f64[j];
            a += v.abs();
            k += 1;
        }
        if !s.is_finite() || !a.is_finite() {
            return None;
        }
        let bound = (k as f64 + 8.0) * 2f64.powi(-51) * a * 1.01;
        if s > bound {
            Some(1)
        } else if s < -bound {
            Some(-1)
        } else {
            None
        }
    }

    /// Enclosure of the real part at the given precision.
    pub fn real_enclosure(&self, prec: u64) -> Interval {
        let table = self.ctx.table(prec);
        let mut acc = Interval::exact_int(&BigInt::zero(), prec);
        for (j, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&table[j].0.scale_int(c));
            }
        }
        acc.div_int(&self.den)
    }

    /// Sign of a real element without checking that it is real.
    pub fn sign_real_unchecked(&self) -> Result<i8> {
        if self.is_zero() {
            return Ok(0);
        }
        if let Some(r) = self.as_rational() {
            return Ok(if r.is_positive() { 1 } else { -1 });
        }
        if let Some(s) = self.fast_sign() {
            return Ok(s);
        }
        let mut prec = START_PRECISION;
        while prec <= PRECISION_CAP {
            if let Some(s) = self.real_enclosure(prec).sign() {
                return Ok(s);
            }
            prec *= 2;
        }
        Err(Error::PrecisionCap { bits: PRECISION_CAP })
    }

    /// Exact sign of a real element.
    pub fn sign_of_real(&self) -> Result<i8> {
        if !self.is_real() {
            return Err(Error::NotReal);
        }
        self.sign_real_unchecked()
    }

    /// Compare a real element with a rational.
    pub fn cmp_rational(&self, r: &Rational) -> Result<std::cmp::Ordering> {
        let s = self.add_rational(&-r.clone()).sign_real_unchecked()?;
        Ok(s.cmp(&0))
    }
}
