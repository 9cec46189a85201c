//! Fixed-point dyadic intervals used to certify signs of real algebraic numbers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A closed interval `[lo, hi] / 2^prec` with integer endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub prec: u64,
}

fn shr_floor(v: &BigInt, bits: u64) -> BigInt {
    // BigInt >> rounds toward negative infinity
    v >> bits
}

fn shr_ceil(v: &BigInt, bits: u64) -> BigInt {
    -((-v) >> bits)
}

impl Interval {
    pub fn exact_int(v: &BigInt, prec: u64) -> Self {
        let s = v << prec;
        Interval { lo: s.clone(), hi: s, prec }
    }

    pub fn from_bounds(lo: BigInt, hi: BigInt, prec: u64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi, prec }
    }

    /// The interval `[-r, r]` for a nonnegative bound given at the same scale.
    pub fn symmetric(r: BigInt, prec: u64) -> Self {
        Interval { lo: -r.clone(), hi: r, prec }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        debug_assert_eq!(self.prec, o.prec);
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        debug_assert_eq!(self.prec, o.prec);
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo, prec: self.prec }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        debug_assert_eq!(self.prec, o.prec);
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mn = c.iter().min().unwrap();
        let mx = c.iter().max().unwrap();
        Interval { lo: shr_floor(mn, self.prec), hi: shr_ceil(mx, self.prec), prec: self.prec }
    }

    /// Multiply by an exact integer.
    pub fn scale_int(&self, k: &BigInt) -> Interval {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Interval { lo: a, hi: b, prec: self.prec }
        } else {
            Interval { lo: b, hi: a, prec: self.prec }
        }
    }

    /// Divide by an exact positive integer.
    pub fn div_int(&self, k: &BigInt) -> Interval {
        debug_assert!(k.is_positive());
        Interval { lo: self.lo.div_floor(k), hi: self.hi.div_ceil(k), prec: self.prec }
    }

    pub fn widen(&self, r: &BigInt) -> Interval {
        Interval { lo: &self.lo - r, hi: &self.hi + r, prec: self.prec }
    }

    /// Sign if the interval excludes zero.
    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else {
            None
        }
    }

    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        let m: BigInt = (&self.lo + &self.hi) >> 1u32;
        big_to_f64_scaled(&m, self.prec)
    }

    /// Floor of the lower and upper endpoints as integers.
    pub fn floor_bounds(&self) -> (BigInt, BigInt) {
        (shr_floor(&self.lo, self.prec), shr_floor(&self.hi, self.prec))
    }
}

/// Approximate `m / 2^e` as f64, tolerating large magnitudes.
pub fn big_to_f64_scaled(m: &BigInt, e: u64) -> f64 {
    use num_traits::ToPrimitive;
    let bits = m.bits();
    if bits > 900 {
        let sh = bits - 900;
        let t = (m >> sh).to_f64().unwrap_or(f64::NAN);
        return t * 2f64.powi(sh as i32 - e as i32);
    }
    let t = m.to_f64().unwrap_or(f64::NAN);
    if e > 1000 {
        let mut v = t;
        let mut left = e as i64;
        while left > 0 {
            let s = left.min(1000);
            v *= 2f64.powi(-(s as i32));
            left -= s;
        }
        v
    } else {
        t * 2f64.powi(-(e as i32))
    }
}

/// `2^prec / k` as an enclosing interval.
fn recip(k: &BigInt, prec: u64) -> Interval {
    let one = BigInt::one() << prec;
    Interval { lo: one.div_floor(k), hi: one.div_ceil(k), prec }
}

/// Enclosure of `atan(1/k)` for an integer `k >= 2`.
fn atan_inv(k: u32, prec: u64) -> Interval {
    let kk = BigInt::from(k);
    let k2 = &kk * &kk;
    let mut sum = Interval::exact_int(&BigInt::zero(), prec);
    let mut pow = kk.clone();
    let mut j: u64 = 0;
    loop {
        let term = recip(&pow, prec).div_int(&BigInt::from(2 * j + 1));
        if j % 2 == 0 {
            sum = sum.add(&term);
        } else {
            sum = sum.sub(&term);
        }
        pow = &pow * &k2;
        j += 1;
        // alternating series with decreasing terms: the tail is bounded by the next term
        let next = recip(&pow, prec).div_int(&BigInt::from(2 * j + 1));
        if next.hi <= BigInt::one() {
            return sum.widen(&(next.hi + 1u32));
        }
    }
}

/// Enclosure of pi via Machin's formula.
pub fn pi(prec: u64) -> Interval {
    let a = atan_inv(5, prec).scale_int(&BigInt::from(16));
    let b = atan_inv(239, prec).scale_int(&BigInt::from(4));
    a.sub(&b)
}

/// Enclosures of `(cos t, sin t)` for `|t| <= 4`, by Taylor series with a Lagrange tail bound.
pub fn cos_sin(t: &Interval) -> (Interval, Interval) {
    let prec = t.prec;
    let one = Interval::exact_int(&BigInt::one(), prec);
    let t2 = t.mul(t);
    let mut c = one.clone();
    let mut s = t.clone();
    let mut term_c = one;
    let mut term_s = t.clone();
    let mut k: u64 = 1;
    loop {
        term_c = term_c.mul(&t2).div_int(&BigInt::from((2 * k - 1) * (2 * k)));
        term_s = term_s.mul(&t2).div_int(&BigInt::from((2 * k) * (2 * k + 1)));
        if k % 2 == 1 {
            c = c.sub(&term_c);
            s = s.sub(&term_s);
        } else {
            c = c.add(&term_c);
            s = s.add(&term_s);
        }
        k += 1;
        // tail bound 4^(2k)/(2k)! covers both series once terms are tiny
        let mag = term_c.lo.abs().max(term_c.hi.abs()).max(term_s.lo.abs()).max(term_s.hi.abs());
        if k > 4 && mag <= BigInt::from(4) {
            let tail = BigInt::from(64) + mag * 64;
            return (c.widen(&tail), s.widen(&tail));
        }
    }
}

/// Enclosures of `cos(2 pi j / l)` and `sin(2 pi j / l)` for `j = 0..l`.
pub fn unit_table(l: usize, prec: u64) -> Vec<(Interval, Interval)> {
    let work = prec + 32;
    let p = pi(work);
    let mut out = Vec::with_capacity(l);
    for j in 0..l {
        let jj = if 2 * j <= l { j as i64 } else { j as i64 - l as i64 };
        let t = p.scale_int(&BigInt::from(2 * jj)).div_int(&BigInt::from(l as u64));
        let (c, s) = cos_sin(&t);
        out.push((reduce(&c, prec), reduce(&s, prec)));
    }
    out
}

/// Rescale an interval to a lower precision, keeping it enclosing.
pub fn reduce(x: &Interval, prec: u64) -> Interval {
    assert!(x.prec >= prec);
    let d = x.prec - prec;
    Interval { lo: shr_floor(&x.lo, d), hi: shr_ceil(&x.hi, d), prec }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_encloses_known_digits() {
        let p = pi(200);
        let v = p.mid_f64();
        assert!((v - std::f64::consts::PI).abs() < 1e-15);
        assert!(p.width() < BigInt::from(1u64 << 20));
    }

    #[test]
    fn cos_table_matches_libm() {
        let t = unit_table(24, 128);
        for (j, (c, s)) in t.iter().enumerate() {
            let a = 2.0 * std::f64::consts::PI * j as f64 / 24.0;
            assert!((c.mid_f64() - a.cos()).abs() < 1e-14, "cos {j}");
            assert!((s.mid_f64() - a.sin()).abs() < 1e-14, "sin {j}");
            assert!(c.width() < BigInt::from(1u64 << 16));
        }
    }

    #[test]
    fn exact_points_are_enclosed() {
        let t = unit_table(12, 96);
        // cos(pi/3) = 1/2 must lie inside the enclosure
        let half = BigInt::one() << 95u32;
        assert!(t[2].0.lo <= half && half <= t[2].0.hi);
        let zero = BigInt::zero();
        assert!(t[3].0.lo <= zero && zero <= t[3].0.hi);
    }
}
