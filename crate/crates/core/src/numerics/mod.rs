//! Exact scalars: rationals, angles that are rational multiples of pi, and cyclotomic numbers.

pub mod angle;
pub mod cyclo;
pub mod interval;

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use angle::Angle;
pub use cyclo::{field, CycloNum, FieldCtx};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `"p"`, `"p/q"` or a finite decimal such as `"-1.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = || Error::Parse(format!("bad rational {s:?}"));
    if let Some((a, b)) = t.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| err())?;
        let d: BigInt = b.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((a, b)) = t.split_once('.') {
        let neg = a.starts_with('-');
        let ip: BigInt = if a.is_empty() || a == "-" { BigInt::zero() } else { a.parse().map_err(|_| err())? };
        if b.is_empty() || !b.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let fp: BigInt = b.parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), b.len());
        let frac = Rational::new(fp, scale);
        let whole = Rational::from_integer(ip.abs());
        let v = whole + frac;
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// Canonical `"p"` or `"p/q"` form.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn floor_div(x: &Rational, g: &Rational) -> BigInt {
    (x / g).floor().to_integer()
}

/// Smallest rational that is an upper bound of `sqrt(x)` within a simple dyadic scheme.
pub fn sqrt_upper(x: &Rational) -> Rational {
    if !x.is_positive() {
        return Rational::zero();
    }
    // ceil(sqrt(ceil(x * 2^40))) / 2^20 bounds sqrt(x) from above
    let scale = BigInt::one() << 40u32;
    let v = (x * Rational::from_integer(scale)).ceil().to_integer();
    let mut s = v.sqrt();
    if &s * &s < v {
        s += 1;
    }
    Rational::new(s, BigInt::one() << 20u32)
}

/// Largest integer `m` with `m^2 <= x` for nonnegative rational `x`.
pub fn isqrt_floor(x: &Rational) -> BigInt {
    if !x.is_positive() {
        return BigInt::zero();
    }
    x.floor().to_integer().sqrt()
}

/// Exact `sqrt` if `x` is the square of a rational.
pub fn exact_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &n * &n == *x.numer() && &d * &d == *x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Returns `g*m` with `g*m <= z < g*(m+1)` for a real field element `z`.
pub fn certified_floor(z: &CycloNum, g: &Rational) -> Result<Rational> {
    Ok(Rational::from_integer(certified_floor_index(z, g)?) * g)
}

/// The integer `m` of [`certified_floor`].
pub fn certified_floor_index(z: &CycloNum, g: &Rational) -> Result<BigInt> {
    if let Some(r) = z.as_rational() {
        return Ok(floor_div(&r, g));
    }
    let mut m = approx_floor(z, g);
    loop {
        let gm = Rational::from_integer(m.clone()) * g;
        if z.cmp_rational(&gm)? == std::cmp::Ordering::Less {
            m -= 1;
            continue;
        }
        if z.cmp_rational(&(gm + g))? != std::cmp::Ordering::Less {
            m += 1;
            continue;
        }
        return Ok(m);
    }
}

fn approx_floor(z: &CycloNum, g: &Rational) -> BigInt {
    let e = z.real_enclosure(64 + 8 * z.ctx().degree() as u64);
    let (lo, _) = e.floor_bounds();
    let lo = Rational::from_integer(lo);
    (lo / g).floor().to_integer()
}

/// Index `k` in `[0, 2R)` of the multiple of `pi/R` nearest to `arg z`, ties counterclockwise.
pub fn nearest_angle_index(z: &CycloNum, r: u32) -> Result<u32> {
    if z.is_zero() {
        return Err(Error::ZeroInput);
    }
    let ctx = z.ctx().clone();
    let l = ctx.order();
    let two_r = 2 * r as usize;
    if l % two_r != 0 || l % 4 != 0 {
        return Err(Error::OrderMismatch { order: l });
    }
    let step = (l / two_r) as i64;
    let (re, im) = z.approx();
    let mut guess = {
        let a = im.atan2(re).rem_euclid(2.0 * std::f64::consts::PI);
        let s = (a / (std::f64::consts::PI / r as f64)).floor();
        if s.is_finite() { (s as i64).rem_euclid(two_r as i64) as usize } else { 0 }
    };
    let in_sector = |j: usize| -> Result<bool> {
        // Im(z conj u_j) >= 0 and Im(z conj u_{j+1}) < 0
        let a = z.mul_zeta(-(j as i64) * step).im()?.sign_real_unchecked()?;
        if a < 0 {
            return Ok(false);
        }
        let b = z.mul_zeta(-((j + 1) as i64) * step).im()?.sign_real_unchecked()?;
        Ok(b < 0)
    };
    let mut found = None;
    for delta in [0i64, -1, 1] {
        let j = (guess as i64 + delta).rem_euclid(two_r as i64) as usize;
        if in_sector(j)? {
            found = Some(j);
            break;
        }
    }
    if found.is_none() {
        for j in 0..two_r {
            if in_sector(j)? {
                found = Some(j);
                break;
            }
        }
    }
    guess = found.ok_or_else(|| Error::InternalInvariant("no angular sector contains the point".into()))?;
    let j = guess as i64;
    let dj = z.mul_zeta(-j * step).sub(&z.mul_zeta(-(j + 1) * step)).re();
    let s = dj.sign_real_unchecked()?;
    Ok(if s > 0 { guess as u32 } else { ((guess + 1) % two_r) as u32 })
}

/// Lowest common multiple of 4, every `2q`, and `2R`.
pub fn field_order<'a>(angles: impl IntoIterator<Item = &'a Angle>, r: Option<u32>) -> usize {
    let mut l: i64 = 4;
    for a in angles {
        l = l.lcm(&(2 * a.q()));
    }
    if let Some(r) = r {
        l = l.lcm(&(2 * r as i64));
    }
    l as usize
}

pub fn ctx_for<'a>(angles: impl IntoIterator<Item = &'a Angle>, r: Option<u32>) -> Arc<FieldCtx> {
    field(field_order(angles, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert_eq!(fmt_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(fmt_rational(&int(5)), "5");
    }

    #[test]
    fn floor_examples() {
        let c = field(12);
        assert_eq!(certified_floor(&CycloNum::from_rational(&c, &rat(7, 2)), &int(1)).unwrap(), int(3));
        let sqrt3 = CycloNum::zeta_pow(&c, 1).add(&CycloNum::zeta_pow(&c, -1));
        assert_eq!(certified_floor(&sqrt3, &int(1)).unwrap(), int(1));
        assert_eq!(certified_floor(&CycloNum::from_int(&c, 3), &int(1)).unwrap(), int(3));
        // 2cos(pi/3) - 1 + 5 is exactly 5, a grid point reached through irrational coordinates
        let v = CycloNum::zeta_pow(&c, 2).add(&CycloNum::zeta_pow(&c, -2)).add_rational(&int(4));
        assert_eq!(certified_floor(&v, &int(1)).unwrap(), int(5));
        assert_eq!(certified_floor(&sqrt3.scale(&int(100)), &rat(1, 4)).unwrap(), int(173));
        assert_eq!(certified_floor(&sqrt3.scale(&int(10)), &rat(1, 4)).unwrap(), rat(69, 4));
    }

    #[test]
    fn angle_index_examples() {
        let c = field(40);
        let one_plus_i = CycloNum::from_gaussian(&c, &int(1), &int(1)).unwrap();
        assert_eq!(nearest_angle_index(&one_plus_i, 2).unwrap(), 1);
        // arg 0.3 pi = 3pi/10
        let z = CycloNum::zeta_pow(&c, 6);
        assert_eq!(nearest_angle_index(&z, 2).unwrap(), 1);
        assert_eq!(nearest_angle_index(&CycloNum::from_int(&c, -5), 2).unwrap(), 2);
        assert_eq!(nearest_angle_index(&CycloNum::zero(&c), 2), Err(Error::ZeroInput));
        // arg -pi/4 ties between index 3 and 0; counterclockwise gives 0
        let w = CycloNum::from_gaussian(&c, &int(1), &int(-1)).unwrap();
        assert_eq!(nearest_angle_index(&w, 2).unwrap(), 0);
    }

    #[test]
    fn sqrt_helpers() {
        assert_eq!(exact_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(exact_sqrt(&int(2)), None);
        assert!(sqrt_upper(&int(2)) * sqrt_upper(&int(2)) >= int(2));
        assert_eq!(isqrt_floor(&rat(17, 2)), BigInt::from(2));
    }
}
