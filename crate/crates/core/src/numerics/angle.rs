use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

/// The angle `p*pi/q`, normalized so that `0 <= p < 2q` and `gcd(p, q) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle {
    p: i64,
    q: i64,
}

impl Angle {
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero angle denominator");
        let (mut p, mut q) = if q < 0 { (-p, -q) } else { (p, q) };
        p = p.rem_euclid(2 * q);
        if p == 0 {
            return Angle { p: 0, q: 1 };
        }
        let g = p.gcd(&q);
        p /= g;
        q /= g;
        Angle { p, q }
    }

    pub fn zero() -> Self {
        Angle { p: 0, q: 1 }
    }

    /// The angular granularity `pi/r`.
    pub fn pi_over(r: u32) -> Self {
        Angle::new(1, r as i64)
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn add(&self, o: &Angle) -> Angle {
        let l = self.q.lcm(&o.q);
        Angle::new(self.p * (l / self.q) + o.p * (l / o.q), l)
    }

    pub fn neg(&self) -> Angle {
        Angle::new(-self.p, self.q)
    }

    pub fn sub(&self, o: &Angle) -> Angle {
        self.add(&o.neg())
    }

    /// Multiply by an integer.
    pub fn times(&self, k: i64) -> Angle {
        Angle::new(self.p * k, self.q)
    }

    /// Smallest unsigned angle to zero, as a fraction of pi in `[0, 1]`, returned as `(num, den)`.
    pub fn unsigned(&self) -> Angle {
        if self.p <= self.q {
            *self
        } else {
            Angle::new(2 * self.q - self.p, self.q)
        }
    }

    /// Compare the values `p/q` of two angles in `[0, 2pi)`.
    pub fn cmp_value(&self, o: &Angle) -> std::cmp::Ordering {
        (self.p as i128 * o.q as i128).cmp(&(o.p as i128 * self.q as i128))
    }

    pub fn to_radians(&self) -> f64 {
        std::f64::consts::PI * self.p as f64 / self.q as f64
    }

    /// Whether this angle is an integer multiple of `pi/r`.
    pub fn is_multiple_of_pi_over(&self, r: i64) -> bool {
        (self.p * r) % self.q == 0
    }

    pub fn parse(s: &str) -> Result<Angle> {
        let err = || Error::Parse(format!("bad angle {s:?}; expected \"p/q pi\""));
        let t = s.trim();
        let body = t.strip_suffix("pi").ok_or_else(err)?.trim();
        let body = body.strip_suffix('*').unwrap_or(body).trim();
        if body.is_empty() {
            return Ok(Angle::new(1, 1));
        }
        let (p, q) = match body.split_once('/') {
            Some((a, b)) => (a.trim().parse::<i64>().map_err(|_| err())?, b.trim().parse::<i64>().map_err(|_| err())?),
            None => (body.parse::<i64>().map_err(|_| err())?, 1),
        };
        if q <= 0 {
            return Err(err());
        }
        Ok(Angle::new(p, q))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{} pi", self.p)
        } else {
            write!(f, "{}/{} pi", self.p, self.q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes() {
        assert_eq!(Angle::new(5, 2), Angle::new(1, 2));
        assert_eq!(Angle::new(-1, 2), Angle::new(3, 2));
        assert_eq!(Angle::new(4, 2), Angle::zero());
        assert_eq!(Angle::new(2, 6), Angle::new(1, 3));
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["1/2 pi", "0 pi", "1 pi", "5/3 pi"] {
            assert_eq!(Angle::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(Angle::parse("pi").unwrap(), Angle::new(1, 1));
        assert!(Angle::parse("1/2").is_err());
    }

    #[test]
    fn unsigned_fold() {
        assert_eq!(Angle::new(3, 2).unsigned(), Angle::new(1, 2));
        assert_eq!(Angle::new(1, 1).unsigned(), Angle::new(1, 1));
    }
}
