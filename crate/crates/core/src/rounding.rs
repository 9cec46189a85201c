//! Rounding functions on exact values, their effect bounds, and [K]-ball counts.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{self, int, isqrt_floor, nearest_angle_index, rat, CycloNum, FieldCtx, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RealRoundingKind {
    Floor,
    Ceil,
    Truncate,
    Expand,
    /// Nearest value, exact half-ties upward.
    MinimalErrorUp,
}

impl RealRoundingKind {
    pub const ALL: [RealRoundingKind; 5] = [
        RealRoundingKind::Floor,
        RealRoundingKind::Ceil,
        RealRoundingKind::Truncate,
        RealRoundingKind::Expand,
        RealRoundingKind::MinimalErrorUp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RealRoundingKind::Floor => "floor",
            RealRoundingKind::Ceil => "ceil",
            RealRoundingKind::Truncate => "truncate",
            RealRoundingKind::Expand => "expand",
            RealRoundingKind::MinimalErrorUp => "minimal-error-up",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown rounding kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Argand(RealRoundingKind),
    /// Modulus rounded by its kind, angle to the nearest multiple of `pi/r`.
    Polar { modulus: RealRoundingKind, r: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingSpec {
    pub shape: Shape,
    pub g: Rational,
}

impl RoundingSpec {
    pub fn argand(kind: RealRoundingKind, g: Rational) -> Self {
        RoundingSpec { shape: Shape::Argand(kind), g }
    }

    pub fn polar(modulus: RealRoundingKind, r: u32, g: Rational) -> Self {
        RoundingSpec { shape: Shape::Polar { modulus, r }, g }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.g.is_positive() {
            return Err(Error::ValidationFailed("granularity must be positive".into()));
        }
        if let Shape::Polar { r, .. } = self.shape {
            if r < 2 {
                return Err(Error::ValidationFailed("polar rounding needs R >= 2".into()));
            }
        }
        Ok(())
    }

    pub fn polar_r(&self) -> Option<u32> {
        match self.shape {
            Shape::Polar { r, .. } => Some(r),
            Shape::Argand(_) => None,
        }
    }

    pub fn kind(&self) -> RealRoundingKind {
        match self.shape {
            Shape::Argand(k) => k,
            Shape::Polar { modulus, .. } => modulus,
        }
    }

    pub fn is_polar(&self) -> bool {
        matches!(self.shape, Shape::Polar { .. })
    }
}

/// An admissible point of the rounding grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridPoint {
    Argand { re: Rational, im: Rational },
    Polar { modulus: Rational, index: u32 },
}

impl GridPoint {
    pub fn zero_like(spec: &RoundingSpec) -> Self {
        match spec.shape {
            Shape::Argand(_) => GridPoint::Argand { re: Rational::zero(), im: Rational::zero() },
            Shape::Polar { .. } => GridPoint::Polar { modulus: Rational::zero(), index: 0 },
        }
    }

    pub fn real(v: Rational) -> Self {
        GridPoint::Argand { re: v, im: Rational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GridPoint::Argand { re, im } => re.is_zero() && im.is_zero(),
            GridPoint::Polar { modulus, .. } => modulus.is_zero(),
        }
    }

    pub fn modulus_sq(&self) -> Rational {
        match self {
            GridPoint::Argand { re, im } => re * re + im * im,
            GridPoint::Polar { modulus, .. } => modulus * modulus,
        }
    }

    /// Exact value in the field; polar points need the angular resolution `r`.
    pub fn to_cyclo(&self, ctx: &Arc<FieldCtx>, r: Option<u32>) -> Result<CycloNum> {
        match self {
            GridPoint::Argand { re, im } => CycloNum::from_gaussian(ctx, re, im),
            GridPoint::Polar { modulus, index } => {
                let r = r.ok_or_else(|| Error::InternalInvariant("polar point without R".into()))?;
                let l = ctx.order();
                if l % (2 * r as usize) != 0 {
                    return Err(Error::OrderMismatch { order: l });
                }
                let step = (l / (2 * r as usize)) as i64;
                Ok(CycloNum::zeta_pow(ctx, *index as i64 * step).scale(modulus))
            }
        }
    }

    /// Rotate a polar point by `c` angular steps.
    pub fn rotate_polar(&self, c: u32, r: u32) -> GridPoint {
        match self {
            GridPoint::Polar { modulus, index } if !modulus.is_zero() => {
                GridPoint::Polar { modulus: modulus.clone(), index: (index + c) % (2 * r) }
            }
            other => other.clone(),
        }
    }

    /// Whether the point lies on the grid of `spec`.
    pub fn on_grid(&self, spec: &RoundingSpec) -> bool {
        let mult = |v: &Rational| (v / &spec.g).is_integer();
        match (self, &spec.shape) {
            (GridPoint::Argand { re, im }, Shape::Argand(_)) => mult(re) && mult(im),
            (GridPoint::Polar { modulus, index }, Shape::Polar { r, .. }) => {
                !modulus.is_negative() && mult(modulus) && *index < 2 * r && (!modulus.is_zero() || *index == 0)
            }
            _ => false,
        }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridPoint::Argand { re, im } => {
                write!(f, "({}, {})", numerics::fmt_rational(re), numerics::fmt_rational(im))
            }
            GridPoint::Polar { modulus, index } => write!(f, "({}, #{})", numerics::fmt_rational(modulus), index),
        }
    }
}

/// Round an exact rational to a multiple of `g`.
pub fn round_rational(x: &Rational, kind: RealRoundingKind, g: &Rational) -> Rational {
    let t = x / g;
    let m = match kind {
        RealRoundingKind::Floor => t.floor(),
        RealRoundingKind::Ceil => t.ceil(),
        RealRoundingKind::Truncate => t.trunc(),
        RealRoundingKind::Expand => {
            if t.is_negative() {
                t.floor()
            } else {
                t.ceil()
            }
        }
        RealRoundingKind::MinimalErrorUp => (t + rat(1, 2)).floor(),
    };
    m * g
}

/// Round a real field element to a multiple of `g`.
pub fn round_real(z: &CycloNum, kind: RealRoundingKind, g: &Rational) -> Result<Rational> {
    if let Some(r) = z.as_rational() {
        return Ok(round_rational(&r, kind, g));
    }
    // irrational values are never grid points, so only floor and ceil are needed
    let fl = numerics::certified_floor(z, g)?;
    let up = || &fl + g;
    Ok(match kind {
        RealRoundingKind::Floor => fl,
        RealRoundingKind::Ceil => up(),
        RealRoundingKind::Truncate => {
            if z.sign_real_unchecked()? >= 0 {
                fl
            } else {
                up()
            }
        }
        RealRoundingKind::Expand => {
            if z.sign_real_unchecked()? >= 0 {
                up()
            } else {
                fl
            }
        }
        RealRoundingKind::MinimalErrorUp => numerics::certified_floor(&z.add_rational(&(g / int(2))), g)?,
    })
}

fn cmp_sq(nsq: &CycloNum, v: &Rational) -> Result<Ordering> {
    nsq.cmp_rational(&(v * v))
}

/// Round a nonnegative modulus given by its exact square `nsq`.
pub fn round_modulus(nsq: &CycloNum, kind: RealRoundingKind, g: &Rational) -> Result<Rational> {
    if let Some(n) = nsq.as_rational() {
        if let Some(a) = numerics::exact_sqrt(&n) {
            return Ok(round_rational(&a, kind, g));
        }
    }
    let est = approx_index(nsq, g);
    let gm = |m: &BigInt| Rational::from_integer(m.clone()) * g;
    let m = match kind {
        RealRoundingKind::Floor | RealRoundingKind::Truncate => {
            // largest m with (gm)^2 <= N
            let mut m = est;
            loop {
                if m.is_positive() && cmp_sq(nsq, &gm(&m))? == Ordering::Less {
                    m -= 1;
                } else if cmp_sq(nsq, &gm(&(&m + 1)))? != Ordering::Less {
                    m += 1;
                } else {
                    break m;
                }
            }
        }
        RealRoundingKind::Ceil | RealRoundingKind::Expand => {
            // smallest m with N <= (gm)^2
            let mut m = est;
            loop {
                if cmp_sq(nsq, &gm(&m))? == Ordering::Greater {
                    m += 1;
                } else if m.is_positive() && cmp_sq(nsq, &gm(&(&m - 1)))? != Ordering::Greater {
                    m -= 1;
                } else {
                    break m;
                }
            }
        }
        RealRoundingKind::MinimalErrorUp => {
            // largest m >= 0 with m = 0 or (g(m - 1/2))^2 <= N
            let half = |m: &BigInt| (Rational::from_integer(m.clone()) - rat(1, 2)) * g;
            let mut m = est;
            loop {
                if m.is_positive() && cmp_sq(nsq, &half(&m))? == Ordering::Less {
                    m -= 1;
                } else if cmp_sq(nsq, &half(&(&m + 1)))? != Ordering::Less {
                    m += 1;
                } else {
                    break m;
                }
            }
        }
    };
    Ok(gm(&m))
}

fn approx_index(nsq: &CycloNum, g: &Rational) -> BigInt {
    let e = nsq.real_enclosure(64);
    let (lo, _) = e.floor_bounds();
    let n = if lo.is_negative() { BigInt::zero() } else { lo };
    isqrt_floor(&(Rational::from_integer(n) / (g * g)))
}

/// Round one complex value under `spec`.
pub fn round_complex(z: &CycloNum, spec: &RoundingSpec) -> Result<GridPoint> {
    match spec.shape {
        Shape::Argand(kind) => {
            if let Some(r) = z.as_rational() {
                return Ok(GridPoint::Argand { re: round_rational(&r, kind, &spec.g), im: Rational::zero() });
            }
            let re = round_real(&z.re(), kind, &spec.g)?;
            let im = round_real(&z.im()?, kind, &spec.g)?;
            Ok(GridPoint::Argand { re, im })
        }
        Shape::Polar { modulus, r } => {
            if z.is_zero() {
                return Ok(GridPoint::Polar { modulus: Rational::zero(), index: 0 });
            }
            let m = round_modulus(&z.modulus_sq(), modulus, &spec.g)?;
            if m.is_zero() {
                return Ok(GridPoint::Polar { modulus: m, index: 0 });
            }
            let index = nearest_angle_index(z, r)?;
            Ok(GridPoint::Polar { modulus: m, index })
        }
    }
}

/// Componentwise rounding of a vector.
pub fn round_vector(v: &[CycloNum], spec: &RoundingSpec) -> Result<Vec<GridPoint>> {
    v.iter().map(|z| round_complex(z, spec)).collect()
}

/// Pointwise effect bound: `g`, or `g/2` for minimal-error rounding.
/// For polar shapes this bounds the effect on the modulus only.
pub fn effect_bound(spec: &RoundingSpec) -> Rational {
    match spec.kind() {
        RealRoundingKind::MinimalErrorUp => &spec.g / int(2),
        _ => spec.g.clone(),
    }
}

/// Bound on `||z| - |[z]||`. Argand rounding of complex values moves each part by
/// at most the effect bound, so the modulus moves by at most `sqrt 2` times it;
/// `99/70` is a rational upper bound of `sqrt 2`.
pub fn modulus_effect_bound(spec: &RoundingSpec, complex: bool) -> Rational {
    let d = effect_bound(spec);
    match spec.shape {
        Shape::Argand(_) if complex => d * rat(99, 70),
        _ => d,
    }
}

/// Rows of the Argand ball beyond which exact counting is refused.
pub const KBALL_ROW_CAP: u64 = 1 << 22;

/// Exact number of admissible points of modulus at most `k`.
pub fn kball_count(k: &Rational, spec: &RoundingSpec) -> Result<BigUint> {
    if k.is_negative() {
        return Ok(BigUint::zero());
    }
    let kg = k / &spec.g;
    match spec.shape {
        Shape::Polar { r, .. } => {
            let m = kg.floor().to_integer().to_biguint().unwrap();
            Ok(BigUint::one() + m * BigUint::from(2 * r))
        }
        Shape::Argand(_) => {
            let rows = kg.floor().to_integer();
            if rows > BigInt::from(KBALL_ROW_CAP) {
                return Err(Error::TooLarge(format!("[K]-ball with {rows} rows")));
            }
            let k2 = &kg * &kg;
            let rows = rows.to_i64().unwrap();
            let mut total = BigUint::zero();
            for a in -rows..=rows {
                let rest = &k2 - int(a * a);
                let b = isqrt_floor(&rest).to_biguint().unwrap();
                total += b * 2u32 + 1u32;
            }
            Ok(total)
        }
    }
}

/// Exact count when feasible, otherwise the bounding-square count, which dominates it.
pub fn kball_bound(k: &Rational, spec: &RoundingSpec) -> BigUint {
    match kball_count(k, spec) {
        Ok(c) => c,
        Err(_) => {
            let side = (k / &spec.g).floor().to_integer().to_biguint().unwrap() * 2u32 + 1u32;
            &side * &side
        }
    }
}

/// Number of multiples of `g` in `[-k, k]`.
pub fn real_ball_count(k: &Rational, g: &Rational) -> BigUint {
    if k.is_negative() {
        return BigUint::zero();
    }
    (k / g).floor().to_integer().to_biguint().unwrap() * 2u32 + 1u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{field, Angle};
    use RealRoundingKind::*;

    #[test]
    fn round_real_examples() {
        assert_eq!(round_rational(&rat(5, 2), MinimalErrorUp, &int(1)), int(3));
        assert_eq!(round_rational(&rat(-5, 2), MinimalErrorUp, &int(1)), int(-2));
        assert_eq!(round_rational(&rat(-17, 10), Truncate, &int(1)), int(-1));
        assert_eq!(round_rational(&rat(-17, 10), Expand, &int(1)), int(-2));
        assert_eq!(round_rational(&rat(3, 10), Floor, &rat(1, 4)), rat(1, 4));
        assert_eq!(round_rational(&rat(3, 10), Ceil, &rat(1, 4)), rat(1, 2));
    }

    #[test]
    fn round_vector_examples() {
        let c = field(40);
        let spec = RoundingSpec::argand(Floor, int(1));
        let z = CycloNum::from_gaussian(&c, &rat(12, 10), &rat(37, 10)).unwrap();
        assert_eq!(round_complex(&z, &spec).unwrap(), GridPoint::Argand { re: int(1), im: int(3) });
        let spec = RoundingSpec::polar(Floor, 2, int(1));
        let w = CycloNum::embed_polar(&rat(34, 10), &Angle::new(3, 10), &c).unwrap();
        assert_eq!(round_complex(&w, &spec).unwrap(), GridPoint::Polar { modulus: int(3), index: 1 });
        let spec = RoundingSpec::argand(Truncate, int(1));
        let v = CycloNum::from_gaussian(&c, &rat(-5, 2), &rat(-1, 2)).unwrap();
        assert_eq!(round_complex(&v, &spec).unwrap(), GridPoint::Argand { re: int(-2), im: int(0) });
    }

    #[test]
    fn modulus_rounding_on_irrational_values() {
        let c = field(8);
        // |1 + e^{i pi/4}|^2 = 2 + sqrt2 ~ 3.414, modulus ~ 1.848
        let z = CycloNum::from_int(&c, 1).add(&CycloNum::zeta_pow(&c, 1));
        let n = z.modulus_sq();
        assert_eq!(round_modulus(&n, Floor, &int(1)).unwrap(), int(1));
        assert_eq!(round_modulus(&n, Ceil, &int(1)).unwrap(), int(2));
        assert_eq!(round_modulus(&n, MinimalErrorUp, &int(1)).unwrap(), int(2));
        assert_eq!(round_modulus(&n, MinimalErrorUp, &rat(1, 4)).unwrap(), rat(7, 4));
        // exact half: modulus 5/2 rounds up
        let h = CycloNum::from_rational(&c, &rat(25, 4));
        assert_eq!(round_modulus(&h, MinimalErrorUp, &int(1)).unwrap(), int(3));
    }

    #[test]
    fn effect_bounds() {
        assert_eq!(effect_bound(&RoundingSpec::argand(Floor, int(1))), int(1));
        assert_eq!(effect_bound(&RoundingSpec::argand(MinimalErrorUp, int(1))), rat(1, 2));
        assert_eq!(effect_bound(&RoundingSpec::polar(Floor, 4, int(2))), int(2));
    }

    #[test]
    fn kball_examples() {
        assert_eq!(kball_count(&int(2), &RoundingSpec::argand(Floor, int(1))).unwrap(), BigUint::from(13u32));
        assert_eq!(kball_count(&int(2), &RoundingSpec::polar(Floor, 2, int(1))).unwrap(), BigUint::from(9u32));
        assert_eq!(kball_count(&int(0), &RoundingSpec::argand(Floor, int(1))).unwrap(), BigUint::one());
        assert_eq!(kball_count(&int(0), &RoundingSpec::polar(Ceil, 3, int(1))).unwrap(), BigUint::one());
        assert_eq!(kball_count(&int(10), &RoundingSpec::argand(Floor, int(1))).unwrap(), BigUint::from(317u32));
        assert_eq!(kball_count(&int(1), &RoundingSpec::argand(Floor, rat(1, 2))).unwrap(), BigUint::from(13u32));
    }

    #[test]
    fn grid_membership() {
        let spec = RoundingSpec::polar(Floor, 2, int(1));
        assert!(GridPoint::Polar { modulus: int(3), index: 3 }.on_grid(&spec));
        assert!(!GridPoint::Polar { modulus: int(0), index: 3 }.on_grid(&spec));
        assert!(!GridPoint::Polar { modulus: rat(1, 2), index: 0 }.on_grid(&spec));
    }
}
