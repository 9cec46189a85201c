//! Decider for modulus-one Jordan blocks under Argand truncation or expansion.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hyperbolic::{block_budget, jnf_block_monitor, modulus_upper};
use crate::lockstep::{budget_from, run_lockstep, BlockMonitor, BrentWatch, LockstepReport, MonitorStatus};
use crate::numerics::{int, Angle, Rational};
use crate::rounding::{kball_count, GridPoint, RealRoundingKind, RoundingSpec, Shape};
use crate::system::{Certificate, JnfSystem, Verdict};

/// Rationality of the trigonometric values of a rational multiple of pi.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngleClass {
    pub sin_rational: bool,
    pub cos_rational: bool,
    /// `None` when the cosine vanishes.
    pub tan_rational: Option<bool>,
    pub axis_multiple_90: bool,
}

pub fn niven_classify(angle: &Angle) -> AngleClass {
    let sixths = if angle.is_multiple_of_pi_over(6) { Some((6 * angle.p() / angle.q()).rem_euclid(12)) } else { None };
    let sin_rational = sixths.is_some_and(|k| matches!(k % 6, 0 | 1 | 3 | 5));
    let cos_rational = sixths.is_some_and(|k| matches!(k % 6, 0 | 2 | 3 | 4));
    let cos_zero = sixths.is_some_and(|k| k == 3 || k == 9);
    let tan_rational = if cos_zero { None } else { Some(angle.is_multiple_of_pi_over(4)) };
    AngleClass { sin_rational, cos_rational, tan_rational, axis_multiple_90: angle.is_multiple_of_pi_over(2) }
}

/// Loop-count recurrences for the truncation and expansion deciders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationBounds {
    /// `T[k]` from exact ball counts, for dimension `k + 1`.
    pub t: Vec<BigUint>,
    /// `T[k]` using the hypercube estimate `(2U/g)^d`.
    pub t_cube: Vec<BigUint>,
    pub u: Vec<Rational>,
    pub i_s: Rational,
    pub f: Rational,
    /// `U_{d-j} <= (F max(i_s, 1))^((d+1)^j)` for every `j`.
    pub closed_form_holds: bool,
    pub budget: BigUint,
}

const EXACT_BALL_ROWS: i64 = 1 << 12;

fn ball_points(u: &Rational, spec: &RoundingSpec) -> BigUint {
    if (u / &spec.g) <= int(EXACT_BALL_ROWS) {
        if let Ok(c) = kball_count(u, spec) {
            return c;
        }
    }
    let side = (u / &spec.g).floor().to_integer().to_biguint().unwrap_or_default() * 2u32 + 1u32;
    &side * &side
}

fn cube(u: &Rational, g: &Rational, d: usize) -> BigUint {
    num_traits::pow(int(2) * u / g, d).ceil().to_integer().to_biguint().unwrap_or_default()
}

pub fn truncation_bounds_raw(d: usize, i_s: &Rational, spec: &RoundingSpec) -> TruncationBounds {
    let g = &spec.g;
    let dd = int(d as i64);
    let mut u = vec![i_s.clone(); d];
    let mut t = vec![BigUint::zero(); d];
    let mut t_cube = vec![BigUint::zero(); d];
    t[d - 1] = ball_points(i_s, spec);
    t_cube[d - 1] = cube(i_s, g, d);
    for k in (1..d).rev() {
        let tk = Rational::from_integer(t[k].clone().into());
        u[k - 1] = i_s + &dd * tk * &u[k];
        t[k - 1] = ball_points(&u[k - 1], spec) + &t[k];
        t_cube[k - 1] = cube(&u[k - 1], g, d) + &t_cube[k];
    }
    let i_hat = i_s.clone().max(int(1));
    let f = &i_hat * &dd * num_traits::pow(int(2) / g.clone().min(int(1)), d) * int(2);
    let base = &f * &i_hat;
    let closed_form_holds = (0..d).all(|j| {
        let e = (d + 1).checked_pow(j as u32).unwrap_or(usize::MAX);
        e > 64 || u[d - 1 - j] <= num_traits::pow(base.clone(), e)
    });
    let budget = (BigUint::from(d) * &t[0] + 4u32) * 4u32 + 16u32;
    TruncationBounds { t, t_cube, u, i_s: i_s.clone(), f, closed_form_holds, budget }
}

pub fn truncation_bounds(sys: &JnfSystem, b: usize) -> TruncationBounds {
    let (o, s) = sys.block_ranges()[b];
    let i_s = sys.initial[o..o + s].iter().fold(Rational::zero(), |a, p| a + modulus_upper(&p.modulus_sq()));
    truncation_bounds_raw(s, &i_s, &sys.spec)
}

type Gauss = (Rational, Rational);

fn gauss(p: &GridPoint) -> Gauss {
    match p {
        GridPoint::Argand { re, im } => (re.clone(), im.clone()),
        GridPoint::Polar { .. } => (Rational::zero(), Rational::zero()),
    }
}

fn gmul(a: &Gauss, b: &Gauss) -> Gauss {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

fn norm(a: &Gauss) -> Rational {
    &a.0 * &a.0 + &a.1 * &a.1
}

/// Monitor for one modulus-one block.
pub struct ArgandMonitor {
    offset: usize,
    kind: RealRoundingKind,
    /// `lambda` as a Gaussian unit when its angle is a multiple of `pi/2`.
    unit: Option<Gauss>,
    order: u64,
    target: Vec<GridPoint>,
    /// Local index of the highest dimension still in play.
    top: Option<usize>,
    seen: HashSet<GridPoint>,
    /// Step from which the top dimension rotates without rounding.
    exact_from: Option<u64>,
    watch: BrentWatch<GridPoint>,
}

impl ArgandMonitor {
    pub fn new(sys: &JnfSystem, b: usize) -> Result<Self> {
        let kind = match sys.spec.shape {
            Shape::Argand(k @ (RealRoundingKind::Truncate | RealRoundingKind::Expand)) => k,
            _ => return Err(Error::UnsupportedCombination("argand decider needs truncation or expansion".into())),
        };
        let block = &sys.blocks[b];
        if !block.modulus.is_one() {
            return Err(Error::InternalInvariant("argand monitor on a non-unit block".into()));
        }
        let (o, s) = sys.block_ranges()[b];
        let class = niven_classify(&block.angle);
        let (unit, order) = if class.axis_multiple_90 {
            let quarter = (2 * block.angle.p() / block.angle.q()).rem_euclid(4);
            let u = [(1, 0), (0, 1), (-1, 0), (0, -1)][quarter as usize];
            (Some((int(u.0), int(u.1))), [1, 4, 2, 4][quarter as usize])
        } else {
            (None, 0)
        };
        Ok(ArgandMonitor {
            offset: o,
            kind,
            unit,
            order,
            target: sys.target[o..o + s].to_vec(),
            top: Some(s - 1),
            seen: HashSet::new(),
            exact_from: None,
            watch: BrentWatch::new(o, s, &sys.initial, &sys.target),
        })
    }

    /// Drop zero top dimensions and classify the new top at `step`.
    fn settle(&mut self, step: u64, slice: &[GridPoint]) -> Option<MonitorStatus> {
        while let Some(t) = self.top {
            if !slice[t].is_zero() {
                if self.unit.is_some() && self.exact_from.is_none() {
                    self.exact_from = Some(step);
                    let u = self.unit.clone().unwrap();
                    let mut z = gauss(&slice[t]);
                    let want = gauss(&self.target[t]);
                    if !(0..self.order).any(|_| {
                        let hit = z == want;
                        z = gmul(&z, &u);
                        hit
                    }) {
                        return Some(self.mismatch(t));
                    }
                }
                return None;
            }
            if !self.target[t].is_zero() {
                return Some(self.mismatch(t));
            }
            self.top = t.checked_sub(1);
            self.seen.clear();
            self.exact_from = None;
        }
        Some(MonitorStatus::Periodic { start: step, period: 1 })
    }

    fn mismatch(&self, t: usize) -> MonitorStatus {
        MonitorStatus::NeverAgain(Certificate::StabilizedMismatch { dimension: self.offset + t + 1 })
    }

    fn diverged(&self, t: usize) -> MonitorStatus {
        MonitorStatus::NeverAgain(Certificate::DivergedPastTarget { dimension: self.offset + t + 1 })
    }
}

impl BlockMonitor<GridPoint> for ArgandMonitor {
    fn observe(&mut self, i: u64, prev: &[GridPoint], next: &[GridPoint]) -> Result<MonitorStatus> {
        let s = self.target.len();
        let (p, q) = (&prev[self.offset..self.offset + s], &next[self.offset..self.offset + s]);
        if i == 0 {
            if let Some(st) = self.settle(0, p) {
                return Ok(st);
            }
            if let Some(t) = self.top {
                self.seen.insert(p[t].clone());
            }
        }
        if let Some(st) = self.settle(i + 1, q) {
            return Ok(st);
        }
        let t = self.top.expect("settled top");
        if let (Some(start), Some(u)) = (self.exact_from, &self.unit) {
            if t == 0 {
                return Ok(MonitorStatus::Periodic { start, period: self.order });
            }
            // below the exact top: x(n) = lambda^n (x + n mu) with no rounding
            let x = gauss(&q[t - 1]);
            let mu = gmul(&(u.0.clone(), -u.1.clone()), &gauss(&q[t]));
            let cross = &x.0 * &mu.0 + &x.1 * &mu.1;
            let increasing = int(2) * cross + norm(&mu) > Rational::zero();
            if increasing && norm(&x) > self.target[t - 1].modulus_sq() {
                return Ok(self.diverged(t - 1));
            }
        } else {
            match self.kind {
                RealRoundingKind::Expand => {
                    if q[t].modulus_sq() > self.target[t].modulus_sq() {
                        return Ok(self.diverged(t));
                    }
                }
                _ => {
                    if !self.seen.insert(q[t].clone()) {
                        return Err(Error::InternalInvariant(format!(
                            "dimension {} stabilised at a nonzero modulus for an off-axis angle",
                            self.offset + t + 1
                        )));
                    }
                }
            }
        }
        Ok(self.watch.feed(i + 1, next))
    }
}

/// Run the truncation or expansion decider.
pub fn decide_argand_report(sys: &JnfSystem) -> Result<LockstepReport> {
    let mut monitors: Vec<Box<dyn BlockMonitor<GridPoint>>> = Vec::new();
    let mut budget = BigUint::one();
    for (b, block) in sys.blocks.iter().enumerate() {
        if block.modulus.is_one() {
            monitors.push(Box::new(ArgandMonitor::new(sys, b)?));
            budget *= truncation_bounds(sys, b).budget;
        } else {
            let (m, t) = jnf_block_monitor(sys, b)?;
            budget *= block_budget(&t.step_bound);
            monitors.push(Box::new(m));
        }
    }
    run_lockstep(sys, &mut monitors, budget_from(&budget))
}

fn require(sys: &JnfSystem, kind: RealRoundingKind) -> Result<()> {
    if sys.spec.shape != Shape::Argand(kind) {
        return Err(Error::UnsupportedCombination(format!("expected Argand {} rounding", kind.name())));
    }
    Ok(())
}

pub fn decide_truncation(sys: &JnfSystem) -> Result<Verdict> {
    require(sys, RealRoundingKind::Truncate)?;
    Ok(decide_argand_report(sys)?.verdict)
}

pub fn decide_expansion(sys: &JnfSystem) -> Result<Verdict> {
    require(sys, RealRoundingKind::Expand)?;
    Ok(decide_argand_report(sys)?.verdict)
}
