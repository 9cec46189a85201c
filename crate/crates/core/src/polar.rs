//! Decider for modulus-one Jordan blocks under polar rounding.
//!
//! Dimensions are settled from the last one upwards. A dimension is *rotating* from step `N`
//! when every later update is the rounded rotation of the previous value. The dimension
//! above the rotating ones is watched through the angle `phi` it makes with its neighbour;
//! it either starts rotating itself or is shown to stay above its target modulus forever.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::rc::Rc;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hyperbolic::{block_budget, jnf_block_monitor, modulus_upper};
use crate::lockstep::{budget_from, run_lockstep, BlockMonitor, BrentWatch, LockstepReport, MonitorStatus};
use crate::numerics::{int, Angle, CycloNum, FieldCtx, Rational};
use crate::rounding::{effect_bound, GridPoint, RoundingSpec, Shape};
use crate::system::{rotation_shift, Certificate, JnfSystem, Verdict};

/// Where the watched dimension sits in the angle state machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMode {
    /// `phi > pi/2`, previous transition did not decrease the modulus.
    PhiI,
    /// `phi > pi/2`, previous transition decreased the modulus.
    PhiD,
    /// `phi <= pi/2`.
    PhiSmall,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionPhase {
    /// 1-based dimension of the system.
    pub dim: usize,
    pub phi: Angle,
    pub mode: PhaseMode,
    pub steps_in_state: u64,
}

/// Events worth reporting that do not affect the verdict.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PolarDiagnostics {
    /// `(dimension, step)` at which a dimension was found rotating.
    pub promotions: Vec<(usize, u64)>,
    /// Steps where `phi` and the modulus repeated but the update was not a plain rotation.
    pub stable_without_rotation: u64,
    /// Steps with `phi = pi` and a stationary modulus.
    pub phi_pi_stationary: u64,
    /// Last phase of each watched dimension.
    pub phases: Vec<DimensionPhase>,
}

fn right_angle() -> Angle {
    Angle::new(1, 2)
}

fn polar_parts(p: &GridPoint) -> Option<(&Rational, u32)> {
    match p {
        GridPoint::Polar { modulus, index } if !modulus.is_zero() => Some((modulus, *index)),
        _ => None,
    }
}

/// `phi = angle(lambda * a, b)` for grid points `a`, `b`; `None` if either is zero.
pub fn phi(lambda: &Angle, a: &GridPoint, b: &GridPoint, r: u32) -> Option<Angle> {
    let (_, ia) = polar_parts(a)?;
    let (_, ib) = polar_parts(b)?;
    let step = Angle::pi_over(r);
    let aa = lambda.add(&step.times(ia as i64));
    let ab = step.times(ib as i64);
    Some(aa.sub(&ab).unsigned())
}

/// Whether `gamma = angle(lambda a + b, lambda a) <= pi/2`, decided exactly.
pub fn gamma_at_most_right(la: &CycloNum, b: &CycloNum) -> Result<bool> {
    let s = la.add(b).mul(&la.conj()).re();
    Ok(s.sign_of_real()? >= 0)
}

/// `ceil((pi/4)/theta) theta + theta/2 <= pi/2` for `theta = pi/r`.
pub fn small_angle_helper(r: u32) -> bool {
    2 * r.div_ceil(4) + 1 <= r
}

/// Exact loop-count recurrences for a polar block, in units of the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceBounds {
    /// `T[k]` for dimension `k + 1`.
    pub t: Vec<BigUint>,
    pub u: Vec<Rational>,
    pub i_s: Rational,
    pub y_s: Rational,
    pub f: Rational,
    /// `U_{d-j} <= (F max(i_s, 1))^(2^j)` for every `j`.
    pub closed_form_holds: bool,
    pub budget: BigUint,
}

/// Evaluate the recurrences for dimension `d`, initial mass `i_s` and target mass `y_s`.
pub fn resource_bounds_raw(d: usize, i_s: &Rational, y_s: &Rational, r: u32) -> ResourceBounds {
    let two_r = int(2 * r as i64);
    let dd = int(d as i64);
    let mut t = vec![BigUint::one(); d];
    let mut u = vec![i_s.clone(); d];
    for k in (1..d).rev() {
        let tk = Rational::from_integer(t[k].clone().into());
        u[k - 1] = i_s + &dd * &tk * &u[k];
        let inner = ((y_s + &u[k - 1]) * &two_r + Rational::one()).ceil() * &two_r;
        t[k - 1] = inner.to_integer().to_biguint().unwrap_or_default() + &t[k];
    }
    let f = int(3) * &dd * i_s.clone().max(int(2)) * y_s.clone().max(int(1)) * &two_r * &two_r;
    let base = &f * i_s.clone().max(int(1));
    let closed_form_holds = (0..d).all(|j| j >= 12 || u[d - 1 - j] <= num_traits::pow(base.clone(), 1usize << j));
    let budget = (BigUint::from(d) * &t[0] + BigUint::from(2 * r)) * 4u32 + 16u32;
    ResourceBounds { t, u, i_s: i_s.clone(), y_s: y_s.clone(), f, closed_form_holds, budget }
}

/// Resource bounds of block `b` of a polar system.
pub fn resource_bounds(sys: &JnfSystem, b: usize) -> Result<ResourceBounds> {
    let r = sys.spec.polar_r().ok_or_else(|| Error::UnsupportedCombination("resource bounds need polar rounding".into()))?;
    let (o, s) = sys.block_ranges()[b];
    let mass = |v: &[GridPoint]| v.iter().fold(Rational::zero(), |acc, p| acc + modulus_upper(&p.modulus_sq())) / &sys.spec.g;
    Ok(resource_bounds_raw(s, &mass(&sys.initial[o..o + s]), &mass(&sys.target[o..o + s]), r))
}

/// Monitor for one modulus-one block.
pub struct PolarMonitor {
    offset: usize,
    size: usize,
    r: u32,
    c: u32,
    period: u64,
    theta: Angle,
    lambda: CycloNum,
    ctx: Arc<FieldCtx>,
    margin: Rational,
    target: Vec<GridPoint>,
    rotating_from: Vec<Option<u64>>,
    /// Local index of the watched dimension; `None` once all rotate.
    watched: Option<usize>,
    /// `(phi(i-1), modulus change i-1 -> i)` for the watched dimension.
    last: Option<(Angle, Ordering)>,
    phase: Option<DimensionPhase>,
    watch: BrentWatch<GridPoint>,
    diag: Rc<RefCell<PolarDiagnostics>>,
}

impl PolarMonitor {
    pub fn new(sys: &JnfSystem, b: usize, diag: Rc<RefCell<PolarDiagnostics>>) -> Result<Self> {
        let r = sys.spec.polar_r().ok_or_else(|| Error::UnsupportedCombination("polar monitor needs polar rounding".into()))?;
        let block = &sys.blocks[b];
        if !block.modulus.is_one() {
            return Err(Error::InternalInvariant("polar monitor on a non-unit block".into()));
        }
        let (o, s) = sys.block_ranges()[b];
        let c = rotation_shift(&block.angle, r);
        let period = (2 * r / c.gcd(&(2 * r))) as u64;
        let ctx = sys.ctx().clone();
        let lambda = CycloNum::embed_polar(&Rational::one(), &block.angle, &ctx)?;
        let mut rotating_from = vec![None; s];
        rotating_from[s - 1] = Some(0);
        Ok(PolarMonitor {
            offset: o,
            size: s,
            r,
            c,
            period,
            theta: block.angle,
            lambda,
            ctx,
            margin: effect_bound(&sys.spec),
            target: sys.target[o..o + s].to_vec(),
            rotating_from,
            watched: s.checked_sub(2),
            last: None,
            phase: None,
            watch: BrentWatch::new(o, s, &sys.initial, &sys.target),
            diag,
        })
    }

    fn rot(&self, p: &GridPoint, n: u64) -> GridPoint {
        let shift = ((self.c as u64 * n) % (2 * self.r as u64)) as u32;
        p.rotate_polar(shift, self.r)
    }

    /// With local dims `k..` rotating in `slice`, can they ever jointly equal the target?
    fn rotating_can_match(&self, slice: &[GridPoint], k: usize) -> bool {
        (0..self.period).any(|n| (k..self.size).all(|j| self.rot(&slice[j], n) == self.target[j]))
    }

    fn cyclo(&self, p: &GridPoint) -> Result<CycloNum> {
        p.to_cyclo(&self.ctx, Some(self.r))
    }

    fn mismatch(&self, k: usize) -> MonitorStatus {
        MonitorStatus::NeverAgain(Certificate::StabilizedMismatch { dimension: self.offset + k + 1 })
    }

    /// Analyse the transition `i -> i+1` of local dimension `j` whose neighbour rotates from `n`.
    fn analyse(&mut self, i: u64, j: usize, n: u64, prev: &[GridPoint], next: &[GridPoint]) -> Result<Option<Certificate>> {
        let (a0, b0) = (&prev[j], &prev[j + 1]);
        let Some(phi_i) = phi(&self.theta, a0, b0, self.r) else {
            self.last = None;
            return Ok(None);
        };
        let dim = self.offset + j + 1;
        let mod_prev = a0.modulus_sq();
        let mod_next = next[j].modulus_sq();
        let change = mod_next.cmp(&mod_prev);
        let phi_next = phi(&self.theta, &next[j], &next[j + 1], self.r);
        let right = right_angle();
        let small = phi_i.cmp_value(&right) != Ordering::Greater;

        if let Some(pn) = &phi_next {
            if pn.cmp_value(&phi_i) == Ordering::Greater {
                return Err(Error::InternalInvariant(format!(
                    "angle of dimension {dim} to its neighbour grew from {phi_i} to {pn} at step {i}"
                )));
            }
            if *pn == phi_i && change == Ordering::Equal && next[j] != self.rot(a0, 1) {
                self.diag.borrow_mut().stable_without_rotation += 1;
            }
        }
        if small && change == Ordering::Less {
            return Err(Error::InternalInvariant(format!("modulus of dimension {dim} dropped with phi <= pi/2 at step {i}")));
        }
        if phi_i == Angle::new(1, 1) && change == Ordering::Equal {
            self.diag.borrow_mut().phi_pi_stationary += 1;
        }

        let la = self.lambda.mul(&self.cyclo(a0)?);
        let b = self.cyclo(b0)?;
        let sum_sq = la.add(&b).modulus_sq();
        let gamma_small = gamma_at_most_right(&la, &b)?;
        let grew_exact = sum_sq.cmp_rational(&mod_prev)? == Ordering::Greater;
        if !gamma_small && grew_exact {
            if let Some(pn) = &phi_next {
                if pn.cmp_value(&right) == Ordering::Greater {
                    return Err(Error::InternalInvariant(format!(
                        "dimension {dim} grew across an axis without its angle dropping to pi/2 at step {i}"
                    )));
                }
            }
        }
        if let (Some((phi_prev, change_prev)), Some(pn)) = (&self.last, &phi_next) {
            let constant = *phi_prev == phi_i && *pn == phi_i && phi_i.cmp_value(&right) == Ordering::Greater;
            if constant && *change_prev == Ordering::Less && change == Ordering::Greater {
                return Err(Error::InternalInvariant(format!(
                    "dimension {dim} decreased then increased at constant angle {phi_i} around step {i}"
                )));
            }
        }

        let mode = if small {
            PhaseMode::PhiSmall
        } else if self.last.as_ref().is_some_and(|l| l.1 == Ordering::Less) {
            PhaseMode::PhiD
        } else {
            PhaseMode::PhiI
        };
        let steps_in_state = match &self.phase {
            Some(p) if p.dim == dim && p.phi == phi_i && p.mode == mode => p.steps_in_state + 1,
            _ => 1,
        };
        self.phase = Some(DimensionPhase { dim, phi: phi_i, mode, steps_in_state });
        self.last = Some((phi_i, change));

        let y_sq = self.target[j].modulus_sq();
        // the modulus can never come back down below the current one
        if i > n && small && mod_prev > y_sq {
            return Ok(Some(Certificate::DivergedPastTarget { dimension: dim }));
        }
        let a_abs = modulus_upper(&mod_prev);
        if i > n && gamma_small && mod_prev >= y_sq {
            let bar = &a_abs + &self.margin;
            if &a_abs * &a_abs == mod_prev && sum_sq.cmp_rational(&(&bar * &bar))? == Ordering::Greater {
                return Ok(Some(Certificate::DivergedPastTarget { dimension: dim }));
            }
        }
        Ok(None)
    }

    fn record_phase(&self) {
        if let Some(p) = &self.phase {
            let mut d = self.diag.borrow_mut();
            d.phases.retain(|q| q.dim != p.dim);
            d.phases.push(p.clone());
        }
    }
}

impl BlockMonitor<GridPoint> for PolarMonitor {
    fn observe(&mut self, i: u64, prev: &[GridPoint], next: &[GridPoint]) -> Result<MonitorStatus> {
        let (o, s) = (self.offset, self.size);
        let (p, q) = (&prev[o..o + s], &next[o..o + s]);
        if i == 0 && !self.rotating_can_match(p, s - 1) {
            return Ok(self.mismatch(s - 1));
        }
        while let Some(j) = self.watched {
            let n = self.rotating_from[j + 1].expect("neighbour rotates");
            if i < n || q[j] != self.rot(&p[j], 1) {
                break;
            }
            self.rotating_from[j] = Some(i);
            self.diag.borrow_mut().promotions.push((o + j + 1, i));
            self.record_phase();
            self.watched = j.checked_sub(1);
            self.last = None;
            self.phase = None;
            if !self.rotating_can_match(q, j) {
                return Ok(self.mismatch(j));
            }
        }
        let Some(j) = self.watched else {
            return Ok(MonitorStatus::Periodic { start: self.rotating_from[0].unwrap_or(0), period: self.period });
        };
        let n = self.rotating_from[j + 1].expect("neighbour rotates");
        if i > n {
            if let Some(c) = self.analyse(i, j, n, p, q)? {
                self.record_phase();
                return Ok(MonitorStatus::NeverAgain(c));
            }
        }
        let status = self.watch.feed(i + 1, next);
        if status != MonitorStatus::Continue {
            self.record_phase();
        }
        Ok(status)
    }
}

/// Run the polar decider, returning the lock-step report and diagnostics.
pub fn decide_polar_report(sys: &JnfSystem) -> Result<(LockstepReport, PolarDiagnostics)> {
    if !matches!(sys.spec.shape, Shape::Polar { .. }) {
        return Err(Error::UnsupportedCombination("polar decider needs polar rounding".into()));
    }
    let diag = Rc::new(RefCell::new(PolarDiagnostics::default()));
    let mut monitors: Vec<Box<dyn BlockMonitor<GridPoint>>> = Vec::new();
    let mut budget = BigUint::one();
    for (b, block) in sys.blocks.iter().enumerate() {
        if block.modulus.is_one() {
            monitors.push(Box::new(PolarMonitor::new(sys, b, diag.clone())?));
            budget *= resource_bounds(sys, b)?.budget;
        } else {
            let (m, t) = jnf_block_monitor(sys, b)?;
            budget *= block_budget(&t.step_bound);
            monitors.push(Box::new(m));
        }
    }
    let report = run_lockstep(sys, &mut monitors, budget_from(&budget))?;
    drop(monitors);
    let d = Rc::try_unwrap(diag).map(|c| c.into_inner()).unwrap_or_default();
    Ok((report, d))
}

pub fn decide_polar(sys: &JnfSystem) -> Result<Verdict> {
    Ok(decide_polar_report(sys)?.0.verdict)
}

/// Convenience constructor for polar specs used in tests and examples.
pub fn polar_spec(kind: crate::rounding::RealRoundingKind, r: u32, g: Rational) -> RoundingSpec {
    RoundingSpec::polar(kind, r, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rounding::RealRoundingKind::*;
    use crate::system::{simulate, ExactValue, JordanBlock};

    fn pt(m: i64, idx: u32) -> GridPoint {
        GridPoint::Polar { modulus: int(m), index: idx }
    }

    fn block_system(size: usize, angle: Angle, r: u32, kind: crate::rounding::RealRoundingKind, x: Vec<GridPoint>, y: Vec<GridPoint>) -> JnfSystem {
        JnfSystem::from_grid(vec![JordanBlock::new(size, int(1), angle)], x, y, RoundingSpec::polar(kind, r, int(1))).unwrap()
    }

    #[test]
    fn phi_examples() {
        let quarter = Angle::new(1, 2);
        assert_eq!(phi(&quarter, &pt(1, 0), &pt(1, 0), 2), Some(Angle::new(1, 2)));
        assert_eq!(phi(&Angle::zero(), &pt(2, 1), &pt(2, 1), 2), Some(Angle::zero()));
        assert_eq!(phi(&quarter, &pt(1, 0), &pt(1, 2), 2), Some(Angle::new(1, 2)));
        assert_eq!(phi(&quarter, &pt(0, 0), &pt(1, 2), 2), None);
    }

    #[test]
    fn small_angle_helper_holds() {
        assert!((3..=100).all(small_angle_helper));
    }

    #[test]
    fn pure_rotation() {
        let q = Angle::new(1, 2);
        let sys = block_system(1, q, 2, Floor, vec![pt(3, 0)], vec![pt(3, 2)]);
        assert_eq!(decide_polar(&sys).unwrap(), Verdict::Reached { step: 2 });
        let sys = block_system(1, q, 2, Floor, vec![pt(3, 0)], vec![pt(2, 0)]);
        assert!(matches!(decide_polar(&sys).unwrap(), Verdict::NotReached(Certificate::StabilizedMismatch { dimension: 1 })));
    }

    fn max_first(sys: &JnfSystem, steps: u64) -> Vec<Rational> {
        let tr = simulate(sys, steps).unwrap();
        (0..sys.dimension())
            .map(|k| tr.states.iter().map(|s| modulus_upper(&s[k].modulus_sq())).max().unwrap())
            .collect()
    }

    #[test]
    fn doubly_exponential_growth_example() {
        let q = Angle::new(1, 2);
        let sys = block_system(2, q, 2, MinimalErrorUp, vec![pt(5, 0), pt(4, 0)], vec![pt(17, 0), pt(4, 0)]);
        assert!(!decide_polar(&sys).unwrap().is_reached());
        assert_eq!(max_first(&sys, 200), vec![int(16), int(4)]);
        let sys = block_system(3, q, 2, MinimalErrorUp, vec![pt(6, 0), pt(5, 0), pt(4, 0)], vec![pt(0, 0); 3]);
        assert!(!decide_polar(&sys).unwrap().is_reached());
        assert_eq!(max_first(&sys, 2000), vec![int(256), int(16), int(4)]);
    }

    #[test]
    fn floor_variant_stays_smaller() {
        let q = Angle::new(1, 2);
        let sys = block_system(2, q, 2, Floor, vec![pt(5, 0), pt(4, 0)], vec![pt(17, 0), pt(4, 0)]);
        assert!(!decide_polar(&sys).unwrap().is_reached());
        assert_eq!(max_first(&sys, 200), vec![int(8), int(4)]);
    }

    #[test]
    fn resource_bound_examples() {
        let b = resource_bounds_raw(1, &int(9), &int(2), 2);
        assert_eq!((b.t.clone(), b.u.clone()), (vec![BigUint::one()], vec![int(9)]));
        let b = resource_bounds_raw(2, &int(9), &int(2), 2);
        assert_eq!(b.u, vec![int(27), int(9)]);
        assert_eq!(b.t, vec![BigUint::from(469u32), BigUint::one()]);
        assert!(b.closed_form_holds);
        for d in 1..6 {
            for r in 2..6 {
                assert!(resource_bounds_raw(d, &int(7), &int(3), r).closed_form_holds);
            }
        }
    }

    #[test]
    fn reaches_after_growth() {
        let q = Angle::new(1, 2);
        let x = vec![pt(5, 0), pt(4, 0)];
        let sys = block_system(2, q, 2, MinimalErrorUp, x.clone(), vec![pt(0, 0); 2]);
        let tr = simulate(&sys, 30).unwrap();
        let y = tr.states[7].clone();
        let sys = block_system(2, q, 2, MinimalErrorUp, x, y);
        assert!(decide_polar(&sys).unwrap().is_reached());
    }

    #[test]
    fn rejects_argand_spec() {
        let sys = JnfSystem::new(
            vec![JordanBlock::new(1, int(1), Angle::zero())],
            &[ExactValue::real(int(1))],
            &[ExactValue::real(int(1))],
            RoundingSpec::argand(Floor, int(1)),
        )
        .unwrap();
        assert!(decide_polar(&sys).is_err());
    }
}
