//! Synchronous simulation of per-block deciders.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::rounding::GridPoint;
use crate::system::{Certificate, OrbitSystem, Verdict};

/// Coordinates whose squared modulus is exact.
pub trait Coord: Clone + Eq + std::hash::Hash + std::fmt::Debug {
    fn modulus_sq(&self) -> Rational;
}

impl Coord for GridPoint {
    fn modulus_sq(&self) -> Rational {
        GridPoint::modulus_sq(self)
    }
}

impl Coord for Rational {
    fn modulus_sq(&self) -> Rational {
        self * self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonitorStatus {
    Continue,
    /// The block slice never again equals the target slice.
    NeverAgain(Certificate),
    /// The block slice satisfies `x[j + period] = x[j]` for all `j >= start`.
    Periodic { start: u64, period: u64 },
}

/// Watches one block of a lock-step run.
pub trait BlockMonitor<T> {
    /// Observe the transition from step `i` to step `i + 1`.
    fn observe(&mut self, i: u64, prev: &[T], next: &[T]) -> Result<MonitorStatus>;
}

/// Brent cycle detection on a block slice, tracking when the slice last matched its target.
#[derive(Clone, Debug)]
pub struct BrentWatch<T> {
    offset: usize,
    size: usize,
    target: Vec<T>,
    saved: Vec<T>,
    saved_at: u64,
    power: u64,
    last_hit: Option<u64>,
}

impl<T: Coord> BrentWatch<T> {
    pub fn new(offset: usize, size: usize, initial: &[T], target: &[T]) -> Self {
        let slice = initial[offset..offset + size].to_vec();
        let tgt = target[offset..offset + size].to_vec();
        let last_hit = if slice == tgt { Some(0) } else { None };
        BrentWatch { offset, size, target: tgt, saved: slice, saved_at: 0, power: 1, last_hit }
    }

    pub fn last_hit(&self) -> Option<u64> {
        self.last_hit
    }

    /// Feed the slice at step `i`; returns a status once a cycle is confirmed.
    pub fn feed(&mut self, i: u64, state: &[T]) -> MonitorStatus {
        let slice = &state[self.offset..self.offset + self.size];
        if slice == self.target.as_slice() {
            self.last_hit = Some(i);
        }
        if slice == self.saved.as_slice() {
            let start = self.saved_at;
            let period = i - start;
            return match self.last_hit {
                Some(h) if h >= start => MonitorStatus::Periodic { start, period },
                _ => MonitorStatus::NeverAgain(Certificate::CycleDetected { step_bound: BigUint::from(i), at_step: i }),
            };
        }
        if i - self.saved_at == self.power {
            self.saved = slice.to_vec();
            self.saved_at = i;
            self.power *= 2;
        }
        MonitorStatus::Continue
    }
}

/// Outcome details of a lock-step run.
#[derive(Clone, Debug)]
pub struct LockstepReport {
    pub verdict: Verdict,
    pub steps: u64,
}

/// Run all monitors in lock step until the target is hit or the monitors settle the question.
pub fn run_lockstep<S, T>(sys: &S, monitors: &mut [Box<dyn BlockMonitor<T> + '_>], budget: u64) -> Result<LockstepReport>
where
    S: OrbitSystem<State = Vec<T>>,
    T: Coord,
{
    let target = sys.target_state();
    let mut cur = sys.initial_state();
    if cur == target {
        return Ok(LockstepReport { verdict: Verdict::Reached { step: 0 }, steps: 0 });
    }
    let mut periodic: Vec<Option<(u64, u64)>> = vec![None; monitors.len()];
    let mut joint: Option<u64> = None;
    let mut i: u64 = 0;
    loop {
        if i >= budget {
            return Err(Error::BudgetExceeded(format!("{budget} steps")));
        }
        let next = sys.step_state(&cur)?;
        let mut never = None;
        for (m, slot) in monitors.iter_mut().zip(periodic.iter_mut()) {
            if slot.is_some() {
                continue;
            }
            match m.observe(i, &cur, &next)? {
                MonitorStatus::Continue => {}
                MonitorStatus::NeverAgain(c) => {
                    if never.is_none() {
                        never = Some(c);
                    }
                }
                MonitorStatus::Periodic { start, period } => *slot = Some((start, period)),
            }
        }
        i += 1;
        cur = next;
        if cur == target {
            return Ok(LockstepReport { verdict: Verdict::Reached { step: i }, steps: i });
        }
        if let Some(c) = never {
            return Ok(LockstepReport { verdict: Verdict::NotReached(c), steps: i });
        }
        if joint.is_none() && periodic.iter().all(|p| p.is_some()) {
            let start = periodic.iter().map(|p| p.unwrap().0).max().unwrap_or(0);
            let period = periodic.iter().fold(1u64, |acc, p| acc.lcm(&p.unwrap().1));
            joint = Some(start.saturating_add(period));
        }
        if let Some(end) = joint {
            if i >= end {
                let step_bound = BigUint::from(end);
                return Ok(LockstepReport {
                    verdict: Verdict::NotReached(Certificate::CycleDetected { step_bound, at_step: i }),
                    steps: i,
                });
            }
        }
    }
}

/// Clamp a big step count into a u64 budget.
pub fn budget_from(b: &BigUint) -> u64 {
    b.to_u64().unwrap_or(u64::MAX)
}
