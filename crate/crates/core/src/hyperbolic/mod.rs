//! Decider for systems whose eigenvalues all have modulus different from one.

pub mod linalg;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lockstep::{budget_from, run_lockstep, BlockMonitor, BrentWatch, Coord, LockstepReport, MonitorStatus};
use crate::numerics::{exact_sqrt, int, sqrt_upper, Rational};
use crate::rounding::{effect_bound, kball_bound, modulus_effect_bound, real_ball_count, round_rational, GridPoint};
use crate::system::{Certificate, JnfSystem, JordanBlock, OrbitSystem, RationalSystem, Verdict};

use linalg::{Mat, RationalBlock};

/// Radii of one Jordan block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusTable {
    /// `C[k]` for dimension `k + 1` of the block.
    pub c: Vec<Rational>,
    pub ell: Rational,
    pub step_bound: BigUint,
    pub expanding: bool,
}

impl RadiusTable {
    pub fn max_radius(&self) -> Rational {
        self.c.iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

/// Exact modulus when the square is a rational square, otherwise a close upper bound.
pub fn modulus_upper(sq: &Rational) -> Rational {
    exact_sqrt(sq).unwrap_or_else(|| sqrt_upper(sq))
}

/// Radii for a block with eigenvalue modulus `modulus`, effect bound `delta`,
/// target moduli `y` and initial moduli `x`.
pub fn radii(modulus: &Rational, delta: &Rational, y: &[Rational], x: &[Rational], g: &Rational) -> Result<RadiusTable> {
    let one = Rational::one();
    if *modulus == one {
        return Err(Error::ModulusOneEigenvalue { block: 0 });
    }
    let d = y.len();
    let expanding = *modulus > one;
    let gap = (modulus - &one).abs();
    let mut ell = one.clone().max(delta.clone());
    for v in y {
        ell = ell.max(v.clone());
    }
    if !expanding {
        for v in x {
            ell = ell.max(v.clone());
        }
    }
    let mut c = vec![Rational::zero(); d];
    for k in (0..d).rev() {
        let above = if k + 1 < d { &c[k + 1] + delta } else { delta.clone() };
        c[k] = above / &gap + &ell;
    }
    let cmax = c.iter().max().cloned().unwrap_or_else(Rational::zero);
    let side = int(2) * cmax / g;
    let cube = num_traits::pow(side, d).ceil().to_integer().to_biguint().unwrap_or_default();
    let product = c.iter().fold(BigUint::one(), |acc, ck| acc * real_ball_count(ck, g));
    Ok(RadiusTable { c, ell, step_bound: cube.max(product), expanding })
}

/// The a-priori bound `l (d+1) (1 + (2/||lambda|-1|)^d)` on every radius.
pub fn radius_bound(table: &RadiusTable, modulus: &Rational) -> Rational {
    let d = table.c.len();
    let gap = (modulus - Rational::one()).abs();
    &table.ell * int(d as i64 + 1) * (Rational::one() + num_traits::pow(int(2) / gap, d))
}

#[derive(Clone, Debug)]
struct Geometry {
    offset: usize,
    expanding: bool,
    radii: Vec<Rational>,
    radii_sq: Vec<Rational>,
}

/// Escape, containment and repetition monitor for one or more blocks sharing a cycle watch.
pub struct HyperbolicMonitor<T> {
    blocks: Vec<Geometry>,
    watch: BrentWatch<T>,
    step_bound: BigUint,
}

impl<T: Coord> HyperbolicMonitor<T> {
    /// `tables` pairs each block offset with its radii; the watch covers `offset..offset+size`.
    pub fn new(tables: &[(usize, &RadiusTable)], range: (usize, usize), initial: &[T], target: &[T], step_bound: BigUint) -> Self {
        let blocks = tables
            .iter()
            .map(|(o, t)| Geometry {
                offset: *o,
                expanding: t.expanding,
                radii: t.c.clone(),
                radii_sq: t.c.iter().map(|c| c * c).collect(),
            })
            .collect();
        HyperbolicMonitor { blocks, watch: BrentWatch::new(range.0, range.1, initial, target), step_bound }
    }

    fn escapes(&self, s: &[T]) -> Result<Option<Certificate>> {
        for b in &self.blocks {
            let mut escaped = None;
            for (k, r2) in b.radii_sq.iter().enumerate() {
                let m = s[b.offset + k].modulus_sq();
                if b.expanding {
                    if m >= *r2 {
                        escaped = Some(k);
                    }
                } else if m > *r2 {
                    return Err(Error::InternalInvariant(format!(
                        "contracting coordinate {} left its radius",
                        b.offset + k + 1
                    )));
                }
            }
            if let Some(k) = escaped {
                return Ok(Some(Certificate::EscapedRadius { dimension: b.offset + k + 1, radius: b.radii[k].clone() }));
            }
        }
        Ok(None)
    }
}

impl<T: Coord> BlockMonitor<T> for HyperbolicMonitor<T> {
    fn observe(&mut self, i: u64, prev: &[T], next: &[T]) -> Result<MonitorStatus> {
        if i == 0 {
            if let Some(c) = self.escapes(prev)? {
                return Ok(MonitorStatus::NeverAgain(c));
            }
        }
        if let Some(c) = self.escapes(next)? {
            return Ok(MonitorStatus::NeverAgain(c));
        }
        let status = self.watch.feed(i + 1, next);
        if status != MonitorStatus::Continue {
            return Ok(status);
        }
        if self.watch.last_hit().is_none() && BigUint::from(i + 1) >= self.step_bound {
            return Ok(MonitorStatus::NeverAgain(Certificate::CycleDetected {
                step_bound: self.step_bound.clone(),
                at_step: i + 1,
            }));
        }
        Ok(MonitorStatus::Continue)
    }
}

fn moduli(s: &[GridPoint]) -> Vec<Rational> {
    s.iter().map(|p| modulus_upper(&p.modulus_sq())).collect()
}

/// Radii of block `b` of a JNF system, with the step bound counting admissible grid points.
pub fn jnf_block_table(sys: &JnfSystem, b: usize) -> Result<RadiusTable> {
    let block = &sys.blocks[b];
    let (o, s) = sys.block_ranges()[b];
    let complex = !sys.is_real();
    let delta = modulus_effect_bound(&sys.spec, complex);
    let mut t = radii(&block.modulus, &delta, &moduli(&sys.target[o..o + s]), &moduli(&sys.initial[o..o + s]), &sys.spec.g)
        .map_err(|e| match e {
            Error::ModulusOneEigenvalue { .. } => Error::ModulusOneEigenvalue { block: b + 1 },
            e => e,
        })?;
    if complex {
        let balls = t.c.iter().fold(BigUint::one(), |acc, ck| acc * kball_bound(ck, &sys.spec));
        t.step_bound = t.step_bound.max(balls);
    }
    Ok(t)
}

/// Monitor for a single non-unit block of a JNF system.
pub fn jnf_block_monitor(sys: &JnfSystem, b: usize) -> Result<(HyperbolicMonitor<GridPoint>, RadiusTable)> {
    let t = jnf_block_table(sys, b)?;
    let (o, s) = sys.block_ranges()[b];
    let m = HyperbolicMonitor::new(&[(o, &t)], (o, s), &sys.initial, &sys.target, t.step_bound.clone());
    Ok((m, t))
}

/// Steps allowed for a block watched with the given step bound.
pub fn block_budget(step_bound: &BigUint) -> BigUint {
    step_bound * 4u32 + 16u32
}

/// Run the hyperbolic decider on a JNF system and report the steps used.
pub fn decide_hyperbolic_jnf_report(sys: &JnfSystem) -> Result<LockstepReport> {
    let mut monitors: Vec<Box<dyn BlockMonitor<GridPoint>>> = Vec::new();
    let mut budget = BigUint::one();
    for b in 0..sys.blocks.len() {
        let (m, t) = jnf_block_monitor(sys, b)?;
        budget *= block_budget(&t.step_bound);
        monitors.push(Box::new(m));
    }
    run_lockstep(sys, &mut monitors, budget_from(&budget))
}

pub fn decide_hyperbolic_jnf(sys: &JnfSystem) -> Result<Verdict> {
    Ok(decide_hyperbolic_jnf_report(sys)?.verdict)
}

/// Rounding conjugated by a change of basis: `z -> z + P^{-1}([P z] - P z)`.
#[derive(Clone, Debug)]
pub struct ConjugatedRounding {
    pub p: Mat,
    pub p_inv: Mat,
    pub spec: crate::rounding::RoundingSpec,
    /// Bound on the effect per coordinate.
    pub delta: Rational,
}

impl ConjugatedRounding {
    pub fn apply(&self, z: &[Rational]) -> Vec<Rational> {
        let pz = linalg::mul_vec(&self.p, z);
        let kind = self.spec.kind();
        let err: Vec<Rational> = pz.iter().map(|v| round_rational(v, kind, &self.spec.g) - v).collect();
        let corr = linalg::mul_vec(&self.p_inv, &err);
        z.iter().zip(corr).map(|(a, b)| a + b).collect()
    }
}

pub fn conjugate_rounding(p: &Mat, spec: &crate::rounding::RoundingSpec) -> Result<ConjugatedRounding> {
    let p_inv = linalg::inverse(p)?;
    let delta = effect_bound(spec) * linalg::max_abs_row_sum(&p_inv);
    Ok(ConjugatedRounding { p: p.clone(), p_inv, spec: spec.clone(), delta })
}

/// The system `z -> [[J z]]` in Jordan coordinates.
#[derive(Clone, Debug)]
pub struct ConjugatedSystem {
    pub j: Mat,
    pub blocks: Vec<RationalBlock>,
    pub rounding: ConjugatedRounding,
    pub initial: Vec<Rational>,
    pub target: Vec<Rational>,
}

impl ConjugatedSystem {
    pub fn new(sys: &RationalSystem, p: &Mat, j: &Mat) -> Result<Self> {
        let m = sys.matrix.to_dense();
        linalg::validate_jnf(&m, p, j)?;
        let blocks = linalg::parse_jordan(j)?;
        let rounding = conjugate_rounding(p, &sys.spec)?;
        let initial = linalg::mul_vec(&rounding.p_inv, &sys.initial);
        let target = linalg::mul_vec(&rounding.p_inv, &sys.target);
        Ok(ConjugatedSystem { j: j.clone(), blocks, rounding, initial, target })
    }

    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        let mut o = 0;
        self.blocks
            .iter()
            .map(|(_, s)| {
                let r = (o, *s);
                o += s;
                r
            })
            .collect()
    }

    /// Map a Jordan-coordinate state back to the original coordinates.
    pub fn to_original(&self, z: &[Rational]) -> Vec<Rational> {
        linalg::mul_vec(&self.rounding.p, z)
    }
}

impl OrbitSystem for ConjugatedSystem {
    type State = Vec<Rational>;
    fn dim(&self) -> usize {
        self.j.len()
    }
    fn initial_state(&self) -> Self::State {
        self.initial.clone()
    }
    fn target_state(&self) -> Self::State {
        self.target.clone()
    }
    fn step_state(&self, z: &Self::State) -> Result<Self::State> {
        Ok(self.rounding.apply(&linalg::mul_vec(&self.j, z)))
    }
    fn coord_modulus_sq(&self, s: &Self::State, k: usize) -> Rational {
        &s[k] * &s[k]
    }
}

/// Radii of every block of a conjugated system, and a step bound counting original grid points.
pub fn conjugated_tables(cs: &ConjugatedSystem) -> Result<(Vec<RadiusTable>, BigUint)> {
    let g = &cs.rounding.spec.g;
    let mut tables = Vec::new();
    for (b, ((lam, _), (o, s))) in cs.blocks.iter().zip(cs.block_ranges()).enumerate() {
        let abs = |v: &[Rational]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let t = radii(&lam.abs(), &cs.rounding.delta, &abs(&cs.target[o..o + s]), &abs(&cs.initial[o..o + s]), g)
            .map_err(|e| match e {
                Error::ModulusOneEigenvalue { .. } => Error::ModulusOneEigenvalue { block: b + 1 },
                e => e,
            })?;
        tables.push(t);
    }
    let radii_all: Vec<Rational> = tables.iter().flat_map(|t| t.c.iter().cloned()).collect();
    let count = cs.rounding.p.iter().fold(BigUint::one(), |acc, row| {
        let reach = row.iter().zip(&radii_all).fold(Rational::zero(), |s, (a, c)| s + a.abs() * c);
        acc * real_ball_count(&reach, g)
    });
    Ok((tables, count))
}

/// Decide a rational system through its Jordan form. Computes `P, J` when not supplied.
pub fn decide_hyperbolic_general_report(sys: &RationalSystem, pj: Option<(Mat, Mat)>) -> Result<LockstepReport> {
    let (p, j) = match pj {
        Some(v) => v,
        None => {
            let (p, j, _) = linalg::jnf_rational(&sys.matrix.to_dense())?;
            (p, j)
        }
    };
    let cs = ConjugatedSystem::new(sys, &p, &j)?;
    let (tables, count) = conjugated_tables(&cs)?;
    let ranges = cs.block_ranges();
    let pairs: Vec<(usize, &RadiusTable)> = ranges.iter().map(|r| r.0).zip(tables.iter()).collect();
    let monitor = HyperbolicMonitor::new(&pairs, (0, cs.dim()), &cs.initial, &cs.target, count.clone());
    let mut monitors: Vec<Box<dyn BlockMonitor<Rational>>> = vec![Box::new(monitor)];
    run_lockstep(&cs, &mut monitors, budget_from(&block_budget(&count)))
}

pub fn decide_hyperbolic_general(sys: &RationalSystem, pj: Option<(Mat, Mat)>) -> Result<Verdict> {
    Ok(decide_hyperbolic_general_report(sys, pj)?.verdict)
}

/// Whether every block of the system is hyperbolic.
pub fn all_hyperbolic(blocks: &[JordanBlock]) -> bool {
    blocks.iter().all(|b| b.modulus != Rational::one())
}

/// Step bound used with the brute-force oracle on a JNF system: product of block counts.
pub fn jnf_oracle_bounds(sys: &JnfSystem) -> Result<(Rational, BigUint)> {
    let mut ball = Rational::zero();
    let mut steps = BigUint::one();
    for b in 0..sys.blocks.len() {
        let t = jnf_block_table(sys, b)?;
        ball = ball.max(t.max_radius());
        steps *= t.step_bound;
    }
    Ok((ball, steps))
}

/// Small helper for callers holding exact big counts.
pub fn to_u64_saturating(b: &BigUint) -> u64 {
    b.to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rat, Angle};
    use crate::rounding::{RealRoundingKind::*, RoundingSpec};
    use crate::system::{brute_force_decide, BruteForceOptions, ExactValue, SparseMatrix};

    fn real_block(size: usize, lam: Rational) -> JordanBlock {
        let angle = if lam.is_negative() { Angle::new(1, 1) } else { Angle::zero() };
        JordanBlock::new(size, lam.abs(), angle)
    }

    fn reals(v: &[i64]) -> Vec<ExactValue> {
        v.iter().map(|x| ExactValue::real(int(*x))).collect()
    }

    fn one_dim(lam: Rational, x: i64, y: i64) -> JnfSystem {
        JnfSystem::new(vec![real_block(1, lam)], &reals(&[x]), &reals(&[y]), RoundingSpec::argand(Floor, int(1))).unwrap()
    }

    #[test]
    fn radius_examples() {
        let t = radii(&int(2), &int(1), &[int(3)], &[int(0)], &int(1)).unwrap();
        assert_eq!((t.ell.clone(), t.c.clone()), (int(3), vec![int(4)]));
        let t = radii(&int(3), &int(1), &[int(1), int(1)], &[int(0), int(0)], &int(1)).unwrap();
        assert_eq!(t.c, vec![rat(9, 4), rat(3, 2)]);
        let t = radii(&rat(1, 2), &int(1), &[int(0)], &[int(7)], &int(1)).unwrap();
        assert_eq!((t.ell.clone(), t.c.clone()), (int(7), vec![int(9)]));
        assert!(radii(&int(1), &int(1), &[int(0)], &[int(0)], &int(1)).is_err());
    }

    #[test]
    fn radii_respect_a_priori_bound() {
        for lam in [rat(1, 3), rat(1, 2), int(2), int(3)] {
            for d in 1..4 {
                let y: Vec<Rational> = (0..d).map(|k| int(3 * k as i64 + 1)).collect();
                let t = radii(&lam, &int(1), &y, &y, &int(1)).unwrap();
                let b = radius_bound(&t, &lam);
                assert!(t.c.iter().all(|c| *c <= b));
            }
        }
    }

    #[test]
    fn one_dimensional_examples() {
        assert_eq!(decide_hyperbolic_jnf(&one_dim(int(2), 3, 12)).unwrap(), Verdict::Reached { step: 2 });
        assert_eq!(decide_hyperbolic_jnf(&one_dim(rat(1, 2), 7, 1)).unwrap(), Verdict::Reached { step: 2 });
        match decide_hyperbolic_jnf(&one_dim(int(2), 3, 5)).unwrap() {
            Verdict::NotReached(Certificate::EscapedRadius { dimension: 1, .. }) => {}
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn modulus_one_rejected() {
        let sys = one_dim(int(-1), 3, 5);
        assert_eq!(decide_hyperbolic_jnf(&sys).unwrap_err(), Error::ModulusOneEigenvalue { block: 1 });
    }

    #[test]
    fn conjugated_delta_examples() {
        let spec = RoundingSpec::argand(Floor, int(1));
        let p = linalg::inverse(&vec![vec![int(1), int(-2)], vec![int(0), int(3)]]).unwrap();
        assert_eq!(conjugate_rounding(&p, &spec).unwrap().delta, int(3));
        let two = vec![vec![int(2), int(0)], vec![int(0), int(2)]];
        let cr = conjugate_rounding(&two, &spec).unwrap();
        assert_eq!(cr.delta, rat(1, 2));
        // z + (floor(2z) - 2z)/2
        assert_eq!(cr.apply(&[rat(3, 4), rat(-1, 3)]), vec![rat(1, 2), rat(-1, 2)]);
        assert_eq!(conjugate_rounding(&linalg::identity(2), &spec).unwrap().apply(&[rat(3, 4), int(1)]), vec![int(0), int(1)]);
    }

    #[test]
    fn general_matches_oracle_on_swap() {
        let m = SparseMatrix::from_dense(&[vec![int(0), int(2)], vec![int(2), int(0)]]).unwrap();
        for y in [(4, 0), (0, 4), (4, 1), (8, 0), (16, 0)] {
            let sys = RationalSystem::new(m.clone(), vec![int(1), int(0)], vec![int(y.0), int(y.1)], RoundingSpec::argand(Floor, int(1))).unwrap();
            let v = decide_hyperbolic_general(&sys, None).unwrap();
            let oracle = brute_force_decide(&sys, None, &BigUint::from(64u32), &BruteForceOptions::default()).unwrap();
            assert_eq!(v.is_reached(), oracle.is_reached(), "target {y:?}");
        }
    }

    #[test]
    fn conjugation_tracks_original_orbit() {
        let m = SparseMatrix::from_dense(&[vec![int(1), int(2)], vec![int(2), int(1)]]).unwrap();
        let sys = RationalSystem::new(m, vec![int(2), int(-5)], vec![int(0), int(0)], RoundingSpec::argand(MinimalErrorUp, rat(1, 2))).unwrap();
        let (p, j, _) = linalg::jnf_rational(&sys.matrix.to_dense()).unwrap();
        let cs = ConjugatedSystem::new(&sys, &p, &j).unwrap();
        let (mut x, mut z) = (sys.initial.clone(), cs.initial.clone());
        for _ in 0..12 {
            assert_eq!(cs.to_original(&z), x);
            x = sys.step(&x);
            z = cs.step_state(&z).unwrap();
        }
    }

    #[test]
    fn general_rejects_bad_factorization() {
        let m = SparseMatrix::from_dense(&[vec![int(2), int(0)], vec![int(0), int(3)]]).unwrap();
        let sys = RationalSystem::new(m, vec![int(1), int(1)], vec![int(0), int(0)], RoundingSpec::argand(Floor, int(1))).unwrap();
        let bad = (linalg::identity(2), vec![vec![int(3), int(0)], vec![int(0), int(2)]]);
        assert!(matches!(decide_hyperbolic_general(&sys, Some(bad)), Err(Error::ValidationFailed(_))));
        let unit = SparseMatrix::from_dense(&[vec![int(1), int(0)], vec![int(0), int(3)]]).unwrap();
        let sys = RationalSystem::new(unit, vec![int(1), int(1)], vec![int(0), int(0)], RoundingSpec::argand(Floor, int(1))).unwrap();
        assert!(matches!(decide_hyperbolic_general(&sys, None), Err(Error::ModulusOneEigenvalue { .. })));
    }
}
