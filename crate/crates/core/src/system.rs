//! Instances, orbit semantics, verdicts, and the brute-force oracle.

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{self, Angle, CycloNum, FieldCtx, Rational};
use crate::rounding::{round_complex, round_rational, GridPoint, RealRoundingKind, RoundingSpec, Shape};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JordanBlock {
    pub size: usize,
    pub modulus: Rational,
    pub angle: Angle,
}

impl JordanBlock {
    pub fn new(size: usize, modulus: Rational, angle: Angle) -> Self {
        JordanBlock { size, modulus, angle }
    }

    /// Whether the eigenvalue is a real rational (angle 0 or pi).
    pub fn real_eigenvalue(&self) -> Option<Rational> {
        if self.angle == Angle::zero() {
            Some(self.modulus.clone())
        } else if self.angle == Angle::new(1, 1) {
            Some(-self.modulus.clone())
        } else {
            None
        }
    }

    pub fn modulus_cmp_one(&self) -> std::cmp::Ordering {
        self.modulus.cmp(&Rational::one())
    }
}

/// An exact complex input value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactValue {
    Cartesian { re: Rational, im: Rational },
    Polar { modulus: Rational, angle: Angle },
}

impl ExactValue {
    pub fn real(v: Rational) -> Self {
        ExactValue::Cartesian { re: v, im: Rational::zero() }
    }

    fn angle(&self) -> Option<Angle> {
        match self {
            ExactValue::Polar { angle, .. } => Some(*angle),
            _ => None,
        }
    }

    pub fn to_cyclo(&self, ctx: &Arc<FieldCtx>) -> Result<CycloNum> {
        match self {
            ExactValue::Cartesian { re, im } => CycloNum::from_gaussian(ctx, re, im),
            ExactValue::Polar { modulus, angle } => CycloNum::embed_polar(modulus, angle, ctx),
        }
    }
}

/// Outcome of a reachability question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Reached { step: u64 },
    NotReached(Certificate),
}

impl Verdict {
    pub fn is_reached(&self) -> bool {
        matches!(self, Verdict::Reached { .. })
    }
}

/// The stopping rule that proved non-reachability. Dimensions are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    CycleDetected { step_bound: BigUint, at_step: u64 },
    EscapedRadius { dimension: usize, radius: Rational },
    DivergedPastTarget { dimension: usize },
    StabilizedMismatch { dimension: usize },
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self {
            Certificate::CycleDetected { .. } => "cycle-detected",
            Certificate::EscapedRadius { .. } => "escaped-radius",
            Certificate::DivergedPastTarget { .. } => "diverged-past-target",
            Certificate::StabilizedMismatch { .. } => "stabilized-mismatch",
        }
    }
}

/// A deterministic rounded dynamical system.
pub trait OrbitSystem {
    type State: Clone + Eq + Hash + Debug;
    fn dim(&self) -> usize;
    fn initial_state(&self) -> Self::State;
    fn target_state(&self) -> Self::State;
    fn step_state(&self, s: &Self::State) -> Result<Self::State>;
    /// Squared modulus of coordinate `k` (0-based).
    fn coord_modulus_sq(&self, s: &Self::State, k: usize) -> Rational;
}

/// Index shift of a rounded rotation by `angle` on the polar grid with `2r` directions:
/// the nearest multiple of `pi/r`, ties counterclockwise.
pub fn rotation_shift(angle: &Angle, r: u32) -> u32 {
    let (p, q) = (angle.p(), angle.q());
    (((2 * p * r as i64 + q).div_euclid(2 * q)) % (2 * r as i64)) as u32
}

/// A system given by Jordan blocks.
#[derive(Clone, Debug)]
pub struct JnfSystem {
    pub blocks: Vec<JordanBlock>,
    pub initial: Vec<GridPoint>,
    pub target: Vec<GridPoint>,
    pub spec: RoundingSpec,
    ctx: Arc<FieldCtx>,
    lambdas: Vec<CycloNum>,
}

impl JnfSystem {
    /// Build from exact inputs, rounding the initial and target vectors.
    pub fn new(blocks: Vec<JordanBlock>, initial: &[ExactValue], target: &[ExactValue], spec: RoundingSpec) -> Result<Self> {
        spec.validate()?;
        let angles: Vec<Angle> = blocks
            .iter()
            .map(|b| b.angle)
            .chain(initial.iter().chain(target).filter_map(|v| v.angle()))
            .collect();
        let ctx = numerics::ctx_for(&angles, spec.polar_r());
        let round = |v: &[ExactValue]| -> Result<Vec<GridPoint>> {
            v.iter().map(|e| round_complex(&e.to_cyclo(&ctx)?, &spec)).collect()
        };
        let (x, y) = (round(initial)?, round(target)?);
        Self::from_grid(blocks, x, y, spec)
    }

    /// Build from vectors that already lie on the grid.
    pub fn from_grid(blocks: Vec<JordanBlock>, initial: Vec<GridPoint>, target: Vec<GridPoint>, spec: RoundingSpec) -> Result<Self> {
        spec.validate()?;
        let d: usize = blocks.iter().map(|b| b.size).sum();
        if blocks.iter().any(|b| b.size == 0) {
            return Err(Error::ValidationFailed("empty Jordan block".into()));
        }
        if blocks.iter().any(|b| b.modulus.is_negative()) {
            return Err(Error::ValidationFailed("negative eigenvalue modulus".into()));
        }
        if initial.len() != d || target.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "blocks total {d}, initial {}, target {}",
                initial.len(),
                target.len()
            )));
        }
        if let Some(p) = initial.iter().chain(&target).find(|p| !p.on_grid(&spec)) {
            return Err(Error::ValidationFailed(format!("point {p} is not on the rounding grid")));
        }
        let angles: Vec<Angle> = blocks.iter().map(|b| b.angle).collect();
        let ctx = numerics::ctx_for(&angles, spec.polar_r());
        let lambdas = blocks
            .iter()
            .map(|b| CycloNum::embed_polar(&b.modulus, &b.angle, &ctx))
            .collect::<Result<Vec<_>>>()?;
        Ok(JnfSystem { blocks, initial, target, spec, ctx, lambdas })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    /// `(offset, size)` for every block.
    pub fn block_ranges(&self) -> Vec<(usize, usize)> {
        let mut o = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = (o, b.size);
                o += b.size;
                r
            })
            .collect()
    }

    /// Whether every value stays real: real eigenvalues, real Argand coordinates.
    pub fn is_real(&self) -> bool {
        matches!(self.spec.shape, Shape::Argand(_))
            && self.blocks.iter().all(|b| b.real_eigenvalue().is_some())
            && self
                .initial
                .iter()
                .chain(&self.target)
                .all(|p| matches!(p, GridPoint::Argand { im, .. } if im.is_zero()))
    }

    /// The unrounded update `lambda x_k + x_{k+1}` of coordinate `k` inside block `b`.
    pub fn pre_round(&self, s: &[GridPoint], b: usize, offset: usize, k: usize) -> Result<CycloNum> {
        let r = self.spec.polar_r();
        let size = self.blocks[b].size;
        let mut z = self.lambdas[b].mul(&s[offset + k].to_cyclo(&self.ctx, r)?);
        if k + 1 < size {
            z = z.add(&s[offset + k + 1].to_cyclo(&self.ctx, r)?);
        }
        Ok(z)
    }

    fn step_coord(&self, s: &[GridPoint], b: usize, offset: usize, k: usize) -> Result<GridPoint> {
        let block = &self.blocks[b];
        if let (Shape::Argand(kind), Some(lam)) = (&self.spec.shape, block.real_eigenvalue()) {
            if let GridPoint::Argand { re, im } = &s[offset + k] {
                let (mut nr, mut ni) = (&lam * re, &lam * im);
                if k + 1 < block.size {
                    if let GridPoint::Argand { re: r2, im: i2 } = &s[offset + k + 1] {
                        nr += r2;
                        ni += i2;
                    }
                }
                return Ok(GridPoint::Argand { re: round_rational(&nr, *kind, &self.spec.g), im: round_rational(&ni, *kind, &self.spec.g) });
            }
        }
        if let Shape::Polar { r, .. } = self.spec.shape {
            // an exact rotation of a grid point is already admissible when nothing is added
            let alone = k + 1 == block.size || s[offset + k + 1].is_zero();
            if alone && block.modulus.is_one() {
                return Ok(s[offset + k].rotate_polar(rotation_shift(&block.angle, r), r));
            }
        }
        round_complex(&self.pre_round(s, b, offset, k)?, &self.spec)
    }

    /// One synchronous update of all blocks.
    pub fn step(&self, s: &[GridPoint]) -> Result<Vec<GridPoint>> {
        let mut out = Vec::with_capacity(s.len());
        for (b, (o, size)) in self.block_ranges().into_iter().enumerate() {
            for k in 0..size {
                out.push(self.step_coord(s, b, o, k)?);
            }
        }
        Ok(out)
    }

    pub fn dimension(&self) -> usize {
        self.initial.len()
    }
}

impl OrbitSystem for JnfSystem {
    type State = Vec<GridPoint>;
    fn dim(&self) -> usize {
        self.initial.len()
    }
    fn initial_state(&self) -> Self::State {
        self.initial.clone()
    }
    fn target_state(&self) -> Self::State {
        self.target.clone()
    }
    fn step_state(&self, s: &Self::State) -> Result<Self::State> {
        self.step(s)
    }
    fn coord_modulus_sq(&self, s: &Self::State, k: usize) -> Rational {
        s[k].modulus_sq()
    }
}

/// Square rational matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    dim: usize,
    cols: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix { dim, cols: vec![Vec::new(); dim] }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Rational)>) -> Result<Self> {
        let mut m = Self::zeros(dim);
        for (i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch(format!("entry ({i},{j}) outside dimension {dim}")));
            }
            m.set(i, j, v);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        let col = &mut self.cols[j];
        match col.binary_search_by_key(&i, |e| e.0) {
            Ok(pos) => {
                if v.is_zero() {
                    col.remove(pos);
                } else {
                    col[pos].1 = v;
                }
            }
            Err(pos) => {
                if !v.is_zero() {
                    col.insert(pos, (i, v));
                }
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        match self.cols[j].binary_search_by_key(&i, |e| e.0) {
            Ok(pos) => self.cols[j][pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut d = vec![vec![Rational::zero(); self.dim]; self.dim];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, v) in col {
                d[*i][j] = v.clone();
            }
        }
        d
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> Vec<(usize, usize, Rational)> {
        let mut e: Vec<_> = self
            .cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (*i, j, v.clone())))
            .collect();
        e.sort_by_key(|a| (a.0, a.1));
        e
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim];
        for (j, xj) in x.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            for (i, v) in &self.cols[j] {
                out[*i] += v * xj;
            }
        }
        out
    }

    pub fn scale(&self, f: &Rational) -> Self {
        SparseMatrix {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|(i, v)| (*i, v * f)).filter(|e| !e.1.is_zero()).collect())
                .collect(),
        }
    }
}

/// A system `x -> [M x]` with a rational matrix and real Argand rounding.
#[derive(Clone, Debug)]
pub struct RationalSystem {
    pub matrix: SparseMatrix,
    pub initial: Vec<Rational>,
    pub target: Vec<Rational>,
    pub spec: RoundingSpec,
}

impl RationalSystem {
    pub fn new(matrix: SparseMatrix, initial: Vec<Rational>, target: Vec<Rational>, spec: RoundingSpec) -> Result<Self> {
        spec.validate()?;
        let kind = match spec.shape {
            Shape::Argand(k) => k,
            Shape::Polar { .. } => {
                return Err(Error::UnsupportedCombination("rational matrices use Argand rounding".into()))
            }
        };
        let d = matrix.dim();
        if initial.len() != d || target.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix {d}x{d}, initial {}, target {}",
                initial.len(),
                target.len()
            )));
        }
        let r = |v: Vec<Rational>| v.iter().map(|x| round_rational(x, kind, &spec.g)).collect();
        Ok(RationalSystem { matrix, initial: r(initial), target: r(target), spec })
    }

    pub fn kind(&self) -> RealRoundingKind {
        self.spec.kind()
    }

    pub fn step(&self, x: &[Rational]) -> Vec<Rational> {
        let kind = self.kind();
        self.matrix.mul_vec(x).iter().map(|v| round_rational(v, kind, &self.spec.g)).collect()
    }
}

impl OrbitSystem for RationalSystem {
    type State = Vec<Rational>;
    fn dim(&self) -> usize {
        self.matrix.dim()
    }
    fn initial_state(&self) -> Self::State {
        self.initial.clone()
    }
    fn target_state(&self) -> Self::State {
        self.target.clone()
    }
    fn step_state(&self, s: &Self::State) -> Result<Self::State> {
        Ok(self.step(s))
    }
    fn coord_modulus_sq(&self, s: &Self::State, k: usize) -> Rational {
        &s[k] * &s[k]
    }
}

/// A finite prefix of an orbit.
#[derive(Clone, Debug)]
pub struct Trace<S> {
    pub states: Vec<S>,
    /// First step at which the target was seen, if any.
    pub hit: Option<u64>,
}

/// Simulate up to `max_steps` updates, stopping early on the first target hit.
pub fn simulate<S: OrbitSystem>(sys: &S, max_steps: u64) -> Result<Trace<S::State>> {
    let target = sys.target_state();
    let mut cur = sys.initial_state();
    let mut states = vec![cur.clone()];
    if cur == target {
        return Ok(Trace { states, hit: Some(0) });
    }
    for i in 1..=max_steps {
        cur = sys.step_state(&cur)?;
        states.push(cur.clone());
        if cur == target {
            return Ok(Trace { states, hit: Some(i) });
        }
    }
    Ok(Trace { states, hit: None })
}

#[derive(Clone, Debug)]
pub struct BruteForceOptions {
    /// Visited states are stored until this many are held; afterwards only the counter is used.
    pub memory_states: usize,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions { memory_states: 4_000_000 }
    }
}

/// Simulate with caller-supplied bounds: stop on a hit, a repeat, an escape beyond
/// `ball_bound`, or once the step counter exceeds `step_bound`.
pub fn brute_force_decide<S: OrbitSystem>(
    sys: &S,
    ball_bound: Option<&Rational>,
    step_bound: &BigUint,
    opts: &BruteForceOptions,
) -> Result<Verdict> {
    let target = sys.target_state();
    let ball_sq = ball_bound.map(|b| b * b);
    let mut visited: HashSet<S::State> = HashSet::new();
    let mut store = true;
    let mut cur = sys.initial_state();
    let mut i: u64 = 0;
    loop {
        if cur == target {
            return Ok(Verdict::Reached { step: i });
        }
        if let Some(b2) = &ball_sq {
            for k in 0..sys.dim() {
                if sys.coord_modulus_sq(&cur, k) > *b2 {
                    return Ok(Verdict::NotReached(Certificate::EscapedRadius {
                        dimension: k + 1,
                        radius: ball_bound.unwrap().clone(),
                    }));
                }
            }
        }
        if store {
            if !visited.insert(cur.clone()) {
                return Ok(Verdict::NotReached(Certificate::CycleDetected { step_bound: step_bound.clone(), at_step: i }));
            }
            if visited.len() >= opts.memory_states {
                store = false;
                visited = HashSet::new();
            }
        }
        if BigUint::from(i) >= *step_bound {
            return Ok(Verdict::NotReached(Certificate::CycleDetected { step_bound: step_bound.clone(), at_step: i }));
        }
        cur = sys.step_state(&cur)?;
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};
    use RealRoundingKind::*;

    fn real_block(size: usize, lam: i64) -> JordanBlock {
        JordanBlock::new(size, int(lam.abs()), if lam < 0 { Angle::new(1, 1) } else { Angle::zero() })
    }

    fn reals(v: &[i64]) -> Vec<ExactValue> {
        v.iter().map(|x| ExactValue::real(int(*x))).collect()
    }

    #[test]
    fn permutation_step() {
        let m = SparseMatrix::from_dense(&[vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        let sys = RationalSystem::new(m, vec![int(1), int(3)], vec![int(0), int(0)], RoundingSpec::argand(Floor, int(1))).unwrap();
        assert_eq!(sys.step(&sys.initial), vec![int(3), int(1)]);
    }

    #[test]
    fn jnf_steps() {
        let sys = JnfSystem::new(vec![real_block(1, 2)], &reals(&[3]), &reals(&[0]), RoundingSpec::argand(Floor, int(1))).unwrap();
        assert_eq!(sys.step(&sys.initial).unwrap(), vec![GridPoint::real(int(6))]);
        let spec = RoundingSpec::polar(Floor, 2, int(1));
        let blk = JordanBlock::new(1, int(1), Angle::new(1, 2));
        let x = vec![GridPoint::Polar { modulus: int(4), index: 0 }];
        let sys = JnfSystem::from_grid(vec![blk], x.clone(), x, spec).unwrap();
        assert_eq!(sys.step(&sys.initial).unwrap(), vec![GridPoint::Polar { modulus: int(4), index: 1 }]);
    }

    #[test]
    fn simulate_contraction() {
        let blk = JordanBlock::new(1, rat(1, 2), Angle::zero());
        let sys = JnfSystem::new(vec![blk], &reals(&[7]), &reals(&[-1]), RoundingSpec::argand(Floor, int(1))).unwrap();
        let t = simulate(&sys, 5).unwrap();
        let vals: Vec<_> = t.states.iter().map(|s| s[0].clone()).collect();
        let expect: Vec<_> = [7, 3, 1, 0, 0, 0].iter().map(|v| GridPoint::real(int(*v))).collect();
        assert_eq!(vals, expect);
        assert_eq!(t.hit, None);
        assert_eq!(simulate(&sys, 0).unwrap().states.len(), 1);
    }

    #[test]
    fn brute_force_examples() {
        let spec = RoundingSpec::argand(Floor, int(1));
        let opts = BruteForceOptions::default();
        let big = BigUint::from(1000u32);
        let sys = JnfSystem::new(vec![real_block(1, 2)], &reals(&[3]), &reals(&[12]), spec.clone()).unwrap();
        assert_eq!(brute_force_decide(&sys, Some(&int(100)), &big, &opts).unwrap(), Verdict::Reached { step: 2 });
        let sys = JnfSystem::new(vec![real_block(1, 2)], &reals(&[3]), &reals(&[13]), spec.clone()).unwrap();
        assert!(matches!(
            brute_force_decide(&sys, Some(&int(100)), &big, &opts).unwrap(),
            Verdict::NotReached(Certificate::EscapedRadius { dimension: 1, .. })
        ));
        let sys = JnfSystem::new(vec![real_block(1, 2)], &reals(&[3]), &reals(&[3]), spec).unwrap();
        assert_eq!(brute_force_decide(&sys, None, &big, &opts).unwrap(), Verdict::Reached { step: 0 });
    }

    #[test]
    fn sparse_matrix_roundtrip() {
        let mut m = SparseMatrix::zeros(3);
        m.set(2, 0, rat(1, 2));
        m.set(0, 1, int(-3));
        m.set(0, 1, int(4));
        assert_eq!(m.entries(), vec![(0, 1, int(4)), (2, 0, rat(1, 2))]);
        assert_eq!(m.mul_vec(&[int(2), int(1), int(0)]), vec![int(4), int(0), int(1)]);
        m.set(0, 1, int(0));
        assert_eq!(m.nnz(), 1);
    }
}
