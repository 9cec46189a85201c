//! Lowering quantified formulas to straight-line rounded programs and to a single matrix.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{Expr, QbfFormula, Quantifier};
use crate::error::{Error, Result};
use crate::numerics::{rat, Rational};
use crate::rounding::{round_rational, RealRoundingKind, RoundingSpec};
use crate::system::{RationalSystem, SparseMatrix};

/// Which rounding function the gadgets are written for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Floor,
    Ceil,
    MinimalError,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Floor, Family::Ceil, Family::MinimalError];

    pub fn kind(self) -> RealRoundingKind {
        match self {
            Family::Floor => RealRoundingKind::Floor,
            Family::Ceil => RealRoundingKind::Ceil,
            Family::MinimalError => RealRoundingKind::MinimalErrorUp,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Floor => "floor",
            Family::Ceil => "ceil",
            Family::MinimalError => "minerr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "floor" => Ok(Family::Floor),
            "ceil" => Ok(Family::Ceil),
            "minerr" | "minimal-error" | "minimalerror" => Ok(Family::MinimalError),
            other => Err(Error::Parse(format!("unknown gadget family '{other}'"))),
        }
    }

    /// (bias, divisor) of the OR and AND rows: `round((bias + a + b) / divisor)`.
    fn or_and(self) -> ((i64, i64), (i64, i64)) {
        match self {
            Family::Floor => ((1, 2), (1, 3)),
            Family::Ceil => ((0, 2), (-1, 2)),
            Family::MinimalError => ((1, 3), (0, 3)),
        }
    }
}

/// An operand: a slot, its negation, or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lit {
    Var(usize),
    Neg(usize),
    True,
    False,
}

impl Lit {
    fn negate(self) -> Lit {
        match self {
            Lit::Var(i) => Lit::Neg(i),
            Lit::Neg(i) => Lit::Var(i),
            Lit::True => Lit::False,
            Lit::False => Lit::True,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    And,
    Or,
    Not,
    Copy,
    Zero,
}

impl Gate {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Gate::And => a && b,
            Gate::Or => a || b,
            Gate::Not => !a,
            Gate::Copy => a,
            Gate::Zero => false,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Gate::And | Gate::Or => 2,
            Gate::Not | Gate::Copy => 1,
            Gate::Zero => 0,
        }
    }
}

/// A linear form over the state; the slot `const_slot` always holds 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Row {
    pub terms: BTreeMap<usize, Rational>,
}

impl Row {
    fn add(&mut self, col: usize, v: Rational) {
        let e = self.terms.entry(col).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            self.terms.remove(&col);
        }
    }

    fn add_lit(&mut self, l: Lit, const_slot: usize) {
        match l {
            Lit::Var(i) => self.add(i, Rational::one()),
            Lit::Neg(i) => {
                self.add(const_slot, Rational::one());
                self.add(i, -Rational::one());
            }
            Lit::True => self.add(const_slot, Rational::one()),
            Lit::False => {}
        }
    }

    fn scaled(mut self, f: &Rational) -> Row {
        for v in self.terms.values_mut() {
            *v *= f;
        }
        self
    }

    pub fn eval(&self, state: &[Rational]) -> Rational {
        self.terms.iter().map(|(c, v)| v * &state[*c]).sum()
    }
}

/// The affine row computing `gate(a, b)` under `family` rounding.
pub fn gadget_row(gate: Gate, a: Lit, b: Lit, family: Family, const_slot: usize) -> Row {
    let mut row = Row::default();
    let ((ob, od), (ab, ad)) = family.or_and();
    match gate {
        Gate::Or | Gate::And => {
            let (bias, div) = if gate == Gate::Or { (ob, od) } else { (ab, ad) };
            row.add(const_slot, rat(bias, 1));
            row.add_lit(a, const_slot);
            row.add_lit(b, const_slot);
            row = row.scaled(&rat(1, div));
        }
        Gate::Not => row.add_lit(a.negate(), const_slot),
        Gate::Copy => row.add_lit(a, const_slot),
        Gate::Zero => {}
    }
    row
}

/// Check every boolean input combination of `gate` under `family`, with entries scaled by `factor`.
pub fn gadget_table_holds(gate: Gate, family: Family, factor: &Rational) -> bool {
    // slots: 0 = a, 1 = b, 2 = constant
    let row = gadget_row(gate, Lit::Var(0), Lit::Var(1), family, 2).scaled(factor);
    (0..4).all(|m| {
        let (a, b) = (m & 1 == 1, m & 2 == 2);
        let state = [bool_rat(a), bool_rat(b), Rational::one()];
        let out = round_rational(&row.eval(&state), family.kind(), &Rational::one());
        out == bool_rat(gate.apply(a, b))
    })
}

fn bool_rat(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

/// One step: every slot is overwritten simultaneously.
#[derive(Clone, Debug)]
pub struct Instruction {
    pub label: String,
    pub rows: Vec<Row>,
    /// Human-readable description of the slots this step changes.
    pub writes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub family: Family,
    pub names: Vec<String>,
    pub const_slot: usize,
    pub instructions: Vec<Instruction>,
    pub initial: Vec<bool>,
    pub n: usize,
    pub ell: usize,
}

impl Program {
    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn initial_state(&self) -> Vec<Rational> {
        self.initial.iter().map(|b| bool_rat(*b)).collect()
    }

    pub fn apply(&self, i: usize, state: &[Rational]) -> Vec<Rational> {
        let kind = self.family.kind();
        let one = Rational::one();
        self.instructions[i].rows.iter().map(|r| round_rational(&r.eval(state), kind, &one)).collect()
    }

    /// Run all instructions once.
    pub fn sweep(&self, state: &[Rational]) -> Vec<Rational> {
        (0..self.len()).fold(state.to_vec(), |s, i| self.apply(i, &s))
    }

    /// Per-step listing of the slots written.
    pub fn describe(&self) -> Vec<String> {
        self.instructions
            .iter()
            .enumerate()
            .map(|(i, ins)| format!("step {}: {} [{}]", i + 1, ins.label, ins.writes.join("; ")))
            .collect()
    }
}

struct Layout {
    n: usize,
    ell: usize,
}

impl Layout {
    fn x(&self, i: usize) -> usize {
        i - 1
    }
    fn psi(&self) -> usize {
        self.n
    }
    fn s(&self, z: usize, i: usize) -> usize {
        self.n + 1 + z * self.n + (i - 1)
    }
    fn c(&self, i: usize) -> usize {
        3 * self.n + 1 + (i - 1)
    }
    fn aux(&self, k: usize) -> usize {
        4 * self.n + 1 + k
    }
    fn sel(&self, k: usize) -> usize {
        4 * self.n + 1 + self.ell + k
    }
    fn carry(&self, k: usize) -> usize {
        4 * self.n + 5 + self.ell + k
    }
    fn fin(&self) -> usize {
        4 * self.n + 13 + self.ell
    }
    fn one(&self) -> usize {
        4 * self.n + 14 + self.ell
    }
    fn t(&self) -> usize {
        4 * self.n + 15 + self.ell
    }

    fn names(&self) -> Vec<String> {
        let mut v = Vec::with_capacity(self.t());
        v.extend((1..=self.n).map(|i| format!("x{i}")));
        v.push("psi".into());
        for z in 0..2 {
            v.extend((1..=self.n).map(|i| format!("s{z}_{i}")));
        }
        v.extend((1..=self.n).map(|i| format!("c{i}")));
        v.extend((1..=self.ell).map(|k| format!("aux{k}")));
        v.extend((1..=4).map(|k| format!("sel{k}")));
        v.extend((1..=8).map(|k| format!("carry{k}")));
        v.push("fin".into());
        v.push("one".into());
        v
    }
}

struct StepBuilder<'a> {
    family: Family,
    names: &'a [String],
    one: usize,
    rows: BTreeMap<usize, Row>,
    writes: Vec<String>,
}

impl<'a> StepBuilder<'a> {
    fn new(family: Family, names: &'a [String], one: usize) -> Self {
        StepBuilder { family, names, one, rows: BTreeMap::new(), writes: Vec::new() }
    }

    fn lit_name(&self, l: Lit) -> String {
        match l {
            Lit::Var(i) => self.names[i].clone(),
            Lit::Neg(i) => format!("!{}", self.names[i]),
            Lit::True => "1".into(),
            Lit::False => "0".into(),
        }
    }

    fn set(&mut self, dst: usize, gate: Gate, a: Lit, b: Lit) {
        let desc = match gate {
            Gate::And => format!("{} & {}", self.lit_name(a), self.lit_name(b)),
            Gate::Or => format!("{} | {}", self.lit_name(a), self.lit_name(b)),
            Gate::Not => format!("!{}", self.lit_name(a)),
            Gate::Copy => self.lit_name(a),
            Gate::Zero => "0".into(),
        };
        self.writes.push(format!("{} <- {desc}", self.names[dst]));
        let prev = self.rows.insert(dst, gadget_row(gate, a, b, self.family, self.one));
        debug_assert!(prev.is_none(), "slot written twice in one step");
    }

    fn finish(self, label: impl Into<String>) -> Instruction {
        let mut rows = Vec::with_capacity(self.names.len());
        let mut own = self.rows;
        for i in 0..self.names.len() {
            rows.push(own.remove(&i).unwrap_or_else(|| gadget_row(Gate::Copy, Lit::Var(i), Lit::False, self.family, self.one)));
        }
        Instruction { label: label.into(), rows, writes: self.writes }
    }
}

/// Compile a canonical formula (prefix `forall, exists, ...`, ending `exists`) into a program
/// whose run reaches the all-ones state exactly when the formula is true.
pub fn lower_qbf_to_program(phi: &QbfFormula, family: Family) -> Result<Program> {
    if !phi.is_canonical() {
        return Err(Error::NonCanonicalPrefix);
    }
    let n = phi.n();
    let ell = phi.ell();
    let lay = Layout { n, ell };
    let names = lay.names();
    let one = lay.one();
    let mut ins = Vec::new();
    let new = || StepBuilder::new(family, &names, one);

    // evaluate the matrix bottom-up, one operation per step
    fn lower_expr<'a>(
        e: &Expr,
        root: bool,
        lay: &Layout,
        next_aux: &mut usize,
        out: &mut Vec<Instruction>,
        new: &dyn Fn() -> StepBuilder<'a>,
    ) -> Lit {
        let leaf = |e: &Expr| match e {
            Expr::Var(j) => Some(Lit::Var(lay.x(j + 1))),
            Expr::Const(true) => Some(Lit::True),
            Expr::Const(false) => Some(Lit::False),
            _ => None,
        };
        if let Some(l) = leaf(e) {
            return l;
        }
        let (gate, a, b) = match e {
            Expr::Not(a) => (Gate::Not, lower_expr(a, false, lay, next_aux, out, new), Lit::False),
            Expr::And(a, b) | Expr::Or(a, b) => {
                let la = lower_expr(a, false, lay, next_aux, out, new);
                let lb = lower_expr(b, false, lay, next_aux, out, new);
                (if matches!(e, Expr::And(..)) { Gate::And } else { Gate::Or }, la, lb)
            }
            _ => unreachable!(),
        };
        let dst = lay.aux(*next_aux);
        *next_aux += 1;
        let mut st = new();
        st.set(dst, gate, a, b);
        if root {
            st.set(lay.psi(), gate, a, b);
        }
        out.push(st.finish(format!("matrix node {}", *next_aux)));
        Lit::Var(dst)
    }
    let mut next_aux = 0;
    let psi = lower_expr(&phi.matrix, true, &lay, &mut next_aux, &mut ins, &new);
    let psi = if ell == 0 { psi } else { Lit::Var(lay.psi()) };

    // record psi in s^0_n or s^1_n according to x_n, then flip x_n
    let xn = lay.x(n);
    let mut st = new();
    st.set(lay.sel(0), Gate::Or, Lit::Var(xn), psi);
    st.set(lay.sel(1), Gate::Or, Lit::Neg(xn), Lit::Var(lay.s(0, n)));
    st.set(lay.sel(2), Gate::Or, Lit::Neg(xn), psi);
    st.set(lay.sel(3), Gate::Or, Lit::Var(xn), Lit::Var(lay.s(1, n)));
    ins.push(st.finish("select last bit (1/2)"));
    let mut st = new();
    st.set(lay.s(0, n), Gate::And, Lit::Var(lay.sel(0)), Lit::Var(lay.sel(1)));
    st.set(lay.s(1, n), Gate::And, Lit::Var(lay.sel(2)), Lit::Var(lay.sel(3)));
    st.set(xn, Gate::Not, Lit::Var(xn), Lit::False);
    st.set(lay.c(n), Gate::Copy, Lit::Var(xn), Lit::False);
    ins.push(st.finish("select last bit (2/2)"));

    // propagate the carry from bit i+1 into bit i, folding the quantifier of x_{i+1}
    for i in (1..n).rev() {
        let c = Lit::Var(lay.c(i + 1));
        let x = Lit::Var(lay.x(i));
        let q = if phi.prefix[i] == Quantifier::Forall { Gate::And } else { Gate::Or };
        let k = |j: usize| lay.carry(j);
        let mut st = new();
        st.set(k(0), Gate::And, c, x.negate());
        st.set(k(1), Gate::And, c, x);
        st.set(k(2), q, Lit::Var(lay.s(0, i + 1)), Lit::Var(lay.s(1, i + 1)));
        st.set(k(3), Gate::Or, c, x);
        st.set(k(4), Gate::Or, c.negate(), x.negate());
        st.set(lay.c(i), Gate::And, c, x);
        ins.push(st.finish(format!("carry into bit {i} (1/3)")));
        let mut st = new();
        st.set(k(5), Gate::Or, Lit::Neg(k(0)), Lit::Var(k(2)));
        st.set(k(6), Gate::Or, Lit::Var(k(0)), Lit::Var(lay.s(0, i)));
        st.set(k(7), Gate::Or, Lit::Neg(k(1)), Lit::Var(k(2)));
        st.set(k(3), Gate::Or, Lit::Var(k(1)), Lit::Var(lay.s(1, i)));
        st.set(lay.x(i), Gate::And, Lit::Var(k(3)), Lit::Var(k(4)));
        st.set(lay.c(i + 1), Gate::Zero, Lit::False, Lit::False);
        ins.push(st.finish(format!("carry into bit {i} (2/3)")));
        let mut st = new();
        st.set(lay.s(0, i), Gate::And, Lit::Var(k(5)), Lit::Var(k(6)));
        st.set(lay.s(1, i), Gate::And, Lit::Var(k(7)), Lit::Var(k(3)));
        ins.push(st.finish(format!("carry into bit {i} (3/3)")));
    }

    // x_1 is universal: the formula holds once both branches are recorded true
    let mut st = new();
    st.set(lay.fin(), Gate::And, Lit::Var(lay.s(0, 1)), Lit::Var(lay.s(1, 1)));
    ins.push(st.finish("test first bit"));
    let mut st = new();
    for v in 0..lay.t() {
        if v != one {
            st.set(v, Gate::Or, Lit::Var(lay.fin()), Lit::Var(v));
        }
    }
    ins.push(st.finish("saturate"));

    let mut initial = vec![false; lay.t()];
    initial[one] = true;
    Ok(Program { family, names, const_slot: one, instructions: ins, initial, n, ell })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardnessMeta {
    pub n: usize,
    pub ell: usize,
    /// Instruction count.
    pub m: usize,
    /// Variables per copy.
    pub t: usize,
    pub dimension: usize,
    pub family: Family,
    pub const_slot: usize,
    /// Scaling applied to every matrix entry, if any.
    pub factor: Option<Rational>,
}

impl HardnessMeta {
    /// `(3n+1+l)(4n+15+l)`.
    pub fn expected_dimension(n: usize, ell: usize) -> usize {
        (3 * n + 1 + ell) * (4 * n + 15 + ell)
    }
}

#[derive(Clone, Debug)]
pub struct HardnessInstance {
    pub system: RationalSystem,
    pub meta: HardnessMeta,
}

/// Place the instructions on the cyclic block subdiagonal: one matrix step runs one instruction.
pub fn explode_program_to_matrix(p: &Program) -> Result<HardnessInstance> {
    let m = p.len();
    let t = p.var_count();
    if m == 0 {
        return Err(Error::ValidationFailed("empty program".into()));
    }
    let dim = m * t;
    let mut entries = Vec::new();
    for (j, ins) in p.instructions.iter().enumerate() {
        let (ro, co) = (((j + 1) % m) * t, j * t);
        for (r, row) in ins.rows.iter().enumerate() {
            for (c, v) in &row.terms {
                entries.push((ro + r, co + c, v.clone()));
            }
        }
    }
    let matrix = SparseMatrix::from_entries(dim, entries)?;
    let mut initial = vec![Rational::zero(); dim];
    let mut target = vec![Rational::zero(); dim];
    for v in 0..t {
        initial[v] = bool_rat(p.initial[v]);
        target[v] = Rational::one();
    }
    let spec = RoundingSpec::argand(p.family.kind(), Rational::one());
    let system = RationalSystem::new(matrix, initial, target, spec)?;
    let meta = HardnessMeta {
        n: p.n,
        ell: p.ell,
        m,
        t,
        dimension: dim,
        family: p.family,
        const_slot: p.const_slot,
        factor: None,
    };
    Ok(HardnessInstance { system, meta })
}

/// Pad, lower and explode.
pub fn compile_qbf(phi: &QbfFormula, family: Family) -> Result<HardnessInstance> {
    let p = lower_qbf_to_program(&phi.padded(), family)?;
    explode_program_to_matrix(&p)
}

/// Scale every entry by `factor` after checking that no row changes its boolean behaviour.
pub fn perturb(inst: &HardnessInstance, factor: &Rational) -> Result<HardnessInstance> {
    let t = inst.meta.t;
    let kind = inst.system.kind();
    let one = Rational::one();
    let mut by_row: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for (r, c, v) in inst.system.matrix.entries() {
        by_row.entry(r).or_default().push((c, v));
    }
    for (r, terms) in &by_row {
        let inputs: Vec<usize> = terms.iter().map(|(c, _)| *c).filter(|c| c % t != inst.meta.const_slot).collect();
        if inputs.len() > 12 {
            return Err(Error::TooLarge(format!("row {r} has {} inputs", inputs.len())));
        }
        for mask in 0u32..(1 << inputs.len()) {
            let value: Rational = terms
                .iter()
                .map(|(c, v)| match inputs.iter().position(|i| i == c) {
                    Some(k) if mask >> k & 1 == 1 => v.clone(),
                    Some(_) => Rational::zero(),
                    None => v.clone(),
                })
                .sum();
            let plain = round_rational(&value, kind, &one);
            let scaled = round_rational(&(&value * factor), kind, &one);
            if plain != scaled {
                return Err(Error::GadgetBroken(format!(
                    "row {r} ({}): input mask {mask:b} gives {scaled} instead of {plain} after scaling by {factor}",
                    r % t
                )));
            }
        }
    }
    let system = RationalSystem::new(
        inst.system.matrix.scale(factor),
        inst.system.initial.clone(),
        inst.system.target.clone(),
        inst.system.spec.clone(),
    )?;
    let mut meta = inst.meta.clone();
    meta.factor = Some(match &meta.factor {
        Some(f) => f * factor,
        None => factor.clone(),
    });
    Ok(HardnessInstance { system, meta })
}

/// Exact fast stepping for matrices with small denominators and a unit grid.
pub struct IntegerStepper {
    rows: Vec<(i64, Vec<(usize, i64)>)>,
    kind: RealRoundingKind,
}

impl IntegerStepper {
    pub fn new(sys: &RationalSystem) -> Result<Self> {
        if !sys.spec.g.is_one() {
            return Err(Error::UnsupportedCombination("integer stepping needs grid 1".into()));
        }
        let d = sys.matrix.dim();
        let mut raw: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); d];
        for (r, c, v) in sys.matrix.entries() {
            raw[r].push((c, v));
        }
        let too_big = || Error::TooLarge("matrix entry exceeds 64-bit stepping".into());
        let mut rows = Vec::with_capacity(d);
        for terms in raw {
            let l = terms.iter().fold(num_bigint::BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
            let lv = l.to_i64().ok_or_else(too_big)?;
            let mut ints = Vec::with_capacity(terms.len());
            for (c, v) in terms {
                let k = (v.numer() * (&l / v.denom())).to_i64().ok_or_else(too_big)?;
                ints.push((c, k));
            }
            rows.push((lv, ints));
        }
        Ok(IntegerStepper { rows, kind: sys.kind() })
    }

    pub fn step(&self, x: &[i64]) -> Vec<i64> {
        self.rows
            .iter()
            .map(|(l, terms)| {
                let num: i64 = terms.iter().map(|(c, k)| k * x[*c]).sum();
                match self.kind {
                    RealRoundingKind::Floor => num.div_euclid(*l),
                    RealRoundingKind::Ceil => -(-num).div_euclid(*l),
                    RealRoundingKind::Truncate => num / l,
                    RealRoundingKind::Expand => {
                        if num < 0 {
                            num.div_euclid(*l)
                        } else {
                            -(-num).div_euclid(*l)
                        }
                    }
                    RealRoundingKind::MinimalErrorUp => (2 * num + l).div_euclid(2 * l),
                }
            })
            .collect()
    }
}

/// Convert an integral rational vector.
pub fn to_i64_vec(v: &[Rational]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            if !x.is_integer() {
                return Err(Error::ValidationFailed(format!("{x} is not an integer")));
            }
            x.to_integer().to_i64().ok_or_else(|| Error::TooLarge(format!("{x}")))
        })
        .collect()
}

/// Run `inst` for up to `steps` matrix steps; returns the first step at which the target appears.
pub fn first_hit(inst: &HardnessInstance, steps: u64) -> Result<Option<u64>> {
    let st = IntegerStepper::new(&inst.system)?;
    let target = to_i64_vec(&inst.system.target)?;
    let mut x = to_i64_vec(&inst.system.initial)?;
    for i in 0..=steps {
        if x == target {
            return Ok(Some(i));
        }
        if i < steps {
            x = st.step(&x);
        }
    }
    Ok(None)
}

/// Step bound within which a true formula must reach the target.
pub fn sweep_bound(meta: &HardnessMeta) -> u64 {
    ((1u64 << meta.n) + 1) * meta.m as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qbf::parse::parse_text;
    use crate::qbf::evaluate_qbf;

    #[test]
    fn gadget_examples() {
        let st = |a: i64, b: i64| [rat(a, 1), rat(b, 1), Rational::one()];
        let ev = |g, f: Family, a, b| {
            let r = gadget_row(g, Lit::Var(0), Lit::Var(1), f, 2);
            round_rational(&r.eval(&st(a, b)), f.kind(), &Rational::one())
        };
        let or: Vec<_> = [(0, 0), (0, 1), (1, 1)].iter().map(|&(a, b)| ev(Gate::Or, Family::Floor, a, b)).collect();
        assert_eq!(or, vec![rat(0, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(ev(Gate::And, Family::Floor, 1, 1), rat(1, 1));
        assert_eq!(ev(Gate::And, Family::Floor, 1, 0), rat(0, 1));
        assert_eq!(ev(Gate::Or, Family::MinimalError, 0, 0), rat(0, 1));
        let row = gadget_row(Gate::Or, Lit::Var(0), Lit::Var(1), Family::MinimalError, 2);
        assert_eq!(row.eval(&st(0, 0)), rat(1, 3));
    }

    #[test]
    fn every_gadget_table_is_exact() {
        for f in Family::ALL {
            for g in [Gate::And, Gate::Or, Gate::Not, Gate::Copy, Gate::Zero] {
                assert!(gadget_table_holds(g, f, &Rational::one()), "{g:?} {f:?}");
            }
        }
    }

    #[test]
    fn perturbed_tables() {
        for f in [Family::Floor, Family::MinimalError] {
            for g in [Gate::And, Gate::Or, Gate::Not, Gate::Copy, Gate::Zero] {
                assert!(gadget_table_holds(g, f, &rat(11, 10)), "{g:?} {f:?}");
            }
        }
        assert!(!gadget_table_holds(Gate::Or, Family::Floor, &rat(3, 1)));
        assert!(!gadget_table_holds(Gate::Copy, Family::Ceil, &rat(11, 10)));
    }

    fn program(s: &str, f: Family) -> Program {
        lower_qbf_to_program(&parse_text(s).unwrap().padded(), f).unwrap()
    }

    fn reaches_by_program(p: &Program, sweeps: usize) -> bool {
        let ones = vec![Rational::one(); p.var_count()];
        let mut s = p.initial_state();
        for _ in 0..sweeps {
            s = p.sweep(&s);
            assert!(s.iter().all(|v| v.is_zero() || v.is_one()));
            assert!(s[p.const_slot].is_one());
            if s == ones {
                return true;
            }
        }
        false
    }

    #[test]
    fn program_examples() {
        for f in Family::ALL {
            let p = program("forall x1 exists x2 : (x1 | x2)", f);
            assert_eq!(p.len(), 3 * 2 + 1 + 1);
            assert_eq!(p.var_count(), 4 * 2 + 15 + 1);
            assert!(reaches_by_program(&p, 5));
            let q = program("forall x1 exists x2 : (x1 & x2)", f);
            assert!(!reaches_by_program(&q, 8));
            let r = program("forall x1 exists x2 : true", f);
            assert!(reaches_by_program(&r, 5));
        }
    }

    #[test]
    fn non_canonical_rejected() {
        let f = parse_text("exists x1 forall x2 : x1").unwrap();
        assert!(matches!(lower_qbf_to_program(&f, Family::Floor), Err(Error::NonCanonicalPrefix)));
    }

    #[test]
    fn dimension_example() {
        let inst = compile_qbf(&parse_text("forall x1 exists x2 : (x1 | x2)").unwrap(), Family::Floor).unwrap();
        assert_eq!(inst.meta.dimension, 192);
        assert_eq!(HardnessMeta::expected_dimension(2, 1), 192);
    }

    #[test]
    fn matrix_matches_program_sweep() {
        let phi = parse_text("forall a exists b forall c exists d : (a | !b) & (c | d)").unwrap();
        let p = lower_qbf_to_program(&phi, Family::Floor).unwrap();
        let inst = explode_program_to_matrix(&p).unwrap();
        let t = p.var_count();
        let mut prog = p.initial_state();
        let mut mat = inst.system.initial.clone();
        let fast = IntegerStepper::new(&inst.system).unwrap();
        let mut fast_x = to_i64_vec(&mat).unwrap();
        for _ in 0..3 {
            prog = p.sweep(&prog);
            for _ in 0..p.len() {
                mat = inst.system.step(&mat);
                fast_x = fast.step(&fast_x);
            }
            assert_eq!(&mat[..t], &prog[..]);
            assert!(mat[t..].iter().all(|v| v.is_zero()));
            assert_eq!(to_i64_vec(&mat).unwrap(), fast_x);
        }
    }

    #[test]
    fn single_instruction_program_is_its_matrix() {
        let names = vec!["a".to_string(), "one".to_string()];
        let mut b = StepBuilder::new(Family::Floor, &names, 1);
        b.set(0, Gate::Not, Lit::Var(0), Lit::False);
        let p = Program {
            family: Family::Floor,
            names: names.clone(),
            const_slot: 1,
            instructions: vec![b.finish("flip")],
            initial: vec![false, true],
            n: 0,
            ell: 0,
        };
        let inst = explode_program_to_matrix(&p).unwrap();
        assert_eq!(inst.meta.dimension, 2);
        assert_eq!(inst.system.matrix.to_dense(), vec![vec![rat(-1, 1), rat(1, 1)], vec![rat(0, 1), rat(1, 1)]]);
    }

    #[test]
    fn perturbation_examples() {
        let phi = parse_text("forall x1 exists x2 : (x1 | x2)").unwrap();
        let inst = compile_qbf(&phi, Family::Floor).unwrap();
        let same = perturb(&inst, &Rational::one()).unwrap();
        assert_eq!(same.system.matrix.to_dense(), inst.system.matrix.to_dense());
        let p = perturb(&inst, &rat(11, 10)).unwrap();
        assert_eq!(first_hit(&p, 100).unwrap(), first_hit(&inst, 100).unwrap());
        assert!(matches!(perturb(&inst, &rat(3, 1)), Err(Error::GadgetBroken(_))));
        let ceil = compile_qbf(&phi, Family::Ceil).unwrap();
        assert!(matches!(perturb(&ceil, &rat(11, 10)), Err(Error::GadgetBroken(_))));
    }

    #[test]
    fn matrix_reachability_matches_truth() {
        let cases = [
            "forall x1 exists x2 : (x1 | x2)",
            "forall x1 exists x2 : (x1 & x2)",
            "forall x1 exists x2 : !x1 | x2 & x1",
            "forall x1 exists x2 : (x1 | !x2) & (!x1 | x2)",
            "forall x1 exists x2 forall x3 exists x4 : (x1 | x3) & x4",
            "forall x1 exists x2 forall x3 exists x4 : (x1 | !x2) & (x3 | !x4) & (x2 | x4)",
            "exists x1 : x1",
            "forall x1 : x1",
        ];
        for s in cases {
            let phi = parse_text(s).unwrap();
            let truth = evaluate_qbf(&phi).unwrap();
            for f in Family::ALL {
                let inst = compile_qbf(&phi, f).unwrap();
                let hit = first_hit(&inst, sweep_bound(&inst.meta)).unwrap();
                assert_eq!(hit.is_some(), truth, "{s} {f:?}");
                assert_eq!(inst.meta.dimension, HardnessMeta::expected_dimension(inst.meta.n, inst.meta.ell));
            }
        }
    }
}
