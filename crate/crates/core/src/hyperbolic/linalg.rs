//! Dense exact linear algebra over Q and Jordan forms of rational-spectrum matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::Rational;

pub type Mat = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Rational::zero(); c]; r]
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (r, k, c) = (a.len(), b.len(), b.first().map_or(0, |x| x.len()));
    let mut out = zeros(r, c);
    for i in 0..r {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..c {
                if !b[t][j].is_zero() {
                    out[i][j] += &a[i][t] * &b[t][j];
                }
            }
        }
    }
    out
}

pub fn mul_vec(a: &Mat, v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(Rational::zero(), |s, (x, y)| s + x * y))
        .collect()
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn scalar_shift(a: &Mat, lam: &Rational) -> Mat {
    let mut m = a.clone();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lam;
    }
    m
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Mat) -> usize {
    let mut t = m.clone();
    rref(&mut t).len()
}

/// Basis of the null space, as column vectors.
pub fn kernel(m: &Mat) -> Vec<Vec<Rational>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut t = m.clone();
    let piv = rref(&mut t);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &pc) in piv.iter().enumerate() {
                v[pc] = -t[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    let n = m.len();
    let mut aug: Mat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return Err(Error::SingularMatrix);
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose(m: &Mat) -> Mat {
    let c = m.first().map_or(0, |r| r.len());
    (0..c).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Largest absolute row sum.
pub fn max_abs_row_sum(m: &Mat) -> Rational {
    m.iter().map(|r| r.iter().fold(Rational::zero(), |s, x| s + x.abs())).max().unwrap_or_else(Rational::zero)
}

/// Characteristic polynomial coefficients `c_0..c_n` (monic, `c_n = 1`) via Faddeev-LeVerrier.
pub fn charpoly(m: &Mat) -> Vec<Rational> {
    let n = m.len();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut mk = zeros(n, n);
    for k in 1..=n {
        let mut t = mul(m, &mk);
        for (i, row) in t.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        mk = t;
        let am = mul(m, &mk);
        let tr = (0..n).fold(Rational::zero(), |s, i| s + &am[i][i]);
        c[n - k] = -tr / Rational::from_integer(BigInt::from(k));
    }
    c
}

fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Divide by `(x - r)`, assuming `r` is a root.
fn deflate(p: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = p.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (0..n).rev() {
        carry = &p[i + 1] + &carry * r;
        q[i] = carry.clone();
    }
    q
}

const DIVISOR_CAP: u64 = 1 << 40;

fn divisors(v: &BigInt) -> Result<Vec<BigInt>> {
    let v = v.abs();
    let n = v.to_u64().filter(|x| *x <= DIVISOR_CAP).ok_or_else(|| Error::TooLarge(format!("coefficient {v} for rational root search")))?;
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(BigInt::from(d));
            if d * d != n {
                large.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Ok(small)
}

/// Rational roots with multiplicities; errors if the polynomial does not split over Q.
pub fn rational_roots(poly: &[Rational]) -> Result<Vec<(Rational, usize)>> {
    let mut p = poly.to_vec();
    let n = p.len() - 1;
    let mut roots: Vec<(Rational, usize)> = Vec::new();
    let mut zero_mult = 0;
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rational::zero(), zero_mult));
    }
    if p.len() > 1 {
        let l = p.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()));
        let ints: Vec<BigInt> = p.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
        let a0 = ints[0].clone();
        let an = ints[ints.len() - 1].clone();
        let (pd, qd) = (divisors(&a0)?, divisors(&an)?);
        let mut cands: Vec<Rational> = Vec::new();
        for a in &pd {
            for b in &qd {
                for s in [1, -1] {
                    let r = Rational::new(a * s, b.clone());
                    if !cands.contains(&r) {
                        cands.push(r);
                    }
                }
            }
        }
        cands.sort();
        for r in cands {
            let mut m = 0;
            while p.len() > 1 && eval(&p, &r).is_zero() {
                p = deflate(&p, &r);
                m += 1;
            }
            if m > 0 {
                roots.push((r, m));
            }
        }
    }
    let total: usize = roots.iter().map(|r| r.1).sum();
    if total != n {
        return Err(Error::NonRationalSpectrum);
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(roots)
}

/// A Jordan block `(eigenvalue, size)` of a rational Jordan form.
pub type RationalBlock = (Rational, usize);

/// Exact `P`, `J` with `M = P J P^{-1}` for matrices whose spectrum is rational.
pub fn jnf_rational(m: &Mat) -> Result<(Mat, Mat, Vec<RationalBlock>)> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let roots = rational_roots(&charpoly(m))?;
    let mut columns: Vec<Vec<Rational>> = Vec::new();
    let mut blocks: Vec<RationalBlock> = Vec::new();
    for (lam, mult) in roots {
        let nmat = scalar_shift(m, &lam);
        // powers of N and their kernels up to the algebraic multiplicity
        let mut pows = vec![identity(n)];
        for k in 1..=mult {
            let next = mul(&pows[k - 1], &nmat);
            pows.push(next);
        }
        let ranks: Vec<usize> = pows.iter().map(rank).collect();
        let top = (1..=mult).find(|&k| ranks[k] == n - mult).ok_or(Error::NonRationalSpectrum)?;
        // at_least[s] = number of blocks of size >= s
        let at_least: Vec<usize> = (0..=top + 1).map(|s| if s == 0 || s > top { 0 } else { ranks[s - 1] - ranks[s] }).collect();
        let mut chains: Vec<(Vec<Rational>, usize)> = Vec::new();
        for s in (1..=top).rev() {
            let need = at_least[s] - at_least[s + 1];
            if need == 0 {
                continue;
            }
            let mut span: Vec<Vec<Rational>> = if s > 1 { kernel(&pows[s - 1]) } else { Vec::new() };
            for (v, len) in &chains {
                span.push(apply_pow(&nmat, v, len - s));
            }
            let mut base_rank = rank_of(&span);
            let mut taken = 0;
            for w in kernel(&pows[s]) {
                if taken == need {
                    break;
                }
                span.push(w.clone());
                let r = rank_of(&span);
                if r > base_rank {
                    base_rank = r;
                    chains.push((w, s));
                    taken += 1;
                } else {
                    span.pop();
                }
            }
            if taken != need {
                return Err(Error::InternalInvariant("Jordan chain construction failed".into()));
            }
        }
        chains.sort_by(|a, b| b.1.cmp(&a.1));
        for (v, len) in chains {
            for k in (0..len).rev() {
                columns.push(apply_pow(&nmat, &v, k));
            }
            blocks.push((lam.clone(), len));
        }
    }
    let p = transpose(&columns);
    let j = jordan_matrix(&blocks);
    validate_jnf(m, &p, &j)?;
    Ok((p, j, blocks))
}

fn apply_pow(nmat: &Mat, v: &[Rational], k: usize) -> Vec<Rational> {
    let mut out = v.to_vec();
    for _ in 0..k {
        out = mul_vec(nmat, &out);
    }
    out
}

fn rank_of(vectors: &[Vec<Rational>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(&vectors.to_vec())
}

/// The block-diagonal Jordan matrix for the given blocks.
pub fn jordan_matrix(blocks: &[RationalBlock]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.1).sum();
    let mut j = zeros(n, n);
    let mut o = 0;
    for (lam, s) in blocks {
        for k in 0..*s {
            j[o + k][o + k] = lam.clone();
            if k + 1 < *s {
                j[o + k][o + k + 1] = Rational::one();
            }
        }
        o += s;
    }
    j
}

/// Read Jordan blocks off a matrix; errors if it is not in Jordan form.
pub fn parse_jordan(j: &Mat) -> Result<Vec<RationalBlock>> {
    let n = j.len();
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..n {
        let closes = i + 1 == n || !j[i][i + 1].is_one();
        if !closes && j[i + 1][i + 1] != j[i][i] {
            return Err(Error::ValidationFailed("superdiagonal 1 between different eigenvalues".into()));
        }
        if closes {
            blocks.push((j[start][start].clone(), i + 1 - start));
            start = i + 1;
        }
    }
    let rebuilt = jordan_matrix(&blocks);
    if &rebuilt != j {
        return Err(Error::ValidationFailed("J is not in Jordan normal form".into()));
    }
    Ok(blocks)
}

/// Check `M P = P J` and that `P` is invertible.
pub fn validate_jnf(m: &Mat, p: &Mat, j: &Mat) -> Result<()> {
    let n = m.len();
    if p.len() != n || j.len() != n || p.iter().chain(j).any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("P and J must match M".into()));
    }
    if mul(m, p) != mul(p, j) {
        return Err(Error::ValidationFailed("M P != P J".into()));
    }
    if rank(p) < n {
        return Err(Error::ValidationFailed("P is singular".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    fn m(rows: &[&[i64]]) -> Mat {
        rows.iter().map(|r| r.iter().map(|v| int(*v)).collect()).collect()
    }

    #[test]
    fn jordan_block_is_fixed() {
        let a = m(&[&[2, 1], &[0, 2]]);
        let (p, j, blocks) = jnf_rational(&a).unwrap();
        assert_eq!(j, a);
        assert_eq!(blocks, vec![(int(2), 2)]);
        assert_eq!(mul(&a, &p), mul(&p, &j));
    }

    #[test]
    fn swap_matrix_diagonalizes() {
        let a = m(&[&[0, 2], &[2, 0]]);
        let (p, j, blocks) = jnf_rational(&a).unwrap();
        assert_eq!(blocks, vec![(int(-2), 1), (int(2), 1)]);
        // eigenvectors proportional to (1,-1) and (1,1)
        assert_eq!(&p[0][0] + &p[1][0], int(0));
        assert_eq!(&p[0][1] - &p[1][1], int(0));
        assert_eq!(mul(&a, &p), mul(&p, &j));
    }

    #[test]
    fn rotation_has_no_rational_spectrum() {
        assert_eq!(jnf_rational(&m(&[&[0, -1], &[1, 0]])).unwrap_err(), Error::NonRationalSpectrum);
    }

    #[test]
    fn mixed_blocks() {
        // similar to diag(J_2(3), 3, -1/2) under a non-trivial basis change
        let blocks = vec![(int(3), 2), (int(3), 1), (rat(-1, 2), 1)];
        let j = jordan_matrix(&blocks);
        let p = m(&[&[1, 2, 0, 1], &[0, 1, 1, 0], &[1, 0, 1, 0], &[0, 0, 1, 1]]);
        let a = mul(&mul(&p, &j), &inverse(&p).unwrap());
        let (p2, j2, b2) = jnf_rational(&a).unwrap();
        assert_eq!(b2, vec![(rat(-1, 2), 1), (int(3), 2), (int(3), 1)]);
        assert_eq!(mul(&a, &p2), mul(&p2, &j2));
    }

    #[test]
    fn inverse_and_row_sums() {
        let a = m(&[&[2, 0], &[0, 2]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, vec![vec![rat(1, 2), int(0)], vec![int(0), rat(1, 2)]]);
        assert_eq!(inverse(&m(&[&[1, 2], &[2, 4]])).unwrap_err(), Error::SingularMatrix);
        assert_eq!(max_abs_row_sum(&m(&[&[1, -2], &[0, 3]])), int(3));
    }

    #[test]
    fn charpoly_of_companion() {
        // x^2 - 5x + 6
        assert_eq!(charpoly(&m(&[&[0, -6], &[1, 5]])), vec![int(6), int(-5), int(1)]);
    }

    #[test]
    fn parse_jordan_rejects_non_jordan() {
        assert!(parse_jordan(&m(&[&[2, 1], &[0, 3]])).is_err());
        assert_eq!(parse_jordan(&m(&[&[2, 1], &[0, 2]])).unwrap(), vec![(int(2), 2)]);
    }
}
