//! Exact integer linear algebra over `Z_p` (finite `p >= 2`) and over `Z`.
//!
//! Everything here works on arbitrary-precision integers. Finite moduli do
//! not need to be prime: solvability goes through the Smith normal form of
//! the system augmented with `p * I`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The coefficient ring `Z_p`, where `Infinite` stands for `Z` itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modulus {
    Finite(u64),
    Infinite,
}

impl Modulus {
    pub fn finite(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidModulus(p.to_string()));
        }
        Ok(Modulus::Finite(p))
    }

    pub fn value(&self) -> Option<u64> {
        match self {
            Modulus::Finite(p) => Some(*p),
            Modulus::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Modulus::Finite(_))
    }

    /// Canonical representative: `[0, p)` for finite `p`, unchanged over `Z`.
    pub fn reduce(&self, x: &BigInt) -> BigInt {
        match self {
            Modulus::Finite(p) => x.mod_floor(&BigInt::from(*p)),
            Modulus::Infinite => x.clone(),
        }
    }

    pub fn reduce_i64(&self, x: i64) -> i64 {
        match self {
            Modulus::Finite(p) => (x as i128).rem_euclid(*p as i128) as i64,
            Modulus::Infinite => x,
        }
    }

    /// `x ≡ 0` in `Z_p`.
    pub fn is_zero_i64(&self, x: i64) -> bool {
        self.reduce_i64(x) == 0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Finite(p) => write!(f, "{p}"),
            Modulus::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Modulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Modulus::Infinite);
        }
        let p: u64 = t.parse().map_err(|_| Error::InvalidModulus(s.to_string()))?;
        Modulus::finite(p)
    }
}

impl Serialize for Modulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Modulus::Finite(p) => s.serialize_u64(*p),
            Modulus::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Modulus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Modulus::finite(p),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

pub type IntVector = Vec<BigInt>;

pub fn int_vector(entries: &[i64]) -> IntVector {
    entries.iter().map(|&x| BigInt::from(x)).collect()
}

/// Dense `rows × cols` integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    /// An empty slice gives the `0 × 0` matrix.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_big_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
            cols,
        )
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<Self> {
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(IntMatrix {
            rows: n_rows,
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column indices with a nonzero entry in row `i`.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| !self.get(i, j).is_zero()).collect()
    }

    /// Entries as machine integers, if they all fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Result<IntVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = v / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        Ok(sign * &m[n - 1][n - 1])
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * factor;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * factor;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let idx = r * self.cols + j;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Extended gcd: `g = gcd(|a|, |b|) >= 0` and `s*a + t*b = g`.
pub fn egcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if a.is_zero() && b.is_zero() {
        return (BigInt::zero(), BigInt::zero(), BigInt::zero());
    }
    let (mut old_r, mut r) = (a.abs(), b.abs());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if a.is_negative() {
        old_s = -old_s;
    }
    if b.is_negative() {
        old_t = -old_t;
    }
    (old_r, old_s, old_t)
}

/// `U * A * V = D` with `U`, `V` unimodular and `D` diagonal, `d_1 | d_2 | ...`, `d_i >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries `d_1, ..., d_min(m,n)`.
    pub fn invariants(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            // Pivot on the nonzero entry of least absolute value.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if pivot.map_or(true, |(pi, pj)| x.abs() < d.get(pi, pj).abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return finish(u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..m {
                let q = d.get(i, t) / &p;
                if !q.is_zero() {
                    let f = -q;
                    d.add_row_multiple(i, t, &f);
                    u.add_row_multiple(i, t, &f);
                }
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..n {
                let q = d.get(t, j) / &p;
                if !q.is_zero() {
                    let f = -q;
                    d.add_col_multiple(j, t, &f);
                    v.add_col_multiple(j, t, &f);
                }
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            // Divisibility chain: pull an offending row into the pivot row.
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d.get(i, j).is_multiple_of(&p)));
            if let Some(i) = offender {
                let one = BigInt::one();
                d.add_row_multiple(t, i, &one);
                u.add_row_multiple(t, i, &one);
                continue;
            }
            break;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    finish(u, d, v)
}

fn finish(mut u: IntMatrix, mut d: IntMatrix, v: IntMatrix) -> SmithForm {
    for t in 0..d.rows.min(d.cols) {
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d, v }
}

/// Integer solution of `A x = b`, or `None`.
pub fn solve_integer(a: &IntMatrix, b: &[BigInt]) -> Result<Option<IntVector>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows
        )));
    }
    let snf = smith_normal_form(a);
    let c = snf.u.mul_vec(b)?;
    let r = a.rows.min(a.cols);
    let mut y = vec![BigInt::zero(); a.cols];
    for (i, ci) in c.iter().enumerate() {
        if i < r {
            let di = snf.d.get(i, i);
            if di.is_zero() {
                if !ci.is_zero() {
                    return Ok(None);
                }
            } else {
                if !ci.is_multiple_of(di) {
                    return Ok(None);
                }
                y[i] = ci / di;
            }
        } else if !ci.is_zero() {
            return Ok(None);
        }
    }
    Ok(Some(snf.v.mul_vec(&y)?))
}

/// Solves `A x ≡ b (mod p)`; entries of the returned solution lie in `[0, p)`.
pub fn solve_mod(a: &IntMatrix, b: &[BigInt], p: Modulus) -> Result<Option<IntVector>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows
        )));
    }
    match p {
        Modulus::Infinite => solve_integer(a, b),
        Modulus::Finite(q) => {
            let (m, n) = (a.rows, a.cols);
            let mut aug = IntMatrix::zeros(m, n + m);
            for i in 0..m {
                for j in 0..n {
                    aug.set(i, j, a.get(i, j).clone());
                }
                aug.set(i, n + i, BigInt::from(q));
            }
            Ok(solve_integer(&aug, b)?.map(|x| x[..n].iter().map(|xi| p.reduce(xi)).collect()))
        }
    }
}

/// Finds `λ` with `λ * gen ≡ target (mod p)` coordinate-wise.
///
/// For finite `p` the answer is the least such `λ` in `[0, p)`; over `Z` it is
/// the unique integer (or `0` when `gen` vanishes).
pub fn cyclic_membership(gen: &[BigInt], target: &[BigInt], p: Modulus) -> Result<Option<BigInt>> {
    if gen.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "generator of length {} against target of length {}",
            gen.len(),
            target.len()
        )));
    }
    match p {
        Modulus::Infinite => {
            let mut lambda: Option<BigInt> = None;
            for (g, t) in gen.iter().zip(target) {
                if g.is_zero() {
                    if !t.is_zero() {
                        return Ok(None);
                    }
                    continue;
                }
                if !t.is_multiple_of(g) {
                    return Ok(None);
                }
                let l = t / g;
                match &lambda {
                    Some(prev) if *prev != l => return Ok(None),
                    _ => lambda = Some(l),
                }
            }
            Ok(Some(lambda.unwrap_or_else(BigInt::zero)))
        }
        Modulus::Finite(q) => {
            let q = BigInt::from(q);
            // Running congruence λ ≡ r (mod modulus).
            let mut r = BigInt::zero();
            let mut modulus = BigInt::one();
            for (g, t) in gen.iter().zip(target) {
                let g = g.mod_floor(&q);
                let t = t.mod_floor(&q);
                let (d, _, _) = egcd(&g, &q);
                let d = if d.is_zero() { q.clone() } else { d };
                if !t.is_multiple_of(&d) {
                    return Ok(None);
                }
                let m_i = &q / &d;
                let r_i = if m_i.is_one() {
                    BigInt::zero()
                } else {
                    let (_, inv, _) = egcd(&(&g / &d), &m_i);
                    ((&t / &d) * inv).mod_floor(&m_i)
                };
                match crt_pair(&r, &modulus, &r_i, &m_i) {
                    Some((nr, nm)) => {
                        r = nr;
                        modulus = nm;
                    }
                    None => return Ok(None),
                }
            }
            Ok(Some(r))
        }
    }
}

/// Combines `x ≡ r1 (mod m1)` and `x ≡ r2 (mod m2)` for arbitrary moduli.
fn crt_pair(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    let (g, s, _) = egcd(m1, m2);
    let diff = r2 - r1;
    if !diff.is_multiple_of(&g) {
        return None;
    }
    let lcm = m1 / &g * m2;
    let step = (&diff / &g * s).mod_floor(&(m2 / &g));
    Some(((r1 + m1 * step).mod_floor(&lcm), lcm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn egcd_examples() {
        assert_eq!(egcd(&big(21), &big(15)), (big(3), big(-2), big(3)));
        assert_eq!(egcd(&big(0), &big(0)), (big(0), big(0), big(0)));
        assert_eq!(egcd(&big(1), &big(0)), (big(1), big(1), big(0)));
        let (g, s, t) = egcd(&big(-12), &big(18));
        assert_eq!(g, big(6));
        assert_eq!(s * big(-12) + t * big(18), big(6));
    }

    fn check_snf(a: &IntMatrix) -> SmithForm {
        let snf = smith_normal_form(a);
        let prod = snf.u.checked_mul(a).unwrap().checked_mul(&snf.v).unwrap();
        assert_eq!(prod, snf.d);
        assert_eq!(snf.u.determinant().unwrap().abs(), big(1));
        assert_eq!(snf.v.determinant().unwrap().abs(), big(1));
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if i != j {
                    assert!(snf.d.get(i, j).is_zero());
                }
            }
        }
        let inv = snf.invariants();
        for w in inv.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        snf
    }

    #[test]
    fn snf_examples() {
        let snf = check_snf(&mat(&[&[2, 4], &[6, 8]]));
        assert_eq!(snf.invariants(), vec![big(2), big(4)]);

        let z = IntMatrix::zeros(2, 3);
        let snf = check_snf(&z);
        assert_eq!(snf.d, z);
        assert_eq!(snf.u, IntMatrix::identity(2));
        assert_eq!(snf.v, IntMatrix::identity(3));

        let id = IntMatrix::identity(3);
        assert_eq!(check_snf(&id).d, id);
    }

    #[test]
    fn snf_needs_divisibility_fix() {
        let snf = check_snf(&mat(&[&[2, 0], &[0, 3]]));
        assert_eq!(snf.invariants(), vec![big(1), big(6)]);
        let snf = check_snf(&mat(&[&[4, 0, 0], &[0, 6, 0], &[0, 0, 10]]));
        assert_eq!(snf.invariants(), vec![big(2), big(2), big(60)]);
    }

    #[test]
    fn solve_mod_examples() {
        let a = mat(&[&[1, 1], &[1, -1]]);
        let b = int_vector(&[1, 0]);
        assert_eq!(solve_mod(&a, &b, Modulus::Finite(2)).unwrap(), None);
        assert_eq!(solve_mod(&a, &b, Modulus::Finite(3)).unwrap(), Some(int_vector(&[2, 2])));
        // Over Z: x+y=1, x-y=0 has no integer solution.
        assert_eq!(solve_mod(&a, &b, Modulus::Infinite).unwrap(), None);
        assert!(matches!(
            solve_mod(&a, &int_vector(&[1]), Modulus::Finite(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cyclic_membership_examples() {
        let gen = int_vector(&[2, 2, 1, 1, -1]);
        let target = int_vector(&[0, 0, 2, 2, -2]);
        assert_eq!(cyclic_membership(&gen, &target, Modulus::Finite(4)).unwrap(), Some(big(2)));
        assert_eq!(
            cyclic_membership(&gen, &int_vector(&[0; 5]), Modulus::Finite(4)).unwrap(),
            Some(big(0))
        );
        assert_eq!(
            cyclic_membership(&int_vector(&[1, -1]), &int_vector(&[0, -1]), Modulus::Finite(5)).unwrap(),
            None
        );
        assert_eq!(
            cyclic_membership(&int_vector(&[3, -6]), &int_vector(&[-9, 18]), Modulus::Infinite).unwrap(),
            Some(big(-3))
        );
        assert_eq!(
            cyclic_membership(&int_vector(&[0, 2]), &int_vector(&[1, 2]), Modulus::Infinite).unwrap(),
            None
        );
    }

    #[test]
    fn modulus_parsing() {
        assert_eq!("inf".parse::<Modulus>().unwrap(), Modulus::Infinite);
        assert_eq!("7".parse::<Modulus>().unwrap(), Modulus::Finite(7));
        assert!("1".parse::<Modulus>().is_err());
        assert!("x".parse::<Modulus>().is_err());
        let v: Modulus = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(v, Modulus::Infinite);
        let v: Modulus = serde_json::from_str("6").unwrap();
        assert_eq!(v, Modulus::Finite(6));
        assert!(serde_json::from_str::<Modulus>("0").is_err());
    }
}
