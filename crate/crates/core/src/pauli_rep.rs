//! Exact monomial operators (generalized Pauli words) and verification of
//! operator solutions.
//!
//! A monomial operator sends `|i>` to `w^phase[i] |perm[i]>` where `w` is a
//! primitive `q`-th root of unity. Everything is integer arithmetic mod `q`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::picture::{LinearSystem, SystemJson};
use crate::zmod_linalg::Modulus;

const MERMIN_PERES: &str = include_str!("../data/mermin_peres_square.json");

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialOperator {
    q: u64,
    perm: Vec<usize>,
    phase: Vec<u64>,
}

impl MonomialOperator {
    pub fn new(q: u64, perm: Vec<usize>, phase: Vec<i64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::OperatorMismatch("phase modulus q must be positive".into()));
        }
        if perm.len() != phase.len() || perm.is_empty() {
            return Err(Error::OperatorMismatch(format!(
                "perm has length {} but phase has length {}",
                perm.len(),
                phase.len()
            )));
        }
        let mut seen = vec![false; perm.len()];
        for &x in &perm {
            if x >= perm.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::OperatorMismatch(format!("{perm:?} is not a permutation")));
            }
        }
        let phase = phase.into_iter().map(|x| x.rem_euclid(q as i64) as u64).collect();
        Ok(MonomialOperator { q, perm, phase })
    }

    pub fn identity(dim: usize, q: u64) -> Self {
        Self::scalar(dim, q, 0)
    }

    /// `w_q^j` times the identity.
    pub fn scalar(dim: usize, q: u64, j: i64) -> Self {
        let j = j.rem_euclid(q as i64) as u64;
        MonomialOperator { q, perm: (0..dim).collect(), phase: vec![j; dim] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn phase(&self) -> &[u64] {
        &self.phase
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() || self.q != other.q {
            return Err(Error::OperatorMismatch(format!(
                "dim/q {}/{} vs {}/{}",
                self.dim(),
                self.q,
                other.dim(),
                other.q
            )));
        }
        Ok(())
    }

    /// `self * other` (apply `other` first).
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut phase = vec![0; n];
        for i in 0..n {
            let j = other.perm[i];
            perm[i] = self.perm[j];
            phase[i] = (other.phase[i] + self.phase[j]) % self.q;
        }
        Ok(MonomialOperator { q: self.q, perm, phase })
    }

    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let mut perm = vec![0; n];
        let mut phase = vec![0; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            phase[self.perm[i]] = (self.q - self.phase[i]) % self.q;
        }
        MonomialOperator { q: self.q, perm, phase }
    }

    /// Kronecker product; basis index `i1 * dim(other) + i2`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::OperatorMismatch(format!("q {} vs {}", self.q, other.q)));
        }
        let d2 = other.dim();
        let n = self.dim() * d2;
        let mut perm = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        for i1 in 0..self.dim() {
            for i2 in 0..d2 {
                perm.push(self.perm[i1] * d2 + other.perm[i2]);
                phase.push((self.phase[i1] + other.phase[i2]) % self.q);
            }
        }
        Ok(MonomialOperator { q: self.q, perm, phase })
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.dim(), self.q);
        let mut sq = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.multiply(&sq).expect("same shape");
            }
            sq = sq.multiply(&sq).expect("same shape");
            k >>= 1;
        }
        acc
    }

    /// `Some(j)` when `self = w_q^j * I`.
    pub fn is_scalar(&self) -> Option<u64> {
        let j = self.phase[0];
        let id = self.perm.iter().enumerate().all(|(i, &x)| i == x);
        (id && self.phase.iter().all(|&x| x == j)).then_some(j)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.multiply(other)? == other.multiply(self)?)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson { perm: self.perm.clone(), phase: self.phase.iter().map(|&x| x as i64).collect() }
    }
}

impl fmt::Display for MonomialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = (0..self.dim())
            .map(|i| format!("{i}->w^{}|{}>", self.phase[i], self.perm[i]))
            .collect();
        write!(f, "[{}] (q={})", terms.join(", "), self.q)
    }
}

/// Shift `X|i> = |i+1>` and clock `Z|i> = w_q^{(q/d) i} |i>`.
pub fn weyl_generators(d: usize, q: u64) -> Result<(MonomialOperator, MonomialOperator)> {
    if d < 2 || q % d as u64 != 0 {
        return Err(Error::OperatorMismatch(format!("need d >= 2 and d | q, got d={d}, q={q}")));
    }
    let step = q / d as u64;
    let x = MonomialOperator { q, perm: (0..d).map(|i| (i + 1) % d).collect(), phase: vec![0; d] };
    let z = MonomialOperator { q, perm: (0..d).collect(), phase: (0..d as u64).map(|i| i * step).collect() };
    Ok((x, z))
}

/// Phase modulus used for a given `p`: `p` when odd, `2p` when even.
pub fn default_q(p: u64) -> u64 {
    if p % 2 == 0 {
        2 * p
    } else {
        p
    }
}

/// One operator per variable of a finite-modulus system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorAssignment {
    system: LinearSystem,
    q: u64,
    ops: Vec<MonomialOperator>,
}

impl OperatorAssignment {
    pub fn new(system: LinearSystem, ops: Vec<MonomialOperator>) -> Result<Self> {
        let p = system
            .p()
            .value()
            .ok_or_else(|| Error::OperatorMismatch("operator solutions need a finite modulus".into()))?;
        if ops.len() != system.cols() {
            return Err(Error::OperatorMismatch(format!(
                "{} operators for {} variables",
                ops.len(),
                system.cols()
            )));
        }
        let Some(first) = ops.first() else {
            return Err(Error::OperatorMismatch("no variables".into()));
        };
        let q = first.q;
        if q % p != 0 {
            return Err(Error::OperatorMismatch(format!("p = {p} does not divide q = {q}")));
        }
        for op in &ops {
            first.check_compatible(op)?;
        }
        Ok(OperatorAssignment { system, q, ops })
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn ops(&self) -> &[MonomialOperator] {
        &self.ops
    }

    fn p(&self) -> u64 {
        self.system.p().value().expect("checked in new")
    }

    pub fn to_json(&self) -> Result<AssignmentJson> {
        Ok(AssignmentJson {
            dim: self.dim(),
            q: self.q,
            ops: self.ops.iter().enumerate().map(|(j, o)| (j.to_string(), o.to_json())).collect(),
            system: Some(self.system.to_json()?),
        })
    }

    /// `system` overrides the one embedded in the document, if any.
    pub fn from_json(j: &AssignmentJson, system: Option<LinearSystem>) -> Result<Self> {
        let system = match (system, &j.system) {
            (Some(s), _) => s,
            (None, Some(s)) => LinearSystem::from_json(s)?,
            (None, None) => return Err(Error::Format("assignment has no system".into())),
        };
        let mut ops = Vec::with_capacity(j.ops.len());
        for idx in 0..j.ops.len() {
            let o = j
                .ops
                .get(&idx.to_string())
                .ok_or_else(|| Error::Format(format!("ops must be keyed 0..{}; missing {idx}", j.ops.len())))?;
            let op = MonomialOperator::new(j.q, o.perm.clone(), o.phase.clone())?;
            if op.dim() != j.dim {
                return Err(Error::OperatorMismatch(format!("operator {idx} has dim {} != {}", op.dim(), j.dim)));
            }
            ops.push(op);
        }
        Self::new(system, ops)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub perm: Vec<usize>,
    pub phase: Vec<i64>,
}

/// `{"dim": D, "q": q, "ops": {"0": {"perm": [..], "phase": [..]}, ..}, "system"?: {..}}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentJson {
    pub dim: usize,
    pub q: u64,
    pub ops: BTreeMap<String, OperatorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum OperatorFailure {
    /// Two variables sharing a row do not commute.
    Commutation { row: usize, j: usize, k: usize },
    /// `X_j^p` is not the identity.
    Order { variable: usize },
    /// Row product is not `w_p^{b_i}`; `got` is its scalar exponent mod `q`, if scalar.
    RowProduct { row: usize, expected: u64, got: Option<u64> },
}

/// Evidence that an assignment satisfied every condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifiedSolution {
    system: SystemJson,
    dim: usize,
    q: u64,
    fingerprint: String,
}

impl VerifiedSolution {
    pub fn system(&self) -> Result<LinearSystem> {
        LinearSystem::from_json(&self.system)
    }

    pub fn p(&self) -> Modulus {
        self.system.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// SHA-256 of the assignment's JSON.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OperatorReport {
    pub failures: Vec<OperatorFailure>,
    pub solution: Option<VerifiedSolution>,
}

impl OperatorReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks commutation within rows first, then `X_j^p = I`, then each row
/// product `prod_j X_j^{A_ij}` (ascending `j`) against `w_p^{b_i}`.
pub fn verify_operator_solution(a: &OperatorAssignment) -> Result<OperatorReport> {
    let sys = &a.system;
    let (p, q) = (a.p(), a.q);
    let mut failures = Vec::new();

    let mut reported = std::collections::BTreeSet::new();
    for i in 0..sys.rows() {
        let support = sys.support(i);
        for (x, &j) in support.iter().enumerate() {
            for &k in &support[x + 1..] {
                if !a.ops[j].commutes_with(&a.ops[k])? && reported.insert((j, k)) {
                    failures.push(OperatorFailure::Commutation { row: i, j, k });
                }
            }
        }
    }
    for (j, op) in a.ops.iter().enumerate() {
        if op.pow(p as i64).is_scalar() != Some(0) {
            failures.push(OperatorFailure::Order { variable: j });
        }
    }
    let step = q / p;
    for i in 0..sys.rows() {
        let mut prod = MonomialOperator::identity(a.dim(), q);
        for j in sys.support(i) {
            let e = big_mod(sys.a().get(i, j), q);
            prod = prod.multiply(&a.ops[j].pow(e))?;
        }
        let expected = (big_mod(&sys.b()[i], p) as u64 * step) % q;
        let got = prod.is_scalar();
        if got != Some(expected) {
            failures.push(OperatorFailure::RowProduct { row: i, expected, got });
        }
    }

    let solution = if failures.is_empty() {
        let json = serde_json::to_string(&a.to_json()?)?;
        Some(VerifiedSolution {
            system: sys.to_json()?,
            dim: a.dim(),
            q,
            fingerprint: hex::encode(Sha256::digest(json.as_bytes())),
        })
    } else {
        None
    };
    Ok(OperatorReport { failures, solution })
}

fn big_mod(x: &num_bigint::BigInt, m: u64) -> i64 {
    let m = num_bigint::BigInt::from(m);
    let r = ((x % &m) + &m) % &m;
    r.to_i64().expect("reduced below a u64 modulus")
}

/// The two-qubit magic square on `I(K33)` (`b` = indicator of vertex `c`),
/// over `p = 2` with `q = 4`.
pub fn mermin_peres_square() -> Result<OperatorAssignment> {
    let j: AssignmentJson = serde_json::from_str(MERMIN_PERES)?;
    OperatorAssignment::from_json(&j, None)
}
