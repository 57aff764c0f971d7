//! Facts about the order of `J` in `Γ_p(A,b)` and the arithmetic that moves
//! them between moduli and right-hand sides.
//!
//! Orders live in the divisibility lattice on `N`, with `0` standing for an
//! infinite order (every `n` divides `0`, `gcd(n, 0) = n`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hypergraph::{theorem_hypothesis, Hypergraph, TheoremHypothesis};
use crate::pauli_rep::VerifiedSolution;
use crate::picture::{Certificate, LinearSystem};
use crate::zmod_linalg::{IntMatrix, Modulus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order(u64);

impl Order {
    pub const ONE: Order = Order(1);
    pub const INFINITE: Order = Order(0);

    pub fn finite(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("a finite order is at least 1".into()));
        }
        Ok(Order(n))
    }

    /// The order of `J` when it is as large as the relation `J^p = 1` allows.
    pub fn of_modulus(p: Modulus) -> Self {
        Order(p.value().unwrap_or(0))
    }

    pub fn value(self) -> Option<u64> {
        (self.0 != 0).then_some(self.0)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == 0
    }

    pub fn divides(self, other: Order) -> bool {
        other.0 == 0 || (self.0 != 0 && other.0 % self.0 == 0)
    }

    pub fn gcd(self, other: Order) -> Order {
        Order(self.0.gcd(&other.0))
    }

    /// `None` on overflow.
    pub fn lcm(self, other: Order) -> Option<Order> {
        if self.0 == 0 || other.0 == 0 {
            return Some(Order(0));
        }
        (self.0 / self.0.gcd(&other.0)).checked_mul(other.0).map(Order)
    }

    /// Multiplication in the lattice; overflow saturates to `0`, which only loses information.
    fn times(self, k: u64) -> Order {
        Order(self.0.checked_mul(k).unwrap_or(0))
    }

    /// `self / gcd(self, k)`, the order of `g^k` when `g` has order `self`.
    fn power_order(self, k: u64) -> Order {
        if self.0 == 0 {
            return if k == 0 { Order(1) } else { Order(0) };
        }
        Order(self.0 / self.0.gcd(&k))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "inf"),
            n => write!(f, "{n}"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            0 => s.serialize_str("inf"),
            n => s.serialize_u64(n),
        }
    }
}

/// `AtLeast(n)` means `n` divides `|J|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FactKind {
    Divides(Order),
    Exact(Order),
    AtLeast(Order),
}

impl fmt::Display for FactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactKind::Divides(n) => write!(f, "DIVIDES({n})"),
            FactKind::Exact(n) => write!(f, "EXACT({n})"),
            FactKind::AtLeast(n) => write!(f, "AT_LEAST({n})"),
        }
    }
}

/// `(b, p)` for a fixed `A`; `b = None` means the fact holds for every `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subject {
    pub b: Option<Vec<i64>>,
    pub p: Modulus,
}

impl Subject {
    pub fn new(b: Option<Vec<i64>>, p: Modulus) -> Self {
        Subject { b, p }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.b {
            Some(b) => write!(f, "Γ_{}(A, {:?})", self.p, b),
            None => write!(f, "Γ_{}(A, any b)", self.p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    Given,
    /// `J^p = 1` or `|J| >= 1`.
    Relation,
    PictureCertificate,
    MainTheorem,
    OperatorSolution,
    Homomorphism,
    Crt,
    UnitScale,
    MultipleLift,
    ZeroB,
    /// Connected incidence system with `|b| = 0` in `Z_p`.
    ZeroSum,
    ColouringTransfer,
    /// Meet or join of two bounds on the same subject.
    Combine,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Provenance {
    pub rule: Rule,
    pub detail: String,
    pub premises: Vec<OrderFact>,
}

impl Provenance {
    pub fn new(rule: Rule, detail: impl Into<String>, premises: Vec<OrderFact>) -> Self {
        Provenance { rule, detail: detail.into(), premises }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OrderFact {
    a: Vec<Vec<i64>>,
    subject: Subject,
    kind: FactKind,
    provenance: Provenance,
}

impl OrderFact {
    /// `DIVIDES(n)` is cut down to `DIVIDES(gcd(n, p))`; `EXACT(n)` and
    /// `AT_LEAST(n)` need `n | p`.
    pub fn new(a: Vec<Vec<i64>>, subject: Subject, kind: FactKind, provenance: Provenance) -> Result<Self> {
        if let Some(b) = &subject.b {
            if b.len() != a.len() {
                return Err(Error::DimensionMismatch(format!("A has {} rows but b has length {}", a.len(), b.len())));
            }
        }
        let p = Order::of_modulus(subject.p);
        let kind = match kind {
            FactKind::Divides(n) => FactKind::Divides(n.gcd(p)),
            FactKind::Exact(n) | FactKind::AtLeast(n) if !n.divides(p) => {
                return Err(Error::Inconsistent(format!("{kind} cannot hold when J^{} = 1", subject.p)));
            }
            k => k,
        };
        Ok(OrderFact { a, subject, kind, provenance })
    }

    pub fn a(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn subject(&self) -> &Subject {
        &self.subject
    }

    pub fn kind(&self) -> FactKind {
        self.kind
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Largest known divisor of `|J|`.
    pub fn lower(&self) -> Order {
        match self.kind {
            FactKind::Divides(_) => Order::ONE,
            FactKind::Exact(n) | FactKind::AtLeast(n) => n,
        }
    }

    /// Smallest known multiple of `|J|`.
    pub fn upper(&self) -> Order {
        match self.kind {
            FactKind::Divides(n) | FactKind::Exact(n) => n,
            FactKind::AtLeast(_) => Order::of_modulus(self.subject.p),
        }
    }

    /// `Some(n)` when the bounds pin `|J| = n`.
    pub fn exact(&self) -> Option<Order> {
        (self.lower() == self.upper()).then(|| self.lower())
    }

    /// Indented provenance tree, one line per fact.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        self.explain_into(0, &mut out);
        out
    }

    fn explain_into(&self, depth: usize, out: &mut String) {
        out.push_str(&format!(
            "{}{} for {} [{:?}: {}]\n",
            "  ".repeat(depth),
            self.kind,
            self.subject,
            self.provenance.rule,
            self.provenance.detail
        ));
        for p in &self.provenance.premises {
            p.explain_into(depth + 1, out);
        }
    }
}

fn i64_rows(a: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    a.to_i64_rows().ok_or_else(|| Error::Format("matrix entries do not fit in i64".into()))
}

fn i64_vec(b: &[num_bigint::BigInt]) -> Result<Vec<i64>> {
    b.iter()
        .map(|x| x.to_i64().ok_or_else(|| Error::Format("b does not fit in i64".into())))
        .collect()
}

fn system_parts(s: &LinearSystem) -> Result<(Vec<Vec<i64>>, Vec<i64>)> {
    Ok((i64_rows(s.a())?, i64_vec(s.b())?))
}

/// `DIVIDES(gcd(phase, p))`; with `p = inf` and phase `0` the fact is vacuous.
pub fn upper_from_picture(c: &Certificate) -> Result<OrderFact> {
    let (a, b) = system_parts(&c.system()?)?;
    let p = c.p();
    let n = Order(c.phase().unsigned_abs()).gcd(Order::of_modulus(p));
    OrderFact::new(
        a,
        Subject::new(Some(b), p),
        FactKind::Divides(n),
        Provenance::new(Rule::PictureCertificate, format!("picture sha256 {}", c.picture_hash()), vec![]),
    )
}

/// `EXACT(p)` for every `b` when `H(A)` qualifies.
pub fn exact_from_theorem(a: &IntMatrix, p: Modulus) -> Result<OrderFact> {
    let hyp = theorem_hypothesis(&Hypergraph::from_matrix(a));
    if hyp == TheoremHypothesis::No {
        return Err(Error::HypothesisNotMet(
            "H(A) has neither min degree >= 4 with girth >= 4 nor min degree >= 3 with girth >= 6".into(),
        ));
    }
    OrderFact::new(
        i64_rows(a)?,
        Subject::new(None, p),
        FactKind::Exact(Order::of_modulus(p)),
        Provenance::new(Rule::MainTheorem, format!("hypergraph check: {hyp:?}"), vec![]),
    )
}

pub fn lower_from_operator_solution(v: &VerifiedSolution) -> Result<OrderFact> {
    let (a, b) = system_parts(&v.system()?)?;
    let p = v.p();
    OrderFact::new(
        a,
        Subject::new(Some(b), p),
        FactKind::Exact(Order::of_modulus(p)),
        Provenance::new(
            Rule::OperatorSolution,
            format!("dim {} operator solution, fingerprint {}", v.dim(), v.fingerprint()),
            vec![],
        ),
    )
}

/// `Γ_p(A, αb) -> Γ_q(A, βb)`, `x ↦ x^λ`, `J ↦ J^δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    p: Modulus,
    q: Modulus,
    alpha: i64,
    beta: i64,
    lambda: i64,
    delta: i64,
}

impl Homomorphism {
    /// Needs `q | p·gcd(λ, δ)` and `δα = βλ` in `Z_q` (with `inf` read as `0`).
    pub fn new(p: Modulus, q: Modulus, alpha: i64, beta: i64, lambda: i64, delta: i64) -> Result<Self> {
        let g = Order(lambda.unsigned_abs().gcd(&delta.unsigned_abs()));
        let pg = match (Order::of_modulus(p).0).checked_mul(g.0) {
            Some(x) => Order(x),
            None => return Err(Error::Precondition("p·gcd(λ,δ) overflows".into())),
        };
        if !Order::of_modulus(q).divides(pg) {
            return Err(Error::Precondition(format!("q = {q} does not divide p·gcd(λ,δ) = {}", pg.0)));
        }
        let lhs = delta as i128 * alpha as i128;
        let rhs = beta as i128 * lambda as i128;
        let same = match q.value() {
            Some(q) => (lhs - rhs).rem_euclid(q as i128) == 0,
            None => lhs == rhs,
        };
        if !same {
            return Err(Error::Precondition(format!("δα = {lhs} and βλ = {rhs} differ in Z_{q}")));
        }
        Ok(Homomorphism { p, q, alpha, beta, lambda, delta })
    }

    fn describe(&self) -> String {
        format!(
            "Γ_{}(A,{}b) -> Γ_{}(A,{}b), x -> x^{}, J -> J^{}",
            self.p, self.alpha, self.q, self.beta, self.lambda, self.delta
        )
    }
}

fn scale(b: &Option<Vec<i64>>, t: i64) -> Result<Option<Vec<i64>>> {
    b.as_ref()
        .map(|b| {
            b.iter()
                .map(|&x| x.checked_mul(t).ok_or_else(|| Error::Precondition("scaled b overflows".into())))
                .collect()
        })
        .transpose()
}

/// Which `b` a derived fact is about, given the side's multiplier.
fn check_side(known: &OrderFact, b: Option<&[i64]>, mult: i64, p: Modulus, side: &str) -> Result<Option<Vec<i64>>> {
    if known.subject.p != p {
        return Err(Error::Precondition(format!("{side} fact is about p = {}, expected {p}", known.subject.p)));
    }
    let b = b.map(|b| b.to_vec());
    match (&known.subject.b, &b) {
        (None, _) => Ok(b),
        (Some(kb), Some(_)) if *kb == scale(&b, mult)?.expect("some") => Ok(b),
        (Some(_), _) => Err(Error::Precondition(format!("{side} fact is not about {mult}·b"))),
    }
}

/// Upper bound on the target: `|J_q|` divides `gcd(q, n·δ)` when `|J_p|` divides `n`.
pub fn hom_transfer(h: &Homomorphism, b: Option<&[i64]>, known: &OrderFact) -> Result<OrderFact> {
    let b = check_side(known, b, h.alpha, h.p, "source")?;
    let n = known.upper().times(h.delta.unsigned_abs());
    OrderFact::new(
        known.a.clone(),
        Subject::new(scale(&b, h.beta)?, h.q),
        FactKind::Divides(n),
        Provenance::new(Rule::Homomorphism, h.describe(), vec![known.clone()]),
    )
}

/// Lower bound on the source: the image `J_q^δ` has order dividing `|J_p|`.
pub fn hom_pullback(h: &Homomorphism, b: Option<&[i64]>, known: &OrderFact) -> Result<OrderFact> {
    let b = check_side(known, b, h.beta, h.q, "target")?;
    let n = known.lower().power_order(h.delta.unsigned_abs());
    OrderFact::new(
        known.a.clone(),
        Subject::new(scale(&b, h.alpha)?, h.p),
        FactKind::AtLeast(n),
        Provenance::new(Rule::Homomorphism, h.describe(), vec![known.clone()]),
    )
}

/// `|J| = k` in `Γ_r` and `|J| = l` in `Γ_s` with `gcd(r, s) = 1` give `|J| = kl` in `Γ_rs`.
pub fn crt_combine(fr: &OrderFact, fs: &OrderFact) -> Result<OrderFact> {
    let (Some(r), Some(s)) = (fr.subject.p.value(), fs.subject.p.value()) else {
        return Err(Error::Precondition("CRT needs finite moduli".into()));
    };
    if r.gcd(&s) != 1 {
        return Err(Error::Precondition(format!("moduli {r} and {s} are not coprime")));
    }
    if fr.a != fs.a || fr.subject.b != fs.subject.b {
        return Err(Error::Precondition("facts are about different systems".into()));
    }
    let (Some(k), Some(l)) = (fr.exact(), fs.exact()) else {
        return Err(Error::Precondition("CRT needs exact orders".into()));
    };
    let rs = r.checked_mul(s).ok_or_else(|| Error::Precondition("r·s overflows".into()))?;
    OrderFact::new(
        fr.a.clone(),
        Subject::new(fr.subject.b.clone(), Modulus::finite(rs)?),
        FactKind::Exact(Order(k.0 * l.0)),
        Provenance::new(Rule::Crt, format!("Z_{rs} = Z_{r} x Z_{s}"), vec![fr.clone(), fs.clone()]),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScaleRule {
    /// `b -> tb` with `t` a non-zero divisor of `Z_p`.
    UnitScale,
    /// `EXACT(p)` for `(b, p)` gives `EXACT(tp)` for `(tb, tp)`.
    MultipleLift,
    /// `EXACT(p)` for `b = 0`; `t` and the known fact's kind are ignored.
    ZeroB,
}

pub fn b_scale_facts(rule: ScaleRule, t: i64, p: Modulus, known: &OrderFact) -> Result<OrderFact> {
    if rule != ScaleRule::ZeroB && known.subject.p != p {
        return Err(Error::Precondition(format!("known fact is about p = {}, not {p}", known.subject.p)));
    }
    let premise = vec![known.clone()];
    let a = known.a.clone();
    match rule {
        ScaleRule::UnitScale => {
            let kind = match p.value() {
                Some(pv) => {
                    if (t.rem_euclid(pv as i64) as u64).gcd(&pv) != 1 {
                        return Err(Error::Precondition(format!("{t} is a zero divisor in Z_{pv}")));
                    }
                    // Over Z_p a unit scales b by an isomorphism.
                    known.kind
                }
                None if t == 1 || t == -1 => known.kind,
                None if t == 0 => return Err(Error::Precondition("t = 0 is a zero divisor in Z".into())),
                None if known.lower().is_infinite() => FactKind::Exact(Order::INFINITE),
                None => {
                    return Err(Error::Precondition(
                        "over Z only an infinite order transfers under scaling by |t| > 1".into(),
                    ))
                }
            };
            OrderFact::new(
                a,
                Subject::new(scale(&known.subject.b, t)?, p),
                kind,
                Provenance::new(Rule::UnitScale, format!("b -> {t}b"), premise),
            )
        }
        ScaleRule::MultipleLift => {
            let Some(pv) = p.value() else {
                return Err(Error::Precondition("lifting needs a finite p".into()));
            };
            if t < 1 {
                return Err(Error::Precondition(format!("lift factor {t} must be positive")));
            }
            if known.exact() != Some(Order(pv)) {
                return Err(Error::Precondition(format!("lifting needs EXACT({pv}), got {}", known.kind)));
            }
            let tp = pv
                .checked_mul(t as u64)
                .ok_or_else(|| Error::Precondition("t·p overflows".into()))?;
            OrderFact::new(
                a,
                Subject::new(scale(&known.subject.b, t)?, Modulus::finite(tp)?),
                FactKind::Exact(Order(tp)),
                Provenance::new(Rule::MultipleLift, format!("(b, {pv}) -> ({t}b, {tp})"), premise),
            )
        }
        ScaleRule::ZeroB => {
            let m = a.len();
            OrderFact::new(
                a,
                Subject::new(Some(vec![0; m]), p),
                FactKind::Exact(Order::of_modulus(p)),
                Provenance::new(Rule::ZeroB, "b = 0", vec![]),
            )
        }
    }
}

/// Shape of `A` as an oriented incidence matrix: `Some(connected)` when every
/// column has one `+1`, one `-1` and zeros elsewhere.
pub fn incidence_shape(a: &[Vec<i64>]) -> Option<bool> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for j in 0..n {
        let (mut plus, mut minus) = (None, None);
        for (i, row) in a.iter().enumerate() {
            match row[j] {
                0 => {}
                1 if plus.is_none() => plus = Some(i),
                -1 if minus.is_none() => minus = Some(i),
                _ => return None,
            }
        }
        let (Some(u), Some(v)) = (plus, minus) else {
            return None;
        };
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        parent[ru] = rv;
    }
    let roots: BTreeSet<usize> = (0..m).map(|i| find(&mut parent, i)).collect();
    Some(roots.len() <= 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bounds {
    lower: OrderFact,
    upper: OrderFact,
}

/// Fixed point of [`deduce`]: tightest bounds per subject, with provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    a: Vec<Vec<i64>>,
    entries: BTreeMap<Subject, Bounds>,
    notes: Vec<String>,
}

impl Closure {
    pub fn subjects(&self) -> impl Iterator<Item = &Subject> {
        self.entries.keys()
    }

    /// `(lower, upper)`: `lower | |J| | upper`.
    pub fn bounds(&self, b: Option<&[i64]>, p: Modulus) -> Option<(Order, Order)> {
        let s = Subject::new(b.map(|b| b.to_vec()), p);
        self.entries.get(&s).map(|e| (e.lower.lower(), e.upper.upper()))
    }

    /// Summary fact for one subject.
    pub fn fact(&self, b: Option<&[i64]>, p: Modulus) -> Option<OrderFact> {
        let s = Subject::new(b.map(|b| b.to_vec()), p);
        self.entries.get(&s).map(|e| summarize(&self.a, &s, e))
    }

    /// One summary fact per subject.
    pub fn facts(&self) -> Vec<OrderFact> {
        self.entries.iter().map(|(s, e)| summarize(&self.a, s, e)).collect()
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }
}

fn summarize(a: &[Vec<i64>], s: &Subject, e: &Bounds) -> OrderFact {
    let (lo, hi) = (e.lower.lower(), e.upper.upper());
    if lo == hi {
        if e.lower.kind == FactKind::Exact(lo) {
            return e.lower.clone();
        }
        if e.upper.kind == FactKind::Exact(hi) {
            return e.upper.clone();
        }
        return OrderFact {
            a: a.to_vec(),
            subject: s.clone(),
            kind: FactKind::Exact(lo),
            provenance: Provenance::new(Rule::Combine, "matching bounds", vec![e.lower.clone(), e.upper.clone()]),
        };
    }
    if lo == Order::ONE {
        return e.upper.clone();
    }
    if hi == Order::of_modulus(s.p) {
        return e.lower.clone();
    }
    // Both bounds are informative: report the upper one with the lower as premise.
    OrderFact {
        a: a.to_vec(),
        subject: s.clone(),
        kind: FactKind::Divides(hi),
        provenance: Provenance::new(
            Rule::Combine,
            format!("also AT_LEAST({lo})"),
            vec![e.lower.clone(), e.upper.clone()],
        ),
    }
}

struct State {
    a: Vec<Vec<i64>>,
    entries: BTreeMap<Subject, Bounds>,
    notes: BTreeSet<String>,
}

impl State {
    fn ensure(&mut self, s: &Subject) -> Result<bool> {
        if self.entries.contains_key(s) {
            return Ok(false);
        }
        let p = Order::of_modulus(s.p);
        let upper = OrderFact::new(
            self.a.clone(),
            s.clone(),
            FactKind::Divides(p),
            Provenance::new(Rule::Relation, format!("J^{} = 1", s.p), vec![]),
        )?;
        let mut lower = OrderFact::new(
            self.a.clone(),
            s.clone(),
            FactKind::AtLeast(Order::ONE),
            Provenance::new(Rule::Relation, "trivial", vec![]),
        )?;
        if let Some(b) = &s.b {
            if b.iter().all(|&x| x == 0) {
                lower = OrderFact::new(
                    self.a.clone(),
                    s.clone(),
                    FactKind::Exact(p),
                    Provenance::new(Rule::ZeroB, "b = 0", vec![]),
                )?;
            } else if incidence_shape(&self.a) == Some(true) && s.p.is_zero_i64(b.iter().sum()) {
                lower = OrderFact::new(
                    self.a.clone(),
                    s.clone(),
                    FactKind::Exact(p),
                    Provenance::new(Rule::ZeroSum, "connected incidence system with |b| = 0", vec![]),
                )?;
            }
        }
        self.entries.insert(s.clone(), Bounds { lower: lower.clone(), upper });
        self.check(s)?;
        Ok(true)
    }

    fn check(&self, s: &Subject) -> Result<()> {
        let e = &self.entries[s];
        if !e.lower.lower().divides(e.upper.upper()) {
            return Err(Error::Inconsistent(format!(
                "for {s}: lower bound {} does not divide upper bound {}\n{}{}",
                e.lower.lower(),
                e.upper.upper(),
                e.lower.explain(),
                e.upper.explain()
            )));
        }
        Ok(())
    }

    /// Re-targets a premise to `s` when it came from a different subject.
    fn restate(&self, s: &Subject, f: &OrderFact, kind: FactKind, rule: Rule, detail: &str) -> Result<OrderFact> {
        if f.subject == *s && f.kind == kind {
            return Ok(f.clone());
        }
        OrderFact::new(self.a.clone(), s.clone(), kind, Provenance::new(rule, detail, vec![f.clone()]))
    }

    fn tighten(&mut self, s: &Subject, f: &OrderFact) -> Result<bool> {
        self.ensure(s)?;
        let mut changed = false;
        let cur = self.entries[s].clone();

        let hi = cur.upper.upper().gcd(f.upper());
        if hi != cur.upper.upper() {
            let new = if hi == f.upper() && f.subject == *s {
                f.clone()
            } else if hi == f.upper() {
                self.restate(s, f, FactKind::Divides(hi), f.provenance.rule, "same bound")?
            } else {
                OrderFact::new(
                    self.a.clone(),
                    s.clone(),
                    FactKind::Divides(hi),
                    Provenance::new(Rule::Combine, "gcd of upper bounds", vec![cur.upper.clone(), f.clone()]),
                )?
            };
            self.entries.get_mut(s).expect("ensured").upper = new;
            changed = true;
        }

        let lo_new = cur
            .lower
            .lower()
            .lcm(f.lower())
            .ok_or_else(|| Error::Inconsistent(format!("lower bound for {s} overflows")))?;
        if lo_new != cur.lower.lower() {
            let new = if lo_new == f.lower() && f.subject == *s {
                f.clone()
            } else if lo_new == f.lower() {
                self.restate(s, f, FactKind::AtLeast(lo_new), f.provenance.rule, "same bound")?
            } else {
                OrderFact::new(
                    self.a.clone(),
                    s.clone(),
                    FactKind::AtLeast(lo_new),
                    Provenance::new(Rule::Combine, "lcm of lower bounds", vec![cur.lower.clone(), f.clone()]),
                )
                .map_err(|e| self.inconsistent(s, e))?
            };
            self.entries.get_mut(s).expect("ensured").lower = new;
            changed = true;
        }
        self.check(s)?;
        Ok(changed)
    }

    fn inconsistent(&self, s: &Subject, e: Error) -> Error {
        match e {
            Error::Inconsistent(msg) => Error::Inconsistent(format!("for {s}: {msg}")),
            other => other,
        }
    }

    /// Facts summarizing the current bounds of `s`, as premises for transfers.
    fn snapshot(&self, s: &Subject) -> (OrderFact, OrderFact) {
        let e = &self.entries[s];
        (e.lower.clone(), e.upper.clone())
    }
}

const MAX_MODULI: usize = 256;

/// Pairwise coprime parts of `p`: prime powers found by trial division below
/// `10^6`, plus any leftover cofactor.
fn coprime_parts(p: u64) -> Vec<u64> {
    let mut parts = Vec::new();
    let mut n = p;
    let mut d = 2u64;
    while d <= 1_000_000 && d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut pp = 1;
            while n % d == 0 {
                n /= d;
                pp *= d;
            }
            parts.push(pp);
        }
        d += 1;
    }
    if n > 1 {
        parts.push(n);
    }
    parts
}

/// Closes a set of facts about one `A` under meets, homomorphisms between
/// moduli, CRT splitting and merging, and (for connected incidence systems)
/// transfer between colourings whose totals have the same order in `Z_p`.
pub fn deduce(facts: &[OrderFact]) -> Result<Closure> {
    let Some(first) = facts.first() else {
        return Err(Error::Precondition("no facts to deduce from".into()));
    };
    if facts.iter().any(|f| f.a != first.a) {
        return Err(Error::Precondition("facts mix different matrices A".into()));
    }
    let mut st = State { a: first.a.clone(), entries: BTreeMap::new(), notes: BTreeSet::new() };
    let shape = incidence_shape(&st.a);

    // Every b is considered at every modulus that occurs, closed under CRT
    // splitting into coprime parts and under lcm. The set only grows with the
    // input, which keeps deduce monotone.
    let bs: BTreeSet<Option<Vec<i64>>> = facts.iter().map(|f| f.subject.b.clone()).collect();
    let mut moduli: BTreeSet<Modulus> = facts.iter().map(|f| f.subject.p).collect();
    let mut finite: BTreeSet<u64> = BTreeSet::new();
    for p in moduli.iter().filter_map(|p| p.value()) {
        finite.insert(p);
        finite.extend(coprime_parts(p).into_iter().filter(|&q| q >= 2));
    }
    let mut frontier: Vec<u64> = finite.iter().copied().collect();
    while let Some(x) = frontier.pop() {
        for y in finite.clone() {
            match (x / x.gcd(&y)).checked_mul(y) {
                Some(l) if finite.len() < MAX_MODULI => {
                    if finite.insert(l) {
                        frontier.push(l);
                    }
                }
                Some(_) => {
                    st.notes.insert(format!("more than {MAX_MODULI} moduli; lcm closure truncated"));
                }
                None => {
                    st.notes.insert("lcm of the moduli overflows; CRT merge skipped".into());
                }
            }
        }
    }
    moduli.extend(finite.into_iter().map(Modulus::Finite));
    let keys: BTreeMap<Option<Vec<i64>>, BTreeSet<Modulus>> = bs.into_iter().map(|b| (b, moduli.clone())).collect();
    for (b, ps) in &keys {
        for &p in ps {
            st.ensure(&Subject::new(b.clone(), p))?;
        }
    }
    for f in facts {
        st.tighten(&f.subject.clone(), f)?;
    }

    match shape {
        Some(false) => {
            st.notes.insert("incidence graph is disconnected: colouring-order transfer not applied".into());
        }
        None => {
            st.notes.insert("A is not an oriented incidence matrix: colouring-order transfer not applied".into());
        }
        Some(true) => {}
    }

    loop {
        let mut changed = false;
        let subjects: Vec<Subject> = st.entries.keys().cloned().collect();

        // Facts for every b apply to each b.
        for s in subjects.iter().filter(|s| s.b.is_some()) {
            let g = Subject::new(None, s.p);
            if st.entries.contains_key(&g) {
                let (lo, hi) = st.snapshot(&g);
                changed |= st.tighten(s, &lo)?;
                changed |= st.tighten(s, &hi)?;
            }
        }

        // Homomorphisms between moduli for the same b.
        for s in &subjects {
            for t in &subjects {
                if s == t || s.b != t.b {
                    continue;
                }
                let delta = match (s.p.value(), t.p.value()) {
                    (None, _) => 1,
                    (Some(p), Some(q)) => q / p.gcd(&q),
                    (Some(_), None) => continue,
                };
                let Ok(delta) = i64::try_from(delta) else { continue };
                let h = Homomorphism::new(s.p, t.p, 1, 1, delta, delta)?;
                let (_, src_hi) = st.snapshot(s);
                let f = hom_transfer(&h, s.b.as_deref(), &src_hi)?;
                changed |= st.tighten(t, &f)?;
                let (dst_lo, _) = st.snapshot(t);
                let f = hom_pullback(&h, t.b.as_deref(), &dst_lo).map_err(|e| st.inconsistent(s, e))?;
                changed |= st.tighten(s, &f)?;
            }
        }

        if shape == Some(true) {
            for s in &subjects {
                for t in &subjects {
                    let (Some(bs), Some(bt)) = (&s.b, &t.b) else { continue };
                    if s.p != t.p || bs == bt {
                        continue;
                    }
                    let (ks, kt): (i64, i64) = (bs.iter().sum(), bt.iter().sum());
                    let (lo, hi) = st.snapshot(s);
                    let detail = format!("|b| = {ks} and |b'| = {kt}");
                    match s.p.value() {
                        Some(p) => {
                            let ord = |k: i64| p / (k.rem_euclid(p as i64) as u64).gcd(&p);
                            if ord(ks) == ord(kt) {
                                let lo = st.restate(t, &lo, FactKind::AtLeast(lo.lower()), Rule::ColouringTransfer, &detail)?;
                                let hi = st.restate(t, &hi, FactKind::Divides(hi.upper()), Rule::ColouringTransfer, &detail)?;
                                changed |= st.tighten(t, &lo)?;
                                changed |= st.tighten(t, &hi)?;
                            }
                        }
                        None => {
                            if ks == kt || ks == -kt {
                                let lo = st.restate(t, &lo, FactKind::AtLeast(lo.lower()), Rule::ColouringTransfer, &detail)?;
                                let hi = st.restate(t, &hi, FactKind::Divides(hi.upper()), Rule::ColouringTransfer, &detail)?;
                                changed |= st.tighten(t, &lo)?;
                                changed |= st.tighten(t, &hi)?;
                            } else if ks != 0 && kt != 0 && lo.lower().is_infinite() {
                                let lo = st.restate(t, &lo, FactKind::Exact(Order::INFINITE), Rule::ColouringTransfer, &detail)?;
                                changed |= st.tighten(t, &lo)?;
                            }
                        }
                    }
                }
            }
        }

        if !changed {
            break;
        }
    }

    Ok(Closure { a: st.a, entries: st.entries, notes: st.notes.into_iter().collect() })
}
