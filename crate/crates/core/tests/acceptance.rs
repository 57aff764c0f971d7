//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::seq::SliceRandom;
use rand::Rng;
use solgroup::graph_games::cover_to_picture;
use solgroup::graph_games::gallery::local_bijectivity_failures;
use solgroup::hypergraph::brute_girth;
use solgroup::order_calc::{b_scale_facts, crt_combine, exact_from_theorem, lower_from_operator_solution, upper_from_picture, ScaleRule};
use solgroup::pauli_rep::mermin_peres_square;
use solgroup::picture::{apply_move, phase, remove_isolated, verify, PictureJson, TraceStep};
use solgroup::plane_map::{sc_witness, ScPair, ScWitness};
use solgroup::{
    berge_girth, certify, deduce, gallery, incidence_matrix, reduce, solve_mod, theorem_hypothesis, verify_operator_solution,
    FactKind, Hypergraph, IntMatrix, LinearSystem, Modulus, Order, OrderFact, Picture, ZColouring,
};

const SHIPPED_K33: &str = include_str!("../../cli/data/k33_double_cover.json");
const SHIPPED_D17: &str = include_str!("../../cli/data/d17_picture.json");

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn moduli() -> Vec<Modulus> {
    [2, 3, 4, 5, 6].iter().map(|&p| Modulus::Finite(p)).chain([Modulus::Infinite]).collect()
}

fn shipped(text: &str) -> Picture {
    let j: PictureJson = serde_json::from_str(text).unwrap();
    Picture::from_json(&j).unwrap()
}

fn same(x: &Picture, y: &Picture) -> bool {
    x.to_canonical_json().unwrap() == y.to_canonical_json().unwrap()
}

/// Facts gathered along the way for the abelianization sweep.
#[derive(Default)]
struct Ledger {
    facts: Vec<OrderFact>,
}

fn c1(led: &mut Ledger) -> Outcome {
    let inst = ok(gallery("K33"))?;
    let b = inst.default_colouring().clone();
    let file = shipped(SHIPPED_K33);
    ensure!(verify(&file).is_empty(), "shipped picture is invalid");
    for p in moduli() {
        let pic = ok(inst.figure_picture(&b, p))?.ok_or("K33 has no figure")?;
        if p == Modulus::Infinite {
            ensure!(same(&pic, &file), "shipped picture differs from the built-in figure");
        }
        ensure!(verify(&pic).is_empty(), "invalid at p = {p}");
        let want = p.reduce_i64(2);
        ensure!(phase(&pic) == want, "phase {} at p = {p}, expected {want}", phase(&pic));
        let fact = ok(upper_from_picture(&ok(certify(&pic))?))?;
        let closure = ok(deduce(&[fact.clone()]))?;
        let (lo, hi) = closure.bounds(Some(&b.0), p).ok_or("no bounds")?;
        let g = Order::finite(2).unwrap().gcd(Order::of_modulus(p));
        ensure!(hi == g, "upper {hi} at p = {p}, expected {g}");
        if matches!(p, Modulus::Finite(3) | Modulus::Finite(5)) {
            ensure!(lo == Order::ONE && hi == Order::ONE, "J not trivial at p = {p}");
        }
        led.facts.push(fact);
        led.facts.extend(closure.facts());
    }
    Ok("phase 2, DIVIDES(gcd(2,p)), EXACT(1) at p = 3, 5".into())
}

fn c2(_: &mut Ledger) -> Outcome {
    let inst = ok(gallery("D17"))?;
    let file = shipped(SHIPPED_D17);
    ensure!(verify(&file).is_empty(), "shipped picture is invalid");
    let b0 = inst.default_colouring().clone();
    let built = ok(inst.figure_picture(&b0, Modulus::Infinite))?.ok_or("D17 has no figure")?;
    ensure!(same(&built, &file), "shipped picture differs from the built-in figure");
    let mut rng = rng(2);
    for _ in 0..20 {
        let b = ZColouring((0..8).map(|_| rng.gen_range(-5..=5)).collect());
        let p = *[Modulus::Infinite, Modulus::Finite(7), Modulus::Finite(12)].choose(&mut rng).unwrap();
        let pic = ok(inst.figure_picture(&b, p))?.unwrap();
        ensure!(verify(&pic).is_empty(), "invalid for b = {:?}", b.0);
        let want = p.reduce_i64(2 * b.total());
        ensure!(phase(&pic) == want, "phase {} for b = {:?}, expected {want}", phase(&pic), b.0);
        let fails = local_bijectivity_failures(&pic, &inst.graph);
        ensure!(fails.len() == 8, "{} local bijectivity failures", fails.len());
    }
    Ok("20 colourings, phase 2|b|, 8 failing vertices".into())
}

fn c3(led: &mut Ledger) -> Outcome {
    let mut rng = rng(3);
    let mut worst = Duration::ZERO;
    for name in ["HEAWOOD", "K44"] {
        let start = Instant::now();
        let inst = ok(gallery(name))?;
        let a = ok(incidence_matrix(&inst.graph))?;
        let hyp = theorem_hypothesis(&Hypergraph::from_matrix(&a));
        ensure!(hyp.qualifies(), "{name}: {hyp}");
        let n = inst.graph.num_vertices();
        for p in [2, 3, 5, 7].map(Modulus::Finite).into_iter().chain([Modulus::Infinite]) {
            let f = ok(exact_from_theorem(&a, p))?;
            ensure!(f.exact() == Some(Order::of_modulus(p)), "{name}: {} at p = {p}", f.kind());
            led.facts.push(f);
            for _ in 0..10 {
                let b: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
                let sum: i64 = b.iter().sum();
                let x = ok(solve_mod(&a, &big(&b), p))?;
                ensure!(x.is_none() == !p.is_zero_i64(sum), "{name}: solvability wrong for b = {b:?}, p = {p}");
                if let Some(x) = x {
                    let ax = ok(a.mul_vec(&x))?;
                    ensure!(ax.iter().zip(&b).all(|(l, &r)| p.reduce(&(l - r)) == 0.into()), "{name}: bad solution");
                }
            }
        }
        worst = worst.max(start.elapsed());
    }
    ensure!(worst < Duration::from_secs(1), "slowest instance took {worst:?}");
    Ok(format!("both qualify, EXACT(p), classical iff |b| = 0 (slowest {worst:?})"))
}

fn c4(_: &mut Ledger) -> Outcome {
    let mut rng = rng(4);
    let mut cyclic = 0;
    for _ in 0..250 {
        let h = random_hypergraph(&mut rng, 8, 10);
        let fast = berge_girth(&h);
        let slow = brute_girth(&h, h.num_vertices());
        ensure!(fast.girth == slow.girth, "girth {} vs oracle {} on {:?}", fast.girth, slow.girth, h.incidence());
        if let Some(w) = &fast.witness {
            ensure!(w.is_valid_in(&h), "bad witness");
            cyclic += 1;
        }
    }
    Ok(format!("250 hypergraphs, {cyclic} with cycles"))
}

fn random_modulus(rng: &mut impl Rng) -> Modulus {
    *[2, 3, 4, 5, 6, 7, 0].map(|p| if p == 0 { Modulus::Infinite } else { Modulus::Finite(p) }).choose(rng).unwrap()
}

/// Replays a reduction step by step against the public move API.
fn replay(pic: &Picture) -> Result<bool, String> {
    let trace = ok(reduce(pic))?;
    let mut cur = pic.clone();
    let ph = phase(pic);
    for step in &trace.steps {
        let (next, claimed) = match step {
            TraceStep::RemoveIsolated { vertex, size_after } => (ok(remove_isolated(&cur, *vertex))?, *size_after),
            TraceStep::Move { violation, size_after } => (ok(apply_move(&cur, violation))?, *size_after),
        };
        ensure!(verify(&next).is_empty(), "move produced an invalid picture: {step:?}");
        ensure!(phase(&next) == ph, "phase changed from {ph} to {}", phase(&next));
        ensure!(next.size() < cur.size(), "size did not decrease");
        ensure!(next.size() == claimed, "trace size {claimed}, actual {}", next.size());
        cur = next;
    }
    ensure!(cur == trace.result, "replay does not reach the reported result");
    Ok(trace.is_empty_outcome())
}

fn c5(_: &mut Ledger) -> Outcome {
    let mut rng = rng(5);
    let (mut covers, mut local, mut qualifying, mut empty_other) = (0, 0, 0, 0);
    for _ in 0..120 {
        let n = rng.gen_range(3..=7);
        let g = random_plane_graph(&mut rng, n);
        let c = trivial_cover(&g, rng.gen_range(1..=2));
        let b = ZColouring((0..g.num_vertices()).map(|_| rng.gen_range(-3..=3)).collect());
        let pic = ok(cover_to_picture(&c, &b, random_modulus(&mut rng)))?;
        ensure!(verify(&pic).is_empty(), "cover picture invalid");
        if replay(&pic)? {
            empty_other += 1;
        }
        covers += 1;
    }
    for _ in 0..100 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=5);
        let a: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        if a.iter().all(|r| r.iter().all(|&x| x == 0)) {
            continue;
        }
        let b: Vec<i64> = (0..m).map(|_| rng.gen_range(-3..=3)).collect();
        let sys = ok(LinearSystem::from_i64(&a, &b, random_modulus(&mut rng)))?;
        let (pairs, swaps) = (rng.gen_range(1..=4), rng.gen_range(0..20));
        let pic = cancellation_picture(&mut rng, &sys, pairs, swaps);
        ensure!(verify(&pic).is_empty(), "local-relation picture invalid");
        if replay(&pic)? {
            empty_other += 1;
        }
        local += 1;
    }
    let bases = qualifying_incidence();
    for _ in 0..120 {
        let (name, base) = bases.choose(&mut rng).unwrap();
        let a = resign(&mut rng, base);
        let b: Vec<i64> = (0..a.len()).map(|_| rng.gen_range(-3..=3)).collect();
        let sys = ok(LinearSystem::from_i64(&a, &b, random_modulus(&mut rng)))?;
        let (pairs, swaps) = (rng.gen_range(1..=5), rng.gen_range(0..60));
        let pic = cancellation_picture(&mut rng, &sys, pairs, swaps);
        ensure!(phase(&pic) == 0, "phase-0 generator gave phase {}", phase(&pic));
        ensure!(replay(&pic)?, "{name}: reduction stuck for a qualifying system at p = {}", sys.p());
        qualifying += 1;
    }
    let total = covers + local + qualifying;
    ensure!(total >= 300, "only {total} pictures");
    Ok(format!(
        "{total} pictures ({covers} cover, {local} local, {qualifying} qualifying all EMPTY; {empty_other} others EMPTY)"
    ))
}

fn c6(_: &mut Ledger) -> Outcome {
    let mut rng = rng(6);
    let mut detail = Vec::new();
    for pair in ScPair::all() {
        let mut faces = 0;
        for i in 0..500 {
            let m = match i % 3 {
                0 => {
                    let edges = rng.gen_range(1..=40);
                    random_planar_map(&mut rng, edges)
                }
                1 => {
                    let n = rng.gen_range(3..=12);
                    random_plane_graph(&mut rng, n).embedding().unwrap().unwrap()
                }
                _ => {
                    let n = rng.gen_range(3..=12);
                    double_edges(&random_plane_graph(&mut rng, n).embedding().unwrap().unwrap())
                }
            };
            let w = sc_witness(&m, pair).map_err(|e| format!("{pair:?}: {e}"))?;
            ensure!(w.is_valid_for(&m, pair), "{pair:?}: invalid witness {w:?}");
            faces += matches!(w, ScWitness::Face { .. }) as usize;
        }
        detail.push(format!("{pair:?} 500 ({faces} face)"));
    }
    Ok(detail.join(", "))
}

fn c7(_: &mut Ledger) -> Outcome {
    let mut rng = rng(7);
    let mut solvable = 0;
    for _ in 0..250 {
        let p = *[2u64, 3, 4, 6].choose(&mut rng).unwrap();
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=4);
        let a: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-6..=6)).collect()).collect();
        let b: Vec<i64> = (0..m).map(|_| rng.gen_range(-6..=6)).collect();
        let got = ok(solve_mod(&ok(IntMatrix::from_rows(&a))?, &big(&b), Modulus::Finite(p)))?;
        let want = brute_solve(&a, &b, p);
        ensure!(got.is_some() == want.is_some(), "A = {a:?}, b = {b:?}, p = {p}: {got:?} vs {want:?}");
        if let Some(x) = got {
            let x: Vec<i64> = x.iter().map(|v| i64::try_from(v).unwrap()).collect();
            ensure!(brute_solve_check(&a, &b, &x, p), "returned x = {x:?} does not solve the system");
            solvable += 1;
        }
    }
    Ok(format!("250 systems, {solvable} solvable"))
}

fn brute_solve_check(a: &[Vec<i64>], b: &[i64], x: &[i64], p: u64) -> bool {
    a.iter()
        .zip(b)
        .all(|(r, &bi)| (r.iter().zip(x).map(|(r, x)| r * x).sum::<i64>() - bi).rem_euclid(p as i64) == 0)
}

fn k33_e5() -> (IntMatrix, Vec<i64>) {
    let inst = gallery("K33").unwrap();
    (incidence_matrix(&inst.graph).unwrap(), ZColouring::indicator(6, 5).0)
}

fn c8(led: &mut Ledger) -> Outcome {
    let sq = ok(mermin_peres_square())?;
    let (a, b) = k33_e5();
    ensure!(sq.system().a() == &a, "square is not on I(K33)");
    ensure!(sq.system().b() == &big(&b), "square colouring is not e_c");
    ensure!(b.iter().sum::<i64>() == 1, "|b| != 1");
    // Square rows are the number vertices, columns the letter vertices.
    let minus = sq.q() / 2;
    let mut negatives = 0;
    for i in 0..6 {
        let mut prod = solgroup::MonomialOperator::identity(sq.dim(), sq.q());
        for j in sq.system().support(i) {
            prod = ok(prod.multiply(&sq.ops()[j]))?;
        }
        let s = prod.is_scalar().ok_or("line product is not scalar")?;
        ensure!(s == 0 || s == minus, "line product ω^{s}");
        if i < 3 {
            ensure!(s == 0, "row {i} multiplies to -I");
        } else {
            negatives += (s == minus) as usize;
        }
    }
    ensure!(negatives == 1, "{negatives} columns multiply to -I");
    let report = ok(verify_operator_solution(&sq))?;
    ensure!(report.passed(), "verification failed: {:?}", report.failures);
    let two = ok(lower_from_operator_solution(report.solution.as_ref().unwrap()))?;
    ensure!(two.exact() == Some(Order::finite(2).unwrap()), "Γ_2: {}", two.kind());
    let inst = ok(gallery("K33"))?;
    let pic3 = ok(inst.figure_picture(&ZColouring(b.clone()), Modulus::Finite(3)))?.unwrap();
    let three = ok(upper_from_picture(&ok(certify(&pic3))?))?;
    ensure!(three.kind() == FactKind::Divides(Order::ONE), "Γ_3: {}", three.kind());
    let six = ok(crt_combine(&two, &three))?;
    ensure!(six.subject().p == Modulus::Finite(6), "CRT modulus {}", six.subject().p);
    ensure!(six.exact() == Some(Order::finite(2).unwrap()), "Γ_6: {}", six.kind());
    led.facts.extend([two, three, six]);
    Ok("square verifies; EXACT(2) at p = 2, DIVIDES(1) at p = 3, EXACT(2) at p = 6".into())
}

fn c9(led: &mut Ledger) -> Outcome {
    let sq = ok(mermin_peres_square())?;
    let report = ok(verify_operator_solution(&sq))?;
    let two = ok(lower_from_operator_solution(report.solution.as_ref().ok_or("square fails")?))?;
    let lifted = ok(b_scale_facts(ScaleRule::MultipleLift, 2, Modulus::Finite(2), &two))?;
    let (_, b) = k33_e5();
    let b2: Vec<i64> = b.iter().map(|x| 2 * x).collect();
    ensure!(lifted.subject().b.as_deref() == Some(&b2[..]), "lift is about {:?}", lifted.subject().b);
    ensure!(lifted.subject().p == Modulus::Finite(4), "lift modulus {}", lifted.subject().p);
    ensure!(lifted.exact() == Some(Order::finite(4).unwrap()), "lift gives {}", lifted.kind());
    let inst = ok(gallery("K33"))?;
    let pic = ok(inst.figure_picture(&ZColouring(b2.clone()), Modulus::Finite(4)))?.unwrap();
    let upper = ok(upper_from_picture(&ok(certify(&pic))?))?;
    let g = Order::finite(2 * 2).unwrap().gcd(Order::finite(4).unwrap());
    ensure!(upper.kind() == FactKind::Divides(g), "picture bound {}", upper.kind());
    let closure = deduce(&[lifted.clone(), upper.clone()]).map_err(|e| format!("deduce: {e}"))?;
    let (lo, hi) = closure.bounds(Some(&b2), Modulus::Finite(4)).ok_or("no bounds")?;
    ensure!(lo == hi && hi == Order::finite(4).unwrap(), "closure bounds {lo}..{hi}");
    led.facts.extend([lifted, upper]);
    led.facts.extend(closure.facts());
    Ok("EXACT(4) for (2b, 4), consistent with DIVIDES(4)".into())
}

fn c10(led: &mut Ledger) -> Outcome {
    let mut rng = rng(10);
    let mut checked = 0;
    for f in &led.facts {
        let n = match f.kind() {
            FactKind::Exact(n) | FactKind::Divides(n) => n,
            FactKind::AtLeast(_) => continue,
        };
        let samples: Vec<Vec<i64>> = match &f.subject().b {
            Some(b) => vec![b.clone()],
            None => {
                let m = f.a().len();
                let mut s = vec![vec![0; m]];
                s.extend((0..m).map(|i| ZColouring::indicator(m, i).0));
                s.extend((0..5).map(|_| (0..m).map(|_| rng.gen_range(-4..=4)).collect()));
                s
            }
        };
        for b in samples {
            let ab = abelian_j_order(f.a(), &b, f.subject().p.value());
            let fine = match (ab, n.value()) {
                (_, None) => true,
                (Some(k), Some(n)) => n % k == 0,
                (None, Some(_)) => false,
            };
            ensure!(fine, "{} for {} but the abelian image of J has order {ab:?} (b = {b:?})", f.kind(), f.subject());
            checked += 1;
        }
    }
    ensure!(checked > 0, "no facts to check");
    Ok(format!("{} facts, {checked} (fact, b) pairs", led.facts.len()))
}

type Criterion = fn(&mut Ledger) -> Outcome;

fn main() {
    let criteria: [(&str, Criterion, Duration); 10] = [
        ("K33 figure regression", c1, Duration::from_secs(1)),
        ("D17 figure regression", c2, Duration::from_secs(1)),
        ("qualifying instances", c3, Duration::from_secs(2)),
        ("girth oracle", c4, Duration::from_secs(30)),
        ("reduction soundness", c5, Duration::from_secs(60)),
        ("small-cancellation witness", c6, Duration::from_secs(30)),
        ("classical solver oracle", c7, Duration::from_secs(30)),
        ("Mermin-Peres pipeline", c8, Duration::from_secs(1)),
        ("lift regression", c9, Duration::from_secs(1)),
        ("abelianization sweep", c10, Duration::from_secs(10)),
    ];
    let mut led = Ledger::default();
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(|| run(&mut led))).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let took = start.elapsed();
        let res = res.and_then(|d| if took < *limit { Ok(d) } else { Err(format!("{took:?} exceeds {limit:?}")) });
        match res {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{took:.2?}]", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} [{took:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
