use criterion::{black_box, criterion_group, criterion_main, Criterion};
use solgroup::order_calc::upper_from_picture;
use solgroup::picture::verify;
use solgroup::zmod_linalg::smith_normal_form;
use solgroup::{
    berge_girth, certify, deduce, gallery, incidence_matrix, reduce, solve_mod, Hypergraph, IntMatrix, Modulus, ZColouring,
};

/// Deterministic pseudo-random entries in `[-9, 9]`.
fn lcg_matrix(rows: usize, cols: usize, mut seed: u64) -> IntMatrix {
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    ((seed >> 33) % 19) as i64 - 9
                })
                .collect()
        })
        .collect();
    IntMatrix::from_rows(&data).unwrap()
}

/// Cycle on `n` vertices with chords `i - (i + 5)` for even `i`.
fn chorded_cycle(n: usize) -> Hypergraph {
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    edges.extend((0..n).step_by(2).map(|i| (i, (i + 5) % n)));
    Hypergraph::from_graph_edges(n, &edges).unwrap()
}

fn girth(c: &mut Criterion) {
    let heawood = Hypergraph::from_matrix(&incidence_matrix(&gallery("HEAWOOD").unwrap().graph).unwrap());
    c.bench_function("berge_girth/heawood", |b| b.iter(|| berge_girth(black_box(&heawood))));
    let big = chorded_cycle(200);
    c.bench_function("berge_girth/chorded_cycle_200", |b| b.iter(|| berge_girth(black_box(&big))));
}

fn linalg(c: &mut Criterion) {
    let m = lcg_matrix(12, 12, 7);
    c.bench_function("smith_normal_form/12x12", |b| b.iter(|| smith_normal_form(black_box(&m))));
    let a = incidence_matrix(&gallery("HEAWOOD").unwrap().graph).unwrap();
    let rhs: Vec<_> = (0..14).map(|i| num_bigint::BigInt::from(i % 3)).collect();
    c.bench_function("solve_mod/heawood_p6", |b| b.iter(|| solve_mod(black_box(&a), &rhs, Modulus::Finite(6))));
}

fn pictures(c: &mut Criterion) {
    let inst = gallery("D17").unwrap();
    let d17 = inst.figure_picture(inst.default_colouring(), Modulus::Infinite).unwrap().unwrap();
    c.bench_function("verify/d17_figure", |b| b.iter(|| verify(black_box(&d17))));
    let k33 = gallery("K33").unwrap();
    let pic = k33.figure_picture(&ZColouring::zero(6), Modulus::Finite(2)).unwrap().unwrap();
    c.bench_function("reduce/k33_figure_p2", |b| b.iter(|| reduce(black_box(&pic)).unwrap()));
    let facts: Vec<_> = [2, 3, 4, 6]
        .iter()
        .map(|&p| {
            let pic = k33.figure_picture(k33.default_colouring(), Modulus::Finite(p)).unwrap().unwrap();
            upper_from_picture(&certify(&pic).unwrap()).unwrap()
        })
        .collect();
    c.bench_function("deduce/k33_four_moduli", |b| b.iter(|| deduce(black_box(&facts)).unwrap()));
}

criterion_group!(benches, girth, linalg, pictures);
criterion_main!(benches);
