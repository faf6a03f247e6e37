use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qnmlab_bench::{clifford_fixture, scenario};
use qnmlab_core::{channels, designs, lemmas, linalg, nm, random};

fn groups(c: &mut Criterion) {
    c.bench_function("clifford_group(2)", |b| b.iter(|| designs::clifford_group(black_box(2)).unwrap()));
    let c2 = designs::clifford_group(2).unwrap();
    let x = random::ginibre(16, 16, &mut random::rng(1));
    c.bench_function("t_twirl clifford-2", |b| b.iter(|| designs::t_twirl(&c2, black_box(&x), 2).unwrap()));
    c.bench_function("random_clifford(3, 200)", |b| b.iter(|| designs::random_clifford(3, 200, black_box(5)).unwrap()));
}

fn attacks(c: &mut Criterion) {
    let (s, a) = clifford_fixture();
    let sc = scenario(&s, &a);
    c.bench_function("effective_channel clifford-1", |b| b.iter(|| nm::effective_channel(black_box(&sc)).unwrap()));
    c.bench_function("evaluate clifford-1", |b| b.iter(|| nm::evaluate(black_box(&sc)).unwrap()));
    c.bench_function("characterization_residual clifford-1", |b| {
        b.iter(|| nm::characterization_residual(black_box(&sc)).unwrap())
    });
    let id = nm::build_attack("identity", s.ciphertext(), 2, 0).unwrap();
    c.bench_function("diamond_distance_bounds 4x4", |b| {
        b.iter(|| channels::diamond_distance_bounds(black_box(&a), black_box(&id)).unwrap())
    });
}

fn numerics(c: &mut Criterion) {
    let m = random::ginibre(32, 32, &mut random::rng(2));
    let h = linalg::hermitian_part(&m);
    c.bench_function("eigh 32", |b| b.iter(|| linalg::eigh(black_box(&h))));
    c.bench_function("lemma battery", |b| b.iter(|| lemmas::run_battery(black_box(3)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = groups, attacks, numerics
}
criterion_main!(benches);
