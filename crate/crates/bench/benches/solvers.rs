use criterion::{criterion_group, criterion_main, Criterion};
use skorokhod_bench::ring_fixture;
use skorokhod_core::dual::{ascend, AscentOptions};
use skorokhod_core::pde::{superharmonic_envelope, value_table};
use skorokhod_core::primal::lp_oracle;
use skorokhod_core::ScalarField;

fn obstacle(c: &mut Criterion) {
    let f = ring_fixture();
    let x = f.inst.mu.support()[0];
    let hf = ScalarField::new(f.psi.values().iter().zip(f.cost.row(x)).map(|(p, c)| p - c).collect());
    c.bench_function("obstacle_envelope_ring", |b| b.iter(|| superharmonic_envelope(&hf, &f.inst.grid).unwrap()));
}

fn table(c: &mut Criterion) {
    let f = ring_fixture();
    c.bench_function("value_table_ring", |b| b.iter(|| value_table(&f.psi, &f.cost, &f.inst.grid).unwrap()));
}

fn ascent(c: &mut Criterion) {
    let f = ring_fixture();
    let opts = AscentOptions { check_order: false, ..AscentOptions::default() };
    let mut group = c.benchmark_group("ascent");
    group.sample_size(10);
    group.bench_function("ring", |b| {
        b.iter(|| ascend(&f.inst.mu, &f.inst.nu, &f.inst.cost, &f.inst.grid, &opts).unwrap())
    });
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let f = ring_fixture();
    let mut group = c.benchmark_group("lp_oracle");
    group.sample_size(10);
    group.bench_function("ring", |b| b.iter(|| lp_oracle(&f.inst.mu, &f.inst.nu, &f.cost, &f.inst.grid).unwrap()));
    group.finish();
}

criterion_group!(benches, obstacle, table, ascent, oracle);
criterion_main!(benches);
