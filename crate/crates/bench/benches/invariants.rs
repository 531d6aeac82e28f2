use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use moduli_bench::{closed_form, via_regsum, volume, SHEAF_CASES, VOLUME_CASES};

fn label(case: &(u16, i64, i64)) -> String {
    format!("g{}_r{}_d{}", case.0, case.1, case.2)
}

fn invariants(c: &mut Criterion) {
    let mut group = c.benchmark_group("inv_sheaf");
    group.sample_size(10);
    for case in SHEAF_CASES {
        group.bench_with_input(BenchmarkId::new("closed", label(case)), case, |b, case| b.iter(|| closed_form(*case)));
    }
    for case in SHEAF_CASES.iter().filter(|c| c.0 <= 2) {
        group.bench_with_input(BenchmarkId::new("regsum", label(case)), case, |b, case| b.iter(|| via_regsum(*case)));
    }
    group.finish();
}

fn volumes(c: &mut Criterion) {
    let mut group = c.benchmark_group("volume_fd");
    group.sample_size(10);
    for case in VOLUME_CASES {
        group.bench_with_input(BenchmarkId::from_parameter(label(case)), case, |b, case| b.iter(|| volume(*case)));
    }
    group.finish();
}

criterion_group!(benches, invariants, volumes);
criterion_main!(benches);
