use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sigmalax::catalog::builtin;
use sigmalax::flatness::{flatness_numeric, flatness_series};
use sigmalax::integrability::check_general;
use sigmalax::par::Exec;
use sigmalax::scanner::{lattice, range_values, scan_general_z2};
use sigmalax::rational::q;

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Auto), ("sequential", Exec::Sequential)];

fn general_check(c: &mut Criterion) {
    let m = builtin("z4_superspace").unwrap();
    let mut g = c.benchmark_group("check_general/z4_superspace");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| check_general(black_box(&m.algebra), black_box(&m.pair), exec).unwrap())
        });
    }
    g.finish();
}

fn series(c: &mut Criterion) {
    let m = builtin("z3_coset").unwrap();
    let mut g = c.benchmark_group("flatness_series/z3_coset/order6");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| flatness_series(&m.algebra, &m.pair, &m.projectors, 6, exec).unwrap())
        });
    }
    g.finish();
}

fn numeric(c: &mut Criterion) {
    let m = builtin("z4_superspace").unwrap();
    let lambdas = [-0.6, -0.2, 0.2, 0.6];
    let mut g = c.benchmark_group("flatness_numeric/z4_superspace");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| flatness_numeric(&m.algebra, &m.pair, &m.projectors, &lambdas, 100, 7, exec))
        });
    }
    g.finish();
}

fn scan(c: &mut Criterion) {
    let grid = lattice(&range_values(&q(-3), &q(3), &q(1)), 3);
    let mut g = c.benchmark_group("scan_general_z2/7^3");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| scan_general_z2(black_box(&grid), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, general_check, series, numeric, scan);
criterion_main!(benches);
