use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use eqbtq_bench::{generic_point, noncommuting_pair, oracle, synthetic_series};
use eqbtq_core::{fit_coefficients, Precision};

fn szego(c: &mut Criterion) {
    let x = generic_point(2);
    let mut group = c.benchmark_group("szego_diag_w12");
    for precision in [Precision::Double, Precision::Extended] {
        let o = oracle(&[1, 2], precision);
        for k in [100i64, 400] {
            group.bench_with_input(
                BenchmarkId::new(format!("{precision:?}"), k),
                &k,
                |b, &k| b.iter(|| o.szego_diag(black_box(k), &x).unwrap()),
            );
        }
    }
    group.finish();
}

fn compose(c: &mut Criterion) {
    let x = generic_point(3);
    let o = oracle(&[1, 1, 2], Precision::Extended);
    let (f, g) = noncommuting_pair();
    let mut group = c.benchmark_group("compose_diag_w112");
    for k in [20i64, 60] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| o.compose_diag(black_box(k), &f, &g, &x).unwrap())
        });
    }
    group.finish();
}

fn fit(c: &mut Criterion) {
    let (ks, v) = synthetic_series();
    c.bench_function("fit_order_3", |b| {
        b.iter(|| fit_coefficients(black_box(&ks), &v, 3).unwrap())
    });
}

criterion_group!(benches, szego, compose, fit);
criterion_main!(benches);
