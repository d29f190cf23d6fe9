//! Decomposition and ranking micro-benchmarks: closed forms vs the generic
//! expectation path, the Jensen-gap route, AUROC, and curve construction.

use criterion::{criterion_group, criterion_main, Criterion};
use punc::{
    auroc, decompose, jensen_gap, loss_rejection_curve, rule_by_name, DecomposeMode,
};
use punc_bench::{random_ensembles, random_scores};
use std::hint::black_box;

fn bench_decompose(c: &mut Criterion) {
    let ensembles = random_ensembles(100, 10, 20, 7);
    let mut group = c.benchmark_group("decompose_k10_m20_x100");
    for rule_name in ["log", "brier", "zero_one"] {
        let rule = rule_by_name(rule_name).unwrap();
        for (label, mode) in [("closed", DecomposeMode::ClosedForm), ("generic", DecomposeMode::Generic)] {
            group.bench_function(format!("{rule_name}_{label}"), |b| {
                b.iter(|| {
                    for q in &ensembles {
                        black_box(decompose(rule.as_ref(), black_box(q), mode).unwrap());
                    }
                })
            });
        }
    }
    group.finish();
}

fn bench_jensen_gap(c: &mut Criterion) {
    let ensembles = random_ensembles(100, 10, 20, 11);
    let rule = rule_by_name("brier").unwrap();
    c.bench_function("jensen_gap_brier_k10_m20_x100", |b| {
        b.iter(|| {
            for q in &ensembles {
                black_box(jensen_gap(rule.as_ref(), black_box(q)).unwrap());
            }
        })
    });
}

fn bench_auroc(c: &mut Criterion) {
    let id = random_scores(5000, 13);
    let ood = random_scores(5000, 17);
    c.bench_function("auroc_5000_vs_5000", |b| {
        b.iter(|| black_box(auroc(black_box(&id), black_box(&ood)).unwrap()))
    });
}

fn bench_rejection_curve(c: &mut Criterion) {
    let losses = random_scores(10_000, 19);
    let uncertainties = random_scores(10_000, 23);
    c.bench_function("loss_rejection_curve_10k", |b| {
        b.iter(|| {
            black_box(
                loss_rejection_curve(black_box(&losses), black_box(&uncertainties)).unwrap(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_decompose,
    bench_jensen_gap,
    bench_auroc,
    bench_rejection_curve
);
criterion_main!(benches);
