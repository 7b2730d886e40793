use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hypecast_core::highlight::CueEvaluator;
use hypecast_core::scheduler::{annotate_many, annotate_many_sequential};
use hypecast_core::synth::{generate_trace, to_events};
use hypecast_core::{EngineConfig, RoundConfig};

fn cues(c: &mut Criterion) {
    let round = RoundConfig::default();
    // Long enough to span many rounds, which is the unit of parallel work.
    let frames = generate_trace(1800.0, 1, &round);
    let evaluator = CueEvaluator::default();
    let mut group = c.benchmark_group("evaluate_batch");
    group.bench_function(BenchmarkId::new("parallel", frames.len()), |b| {
        b.iter(|| evaluator.evaluate_batch(black_box(&frames)).unwrap())
    });
    group.bench_function(BenchmarkId::new("sequential", frames.len()), |b| {
        b.iter(|| evaluator.evaluate_batch_sequential(black_box(&frames)).unwrap())
    });
    group.finish();
}

fn annotate(c: &mut Criterion) {
    let config = EngineConfig::default();
    let streams: Vec<_> = (0..32)
        .map(|seed| to_events(&generate_trace(60.0, seed, &config.round)))
        .collect();
    let mut group = c.benchmark_group("annotate_many");
    group.sample_size(20);
    group.bench_function(BenchmarkId::new("parallel", streams.len()), |b| {
        b.iter(|| annotate_many(black_box(&streams), &config))
    });
    group.bench_function(BenchmarkId::new("sequential", streams.len()), |b| {
        b.iter(|| annotate_many_sequential(black_box(&streams), &config))
    });
    group.finish();
}

criterion_group!(benches, cues, annotate);
criterion_main!(benches);
