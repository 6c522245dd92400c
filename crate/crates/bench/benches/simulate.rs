use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use cylsim::experiments::{run_bipartite_scan, run_pbwz, PbwzConfig, ScanConfig};
use cylsim::{
    emit_pair, respond, CoincidenceTally, DetectorConfig, HiddenState, ParticleKind, RngStream,
    SourceKind, StreamKey,
};

fn response(c: &mut Criterion) {
    let det = DetectorConfig::new(0.3, ParticleKind::PHOTON);
    let states: Vec<HiddenState> = (0..1024)
        .map(|i| HiddenState::new(i as f64 * 0.0061, (i as f64 * 0.618).fract()).unwrap())
        .collect();
    let mut g = c.benchmark_group("respond");
    g.throughput(Throughput::Elements(states.len() as u64));
    g.bench_function("photon_1024", |b| {
        b.iter(|| {
            states
                .iter()
                .map(|s| i32::from(respond(&det, black_box(s)).value()))
                .sum::<i32>()
        })
    });
    g.finish();
}

fn pair_loop(c: &mut Criterion) {
    const N: u64 = 100_000;
    let a = DetectorConfig::new(0.0, ParticleKind::PHOTON);
    let b = DetectorConfig::new(0.4, ParticleKind::PHOTON);
    let mut g = c.benchmark_group("emit_and_tally");
    g.throughput(Throughput::Elements(N));
    g.bench_function("antiparallel_100k", |bench| {
        bench.iter_batched(
            || RngStream::new(1, StreamKey::new(0, 0, 0)),
            |mut rng| {
                let mut tally = CoincidenceTally::new();
                for _ in 0..N {
                    let (x, y) = emit_pair(&mut rng, SourceKind::AntiparallelSinglet);
                    tally.record(respond(&a, &x), respond(&b, &y));
                }
                tally
            },
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn experiments(c: &mut Criterion) {
    let mut g = c.benchmark_group("experiments");
    g.sample_size(10);
    let scan = ScanConfig {
        kind: ParticleKind::PHOTON,
        source: SourceKind::AntiparallelSinglet,
        angles: vec![0.0, 0.5, 1.0],
        trials: 100_000,
        seed: 1,
    };
    g.bench_function("bipartite_3x100k", |b| b.iter(|| run_bipartite_scan(&scan).unwrap()));
    let swap = PbwzConfig {
        groups: 500,
        repetitions: 8,
        ..PbwzConfig::default()
    };
    g.bench_function("swap_13x8x500", |b| b.iter(|| run_pbwz(&swap).unwrap()));
    g.finish();
}

criterion_group!(benches, response, pair_loop, experiments);
criterion_main!(benches);
