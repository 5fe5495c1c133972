use cldmap_core::{compute_local_field_with, AnalysisConfig, Execution, GrayImage, Normalization};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_image(size: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(size, size, |_, _| rng.random()).unwrap()
}

fn stripes(size: usize) -> GrayImage {
    GrayImage::from_fn(size, size, |_, c| if c % 8 < 4 { 100 } else { 150 }).unwrap()
}

fn local_field(c: &mut Criterion) {
    let count = AnalysisConfig::new(0.3, Normalization::Count).unwrap();
    let narrow = AnalysisConfig::new(0.1, Normalization::Count).unwrap();
    let mut group = c.benchmark_group("local_field");
    group.sample_size(10);
    for size in [64usize, 128, 256] {
        let scenes = [
            ("random", random_image(size, 11), count),
            ("stripes", stripes(size), narrow),
        ];
        for (name, img, config) in &scenes {
            for (mode, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
                group.bench_with_input(BenchmarkId::new(format!("{name}/{mode}"), size), img, |b, img| {
                    b.iter(|| compute_local_field_with(black_box(img), config, execution).unwrap())
                });
            }
        }
    }
    group.finish();
}

criterion_group!(benches, local_field);
criterion_main!(benches);
