use std::hint::black_box;

use basketsvm::datagen::{generate, split_train_test};
use basketsvm::pipeline::Normalizer;
use basketsvm::{fit_dcd, ClassWeights, Dataset, DriftSpec, SolverOptions, SvmParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_cold_fit(c: &mut Criterion) {
    let stream = generate(&DriftSpec::new(Dataset::LinearShift, 1)).unwrap();
    let (train, _) = split_train_test(&stream.samples, 1000).unwrap();
    let train = Normalizer::fit(&train).unwrap().apply_all(&train).unwrap();
    let mut group = c.benchmark_group("fit_dcd_cold");
    for n in [100usize, 500, 1000] {
        let data = &train[train.len() - n..];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            let params = SvmParams::new(1.0, ClassWeights::EQUAL).unwrap();
            let opts = SolverOptions::offline(n, 1.0);
            b.iter(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                black_box(fit_dcd(black_box(data), params, None, &opts, &mut rng).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cold_fit);
criterion_main!(benches);
