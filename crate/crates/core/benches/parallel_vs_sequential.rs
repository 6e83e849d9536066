use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bracketlab_core::experiment::{simulate_dataset_with, Composition, PopulationSpec, TreatmentCounts};
use bracketlab_core::{Execution, Treatment};

fn spec(per_treatment: usize) -> PopulationSpec {
    PopulationSpec {
        counts: TreatmentCounts::uniform(&Treatment::ALL, per_treatment),
        composition: Composition::NarrowShare(0.7),
        tremble: 0.02,
        seed: 42,
        ..PopulationSpec::default()
    }
}

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_dataset");
    group.sample_size(20);
    for n in [100, 500] {
        let spec = spec(n);
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, n * 6), &spec, |b, spec| {
                b.iter(|| simulate_dataset_with(spec, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, simulate);
criterion_main!(benches);
