use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use coemap::corpus::{Corpus, YearRange};
use coemap::excellence::{run_pipeline_with, PipelineConfig};
use coemap::par::Execution;
use coemap::synth::{generate, SynthSpec};

fn corpus(researchers: usize, publications: usize) -> Corpus {
    let spec = SynthSpec {
        researchers,
        publications,
        planted: 3,
        macro_areas: 6,
        researchers_per_unit: 16,
        ..SynthSpec::default()
    };
    let synth = generate(&spec).expect("feasible bench spec");
    Corpus::from_data(synth.data, YearRange::default()).expect("valid synthetic corpus")
}

fn pipeline(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(20);
    for (researchers, publications) in [(200, 1_000), (2_000, 10_000)] {
        let corpus = corpus(researchers, publications);
        for (name, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(name, publications), &corpus, |b, corpus| {
                b.iter(|| run_pipeline_with(corpus, &cfg, exec).expect("pipeline runs"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
