use std::hint::black_box;

use broadcast_recon::alice_bob::{find_dominated, run_alice, sample_instance, Reductions};
use broadcast_recon::par::{map_indexed, map_indexed_seq};
use broadcast_recon::population_dynamics::{reduced_step_sample, EmpiricalSource};
use broadcast_recon::rng::RngStream;
use broadcast_recon::star_measures::StarMeasure;
use broadcast_recon::tree_model::OffspringLaw;
use criterion::{criterion_group, criterion_main, Criterion};

fn population_step(c: &mut Criterion) {
    let law = OffspringLaw::Poisson { mean: 30.0 };
    let pop = StarMeasure::frozen(10);
    let src = EmpiricalSource::new(&pop).unwrap();
    let stream = RngStream::new(1);
    let draw = |i: usize| reduced_step_sample(&src, &law, &mut stream.substream(i as u64).rng()).value;
    let mut g = c.benchmark_group("population_step_20k");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(map_indexed(20_000, draw))));
    g.bench_function("sequential", |b| b.iter(|| black_box(map_indexed_seq(20_000, draw))));
    g.finish();
}

fn alice_runs(c: &mut Criterion) {
    let law = OffspringLaw::Poisson { mean: 8.0 };
    let s = RngStream::new(2);
    let mu = find_dominated(3, &law, 1.0, 10, 5000, s.labelled("target")).unwrap();
    let red = Reductions::new(&mu, &law, 5000, 3.0 / 5000f64.sqrt(), s.labelled("image")).unwrap();
    let run = |i: usize| {
        let inst = sample_instance(3, &law, 3, None, s.substream(i as u64)).unwrap();
        run_alice(&inst, &red, false).unwrap().belief.max()
    };
    let mut g = c.benchmark_group("alice_depth3_500");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(map_indexed(500, run))));
    g.bench_function("sequential", |b| b.iter(|| black_box(map_indexed_seq(500, run))));
    g.finish();
}

criterion_group!(benches, population_step, alice_runs);
criterion_main!(benches);
