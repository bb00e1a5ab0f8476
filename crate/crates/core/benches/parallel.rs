use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use expid::par::Exec;
use expid::scenario::config::{preset_source, ScenarioConfig};
use expid::scenario::sweep;
use std::hint::black_box;

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn lmi_sampling(c: &mut Criterion) {
    let cfg = ScenarioConfig::preset("shank").unwrap();
    let map = cfg.extended_mapping().unwrap();
    let samples = cfg.param_box().unwrap().unwrap().samples(6, 2000, 7);
    let mut g = c.benchmark_group("lmi_min_eig");
    for (name, exec) in PATHS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &samples, |b, s| {
            b.iter(|| black_box(map.lmi_min_eig(s, exec).unwrap()))
        });
    }
    g.finish();
}

fn short_sweep(c: &mut Criterion) {
    let mut base = ScenarioConfig::merged_value(preset_source("class1_synthetic").unwrap()).unwrap();
    expid::scenario::config::set_path(&mut base, "integrator.t_end", "2.0").unwrap();
    expid::scenario::config::set_path(&mut base, "estimator.switch_on", "1.0").unwrap();
    let values: Vec<String> = ["1e4", "1e5", "1e6", "1e7"].iter().map(|s| s.to_string()).collect();
    let mut g = c.benchmark_group("sweep_gamma_w");
    g.sample_size(10);
    for (name, exec) in PATHS {
        g.bench_function(name, |b| {
            b.iter(|| black_box(sweep(&base, "estimator.gamma_w", &values, None, exec).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, lmi_sampling, short_sweep);
criterion_main!(benches);
