use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use uvnlos::exec::{self, Execution};
use uvnlos::mcsim::{empirical_error_rate, SimConfig};
use uvnlos::modem::{db_to_linear, error_rate, Method, Modulation};
use uvnlos::scenario::{run_ber_sweep, RunConfig};
use uvnlos::{build_channel, NlosChannel};

fn strong() -> NlosChannel {
    build_channel(1.0, 1.0, (6.99, 1.05), (4.59, 1.23)).unwrap()
}

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Auto), ("sequential", Execution::Sequential)];

fn ber_grid(c: &mut Criterion) {
    let ch = strong();
    let points: Vec<(f64, Modulation)> = (0..=8)
        .flat_map(|k| Modulation::ALL.map(|m| (5.0 * k as f64, m)))
        .collect();
    let mut g = c.benchmark_group("meijer_ber_grid");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec::map(mode, &points, |&(db, m)| {
                    error_rate(&ch, db_to_linear(db), m, Method::Meijer).unwrap().probability
                })
            })
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let ch = strong();
    let cfg = SimConfig { sample_count: 200_000, ..SimConfig::default() };
    let mut g = c.benchmark_group("mc_200k");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| empirical_error_rate(&ch, black_box(100.0), Modulation::Bpsk, &cfg, mode).unwrap())
        });
    }
    g.finish();
}

fn scenario_sweep(c: &mut Criterion) {
    let cfg = RunConfig::parse(
        "[turbulence]\ncn2 = 1e-14, 1e-13\n[snr]\ngrid = 0, 40, 5\n[methods]\nlist = meijer, series:30\n",
    )
    .unwrap();
    let mut g = c.benchmark_group("ber_sweep_config");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_ber_sweep(&cfg, mode).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, ber_grid, monte_carlo, scenario_sweep);
criterion_main!(benches);
