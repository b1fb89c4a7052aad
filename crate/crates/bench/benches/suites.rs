use criterion::{criterion_group, criterion_main, Criterion};

use freeharm_core::suites::{run_suite, Suite, SuiteConfig};

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite_10_trials");
    group.sample_size(10);
    for s in Suite::ALL {
        group.bench_function(s.to_string(), |b| {
            b.iter(|| run_suite(s, &SuiteConfig::new(10, 1)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, suites);
criterion_main!(benches);
