use criterion::{criterion_group, criterion_main, Criterion};
use hpi_core::synth::{SeasonalSpec, YearFactors};
use hpi_core::*;
use std::hint::black_box;

fn ms(y: i32, m: u32) -> MonthStamp {
    MonthStamp::new(y, m).unwrap()
}

fn power_law(noise: f64) -> IndexSeries {
    let start = ms(1995, 1);
    let mut spec = ScenarioSpec::new(
        start,
        120,
        TrendSpec::PowerLaw {
            a: 300.0,
            b: -50.0,
            m: 0.5,
            tc: start.add_months(119).fractional_year() + 1.0,
        },
    );
    spec.noise = noise;
    spec.seed = 3;
    generate(&spec).unwrap().0.series()[0].clone()
}

fn seasonal_panel() -> PricePanel {
    let mut spec = ScenarioSpec::new(
        ms(1990, 1),
        192,
        TrendSpec::Exponential {
            a: 0.0,
            b: 100.0,
            mu: 0.04,
            bubble: None,
        },
    );
    spec.n_regions = 20;
    spec.noise = 0.003;
    spec.smoothing = true;
    spec.seasonal = Some(SeasonalSpec {
        h: [-0.4, -0.6, 0.3, -0.2, 0.9, 0.1, -0.3, 0.4, -0.5, -0.1, 0.2, 0.25].map(|v| v * 0.01),
        f: YearFactors::Constant(1.0),
        j: YearFactors::Constant(0.0),
    });
    generate(&spec).unwrap().0
}

fn fitting(c: &mut Criterion) {
    let clean = power_law(0.0);
    let noisy = power_law(0.01);
    let window = MonthRange::new(clean.start(), clean.end()).unwrap();
    let options = FitOptions::default();
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("power-law/noiseless", |b| {
        b.iter(|| fit_model(ModelKind::PowerLaw, black_box(&clean), window, &options))
    });
    group.bench_function("power-law/noisy", |b| {
        b.iter(|| fit_model(ModelKind::PowerLaw, black_box(&noisy), window, &options))
    });
    group.bench_function("exp-plus-power/noisy", |b| {
        b.iter(|| fit_model(ModelKind::ExpPlusPower, black_box(&noisy), window, &options))
    });
    group.finish();
}

fn seasonality(c: &mut Criterion) {
    let panel = seasonal_panel();
    let growth = panel.growth().unwrap();
    c.bench_function("periodogram/x4", |b| b.iter(|| periodogram(black_box(&growth[0]), 4)));
    c.bench_function("bilinear/20-regions", |b| {
        b.iter(|| decompose_bilinear(black_box(&growth), 1990..=2005))
    });
    c.bench_function("sign-table/20-regions", |b| {
        b.iter(|| sign_table(black_box(&growth), ms(1990, 2), ms(2005, 12)))
    });
}

fn synthesis(c: &mut Criterion) {
    let mut spec = ScenarioSpec::new(
        ms(1990, 1),
        240,
        TrendSpec::Exponential {
            a: 0.0,
            b: 100.0,
            mu: 0.04,
            bubble: None,
        },
    );
    spec.n_regions = 100;
    spec.noise = 0.01;
    c.bench_function("synth/100x240", |b| b.iter(|| generate(black_box(&spec))));
}

criterion_group!(benches, fitting, seasonality, synthesis);
criterion_main!(benches);
