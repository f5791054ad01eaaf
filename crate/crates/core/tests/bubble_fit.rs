mod common;

use hpi_core::bubble::{rms_of, FitParams};
use hpi_core::*;

use common::{ms, power_law_spec};

fn window_of(s: &IndexSeries) -> MonthRange {
    MonthRange::new(s.start(), s.end()).unwrap()
}

fn best(r: Result<FitResult>) -> FitResult {
    match r {
        Ok(f) => f,
        Err(Error::NoConvergence { best }) => *best,
        Err(e) => panic!("fit failed: {e}"),
    }
}

fn samples(s: &IndexSeries) -> (Vec<f64>, Vec<f64>) {
    (
        s.iter_stamped().map(|(m, _)| m.fractional_year()).collect(),
        s.values().to_vec(),
    )
}

fn noisy_power_law(seed: u64) -> IndexSeries {
    let mut spec = power_law_spec();
    spec.noise = 0.01;
    spec.seed = seed;
    generate(&spec).unwrap().0.series()[0].clone()
}

#[test]
fn exponential_is_recovered_exactly() {
    // 0.01 per month.
    let spec = ScenarioSpec::new(
        ms(1995, 1),
        120,
        TrendSpec::Exponential {
            a: 50.0,
            b: 10.0,
            mu: 0.12,
            bubble: None,
        },
    );
    let s = generate(&spec).unwrap().0.series()[0].clone();
    let fit = fit_model(ModelKind::Exponential, &s, window_of(&s), &FitOptions::default()).unwrap();
    assert!(fit.rms < 1e-10, "rms {}", fit.rms);
    let FitParams::Exponential { a, b, mu, t_ref } = fit.params else {
        panic!()
    };
    assert_eq!(t_ref, 1995.0);
    assert!((mu - 0.12).abs() < 1e-9, "{mu}");
    assert!((a - 50.0).abs() < 1e-6 && (b - 10.0).abs() < 1e-6, "{a} {b}");
}

#[test]
fn constant_series_gives_flat_exponential() {
    let s = IndexSeries::new("c", ms(2000, 1), vec![100.0; 48]).unwrap();
    let fit = fit_model(ModelKind::Exponential, &s, window_of(&s), &FitOptions::default()).unwrap();
    let FitParams::Exponential { b, .. } = fit.params else {
        panic!()
    };
    assert!(fit.rms < 1e-12, "rms {}", fit.rms);
    assert!(b.abs() < 1e-9, "b {b}");
}

#[test]
fn reported_fit_is_best_start_and_self_consistent() {
    let s = noisy_power_law(3);
    let fit = best(fit_model(
        ModelKind::PowerLaw,
        &s,
        window_of(&s),
        &FitOptions::default(),
    ));
    assert_eq!(fit.start_rms.len(), fit.n_starts);
    for r in &fit.start_rms {
        assert!(fit.rms <= r * (1.0 + 1e-12), "{} > {r}", fit.rms);
    }
    let (t, y) = samples(&s);
    let again = rms_of(&fit.params, &t, &y).unwrap();
    assert!((again - fit.rms).abs() <= 1e-12 * fit.rms);
    assert_eq!(fit.n_points, 120);
    assert!(fit.critical_time().unwrap() > s.end().fractional_year());
}

#[test]
fn time_shift_moves_only_the_critical_time() {
    let s = noisy_power_law(8);
    let delta = 17;
    let shifted = IndexSeries::new("s", s.start().add_months(delta), s.values().to_vec()).unwrap();
    let opts = FitOptions::default();
    let a = best(fit_model(ModelKind::PowerLaw, &s, window_of(&s), &opts));
    let b = best(fit_model(ModelKind::PowerLaw, &shifted, window_of(&shifted), &opts));
    let shift = (b.critical_time().unwrap() - a.critical_time().unwrap()) * 12.0;
    assert!((shift - delta as f64).abs() < 0.05, "t_c moved {shift} months");
    let (
        FitParams::PowerLaw {
            a: a1, b: b1, m: m1, ..
        },
        FitParams::PowerLaw {
            a: a2, b: b2, m: m2, ..
        },
    ) = (a.params, b.params)
    else {
        panic!()
    };
    for (x, y) in [(a1, a2), (b1, b2), (m1, m2)] {
        assert!((x - y).abs() <= 1e-6 * x.abs(), "{x} vs {y}");
    }
}

#[test]
fn scaling_levels_scales_linear_coefficients() {
    let s = noisy_power_law(12);
    let factor = 3.7;
    let scaled = s.scaled(factor).unwrap();
    let opts = FitOptions::default();
    let a = best(fit_model(ModelKind::PowerLaw, &s, window_of(&s), &opts));
    let b = best(fit_model(ModelKind::PowerLaw, &scaled, window_of(&scaled), &opts));
    let (
        FitParams::PowerLaw {
            a: a1,
            b: b1,
            m: m1,
            tc: t1,
        },
        FitParams::PowerLaw {
            a: a2,
            b: b2,
            m: m2,
            tc: t2,
        },
    ) = (a.params, b.params)
    else {
        panic!()
    };
    assert!((a1 * factor - a2).abs() <= 1e-6 * a2.abs());
    assert!((b1 * factor - b2).abs() <= 1e-6 * b2.abs());
    assert!((m1 - m2).abs() <= 1e-6 * m1.abs());
    assert!((t1 - t2).abs() * 12.0 < 1e-4);
}

#[test]
fn every_power_law_family_member_fits_a_power_law() {
    let s = generate(&power_law_spec()).unwrap().0.series()[0].clone();
    for kind in [
        ModelKind::TanhCrossover,
        ModelKind::ExpTimesPower,
        ModelKind::ExpPlusPower,
    ] {
        let fit = best(fit_model(kind, &s, window_of(&s), &FitOptions::default()));
        assert_eq!(fit.kind, kind);
        assert!(fit.rms < 1e-3, "{kind}: rms {}", fit.rms);
        assert_eq!(
            classify_regime(&fit.params).unwrap(),
            RegimeClass::SuperExponential,
            "{kind}"
        );
    }
}

#[test]
fn too_few_points_are_rejected() {
    let s = generate(&power_law_spec()).unwrap().0.series()[0].clone();
    let w = MonthRange::new(ms(1995, 1), ms(1995, 5)).unwrap();
    assert!(matches!(
        fit_model(ModelKind::PowerLaw, &s, w, &FitOptions::default()),
        Err(Error::InsufficientData(_))
    ));
    let w = MonthRange::new(ms(1995, 1), ms(1995, 9)).unwrap();
    assert!(matches!(
        fit_matched_crossover(&s, w, &FitOptions::default()),
        Err(Error::InsufficientData(_))
    ));
    let outside = MonthRange::new(ms(1990, 1), ms(1995, 9)).unwrap();
    assert!(matches!(
        fit_model(ModelKind::PowerLaw, &s, outside, &FitOptions::default()),
        Err(Error::Range(_))
    ));
}

#[test]
fn fit_result_serialises_named_fields() {
    let s = generate(&power_law_spec()).unwrap().0.series()[0].clone();
    let fit = fit_model(ModelKind::PowerLaw, &s, window_of(&s), &FitOptions::default()).unwrap();
    let json = serde_json::to_value(&fit).unwrap();
    assert_eq!(json["kind"], "power-law");
    assert_eq!(json["params"]["kind"], "power-law");
    assert!(json["params"]["t_c"].as_f64().unwrap() > 2005.0);
    assert_eq!(json["window"]["from"], "1995-01");
    assert_eq!(json["window"]["to"], "2004-12");
    let back: FitResult = serde_json::from_value(json).unwrap();
    assert_eq!(back, fit);
}
