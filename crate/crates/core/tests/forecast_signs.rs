mod common;

use hpi_core::*;
use proptest::prelude::*;

use common::{ms, seasonal_spec};

fn noisy_panel(regions: usize, seed: u64) -> PricePanel {
    let mut spec = seasonal_spec(regions, 96);
    spec.noise = 0.004;
    spec.seed = seed;
    generate(&spec).unwrap().0
}

#[test]
fn forecasts_scale_with_the_panel() {
    let panel = noisy_panel(5, 2);
    let training = MonthRange::new(ms(1990, 2), ms(1996, 12)).unwrap();
    for scheme in [Scheme::Pooled, Scheme::PerIndex] {
        let a = forecast_levels(&panel, "R02", scheme, training, 18).unwrap();
        let b = forecast_levels(&panel.scaled(2.5).unwrap(), "R02", scheme, training, 18).unwrap();
        for (x, y) in a.predicted_levels.iter().zip(&b.predicted_levels) {
            assert!((x * 2.5 / y - 1.0).abs() < 1e-12);
        }
        assert_eq!(a.months.first(), Some(&ms(1998, 1)));
        assert_eq!(a.months.len(), 18);
    }
}

#[test]
fn single_region_schemes_coincide() {
    let panel = noisy_panel(1, 4);
    let training = panel.span();
    let training = MonthRange::new(training.from.succ(), training.to).unwrap();
    let a = forecast_levels(&panel, "R01", Scheme::Pooled, training, 12).unwrap();
    let b = forecast_levels(&panel, "R01", Scheme::PerIndex, training, 12).unwrap();
    assert_eq!(a.predicted_levels, b.predicted_levels);
    assert_eq!(b.scheme, Scheme::PerIndex);
}

#[test]
fn bands_bracket_the_forecast_and_widen() {
    let panel = noisy_panel(4, 9);
    let f = forecast_levels(&panel, "R03", Scheme::Pooled, panel.span(), 24).unwrap();
    for k in 0..f.horizon {
        assert!(f.low_band[k] < f.predicted_levels[k] && f.predicted_levels[k] < f.high_band[k]);
        if k > 0 {
            let w = (f.high_band[k] / f.low_band[k]).ln();
            let prev = (f.high_band[k - 1] / f.low_band[k - 1]).ln();
            assert!(w >= prev);
        }
    }
}

#[test]
fn scheme_names_round_trip() {
    for s in [Scheme::Pooled, Scheme::PerIndex] {
        assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
    }
    assert!(matches!("weekly".parse::<Scheme>(), Err(Error::Domain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hit_ratio_is_hits_over_total(seed in 0u64..1000, train_regions in 2usize..6) {
        let panel = noisy_panel(train_regions + 3, seed);
        let growth = panel.growth().unwrap();
        let (train, test) = growth.split_at(train_regions);
        let table = sign_table(train, ms(1990, 2), ms(1995, 12)).unwrap();
        let months: Vec<MonthStamp> = (0..18).map(|k| ms(1996, 1).add_months(k)).collect();
        let pred = predict_signs(&table, &months);
        let eval = evaluate_signs(&pred, test).unwrap();
        prop_assert!((0.0..=1.0).contains(&eval.hit_ratio));
        prop_assert_eq!(eval.hit_ratio, eval.hits as f64 / eval.total as f64);
        prop_assert_eq!(eval.hits, eval.months.iter().map(|m| m.hits).sum::<usize>());
        for m in &eval.months {
            prop_assert_eq!(m.hits + m.misses + m.ties, test.len());
        }
    }
}
