mod common;

use hpi_core::phase::{ode_solution, regress_points, RegressionScope};
use hpi_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{ms, rk_blowup};

#[test]
fn closed_form_blow_up_matches_runge_kutta() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let alpha = rng.random_range(1e-5..1e-3);
        let beta = rng.random_range(1e-3..5e-2);
        let p0 = rng.random_range(1.05..4.0) * beta / alpha;
        let closed = ode_singularity_time(alpha, beta, p0, 0.0)
            .unwrap()
            .expect("above threshold");
        let rk = rk_blowup(alpha, beta, p0, 10.0 * closed).expect("numerical solution diverges");
        // RK stops at p = 1e9, where the remaining time is about 1/(alpha 1e9).
        let tail = 1.0 / (alpha * 1e9);
        let rel = (rk + tail - closed).abs() / closed;
        assert!(rel < 1e-4, "alpha {alpha} beta {beta} p0 {p0}: {rk} vs {closed}");
        checked += 1;
    }
}

#[test]
fn closed_form_solution_satisfies_the_equation() {
    let (alpha, beta, p0) = (2e-4, 0.01, 80.0);
    let tc = ode_singularity_time(alpha, beta, p0, 3.0).unwrap().unwrap();
    for k in 0..50 {
        let t = 3.0 + (tc - 3.0) * k as f64 / 51.0;
        let p = ode_solution(alpha, beta, p0, 3.0, t).unwrap();
        let h = 1e-5;
        let dp = (ode_solution(alpha, beta, p0, 3.0, t + h).unwrap()
            - ode_solution(alpha, beta, p0, 3.0, t - h).unwrap())
            / (2.0 * h);
        let rhs = alpha * p * p - beta * p;
        assert!((dp - rhs).abs() <= 1e-5 * rhs.abs().max(1.0), "t {t}: {dp} vs {rhs}");
    }
    assert_eq!(ode_solution(alpha, beta, p0, 3.0, tc + 1.0).unwrap(), f64::INFINITY);
    assert_eq!(
        ode_singularity_time(alpha, beta, 0.5 * beta / alpha, 0.0).unwrap(),
        None
    );
    assert!(matches!(
        ode_singularity_time(-1.0, beta, p0, 0.0),
        Err(Error::Domain(_))
    ));
}

/// Panel whose monthly growth is exactly `alpha p(t) - beta` with `p(t)` the
/// same month's level: `p_t = p_{t-1} exp(alpha p_t - beta)`, solved by
/// fixed-point iteration.
fn implicit_panel(alpha: f64, beta: f64, starts: &[f64], n: usize) -> PricePanel {
    let series = starts
        .iter()
        .enumerate()
        .map(|(r, &p0)| {
            let mut v = vec![p0];
            for _ in 1..n {
                let prev = *v.last().unwrap();
                let mut p = prev;
                for _ in 0..200 {
                    p = prev * (alpha * p - beta).exp();
                }
                v.push(p);
            }
            IndexSeries::new(format!("r{r}"), ms(2000, 1), v).unwrap()
        })
        .collect();
    PricePanel::new(series).unwrap()
}

#[test]
fn exact_linear_relation_is_recovered() {
    let (alpha, beta) = (2e-5, 0.007);
    let panel = implicit_panel(alpha, beta, &[380.0, 420.0, 500.0, 610.0], 60);
    let reg = regress_growth_on_price(&panel, None).unwrap();
    assert!((reg.pooled.alpha - alpha).abs() < 1e-12, "{}", reg.pooled.alpha);
    assert!((reg.pooled.beta - beta).abs() < 1e-10, "{}", reg.pooled.beta);
    assert!((reg.pooled.correlation - 1.0).abs() < 1e-9);
    assert!((reg.pooled.slope_per_100() - 100.0 * alpha).abs() < 1e-10);
    for r in &reg.per_region {
        assert!((r.alpha - alpha).abs() < 1e-10);
    }
    assert!(reg.region_correlation_std < 1e-9);
}

#[test]
fn pooled_regression_is_regression_of_concatenated_points() {
    let mut spec = common::power_law_spec();
    spec.n_regions = 5;
    spec.noise = 0.02;
    let (panel, _) = generate(&spec).unwrap();
    let seg = PeriodSegmentation::new(vec![ms(1998, 1), ms(2001, 7)]).unwrap();
    let reg = regress_growth_on_price(&panel, Some(&seg)).unwrap();

    let mut pairs = Vec::new();
    for s in panel.series() {
        let g = compute_growth(s).unwrap();
        for (m, v) in g.iter_stamped() {
            pairs.push((s.at(m).unwrap(), v));
        }
    }
    let oracle = regress_points(&pairs, RegressionScope::Pooled).unwrap();
    assert_eq!(reg.pooled, oracle);
    assert_eq!(reg.pooled.n, 5 * 119);

    assert_eq!(reg.per_period.len(), 3);
    let counts: usize = reg.per_period.iter().map(|p| p.regression.as_ref().unwrap().n).sum();
    assert_eq!(counts, reg.pooled.n);
    assert_eq!(reg.per_period[1].label, seg.label(1));
    assert_eq!(reg.per_region.len(), 5);
    assert_eq!(reg.per_region[2].scope, RegressionScope::Region("R03".into()));
}

#[test]
fn constant_prices_cannot_be_regressed() {
    let s = IndexSeries::new("flat", ms(2000, 1), vec![100.0; 30]).unwrap();
    let panel = PricePanel::new(vec![s]).unwrap();
    assert!(matches!(
        regress_growth_on_price(&panel, None),
        Err(Error::DegenerateRegression(_))
    ));
    assert!(matches!(
        regress_points(&[(1.0, 0.1), (2.0, 0.2)], RegressionScope::Pooled),
        Err(Error::InsufficientData(_))
    ));
}
