use std::path::Path;

use hpi_core::phase::phase_points;
use hpi_core::seasonality::{mean_periodogram, sign_table_with};
use hpi_core::*;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::Command;
use crate::error::{CliError, CliResult};
use crate::output::{file_stem, Output};

pub fn read_panel(path: &Path) -> CliResult<PricePanel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("cannot read panel {}: {e}", path.display())))?;
    load_panel(text.as_bytes(), PanelFormat::sniff(&text))
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn check_exists(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::User(format!("no such file: {}", path.display())))
    }
}

/// Validates every input path named by the command.
pub fn validate_paths(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Ingest { panel, extension } => {
            check_exists(&panel.input)?;
            extension.as_deref().map(check_exists).transpose()?;
        }
        Command::Growth { panel, .. }
        | Command::Fit { panel, .. }
        | Command::Phase { panel, .. }
        | Command::Spectrum { panel, .. }
        | Command::Profile { panel, .. }
        | Command::Decompose { panel, .. }
        | Command::Signs { panel, .. }
        | Command::Forecast { panel, .. } => check_exists(&panel.input)?,
        Command::Evaluate { panel, realized, .. } => {
            check_exists(&panel.input)?;
            check_exists(realized)?;
        }
        Command::Synth { spec, .. } => check_exists(spec)?,
        Command::Ode { .. } => {}
    }
    Ok(())
}

/// Runs one subcommand, writing files through `out` and returning the
/// summary lines for stdout.
pub fn run(cmd: &Command, out: &mut Output) -> CliResult<Vec<String>> {
    match cmd {
        Command::Ingest { panel, extension } => ingest(&panel.input, extension.as_deref(), out),
        Command::Growth { panel, window } => growth(&read_panel(&panel.input)?, *window, out),
        Command::Fit {
            panel,
            model,
            window,
            seed,
            starts,
        } => {
            let options = FitOptions {
                n_starts: *starts,
                seed: *seed,
                ..FitOptions::default()
            };
            fit(&read_panel(&panel.input)?, *model, *window, &options, out)
        }
        Command::Phase { panel, segments } => phase(&read_panel(&panel.input)?, segments, out),
        Command::Ode {
            alpha,
            beta,
            p0,
            t0,
            samples,
        } => ode(*alpha, *beta, *p0, *t0, *samples, out),
        Command::Spectrum {
            panel,
            window,
            oversample,
            max_frequency,
        } => spectrum(&read_panel(&panel.input)?, *window, *oversample, *max_frequency, out),
        Command::Profile {
            panel,
            window,
            train_to,
        } => {
            let p = read_panel(&panel.input)?;
            let w = growth_window(&p, *window, *train_to)?;
            profile(&p, w, out)
        }
        Command::Decompose { panel, years } => decompose(&read_panel(&panel.input)?, years.as_deref(), out),
        Command::Signs {
            panel,
            window,
            to,
            label,
        } => {
            let p = read_panel(&panel.input)?;
            let w = growth_window(&p, *window, *to)?;
            signs(&p, w, *label, out)
        }
        Command::Forecast {
            panel,
            scheme,
            window,
            train_to,
            horizon,
        } => {
            let p = read_panel(&panel.input)?;
            let w = growth_window(&p, *window, *train_to)?;
            forecast(&p, *scheme, w, *horizon, out)
        }
        Command::Evaluate {
            panel,
            realized,
            to,
            window,
            label,
        } => evaluate(
            &read_panel(&panel.input)?,
            &read_panel(realized)?,
            *to,
            *window,
            *label,
            out,
        ),
        Command::Synth { spec, seed } => synth(spec, *seed, out),
    }
}

/// Growth-month window: explicit, or from the first growth month to `to`,
/// or the whole growth span.
fn growth_window(panel: &PricePanel, window: Option<MonthRange>, to: Option<MonthStamp>) -> CliResult<MonthRange> {
    let span = panel.span();
    let from = span.from.succ();
    Ok(match (window, to) {
        (Some(w), _) => w,
        (None, Some(to)) => MonthRange::new(from, to)?,
        (None, None) => MonthRange::new(from, span.to)?,
    })
}

fn ingest(input: &Path, extension: Option<&Path>, out: &mut Output) -> CliResult<Vec<String>> {
    let mut panel = read_panel(input)?;
    if let Some(ext) = extension {
        panel = panel.extended_with(&read_panel(ext)?)?;
    }
    let mut csv = out.header().into_bytes();
    write_panel(&mut csv, &panel, PanelFormat::default())?;
    let body = String::from_utf8(csv).map_err(|e| CliError::Internal(e.to_string()))?;
    out.text_raw("ingest.csv", &body)?;
    Ok(panel
        .series()
        .iter()
        .map(|s| format!("{}\t{}\t{}\t{} months", s.region(), s.start(), s.end(), s.len()))
        .collect())
}

fn growth(panel: &PricePanel, window: Option<MonthRange>, out: &mut Output) -> CliResult<Vec<String>> {
    let mut all = Vec::new();
    let mut summary = Vec::new();
    for s in panel.series() {
        let mut g = compute_growth(s)?;
        if let Some(w) = window {
            g = g.window(w.from, w.to)?;
        }
        let rows: Vec<Vec<String>> = g
            .iter_stamped()
            .map(|(m, v)| vec![m.to_string(), s.at(m).expect("inside span").to_string(), v.to_string()])
            .collect();
        out.table(
            &format!("growth_{}.tsv", file_stem(s.region())),
            &["month", "level", "growth"],
            &rows,
        )?;
        summary.push(format!("{}\t{} growth values from {}", s.region(), g.len(), g.start()));
        all.push(g);
    }
    let span = MonthRange::new(
        all.iter().map(|g| g.start()).min().expect("panel is non-empty"),
        all.iter().map(|g| g.end()).max().expect("panel is non-empty"),
    )?;
    let mut columns = vec!["month"];
    columns.extend(panel.regions());
    let rows: Vec<Vec<String>> = span
        .iter()
        .map(|m| {
            std::iter::once(m.to_string())
                .chain(all.iter().map(|g| g.at(m).map(|v| v.to_string()).unwrap_or_default()))
                .collect()
        })
        .collect();
    out.table("growth.tsv", &columns, &rows)?;
    Ok(summary)
}

#[derive(Serialize)]
struct FitRecord {
    region: String,
    fit: Option<FitResult>,
    error: Option<String>,
}

fn fit(
    panel: &PricePanel,
    model: ModelKind,
    window: Option<MonthRange>,
    options: &FitOptions,
    out: &mut Output,
) -> CliResult<Vec<String>> {
    let results: Vec<(String, hpi_core::Result<FitResult>)> = panel
        .series()
        .par_iter()
        .map(|s| {
            let w = window.unwrap_or_else(|| s.span());
            let r = match model {
                ModelKind::MatchedCrossover => fit_matched_crossover(s, w, options),
                kind => fit_model(kind, s, w, options),
            };
            // A non-converged fit still carries the best parameters found.
            let r = match r {
                Err(Error::NoConvergence { best }) => Ok(*best),
                other => other,
            };
            (s.region().to_string(), r)
        })
        .collect();

    let mut records = Vec::new();
    let mut summary = Vec::new();
    let mut first_error = None;
    for (region, r) in results {
        match r {
            Ok(fit) => {
                out.json(&format!("fit_{}.json", file_stem(&region)), &fit)?;
                let tc = fit
                    .critical_time()
                    .map(|t| format!("{t:.4}"))
                    .unwrap_or_else(|| "-".into());
                summary.push(format!(
                    "{region}\t{}\trms {:.6}\tt_c {tc}\t{}",
                    fit.kind,
                    fit.rms,
                    if fit.converged { "converged" } else { "not converged" }
                ));
                records.push(FitRecord {
                    region,
                    fit: Some(fit),
                    error: None,
                });
            }
            Err(e) => {
                summary.push(format!("{region}\terror: {e}"));
                records.push(FitRecord {
                    region,
                    fit: None,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    out.json("fit.json", &records)?;
    match first_error {
        Some(e) if records.iter().all(|r| r.fit.is_none()) => Err(e.into()),
        _ => Ok(summary),
    }
}

fn parse_segments(text: &str) -> CliResult<PeriodSegmentation> {
    if text.trim().eq_ignore_ascii_case("none") {
        return Ok(PeriodSegmentation::whole());
    }
    let months = text
        .split(',')
        .map(|s| s.trim().parse::<MonthStamp>())
        .collect::<hpi_core::Result<Vec<_>>>()?;
    Ok(PeriodSegmentation::new(months)?)
}

#[derive(Serialize)]
struct RegressionRecord {
    scope: String,
    /// Growth per month per index unit.
    alpha: f64,
    /// The same slope per 100 index units.
    slope_per_100: f64,
    beta: f64,
    correlation: f64,
    n: usize,
}

fn regression_record(scope: String, r: &GrowthPriceRegression) -> RegressionRecord {
    RegressionRecord {
        scope,
        alpha: r.alpha,
        slope_per_100: r.slope_per_100(),
        beta: r.beta,
        correlation: r.correlation,
        n: r.n,
    }
}

#[derive(Serialize)]
struct PhaseReport<'a> {
    segmentation: &'a PeriodSegmentation,
    regressions: &'a PhaseRegressions,
    summary: Vec<RegressionRecord>,
}

fn phase(panel: &PricePanel, segments: &str, out: &mut Output) -> CliResult<Vec<String>> {
    let seg = parse_segments(segments)?;
    let points = phase_points(panel, &seg)?;
    let segmentation = (seg.n_periods() > 1).then_some(&seg);
    let reg = regress_growth_on_price(panel, segmentation)?;

    let row = |pt: &hpi_core::phase::PhasePoint| {
        vec![
            seg.label(pt.period),
            pt.region.clone(),
            pt.month.to_string(),
            pt.p.to_string(),
            pt.g.to_string(),
        ]
    };
    let columns = ["period", "region", "month", "p", "g"];
    for region in panel.regions() {
        let rows: Vec<Vec<String>> = points.iter().filter(|pt| pt.region == region).map(row).collect();
        out.table(&format!("phase_{}.tsv", file_stem(region)), &columns, &rows)?;
    }
    out.table(
        "phase_points.tsv",
        &columns,
        &points.iter().map(row).collect::<Vec<_>>(),
    )?;

    let mut summary_records = vec![regression_record("pooled".into(), &reg.pooled)];
    for p in &reg.per_period {
        if let Some(r) = &p.regression {
            summary_records.push(regression_record(p.label.clone(), r));
        }
    }
    for (region, r) in panel.regions().zip(&reg.per_region) {
        summary_records.push(regression_record(region.to_string(), r));
    }
    let lines = summary_records
        .iter()
        .map(|r| {
            format!(
                "{}\talpha {:.4e}\t({:.5} per 100)\tbeta {:.4e}\tr {:.3}\tn {}",
                r.scope, r.alpha, r.slope_per_100, r.beta, r.correlation, r.n
            )
        })
        .collect();
    out.json(
        "phase.json",
        &PhaseReport {
            segmentation: &seg,
            regressions: &reg,
            summary: summary_records,
        },
    )?;
    Ok(lines)
}

#[derive(Serialize)]
struct OdeReport {
    alpha: f64,
    beta: f64,
    p0: f64,
    t0: f64,
    critical_time: Option<f64>,
}

fn ode(alpha: f64, beta: f64, p0: f64, t0: f64, samples: usize, out: &mut Output) -> CliResult<Vec<String>> {
    let tc = ode_singularity_time(alpha, beta, p0, t0)?;
    // Without a singularity, sample ten relaxation times.
    let end = tc.unwrap_or(t0 + 10.0 / beta);
    let rows = (0..samples)
        .map(|k| {
            let t = t0 + (end - t0) * k as f64 / samples as f64;
            Ok(vec![
                t.to_string(),
                hpi_core::phase::ode_solution(alpha, beta, p0, t0, t)?.to_string(),
            ])
        })
        .collect::<hpi_core::Result<Vec<_>>>()?;
    out.table("ode.tsv", &["t", "p"], &rows)?;
    out.json(
        "ode.json",
        &OdeReport {
            alpha,
            beta,
            p0,
            t0,
            critical_time: tc,
        },
    )?;
    Ok(vec![match tc {
        Some(t) => format!("critical time {t:.4} ({:.4} after t0)", t - t0),
        None => "no finite-time singularity: p0 <= beta/alpha".into(),
    }])
}

fn spectrum_rows(p: &Periodogram, max_frequency: Option<f64>) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = p
        .frequencies
        .iter()
        .zip(&p.power)
        .map(|(f, v)| vec![f.to_string(), v.to_string(), "0".into()])
        .collect();
    if let Some(max) = max_frequency {
        rows.extend(
            p.aliased_extension(max)
                .into_iter()
                .map(|(f, v)| vec![f.to_string(), v.to_string(), "1".into()]),
        );
    }
    rows
}

fn spectrum(
    panel: &PricePanel,
    window: Option<MonthRange>,
    oversample: usize,
    max_frequency: Option<f64>,
    out: &mut Output,
) -> CliResult<Vec<String>> {
    let columns = ["frequency", "power", "aliased"];
    let mut parts = Vec::new();
    let mut summary = Vec::new();
    for s in panel.series() {
        let mut g = compute_growth(s)?;
        if let Some(w) = window {
            g = g.window(w.from, w.to)?;
        }
        let p = periodogram(&g, oversample)?;
        out.table(
            &format!("spectrum_{}.tsv", file_stem(s.region())),
            &columns,
            &spectrum_rows(&p, max_frequency),
        )?;
        let (f, v) = p.peak();
        summary.push(format!("{}\tpeak {f:.4} cycles/year\tpower {v:.4e}", s.region()));
        parts.push(p);
    }
    let mean = mean_periodogram("mean", &parts)?;
    out.table("spectrum.tsv", &columns, &spectrum_rows(&mean, max_frequency))?;
    let (f, _) = mean.peak();
    summary.push(format!("mean\tpeak {f:.4} cycles/year"));
    Ok(summary)
}

fn profile(panel: &PricePanel, window: MonthRange, out: &mut Output) -> CliResult<Vec<String>> {
    let growth = panel.growth()?;
    let p = month_profile(&growth, window.from, window.to)?;
    let rows: Vec<Vec<String>> = (0..12)
        .map(|m| {
            vec![
                MonthProfile::month_name(m).to_string(),
                p.mean[m].to_string(),
                p.std[m].to_string(),
                p.counts[m].to_string(),
            ]
        })
        .collect();
    out.table("profile.tsv", &["month", "mean", "std", "count"], &rows)?;
    out.json("profile.json", &p)?;
    Ok(vec![format!(
        "pooled\t{window}\tpeak month {}",
        MonthProfile::month_name(p.peak_month() as usize - 1)
    )])
}

fn parse_years(text: &str) -> CliResult<std::ops::RangeInclusive<i32>> {
    let bad = || CliError::User(format!("invalid years {text:?}, expected FIRST:LAST"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let (a, b): (i32, i32) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    if a > b {
        return Err(bad());
    }
    Ok(a..=b)
}

fn decompose(panel: &PricePanel, years: Option<&str>, out: &mut Output) -> CliResult<Vec<String>> {
    let growth = panel.growth()?;
    let years = match years {
        Some(y) => parse_years(y)?,
        None => {
            let first = growth
                .iter()
                .map(|g| g.start().year())
                .min()
                .expect("panel is non-empty");
            let last = growth.iter().map(|g| g.end().year()).max().expect("panel is non-empty");
            first..=last
        }
    };
    let d = decompose_bilinear(&growth, years)?;
    let year_rows: Vec<Vec<String>> = d
        .years
        .iter()
        .enumerate()
        .map(|(i, y)| vec![y.to_string(), d.f[i].to_string(), d.j[i].to_string()])
        .collect();
    out.table("decompose_years.tsv", &["year", "f", "j"], &year_rows)?;
    let month_rows: Vec<Vec<String>> = (0..12)
        .map(|m| vec![MonthProfile::month_name(m).to_string(), d.h[m].to_string()])
        .collect();
    out.table("decompose_months.tsv", &["month", "h"], &month_rows)?;
    let obs_rows: Vec<Vec<String>> = d
        .observations
        .iter()
        .map(|o| {
            vec![
                d.regions[o.region].clone(),
                o.month.to_string(),
                o.value.to_string(),
                (o.value - o.residual).to_string(),
                o.residual.to_string(),
            ]
        })
        .collect();
    out.table(
        "decompose_residuals.tsv",
        &["region", "month", "growth", "fitted", "residual"],
        &obs_rows,
    )?;
    out.json("decompose.json", &d)?;
    Ok(vec![format!(
        "pooled\t{} years\targmax f {}\targmax j {}\tresidual rms {:.3e}\t{} iterations{}",
        d.years.len(),
        d.argmax_f(),
        d.argmax_j(),
        d.residual_rms,
        d.iterations,
        if d.degenerate { "\tdegenerate" } else { "" }
    )])
}

fn signs(panel: &PricePanel, window: MonthRange, label: SignLabel, out: &mut Output) -> CliResult<Vec<String>> {
    let growth = panel.growth()?;
    let table = sign_table_with(&growth, window.from, window.to, label)?;
    out.text("signs.txt", &table.to_wide_text())?;
    let rows: Vec<Vec<String>> = table
        .months
        .iter()
        .map(|m| {
            vec![
                m.name().to_string(),
                m.positive.to_string(),
                m.negative.to_string(),
                m.ties.to_string(),
                m.positive_fraction.to_string(),
                m.negative_fraction.to_string(),
                m.dominant_sign.to_string(),
                m.dominant_fraction.to_string(),
            ]
        })
        .collect();
    out.table(
        "signs.tsv",
        &[
            "month",
            "positive",
            "negative",
            "ties",
            "positive_fraction",
            "negative_fraction",
            "sign",
            "fraction",
        ],
        &rows,
    )?;
    out.json("signs.json", &table)?;
    Ok(table
        .months
        .iter()
        .map(|m| format!("{}\t{}\t{:.2}%", m.name(), m.dominant_sign, 100.0 * m.dominant_fraction))
        .collect())
}

fn forecast(
    panel: &PricePanel,
    scheme: Scheme,
    training: MonthRange,
    horizon: usize,
    out: &mut Output,
) -> CliResult<Vec<String>> {
    let forecasts = panel
        .regions()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|r| forecast_levels(panel, r, scheme, training, horizon))
        .collect::<hpi_core::Result<Vec<_>>>()?;
    let mut summary = Vec::new();
    for f in &forecasts {
        let rows: Vec<Vec<String>> = (0..f.horizon)
            .map(|k| {
                vec![
                    f.months[k].to_string(),
                    f.predicted_levels[k].to_string(),
                    f.low_band[k].to_string(),
                    f.high_band[k].to_string(),
                ]
            })
            .collect();
        out.table(
            &format!("forecast_{}.tsv", file_stem(&f.region)),
            &["month", "level", "low", "high"],
            &rows,
        )?;
        let last = f.predicted_levels.last().copied().unwrap_or(f.origin_level);
        summary.push(format!(
            "{}\t{}\tfrom {} at {:.3}\tto {:.3}{}",
            f.region,
            f.scheme,
            f.origin,
            f.origin_level,
            last,
            if f.fell_back { "\t(fell back to pooled)" } else { "" }
        ));
    }
    out.json("forecast.json", &forecasts)?;
    Ok(summary)
}

#[derive(Serialize)]
struct EvaluationReport<'a> {
    table: &'a SignTable,
    prediction: &'a SignPrediction,
    evaluation: &'a SignEvaluation,
}

fn evaluate(
    panel: &PricePanel,
    realized: &PricePanel,
    to: Option<MonthStamp>,
    window: Option<MonthRange>,
    label: SignLabel,
    out: &mut Output,
) -> CliResult<Vec<String>> {
    let growth = panel.growth()?;
    let end = panel.span().to;
    let table = sign_table_with(&growth, panel.span().from.succ(), to.unwrap_or(end), label)?;
    let combined = panel.extended_with(realized)?;
    let months: Vec<MonthStamp> = match window {
        Some(w) => w.iter().collect(),
        // Every month whose increment ends after the training data.
        None => {
            let last = combined.span().to;
            MonthRange::new(end.pred(), last)?
                .iter()
                .filter(|m| {
                    let (_, b) = label.endpoints(*m);
                    b > end && b <= last
                })
                .collect()
        }
    };
    let prediction = predict_signs(&table, &months);
    let evaluation = evaluate_signs(&prediction, &combined.growth()?)?;
    let rows: Vec<Vec<String>> = evaluation
        .months
        .iter()
        .map(|m| {
            vec![
                m.month.to_string(),
                m.predicted.to_string(),
                m.hits.to_string(),
                m.misses.to_string(),
                m.ties.to_string(),
                m.hit_ratio.to_string(),
            ]
        })
        .collect();
    out.table(
        "evaluate.tsv",
        &["month", "predicted", "hits", "misses", "ties", "hit_ratio"],
        &rows,
    )?;
    out.json(
        "evaluate.json",
        &EvaluationReport {
            table: &table,
            prediction: &prediction,
            evaluation: &evaluation,
        },
    )?;
    let mut summary: Vec<String> = evaluation
        .months
        .iter()
        .map(|m| format!("{}\t{}\t{}/{}", m.month, m.predicted, m.hits, m.hits + m.misses))
        .collect();
    summary.push(format!(
        "pooled\t{}/{} hits\tratio {:.4}",
        evaluation.hits, evaluation.total, evaluation.hit_ratio
    ));
    Ok(summary)
}

fn synth(spec_path: &Path, seed: Option<u64>, out: &mut Output) -> CliResult<Vec<String>> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| CliError::User(format!("cannot read scenario {}: {e}", spec_path.display())))?;
    let mut spec: ScenarioSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::User(format!("invalid scenario {}: {e}", spec_path.display())))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let (panel, truth) = generate(&spec)?;
    let mut csv = out.header().into_bytes();
    write_panel(&mut csv, &panel, PanelFormat::default())?;
    let body = String::from_utf8(csv).map_err(|e| CliError::Internal(e.to_string()))?;
    out.text_raw("synth.csv", &body)?;
    out.json("synth_truth.json", &truth)?;
    Ok(panel
        .series()
        .iter()
        .map(|s| format!("{}\t{}:{}\tseed {}", s.region(), s.start(), s.end(), spec.seed))
        .collect())
}
