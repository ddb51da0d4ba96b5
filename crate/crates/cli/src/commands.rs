use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use skewsv::check::{run_suites, CheckLevel};
use skewsv::data_io::{self, ISO_DATE};
use skewsv::evaluation::{
    expanding_window_eval, forecast_table, lambda_regression, max_table_rhat, regime_stats, regime_table,
    regression_table, ForecastReport, RegressionPrior,
};
use skewsv::sampler::{self, config_hash, data_hash, run_chains};
use skewsv::summaries::{band, static_summary, BandKind};
use skewsv::{model, Diagnostics, PosteriorDraws, TimeSeries};

use crate::config::{self, parse_assignment, Settings};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::{RunArgs, SeriesArgs};

const DIGITS: usize = 2;

fn settings(run: &RunArgs) -> Result<Settings, CliError> {
    let mut overrides = run.set.iter().map(|s| parse_assignment(s)).collect::<Result<Vec<_>, _>>()?;
    let text = |v: &Option<String>| v.clone().map(toml::Value::String);
    let int = |v: Option<usize>| v.map(|n| toml::Value::Integer(n as i64));
    let flags = [
        ("profile", text(&run.profile)),
        ("skew_mode", text(&run.skew_mode)),
        ("label", text(&run.label)),
        ("seed", run.seed.map(|s| toml::Value::Integer(s as i64))),
        ("n_iter", int(run.n_iter)),
        ("n_burnin", int(run.n_burnin)),
        ("n_chains", int(run.chains)),
        ("thin", int(run.thin)),
    ];
    overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    config::load(run.config.as_deref(), &overrides)
}

fn read_input(path: &Path, series: &SeriesArgs) -> Result<TimeSeries, CliError> {
    Ok(data_io::read_csv(path, &series.date_column, &series.value_column, &series.date_format)?)
}

fn write_series(out: &mut OutputDir, name: &str, series: &TimeSeries, description: &str) -> Result<(), CliError> {
    data_io::write_csv(&out.path(name), series)?;
    out.record(name, description);
    Ok(())
}

pub fn simulate(run: &RunArgs, t: Option<usize>, out: &Path) -> Result<(), CliError> {
    let s = settings(run)?;
    let t = t.unwrap_or(s.sim_t);
    let mut rng = ChaCha8Rng::seed_from_u64(s.hmc.seed);
    let (y, paths) = model::simulate(&s.sim, t, &mut rng)?;

    let mut out = OutputDir::create(out, "simulate")?;
    write_series(&mut out, "y.csv", &y, "simulated observations (date,value)")?;
    let mut latent = String::from("date,h,lambda\n");
    for (i, d) in y.dates().iter().enumerate() {
        latent.push_str(&format!("{},{},{}\n", d.format(ISO_DATE), paths.h[i + 1], paths.lambda[i]));
    }
    out.write("latent.csv", &latent, "true log-variance and shape paths aligned with y.csv")?;
    let mut truth = String::from("parameter,value\n");
    for (name, v) in [
        ("mu_h", s.sim.mu_h),
        ("phi_h", s.sim.phi_h),
        ("sigma_h", s.sim.sigma_h),
        ("alpha_0", s.sim.alpha_0),
        ("sigma_lambda", s.sim.sigma_lambda),
        ("h_0", paths.h[0]),
    ] {
        truth.push_str(&format!("{name},{v}\n"));
    }
    out.write("truth.csv", &truth, "generating static parameters and initial log-variance")?;
    out.write("config.toml", &s.to_toml(), "effective configuration")?;
    out.finish()
}

/// Tables, bands and mean paths shared by `fit` and `summarize`.
fn write_summaries(out: &mut OutputDir, draws: &PosteriorDraws, y: &TimeSeries, label: &str) -> Result<(), CliError> {
    let table = static_summary(draws, label)?;
    out.write("summary.csv", &table.to_csv(), "static parameter q05/mean/q95")?;
    out.write("summary.tex", &table.to_latex(DIGITS), "static parameter table (LaTeX)")?;
    for kind in BandKind::ALL {
        let b = band(draws, kind)?;
        out.write(&format!("band_{kind}.csv"), &b.to_csv(y.dates())?, &format!("posterior quantiles of the {kind} path"))?;
        if kind != BandKind::Gamma {
            let mean = TimeSeries::new(kind.to_string(), y.dates().to_vec(), b.mean)?;
            write_series(out, &format!("{kind}_mean.csv"), &mean, &format!("posterior-mean {kind} path (date,value)"))?;
        }
    }
    Ok(())
}

fn write_diagnostics(out: &mut OutputDir, diag: &Diagnostics) -> Result<(), CliError> {
    out.write("diagnostics.csv", &diag.to_csv(), "split R-hat and ESS of the static parameters")
}

pub fn fit(data: &Path, series: &SeriesArgs, run: &RunArgs, out: &Path) -> Result<(), CliError> {
    let s = settings(run)?;
    let y = read_input(data, series)?;
    let (draws, diag) = run_chains(&y, &s.model, &s.hmc)?;

    let mut out = OutputDir::create(out, "fit")?;
    let draws_dir = out.path("draws");
    std::fs::create_dir_all(&draws_dir)?;
    for path in draws.write_dir(&draws_dir, s.binary_draws)? {
        let name = path.file_name().map(|n| format!("draws/{}", n.to_string_lossy())).unwrap_or_default();
        out.record(&name, "retained draws of one chain");
    }
    write_series(&mut out, "data.csv", &y, "observations the draws were fitted to")?;
    write_diagnostics(&mut out, &diag)?;
    write_summaries(&mut out, &draws, &y, &s.label)?;
    out.write("config.toml", &s.to_toml(), "effective configuration")?;
    out.finish()?;

    let worst = max_table_rhat(&diag);
    if worst > s.rhat_limit {
        return Err(CliError::Convergence(format!("max R-hat {worst:.3} exceeds {} (outputs kept)", s.rhat_limit)));
    }
    if diag.params.is_empty() {
        log::warn!("too few draws for convergence diagnostics");
    }
    Ok(())
}

#[derive(Serialize)]
struct SummarizeEcho<'a> {
    label: &'a str,
    config_hash: &'a str,
    data_hash: &'a str,
}

pub fn summarize(
    draws_path: &Path,
    data: Option<&Path>,
    config_file: Option<&Path>,
    label: Option<String>,
    out: &Path,
) -> Result<(), CliError> {
    let nested = draws_path.join("draws");
    let dir = if nested.is_dir() { nested } else { draws_path.to_path_buf() };
    let draws = PosteriorDraws::read_dir(&dir)?;

    let data_path: PathBuf = match data {
        Some(p) => p.to_path_buf(),
        None => [draws_path.join("data.csv"), dir.join("../data.csv")]
            .into_iter()
            .find(|p| p.is_file())
            .ok_or_else(|| CliError::Data(format!("no data.csv next to {}; pass --data", draws_path.display())))?,
    };
    let y = data_io::read_series(&data_path)?;
    if data_hash(&y) != draws.data_hash {
        return Err(CliError::Data(format!("{} does not match the data the draws were fitted to", data_path.display())));
    }
    let mut label = label;
    if let Some(cfg) = config_file {
        let s = config::load(Some(cfg), &[])?;
        if config_hash(&s.model, &s.hmc) != draws.config_hash {
            return Err(CliError::Config(format!("{} does not match the configuration of the draws", cfg.display())));
        }
        label = label.or(Some(s.label));
    }
    let label = label.unwrap_or_else(|| "US".into());

    let mut out = OutputDir::create(out, "summarize")?;
    match sampler::diagnostics(&draws) {
        Ok(d) => write_diagnostics(&mut out, &d)?,
        Err(e) => log::warn!("diagnostics skipped: {e}"),
    }
    write_summaries(&mut out, &draws, &y, &label)?;
    let echo = SummarizeEcho { label: &label, config_hash: &draws.config_hash, data_hash: &draws.data_hash };
    out.write("config.toml", &toml::to_string(&echo).expect("flat"), "effective settings and source hashes")?;
    out.finish()
}

pub fn eval_forecast(data: &Path, series: &SeriesArgs, run: &RunArgs, first_end: &str, out: &Path) -> Result<(), CliError> {
    let s = settings(run)?;
    let date = NaiveDate::parse_from_str(first_end, ISO_DATE)
        .map_err(|_| CliError::Config(format!("--first-window-end {first_end:?} is not YYYY-MM-DD")))?;
    let y = read_input(data, series)?;
    let report = expanding_window_eval(&y, &s.model, &s.hmc, date, &s.window)?;
    let report = ForecastReport::from_records(s.label.clone(), report.records);

    let mut out = OutputDir::create(out, "eval-forecast")?;
    out.write("forecast_records.csv", &report.records_csv(), "one row per window: signal, outcome and max R-hat")?;
    let table = forecast_table(std::slice::from_ref(&report));
    out.write("forecast.csv", &table.to_csv(), "hit ratio and average magnitudes")?;
    out.write("forecast.tex", &table.to_latex(1), "forecast table (LaTeX)")?;
    out.write("config.toml", &s.to_toml(), "effective configuration")?;
    out.finish()?;
    println!(
        "hit ratio {:.1}% over {} scored windows ({} without signal, {} excluded)",
        100.0 * report.hit_ratio,
        report.n_right + report.n_wrong,
        report.n_no_signal,
        report.n_excluded
    );
    Ok(())
}

#[derive(Serialize)]
struct RegressEcho<'a> {
    label: &'a str,
    names: &'a [String],
    prior_precision: f64,
    prior_shape: f64,
    prior_scale: f64,
}

pub fn regress(
    lambda: &Path,
    covariates: &[PathBuf],
    names: &[String],
    label: &str,
    prior: RegressionPrior,
    out: &Path,
) -> Result<(), CliError> {
    if !names.is_empty() && names.len() != covariates.len() {
        return Err(CliError::Config(format!("{} names for {} covariates", names.len(), covariates.len())));
    }
    if !(prior.precision > 0.0 && prior.shape > 0.0 && prior.scale > 0.0) {
        return Err(CliError::Config("prior precision, shape and scale must be positive".into()));
    }
    let l = data_io::read_series(lambda)?;
    let mut cov = Vec::with_capacity(covariates.len());
    for (i, p) in covariates.iter().enumerate() {
        let c = data_io::read_series(p)?;
        cov.push(match names.get(i) {
            Some(n) => c.with_label(n.clone()),
            None => c,
        });
    }
    let report = lambda_regression(&l, &cov, label, &prior)?;

    let mut out = OutputDir::create(out, "regress")?;
    let table = regression_table(&report);
    out.write("regression.csv", &table.to_csv(), "coefficient q05/mean/q95")?;
    out.write("regression.tex", &table.to_latex(DIGITS), "regression table (LaTeX)")?;
    let [lo, mid, hi] = report.sigma;
    out.write("residual_sd.csv", &format!("quantile,value\nq05,{lo}\nq50,{mid}\nq95,{hi}\n"), "residual standard deviation")?;
    let used: Vec<String> = report.names[1..].to_vec();
    let echo = RegressEcho {
        label,
        names: &used,
        prior_precision: prior.precision,
        prior_shape: prior.shape,
        prior_scale: prior.scale,
    };
    out.write("config.toml", &toml::to_string(&echo).expect("flat"), "effective settings")?;
    out.finish()
}

pub fn regimes(data: &Path, series: &SeriesArgs, scale: &Path, out: &Path) -> Result<(), CliError> {
    let y = read_input(data, series)?;
    let sc = data_io::read_series(scale)?;
    let report = regime_stats(&y, &sc)?;

    let mut out = OutputDir::create(out, "regimes")?;
    let table = regime_table(&report);
    out.write("regimes.csv", &table.to_csv(), "High Vol / Low Vol statistics (NaN marks an empty regime)")?;
    out.write("regimes.tex", &table.to_latex(DIGITS), "regime table (LaTeX)")?;
    let mut membership = String::from("date,value,scale,regime\n");
    for (i, d) in y.dates().iter().enumerate() {
        let regime = if report.is_high[i] { "high" } else { "low" };
        membership.push_str(&format!("{},{},{},{regime}\n", d.format(ISO_DATE), y.values()[i], sc.values()[i]));
    }
    out.write("membership.csv", &membership, "regime of every observation")?;
    out.write("config.toml", &format!("threshold = {}\n", toml::Value::Float(report.threshold)), "scale threshold used")?;
    out.finish()?;
    if report.has_empty_regime() {
        println!("one regime is empty (threshold {})", report.threshold);
    }
    Ok(())
}

pub fn check(full: bool) -> Result<(), CliError> {
    let level = if full { CheckLevel::Full } else { CheckLevel::Quick };
    let results = run_suites(level);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Other(format!("{failed} of {} suites failed", results.len())));
    }
    Ok(())
}
