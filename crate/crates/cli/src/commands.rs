use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::json;
use spnknn_core::discovery::discover_net;
use spnknn_core::eval::{plot_series, write_report_csv, write_report_json};
use spnknn_core::event_log::write_csv;
use spnknn_core::gdtspn::enrich;
use spnknn_core::petri::{to_dot, write_pnml};
use spnknn_core::predict::{
    benchmark_average, benchmark_knn_average, predict_gdtspn, predict_gdtspn_knn, ModelCache,
};
use spnknn_core::seed::{fnv1a, mix, prediction_seed};
use spnknn_core::synth::{two_variant_log, two_variant_train_test, TwoVariantConfig};
use spnknn_core::{run_experiment, EventLog, Method, Prediction, SimulationConfig, Timestamp};

use crate::args::{
    CsvArgs, DiscoverArgs, EvaluateArgs, GenerateArgs, PredictArgs, ReportFormat, StatsArgs,
    StatsFormat,
};
use crate::config::FileConfig;
use crate::CliError;

const DEFAULT_TEST_COUNT: usize = 500;

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::MissingFile(path.to_path_buf()))
    }
}

fn load_log(path: &Path, file: &FileConfig, csv: &CsvArgs) -> Result<EventLog, CliError> {
    let (mapping, format) = file.csv(csv)?;
    let log = EventLog::from_path(path, &mapping, &format)?;
    log::info!("{}: {} cases", path.display(), log.len());
    Ok(log)
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(spnknn_core::Error::from)?;
    }
    fs::write(path, bytes).map_err(spnknn_core::Error::from)?;
    Ok(())
}

fn stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).and_then(|_| out.flush()).map_err(spnknn_core::Error::from)?;
    Ok(())
}

pub fn stats(args: &StatsArgs, file: &FileConfig) -> Result<(), CliError> {
    require_file(&args.log)?;
    let s = load_log(&args.log, file, &args.csv)?.descriptive_stats();
    let text = match args.format {
        StatsFormat::Text => format!("{s}\n"),
        StatsFormat::Json => serde_json::to_string_pretty(&s).map_err(spnknn_core::Error::from)? + "\n",
    };
    stdout(text.as_bytes())
}

pub fn discover(args: &DiscoverArgs, file: &FileConfig) -> Result<(), CliError> {
    require_file(&args.log)?;
    let log = load_log(&args.log, file, &args.csv)?;
    let (tree, net) = discover_net(&log);
    log::info!("process tree: {tree}");
    let (pnml, dot) = if args.annotate {
        let model = enrich(&net, log.traces())?;
        (model.to_pnml(), model.to_dot())
    } else {
        (write_pnml(&net, None), to_dot(&net, None))
    };
    if let Some(p) = &args.pnml {
        write_output(p, pnml.as_bytes())?;
    }
    if let Some(p) = &args.dot {
        write_output(p, dot.as_bytes())?;
    }
    if args.pnml.is_none() && args.dot.is_none() {
        stdout(pnml.as_bytes())?;
    }
    Ok(())
}

/// ISO-8601 timestamp, or an offset from `start` such as `+90m`.
pub fn parse_t0(raw: &str, start: Timestamp) -> Result<Timestamp, CliError> {
    let bad = || CliError::Usage(format!("cannot read t0 '{raw}'"));
    if let Some(offset) = raw.strip_prefix('+') {
        let split = offset
            .find(|c: char| c.is_ascii_alphabetic())
            .unwrap_or(offset.len());
        let (num, unit) = offset.split_at(split);
        let value: f64 = num.parse().map_err(|_| bad())?;
        let scale = match unit {
            "ms" => 1.0,
            "" | "s" => 1e3,
            "m" => 6e4,
            "h" => 3.6e6,
            "d" => 8.64e7,
            _ => return Err(bad()),
        };
        if !value.is_finite() || value < 0.0 {
            return Err(bad());
        }
        return Ok(start + (value * scale).round() as i64);
    }
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.timestamp_millis())
        .map_err(|_| bad())
}

fn iso(ms: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .map(|t| t.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| ms.to_string())
}

pub fn predict(args: &PredictArgs, file: &FileConfig) -> Result<(), CliError> {
    require_file(&args.log)?;
    if let Some(t) = &args.train {
        require_file(t)?;
    }
    let mut cfg = file.experiment(&args.params, None, args.methods.clone())?;
    if args.methods.is_none() && file.methods.is_none() {
        cfg.methods = vec![Method::GdtspnKnn];
    }
    let log = load_log(&args.log, file, &args.csv)?;
    let case = log
        .get(&args.case_id)
        .ok_or_else(|| CliError::Usage(format!("case '{}' is not in the log", args.case_id)))?
        .clone();
    let train = match &args.train {
        Some(t) => load_log(t, file, &args.csv)?,
        None => EventLog::new(
            log.traces()
                .iter()
                .filter(|t| t.case_id() != case.case_id())
                .cloned()
                .collect(),
        )?,
    };
    if train.is_empty() {
        return Err(spnknn_core::Error::EmptyLog.into());
    }
    let t0 = parse_t0(&args.t0, case.start())?;
    let prefix = case.prefix_at(t0)?;
    let k = cfg.k.min(train.len());
    let cache = ModelCache::new();
    let base = prediction_seed(cfg.seed, case.case_id(), 0);
    let predictions = cfg
        .methods
        .iter()
        .map(|&m| {
            let seed = mix(base, &[fnv1a(m.to_string().as_bytes())]);
            let sim = SimulationConfig {
                seed,
                ..file.simulation(&cfg)
            };
            let elapsed = t0 - prefix.start();
            let p: Prediction = match m {
                Method::GdtspnKnn => predict_gdtspn_knn(&train, &prefix, t0, k, &sim)?,
                Method::Gdtspn => predict_gdtspn(&train, &prefix, t0, &sim, &cache)?,
                Method::Average => benchmark_average(&train, elapsed, cfg.subtract_elapsed)?,
                Method::KnnAverage(kk) => benchmark_knn_average(
                    &train,
                    &prefix,
                    t0,
                    kk.min(train.len()),
                    seed,
                    cfg.subtract_elapsed,
                )?,
            };
            Ok(p)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let out = json!({
        "case_id": case.case_id(),
        "t0": iso(t0),
        "elapsed_s": (t0 - prefix.start()) as f64 / 1000.0,
        "events_observed": prefix.len(),
        "predictions": predictions,
    });
    let text = serde_json::to_string_pretty(&out).map_err(spnknn_core::Error::from)? + "\n";
    stdout(text.as_bytes())
}

fn report_format(args: &EvaluateArgs) -> ReportFormat {
    args.format.unwrap_or_else(|| {
        let json = args
            .out
            .as_ref()
            .and_then(|p| p.extension())
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if json {
            ReportFormat::Json
        } else {
            ReportFormat::Csv
        }
    })
}

pub fn evaluate(args: &EvaluateArgs, file: &FileConfig) -> Result<(), CliError> {
    let cfg = file.experiment(&args.params, args.iterations, args.methods.clone())?;
    let (train, test) = match (&args.train, &args.test, &args.log, args.synthetic) {
        (Some(tr), Some(te), None, false) => {
            require_file(tr)?;
            require_file(te)?;
            (load_log(tr, file, &args.csv)?, load_log(te, file, &args.csv)?)
        }
        (None, None, Some(log), false) => {
            require_file(log)?;
            let count = args
                .split_test_count
                .or(file.split_test_count)
                .unwrap_or(DEFAULT_TEST_COUNT);
            let (train, test) = load_log(log, file, &args.csv)?.split_out_of_time(count)?;
            log::info!("split: {} training, {} test cases", train.len(), test.len());
            (train, test)
        }
        (None, None, None, true) => {
            if args.synthetic_train == 0 || args.synthetic_test == 0 {
                return Err(CliError::Usage("synthetic logs need at least one case each".into()));
            }
            two_variant_train_test(
                &TwoVariantConfig::default(),
                args.synthetic_train,
                args.synthetic_test,
                cfg.seed,
            )?
        }
        _ => {
            return Err(CliError::Usage(
                "give --train and --test, --log with --split-test-count, or --synthetic".into(),
            ))
        }
    };
    let metrics = run_experiment(&train, &test, &cfg)?;
    let bytes = match report_format(args) {
        ReportFormat::Csv => write_report_csv(&metrics)?,
        ReportFormat::Json => write_report_json(&metrics)?,
    };
    match &args.out {
        Some(p) => write_output(p, &bytes)?,
        None => stdout(&bytes)?,
    }
    if let Some(dir) = &args.plot_data {
        for (name, table) in plot_series(&metrics) {
            write_output(&dir.join(name), table.as_bytes())?;
        }
    }
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.variant_one_share) {
        return Err(CliError::Usage("--variant-one-share must lie in [0, 1]".into()));
    }
    let cfg = TwoVariantConfig {
        variant_one_share: args.variant_one_share,
        ..TwoVariantConfig::default()
    };
    let log = two_variant_log(&cfg, args.cases, args.start, "case_", args.seed)?;
    let mut bytes = Vec::new();
    write_csv(&log, &mut bytes)?;
    write_output(&args.out, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_and_timestamps() {
        assert_eq!(parse_t0("+90m", 1_000).unwrap(), 1_000 + 5_400_000);
        assert_eq!(parse_t0("+1.5d", 0).unwrap(), 129_600_000);
        assert_eq!(parse_t0("+30", 0).unwrap(), 30_000);
        assert_eq!(parse_t0("+250ms", 0).unwrap(), 250);
        assert_eq!(parse_t0("2020-01-01T00:00:01Z", 0).unwrap(), 1_577_836_801_000);
        assert_eq!(parse_t0("2020-01-01T01:00:00+01:00", 0).unwrap(), 1_577_836_800_000);
        for bad in ["+", "+3w", "+-1h", "yesterday", "2020-01-01"] {
            assert!(parse_t0(bad, 0).is_err(), "{bad}");
        }
    }
}
