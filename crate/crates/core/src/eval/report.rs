//! Report serialization: CSV rows per (iteration, method), JSON, and
//! per-metric series for plotting.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{IterationMetrics, Method, MethodMetrics};
use crate::error::{Error, Result};

const HEADER: [&str; 6] = [
    "iteration",
    "method",
    "mean_error_s",
    "rmse_s",
    "active_traces",
    "failures",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_report_csv(metrics: &[IterationMetrics]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Csv {
        row: 0,
        message: e.to_string(),
    };
    w.write_record(HEADER).map_err(csv_err)?;
    for it in metrics {
        for m in &it.methods {
            w.write_record([
                it.iteration.to_string(),
                m.method.to_string(),
                opt(m.mean_error_s),
                opt(m.rmse_s),
                it.active_traces.to_string(),
                m.failures.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_report_json(metrics: &[IterationMetrics]) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(metrics)?;
    v.push(b'\n');
    Ok(v)
}

pub fn parse_report_csv(bytes: &[u8]) -> Result<Vec<IterationMetrics>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| Error::Csv {
        row: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(HEADER) {
        return Err(Error::Csv {
            row: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut out: Vec<IterationMetrics> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let bad = |message: String| Error::Csv { row, message };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |j: usize| -> Result<usize> {
            rec[j]
                .parse()
                .map_err(|_| bad(format!("bad {} '{}'", HEADER[j], &rec[j])))
        };
        let float = |j: usize| -> Result<Option<f64>> {
            if rec[j].is_empty() {
                return Ok(None);
            }
            rec[j]
                .parse()
                .map(Some)
                .map_err(|_| bad(format!("bad {} '{}'", HEADER[j], &rec[j])))
        };
        let iteration = num(0)?;
        let method: Method = rec[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let metrics = MethodMetrics {
            method,
            mean_error_s: float(2)?,
            rmse_s: float(3)?,
            failures: num(5)?,
        };
        let active_traces = num(4)?;
        match out.last_mut() {
            Some(last) if last.iteration == iteration => last.methods.push(metrics),
            _ => out.push(IterationMetrics {
                iteration,
                active_traces,
                methods: vec![metrics],
            }),
        }
    }
    Ok(out)
}

/// One tab-separated table per metric (`mean_error_s`, `rmse_s`,
/// `active_traces`, `failures`): a row per iteration, a column per method.
/// Missing values are written as `nan`.
pub fn plot_series(metrics: &[IterationMetrics]) -> BTreeMap<String, String> {
    let methods: Vec<Method> = metrics
        .first()
        .map(|m| m.methods.iter().map(|x| x.method).collect())
        .unwrap_or_default();
    let mut head = String::from("iteration");
    for m in &methods {
        let _ = write!(head, "\t{m}");
    }
    head.push('\n');

    type Cell = fn(&IterationMetrics, &MethodMetrics) -> String;
    let columns: [(&str, Cell); 4] = [
        ("mean_error_s", |_, m| num_or_nan(m.mean_error_s)),
        ("rmse_s", |_, m| num_or_nan(m.rmse_s)),
        ("active_traces", |it, _| it.active_traces.to_string()),
        ("failures", |_, m| m.failures.to_string()),
    ];
    columns
        .iter()
        .map(|(name, cell)| {
            let mut s = head.clone();
            for it in metrics {
                let _ = write!(s, "{}", it.iteration);
                for m in &it.methods {
                    let _ = write!(s, "\t{}", cell(it, m));
                }
                s.push('\n');
            }
            (format!("{name}.tsv"), s)
        })
        .collect()
}

fn num_or_nan(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_else(|| "nan".into())
}
