//! Plot-ready CSV output.
//!
//! `<metric>.csv` holds one row per (iteration, policy) with columns
//! `iteration,policy,mean,sd,n`, where `sd` is the sample standard deviation
//! over `n` runs. `raw.csv` holds every recorded value with columns
//! `user,alpha,policy,iteration,metric,value`. Numbers are written in their
//! shortest round-trip form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::benchmark::{BenchmarkResult, MetricCurve};
use super::config::Metric;
use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "iteration,policy,mean,sd,n";
pub const RAW_HEADER: &str = "user,alpha,policy,iteration,metric,value";

/// Writes one CSV per metric present in `curves` into `dir` and returns
/// the paths written.
pub fn emit_plot_data(curves: &[MetricCurve], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if curves.is_empty() {
        return Err(Error::invalid("no curves to write"));
    }
    let dir = dir.as_ref();
    let mut metrics: Vec<Metric> = curves.iter().map(|c| c.metric).collect();
    metrics.sort();
    metrics.dedup();
    let mut written = Vec::new();
    for metric in metrics {
        let path = dir.join(format!("{}.csv", metric.label()));
        let mut text = String::from(CURVE_HEADER);
        text.push('\n');
        for c in curves.iter().filter(|c| c.metric == metric) {
            for (k, (m, s)) in c.mean.iter().zip(&c.sd).enumerate() {
                writeln!(text, "{k},{},{m},{s},{}", c.policy, c.n).expect("string write");
            }
        }
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_raw_csv(result: &BenchmarkResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::from(RAW_HEADER);
    text.push('\n');
    for run in &result.runs {
        let label = &result.arms[run.arm];
        for it in &run.history.iterations {
            for &m in &result.metrics {
                if let Some(v) = it.metrics.get(m) {
                    writeln!(
                        text,
                        "{},{},{label},{},{},{v}",
                        run.user,
                        run.alpha,
                        it.iteration,
                        m.label()
                    )
                    .expect("string write");
                }
            }
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads back a curve CSV as `(iteration, policy, mean, sd, n)` rows.
pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, String, f64, f64, usize)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, message: &str| Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CURVE_HEADER => {}
        _ => return Err(bad(1, "missing header")),
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(i + 1, "expected 5 columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(i + 1, "bad integer"));
            Ok((int(f[0])?, f[1].to_string(), num(f[2])?, num(f[3])?, int(f[4])?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_curve_round_trips() {
        let curve = MetricCurve {
            policy: "scale/random".into(),
            metric: Metric::Alignment,
            mean: vec![0.1, 1.0 / 3.0, 0.7],
            sd: vec![0.2, 0.25, 0.125],
            n: 4,
        };
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_plot_data(std::slice::from_ref(&curve), dir.path()).unwrap();
        assert_eq!(paths, vec![dir.path().join("alignment.csv")]);
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text.lines().next().unwrap(), CURVE_HEADER);
        let rows = read_curve_csv(&paths[0]).unwrap();
        assert_eq!(rows.len(), 3);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.0, k);
            assert_eq!(row.1, "scale/random");
            assert!((row.2 - curve.mean[k]).abs() <= 1e-12);
            assert_eq!(row.4, 4);
        }
        assert!(emit_plot_data(&[], dir.path()).is_err());
    }
}
