//! Reports and CSV exports. All writers are byte-deterministic: fields come
//! out in a fixed order and floats use Rust's shortest round-trip form.

use std::fmt::Display;
use std::io::Write;

use ecilmu_core::sim::Timeline;
use ecilmu_core::unlearn::FilterCalibration;
use ecilmu_core::{MetricsReport, MigrationReport};
use serde_json::{Map, Number, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Placeholder for values that do not apply, such as `acc_cf` before any
/// class has been unlearned.
pub const NOT_APPLICABLE: &str = "n/a";

/// An ordered list of `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn push_opt(&mut self, key: impl Into<String>, value: Option<impl Display>) -> &mut Self {
        match value {
            Some(v) => self.push(key, v),
            None => self.push(key, NOT_APPLICABLE),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Appends `seed`, `strategy` and `threshold` plus the whole effective
    /// configuration under `config.`.
    pub fn push_config(&mut self, config: &RunConfig) -> &mut Self {
        self.push("seed", config.seed)
            .push("strategy", config.strategy)
            .push("threshold", config.threshold);
        for (k, v) in config.pairs() {
            self.push(format!("config.{k}"), v);
        }
        self
    }

    pub fn push_metrics(&mut self, prefix: &str, m: &MetricsReport) -> &mut Self {
        self.push_opt(format!("{prefix}acc_cr"), m.acc_cr)
            .push_opt(format!("{prefix}acc_cf"), m.acc_cf)
            .push(format!("{prefix}acc_overall"), m.acc_overall)
            .push(format!("{prefix}n_eval"), m.n_eval)
            .push(format!("{prefix}n_cr"), m.n_cr)
            .push(format!("{prefix}n_cf"), m.n_cf)
            .push_opt(format!("{prefix}filter_recall"), m.filter_recall())
            .push_opt(
                format!("{prefix}filter_specificity"),
                m.filter_specificity(),
            );
        for (c, acc) in &m.per_class_acc {
            self.push(format!("{prefix}per_class_acc.{c}"), acc);
        }
        self
    }

    pub fn push_migration(&mut self, m: &MigrationReport) -> &mut Self {
        self.push("identified_label", m.identified_label)
            .push("moved", m.moved)
            .push("unanimous", m.unanimous)
            .push("vote_fraction", m.vote_fraction)
            .push("low_confidence", m.low_confidence);
        for (c, n) in &m.votes {
            self.push(format!("votes.{c}"), n);
        }
        self
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn parse_text(text: &str, origin: &str) -> Result<Self> {
        let mut report = Report::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| CliError::Config {
                origin: origin.to_owned(),
                line: i + 1,
                reason: reason.into(),
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value"))?;
            if k.is_empty() {
                return Err(err("empty key"));
            }
            if report.get(k).is_some() {
                return Err(err("duplicate key"));
            }
            report.push(k, v);
        }
        Ok(report)
    }

    /// Structured form: numbers and booleans are typed, `n/a` becomes
    /// `null`, everything else stays a string. Key order is preserved.
    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        for (k, v) in &self.entries {
            map.insert(k.clone(), typed(v));
        }
        let mut s =
            serde_json::to_string_pretty(&Value::Object(map)).expect("string map serialises");
        s.push('\n');
        s
    }
}

fn typed(v: &str) -> Value {
    if v == NOT_APPLICABLE {
        return Value::Null;
    }
    if let Ok(b) = v.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(i) = v.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(u) = v.parse::<u64>() {
        return Value::from(u);
    }
    match v.parse::<f64>().ok().and_then(Number::from_f64) {
        Some(n) if !v.starts_with(['+', '.']) && !v.ends_with('.') => Value::Number(n),
        _ => Value::String(v.to_owned()),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns: threshold, tp, fp, tn, fn, recall, specificity. Undefined
/// ratios are left empty.
pub fn write_sweep_csv<W: Write>(out: W, calibration: &FilterCalibration) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "tp", "fp", "tn", "fn", "recall", "specificity"])?;
    for r in &calibration.rows {
        w.write_record([
            r.threshold.to_string(),
            r.tp.to_string(),
            r.fp.to_string(),
            r.tn.to_string(),
            r.fn_.to_string(),
            opt(r.recall()),
            opt(r.specificity()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns: task_index, kind, lane, start_s, end_s.
pub fn write_timeline_csv<W: Write>(out: W, timeline: &Timeline) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["task_index", "kind", "lane", "start_s", "end_s"])?;
    for iv in &timeline.intervals {
        w.write_record([
            iv.task_index.to_string(),
            iv.kind.to_string(),
            iv.lane.as_str().to_owned(),
            iv.start.to_string(),
            iv.end.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json() {
        let mut r = Report::new();
        r.push("acc_cr", 0.95)
            .push_opt("acc_cf", None::<f64>)
            .push("n_eval", 10)
            .push("strategy", "nearest");
        r.push("flag", true).push("path", "1.");
        assert_eq!(
            r.to_text(),
            "acc_cr=0.95\nacc_cf=n/a\nn_eval=10\nstrategy=nearest\nflag=true\npath=1.\n"
        );
        let back = Report::parse_text(&r.to_text(), "t").unwrap();
        assert_eq!(back, r);
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["acc_cr"], 0.95);
        assert_eq!(json["acc_cf"], Value::Null);
        assert_eq!(json["n_eval"], 10);
        assert_eq!(json["strategy"], "nearest");
        assert_eq!(json["flag"], true);
        assert_eq!(json["path"], "1.");
        let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["acc_cr", "acc_cf", "n_eval", "strategy", "flag", "path"]
        );
    }

    #[test]
    fn parse_rejects_malformed_lines() {
        assert!(Report::parse_text("a=1\na=2\n", "t").is_err());
        assert!(Report::parse_text("novalue\n", "t").is_err());
        assert!(Report::parse_text("=1\n", "t").is_err());
        let r = Report::parse_text("k=a=b\n", "t").unwrap();
        assert_eq!(r.get("k"), Some("a=b"));
    }

    #[test]
    fn config_echo() {
        let mut r = Report::new();
        r.push_config(&RunConfig::default());
        assert_eq!(r.get("seed"), Some("42"));
        assert_eq!(r.get("threshold"), Some("0.77"));
        assert_eq!(r.get("strategy"), Some("nearest"));
        assert_eq!(r.get("config.knn_k"), Some("100"));
        assert_eq!(r.get("config.cost.train_per_class"), Some("640"));
    }
}
