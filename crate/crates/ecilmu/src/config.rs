//! Run configuration: defaults, a `key=value` file and command-line
//! overrides, applied in that order.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ecilmu_core::rng::DEFAULT_SEED;
use ecilmu_core::unlearn::{DEFAULT_K, DEFAULT_THRESHOLD};
use ecilmu_core::{CostModel, FilterMode, InverseWeighting, PipelineConfig, StrategyKind};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub threshold: f64,
    pub knn_k: usize,
    pub strategy: StrategyKind,
    pub filter_mode: FilterMode,
    pub inverse_weighting: InverseWeighting,
    /// Directory holding `db-cil.ecmu` and `db-mu.ecmu`.
    pub state_dir: PathBuf,
    pub cost: CostModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            threshold: DEFAULT_THRESHOLD,
            knn_k: DEFAULT_K,
            strategy: StrategyKind::default(),
            filter_mode: FilterMode::default(),
            inverse_weighting: InverseWeighting::default(),
            state_dir: PathBuf::from("ecilmu-state"),
            cost: CostModel::default(),
        }
    }
}

fn parse<T: FromStr>(value: &str, what: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid {what} `{value}`"))
}

fn finite(value: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = parse(value, what)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} must be finite"))
    }
}

impl RunConfig {
    /// Every recognised key, in echo order.
    pub const KEYS: [&'static str; 12] = [
        "seed",
        "threshold",
        "knn_k",
        "strategy",
        "filter_mode",
        "inverse_weighting",
        "state_dir",
        "cost.train_per_class",
        "cost.embed_per_class",
        "cost.migrate_per_class",
        "cost.checkpoint_save",
        "cost.restore",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key.trim() {
            "seed" => self.seed = parse(value, "seed")?,
            "threshold" => self.threshold = finite(value, "threshold")?,
            "knn_k" => {
                self.knn_k = parse(value, "knn_k")?;
                if self.knn_k == 0 {
                    return Err("knn_k must be positive".into());
                }
            }
            "strategy" => self.strategy = parse(value, "strategy")?,
            "filter_mode" => self.filter_mode = parse(value, "filter_mode")?,
            "inverse_weighting" => self.inverse_weighting = parse(value, "inverse_weighting")?,
            "state_dir" => self.state_dir = PathBuf::from(value),
            "cost.train_per_class" => self.cost.train_per_class = finite(value, key)?,
            "cost.embed_per_class" => self.cost.embed_per_class = finite(value, key)?,
            "cost.migrate_per_class" => self.cost.migrate_per_class = finite(value, key)?,
            "cost.checkpoint_save" => self.cost.checkpoint_save = finite(value, key)?,
            "cost.restore" => self.cost.restore = finite(value, key)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies a `key=value` document. Blank lines and `#` comments are
    /// skipped; later lines win.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| CliError::Config {
                origin: origin.to_owned(),
                line: i + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Checks constraints that span several keys.
    pub fn validate(&self) -> Result<()> {
        self.cost.validate().map_err(|e| CliError::Config {
            origin: "cost model".into(),
            line: 0,
            reason: e.to_string(),
        })
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            threshold: self.threshold,
            strategy: self.strategy,
            filter_mode: self.filter_mode,
            inverse_weighting: self.inverse_weighting,
        }
    }

    /// The effective configuration as `(key, value)` pairs in [`Self::KEYS`]
    /// order. Feeding them back through [`Self::set`] reproduces `self`.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let show = |v: &dyn Display| v.to_string();
        let values = [
            show(&self.seed),
            show(&self.threshold),
            show(&self.knn_k),
            show(&self.strategy),
            show(&self.filter_mode),
            show(&self.inverse_weighting.as_str()),
            show(&self.state_dir.display()),
            show(&self.cost.train_per_class),
            show(&self.cost.embed_per_class),
            show(&self.cost.migrate_per_class),
            show(&self.cost.checkpoint_save),
            show(&self.cost.restore),
        ];
        Self::KEYS.into_iter().zip(values).collect()
    }

    pub fn to_text(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_settings() {
        let c = RunConfig::default();
        assert_eq!(c.seed, 42);
        assert_eq!(c.threshold, 0.77);
        assert_eq!(c.knn_k, 100);
        assert_eq!(c.strategy, StrategyKind::ShiftToNearest);
        assert_eq!(c.filter_mode, FilterMode::RecordMax);
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.apply_text(
            "seed=7\nstrategy = inverse\ncost.restore=2.5\nfilter_mode=centroid\n",
            "t",
        )
        .unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.to_text(), "echo").unwrap();
        assert_eq!(back, c);
        assert_eq!(c.seed, 7);
        assert_eq!(c.strategy, StrategyKind::InverseToDistance);
    }

    #[test]
    fn errors_name_the_line() {
        let mut c = RunConfig::default();
        let err = c
            .apply_text("# comment\n\nseed=1\nthreshold=high\n", "run.cfg")
            .unwrap_err();
        assert_eq!(err.to_string(), "run.cfg line 4: invalid threshold `high`");
        assert_eq!(err.category(), "config");
        assert!(c.apply_text("knn_k=0", "t").is_err());
        assert!(c.apply_text("colour=blue", "t").is_err());
        assert!(c.apply_text("seed", "t").is_err());
        c.apply_text("cost.train_per_class=-1", "t").unwrap();
        assert!(c.validate().is_err());
    }
}
