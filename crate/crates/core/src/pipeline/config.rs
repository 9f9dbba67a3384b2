use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::correlation::ModelKind;
use crate::diagnostics::DEFAULT_ARCH_LAGS;
use crate::error::{Error, Result};

/// Pipeline configuration, read from TOML. Unknown keys are errors.
///
/// ```toml
/// seed = 2020
/// output_dir = "out/2020"
/// models = ["ccc", "dcc", "nlarc"]
///
/// [window]
/// start = "2020-03-05"
/// end = "2020-11-03"
///
/// [[series]]
/// name = "polls"
/// path = "data/polls.csv"
/// value_column = "trump"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default)]
    pub arma: ArmaGrid,
    #[serde(default)]
    pub arch_lm: ArchLm,
    #[serde(default)]
    pub rolling: Rolling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<Cache>,
    pub series: Vec<SeriesSource>,
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Ccc, ModelKind::Dcc, ModelKind::Nlarc]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmaGrid {
    pub p_max: usize,
    pub q_max: usize,
}

impl Default for ArmaGrid {
    fn default() -> Self {
        Self { p_max: 3, q_max: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchLm {
    pub lags: usize,
}

impl Default for ArchLm {
    fn default() -> Self {
        Self { lags: DEFAULT_ARCH_LAGS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rolling {
    pub window: usize,
}

impl Default for Rolling {
    fn default() -> Self {
        Self { window: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cache {
    pub dir: PathBuf,
}

/// One input series. Exactly one of `path` and `url` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSource {
    /// Display name; defaults to `value_column`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default = "default_date_column")]
    pub date_column: String,
    pub value_column: String,
    /// Forces the log transform on or off; by default logs are taken when
    /// every value in the window is strictly positive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<bool>,
    /// Forces first differencing on or off instead of the ADF decision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difference: Option<bool>,
}

fn default_date_column() -> String {
    "date".to_string()
}

impl SeriesSource {
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.value_column)
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_relative(base);
        }
        Ok(cfg)
    }

    pub fn resolve_relative(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(c) = self.cache.as_mut() {
            fix(&mut c.dir);
        }
        for s in &mut self.series {
            if let Some(p) = s.path.as_mut() {
                fix(p);
            }
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.models.is_empty() {
            return bad("at least one model must be requested".into());
        }
        let mut seen = HashSet::new();
        if !self.models.iter().all(|m| seen.insert(*m)) {
            return bad("models are listed more than once".into());
        }
        if let Some(w) = self.window {
            if w.start >= w.end {
                return bad(format!("window start {} is not before end {}", w.start, w.end));
            }
        }
        if self.arch_lm.lags == 0 {
            return bad("arch_lm.lags must be at least 1".into());
        }
        if self.rolling.window < 2 {
            return bad("rolling.window must be at least 2".into());
        }
        if self.arma.p_max > 5 || self.arma.q_max > 5 {
            return bad("ARMA grid is limited to p, q <= 5".into());
        }
        if self.series.len() < 2 {
            return bad("at least two series are needed".into());
        }
        let mut names = HashSet::new();
        for s in &self.series {
            match (&s.path, &s.url) {
                (Some(_), None) => {}
                (None, Some(_)) => {
                    if self.cache.is_none() {
                        return bad(format!("series `{}` is remote but no [cache] dir is set", s.display_name()));
                    }
                }
                _ => return bad(format!("series `{}` needs exactly one of path and url", s.display_name())),
            }
            if !names.insert(s.display_name().to_string()) {
                return bad(format!("duplicate series name `{}`", s.display_name()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"
[[series]]
path = "a.csv"
value_column = "a"
[[series]]
path = "b.csv"
value_column = "b"
"#;

    #[test]
    fn defaults_fill_in() {
        let c = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.models.len(), 3);
        assert_eq!(c.arma, ArmaGrid { p_max: 3, q_max: 3 });
        assert_eq!(c.rolling.window, 5);
        assert_eq!(c.series[0].date_column, "date");
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = format!("outptu_dir = 1\n{MINIMAL}");
        assert!(matches!(PipelineConfig::from_toml_str(&text), Err(Error::Config(_))));
        let nested = MINIMAL.replace("value_column = \"b\"", "value_column = \"b\"\nlgo = true");
        assert!(PipelineConfig::from_toml_str(&nested).is_err());
    }

    #[test]
    fn window_order_and_models() {
        let text = format!("{MINIMAL}\n[window]\nstart = 2020-11-03\nend = 2020-03-05\n");
        assert!(PipelineConfig::from_toml_str(&text).is_err());
        let text = format!("models = []\n{MINIMAL}");
        assert!(PipelineConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = PipelineConfig::from_toml_str(MINIMAL).unwrap();
        let again = PipelineConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
