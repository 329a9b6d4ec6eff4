//! Experiment configuration: a plain `key = value` file with documented
//! defaults, plus `key=value` overrides from the command line.
//!
//! Lists are comma separated. Lines starting with `#` are comments. Unknown
//! keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::ComponentCount;

/// A feature selector the pipeline can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Klrfs,
    Anova,
    SvmRfe,
    /// Ranking read from `external_ranking`.
    External,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Klrfs => "klrfs",
            Method::Anova => "anova",
            Method::SvmRfe => "svm-rfe",
            Method::External => "external",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "klrfs" | "klr-fs" => Ok(Method::Klrfs),
            "anova" => Ok(Method::Anova),
            "svm-rfe" | "rfe" => Ok(Method::SvmRfe),
            "external" => Ok(Method::External),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Every configuration key with its default and a one-line description.
pub const SCHEMA: &[(&str, &str, &str)] = &[
    ("data", "", "dataset CSV path"),
    ("label_column", "label", "name of the label column"),
    ("positive_class", "1", "label value mapped to +1; the other value maps to -1"),
    ("methods", "klrfs,anova,svm-rfe", "selectors run by benchmark"),
    ("p_select", "10,20,30,40,50", "numbers of selected features"),
    ("delta", "0,0.2,0.4,0.6,0.8,1", "mixture coefficients swept by sweep-delta"),
    ("benchmark_delta", "0.6", "mixture coefficient used by select, evaluate and benchmark"),
    ("gamma_grid", "0.01,0.1,1,10", "RBF bandwidths: feature-kernel tuning and baseline SVM search"),
    ("c_grid", "0.1,1,10,100", "SVM C values searched by cross validation"),
    ("n_repeats", "5", "random train/test splits"),
    ("cv_folds", "5", "cross-validation folds on the training split"),
    ("train_fraction", "0.8", "fraction of samples in each training split"),
    ("seed", "0", "master random seed"),
    ("min_gain", "1e-6", "greedy selection stops when the alignment gain is at most this"),
    ("kpca_components", "auto", "kernel-PCA components: 'auto' or a fixed count"),
    ("kpca_variance", "0.95", "eigenvalue mass kept when kpca_components = auto"),
    ("kpca_max_components", "50", "component cap when kpca_components = auto"),
    ("svc_tol", "1e-3", "SVM stopping tolerance on the KKT violation"),
    ("rfe_c", "1", "C of the linear SVM inside SVM-RFE"),
    ("rfe_drop_fraction", "0.1", "fraction of surviving features removed per RFE round"),
    ("external_ranking", "", "ranking file (one feature name per line, best first)"),
    ("jobs", "0", "worker threads; 0 uses all cores"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: Option<PathBuf>,
    pub label_column: String,
    pub positive_class: String,
    pub methods: Vec<Method>,
    pub p_select: Vec<usize>,
    pub delta: Vec<f64>,
    pub benchmark_delta: f64,
    pub gamma_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    pub n_repeats: usize,
    pub cv_folds: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub min_gain: f64,
    pub kpca_components: Option<usize>,
    pub kpca_variance: f64,
    pub kpca_max_components: usize,
    pub svc_tol: f64,
    pub rfe_c: f64,
    pub rfe_drop_fraction: f64,
    pub external_ranking: Option<PathBuf>,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut cfg = ExperimentConfig {
            data: None,
            label_column: String::new(),
            positive_class: String::new(),
            methods: Vec::new(),
            p_select: Vec::new(),
            delta: Vec::new(),
            benchmark_delta: 0.0,
            gamma_grid: Vec::new(),
            c_grid: Vec::new(),
            n_repeats: 0,
            cv_folds: 0,
            train_fraction: 0.0,
            seed: 0,
            min_gain: 0.0,
            kpca_components: None,
            kpca_variance: 0.0,
            kpca_max_components: 0,
            svc_tol: 0.0,
            rfe_c: 0.0,
            rfe_drop_fraction: 0.0,
            external_ranking: None,
            jobs: 0,
        };
        for (key, default, _) in SCHEMA {
            cfg.set(key, default).expect("schema defaults parse");
        }
        cfg
    }
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_scalar(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: list must not be empty")));
    }
    Ok(items)
}

fn optional_path(value: &str) -> Option<PathBuf> {
    let v = value.trim();
    (!v.is_empty()).then(|| PathBuf::from(v))
}

impl ExperimentConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip(e))))?;
        }
        self.validate()
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data" => self.data = optional_path(value),
            "label_column" => self.label_column = value.trim().to_string(),
            "positive_class" => self.positive_class = value.trim().to_string(),
            "methods" => self.methods = parse_list(key, value)?,
            "p_select" => self.p_select = parse_list(key, value)?,
            "delta" => self.delta = parse_list(key, value)?,
            "benchmark_delta" => self.benchmark_delta = parse_scalar(key, value)?,
            "gamma_grid" => self.gamma_grid = parse_list(key, value)?,
            "c_grid" => self.c_grid = parse_list(key, value)?,
            "n_repeats" => self.n_repeats = parse_scalar(key, value)?,
            "cv_folds" => self.cv_folds = parse_scalar(key, value)?,
            "train_fraction" => self.train_fraction = parse_scalar(key, value)?,
            "seed" => self.seed = parse_scalar(key, value)?,
            "min_gain" => self.min_gain = parse_scalar(key, value)?,
            "kpca_components" => {
                self.kpca_components = match value.trim() {
                    "auto" => None,
                    v => Some(parse_scalar(key, v)?),
                }
            }
            "kpca_variance" => self.kpca_variance = parse_scalar(key, value)?,
            "kpca_max_components" => self.kpca_max_components = parse_scalar(key, value)?,
            "svc_tol" => self.svc_tol = parse_scalar(key, value)?,
            "rfe_c" => self.rfe_c = parse_scalar(key, value)?,
            "rfe_drop_fraction" => self.rfe_drop_fraction = parse_scalar(key, value)?,
            "external_ranking" => self.external_ranking = optional_path(value),
            "jobs" => self.jobs = parse_scalar(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction));
        }
        if self.p_select.contains(&0) {
            return bad("p_select values must be positive".into());
        }
        if let Some(d) = self.delta.iter().chain([&self.benchmark_delta]).find(|d| !(0.0..=1.0).contains(*d)) {
            return bad(format!("delta values must lie in [0, 1], got {d}"));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(**g > 0.0)) {
            return bad(format!("gamma_grid values must be positive, got {g}"));
        }
        if let Some(c) = self.c_grid.iter().chain([&self.rfe_c]).find(|c| !(**c > 0.0)) {
            return bad(format!("C values must be positive, got {c}"));
        }
        if self.n_repeats == 0 {
            return bad("n_repeats must be positive".into());
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if !(self.min_gain >= 0.0) {
            return bad(format!("min_gain must be non-negative, got {}", self.min_gain));
        }
        if self.kpca_components == Some(0) || self.kpca_max_components == 0 {
            return bad("kernel-PCA component counts must be positive".into());
        }
        if !(self.kpca_variance > 0.0 && self.kpca_variance <= 1.0) {
            return bad(format!("kpca_variance must lie in (0, 1], got {}", self.kpca_variance));
        }
        if !(self.svc_tol > 0.0) {
            return bad("svc_tol must be positive".into());
        }
        if !(self.rfe_drop_fraction > 0.0 && self.rfe_drop_fraction < 1.0) {
            return bad(format!("rfe_drop_fraction must lie in (0, 1), got {}", self.rfe_drop_fraction));
        }
        if self.methods.contains(&Method::External) && self.external_ranking.is_none() {
            return bad("method 'external' needs external_ranking".into());
        }
        Ok(())
    }

    pub fn component_count(&self) -> ComponentCount {
        match self.kpca_components {
            Some(p) => ComponentCount::Fixed(p),
            None => ComponentCount::Variance {
                fraction: self.kpca_variance,
                cap: self.kpca_max_components,
            },
        }
    }

    pub fn max_p(&self) -> usize {
        self.p_select.iter().copied().max().unwrap_or(1)
    }

    /// `key = value` lines for every key, in schema order.
    pub fn to_text(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut out = String::new();
        for (key, _, _) in SCHEMA {
            let value = match *key {
                "data" => path(&self.data),
                "label_column" => self.label_column.clone(),
                "positive_class" => self.positive_class.clone(),
                "methods" => self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
                "p_select" => join(&self.p_select),
                "delta" => join(&self.delta),
                "benchmark_delta" => self.benchmark_delta.to_string(),
                "gamma_grid" => join(&self.gamma_grid),
                "c_grid" => join(&self.c_grid),
                "n_repeats" => self.n_repeats.to_string(),
                "cv_folds" => self.cv_folds.to_string(),
                "train_fraction" => self.train_fraction.to_string(),
                "seed" => self.seed.to_string(),
                "min_gain" => self.min_gain.to_string(),
                "kpca_components" => self.kpca_components.map_or("auto".into(), |p| p.to_string()),
                "kpca_variance" => self.kpca_variance.to_string(),
                "kpca_max_components" => self.kpca_max_components.to_string(),
                "svc_tol" => self.svc_tol.to_string(),
                "rfe_c" => self.rfe_c.to_string(),
                "rfe_drop_fraction" => self.rfe_drop_fraction.to_string(),
                "external_ranking" => path(&self.external_ranking),
                "jobs" => self.jobs.to_string(),
                _ => unreachable!("schema key without serializer"),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Help text listing every key and its default.
pub fn schema_help() -> String {
    let mut out = String::from("Configuration keys (config file or key=value overrides):\n");
    for (key, default, help) in SCHEMA {
        let shown = if default.is_empty() { "<unset>" } else { default };
        let _ = writeln!(out, "  {key:<22} default: {shown:<22} {help}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.delta, vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(c.c_grid, vec![0.1, 1.0, 10.0, 100.0]);
        assert_eq!(c.gamma_grid, vec![0.01, 0.1, 1.0, 10.0]);
        assert_eq!(c.train_fraction, 0.8);
        assert_eq!(c.n_repeats, 5);
        assert_eq!(c.cv_folds, 5);
        assert_eq!(c.benchmark_delta, 0.6);
        assert_eq!(c.p_select, vec![10, 20, 30, 40, 50]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn text_round_trip_and_overrides() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# comment\nseed = 7\np_select = 5, 10\nmethods = klrfs,anova\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.p_select, vec![5, 10]);
        assert_eq!(c.methods, vec![Method::Klrfs, Method::Anova]);
        c.apply_overrides(&["benchmark_delta=1.0", "kpca_components=3"]).unwrap();
        assert_eq!(c.benchmark_delta, 1.0);
        assert_eq!(c.component_count(), ComponentCount::Fixed(3));
        let mut again = ExperimentConfig::default();
        again.apply_text(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_unknown_and_ill_typed() {
        let mut c = ExperimentConfig::default();
        assert!(matches!(c.apply_overrides(&["bogus=1"]), Err(Error::Config(_))));
        assert!(matches!(c.apply_overrides(&["seed=abc"]), Err(Error::Config(_))));
        assert!(matches!(c.apply_overrides(&["train_fraction=1.5"]), Err(Error::Config(_))));
        assert!(matches!(c.apply_overrides(&["delta=0.5,2"]), Err(Error::Config(_))));
        let mut c = ExperimentConfig::default();
        assert!(c.apply_overrides(&["methods=external"]).is_err());
        let err = ExperimentConfig::default().apply_text("seed 3").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn help_lists_every_key() {
        let h = schema_help();
        for (k, _, _) in SCHEMA {
            assert!(h.contains(k));
        }
    }
}
