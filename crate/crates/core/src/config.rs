//! Job configuration files.
//!
//! The native format is one `key: value` pair per line with `#` comments;
//! lists are comma separated. A JSON object with the same keys is accepted as
//! well. Unknown keys are rejected by name.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::geodesic::{Integrator, DEFAULT_ADAPTIVE_TOL};
use crate::hyperbolic::HPoint;
use crate::metric::{potential_by_name, MetricSpec, ScalarPotential, WarpProfile};
use crate::report::fmt_f;
use crate::sampling::SampleBox;

pub const DEFAULT_TMAX: f64 = 50.0;
pub const DEFAULT_STEP: f64 = 1e-3;

/// Every key a config file may contain, in echo order.
pub const KEYS: &[&str] = &[
    "job",
    "kind",
    "L",
    "eps",
    "center_x",
    "center_y",
    "r0",
    "r1",
    "alpha",
    "potential",
    "T",
    "Tmax",
    "step",
    "integrator",
    "N",
    "seed",
    "anchor",
    "x0",
    "y0",
    "t0",
    "dir_x",
    "dir_y",
    "dir_t",
    "box_x_min",
    "box_x_max",
    "box_y_min",
    "box_y_max",
    "box_t_min",
    "box_t_max",
    "cutoff",
    "spectrum_file",
    "generators_file",
    "max_word",
    "n_max",
    "R_max",
    "kappa",
    "genus",
    "lambda1",
    "diam",
    "v",
    "r_list",
    "w_list",
    "ell_collar",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub job: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "Tmax")]
    pub tmax: f64,
    pub step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrator: Option<String>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_y_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_word: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(rename = "R_max", skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diam: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_collar: Option<f64>,
}

fn default_map() -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("Tmax".into(), Value::from(DEFAULT_TMAX));
    m.insert("step".into(), Value::from(DEFAULT_STEP));
    m.insert("seed".into(), Value::from(0u64));
    m
}

fn scalar(text: &str) -> Value {
    if let Ok(i) = text.parse::<u64>() {
        return Value::from(i);
    }
    if let Ok(i) = text.parse::<i64>() {
        return Value::from(i);
    }
    if let Ok(f) = text.parse::<f64>() {
        if let Some(n) = Number::from_f64(f) {
            return Value::Number(n);
        }
    }
    Value::String(text.to_string())
}

const LIST_KEYS: &[&str] = &["r_list", "w_list"];

fn parse_key_values(text: &str) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once(':').ok_or_else(|| Error::ConfigSyntax {
            line: i + 1,
            reason: format!("expected `key: value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::ConfigSyntax {
                line: i + 1,
                reason: "empty key or value".into(),
            });
        }
        let parsed = if LIST_KEYS.contains(&key) {
            Value::Array(value.split(',').map(|s| scalar(s.trim())).collect())
        } else {
            scalar(value)
        };
        if map.insert(key.to_string(), parsed).is_some() {
            return Err(Error::ConfigSyntax {
                line: i + 1,
                reason: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

/// Parses config text. JSON is recognized by a leading `{`.
pub fn parse_config(text: &str) -> Result<JobConfig> {
    let map = if text.trim_start().starts_with('{') {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => {
                return Err(Error::ConfigSyntax {
                    line: 1,
                    reason: "JSON config must be an object".into(),
                })
            }
            Err(e) => {
                return Err(Error::ConfigSyntax {
                    line: e.line(),
                    reason: e.to_string(),
                })
            }
        }
    } else {
        parse_key_values(text)?
    };
    if let Some(unknown) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::UnknownKey(unknown.clone()));
    }
    let mut full = default_map();
    for (k, v) in &map {
        full.insert(k.clone(), v.clone());
    }
    let cfg: JobConfig = serde_json::from_value(Value::Object(full)).map_err(|e| {
        // serde does not report which field had the wrong type; retry per key
        let key = map
            .iter()
            .find(|(k, v)| {
                let mut single = default_map();
                single.insert((*k).clone(), (*v).clone());
                serde_json::from_value::<JobConfig>(Value::Object(single)).is_err()
            })
            .map(|(k, _)| k.clone())
            .unwrap_or_else(|| "config".into());
        Error::value(&key, e.to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<JobConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn positive(key: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::value(key, format!("{x} must be > 0"))),
        _ => Ok(()),
    }
}

fn finite(key: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !x.is_finite() => Err(Error::value(key, "must be finite")),
        _ => Ok(()),
    }
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(kind) = &self.kind {
            if !matches!(kind.to_ascii_lowercase().as_str(), "product" | "warped" | "twisted") {
                return Err(Error::value(
                    "kind",
                    format!("`{kind}` is not one of Product, Warped, Twisted"),
                ));
            }
        }
        for (key, v) in [
            ("L", self.l),
            ("T", self.t),
            ("anchor", self.anchor),
            ("cutoff", self.cutoff),
            ("R_max", self.r_max),
            ("kappa", self.kappa),
            ("lambda1", self.lambda1),
            ("diam", self.diam),
            ("ell_collar", self.ell_collar),
            ("r0", self.r0),
            ("r1", self.r1),
            ("center_y", self.center_y),
            ("y0", self.y0),
            ("box_y_min", self.box_y_min),
        ] {
            positive(key, v)?;
        }
        positive("Tmax", Some(self.tmax))?;
        positive("step", Some(self.step))?;
        if self.step > 1.0 {
            return Err(Error::value("step", "must be <= 1"));
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(Error::value("eps", format!("{eps} must be > 0")));
            }
        }
        if let (Some(r0), Some(r1)) = (self.r0, self.r1) {
            if r1 <= r0 {
                return Err(Error::value("r1", "must exceed r0"));
            }
        }
        for (key, v) in [
            ("center_x", self.center_x),
            ("alpha", self.alpha),
            ("x0", self.x0),
            ("t0", self.t0),
            ("dir_x", self.dir_x),
            ("dir_y", self.dir_y),
            ("dir_t", self.dir_t),
            ("box_x_min", self.box_x_min),
            ("box_x_max", self.box_x_max),
            ("box_y_max", self.box_y_max),
            ("box_t_min", self.box_t_min),
            ("box_t_max", self.box_t_max),
        ] {
            finite(key, v)?;
        }
        if let Some(v) = self.v {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::value("v", "must be >= 0"));
            }
        }
        if let Some(p) = &self.potential {
            potential_by_name(p).map_err(|e| Error::value("potential", e.to_string()))?;
        }
        if let Some(i) = &self.integrator {
            if i != "rk4" && i != "adaptive" {
                return Err(Error::value("integrator", "must be `rk4` or `adaptive`"));
            }
        }
        if self.n == Some(0) {
            return Err(Error::value("N", "must be >= 1"));
        }
        if let Some(m) = self.max_word {
            if m > crate::invariants::MAX_WORD {
                return Err(Error::value(
                    "max_word",
                    format!("must be <= {}", crate::invariants::MAX_WORD),
                ));
            }
        }
        for (key, list) in [("r_list", &self.r_list), ("w_list", &self.w_list)] {
            if let Some(list) = list {
                if list.is_empty() || list.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    return Err(Error::value(key, "must be a non-empty list of values > 0"));
                }
            }
        }
        self.sample_box()?;
        if let Some(kind) = &self.kind {
            // warped configs without eps are completed per job
            if !(kind.eq_ignore_ascii_case("warped") && self.eps.is_none()) {
                self.metric_spec()?;
            }
        }
        Ok(())
    }

    /// Builds the metric; `kind` is required.
    pub fn metric_spec(&self) -> Result<MetricSpec> {
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| Error::value("kind", "required for this job"))?;
        let as_value = |key: &'static str| {
            move |e: Error| match e {
                Error::ConfigValue { .. } => e,
                other => Error::value(key, other.to_string()),
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "product" => MetricSpec::product(self.l.unwrap_or(1.0)).map_err(as_value("L")),
            "warped" => {
                let center = HPoint::new(self.center_x.unwrap_or(0.0), self.center_y.unwrap_or(1.0))
                    .map_err(as_value("center_y"))?;
                let eps = self.eps.ok_or_else(|| Error::value("eps", "required for Warped"))?;
                let profile = match (self.r0, self.r1) {
                    (None, None) => WarpProfile::new(center, eps),
                    (r0, r1) => WarpProfile::with_radii(center, eps, r0.unwrap_or(0.5), r1.unwrap_or(0.75)),
                }
                .map_err(as_value("eps"))?;
                Ok(MetricSpec::warped(profile))
            }
            _ => {
                let potential: Arc<dyn ScalarPotential> =
                    potential_by_name(self.potential.as_deref().unwrap_or("log_y")).map_err(as_value("potential"))?;
                MetricSpec::twisted(self.alpha.unwrap_or(0.0), potential).map_err(as_value("alpha"))
            }
        }
    }

    pub fn integrator(&self) -> Integrator {
        match self.integrator.as_deref() {
            Some("adaptive") => Integrator::Adaptive {
                initial_step: self.step,
                tolerance: DEFAULT_ADAPTIVE_TOL,
            },
            _ => Integrator::Fixed { step: self.step },
        }
    }

    /// Sampling box with defaults `x ∈ [−1, 1]`, `y ∈ [0.5, 2]`, `t ∈ [0, 1]`.
    pub fn sample_box(&self) -> Result<SampleBox> {
        let x = (self.box_x_min.unwrap_or(-1.0), self.box_x_max.unwrap_or(1.0));
        let y = (self.box_y_min.unwrap_or(0.5), self.box_y_max.unwrap_or(2.0));
        let t = (self.box_t_min.unwrap_or(0.0), self.box_t_max.unwrap_or(1.0));
        SampleBox::new(x, y, t).map_err(|e| Error::value("box", e.to_string()))
    }

    /// Resolves a file key relative to the directory of the config file.
    pub fn resolve(&self, base: &Path, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Native-format text that parses back to an identical config.
    pub fn echo(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let map = value.as_object().expect("config is an object");
        let mut out = String::new();
        for key in KEYS {
            let Some(v) = map.get(*key) else { continue };
            let text = match v {
                Value::Array(items) => items
                    .iter()
                    .map(|x| fmt_f(x.as_f64().unwrap_or(f64::NAN)))
                    .collect::<Vec<_>>()
                    .join(", "),
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_f64() => fmt_f(n.as_f64().unwrap_or(f64::NAN)),
                other => other.to_string(),
            };
            let _ = writeln!(out, "{key}: {text}");
        }
        out
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
