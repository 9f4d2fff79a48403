//! JSON configuration: model files, run settings and command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use swift_core::density::DensityVariant;
use swift_core::models::{bs_cf, heston_cf, CharacteristicFunction, HestonParams, OptionStyle};
use swift_core::paramselect::{JRule, RefineRule, ScaleRule, ToleranceConfig};
use swift_core::payoff::{PayoffKind, PayoffVariant};

/// Malformed configuration; maps to exit status 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(try_from = "Map<String, Value>")]
pub enum ModelSpec {
    Heston {
        kappa: f64,
        theta: f64,
        sigma: f64,
        rho: f64,
        v0: f64,
    },
    Bs {
        vol: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HestonFields {
    kappa: f64,
    theta: f64,
    sigma: f64,
    rho: f64,
    v0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BsFields {
    vol: f64,
}

fn fields<T: DeserializeOwned>(map: Map<String, Value>) -> std::result::Result<T, String> {
    serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.inner().to_string()
        } else {
            format!("key `{path}`: {}", e.inner())
        }
    })
}

impl TryFrom<Map<String, Value>> for ModelSpec {
    type Error = String;

    fn try_from(mut map: Map<String, Value>) -> std::result::Result<Self, String> {
        let tag = match map.remove("model") {
            Some(Value::String(s)) => s,
            Some(other) => return Err(format!("key `model`: expected a string, got {other}")),
            None => return Err("missing field `model`".into()),
        };
        match tag.as_str() {
            "heston" => {
                let HestonFields { kappa, theta, sigma, rho, v0 } = fields(map)?;
                Ok(ModelSpec::Heston { kappa, theta, sigma, rho, v0 })
            }
            "bs" => {
                let BsFields { vol } = fields(map)?;
                Ok(ModelSpec::Bs { vol })
            }
            other => Err(format!("key `model`: unknown model `{other}`, expected `heston` or `bs`")),
        }
    }
}

impl ModelSpec {
    pub fn build(&self, maturity: f64) -> Result<Box<dyn CharacteristicFunction>> {
        Ok(match *self {
            ModelSpec::Heston { kappa, theta, sigma, rho, v0 } => {
                Box::new(heston_cf(HestonParams::new(kappa, theta, sigma, rho, v0)?, maturity)?)
            }
            ModelSpec::Bs { vol } => Box::new(bs_cf(vol, maturity)?),
        })
    }

    /// Heston parameters of the refinement example, `T = 0.01`.
    pub fn refinement_example() -> Self {
        ModelSpec::Heston { kappa: 4.0, theta: 0.25, sigma: 1.0, rho: -0.5, v0: 0.01 }
    }

    /// Heston corner case with a very wide density, `T = 10`.
    pub fn wide_corner() -> Self {
        ModelSpec::Heston { kappa: 0.01, theta: 1.0, sigma: 3.0, rho: -0.95, v0: 1e-4 }
    }
}

/// Which options to price on a strike grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleChoice {
    Put,
    #[default]
    Call,
    /// Puts below the forward, calls above.
    Otm,
}

impl StyleChoice {
    pub fn style_for(self, forward: f64, strike: f64) -> OptionStyle {
        match self {
            StyleChoice::Put => OptionStyle::Put,
            StyleChoice::Call => OptionStyle::Call,
            StyleChoice::Otm if strike < forward => OptionStyle::Put,
            StyleChoice::Otm => OptionStyle::Call,
        }
    }
}

/// One column group of the out-of-the-money error table.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub label: String,
    pub model: ModelSpec,
    pub forward: f64,
    pub maturity: f64,
    pub strike_min: f64,
    pub strike_max: f64,
    pub n_strikes: usize,
    pub m: u32,
    pub log2_j: u32,
    #[serde(rename = "L", default = "default_l")]
    pub l: f64,
}

fn default_l() -> f64 {
    8.0
}

impl ParameterSet {
    pub fn strikes(&self) -> Vec<f64> {
        if self.n_strikes <= 1 {
            return vec![self.strike_min];
        }
        let step = (self.strike_max - self.strike_min) / (self.n_strikes - 1) as f64;
        (0..self.n_strikes).map(|i| self.strike_min + step * i as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: Option<ModelSpec>,
    pub forward: f64,
    pub maturity: f64,
    pub discount: f64,
    pub strikes: Vec<f64>,
    pub style: StyleChoice,
    /// Fixed scale; skips scale selection when set.
    pub m: Option<u32>,
    /// Fixed `log2 J` for the payoff (and the density unless overridden).
    pub log2_j: Option<u32>,
    pub log2_j_density: Option<u32>,
    pub tolerances: ToleranceConfig,
    pub density: DensityVariant,
    pub payoff: PayoffKind,
    pub n_direct: Option<usize>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub sets: Vec<ParameterSet>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            forward: 100.0,
            maturity: 1.0,
            discount: 1.0,
            strikes: vec![100.0],
            style: StyleChoice::Call,
            m: None,
            log2_j: None,
            log2_j_density: None,
            tolerances: ToleranceConfig::default(),
            density: DensityVariant::MidpointVieta,
            payoff: PayoffKind::Sem0,
            n_direct: None,
            out: None,
            trace: None,
            sets: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn payoff_variant(&self) -> PayoffVariant {
        PayoffVariant { kind: self.payoff, n_direct: self.n_direct }
    }
}

/// Parses JSON, reporting the path of the offending key on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> std::result::Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            ConfigError(format!("{origin}: {}", e.inner()))
        } else {
            ConfigError(format!("{origin}: key `{path}`: {}", e.inner()))
        }
    })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_json(&text, &path.display().to_string())?)
}

/// Parses an enum flag through its serde name; `PI_KAPPA`, `pi-kappa` and
/// `pi_kappa` are all accepted.
pub fn parse_choice<T: DeserializeOwned>(flag: &str, raw: &str) -> std::result::Result<T, ConfigError> {
    let name = raw.trim().to_ascii_lowercase().replace('-', "_");
    serde_json::from_value(serde_json::Value::String(name))
        .map_err(|e| ConfigError(format!("--{flag}: {e}")))
}

/// Parses `100,101,110` into strikes.
pub fn parse_strikes(raw: &str) -> std::result::Result<Vec<f64>, ConfigError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| ConfigError(format!("--strikes: `{}`: {e}", s.trim())))
        })
        .collect()
}

/// Command-line values that override the file configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<PathBuf>,
    pub eps_m: Option<f64>,
    pub eps_f: Option<f64>,
    pub l: Option<f64>,
    pub scale_rule: Option<String>,
    pub j_rule: Option<String>,
    pub refine: Option<String>,
    pub density: Option<String>,
    pub payoff: Option<String>,
    pub strikes: Option<String>,
    pub out: Option<PathBuf>,
    pub m: Option<u32>,
    pub log2_j: Option<u32>,
    pub forward: Option<f64>,
    pub maturity: Option<f64>,
    pub trace: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(path) = &self.model {
            cfg.model = Some(load_json(path)?);
        }
        let t = &mut cfg.tolerances;
        if let Some(v) = self.eps_m {
            t.eps_m = v;
        }
        if let Some(v) = self.eps_f {
            t.eps_f = v;
        }
        if let Some(v) = self.l {
            t.l = v;
        }
        if let Some(s) = &self.scale_rule {
            t.scale_rule = parse_choice::<ScaleRule>("scale-rule", s)?;
        }
        if let Some(s) = &self.j_rule {
            t.j_rule = parse_choice::<JRule>("j-rule", s)?;
        }
        if let Some(s) = &self.refine {
            t.refine_rule = parse_choice::<RefineRule>("refine", s)?;
        }
        if let Some(s) = &self.density {
            cfg.density = parse_choice("density", s)?;
        }
        if let Some(s) = &self.payoff {
            cfg.payoff = parse_choice("payoff", s)?;
        }
        if let Some(s) = &self.strikes {
            cfg.strikes = parse_strikes(s)?;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.trace.is_some() {
            cfg.trace = self.trace.clone();
        }
        if self.m.is_some() {
            cfg.m = self.m;
        }
        if self.log2_j.is_some() {
            cfg.log2_j = self.log2_j;
        }
        if let Some(v) = self.forward {
            cfg.forward = v;
        }
        if let Some(v) = self.maturity {
            cfg.maturity = v;
        }
        cfg.tolerances.validate()?;
        if cfg.strikes.is_empty() {
            bail!(ConfigError("strikes: at least one strike is required".into()));
        }
        Ok(())
    }
}
