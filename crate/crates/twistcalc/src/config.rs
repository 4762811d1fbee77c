//! Algebra configuration files.
//!
//! A config names the full working context: dimension, one twist per
//! variable, the norm, and default bounds. Two interchangeable encodings
//! carry the same data: a flat TOML file and a JSON object. Rationals
//! travel as exact "num/den" strings; nothing is ever a float. Both
//! serializers are canonical, so a config round-trips byte-identically.
//!
//! ```toml
//! d = 2
//! norm = "5-adic"
//! order = 4
//! truncation = 6
//! twists = ["q:3/2", "shift:1"]
//! ```
//!
//! Twist encodings: `q:RATIONAL`, `shift:RATIONAL`, `mahler:INT`,
//! `custom:POLY` (a univariate polynomial in `x1`), `identity`.

use crate::coefficients::{scalar_from_str, NormContext};
use crate::error::{Error, Result};
use crate::parse::parse_poly;
use crate::twist::{TwistKind, TwistSpec};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraConfig {
    pub d: usize,
    pub twists: Vec<TwistKind>,
    pub norm: NormContext,
    /// Default truncation bound D for commands that take one.
    pub truncation: u32,
    /// Default expansion order N.
    pub order: u32,
}

impl AlgebraConfig {
    /// Structural and twist validity checks; every constructor runs this.
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be >= 1".into()));
        }
        if self.twists.len() != self.d {
            return Err(Error::Config(format!(
                "{} twists configured for d = {}",
                self.twists.len(),
                self.d
            )));
        }
        if self.truncation == 0 || self.order == 0 {
            return Err(Error::Config("truncation and order must be >= 1".into()));
        }
        // twist parameters are checked by the spec constructor
        self.to_spec().map(|_| ())
    }

    pub fn to_spec(&self) -> Result<TwistSpec> {
        TwistSpec::new(self.twists.clone(), self.norm.clone())
    }

    /// Canonical TOML: fixed key order, one key per line, twists as an
    /// inline string array.
    pub fn to_toml_string(&self) -> String {
        let twists: Vec<String> = self
            .twists
            .iter()
            .map(|k| format!("{:?}", kind_to_string(k)))
            .collect();
        format!(
            "d = {}\nnorm = \"{}\"\norder = {}\ntruncation = {}\ntwists = [{}]\n",
            self.d,
            self.norm,
            self.order,
            self.truncation,
            twists.join(", ")
        )
    }

    /// Canonical JSON object (keys sorted by serde_json's default map).
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "d": self.d,
            "norm": self.norm.to_string(),
            "order": self.order,
            "truncation": self.truncation,
            "twists": self.twists.iter().map(kind_to_string).collect::<Vec<_>>(),
        })
    }

    pub fn from_toml_str(text: &str) -> Result<AlgebraConfig> {
        let value: toml::Value = text
            .parse()
            .map_err(|e| Error::Config(format!("TOML syntax: {e}")))?;
        let table = value
            .as_table()
            .ok_or_else(|| Error::Config("config must be a table".into()))?;
        for key in table.keys() {
            if !matches!(key.as_str(), "d" | "norm" | "order" | "truncation" | "twists") {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }
        let int_field = |name: &str| -> Result<i64> {
            table
                .get(name)
                .ok_or_else(|| Error::Config(format!("missing key `{name}`")))?
                .as_integer()
                .ok_or_else(|| Error::Config(format!("`{name}` must be an integer")))
        };
        let d = int_field("d")?;
        let order = int_field("order")?;
        let truncation = int_field("truncation")?;
        let norm = table
            .get("norm")
            .ok_or_else(|| Error::Config("missing key `norm`".into()))?
            .as_str()
            .ok_or_else(|| Error::Config("`norm` must be a string".into()))?;
        let twists = table
            .get("twists")
            .ok_or_else(|| Error::Config("missing key `twists`".into()))?
            .as_array()
            .ok_or_else(|| Error::Config("`twists` must be an array of strings".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::Config("`twists` entries must be strings".into()))
                    .and_then(kind_from_str)
            })
            .collect::<Result<Vec<_>>>()?;
        build(d, norm, order, truncation, twists)
    }

    pub fn from_json_str(text: &str) -> Result<AlgebraConfig> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("JSON syntax: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("config must be an object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "d" | "norm" | "order" | "truncation" | "twists") {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }
        let int_field = |name: &str| -> Result<i64> {
            obj.get(name)
                .ok_or_else(|| Error::Config(format!("missing key `{name}`")))?
                .as_i64()
                .ok_or_else(|| Error::Config(format!("`{name}` must be an integer")))
        };
        let d = int_field("d")?;
        let order = int_field("order")?;
        let truncation = int_field("truncation")?;
        let norm = obj
            .get("norm")
            .ok_or_else(|| Error::Config("missing key `norm`".into()))?
            .as_str()
            .ok_or_else(|| Error::Config("`norm` must be a string".into()))?;
        let twists = obj
            .get("twists")
            .ok_or_else(|| Error::Config("missing key `twists`".into()))?
            .as_array()
            .ok_or_else(|| Error::Config("`twists` must be an array of strings".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::Config("`twists` entries must be strings".into()))
                    .and_then(kind_from_str)
            })
            .collect::<Result<Vec<_>>>()?;
        build(d, norm, order, truncation, twists)
    }

    /// Load from a path, choosing the format by extension (`.json` is JSON,
    /// anything else TOML).
    pub fn from_path(path: &std::path::Path) -> Result<AlgebraConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            AlgebraConfig::from_json_str(&text)
        } else {
            AlgebraConfig::from_toml_str(&text)
        }
    }
}

fn build(
    d: i64,
    norm: &str,
    order: i64,
    truncation: i64,
    twists: Vec<TwistKind>,
) -> Result<AlgebraConfig> {
    let to_u32 = |v: i64, name: &str| -> Result<u32> {
        u32::try_from(v).map_err(|_| Error::Config(format!("`{name}` out of range: {v}")))
    };
    let config = AlgebraConfig {
        d: usize::try_from(d).map_err(|_| Error::Config(format!("`d` out of range: {d}")))?,
        twists,
        norm: norm_from_str(norm)?,
        truncation: to_u32(truncation, "truncation")?,
        order: to_u32(order, "order")?,
    };
    config.validate()?;
    Ok(config)
}

fn kind_to_string(kind: &TwistKind) -> String {
    match kind {
        TwistKind::QTwist { q } => format!("q:{q}"),
        TwistKind::Shift { h } => format!("shift:{h}"),
        TwistKind::Mahler { l } => format!("mahler:{l}"),
        TwistKind::Custom { image } => format!("custom:{image}"),
        TwistKind::Identity => "identity".into(),
    }
}

fn kind_from_str(s: &str) -> Result<TwistKind> {
    if s == "identity" {
        return Ok(TwistKind::Identity);
    }
    let (kind, param) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("twist `{s}` is not KIND:PARAM")))?;
    match kind {
        "q" => Ok(TwistKind::QTwist { q: scalar_from_str(param)? }),
        "shift" => Ok(TwistKind::Shift { h: scalar_from_str(param)? }),
        "mahler" => {
            let l: u32 = param
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("mahler parameter `{param}`")))?;
            Ok(TwistKind::Mahler { l })
        }
        "custom" => Ok(TwistKind::Custom { image: parse_poly(param, 1)? }),
        other => Err(Error::Config(format!(
            "unknown twist kind `{other}` (expected q, shift, mahler, custom, identity)"
        ))),
    }
}

fn norm_from_str(s: &str) -> Result<NormContext> {
    if s == "trivial" {
        return Ok(NormContext::Trivial);
    }
    if let Some(p) = s.strip_suffix("-adic") {
        let p: u64 = p
            .parse()
            .map_err(|_| Error::Config(format!("norm `{s}`: prime expected before -adic")))?;
        return NormContext::padic(p);
    }
    Err(Error::Config(format!(
        "unknown norm `{s}` (expected \"trivial\" or \"P-adic\")"
    )))
}
