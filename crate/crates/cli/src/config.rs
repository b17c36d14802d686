//! TOML configuration files.
//!
//! Every number may be written as a TOML integer, a TOML float or a string
//! holding an exact rational (`"-2/3"`, `"0.25"`, `"1e-3"`). Floats are read
//! through their shortest decimal form, so `0.1` means `1/10`.
//!
//! ```toml
//! weights = ["1/4", "1/2", "1/4"]
//!
//! [params]
//! A = -1
//! a = 0
//! b = 1
//! c = 0
//! d = 1
//! e = 0
//! f = 0
//! ```

use diagnef::model::LatticeMatrix;
use diagnef::roots::{DiagonalVFParams, RootsError};
use diagnef::scalar::{parse_rational, ParseNumberError, Rational, Scalar};
use diagnef::series::{EliminationForm, OscillatoryBlock};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("field `{field}`: {source}")]
    Number { field: String, source: ParseNumberError },
    #[error("field `{field}`: non-finite number")]
    NonFinite { field: String },
    #[error("invalid parameters: {0}")]
    Params(#[from] RootsError),
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn exact(&self, field: &str) -> Result<Rational, ConfigError> {
        let text = match self {
            Number::Int(n) => n.to_string(),
            Number::Float(x) if !x.is_finite() => return Err(ConfigError::NonFinite { field: field.into() }),
            Number::Float(x) => x.to_string(),
            Number::Text(s) => s.clone(),
        };
        parse_rational(&text).map_err(|source| ConfigError::Number { field: field.into(), source })
    }

    fn float(&self, field: &str) -> Result<f64, ConfigError> {
        let x = self.exact(field)?.to_f64();
        if x.is_finite() {
            Ok(x)
        } else {
            Err(ConfigError::NonFinite { field: field.into() })
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawParams {
    Named {
        #[serde(rename = "A")]
        quadratic: Number,
        a: Number,
        b: Number,
        c: Number,
        d: Number,
        e: Number,
        f: Number,
    },
    List([Number; 7]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    denominator: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    lambda: Number,
    gamma: Number,
    #[serde(default)]
    a0: Option<Number>,
    #[serde(default)]
    a1: Option<Number>,
    #[serde(default)]
    b0: Option<Number>,
    #[serde(default)]
    b1: Option<Number>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    #[serde(default)]
    polynomial: Vec<Number>,
    #[serde(default)]
    exponentials: Vec<[Number; 2]>,
    #[serde(default)]
    linear_exponential: Option<[Number; 2]>,
    #[serde(default)]
    blocks: Vec<RawBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<RawParams>,
    weights: Option<Vec<Number>>,
    search: Option<RawSearch>,
    theta: Option<[Number; 2]>,
    matrix: Option<[[Number; 3]; 3]>,
    form: Option<RawForm>,
    r: Option<Number>,
}

/// A parsed configuration. Which fields are required depends on the
/// subcommand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub params: Option<DiagonalVFParams<Rational>>,
    pub weights: Option<Vec<Rational>>,
    /// Weight grid search with this common denominator.
    pub search: Option<u32>,
    pub theta: Option<[f64; 2]>,
    pub matrix: Option<LatticeMatrix>,
    pub form: Option<EliminationForm>,
    pub r: Option<Rational>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let params = raw
            .params
            .map(|p| {
                let values = match p {
                    RawParams::Named { quadratic, a, b, c, d, e, f } => [quadratic, a, b, c, d, e, f],
                    RawParams::List(v) => v,
                };
                let mut out: [Rational; 7] = Default::default();
                for ((slot, v), name) in out.iter_mut().zip(&values).zip(PARAM_NAMES) {
                    *slot = v.exact(&format!("params.{name}"))?;
                }
                Ok::<_, ConfigError>(DiagonalVFParams::from_array(out)?)
            })
            .transpose()?;
        let weights = raw
            .weights
            .map(|w| {
                w.iter()
                    .enumerate()
                    .map(|(i, x)| x.exact(&format!("weights[{i}]")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        let search = match raw.search {
            Some(RawSearch { denominator: 0 }) => {
                return Err(ConfigError::Invalid("search.denominator must be positive".into()))
            }
            s => s.map(|s| s.denominator),
        };
        let theta = raw
            .theta
            .map(|t| Ok::<_, ConfigError>([t[0].float("theta[0]")?, t[1].float("theta[1]")?]))
            .transpose()?;
        let matrix = raw
            .matrix
            .map(|rows| {
                let mut out: [[Rational; 3]; 3] = Default::default();
                for (i, row) in rows.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        out[i][j] = x.exact(&format!("matrix[{i}][{j}]"))?;
                    }
                }
                Ok::<_, ConfigError>(LatticeMatrix::new(out))
            })
            .transpose()?;
        let form = raw.form.map(parse_form).transpose()?;
        let r = raw.r.map(|r| r.exact("r")).transpose()?;
        Ok(Self { params, weights, search, theta, matrix, form, r })
    }

    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = if path == "-" {
            std::io::read_to_string(std::io::stdin())
        } else {
            std::fs::read_to_string(path)
        }
        .map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn require_params(&self) -> Result<&DiagonalVFParams<Rational>, ConfigError> {
        self.params.as_ref().ok_or(ConfigError::Missing("params"))
    }
}

pub const PARAM_NAMES: [&str; 7] = ["A", "a", "b", "c", "d", "e", "f"];

fn parse_form(raw: RawForm) -> Result<EliminationForm, ConfigError> {
    let opt = |x: &Option<Number>, field: String| x.as_ref().map_or(Ok(0.0), |n| n.float(&field));
    let polynomial = raw
        .polynomial
        .iter()
        .enumerate()
        .map(|(i, x)| x.float(&format!("form.polynomial[{i}]")))
        .collect::<Result<_, _>>()?;
    let exponentials = raw
        .exponentials
        .iter()
        .enumerate()
        .map(|(i, [a, l])| {
            Ok((a.float(&format!("form.exponentials[{i}][0]"))?, l.float(&format!("form.exponentials[{i}][1]"))?))
        })
        .collect::<Result<_, ConfigError>>()?;
    let linear_exponential = raw
        .linear_exponential
        .map(|[b, g]| Ok::<_, ConfigError>((b.float("form.linear_exponential[0]")?, g.float("form.linear_exponential[1]")?)))
        .transpose()?;
    let blocks = raw
        .blocks
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let f = |name: &str| format!("form.blocks[{i}].{name}");
            Ok(OscillatoryBlock {
                lambda: k.lambda.float(&f("lambda"))?,
                gamma: k.gamma.float(&f("gamma"))?,
                a0: opt(&k.a0, f("a0"))?,
                a1: opt(&k.a1, f("a1"))?,
                b0: opt(&k.b0, f("b0"))?,
                b1: opt(&k.b1, f("b1"))?,
            })
        })
        .collect::<Result<_, ConfigError>>()?;
    Ok(EliminationForm { polynomial, exponentials, linear_exponential, blocks })
}
