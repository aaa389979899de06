//! Flat `key = value` parameter files.
//!
//! ```text
//! # experimental array
//! n_cavities = 60
//! xi = 6.47e-4
//! q_factor = 1.1e6
//! ```
//!
//! Recognised keys are `n_cavities`, `omega_c`, `alpha`, `xi`, `q_factor`
//! and `period`. Lines starting with `#` or `;` are comments. Unknown and
//! repeated keys are errors, as is giving both `alpha` and `xi`.

use crate::error::{Error, Result};
use crate::params::ArrayParams;

/// Coupling strength as given by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Alpha(f64),
    Xi(f64),
}

/// Partially specified [`ArrayParams`]. Layers merge with [`ParamSource::overridden_by`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamSource {
    pub n_cavities: Option<usize>,
    pub omega_c: Option<f64>,
    pub coupling: Option<Coupling>,
    pub q_factor: Option<f64>,
    pub period: Option<f64>,
}

impl ParamSource {
    pub fn parse(text: &str) -> Result<Self> {
        let mut src = ParamSource::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            let real = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| at(format!("{key}: not a number: {value:?}")))
            };
            let duplicate = || at(format!("duplicate key {key:?}"));
            match key {
                "n_cavities" => {
                    if src.n_cavities.is_some() {
                        return Err(duplicate());
                    }
                    let n = value
                        .parse::<usize>()
                        .map_err(|_| at(format!("n_cavities: not a count: {value:?}")))?;
                    src.n_cavities = Some(n);
                }
                "omega_c" => {
                    if src.omega_c.is_some() {
                        return Err(duplicate());
                    }
                    src.omega_c = Some(real()?);
                }
                "alpha" | "xi" => {
                    match src.coupling {
                        Some(Coupling::Alpha(_)) if key == "alpha" => return Err(duplicate()),
                        Some(Coupling::Xi(_)) if key == "xi" => return Err(duplicate()),
                        Some(_) => return Err(at("alpha and xi are mutually exclusive".into())),
                        None => {}
                    }
                    let v = real()?;
                    src.coupling = Some(if key == "alpha" {
                        Coupling::Alpha(v)
                    } else {
                        Coupling::Xi(v)
                    });
                }
                "q_factor" => {
                    if src.q_factor.is_some() {
                        return Err(duplicate());
                    }
                    src.q_factor = Some(real()?);
                }
                "period" => {
                    if src.period.is_some() {
                        return Err(duplicate());
                    }
                    src.period = Some(real()?);
                }
                other => return Err(at(format!("unknown key {other:?}"))),
            }
        }
        Ok(src)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Values in `other` win over values in `self`.
    pub fn overridden_by(self, other: ParamSource) -> ParamSource {
        ParamSource {
            n_cavities: other.n_cavities.or(self.n_cavities),
            omega_c: other.omega_c.or(self.omega_c),
            coupling: other.coupling.or(self.coupling),
            q_factor: other.q_factor.or(self.q_factor),
            period: other.period.or(self.period),
        }
    }

    /// Applies the defaults `ω_c = 1`, `L = 1` and validates.
    pub fn resolve(&self) -> Result<ArrayParams> {
        let missing = |what: &str| Error::Config(format!("missing required parameter {what}"));
        let n_cavities = self.n_cavities.ok_or_else(|| missing("n_cavities"))?;
        let q_factor = self.q_factor.ok_or_else(|| missing("q_factor"))?;
        let omega_c = self.omega_c.unwrap_or(1.0);
        let alpha = match self.coupling.ok_or_else(|| missing("alpha or xi"))? {
            Coupling::Alpha(a) => a,
            Coupling::Xi(xi) => xi / (2.0 * omega_c),
        };
        ArrayParams {
            n_cavities,
            omega_c,
            alpha,
            q_factor,
            period: self.period.unwrap_or(1.0),
        }
        .validate()
    }
}
