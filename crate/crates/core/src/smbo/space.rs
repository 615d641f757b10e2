use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbt::GbtConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Real,
    Integer,
}

/// One tuned hyperparameter. `lower`/`upper` are on the raw scale, i.e. the
/// exponent when `log2` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: ParamKind,
    pub log2: bool,
}

impl ParamDef {
    fn new(name: &str, lower: f64, upper: f64, kind: ParamKind, log2: bool) -> Self {
        ParamDef {
            name: name.to_string(),
            lower,
            upper,
            kind,
            log2,
        }
    }

    pub fn raw(&self, u: f64) -> f64 {
        self.lower + u * (self.upper - self.lower)
    }

    pub fn value(&self, u: f64) -> f64 {
        let raw = self.raw(u);
        let v = if self.log2 { raw.exp2() } else { raw };
        match self.kind {
            ParamKind::Integer => v.round(),
            ParamKind::Real => v,
        }
    }

    pub fn unit(&self, value: f64) -> f64 {
        let raw = if self.log2 { value.log2() } else { value };
        (raw - self.lower) / (self.upper - self.lower)
    }
}

/// A box of hyperparameters mapped from the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub params: Vec<ParamDef>,
}

impl ParamSpace {
    /// The default eight-parameter boosting space.
    pub fn simple() -> Self {
        use ParamKind::*;
        ParamSpace {
            params: vec![
                ParamDef::new("eta", 0.01, 0.2, Real, false),
                ParamDef::new("gamma", -7.0, 6.0, Real, true),
                ParamDef::new("max_depth", 3.0, 20.0, Integer, false),
                ParamDef::new("colsample_bytree", 0.5, 1.0, Real, false),
                ParamDef::new("colsample_bylevel", 0.5, 1.0, Real, false),
                ParamDef::new("lambda", -10.0, 10.0, Real, true),
                ParamDef::new("alpha", -10.0, 10.0, Real, true),
                ParamDef::new("subsample", 0.5, 1.0, Real, false),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point has {} coordinates, space has {}",
                point.len(),
                self.dim()
            )));
        }
        if let Some(u) = point.iter().find(|u| !(0.0..=1.0).contains(*u)) {
            return Err(Error::invalid(format!("coordinate {u} outside [0,1]")));
        }
        Ok(())
    }

    /// Raw-scale values `lower + u·(upper − lower)`.
    pub fn raw(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        Ok(self.params.iter().zip(point).map(|(p, &u)| p.raw(u)).collect())
    }

    /// Final values: `2^raw` for log-scaled parameters, integers rounded half
    /// away from zero.
    pub fn decode(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        Ok(self.params.iter().zip(point).map(|(p, &u)| p.value(u)).collect())
    }

    /// Inverse of [`decode`](Self::decode) on the unit cube.
    pub fn encode(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.dim() {
            return Err(Error::invalid("value count does not match the space"));
        }
        Ok(self.params.iter().zip(values).map(|(p, &v)| p.unit(v)).collect())
    }
}

/// Writes the decoded point into the tuned fields of `base`.
pub fn decode_config(point: &[f64], space: &ParamSpace, base: &GbtConfig) -> Result<GbtConfig> {
    let values = space.decode(point)?;
    let mut cfg = base.clone();
    for (p, v) in space.params.iter().zip(values) {
        match p.name.as_str() {
            "eta" => cfg.eta = v,
            "gamma" => cfg.gamma = v,
            "max_depth" => cfg.max_depth = v as usize,
            "colsample_bytree" => cfg.colsample_bytree = v,
            "colsample_bylevel" => cfg.colsample_bylevel = v,
            "lambda" => cfg.lambda = v,
            "alpha" => cfg.alpha = v,
            "subsample" => cfg.subsample = v,
            other => return Err(Error::invalid(format!("unknown hyperparameter {other:?}"))),
        }
    }
    Ok(cfg)
}

/// Unit-cube coordinates of the tuned fields of `cfg`.
pub fn encode_config(cfg: &GbtConfig, space: &ParamSpace) -> Result<Vec<f64>> {
    let values = space
        .params
        .iter()
        .map(|p| match p.name.as_str() {
            "eta" => Ok(cfg.eta),
            "gamma" => Ok(cfg.gamma),
            "max_depth" => Ok(cfg.max_depth as f64),
            "colsample_bytree" => Ok(cfg.colsample_bytree),
            "colsample_bylevel" => Ok(cfg.colsample_bylevel),
            "lambda" => Ok(cfg.lambda),
            "alpha" => Ok(cfg.alpha),
            "subsample" => Ok(cfg.subsample),
            other => Err(Error::invalid(format!("unknown hyperparameter {other:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    space.encode(&values)
}
