//! Flat JSON run configuration shared by every command.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::eigensolver::SolveConfig;
use crate::error::{Error, Result};
use crate::exponents::{ExponentVector, FractionalVector};
use crate::grid::{BoxDomain, TensorGrid};
use crate::norms::{FractionalSetup, Window};

/// A scalar broadcast to every axis, or one value per axis.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Scalar(T),
    List(Vec<T>),
}

impl<T: Clone> PerAxis<T> {
    pub fn expand(&self, n: usize) -> Vec<T> {
        match self {
            PerAxis::Scalar(x) => vec![x.clone(); n],
            PerAxis::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Local,
    Fractional,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub p: Option<Vec<f64>>,
    pub s: Option<PerAxis<f64>>,
    /// Dimension for `validate`; defaults to the length of `counts`, then of `p`.
    pub n: Option<usize>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub counts: Option<PerAxis<usize>>,
    /// Truncation window in lattice steps; omitted means the minimal exact one.
    pub window: Option<PerAxis<usize>>,
    pub normalized: Option<bool>,
    pub mode: Option<Mode>,
    pub field: Option<PathBuf>,
    pub s_list: Option<Vec<PerAxis<f64>>>,
    pub eigen_index: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub solve: SolveConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn raw_p(&self) -> Result<&[f64]> {
        self.p
            .as_deref()
            .ok_or_else(|| Error::Config("missing key `p`".into()))
    }

    pub fn dim(&self) -> Result<usize> {
        if let Some(n) = self.n {
            return Ok(n);
        }
        if let Some(PerAxis::List(c)) = &self.counts {
            return Ok(c.len());
        }
        Ok(self.raw_p()?.len())
    }

    pub fn exponents(&self) -> Result<ExponentVector<f64>> {
        ExponentVector::new(self.raw_p()?.to_vec())
    }

    pub fn raw_s(&self) -> Result<Option<Vec<f64>>> {
        Ok(match &self.s {
            Some(s) => Some(s.expand(self.dim()?)),
            None => None,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or(if self.s.is_some() {
            Mode::Fractional
        } else {
            Mode::Local
        })
    }

    pub fn window(&self) -> Window {
        match &self.window {
            None => Window::Minimal,
            Some(PerAxis::Scalar(m)) => Window::Uniform(*m),
            Some(PerAxis::List(v)) => Window::PerAxis(v.clone()),
        }
    }

    pub fn grid(&self) -> Result<TensorGrid<f64>> {
        let n = self.dim()?;
        let counts = self
            .counts
            .as_ref()
            .ok_or_else(|| Error::Config("missing key `counts`".into()))?
            .expand(n);
        let lower = self.lower.clone().unwrap_or_else(|| vec![0.0; n]);
        let upper = self.upper.clone().unwrap_or_else(|| vec![1.0; n]);
        TensorGrid::new(BoxDomain::new(lower, upper)?, counts)
    }

    pub fn fractional_setup(&self, s: &[f64]) -> Result<FractionalSetup<f64>> {
        Ok(FractionalSetup::new(FractionalVector::new(s.to_vec())?, self.exponents()?)
            .with_window(self.window())
            .normalized(self.normalized.unwrap_or(true)))
    }

    pub fn s_list(&self) -> Result<Vec<FractionalVector<f64>>> {
        let n = self.dim()?;
        self.s_list
            .as_ref()
            .ok_or_else(|| Error::Config("missing key `s_list`".into()))?
            .iter()
            .map(|s| FractionalVector::new(s.expand(n)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_keys_and_broadcast() {
        let cfg = RunConfig::parse(
            r#"{"p": [2.0, 3.0], "s": 0.5, "counts": 7, "upper": [1.0, 2.0],
                "tol_residual": 1e-7, "restarts": 3, "window": [40, 50]}"#,
        )
        .unwrap();
        assert_eq!(cfg.dim().unwrap(), 2);
        assert_eq!(cfg.raw_s().unwrap(), Some(vec![0.5, 0.5]));
        assert_eq!(cfg.mode(), Mode::Fractional);
        assert_eq!(cfg.solve.tol_residual, 1e-7);
        assert_eq!(cfg.solve.restarts, 3);
        assert_eq!(cfg.solve.max_iter, SolveConfig::default().max_iter);
        let g = cfg.grid().unwrap();
        assert_eq!(g.counts(), &[7, 7]);
        assert_eq!(g.spacing(1), 0.25);
        assert_eq!(cfg.window(), Window::PerAxis(vec![40, 50]));
    }

    #[test]
    fn malformed_json_is_a_config_error() {
        assert!(matches!(RunConfig::parse("{\"p\": [2,"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("{\"p\": \"two\"}"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("{}").unwrap().exponents(), Err(Error::Config(_))));
    }
}
