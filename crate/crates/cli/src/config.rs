//! Run configuration: a flat TOML file whose keys mirror the command-line
//! flags. Flags override file keys; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hopflab::{ExecMode, QuadratureSpec, VolumeForm};

/// A list of reals written as a number, an array, a comma list `"a,b,c"`
/// or an inclusive range `"a:b:step"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealList {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

impl RealList {
    pub fn resolve(&self) -> Result<Vec<f64>, String> {
        match self {
            RealList::One(x) => Ok(vec![*x]),
            RealList::Many(v) => Ok(v.clone()),
            RealList::Text(s) => parse_real_list(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeList {
    Many(Vec<usize>),
    Text(String),
}

impl NodeList {
    pub fn resolve(&self) -> Result<Vec<usize>, String> {
        match self {
            NodeList::Many(v) => Ok(v.clone()),
            NodeList::Text(s) => s
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad node count '{p}'")))
                .collect(),
        }
    }
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("bad number '{}'", s.trim()))
}

pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty list".into());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(format!("range '{s}' must be a:b:step"));
        };
        return range(parse_real(a)?, parse_real(b)?, parse_real(step)?);
    }
    s.split(',').map(parse_real).collect()
}

/// Inclusive range; the end point is kept when it lies on the grid up to
/// rounding.
pub fn range(a: f64, b: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(format!("invalid range {a}:{b}:{step}"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(format!("range {a}:{b}:{step} has too many points"));
    }
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<RealList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<RealList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<NodeList>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_form: Option<VolumeForm>,
    /// `parallel` or `sequential`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_json: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_csv: Option<PathBuf>,
}

/// Monte Carlo sample count used when a Monte Carlo region is requested
/// without `mc_samples`.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overridden_by(self, over: RunConfig) -> RunConfig {
        RunConfig {
            command: over.command.or(self.command),
            field: over.field.or(self.field),
            domain: over.domain.or(self.domain),
            t: over.t.or(self.t),
            lambda: over.lambda.or(self.lambda),
            nodes: over.nodes.or(self.nodes),
            mc_samples: over.mc_samples.or(self.mc_samples),
            seed: over.seed.or(self.seed),
            suite: over.suite.or(self.suite),
            tolerance: over.tolerance.or(self.tolerance),
            volume_form: over.volume_form.or(self.volume_form),
            exec: over.exec.or(self.exec),
            out_json: over.out_json.or(self.out_json),
            out_csv: over.out_csv.or(self.out_csv),
        }
    }

    pub fn t_values(&self, default: &[f64]) -> Result<Vec<f64>, String> {
        match &self.t {
            Some(t) => t.resolve(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn quadrature(&self, monte_carlo: bool) -> Result<QuadratureSpec, String> {
        let exec = match self.exec.as_deref() {
            None | Some("parallel") => ExecMode::default(),
            Some("sequential") => ExecMode::Sequential,
            Some(other) => return Err(format!("exec must be 'parallel' or 'sequential', got '{other}'")),
        };
        let mc_samples = match (self.mc_samples, monte_carlo) {
            (Some(n), _) => Some(n),
            (None, true) => Some(DEFAULT_MC_SAMPLES),
            (None, false) => None,
        };
        Ok(QuadratureSpec {
            nodes_per_axis: self.nodes.as_ref().map(NodeList::resolve).transpose()?,
            mc_samples,
            rng_seed: self.seed.unwrap_or(0),
            exec,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_end_point() {
        let v = parse_real_list("0.05:0.5:0.05").unwrap();
        assert_eq!(v.len(), 10);
        assert!((v[9] - 0.5).abs() < 1e-12);
        assert_eq!(parse_real_list("1:4:0.5").unwrap().len(), 7);
        assert_eq!(parse_real_list("0.1, 0.25").unwrap(), vec![0.1, 0.25]);
        assert!(parse_real_list("1:0:0.5").is_err());
        assert!(parse_real_list("1:2").is_err());
        assert!(parse_real_list("a,b").is_err());
    }

    #[test]
    fn toml_values_of_every_shape() {
        let c = RunConfig::parse("t = 0.1\nlambda = [1.0, 2.0]\nnodes = \"8,8,8\"").unwrap();
        assert_eq!(c.t.unwrap().resolve().unwrap(), vec![0.1]);
        assert_eq!(c.lambda.unwrap().resolve().unwrap(), vec![1.0, 2.0]);
        assert_eq!(c.nodes.unwrap().resolve().unwrap(), vec![8, 8, 8]);
        let c = RunConfig::parse("t = \"0.1:0.3:0.1\"\nvolume_form = \"h_block\"").unwrap();
        assert_eq!(c.t.unwrap().resolve().unwrap().len(), 3);
        assert_eq!(c.volume_form, Some(VolumeForm::HBlock));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::parse("feild = \"hopf\"").unwrap_err();
        assert!(err.contains("feild"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::parse("field = \"hopf\"\nseed = 3").unwrap();
        let flags = RunConfig {
            field: Some("lambda:2".into()),
            ..Default::default()
        };
        let m = file.overridden_by(flags);
        assert_eq!(m.field.as_deref(), Some("lambda:2"));
        assert_eq!(m.seed, Some(3));
    }
}
