//! Job configuration: JSON schema, validation and resolution into core objects.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wdvv_core::geometry::{GramSpec, KPotential, MuExtension};
use wdvv_core::potential::{self, parse_rational, Builtin};
use wdvv_core::realization::{GridSpec, DEFAULT_STEP};
use wdvv_core::{Matrix, PolyPotential, SymMatrix};

use crate::error::CliError;

pub const DEFAULT_SAMPLE_COUNT: usize = 100;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Exact coefficient, `"p/q"` or an integer.
    pub coeff: String,
    pub exps: Vec<u32>,
}

/// Exactly one of `builtin`, `terms` or `f_terms`, plus optional extra terms.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub builtin: Option<String>,
    /// Literal `Φ`.
    pub terms: Option<Vec<TermConfig>>,
    /// `f(u², u³)` for the assembled three-dimensional potential. Exponent
    /// vectors have length 2 (`u², u³`) or 3 (with a zero `u¹` slot).
    pub f_terms: Option<Vec<TermConfig>>,
    /// Arity of a literal with no terms.
    pub nvars: Option<usize>,
    /// Terms added on top of whichever source is chosen.
    #[serde(default)]
    pub add: Vec<TermConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// `"antidiagonal"` or `"identity"`.
    pub builtin: Option<String>,
    pub n: Option<usize>,
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuExtensionConfig {
    pub cross: Vec<Vec<f64>>,
    pub corner: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Nodes {
    Uniform(usize),
    PerAxis(Vec<usize>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Nodes per axis, both ends included.
    pub steps: Nodes,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub potential: PotentialConfig,
    pub metric: Option<MetricConfig>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub p: usize,
    pub crs: Option<Vec<Vec<f64>>>,
    pub mu_extension: Option<MuExtensionConfig>,
    pub grid: Option<GridConfig>,
    pub integrator: Option<IntegratorConfig>,
    pub base_point: Option<Vec<f64>>,
    pub sample_points: Option<Vec<Vec<f64>>>,
    pub sample_count: Option<usize>,
    pub seed: Option<u64>,
    /// `(λ, ρ)` pairs for the spectral check.
    pub spectral: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
}

fn default_k() -> usize {
    1
}

fn cfg_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn parse_terms(path: &str, terms: &[TermConfig], nvars: usize, pad: bool) -> Result<PolyPotential, CliError> {
    let mut p = PolyPotential::zero(nvars);
    for (i, t) in terms.iter().enumerate() {
        let at = format!("{path}[{i}]");
        let coeff = parse_rational(&t.coeff).map_err(|e| cfg_err(&format!("{at}.coeff"), e.to_string()))?;
        let exps = if pad && t.exps.len() == 2 {
            vec![0, t.exps[0], t.exps[1]]
        } else {
            t.exps.clone()
        };
        if exps.len() != nvars {
            return Err(cfg_err(
                &format!("{at}.exps"),
                format!("expected {nvars} exponents, got {}", t.exps.len()),
            ));
        }
        p.add_term(coeff, exps).map_err(|e| cfg_err(&at, e.to_string()))?;
    }
    Ok(p)
}

impl PotentialConfig {
    fn resolve(&self) -> Result<PolyPotential, CliError> {
        let sources = [self.builtin.is_some(), self.terms.is_some(), self.f_terms.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(cfg_err(
                "potential",
                "give exactly one of \"builtin\", \"terms\", \"f_terms\"",
            ));
        }
        let base = if let Some(name) = &self.builtin {
            Builtin::from_name(name)
                .map_err(|e| cfg_err("potential.builtin", e.to_string()))?
                .potential()
        } else if let Some(terms) = &self.terms {
            let nvars = match (self.nvars, terms.first()) {
                (Some(n), _) => n,
                (None, Some(t)) => t.exps.len(),
                (None, None) => return Err(cfg_err("potential.nvars", "empty literal needs \"nvars\"")),
            };
            parse_terms("potential.terms", terms, nvars, false)?
        } else {
            let f = parse_terms("potential.f_terms", self.f_terms.as_deref().unwrap_or(&[]), 3, true)?;
            potential::assemble_n3(&f).map_err(|e| cfg_err("potential.f_terms", e.to_string()))?
        };
        let extra = parse_terms("potential.add", &self.add, base.nvars(), base.nvars() == 3)?;
        Ok(base.add(&extra))
    }
}

fn square(path: &str, rows: &[Vec<f64>], n: usize) -> Result<Matrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(cfg_err(path, format!("expected a {n}x{n} matrix")));
    }
    Ok(Matrix::from_rows(rows))
}

fn symmetric(path: &str, rows: &[Vec<f64>], n: usize) -> Result<SymMatrix, CliError> {
    SymMatrix::new(square(path, rows, n)?).map_err(|e| cfg_err(path, e.to_string()))
}

impl MetricConfig {
    fn resolve(&self, nvars: usize) -> Result<SymMatrix, CliError> {
        match (&self.builtin, &self.matrix) {
            (Some(name), None) => {
                let n = self.n.unwrap_or(nvars);
                match name.as_str() {
                    "antidiagonal" => Ok(SymMatrix::antidiagonal(n)),
                    "identity" => Ok(SymMatrix::identity(n)),
                    other => Err(cfg_err("metric.builtin", format!("unknown metric {other:?}"))),
                }
            }
            (None, Some(m)) => symmetric("metric.matrix", m, m.len()),
            _ => Err(cfg_err("metric", "give exactly one of \"builtin\", \"matrix\"")),
        }
    }
}

/// Parses the JSON text, reporting the field path of the first error.
pub fn parse_config(text: &str) -> Result<JobConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        cfg_err(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
    })
}

/// Hex SHA-256 of the configuration with sorted keys and no whitespace.
pub fn config_digest(text: &str) -> Result<String, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| cfg_err(".", e.to_string()))?;
    let canonical = serde_json::to_vec(&value).expect("value serializes");
    Ok(hex::encode(Sha256::digest(&canonical)))
}

/// A validated job: the configuration together with resolved core objects.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub phi: PolyPotential,
    pub eta: SymMatrix,
    pub spec: GramSpec,
    pub digest: String,
}

impl Job {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config = parse_config(text)?;
        let digest = config_digest(text)?;
        Self::from_config(config, digest)
    }

    pub fn from_config(config: JobConfig, digest: String) -> Result<Self, CliError> {
        let phi = config.potential.resolve()?;
        let n = phi.nvars();
        let eta = match &config.metric {
            Some(m) => m.resolve(n)?,
            None => SymMatrix::antidiagonal(n),
        };
        if eta.dim() != n {
            return Err(cfg_err(
                "metric",
                format!("metric is {0}x{0} but the potential has {n} variables", eta.dim()),
            ));
        }
        if config.k == 0 {
            return Err(cfg_err("k", "k must be at least 1"));
        }
        let k = config.k;
        let crs = match &config.crs {
            Some(rows) => symmetric("crs", rows, k)?,
            None => SymMatrix::identity(k),
        };
        let ext = match &config.mu_extension {
            None => None,
            Some(e) => {
                let p = config.p;
                if e.cross.len() != k * n || e.cross.iter().any(|r| r.len() != p) {
                    return Err(cfg_err("mu_extension.cross", format!("expected a {}x{p} matrix", k * n)));
                }
                Some(MuExtension {
                    cross: Matrix::from_rows(&e.cross),
                    corner: symmetric("mu_extension.corner", &e.corner, p)?,
                })
            }
        };
        let spec = GramSpec::new(k, config.p, crs, ext).map_err(|e| cfg_err("crs", e.to_string()))?;
        let check_dim = |path: &str, v: &[f64]| {
            if v.len() != n {
                Err(cfg_err(path, format!("expected {n} coordinates, got {}", v.len())))
            } else {
                Ok(())
            }
        };
        if let Some(b) = &config.base_point {
            check_dim("base_point", b)?;
        }
        if let Some(points) = &config.sample_points {
            for (i, p) in points.iter().enumerate() {
                check_dim(&format!("sample_points[{i}]"), p)?;
            }
        }
        if let Some(g) = &config.grid {
            check_dim("grid.min", &g.min)?;
            check_dim("grid.max", &g.max)?;
        }
        if let Some(i) = &config.integrator {
            if !(i.step > 0.0 && i.step.is_finite()) {
                return Err(cfg_err("integrator.step", "step must be positive"));
            }
        }
        Ok(Self {
            config,
            phi,
            eta,
            spec,
            digest,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.nvars()
    }

    pub fn system(&self) -> Result<KPotential, CliError> {
        Ok(KPotential::new(self.phi.clone(), self.eta.clone(), self.spec.clone())?)
    }

    /// Sample points and the seed that produced them (`None` for explicit
    /// points). A command-line seed takes precedence over the configured one.
    pub fn sample_points(&self, seed_override: Option<u64>) -> (Vec<Vec<f64>>, Option<u64>) {
        if let Some(points) = &self.config.sample_points {
            return (points.clone(), None);
        }
        let seed = seed_override.or(self.config.seed).unwrap_or(DEFAULT_SEED);
        let count = self.config.sample_count.unwrap_or(DEFAULT_SAMPLE_COUNT);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..count)
            .map(|_| (0..self.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        (points, Some(seed))
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let g = self
            .config
            .grid
            .as_ref()
            .ok_or_else(|| cfg_err("grid", "this command needs a grid"))?;
        let nodes = match &g.steps {
            Nodes::Uniform(m) => vec![*m; self.dim()],
            Nodes::PerAxis(v) => v.clone(),
        };
        GridSpec::new(g.min.clone(), g.max.clone(), nodes).map_err(|e| cfg_err("grid", e.to_string()))
    }

    pub fn step(&self) -> f64 {
        self.config.integrator.as_ref().map_or(DEFAULT_STEP, |i| i.step)
    }

    pub fn base_point(&self) -> Vec<f64> {
        self.config.base_point.clone().unwrap_or_else(|| vec![0.0; self.dim()])
    }

    pub fn spectral_pairs(&self) -> Vec<[f64; 2]> {
        self.config
            .spectral
            .clone()
            .unwrap_or_else(|| vec![[0.7, -1.3], [2.0, 0.5]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_ignores_layout() {
        let a = r#"{"potential": {"builtin": "quintic_n3"}, "k": 1}"#;
        let b = "{\"k\":1,\n \"potential\":{\"builtin\":\"quintic_n3\"}}";
        assert_eq!(config_digest(a).unwrap(), config_digest(b).unwrap());
        assert_ne!(config_digest(a).unwrap(), config_digest(r#"{"potential":{"builtin":"septic_n3"},"k":1}"#).unwrap());
    }

    #[test]
    fn f_terms_accept_two_or_three_exponents() {
        let a = Job::from_json(r#"{"potential":{"f_terms":[{"coeff":"1/4","exps":[2,2]},{"coeff":"1/60","exps":[0,0,5]}]}}"#)
            .unwrap();
        assert_eq!(a.phi, Builtin::QuinticN3.potential());
        assert_eq!(a.eta, SymMatrix::antidiagonal(3));
    }

    #[test]
    fn sampling_is_seeded() {
        let job = Job::from_json(r#"{"potential":{"builtin":"quintic_n3"},"sample_count":5,"seed":9}"#).unwrap();
        let (a, seed) = job.sample_points(None);
        assert_eq!(seed, Some(9));
        assert_eq!(a, job.sample_points(Some(9)).0);
        assert_ne!(a, job.sample_points(Some(10)).0);
        assert!(a.iter().flatten().all(|x| (-1.0..1.0).contains(x)));
    }

    #[test]
    fn exactly_one_potential_source() {
        let err = Job::from_json(r#"{"potential":{"builtin":"quintic_n3","f_terms":[]}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config { ref path, .. } if path == "potential"));
    }
}
