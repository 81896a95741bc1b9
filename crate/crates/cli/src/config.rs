//! JSON experiment configs. Everything is validated before any computation
//! starts; unknown keys are rejected by serde.

use std::path::Path;

use serde::Deserialize;

use diskdyn::hamiltonian::{HamiltonianSpec, TimeProfile};
use diskdyn::oneform::{BasePrimitive, GaugeFunction, Monomial, PrimitiveOneForm};
use diskdyn::{FlowConfig, Point, QuadratureSpec};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum TermConfig {
    Radial {
        #[serde(default = "default_coeffs")]
        coeffs: Vec<f64>,
        amplitude: f64,
    },
    Perturbation {
        k: u32,
        tau: TauConfig,
        amplitude: f64,
    },
    Concat {
        first: Vec<TermConfig>,
        second: Vec<TermConfig>,
    },
}

fn default_coeffs() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauConfig {
    Const,
    Cos,
    Sin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    pub i: u32,
    pub j: u32,
    pub c: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveConfig {
    #[serde(default = "default_base")]
    pub base: String,
    #[serde(default)]
    pub gauge: Vec<MonomialConfig>,
}

fn default_base() -> String {
    "radial".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub steps_per_unit_time: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKindConfig {
    PolarGrid,
    MonteCarlo,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub kind: QuadratureKindConfig,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

/// The raw config file.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub hamiltonian: Vec<TermConfig>,
    pub primitive: Option<PrimitiveConfig>,
    pub flow: Option<FlowSection>,
    pub quadrature: Option<QuadratureConfig>,
    pub pair_quadrature: Option<QuadratureConfig>,
    pub n: Option<usize>,
    pub x: Option<[f64; 2]>,
    pub y: Option<[f64; 2]>,
    pub e: Option<[f64; 2]>,
    pub k: Option<usize>,
    pub min_separation: Option<f64>,
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub seed: u64,
    pub verify: Option<VerifyConfig>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn hamiltonian_spec(&self) -> Result<HamiltonianSpec<f64>, CliError> {
        build_terms(&self.hamiltonian)
    }

    pub fn primitive(&self) -> Result<PrimitiveOneForm<f64>, CliError> {
        let Some(p) = &self.primitive else {
            return Ok(PrimitiveOneForm::radial());
        };
        let base = BasePrimitive::parse(&p.base)
            .ok_or_else(|| bad(format!("unknown primitive base {:?}", p.base)))?;
        let mut form = PrimitiveOneForm::new(base);
        if !p.gauge.is_empty() {
            let terms = p.gauge.iter().map(|m| Monomial { i: m.i, j: m.j, c: m.c }).collect();
            let gauge = GaugeFunction::new(terms).map_err(|e| bad(e.to_string()))?;
            if gauge.terms().iter().any(|m| !m.c.is_finite()) {
                return Err(bad("gauge coefficients must be finite"));
            }
            form = form.with_gauge(gauge);
        }
        Ok(form)
    }

    pub fn flow(&self) -> Result<FlowConfig, CliError> {
        let cfg = self
            .flow
            .as_ref()
            .map_or_else(FlowConfig::default, |f| FlowConfig::with_steps(f.steps_per_unit_time));
        cfg.validate().map_err(|e| bad(e.to_string()))?;
        Ok(cfg)
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let q = self.quadrature.as_ref().ok_or_else(|| bad("missing `quadrature`"))?;
        quadrature_spec(q, self.seed)
    }

    /// Pair rule for winding integrals; defaults to the disk rule's sample count.
    pub fn pair_quadrature(&self) -> Result<QuadratureSpec, CliError> {
        match &self.pair_quadrature {
            Some(q) => {
                if q.kind != QuadratureKindConfig::MonteCarlo {
                    return Err(bad("pair_quadrature must be monte-carlo"));
                }
                quadrature_spec(q, self.seed)
            }
            None => Ok(QuadratureSpec::monte_carlo(self.quadrature()?.len(), self.seed)),
        }
    }

    pub fn n(&self) -> Result<usize, CliError> {
        match self.n {
            Some(0) => Err(bad("`n` must be >= 1")),
            Some(n) => Ok(n),
            None => Ok(1),
        }
    }

    pub fn x(&self) -> Result<Point, CliError> {
        interior(self.x, "x")
    }

    pub fn y(&self) -> Result<Point, CliError> {
        interior(self.y, "y")
    }

    /// `x` and `y`, which must be distinct.
    pub fn pair(&self) -> Result<(Point, Point), CliError> {
        let (x, y) = (self.x()?, self.y()?);
        if x == y {
            return Err(bad("`x` and `y` must be distinct"));
        }
        Ok((x, y))
    }

    pub fn anchor(&self) -> Result<Point, CliError> {
        let [a, b] = self.e.unwrap_or([1.0, 0.0]);
        let e = Point::new(a, b);
        if !e.is_finite() || (e.norm() - 1.0).abs() > 1e-9 {
            return Err(bad("`e` must lie on the unit circle"));
        }
        Ok(e)
    }

    pub fn min_separation(&self) -> Result<f64, CliError> {
        let m = self.min_separation.unwrap_or(diskdyn::quadrature::DEFAULT_MIN_SEPARATION);
        if !(0.0..1e-3).contains(&m) {
            return Err(bad("`min_separation` must lie in [0, 1e-3)"));
        }
        Ok(m)
    }

    /// `points`, or `[x]` when only `x` is given.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        if self.points.is_empty() {
            return Ok(vec![self.x()?]);
        }
        self.points.iter().map(|&p| interior(Some(p), "points")).collect()
    }

    pub fn scale(&self) -> Result<f64, CliError> {
        let s = self.verify.as_ref().map_or(1.0, |v| v.scale);
        if !(s.is_finite() && s > 0.0 && s <= 1.0) {
            return Err(bad("`verify.scale` must lie in (0, 1]"));
        }
        Ok(s)
    }
}

fn interior(p: Option<[f64; 2]>, name: &str) -> Result<Point, CliError> {
    let [a, b] = p.ok_or_else(|| bad(format!("missing `{name}`")))?;
    let z = Point::new(a, b);
    if !z.is_finite() || z.norm() >= 1.0 {
        return Err(bad(format!("`{name}` must lie in the open unit disk")));
    }
    Ok(z)
}

fn quadrature_spec(q: &QuadratureConfig, seed: u64) -> Result<QuadratureSpec, CliError> {
    let spec = match q.kind {
        QuadratureKindConfig::PolarGrid => {
            if q.n_samples.is_some() {
                return Err(bad("polar-grid takes n_r and n_theta, not n_samples"));
            }
            QuadratureSpec::polar_grid(
                q.n_r.ok_or_else(|| bad("polar-grid needs n_r"))?,
                q.n_theta.ok_or_else(|| bad("polar-grid needs n_theta"))?,
            )
        }
        QuadratureKindConfig::MonteCarlo => {
            if q.n_r.is_some() || q.n_theta.is_some() {
                return Err(bad("monte-carlo takes n_samples, not n_r/n_theta"));
            }
            QuadratureSpec::monte_carlo(q.n_samples.ok_or_else(|| bad("monte-carlo needs n_samples"))?, seed)
        }
    };
    spec.validate().map_err(|e| bad(e.to_string()))?;
    Ok(spec)
}

fn build_terms(terms: &[TermConfig]) -> Result<HamiltonianSpec<f64>, CliError> {
    let mut spec = HamiltonianSpec::trivial();
    for t in terms {
        let next = match t {
            TermConfig::Radial { coeffs, amplitude } => {
                if coeffs.is_empty() || !coeffs.iter().chain([amplitude]).all(|c| c.is_finite()) {
                    return Err(bad("radial term needs finite, non-empty coeffs and amplitude"));
                }
                HamiltonianSpec::radial(coeffs.clone(), *amplitude)
            }
            TermConfig::Perturbation { k, tau, amplitude } => {
                if *k == 0 || !amplitude.is_finite() {
                    return Err(bad("perturbation needs k >= 1 and a finite amplitude"));
                }
                let tau = match tau {
                    TauConfig::Const => TimeProfile::Constant,
                    TauConfig::Cos => TimeProfile::Cos,
                    TauConfig::Sin => TimeProfile::Sin,
                };
                HamiltonianSpec::perturbation(*k, tau, *amplitude)
            }
            TermConfig::Concat { first, second } => {
                HamiltonianSpec::concat(build_terms(first)?, build_terms(second)?)
            }
        };
        spec = spec.plus(next);
    }
    Ok(spec)
}
