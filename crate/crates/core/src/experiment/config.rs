use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffeo::DiffeoKind;
use crate::fields::{CoefficientKind, FieldKind};
use crate::geometry::GraphKind;
use crate::maxwell::SweepMode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ebc,
    Mollify,
    Lemma31,
    Gaffney,
    Electric,
    Pullback,
    EstimateSweep,
    W23probe,
}

pub const EXPERIMENT_KINDS: &[&str] = &[
    "ebc",
    "mollify",
    "lemma31",
    "gaffney",
    "electric",
    "pullback",
    "estimate-sweep",
    "w23probe",
];

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        write!(f, "{}", s.as_str().expect("string"))
    }
}

impl ExperimentKind {
    /// `[params]` keys the experiment reads.
    fn params(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Lemma31 => &["trials", "unitary_trials"],
            ExperimentKind::Ebc => &[
                "points",
                "r_max",
                "tol",
                "min_radius",
                "expected_radius",
                "expect_capped",
            ],
            ExperimentKind::Mollify => &["alphas", "margin", "samples"],
            ExperimentKind::Gaffney => &[],
            ExperimentKind::Electric => &["k_samples", "delta"],
            ExperimentKind::Pullback => &[
                "diffeo",
                "force_fd",
                "samples",
                "dst_domain",
                "dst_rho",
                "dst_height",
            ],
            ExperimentKind::EstimateSweep => &["alphas", "margin", "modes"],
            ExperimentKind::W23probe => &["diffeo", "levels"],
        }
    }

    /// `[tolerances]` keys the experiment reads.
    fn tolerances(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Lemma31 => &["residual", "invariance"],
            ExperimentKind::Ebc => &["radius"],
            ExperimentKind::Mollify => &["union_slope"],
            ExperimentKind::Gaffney => &["relative_residual", "order"],
            ExperimentKind::Electric => &[
                "relative_residual",
                "order",
                "k_min",
                "closed_form",
                "c_budget",
            ],
            ExperimentKind::Pullback => &["rot", "div", "functoriality"],
            ExperimentKind::EstimateSweep => &["variation", "invalid_fraction"],
            ExperimentKind::W23probe => &["convergence"],
        }
    }

    fn default_resolutions(self) -> Vec<usize> {
        match self {
            ExperimentKind::Gaffney | ExperimentKind::Electric => vec![4, 8, 16],
            _ => vec![8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    #[default]
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "default_domain")]
    pub name: String,
    #[serde(default = "one")]
    pub rho: f64,
    /// Defaults to `2ρ`.
    #[serde(default)]
    pub height: Option<f64>,
}

fn default_domain() -> String {
    "flat".into()
}

fn one() -> f64 {
    1.0
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            name: default_domain(),
            rho: 1.0,
            height: None,
        }
    }
}

impl DomainConfig {
    pub fn height(&self) -> f64 {
        self.height.unwrap_or(2.0 * self.rho)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub epsilon: Option<String>,
    #[serde(default)]
    pub mu: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    #[serde(default)]
    pub basket: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default)]
    pub resolutions: Option<Vec<usize>>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_order() -> usize {
    2
}

fn default_fd_step() -> f64 {
    1e-4
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            resolutions: None,
            order: default_order(),
            fd_step: default_fd_step(),
        }
    }
}

/// Kind-specific knobs; each kind accepts only the keys it reads.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary_trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_capped: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffeo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_fd: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub expect: Expectation,
    /// Output directory; `MAXLAB_OUT_DIR` overrides it.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub coefficient: CoefficientConfig,
    #[serde(default)]
    pub fields: FieldsConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: Params,
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!(
            "{what} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates. Catalog names are resolved here so that a typo
    /// is reported before any computation starts.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.name.parse::<GraphKind>()?;
        check_positive("domain.rho", self.domain.rho)?;
        check_positive("domain.height", self.domain.height())?;
        for name in [
            &self.coefficient.name,
            &self.coefficient.epsilon,
            &self.coefficient.mu,
        ]
        .into_iter()
        .flatten()
        {
            name.parse::<CoefficientKind>()?;
        }
        for name in self.fields.basket.iter().flatten() {
            name.parse::<FieldKind>()?;
        }
        if matches!(&self.fields.basket, Some(b) if b.is_empty()) {
            return Err(Error::Config("fields.basket must not be empty".into()));
        }
        let res = self.resolutions();
        if res.is_empty() || res[0] == 0 {
            return Err(Error::Config(
                "quadrature.resolutions must be nonempty and positive".into(),
            ));
        }
        if res.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "quadrature.resolutions {res:?} must be strictly increasing"
            )));
        }
        if self.quadrature.order == 0 {
            return Err(Error::Config("quadrature.order must be at least 1".into()));
        }
        check_positive("quadrature.fd_step", self.quadrature.fd_step)?;

        let allowed = self.kind.params();
        let set = toml::Table::try_from(&self.params).map_err(|e| Error::Config(e.to_string()))?;
        for key in set.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "parameter `{key}` is not used by `{}` experiments (accepted: {})",
                    self.kind,
                    allowed.join(", ")
                )));
            }
        }
        let tols = self.kind.tolerances();
        for (key, v) in &self.tolerances {
            if !tols.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "tolerance `{key}` is not used by `{}` experiments (accepted: {})",
                    self.kind,
                    tols.join(", ")
                )));
            }
            if !v.is_finite() {
                return Err(Error::Config(format!("tolerance `{key}` must be finite")));
            }
        }

        let p = &self.params;
        if let Some(d) = &p.diffeo {
            d.parse::<DiffeoKind>()?;
        }
        if let Some(d) = &p.dst_domain {
            d.parse::<GraphKind>()?;
        }
        for m in p.modes.iter().flatten() {
            m.parse::<SweepMode>()?;
        }
        if let Some(a) = &p.alphas {
            if a.is_empty() || a.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(Error::Config(format!(
                    "params.alphas {a:?} must be nonempty and lie in (0, 1)"
                )));
            }
        }
        for (what, v) in [
            ("params.margin", p.margin),
            ("params.r_max", p.r_max),
            ("params.tol", p.tol),
            ("params.delta", p.delta),
            ("params.dst_rho", p.dst_rho),
            ("params.dst_height", p.dst_height),
        ] {
            if let Some(v) = v {
                check_positive(what, v)?;
            }
        }
        if p.points.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("params.points must be finite".into()));
        }
        for (what, v) in [
            ("params.min_radius", p.min_radius),
            ("params.expected_radius", p.expected_radius),
        ] {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{what} must be finite")));
            }
        }
        if let Some(l) = &p.levels {
            if l.len() < 2 || l.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "params.levels {l:?} needs at least two strictly increasing entries"
                )));
            }
        }
        if p.trials == Some(0) || p.samples == Some(0) || p.k_samples == Some(0) {
            return Err(Error::Config("sample counts must be positive".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolutions(&self) -> Vec<usize> {
        self.quadrature
            .resolutions
            .clone()
            .unwrap_or_else(|| self.kind.default_resolutions())
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        debug_assert!(self.kind.tolerances().contains(&key), "{key}");
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = ExperimentConfig::parse("kind = \"lemma31\"\nseed = 7\n").unwrap();
        assert_eq!(c.kind, ExperimentKind::Lemma31);
        assert_eq!(c.expect, Expectation::Pass);
        assert_eq!(c.domain.height(), 2.0);
        assert_eq!(c.resolutions(), vec![8]);
    }

    #[test]
    fn full_config_roundtrips() {
        let text = r#"
kind = "estimate-sweep"
seed = 3
expect = "pass"
output = "out/sweep"

[domain]
name = "paraboloid"
rho = 1.0

[coefficient]
epsilon = "varaniso"
mu = "sin 0.1"

[fields]
basket = ["e1", "rotation", "const 1 2 3"]

[quadrature]
resolutions = [8]
order = 2

[tolerances]
variation = 2.0

[params]
alphas = [0.05, 0.1]
modes = ["magnetic"]
"#;
        let c = ExperimentConfig::parse(text).unwrap();
        let back = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::parse(&back).unwrap(), c);
    }

    #[test]
    fn rejections() {
        let bad = [
            ("kind = \"nope\"", "config_invalid"),
            ("kind = \"ebc\"\n[domain]\nname = \"blob\"", "catalog_miss"),
            (
                "kind = \"gaffney\"\n[fields]\nbasket = [\"spiral\"]",
                "catalog_miss",
            ),
            (
                "kind = \"gaffney\"\n[coefficient]\nname = \"weird\"",
                "catalog_miss",
            ),
            (
                "kind = \"gaffney\"\n[quadrature]\nresolutions = [8, 4]",
                "config_invalid",
            ),
            (
                "kind = \"gaffney\"\n[quadrature]\nresolutions = [8, 8]",
                "config_invalid",
            ),
            ("kind = \"gaffney\"\n[params]\ntrials = 4", "config_invalid"),
            (
                "kind = \"gaffney\"\n[tolerances]\nvariation = 4",
                "config_invalid",
            ),
            ("kind = \"gaffney\"\nbogus = 1", "config_invalid"),
            (
                "kind = \"pullback\"\n[params]\ndiffeo = \"twist\"",
                "catalog_miss",
            ),
            (
                "kind = \"estimate-sweep\"\n[params]\nmodes = [\"thermal\"]",
                "catalog_miss",
            ),
            (
                "kind = \"mollify\"\n[params]\nalphas = [0.5, 1.5]",
                "config_invalid",
            ),
            (
                "kind = \"w23probe\"\n[params]\nlevels = [4]",
                "config_invalid",
            ),
            ("kind = \"ebc\"\n[domain]\nrho = -1", "config_invalid"),
            (
                "kind = \"ebc\"\n[params]\npoints = [[nan, 0.0]]",
                "config_invalid",
            ),
        ];
        for (text, code) in bad {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(e.code(), code, "{text}: {e}");
            assert_eq!(e.exit_status(), 2);
        }
        let e = ExperimentConfig::parse("kind = \"ebc\"\n[domain]\nname = \"blob\"").unwrap_err();
        assert!(e.to_string().contains("wedge"), "{e}");
    }
}
