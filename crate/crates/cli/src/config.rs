//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use qdyn_core::markovian::DEFAULT_TOL;
use qdyn_core::nonmarkovian::{SpectralDensity, DEFAULT_POINTS_PER_PERIOD};
use qdyn_core::TimeGrid;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TwoSpin,
    IsingDqpt,
    CavitySweep,
    OpenIsing,
    TlsPhoton,
    Dephasing,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::TwoSpin,
        ExperimentKind::IsingDqpt,
        ExperimentKind::CavitySweep,
        ExperimentKind::OpenIsing,
        ExperimentKind::TlsPhoton,
        ExperimentKind::Dephasing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TwoSpin => "two_spin",
            ExperimentKind::IsingDqpt => "ising_dqpt",
            ExperimentKind::CavitySweep => "cavity_sweep",
            ExperimentKind::OpenIsing => "open_ising",
            ExperimentKind::TlsPhoton => "tls_photon",
            ExperimentKind::Dephasing => "dephasing",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ExperimentKind::TwoSpin => "two coupled spins from |down,down>, magnetization and energy",
            ExperimentKind::IsingDqpt => "long-range transverse Ising quench, rate function and critical times",
            ExperimentKind::CavitySweep => "Rabi-Hubbard / Jaynes-Cummings-Hubbard arrays, order parameter and rate function",
            ExperimentKind::OpenIsing => "two spins with emission, Liouvillian spectrum and envelope",
            ExperimentKind::TlsPhoton => "driven two-level atom in a photon bath, steady state and closed form",
            ExperimentKind::Dephasing => "pure dephasing with a time-dependent rate, coherence and non-Markovianity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Key of a numeric entry in `params`; nested keys use dots.
    pub param_name: String,
    pub values: Vec<f64>,
}

fn default_kink_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub params: Value,
    pub grid: TimeGrid,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Refuse runs whose largest dense complex matrix exceeds this many GB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_budget_gb: Option<f64>,
    /// Kink threshold: multiple of the median second difference.
    #[serde(default = "default_kink_factor")]
    pub kink_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSpinParams {
    pub j: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsingInitial {
    /// `⊗(|↑⟩+|↓⟩)/√2`
    Right,
    /// `⊗(|↑⟩−|↓⟩)/√2`
    Left,
}

fn yes() -> bool {
    true
}

fn right() -> IsingInitial {
    IsingInitial::Right
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingDqptParams {
    pub n: usize,
    pub alpha: f64,
    pub field: f64,
    #[serde(default = "yes")]
    pub normalize_j: bool,
    #[serde(default = "right")]
    pub initial: IsingInitial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CavityModel {
    /// Rabi coupling, no rotating-wave approximation.
    #[serde(rename = "rh")]
    RabiHubbard,
    /// Jaynes-Cummings coupling.
    #[serde(rename = "jch")]
    JaynesCummingsHubbard,
}

impl CavityModel {
    pub fn tag(self) -> &'static str {
        match self {
            CavityModel::RabiHubbard => "rh",
            CavityModel::JaynesCummingsHubbard => "jch",
        }
    }

    pub fn rwa(self) -> bool {
        self == CavityModel::JaynesCummingsHubbard
    }
}

fn default_cavities() -> usize {
    2
}

fn default_models() -> Vec<CavityModel> {
    vec![CavityModel::JaynesCummingsHubbard]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    #[serde(default = "default_cavities")]
    pub cavities: usize,
    pub omega_c: f64,
    pub g: f64,
    pub hopping: f64,
    pub cutoff: usize,
    /// Atom frequency is `omega_c + g · 10^x` for this `x`.
    pub log10_detuning_ratio: f64,
    /// Defaults to an open chain; an upper triangle is symmetrized with a warning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<u8>>>,
    #[serde(default = "default_models")]
    pub models: Vec<CavityModel>,
}

impl CavityParams {
    pub fn detuning(&self) -> f64 {
        self.g * 10f64.powf(self.log10_detuning_ratio)
    }

    pub fn model_params(&self, model: CavityModel) -> qdyn_core::models::CavityArrayParams {
        qdyn_core::models::CavityArrayParams {
            cavities: self.cavities,
            omega_c: self.omega_c,
            omega_a: self.omega_c + self.detuning(),
            g: self.g,
            hopping: self.hopping,
            cutoff: self.cutoff,
            adjacency: self.adjacency.clone().unwrap_or_else(|| symmetric_chain(self.cavities)),
            rwa: model.rwa(),
        }
    }
}

fn symmetric_chain(cavities: usize) -> Vec<Vec<u8>> {
    let mut a = vec![vec![0u8; cavities]; cavities];
    for i in 1..cavities {
        a[i - 1][i] = 1;
        a[i][i - 1] = 1;
    }
    a
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenIsingParams {
    pub j: f64,
    pub b: f64,
    /// Emission rate of each spin.
    pub gamma: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsPhotonParams {
    pub omega: f64,
    pub gamma0: f64,
    #[serde(default)]
    pub n_ph: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_ppp() -> usize {
    DEFAULT_POINTS_PER_PERIOD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingParams {
    pub spectral_density: SpectralDensity,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default = "default_ppp")]
    pub points_per_period: usize,
}

/// Parameter block after type checking, for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    TwoSpin(TwoSpinParams),
    IsingDqpt(IsingDqptParams),
    CavitySweep(CavityParams),
    OpenIsing(OpenIsingParams),
    TlsPhoton(TlsPhotonParams),
    Dephasing(DephasingParams),
}

fn typed<T: for<'de> Deserialize<'de>>(kind: ExperimentKind, v: Value) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("{} params: {e}", kind.name())))
}

fn lookup_mut<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(root, |v, key| v.get_mut(key))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| e.context(&path.display().to_string()))
    }

    /// Sweep values, or a single `None` point without a sweep.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Typed parameters with the sweep parameter set to `value`.
    pub fn params_at(&self, value: Option<f64>) -> CliResult<Params> {
        let mut raw = self.params.clone();
        if let (Some(sweep), Some(x)) = (&self.sweep, value) {
            let slot = lookup_mut(&mut raw, &sweep.param_name).ok_or_else(|| {
                CliError::Config(format!("sweep parameter '{}' not found in params", sweep.param_name))
            })?;
            if !slot.is_number() {
                return Err(CliError::Config(format!("sweep parameter '{}' is not numeric", sweep.param_name)));
            }
            *slot = serde_json::json!(x);
        }
        let kind = self.experiment;
        let params = match kind {
            ExperimentKind::TwoSpin => Params::TwoSpin(typed(kind, raw)?),
            ExperimentKind::IsingDqpt => Params::IsingDqpt(typed(kind, raw)?),
            ExperimentKind::CavitySweep => Params::CavitySweep(typed(kind, raw)?),
            ExperimentKind::OpenIsing => Params::OpenIsing(typed(kind, raw)?),
            ExperimentKind::TlsPhoton => Params::TlsPhoton(typed(kind, raw)?),
            ExperimentKind::Dephasing => Params::Dephasing(typed(kind, raw)?),
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks everything that can be checked without allocating a model.
    pub fn validate(&self) -> CliResult<()> {
        self.grid.validate()?;
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if let Some(gb) = self.memory_budget_gb {
            if !(gb > 0.0 && gb.is_finite()) {
                return Err(CliError::Config(format!("memory_budget_gb must be positive, got {gb}")));
            }
        }
        if !(self.kink_factor > 1.0 && self.kink_factor.is_finite()) {
            return Err(CliError::Config(format!("kink_factor must exceed 1, got {}", self.kink_factor)));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(CliError::Config("sweep has no values".into()));
            }
            if let Some(bad) = s.values.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Config(format!("sweep value {bad} is not finite")));
            }
        }
        for point in self.points() {
            self.params_at(point)?;
        }
        Ok(())
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1)
    }
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {x}")))
    }
}

fn finite(name: &str, x: f64) -> CliResult<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {x}")))
    }
}

impl Params {
    pub fn validate(&self) -> CliResult<()> {
        match self {
            Params::TwoSpin(p) => {
                finite("j", p.j)?;
                finite("b", p.b)
            }
            Params::IsingDqpt(p) => {
                qdyn_core::models::IsingParams { n: p.n, alpha: p.alpha, field: p.field, normalize_j: p.normalize_j }
                    .validate()?;
                Ok(())
            }
            Params::CavitySweep(p) => {
                finite("log10_detuning_ratio", p.log10_detuning_ratio)?;
                positive("hopping", p.hopping)?;
                if p.models.is_empty() {
                    return Err(CliError::Config("models list is empty".into()));
                }
                for &m in &p.models {
                    p.model_params(m).validate()?;
                }
                Ok(())
            }
            Params::OpenIsing(p) => {
                finite("j", p.j)?;
                finite("b", p.b)?;
                positive("tol", p.tol)?;
                if p.gamma.len() != 2 {
                    return Err(CliError::Config(format!("open_ising needs 2 rates, got {}", p.gamma.len())));
                }
                if let Some(g) = p.gamma.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
                    return Err(CliError::Config(format!("rates must be non-negative, got {g}")));
                }
                Ok(())
            }
            Params::TlsPhoton(p) => {
                positive("omega", p.omega)?;
                positive("gamma0", p.gamma0)?;
                positive("tol", p.tol)?;
                if !(p.n_ph >= 0.0 && p.n_ph.is_finite()) {
                    return Err(CliError::Config(format!("n_ph must be non-negative, got {}", p.n_ph)));
                }
                Ok(())
            }
            Params::Dephasing(p) => {
                qdyn_core::nonmarkovian::BathParams::with_settings(
                    p.spectral_density,
                    p.temperature,
                    p.omega_max,
                    p.points_per_period,
                )?;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_spin() -> Value {
        serde_json::json!({
            "experiment": "two_spin",
            "params": {"j": 1.0, "b": 0.1},
            "grid": {"t_start": 0.0, "t_end": 1.0, "steps": 10},
            "output_dir": "out"
        })
    }

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(&two_spin().to_string()).unwrap();
        assert_eq!(cfg.threads(), 1);
        assert_eq!(cfg.kink_factor, 10.0);
        assert_eq!(cfg.points(), vec![None]);
        assert_eq!(cfg.params_at(None).unwrap(), Params::TwoSpin(TwoSpinParams { j: 1.0, b: 0.1 }));
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let mut v = two_spin();
        v["sweep"] = serde_json::json!({"param_name": "b", "values": []});
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(CliError::Config(_))));
    }

    #[test]
    fn sweep_substitutes_nested_values() {
        let v = serde_json::json!({
            "experiment": "dephasing",
            "params": {
                "spectral_density": {"kind": "super_ohmic_exp", "alpha": 0.5, "s": 2.5, "omega_c": 0.1},
                "temperature": 0.002
            },
            "grid": {"t_start": 0.0, "t_end": 1.0, "steps": 10},
            "output_dir": "out",
            "sweep": {"param_name": "spectral_density.alpha", "values": [0.25, 1.0]}
        });
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        match cfg.params_at(Some(0.25)).unwrap() {
            Params::Dephasing(p) => {
                assert_eq!(p.spectral_density, SpectralDensity::SuperOhmicExp { alpha: 0.25, s: 2.5, omega_c: 0.1 });
                assert_eq!(p.points_per_period, DEFAULT_POINTS_PER_PERIOD);
            }
            other => panic!("wrong params {other:?}"),
        }
    }

    #[test]
    fn bad_inputs_are_config_errors() {
        let mut v = two_spin();
        v["sweep"] = serde_json::json!({"param_name": "nope", "values": [1.0]});
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(CliError::Config(_))));

        let mut v = two_spin();
        v["params"]["extra"] = serde_json::json!(1);
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(CliError::Config(_))));

        let mut v = two_spin();
        v["grid"]["steps"] = serde_json::json!(0);
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(CliError::Config(_))));

        let mut v = two_spin();
        v["threads"] = serde_json::json!(0);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());

        let v = serde_json::json!({
            "experiment": "open_ising",
            "params": {"j": 1.0, "b": 0.1, "gamma": [0.1, -0.1]},
            "grid": {"t_start": 0.0, "t_end": 1.0, "steps": 10},
            "output_dir": "out"
        });
        assert!(matches!(ExperimentConfig::from_json(&v.to_string()), Err(CliError::Config(_))));
    }
}
