//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Grids accept either
//! a comma list (`760,860,1550`) or an inclusive `start:stop:step` range.
//! Every key has a default, so an empty file is a valid configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use fso_qos::atmosphere::AttenuationModel;
use fso_qos::dataset::{QosSweep, DEFAULT_WAVELENGTHS_NM};
use fso_qos::learners::AdaR2Params;
use fso_qos::link_budget::{ReceiverNoiseConfig, RfBudgetInputs, TransceiverConfig};
use fso_qos::neural::{ActivationKind, MlpSpec, TrainConfig};
use fso_qos::stacking::StackConfig;
use fso_qos::LearnerSpec;

#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0.join("; "))
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct FogClass {
    pub name: String,
    pub visibility_km: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub model: AttenuationModel,

    pub visibility_grid_km: Vec<f64>,
    pub wavelengths_nm: Vec<f64>,
    pub range_grid_km: Vec<f64>,
    pub attenuation_grid_db_per_km: Vec<f64>,
    pub tx_powers_w: Vec<f64>,
    pub snr_grid_linear: Vec<f64>,
    pub range_km: f64,
    pub link_visibility_km: f64,
    pub capacity_bandwidth_hz: f64,
    pub target_ber: f64,
    pub clear_visibility_km: f64,
    pub fog_classes: Vec<FogClass>,

    pub transceiver: TransceiverConfig,
    pub noise: ReceiverNoiseConfig,
    pub budget: RfBudgetInputs,

    pub days: usize,
    pub max_rows: usize,
    pub split: (f64, f64, f64),
    pub rf_trees: usize,
    pub rf_min_leaf: usize,
    pub rf_mtry: Option<usize>,
    pub gbr_trees: usize,
    pub gbr_learning_rate: f64,
    pub gbr_min_leaf: usize,
    pub gbr_max_depth: usize,
    pub adbr_rounds: usize,
    pub adbr_min_leaf: usize,
    pub adbr_max_depth: usize,
    pub stack_folds: usize,
    pub mlp_hidden: usize,
    pub mlp_activation: ActivationKind,
    pub mlp_epochs: usize,
    pub mlp_learning_rate: f64,
    pub mlp_batch: usize,
    pub mlp_patience: usize,
}

fn inclusive_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            model: AttenuationModel::Kruse,
            visibility_grid_km: inclusive_range(0.5, 10.0, 0.25),
            wavelengths_nm: DEFAULT_WAVELENGTHS_NM.to_vec(),
            range_grid_km: inclusive_range(0.1, 10.0, 0.1),
            attenuation_grid_db_per_km: inclusive_range(10.0, 100.0, 1.0),
            tx_powers_w: vec![0.005, 0.025, 0.05, 0.1],
            snr_grid_linear: vec![1.0, 2.0, 5.0, 10.0, 25.07, 50.0, 100.0, 1000.0],
            range_km: 1.0,
            link_visibility_km: 1.0,
            capacity_bandwidth_hz: 1e9,
            target_ber: 1e-9,
            clear_visibility_km: 23.0,
            fog_classes: vec![
                FogClass { name: "dense".into(), visibility_km: 0.05 },
                FogClass { name: "thick".into(), visibility_km: 0.2 },
                FogClass { name: "moderate".into(), visibility_km: 0.5 },
                FogClass { name: "light".into(), visibility_km: 0.77 },
            ],
            transceiver: TransceiverConfig::default(),
            noise: ReceiverNoiseConfig::default(),
            budget: RfBudgetInputs::default(),
            days: 3650,
            max_rows: 6000,
            split: (0.70, 0.15, 0.15),
            rf_trees: 60,
            rf_min_leaf: 3,
            rf_mtry: None,
            gbr_trees: 200,
            gbr_learning_rate: 0.1,
            gbr_min_leaf: 5,
            gbr_max_depth: 4,
            adbr_rounds: 30,
            adbr_min_leaf: 3,
            adbr_max_depth: AdaR2Params::default().max_depth,
            stack_folds: 5,
            mlp_hidden: 10,
            mlp_activation: ActivationKind::Sigmoid,
            mlp_epochs: 200,
            mlp_learning_rate: 0.05,
            mlp_batch: 32,
            mlp_patience: 25,
        }
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("`{v}` is not a nonnegative integer"))
}

/// Comma list or inclusive `start:stop:step`.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    let v = v.trim();
    if v.is_empty() {
        return Err("empty grid".into());
    }
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{v}` must be start:stop:step"));
        }
        let (a, b, s) = (parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
        if !(s > 0.0) || b < a {
            return Err(format!("range `{v}` needs a positive step and stop ≥ start"));
        }
        if (b - a) / s > 1e6 {
            return Err(format!("range `{v}` has too many points"));
        }
        return Ok(inclusive_range(a, b, s));
    }
    v.split(',').map(|p| parse_f64(p.trim())).collect()
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{name} must be positive"))
    }
}

fn positive_grid(name: &str, v: &str) -> Result<Vec<f64>, String> {
    let g = parse_grid(v)?;
    if g.iter().any(|x| !(*x > 0.0)) {
        return Err(format!("{name} values must be positive"));
    }
    Ok(g)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(Self::parse(&text)?)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut errors = Vec::new();
        let mut seen = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected key = value", n + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                errors.push(format!("line {}: duplicate key `{key}`", n + 1));
                continue;
            }
            if let Err(e) = cfg.set(key, value) {
                errors.push(format!("line {}: {key}: {e}", n + 1));
            }
        }
        if let Err(e) = cfg.validate() {
            errors.extend(e.0);
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError(errors))
        }
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let t = &mut self.transceiver;
        let nz = &mut self.noise;
        let b = &mut self.budget;
        match key {
            "seed" => self.seed = v.parse().map_err(|_| format!("`{v}` is not an unsigned integer"))?,
            "model" => self.model = v.parse().map_err(|e: fso_qos::Error| e.to_string())?,
            "visibility_grid_km" => self.visibility_grid_km = positive_grid(key, v)?,
            "wavelengths_nm" => self.wavelengths_nm = positive_grid(key, v)?,
            "range_grid_km" => self.range_grid_km = positive_grid(key, v)?,
            "attenuation_grid_db_per_km" => {
                let g = parse_grid(v)?;
                if g.iter().any(|x| *x < 0.0) {
                    return Err("attenuation values must be nonnegative".into());
                }
                self.attenuation_grid_db_per_km = g;
            }
            "tx_powers_w" => self.tx_powers_w = positive_grid(key, v)?,
            "snr_grid_linear" => self.snr_grid_linear = parse_grid(v)?,
            "range_km" => self.range_km = positive(key, parse_f64(v)?)?,
            "link_visibility_km" => self.link_visibility_km = positive(key, parse_f64(v)?)?,
            "capacity_bandwidth_hz" => self.capacity_bandwidth_hz = positive(key, parse_f64(v)?)?,
            "target_ber" => self.target_ber = parse_f64(v)?,
            "clear_visibility_km" => self.clear_visibility_km = positive(key, parse_f64(v)?)?,
            "fog_classes" => {
                self.fog_classes = v
                    .split(',')
                    .map(|item| {
                        let (name, vis) =
                            item.split_once(':').ok_or_else(|| format!("`{item}` must be name:visibility_km"))?;
                        Ok(FogClass { name: name.trim().to_string(), visibility_km: positive(key, parse_f64(vis.trim())?)? })
                    })
                    .collect::<Result<_, String>>()?;
            }

            "tx_power_w" => t.tx_power_w = parse_f64(v)?,
            "divergence_mrad" => t.divergence_mrad = parse_f64(v)?,
            "tx_efficiency" => t.tx_efficiency = parse_f64(v)?,
            "rx_efficiency" => t.rx_efficiency = parse_f64(v)?,
            "tx_aperture_m" => t.tx_aperture_m = parse_f64(v)?,
            "rx_aperture_m" => t.rx_aperture_m = parse_f64(v)?,
            "wavelength_nm" => t.wavelength_nm = parse_f64(v)?,
            "rx_sensitivity_dbm" => t.rx_sensitivity_dbm = parse_f64(v)?,
            "photons_per_bit" => t.photons_per_bit = parse_f64(v)?,

            "responsivity_a_per_w" => nz.responsivity_a_per_w = parse_f64(v)?,
            "load_resistance_ohm" => nz.load_resistance_ohm = parse_f64(v)?,
            "dark_current_a" => nz.dark_current_a = parse_f64(v)?,
            "temperature_k" => nz.temperature_k = parse_f64(v)?,
            "electrical_bandwidth_hz" => nz.electrical_bandwidth_hz = parse_f64(v)?,

            "tx_gain_linear" => b.tx_gain_linear = parse_f64(v)?,
            "rx_gain_linear" => b.rx_gain_linear = parse_f64(v)?,
            "noise_bandwidth_hz" => b.noise_bandwidth_hz = parse_f64(v)?,
            "ambient_temp_k" => b.ambient_temp_k = parse_f64(v)?,
            "noise_figure_db" => b.noise_figure_db = parse_f64(v)?,
            "fade_margin_db" => b.fade_margin_db = parse_f64(v)?,

            "days" => self.days = parse_usize(v)?,
            "max_rows" => self.max_rows = parse_usize(v)?,
            "split" => {
                let g = parse_grid(v)?;
                if g.len() != 3 {
                    return Err("split needs three fractions".into());
                }
                self.split = (g[0], g[1], g[2]);
            }
            "rf_trees" => self.rf_trees = parse_usize(v)?,
            "rf_min_leaf" => self.rf_min_leaf = parse_usize(v)?,
            "rf_mtry" => self.rf_mtry = if v == "auto" { None } else { Some(parse_usize(v)?) },
            "gbr_trees" => self.gbr_trees = parse_usize(v)?,
            "gbr_learning_rate" => self.gbr_learning_rate = parse_f64(v)?,
            "gbr_min_leaf" => self.gbr_min_leaf = parse_usize(v)?,
            "gbr_max_depth" => self.gbr_max_depth = parse_usize(v)?,
            "adbr_rounds" => self.adbr_rounds = parse_usize(v)?,
            "adbr_min_leaf" => self.adbr_min_leaf = parse_usize(v)?,
            "adbr_max_depth" => self.adbr_max_depth = parse_usize(v)?,
            "stack_folds" => self.stack_folds = parse_usize(v)?,
            "mlp_hidden" => self.mlp_hidden = parse_usize(v)?,
            "mlp_activation" => self.mlp_activation = v.parse().map_err(|e: fso_qos::Error| e.to_string())?,
            "mlp_epochs" => self.mlp_epochs = parse_usize(v)?,
            "mlp_learning_rate" => self.mlp_learning_rate = parse_f64(v)?,
            "mlp_batch" => self.mlp_batch = parse_usize(v)?,
            "mlp_patience" => self.mlp_patience = parse_usize(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut e = Vec::new();
        let mut check = |r: fso_qos::Result<()>| {
            if let Err(err) = r {
                e.push(err.to_string());
            }
        };
        check(self.transceiver.validate());
        check(self.noise.validate());
        check(self.budget.validate());
        if !(self.target_ber > 0.0 && self.target_ber < 0.5) {
            e.push("target_ber must lie in (0, 0.5)".into());
        }
        let (a, b, c) = self.split;
        if !(a > 0.0 && b >= 0.0 && c >= 0.0) || (a + b + c - 1.0).abs() > 1e-9 {
            e.push("split fractions must be nonnegative, train positive, and sum to 1".into());
        }
        for (name, v) in [
            ("rf_trees", self.rf_trees),
            ("rf_min_leaf", self.rf_min_leaf),
            ("gbr_min_leaf", self.gbr_min_leaf),
            ("adbr_rounds", self.adbr_rounds),
            ("adbr_min_leaf", self.adbr_min_leaf),
            ("mlp_hidden", self.mlp_hidden),
            ("mlp_epochs", self.mlp_epochs),
            ("mlp_batch", self.mlp_batch),
            ("days", self.days),
            ("max_rows", self.max_rows),
        ] {
            if v == 0 {
                e.push(format!("{name} must be positive"));
            }
        }
        if self.stack_folds < 2 {
            e.push("stack_folds must be at least 2".into());
        }
        if !(self.gbr_learning_rate > 0.0 && self.gbr_learning_rate < 1.0) {
            e.push("gbr_learning_rate must lie in (0, 1)".into());
        }
        if let Some(m) = self.rf_mtry {
            if m == 0 || m > 5 {
                e.push("rf_mtry must lie in 1..=5".into());
            }
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(e))
        }
    }

    pub fn qos_sweep(&self) -> QosSweep {
        QosSweep {
            wavelengths_nm: self.wavelengths_nm.clone(),
            tx_powers_w: self.tx_powers_w.clone(),
            range_km: self.range_km,
            model: self.model,
            transceiver: self.transceiver,
            noise: self.noise,
            budget: self.budget,
        }
    }

    pub fn forest_spec(&self) -> LearnerSpec {
        LearnerSpec::Forest {
            n_trees: self.rf_trees,
            mtry: self.rf_mtry,
            min_leaf_size: self.rf_min_leaf,
            max_depth: None,
            seed: self.seed,
        }
    }

    pub fn gbr_spec(&self) -> LearnerSpec {
        LearnerSpec::Gbr {
            n_trees: self.gbr_trees,
            learning_rate: self.gbr_learning_rate,
            min_leaf_size: self.gbr_min_leaf,
            max_depth: Some(self.gbr_max_depth),
        }
    }

    pub fn adbr_spec(&self) -> LearnerSpec {
        LearnerSpec::AdaR2 { n_rounds: self.adbr_rounds, min_leaf_size: self.adbr_min_leaf, max_depth: self.adbr_max_depth }
    }

    pub fn stack_spec(&self) -> LearnerSpec {
        LearnerSpec::Stacked(StackConfig {
            base_learners: vec![self.forest_spec(), self.gbr_spec(), self.adbr_spec(), LearnerSpec::tree(self.rf_min_leaf)],
            n_folds: self.stack_folds,
            seed: self.seed,
        })
    }

    pub fn mlp_spec(&self) -> LearnerSpec {
        LearnerSpec::Mlp(MlpSpec {
            hidden_sizes: vec![self.mlp_hidden],
            hidden_activation: self.mlp_activation,
            output_activation: ActivationKind::Direct,
            train: TrainConfig {
                learning_rate: self.mlp_learning_rate,
                epochs: self.mlp_epochs,
                batch_size: self.mlp_batch,
                seed: self.seed,
                split_fractions: (0.85, 0.15, 0.0),
                early_stop_patience: self.mlp_patience,
            },
        })
    }
}
