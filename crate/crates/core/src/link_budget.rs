//! Received power, SNR, capacity and OOK error rates for an FSO link.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atmosphere::DB_PER_NEPER;
use crate::error::{domain, Error, Result};

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 2.998e8;
pub const ELEMENTARY_CHARGE_C: f64 = 1.602e-19;
pub const BOLTZMANN_J_PER_K: f64 = 1.380649e-23;
pub const PLANCK_J_S: f64 = 6.626e-34;

/// Optical front end of both link ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransceiverConfig {
    pub tx_power_w: f64,
    pub divergence_mrad: f64,
    pub tx_efficiency: f64,
    pub rx_efficiency: f64,
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    pub wavelength_nm: f64,
    pub rx_sensitivity_dbm: f64,
    pub photons_per_bit: f64,
}

impl Default for TransceiverConfig {
    fn default() -> Self {
        Self {
            tx_power_w: 0.1,
            divergence_mrad: 3.0,
            tx_efficiency: 0.8,
            rx_efficiency: 0.8,
            // aperture sizes are not fixed by the operating-parameter table
            tx_aperture_m: 0.05,
            rx_aperture_m: 0.1,
            wavelength_nm: 1550.0,
            rx_sensitivity_dbm: -40.0,
            photons_per_bit: 100.0,
        }
    }
}

impl TransceiverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("divergence_mrad", self.divergence_mrad),
            ("tx_aperture_m", self.tx_aperture_m),
            ("rx_aperture_m", self.rx_aperture_m),
            ("wavelength_nm", self.wavelength_nm),
            ("photons_per_bit", self.photons_per_bit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("tx_efficiency", self.tx_efficiency), ("rx_efficiency", self.rx_efficiency)] {
            if !(v > 0.0 && v <= 1.0) {
                return domain(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if !self.rx_sensitivity_dbm.is_finite() {
            return domain("rx_sensitivity_dbm must be finite");
        }
        Ok(())
    }

    fn divergence_rad(&self) -> f64 {
        self.divergence_mrad * 1e-3
    }
}

/// PIN photodiode receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverNoiseConfig {
    pub responsivity_a_per_w: f64,
    pub load_resistance_ohm: f64,
    pub dark_current_a: f64,
    pub temperature_k: f64,
    pub electrical_bandwidth_hz: f64,
    pub boltzmann_j_per_k: f64,
    pub planck_js: f64,
}

impl Default for ReceiverNoiseConfig {
    fn default() -> Self {
        Self {
            responsivity_a_per_w: 0.7,
            load_resistance_ohm: 1000.0,
            dark_current_a: 10e-9,
            temperature_k: 298.0,
            electrical_bandwidth_hz: 1.0e9,
            boltzmann_j_per_k: BOLTZMANN_J_PER_K,
            planck_js: PLANCK_J_S,
        }
    }
}

impl ReceiverNoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("responsivity_a_per_w", self.responsivity_a_per_w),
            ("load_resistance_ohm", self.load_resistance_ohm),
            ("temperature_k", self.temperature_k),
            ("electrical_bandwidth_hz", self.electrical_bandwidth_hz),
            ("boltzmann_j_per_k", self.boltzmann_j_per_k),
            ("planck_js", self.planck_js),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.dark_current_a.is_finite() && self.dark_current_a >= 0.0) {
            return domain("dark_current_a must be nonnegative");
        }
        Ok(())
    }

    /// Thermal noise current variance `4kTB/R_L` in A².
    fn thermal_variance(&self) -> f64 {
        4.0 * self.boltzmann_j_per_k * self.temperature_k * self.electrical_bandwidth_hz
            / self.load_resistance_ohm
    }
}

/// Inputs of the RF-style SNR budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfBudgetInputs {
    pub tx_power_dbm: f64,
    pub tx_gain_linear: f64,
    pub rx_gain_linear: f64,
    pub wavelength_m: f64,
    pub noise_bandwidth_hz: f64,
    pub ambient_temp_k: f64,
    pub total_attenuation_db: f64,
    pub noise_figure_db: f64,
    pub fade_margin_db: f64,
}

impl Default for RfBudgetInputs {
    fn default() -> Self {
        Self {
            tx_power_dbm: 20.0,
            tx_gain_linear: 1.0,
            rx_gain_linear: 1.0,
            wavelength_m: 1550e-9,
            noise_bandwidth_hz: 1e6,
            ambient_temp_k: 298.0,
            total_attenuation_db: 0.0,
            noise_figure_db: 0.0,
            fade_margin_db: 0.0,
        }
    }
}

impl RfBudgetInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_gain_linear", self.tx_gain_linear),
            ("rx_gain_linear", self.rx_gain_linear),
            ("wavelength_m", self.wavelength_m),
            ("noise_bandwidth_hz", self.noise_bandwidth_hz),
            ("ambient_temp_k", self.ambient_temp_k),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("total_attenuation_db", self.total_attenuation_db),
            ("noise_figure_db", self.noise_figure_db),
            ("fade_margin_db", self.fade_margin_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return domain(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if !self.tx_power_dbm.is_finite() {
            return domain("tx_power_dbm must be finite");
        }
        Ok(())
    }
}

/// On-off keying pulse format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OokScheme {
    NrzOok,
    RzOok,
}

impl OokScheme {
    /// Numeric feature encoding used in QoS tables.
    pub fn code(self) -> f64 {
        match self {
            Self::NrzOok => 0.0,
            Self::RzOok => 1.0,
        }
    }

    /// `SNR / x²` where `BER = erfc(x) / 2`.
    fn snr_per_arg_sq(self) -> f64 {
        match self {
            Self::NrzOok => 8.0,
            Self::RzOok => 4.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w * 1e3)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// Photon energy `hc/λ` in joules.
pub fn photon_energy(wavelength_nm: f64, noise: &ReceiverNoiseConfig) -> Result<f64> {
    if !(wavelength_nm.is_finite() && wavelength_nm > 0.0) {
        return domain(format!("wavelength must be positive, got {wavelength_nm} nm"));
    }
    Ok(noise.planck_js * SPEED_OF_LIGHT_M_PER_S / (wavelength_nm * 1e-9))
}

fn check_loss(atten_db_per_km: f64, range_km: f64) -> Result<()> {
    if !(atten_db_per_km.is_finite() && atten_db_per_km >= 0.0) {
        return domain(format!("attenuation must be nonnegative, got {atten_db_per_km} dB/km"));
    }
    if !(range_km.is_finite() && range_km >= 0.0) {
        return domain(format!("range must be nonnegative, got {range_km} km"));
    }
    Ok(())
}

/// Geometric link gain in dB for a beam that grows from the transmit
/// aperture: `20 log10(d_r / (d_t + θL)) - γL`.
pub fn geometric_gain_db(cfg: &TransceiverConfig, atten_db_per_km: f64, range_km: f64) -> Result<f64> {
    check_loss(atten_db_per_km, range_km)?;
    let footprint_m = cfg.tx_aperture_m + cfg.divergence_rad() * range_km * 1e3;
    Ok(20.0 * (cfg.rx_aperture_m / footprint_m).log10() - atten_db_per_km * range_km)
}

/// Received power with a finite transmit aperture:
/// `P_tx d_r² / (d_t + θL)² · 10^(-γL/10)`.
pub fn received_power_geometric(cfg: &TransceiverConfig, atten_db_per_km: f64, range_km: f64) -> Result<f64> {
    check_loss(atten_db_per_km, range_km)?;
    let footprint_m = cfg.tx_aperture_m + cfg.divergence_rad() * range_km * 1e3;
    let geometric = (cfg.rx_aperture_m / footprint_m).powi(2);
    Ok(cfg.tx_power_w * geometric * db_to_linear(-atten_db_per_km * range_km))
}

/// Far-field received power `P_tx D_r²/(θ²L²) · 10^(-γL/10) ζ_t ζ_r`,
/// capped at `P_tx ζ_t ζ_r` where the geometric factor would exceed one.
pub fn received_power_aperture(cfg: &TransceiverConfig, atten_db_per_km: f64, range_km: f64) -> Result<f64> {
    check_loss(atten_db_per_km, range_km)?;
    if range_km == 0.0 {
        return domain("far-field received power is singular at zero range");
    }
    let cap = cfg.tx_power_w * cfg.tx_efficiency * cfg.rx_efficiency;
    let range_m = range_km * 1e3;
    let geometric = (cfg.rx_aperture_m / (cfg.divergence_rad() * range_m)).powi(2);
    let p = cap * geometric.min(1.0) * db_to_linear(-atten_db_per_km * range_km);
    Ok(p)
}

/// Photon-counting data rate `4 P_rx / (π E_p N_b)` in bit/s.
pub fn achievable_data_rate(
    p_received_w: f64,
    wavelength_nm: f64,
    photons_per_bit: f64,
    noise: &ReceiverNoiseConfig,
) -> Result<f64> {
    if !(photons_per_bit.is_finite() && photons_per_bit > 0.0) {
        return domain(format!("photons per bit must be positive, got {photons_per_bit}"));
    }
    if !(p_received_w.is_finite() && p_received_w >= 0.0) {
        return domain(format!("received power must be nonnegative, got {p_received_w}"));
    }
    let ep = photon_energy(wavelength_nm, noise)?;
    Ok(4.0 * p_received_w / (PI * ep * photons_per_bit))
}

/// Data rate written directly in terms of the link parameters,
/// `P_tx τ_t τ_r 10^(-γL/10) D² / (π (θ/2)² L² E_p N_b)`. Agrees with
/// [`achievable_data_rate`] applied to the uncapped far-field received power.
pub fn data_rate_from_link(
    cfg: &TransceiverConfig,
    atten_db_per_km: f64,
    range_km: f64,
    noise: &ReceiverNoiseConfig,
) -> Result<f64> {
    check_loss(atten_db_per_km, range_km)?;
    if range_km == 0.0 {
        return domain("data rate expression is singular at zero range");
    }
    let ep = photon_energy(cfg.wavelength_nm, noise)?;
    let range_m = range_km * 1e3;
    let half_angle = cfg.divergence_rad() / 2.0;
    let num = cfg.tx_power_w
        * cfg.tx_efficiency
        * cfg.rx_efficiency
        * db_to_linear(-atten_db_per_km * range_km)
        * cfg.rx_aperture_m.powi(2);
    let den = PI * half_angle.powi(2) * range_m.powi(2) * ep * cfg.photons_per_bit;
    Ok(num / den)
}

/// RF-style SNR budget in dB, evaluated term by term:
///
/// `P - 30 - 10log G_t + 10log G_r - 20log(4π/λ) - 10log(B T k) - τ - NF - FM`
///
/// The transmit-gain term carries a minus sign as printed in the source
/// budget.
pub fn snr_budget_db(inputs: &RfBudgetInputs) -> Result<f64> {
    inputs.validate()?;
    let i = inputs;
    Ok(i.tx_power_dbm - 30.0 - 10.0 * i.tx_gain_linear.log10() + 10.0 * i.rx_gain_linear.log10()
        - 20.0 * (4.0 * PI / i.wavelength_m).log10()
        - 10.0 * (i.noise_bandwidth_hz * i.ambient_temp_k * BOLTZMANN_J_PER_K).log10()
        - i.total_attenuation_db
        - i.noise_figure_db
        - i.fade_margin_db)
}

/// PIN receiver electrical SNR with shot and thermal noise.
pub fn electrical_snr_linear(p_received_w: f64, noise: &ReceiverNoiseConfig) -> Result<f64> {
    if !(p_received_w.is_finite() && p_received_w >= 0.0) {
        return domain(format!("received power must be nonnegative, got {p_received_w}"));
    }
    let signal = noise.responsivity_a_per_w * p_received_w;
    let shot = 2.0 * ELEMENTARY_CHARGE_C * (signal + noise.dark_current_a) * noise.electrical_bandwidth_hz;
    Ok(signal * signal / (shot + noise.thermal_variance()))
}

/// Smallest received power whose electrical SNR reaches `snr_linear`.
///
/// Solves `(ℛP)² = S (2q(ℛP + I_d)B + σ_th²)` for the positive root.
pub fn received_power_for_snr(snr_linear: f64, noise: &ReceiverNoiseConfig) -> Result<f64> {
    if !(snr_linear.is_finite() && snr_linear >= 0.0) {
        return domain(format!("SNR must be nonnegative, got {snr_linear}"));
    }
    let r = noise.responsivity_a_per_w;
    let b = 2.0 * ELEMENTARY_CHARGE_C * noise.electrical_bandwidth_hz;
    let a2 = r * r;
    let a1 = snr_linear * b * r;
    let a0 = snr_linear * (b * noise.dark_current_a + noise.thermal_variance());
    Ok((a1 + (a1 * a1 + 4.0 * a2 * a0).sqrt()) / (2.0 * a2))
}

/// Shannon capacity `B log2(1 + SNR)`.
pub fn channel_capacity(bandwidth_hz: f64, snr_linear: f64) -> Result<f64> {
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return domain(format!("bandwidth must be positive, got {bandwidth_hz}"));
    }
    if !(snr_linear >= 0.0) {
        return domain(format!("SNR must be nonnegative, got {snr_linear}"));
    }
    Ok(bandwidth_hz * snr_linear.ln_1p() / std::f64::consts::LN_2)
}

/// OOK bit-error rate. NRZ: `½ erfc(√SNR / (2√2))`; RZ: `½ erfc(√SNR / 2)`.
pub fn ber(scheme: OokScheme, snr_linear: f64) -> Result<f64> {
    if !(snr_linear >= 0.0) {
        return domain(format!("SNR must be nonnegative, got {snr_linear}"));
    }
    let arg = (snr_linear / scheme.snr_per_arg_sq()).sqrt();
    Ok(0.5 * libm::erfc(arg))
}

/// Inverse of [`ber`] by bisection on the erfc argument.
pub fn required_snr_for_ber(scheme: OokScheme, target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return domain(format!("target BER must lie in (0, 0.5), got {target_ber}"));
    }
    let half_erfc = |x: f64| 0.5 * libm::erfc(x);
    // invariant: half_erfc(lo) > target >= half_erfc(hi)
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while half_erfc(hi) > target_ber {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if half_erfc(mid) > target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(scheme.snr_per_arg_sq() * hi * hi)
}

/// Extra transmit power (dB) needed under fog, relative to clear air, to hold
/// `target_ber` with the PIN receiver at the given range.
///
/// Transmit power requirements are evaluated in the dB domain, so very deep
/// fades do not underflow.
#[allow(clippy::too_many_arguments)]
pub fn power_penalty_db(
    cfg: &TransceiverConfig,
    noise: &ReceiverNoiseConfig,
    scheme: OokScheme,
    clear_beta_per_km: f64,
    fog_beta_per_km: f64,
    range_km: f64,
    target_ber: f64,
) -> Result<f64> {
    if !(range_km.is_finite() && range_km > 0.0) {
        return domain(format!("range must be positive, got {range_km}"));
    }
    if !(clear_beta_per_km >= 0.0) || fog_beta_per_km < clear_beta_per_km {
        return domain(format!(
            "fog extinction ({fog_beta_per_km}) must be at least the clear-air value ({clear_beta_per_km})"
        ));
    }
    let clear = required_tx_power_dbw(cfg, noise, scheme, clear_beta_per_km, range_km, target_ber)?;
    let fog = required_tx_power_dbw(cfg, noise, scheme, fog_beta_per_km, range_km, target_ber)?;
    Ok(fog - clear)
}

/// Transmit power (dBW) that brings the electrical SNR to the level needed
/// for `target_ber`.
pub fn required_tx_power_dbw(
    cfg: &TransceiverConfig,
    noise: &ReceiverNoiseConfig,
    scheme: OokScheme,
    beta_per_km: f64,
    range_km: f64,
    target_ber: f64,
) -> Result<f64> {
    let snr = required_snr_for_ber(scheme, target_ber)?;
    let p_rx = received_power_for_snr(snr, noise)?;
    let gain_db = geometric_gain_db(cfg, DB_PER_NEPER * beta_per_km, range_km)?;
    let p_tx_dbw = linear_to_db(p_rx) - gain_db;
    if !p_tx_dbw.is_finite() {
        return Err(Error::Unattainable(format!(
            "no finite transmit power reaches BER {target_ber} at {range_km} km (β = {beta_per_km}/km)"
        )));
    }
    Ok(p_tx_dbw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn noise() -> ReceiverNoiseConfig {
        ReceiverNoiseConfig::default()
    }

    /// `erfc` by composite Simpson quadrature of `2/√π ∫_x^∞ exp(-t²) dt`,
    /// truncated at `x + 12`.
    fn erfc_quadrature(x: f64) -> f64 {
        let (a, b) = (x, x + 12.0);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = f(a) + f(b);
        for i in 1..n {
            let t = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) };
        }
        2.0 / PI.sqrt() * s * h / 3.0
    }

    #[test]
    fn photon_energy_values() {
        let e1550 = photon_energy(1550.0, &noise()).unwrap();
        assert!((e1550 / 1.282e-19 - 1.0).abs() < 2e-3);
        assert_eq!(photon_energy(775.0, &noise()).unwrap(), 2.0 * e1550);
        assert!((photon_energy(550.0, &noise()).unwrap() / 3.613e-19 - 1.0).abs() < 2e-3);
        assert!(photon_energy(0.0, &noise()).is_err());
    }

    #[test]
    fn geometric_received_power() {
        let mut cfg = TransceiverConfig {
            tx_power_w: 0.1,
            tx_aperture_m: 0.1,
            rx_aperture_m: 0.1,
            ..Default::default()
        };
        // hand oracle: 0.1 * 0.01 / 3.1² * 10^(-2.13*4.343/10)
        let gamma = 2.13 * DB_PER_NEPER;
        let p = received_power_geometric(&cfg, gamma, 1.0).unwrap();
        assert_relative_eq!(p, 1.2366003522623277e-5, max_relative = 1e-12);

        cfg.divergence_mrad = 1e-12;
        cfg.tx_aperture_m = 0.05;
        let p = received_power_geometric(&cfg, 0.0, 5.0).unwrap();
        assert_relative_eq!(p, 0.1 * 4.0, max_relative = 1e-9);

        cfg.divergence_mrad = 3.0;
        cfg.tx_aperture_m = 1e-9;
        let p1 = received_power_geometric(&cfg, 0.0, 2.0).unwrap();
        let p2 = received_power_geometric(&cfg, 0.0, 4.0).unwrap();
        assert_relative_eq!(p1 / p2, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn far_field_received_power() {
        let cfg = TransceiverConfig::default();
        let gamma = 2.13 * DB_PER_NEPER;
        // D_r = 0.1 m, θL = 3 m: 0.1 * (0.1/3)² * 10^(-0.925) * 0.64
        let p = received_power_aperture(&cfg, gamma, 1.0).unwrap();
        assert_relative_eq!(p, 8.45065200728247e-06, max_relative = 1e-9);

        let half = TransceiverConfig { divergence_mrad: 1.5, ..cfg };
        let ph = received_power_aperture(&half, gamma, 1.0).unwrap();
        assert_relative_eq!(ph / p, 4.0, max_relative = 1e-12);

        // unity geometric factor hits the cap exactly
        let unity = TransceiverConfig {
            tx_efficiency: 1.0,
            rx_efficiency: 1.0,
            rx_aperture_m: 3.0,
            ..cfg
        };
        assert_relative_eq!(received_power_aperture(&unity, 0.0, 1.0).unwrap(), cfg.tx_power_w, max_relative = 1e-12);
        let close = received_power_aperture(&unity, 0.0, 0.1).unwrap();
        assert_eq!(close, cfg.tx_power_w);
        assert!(received_power_aperture(&cfg, 1.0, 0.0).is_err());
    }

    #[test]
    fn data_rate_examples() {
        assert_eq!(achievable_data_rate(0.0, 1550.0, 100.0, &noise()).unwrap(), 0.0);
        let r = achievable_data_rate(1e-6, 1550.0, 100.0, &noise()).unwrap();
        assert!((r / 9.93e10 - 1.0).abs() < 5e-3, "{r}");
        let r2 = achievable_data_rate(2e-6, 1550.0, 100.0, &noise()).unwrap();
        assert_relative_eq!(r2, 2.0 * r, max_relative = 1e-15);
        assert!(achievable_data_rate(1e-6, 1550.0, 0.0, &noise()).is_err());
    }

    #[test]
    fn snr_budget_example() {
        let inputs = RfBudgetInputs {
            tx_power_dbm: 30.0,
            wavelength_m: 1550e-9,
            ..Default::default()
        };
        let s = snr_budget_db(&inputs).unwrap();
        assert!((s - 5.7).abs() < 0.2, "{s}");
        let s3 = snr_budget_db(&RfBudgetInputs { total_attenuation_db: 3.0, ..inputs }).unwrap();
        assert_relative_eq!(s - s3, 3.0, max_relative = 1e-12);
        let s10 = snr_budget_db(&RfBudgetInputs { fade_margin_db: 10.0, ..inputs }).unwrap();
        assert_relative_eq!(s - s10, 10.0, max_relative = 1e-12);
        // a transmit gain of 10 lowers the budget, as printed
        let sg = snr_budget_db(&RfBudgetInputs { tx_gain_linear: 10.0, ..inputs }).unwrap();
        assert_relative_eq!(s - sg, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn electrical_snr_examples() {
        let zero_dark = ReceiverNoiseConfig { dark_current_a: 0.0, ..noise() };
        assert_eq!(electrical_snr_linear(0.0, &zero_dark).unwrap(), 0.0);
        // hand oracle with the default receiver at 1 µW
        let s = electrical_snr_linear(1e-6, &noise()).unwrap();
        assert_relative_eq!(s, 29.368012220123376, max_relative = 1e-9);
        // thermal-dominated: shot term ≪ 1% of thermal at 1 nW
        let a = electrical_snr_linear(1e-9, &zero_dark).unwrap();
        let b = electrical_snr_linear(2e-9, &zero_dark).unwrap();
        assert!((b / a / 4.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn received_power_for_snr_inverts() {
        for s in [0.5, 10.0, 144.0, 1e4] {
            let p = received_power_for_snr(s, &noise()).unwrap();
            assert_relative_eq!(electrical_snr_linear(p, &noise()).unwrap(), s, max_relative = 1e-10);
        }
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(channel_capacity(1e9, 0.0).unwrap(), 0.0);
        assert_relative_eq!(channel_capacity(1e9, 1.0).unwrap(), 1e9, max_relative = 1e-15);
        let c = channel_capacity(1e9, 25.07).unwrap();
        assert!((c / 4.705e9 - 1.0).abs() < 5e-3);
        assert!(channel_capacity(1e9, -1.0).is_err());
        assert!(channel_capacity(0.0, 1.0).is_err());
    }

    #[test]
    fn ber_examples() {
        assert_eq!(ber(OokScheme::NrzOok, 0.0).unwrap(), 0.5);
        assert_eq!(ber(OokScheme::RzOok, 0.0).unwrap(), 0.5);
        for s in [0.1, 1.0, 10.0, 100.0, 1234.5] {
            let rz = ber(OokScheme::RzOok, s).unwrap();
            let nrz = ber(OokScheme::NrzOok, 2.0 * s).unwrap();
            assert!((rz - nrz).abs() <= 1e-12 * rz);
        }
        let oracle = 0.5 * erfc_quadrature(36f64.sqrt() / (2.0 * 2f64.sqrt()));
        assert_relative_eq!(oracle, 1.3498980316300957e-3, max_relative = 1e-9);
        let b = ber(OokScheme::NrzOok, 36.0).unwrap();
        assert!((b / oracle - 1.0).abs() < 0.02);
        assert!(ber(OokScheme::NrzOok, -1.0).is_err());
    }

    #[test]
    fn required_snr_examples() {
        for scheme in [OokScheme::NrzOok, OokScheme::RzOok] {
            let s = required_snr_for_ber(scheme, 1e-9).unwrap();
            assert_relative_eq!(ber(scheme, s).unwrap(), 1e-9, max_relative = 1e-8);
            let near = required_snr_for_ber(scheme, 0.5 - 1e-12).unwrap();
            assert!(near < 1e-10, "{near}");
        }
        // Q = 6 corresponds to BER ≈ 1e-9 for NRZ
        let s = required_snr_for_ber(OokScheme::NrzOok, 1e-9).unwrap();
        assert!((s.sqrt() / 2.0 - 5.998).abs() < 0.01);
        for b in [1e-3, 1e-9, 1e-15] {
            let nrz = required_snr_for_ber(OokScheme::NrzOok, b).unwrap();
            let rz = required_snr_for_ber(OokScheme::RzOok, b).unwrap();
            assert_eq!(rz, nrz / 2.0);
        }
        assert!(required_snr_for_ber(OokScheme::NrzOok, 0.5).is_err());
        assert!(required_snr_for_ber(OokScheme::NrzOok, 0.0).is_err());
    }

    #[test]
    fn power_penalty_examples() {
        let cfg = TransceiverConfig::default();
        let n = noise();
        let p0 = power_penalty_db(&cfg, &n, OokScheme::NrzOok, 0.1, 0.1, 3.0, 1e-9).unwrap();
        assert_eq!(p0, 0.0);
        let p = power_penalty_db(&cfg, &n, OokScheme::NrzOok, 0.1, 2.0, 3.0, 1e-9).unwrap();
        let extra_loss = path_loss(2.0, 3.0) - path_loss(0.1, 3.0);
        assert!((p - extra_loss).abs() < 0.05);
        for l in 1..=10 {
            let l = l as f64;
            let dense = power_penalty_db(&cfg, &n, OokScheme::NrzOok, 0.1, 78.0, l, 1e-9).unwrap();
            let light = power_penalty_db(&cfg, &n, OokScheme::NrzOok, 0.1, 5.0, l, 1e-9).unwrap();
            assert!(dense > light);
        }
        assert!(power_penalty_db(&cfg, &n, OokScheme::NrzOok, 1.0, 0.5, 1.0, 1e-9).is_err());
        assert!(required_tx_power_dbw(&cfg, &n, OokScheme::NrzOok, f64::INFINITY, 1.0, 1e-9).is_err());
    }

    fn path_loss(beta: f64, l: f64) -> f64 {
        DB_PER_NEPER * beta * l
    }

    #[test]
    fn db_conversions_round_trip() {
        for x in [1e-12, 0.5, 1.0, 3.0, 1e9] {
            assert_relative_eq!(db_to_linear(linear_to_db(x)), x, max_relative = 1e-12);
            assert_relative_eq!(dbm_to_watts(watts_to_dbm(x)), x, max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn data_rate_forms_agree(
            p in 0.005f64..0.1, div in 0.5f64..5.0, eff_t in 0.3f64..1.0, eff_r in 0.3f64..1.0,
            d in 0.01f64..0.2, lambda in 700.0f64..1600.0, gamma in 0.0f64..50.0, l in 0.2f64..10.0,
            nb in 10.0f64..1000.0,
        ) {
            let cfg = TransceiverConfig {
                tx_power_w: p, divergence_mrad: div, tx_efficiency: eff_t, rx_efficiency: eff_r,
                rx_aperture_m: d, wavelength_nm: lambda, photons_per_bit: nb, ..Default::default()
            };
            let n = ReceiverNoiseConfig::default();
            // keep the far-field form below its cap
            prop_assume!(d < div * 1e-3 * l * 1e3);
            let direct = data_rate_from_link(&cfg, gamma, l, &n).unwrap();
            let prx = received_power_aperture(&cfg, gamma, l).unwrap();
            let composed = achievable_data_rate(prx, lambda, nb, &n).unwrap();
            prop_assert!((direct - composed).abs() <= 1e-10 * direct.abs().max(f64::MIN_POSITIVE));
            // the finite-aperture form with a point source and ideal optics matches too
            let point = TransceiverConfig { tx_aperture_m: 1e-300, tx_efficiency: 1.0, rx_efficiency: 1.0, ..cfg };
            let prx_geo = received_power_geometric(&point, gamma, l).unwrap();
            let composed_geo = achievable_data_rate(prx_geo, lambda, nb, &n).unwrap();
            let direct_ideal = data_rate_from_link(&point, gamma, l, &n).unwrap();
            prop_assert!((direct_ideal - composed_geo).abs() <= 1e-10 * direct_ideal.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn received_power_nonincreasing(g in 0.0f64..40.0, dg in 0.0f64..10.0, l in 0.05f64..10.0, dl in 0.0f64..5.0) {
            let cfg = TransceiverConfig::default();
            let a = received_power_geometric(&cfg, g, l).unwrap();
            prop_assert!(received_power_geometric(&cfg, g + dg, l).unwrap() <= a);
            prop_assert!(received_power_geometric(&cfg, g, l + dl).unwrap() <= a);
            let b = received_power_aperture(&cfg, g, l).unwrap();
            prop_assert!(received_power_aperture(&cfg, g + dg, l).unwrap() <= b);
            prop_assert!(received_power_aperture(&cfg, g, l + dl).unwrap() <= b);
        }

        #[test]
        fn ber_strictly_decreasing(s in 0.0f64..400.0, ds in 0.01f64..10.0) {
            for scheme in [OokScheme::NrzOok, OokScheme::RzOok] {
                prop_assert!(ber(scheme, s + ds).unwrap() < ber(scheme, s).unwrap());
            }
        }

        #[test]
        fn capacity_monotone_and_linear(b in 1.0f64..1e10, s in 0.0f64..1e4, ds in 0.0f64..100.0) {
            prop_assert!(channel_capacity(b, s + ds).unwrap() >= channel_capacity(b, s).unwrap());
            let c = channel_capacity(b, s).unwrap();
            let c2 = channel_capacity(2.0 * b, s).unwrap();
            prop_assert!((c2 - 2.0 * c).abs() <= 1e-12 * c2.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn electrical_snr_increasing(p in 1e-12f64..1e-2, f in 1.001f64..10.0) {
            let n = ReceiverNoiseConfig::default();
            prop_assert!(electrical_snr_linear(p * f, &n).unwrap() > electrical_snr_linear(p, &n).unwrap());
        }
    }
}
