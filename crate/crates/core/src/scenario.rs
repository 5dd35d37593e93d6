//! Full link scenario shared by the closed-form model and the simulator.

use serde::{Deserialize, Serialize};

use crate::cancellation::{dlc_error_variance, DlcMode};
use crate::coupling::{derive_alc_factor, feasibility_bounds, AlcErrorMode, CouplingProfile};
use crate::error::{invalid, Error, Result};
use crate::ofdm::OfdmConfig;
use crate::phasenoise::{OscillatorKind, OscillatorScenario};

/// Analog cancellation of the direct path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlcSetting {
    /// Direct path removed completely; the reflections set the best
    /// attainable whole-signal suppression.
    Ideal,
    /// Whole-signal suppression `a` (linear).
    Suppression { a: f64, mode: AlcErrorMode },
}

/// Reference cancellation presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 30 dB ALC and 50 dB DLC: 80 dB total without phase noise.
    Practical,
    /// Ideal ALC on the direct path and perfect DLC.
    Ideal,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Practical => "practical",
            Self::Ideal => "ideal",
        }
    }

    pub fn alc(self) -> AlcSetting {
        match self {
            Self::Practical => AlcSetting::Suppression { a: 1e-3, mode: AlcErrorMode::PureAmplitude },
            Self::Ideal => AlcSetting::Ideal,
        }
    }

    pub fn dlc(self) -> DlcMode {
        match self {
            Self::Practical => DlcMode::Suppression(1e-5),
            Self::Ideal => DlcMode::Ideal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub waveform: OfdmConfig,
    pub profile: CouplingProfile,
    pub oscillator: OscillatorKind,
    /// Oscillator 3-dB bandwidth β, Hz.
    pub beta: f64,
    pub alc: AlcSetting,
    pub dlc: DlcMode,
    /// Include the per-symbol common phase error in the DLC channel
    /// estimate.
    pub cpe_in_estimate: bool,
    pub trials: usize,
    pub master_seed: u64,
}

impl ScenarioConfig {
    /// Canonical waveform and coupling with one of the reference presets.
    pub fn preset(preset: Preset, oscillator: OscillatorKind, beta: f64) -> Self {
        Self {
            waveform: OfdmConfig::lte_like(),
            profile: CouplingProfile::canonical(),
            oscillator,
            beta,
            alc: preset.alc(),
            dlc: preset.dlc(),
            cpe_in_estimate: true,
            trials: 1000,
            master_seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.waveform.validate()?;
        self.profile.validate()?;
        self.oscillator_scenario().validate()?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least one"));
        }
        if self.profile.max_delay() > self.waveform.cp_len {
            return Err(invalid(format!(
                "tap delay {} exceeds the cyclic prefix of {} samples",
                self.profile.max_delay(),
                self.waveform.cp_len
            )));
        }
        if let DlcMode::Suppression(d) = self.dlc {
            if !(0.0..=1.0).contains(&d) {
                return Err(invalid(format!("DLC suppression {d} must lie in [0, 1]")));
            }
        }
        self.alc_factor()?;
        Ok(())
    }

    pub fn oscillator_scenario(&self) -> OscillatorScenario {
        OscillatorScenario {
            kind: self.oscillator,
            beta: self.beta,
            tx_rx_delay: self.profile.main_delay,
        }
    }

    /// SI power per active subcarrier at the FFT output with no cancellation
    /// beyond antenna separation. All dB figures are relative to this.
    pub fn reference_power(&self) -> f64 {
        let sigma = self.waveform.subcarrier_powers();
        let mean_active = self.waveform.active_set.iter().map(|&k| sigma[k]).sum::<f64>()
            / self.waveform.active_set.len().max(1) as f64;
        self.profile.total_power() * mean_active
    }

    /// Direct-path ALC factor `a′` (zero for ideal ALC).
    pub fn alc_factor(&self) -> Result<f64> {
        match self.alc {
            AlcSetting::Ideal => Ok(0.0),
            AlcSetting::Suppression { a, .. } => derive_alc_factor(a, &self.profile),
        }
    }

    /// Whole-signal ALC suppression actually realized.
    pub fn realized_alc(&self) -> f64 {
        match self.alc {
            AlcSetting::Ideal => feasibility_bounds(&self.profile).1,
            AlcSetting::Suppression { a, .. } => a,
        }
    }

    pub fn alc_error_mode(&self) -> AlcErrorMode {
        match self.alc {
            AlcSetting::Ideal => AlcErrorMode::PureAmplitude,
            AlcSetting::Suppression { mode, .. } => mode,
        }
    }

    /// Tap powers after separation and ALC.
    pub fn post_alc_powers(&self) -> Result<Vec<f64>> {
        let mut powers = self.profile.tap_powers.clone();
        powers[0] *= self.alc_factor()?;
        Ok(powers)
    }

    /// Per-tap estimation error variance σ_ee² relative to unit pre-ALC SI.
    pub fn normalized_error_variance(&self) -> Result<f64> {
        match self.dlc {
            DlcMode::Ideal => Ok(0.0),
            DlcMode::Suppression(d) => {
                if !(0.0..=1.0).contains(&d) {
                    return Err(invalid(format!("DLC suppression {d} must lie in [0, 1]")));
                }
                Ok(dlc_error_variance(d, self.realized_alc(), self.profile.max_delay()))
            }
        }
    }

    /// Absolute per-tap estimation error variance.
    pub fn est_error_power(&self) -> Result<f64> {
        Ok(self.normalized_error_variance()? * self.reference_power())
    }

    /// True when the separation and ALC targets are attainable.
    pub fn is_feasible(&self) -> bool {
        !matches!(self.alc_factor(), Err(Error::InfeasibleAlc { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::to_db;

    #[test]
    fn canonical_reference_power() {
        let cfg = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 50.0);
        assert!((cfg.reference_power() - 1.00045e-3).abs() < 1e-8);
        let single = ScenarioConfig {
            profile: CouplingProfile::new(vec![0], vec![1.0], 0.5, 0.0).unwrap(),
            ..cfg
        };
        assert_eq!(single.reference_power(), 1.0);
    }

    #[test]
    fn practical_error_variance_gives_80_db() {
        let cfg = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 0.0);
        let total = 5.0 * cfg.est_error_power().unwrap();
        assert!((to_db(total / cfg.reference_power()) + 80.0).abs() < 1e-9);
        assert!((cfg.normalized_error_variance().unwrap() - 2e-9).abs() < 1e-22);
    }

    #[test]
    fn ideal_alc_uses_best_attainable_suppression() {
        let mut cfg = ScenarioConfig::preset(Preset::Ideal, OscillatorKind::Common, 0.0);
        assert_eq!(cfg.post_alc_powers().unwrap()[0], 0.0);
        assert!((-to_db(cfg.realized_alc()) - 33.49).abs() < 0.01);
        cfg.dlc = DlcMode::Suppression(1e-5);
        let total = 5.0 * cfg.est_error_power().unwrap();
        assert!((to_db(total / cfg.reference_power()) + 50.0 + 33.49).abs() < 0.01);
    }

    #[test]
    fn validation_catches_long_taps_and_bad_alc() {
        let mut cfg = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 0.0);
        cfg.alc = AlcSetting::Suppression { a: 1e-4, mode: AlcErrorMode::PureAmplitude };
        assert!(matches!(cfg.validate(), Err(Error::InfeasibleAlc { .. })));
        assert!(!cfg.is_feasible());

        let mut cfg = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 0.0);
        cfg.waveform.cp_len = 3;
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig::preset(Preset::Ideal, OscillatorKind::Common, 0.0);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }
}
