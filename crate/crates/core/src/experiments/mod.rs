//! Figure presets, parameter sweeps, comparison of the closed form with the
//! Monte-Carlo engine, and the file formats used by the command line tool.

mod config;
mod report;
mod table;

pub use config::{load_config, parse_config};
pub use report::{compare_report, CompareReport, VariantSummary};
pub use table::{
    parse_spectrum_csv, parse_sweep_csv, read_result, spectrum_path, write_result, write_spectrum_csv,
    write_sweep_csv,
};

use serde::{Deserialize, Serialize};

use crate::analytic::{inband_average, predict};
use crate::cancellation::DlcMode;
use crate::coupling::{distance_scaled_profile, AlcErrorMode, PropagationModel};
use crate::error::{invalid, Error, Result};
use crate::phasenoise::OscillatorKind;
use crate::scenario::{AlcSetting, Preset, ScenarioConfig};
use crate::simulator::{run_monte_carlo, stderr_db};
use crate::{from_db, to_db};

/// Antenna spacing of the canonical coupling profile, metres.
pub const REFERENCE_DISTANCE: f64 = 0.2;

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Oscillator 3-dB bandwidth, Hz.
    Beta,
    /// Offset applied to every reflected tap power, dB.
    ChannelDeltaDb,
    /// DLC suppression, dB.
    DlcDb,
    /// ALC suppression, dB.
    AlcDb,
    /// TX-RX oscillator interface delay δ, seconds.
    TxRxDelay,
    /// Antenna spacing, metres.
    Distance,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Beta => "beta_hz",
            Self::ChannelDeltaDb => "channel_delta_db",
            Self::DlcDb => "dlc_db",
            Self::AlcDb => "alc_db",
            Self::TxRxDelay => "tx_rx_delay_s",
            Self::Distance => "distance_m",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        [Self::Beta, Self::ChannelDeltaDb, Self::DlcDb, Self::AlcDb, Self::TxRxDelay, Self::Distance]
            .into_iter()
            .find(|a| a.as_str() == name)
            .ok_or_else(|| invalid(format!("unknown axis `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub preset: Preset,
    pub oscillator: OscillatorKind,
}

impl Variant {
    pub fn label(&self) -> String {
        format!("{}/{}", self.preset.as_str(), self.oscillator.as_str())
    }
}

/// All four combinations in a fixed order.
pub fn all_variants() -> Vec<Variant> {
    let mut out = Vec::new();
    for preset in [Preset::Practical, Preset::Ideal] {
        for oscillator in [OscillatorKind::Common, OscillatorKind::Independent] {
            out.push(Variant { preset, oscillator });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    /// Scenario every point starts from; the variant then sets the
    /// oscillator kind and the cancellation preset.
    pub base: ScenarioConfig,
    pub axis: Axis,
    pub points: Vec<f64>,
    pub variants: Vec<Variant>,
    /// Also report per-subcarrier spectra.
    pub spectrum: bool,
    /// Path-loss model for the distance axis.
    pub propagation: PropagationModel,
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

fn lin_grid(lo: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// Names accepted by [`preset`].
pub const FIGURES: [&str; 8] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

/// Sweep definition reproducing one of the reference figures.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let base = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 50.0);
    let kinds = |preset| {
        [OscillatorKind::Common, OscillatorKind::Independent]
            .into_iter()
            .map(move |oscillator| Variant { preset, oscillator })
            .collect::<Vec<_>>()
    };
    let (axis, points, variants, spectrum) = match name {
        "fig3" => (Axis::Beta, vec![50.0], kinds(Preset::Practical), true),
        "fig4" => (Axis::Beta, vec![50.0], kinds(Preset::Ideal), true),
        "fig5" => {
            let mut points = vec![0.0];
            points.extend(log_grid(0.1, 1e3, 41));
            (Axis::Beta, points, all_variants(), false)
        }
        "fig6" => (Axis::ChannelDeltaDb, lin_grid(-10.0, 0.5, 31), all_variants(), false),
        "fig7" => (Axis::DlcDb, lin_grid(0.0, 2.0, 41), all_variants(), false),
        "fig8" => (Axis::AlcDb, lin_grid(0.0, 1.0, 34), all_variants(), false),
        "fig9" => (Axis::TxRxDelay, log_grid(6.6713e-10, 65e-9, 21), all_variants(), false),
        "fig10" => (Axis::Distance, log_grid(REFERENCE_DISTANCE, 20.0, 21), kinds(Preset::Ideal), false),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(SweepSpec {
        name: name.to_string(),
        base,
        axis,
        points,
        variants,
        spectrum,
        propagation: PropagationModel::PerPath,
    })
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() || self.variants.is_empty() {
            return Err(invalid("a sweep needs at least one point and one variant"));
        }
        if self.points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("sweep points must be strictly increasing"));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("sweep points must be finite"));
        }
        Ok(())
    }

    /// Scenario for one (point, variant) pair. Infeasible ALC targets are
    /// left for [`ScenarioConfig::validate`] to report.
    pub fn scenario(&self, value: f64, variant: Variant) -> Result<ScenarioConfig> {
        let mut cfg = self.base.clone();
        cfg.oscillator = variant.oscillator;
        cfg.alc = variant.preset.alc();
        cfg.dlc = variant.preset.dlc();
        let practical = variant.preset == Preset::Practical;
        match self.axis {
            Axis::Beta => cfg.beta = value,
            Axis::ChannelDeltaDb => cfg.profile = cfg.profile.with_reflections_offset_db(value),
            Axis::DlcDb => cfg.dlc = DlcMode::Suppression(from_db(-value)),
            Axis::AlcDb => {
                let mode = match cfg.alc {
                    AlcSetting::Suppression { mode, .. } => mode,
                    AlcSetting::Ideal => AlcErrorMode::default(),
                };
                cfg.alc = AlcSetting::Suppression { a: from_db(-value), mode };
                if !practical {
                    cfg.dlc = DlcMode::Ideal;
                }
            }
            Axis::TxRxDelay => cfg.profile.main_delay = value,
            Axis::Distance => {
                cfg.profile = distance_scaled_profile(
                    &cfg.profile,
                    value,
                    REFERENCE_DISTANCE,
                    cfg.waveform.sample_interval,
                    self.propagation,
                )?
            }
        }
        Ok(cfg)
    }
}

/// One (point, variant) outcome. Powers are in dB relative to the row's
/// reference power; `None` marks columns that were not computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub variant: Variant,
    pub analytic_inband_db: Option<f64>,
    pub sim_inband_db: Option<f64>,
    pub sim_stderr_db: Option<f64>,
    pub trials: usize,
    pub feasible: bool,
    /// Reference power of the row, relative to lossless direct coupling.
    pub reference_power: f64,
}

impl SweepRow {
    /// Total suppression including antenna isolation and path loss:
    /// the residual relative to lossless direct coupling, sign flipped.
    pub fn total_suppression_db(&self) -> Option<f64> {
        self.analytic_inband_db.map(|db| -(db + to_db(self.reference_power)))
    }
}

/// Per-subcarrier result, bins in natural order `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    /// `preset/oscillator`, or the file stem when read back.
    pub label: String,
    pub analytic_db: Vec<f64>,
    pub sim_mean_db: Option<Vec<f64>>,
    pub sim_stderr_db: Option<Vec<f64>>,
    /// Active subcarrier indices, used when comparing.
    pub active_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    pub spectra: Vec<SpectrumTable>,
}

/// Evaluates the closed form for every point and variant and, when
/// `trials > 0`, the Monte-Carlo estimate as well. All points share
/// `master_seed`.
pub fn run_sweep(spec: &SweepSpec, trials: usize, master_seed: u64) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    for &value in &spec.points {
        for &variant in &spec.variants {
            let cfg = spec.scenario(value, variant)?;
            let reference_power = cfg.reference_power();
            let mut row = SweepRow {
                axis: spec.axis,
                axis_value: value,
                variant,
                analytic_inband_db: None,
                sim_inband_db: None,
                sim_stderr_db: None,
                trials: 0,
                feasible: true,
                reference_power,
            };
            match cfg.validate() {
                Ok(()) => {}
                Err(Error::InfeasibleAlc { .. } | Error::InfeasibleSeparation { .. }) => {
                    row.feasible = false;
                    rows.push(row);
                    continue;
                }
                Err(e) => return Err(e),
            }
            let active = &cfg.waveform.active_set;
            let prediction = predict(&cfg)?;
            row.analytic_inband_db = Some(inband_average(&prediction.post_dlc, active)?);
            let mc = if trials > 0 { Some(run_monte_carlo(&cfg, trials, master_seed)?) } else { None };
            if let Some(mc) = &mc {
                row.sim_inband_db = Some(mc.inband_post_db());
                row.sim_stderr_db = Some(mc.inband_post_stderr_db());
                row.trials = mc.trials_run;
            }
            if spec.spectrum {
                let rel = |v: &f64| to_db(v / reference_power);
                spectra.push(SpectrumTable {
                    label: variant.label(),
                    analytic_db: prediction.post_dlc.db(),
                    sim_mean_db: mc.as_ref().map(|m| m.mean_post.iter().map(rel).collect()),
                    sim_stderr_db: mc.as_ref().map(|m| {
                        m.mean_post.iter().zip(&m.stderr_post).map(|(&a, &s)| stderr_db(a, s)).collect()
                    }),
                    active_set: active.clone(),
                });
            }
            rows.push(row);
        }
    }
    Ok(SweepResult { axis: spec.axis, rows, spectra })
}
