//! Digital linear cancellation (DLC): estimation-error model, effective
//! channel estimate and time-domain subtraction of the filtered TX samples.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coupling::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::ofdm::TimeSymbol;
use crate::phasenoise::PhaseStreams;
use crate::Cf64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DlcMode {
    Ideal,
    /// Extra whole-signal suppression `d` over ALC, without phase noise.
    Suppression(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlcSetting {
    pub mode: DlcMode,
    /// Per-tap estimation error variance σ_ee², normalized to unit SI power
    /// before ALC.
    pub est_error_var: f64,
}

impl DlcSetting {
    pub fn ideal() -> Self {
        Self { mode: DlcMode::Ideal, est_error_var: 0.0 }
    }

    pub fn suppression(d: f64, a: f64, max_delay: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&d) {
            return Err(invalid(format!("DLC suppression {d} must lie in [0, 1]")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(invalid(format!("ALC suppression {a} must lie in (0, 1]")));
        }
        Ok(Self { mode: DlcMode::Suppression(d), est_error_var: dlc_error_variance(d, a, max_delay) })
    }
}

/// σ_ee² = d·a/(P + 1): an error of this variance on each of the `P + 1`
/// taps leaves the fraction `d·a` of the pre-ALC SI power when there is no
/// phase noise.
pub fn dlc_error_variance(d: f64, a: f64, max_delay: usize) -> f64 {
    d * a / (max_delay + 1) as f64
}

/// Estimated effective taps, aligned with the profile delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub taps: Vec<Cf64>,
}

/// Block mean of `e^(j(φ_t(nT_s − δ) − φ_r(nT_s)))` over `body`.
pub fn common_phase_error(streams: &PhaseStreams, body: std::ops::Range<usize>) -> Cf64 {
    let len = body.len() as f64;
    body.map(|n| streams.net_rotation(0, n)).sum::<Cf64>() / len
}

/// `estimate_b = α_b·rotation_b·cpe + e_b` with `e_b` circular complex
/// Normal of variance σ_ee².
pub fn estimate_effective_channel<R: Rng + ?Sized>(
    true_taps: &ChannelRealization,
    carrier_rotations: &[Cf64],
    cpe: Cf64,
    sigma_ee2: f64,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    if carrier_rotations.len() != true_taps.taps.len() {
        return Err(Error::LengthMismatch {
            expected: true_taps.taps.len(),
            got: carrier_rotations.len(),
        });
    }
    if !(sigma_ee2 >= 0.0) {
        return Err(invalid("estimation error variance must be non-negative"));
    }
    let scale = (sigma_ee2 / 2.0).sqrt();
    let taps = true_taps
        .taps
        .iter()
        .zip(carrier_rotations)
        .map(|(alpha, rot)| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            alpha * rot * cpe + Cf64::new(re, im) * scale
        })
        .collect();
    Ok(ChannelEstimate { taps })
}

/// `u_n = y_n − Σ_b ĥ_b·x_{n−b}`. Samples before the start of the frame are
/// zero; the CP makes the body see a circular convolution.
pub fn apply_dlc(
    rx: &TimeSymbol,
    tx_reference: &TimeSymbol,
    est: &ChannelEstimate,
    tap_delays: &[usize],
) -> Result<TimeSymbol> {
    let len = rx.samples.len();
    if tx_reference.samples.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: tx_reference.samples.len() });
    }
    if est.taps.len() != tap_delays.len() {
        return Err(Error::LengthMismatch { expected: tap_delays.len(), got: est.taps.len() });
    }
    let x = &tx_reference.samples;
    let samples = rx
        .samples
        .iter()
        .enumerate()
        .map(|(n, y)| {
            let replica: Cf64 = tap_delays
                .iter()
                .zip(&est.taps)
                .filter(|(&b, _)| b <= n)
                .map(|(&b, h)| h * x[n - b])
                .sum();
            y - replica
        })
        .collect();
    Ok(TimeSymbol { samples })
}
