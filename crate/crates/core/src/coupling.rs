//! Multipath SI coupling channel, antenna separation and the main-tap
//! algebra of single-path analog linear cancellation (ALC).
//!
//! Antenna separation `c` and ALC suppression `a` are quoted, as usual, as
//! whole-signal suppressions even though both only act on the direct path.
//! The factors here convert them into the suppression the direct path
//! itself must see.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::{from_db, Cf64};

/// Propagation speed used to turn antenna distance into delay, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Sampled coupling channel after antenna separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingProfile {
    /// Tap delays in samples; strictly increasing and starting at zero.
    pub tap_delays: Vec<usize>,
    /// Linear tap powers, absolute, with lossless direct coupling at 1.
    pub tap_powers: Vec<f64>,
    /// Whole-signal antenna separation `c`, linear.
    pub separation: f64,
    /// Propagation delay δ of the direct path, seconds.
    pub main_delay: f64,
}

impl CouplingProfile {
    pub fn new(
        tap_delays: Vec<usize>,
        tap_powers: Vec<f64>,
        separation: f64,
        main_delay: f64,
    ) -> Result<Self> {
        let profile = Self { tap_delays, tap_powers, separation, main_delay };
        profile.validate()?;
        Ok(profile)
    }

    /// Builds a profile from dB powers, filling every missing sample delay
    /// up to the largest one with a zero-power tap.
    pub fn from_db(
        delays: &[usize],
        powers_db: &[f64],
        separation_db: f64,
        main_delay: f64,
    ) -> Result<Self> {
        if delays.len() != powers_db.len() {
            return Err(Error::LengthMismatch { expected: delays.len(), got: powers_db.len() });
        }
        let max = *delays.iter().max().ok_or_else(|| invalid("channel needs at least one tap"))?;
        let mut powers = vec![0.0; max + 1];
        let mut seen = vec![false; max + 1];
        for (&d, &p) in delays.iter().zip(powers_db) {
            if seen[d] {
                return Err(invalid(format!("tap delay {d} listed twice")));
            }
            seen[d] = true;
            powers[d] = from_db(p);
        }
        Self::new((0..=max).collect(), powers, from_db(-separation_db), main_delay)
    }

    /// Short-range handheld coupling: −30, −65, −70 and −75 dB at delays
    /// 0, 1, 2 and 4 samples (empty tap at 3), 30 dB separation, ~20 cm.
    pub fn canonical() -> Self {
        Self::from_db(&[0, 1, 2, 3, 4], &[-30.0, -65.0, -70.0, f64::NEG_INFINITY, -75.0], 30.0, 6.6713e-10)
            .expect("canonical profile is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.tap_delays.is_empty() || self.tap_delays.len() != self.tap_powers.len() {
            return Err(invalid("tap delays and powers must be non-empty and equally long"));
        }
        if self.tap_delays[0] != 0 {
            return Err(invalid("first tap delay must be zero"));
        }
        if self.tap_delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tap delays must be strictly increasing"));
        }
        if self.tap_powers.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(invalid("tap powers must be finite and non-negative"));
        }
        if !(self.separation > 0.0 && self.separation <= 1.0) {
            return Err(invalid("antenna separation must lie in (0, 1]"));
        }
        if !(self.main_delay >= 0.0) {
            return Err(Error::NegativeDuration(self.main_delay));
        }
        Ok(())
    }

    /// Largest tap delay `P`.
    pub fn max_delay(&self) -> usize {
        *self.tap_delays.last().unwrap()
    }

    pub fn main_power(&self) -> f64 {
        self.tap_powers[0]
    }

    /// Σ of the non-direct tap powers.
    pub fn reflected_power(&self) -> f64 {
        self.tap_powers[1..].iter().sum()
    }

    pub fn total_power(&self) -> f64 {
        self.tap_powers.iter().sum()
    }

    /// Scales every reflected tap by `delta_db`, leaving the direct path.
    pub fn with_reflections_offset_db(&self, delta_db: f64) -> Self {
        let gain = from_db(delta_db);
        let mut out = self.clone();
        out.tap_powers[1..].iter_mut().for_each(|p| *p *= gain);
        out
    }
}

/// Direct-path suppression `c′ = c + (c − 1)·Σσ²` needed so that the whole
/// signal sees separation `c`. Reflected powers are relative to lossless
/// direct coupling.
pub fn derive_main_tap_factor(c: f64, reflected_powers: &[f64]) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(invalid(format!("separation {c} must lie in (0, 1)")));
    }
    let sum: f64 = reflected_powers.iter().sum();
    let bound = sum / (1.0 + sum);
    if sum > 0.0 && c <= bound {
        return Err(Error::InfeasibleSeparation { c, bound });
    }
    Ok(c + (c - 1.0) * sum)
}

/// Direct-path ALC factor `a′` that yields whole-signal suppression `a`.
pub fn derive_alc_factor(a: f64, profile: &CouplingProfile) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(invalid(format!("ALC suppression {a} must lie in (0, 1]")));
    }
    let main = profile.main_power();
    let reflected = profile.reflected_power();
    if !(main > 0.0) {
        return Err(invalid("ALC needs a direct path with non-zero power"));
    }
    let bound = reflected / (main + reflected);
    if reflected > 0.0 && a <= bound {
        return Err(Error::InfeasibleAlc { a, bound });
    }
    Ok((a * main + (a - 1.0) * reflected) / main)
}

/// Smallest attainable separation and ALC factors `(c_min, a_min)`: the
/// reflected taps alone set these floors.
pub fn feasibility_bounds(profile: &CouplingProfile) -> (f64, f64) {
    let reflected = profile.reflected_power();
    if reflected == 0.0 {
        return (0.0, 0.0);
    }
    (reflected / (1.0 + reflected), reflected / (profile.main_power() + reflected))
}

/// How the ALC residual splits between amplitude and delay mismatch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlcErrorMode {
    #[default]
    PureAmplitude,
    PurePhase,
    /// Amplitude error alone would leave half the residual power; the delay
    /// error makes up the rest.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlcRealization {
    pub mode: AlcErrorMode,
    /// Amplitude error `α_e = α − α̂`.
    pub amplitude_error: f64,
    /// Delay error `δ_e = δ − δ̂`, seconds.
    pub delay_error: f64,
    /// Direct-path coefficient left after cancellation, `α_0`.
    pub residual: Cf64,
}

/// Picks amplitude and delay errors that leave `|α_0|² = a′·α²` and
/// evaluates `α_0 = α − (α − α_e)·e^(−jω_c δ_e)`.
pub fn realize_alc_residual(
    alpha_pre: f64,
    a_prime: f64,
    mode: AlcErrorMode,
    omega_c: f64,
) -> Result<AlcRealization> {
    if !(0.0..=1.0).contains(&a_prime) {
        return Err(invalid(format!("ALC factor {a_prime} must lie in [0, 1]")));
    }
    if !(alpha_pre >= 0.0) {
        return Err(invalid("direct-path magnitude must be non-negative"));
    }
    if mode != AlcErrorMode::PureAmplitude && !(omega_c > 0.0) {
        return Err(invalid("delay error needs a positive carrier frequency"));
    }
    // ρ = 1 − α_e/α and θ = ω_c·δ_e; |1 − ρe^(−jθ)|² = (1 − ρ)² + 4ρ·sin²(θ/2).
    let (rho, theta) = match mode {
        AlcErrorMode::PureAmplitude => (1.0 - a_prime.sqrt(), 0.0),
        AlcErrorMode::PurePhase => (1.0, 2.0 * (a_prime.sqrt() / 2.0).asin()),
        AlcErrorMode::Split => {
            let rho = 1.0 - (a_prime / 2.0).sqrt();
            (rho, 2.0 * (a_prime / (8.0 * rho)).sqrt().asin())
        }
    };
    let half = (theta / 2.0).sin();
    // 1 − ρe^(−jθ) = (1 − ρ) + ρ·(2sin²(θ/2) + j·sin θ)
    let unit = Cf64::new((1.0 - rho) + rho * 2.0 * half * half, rho * theta.sin());
    Ok(AlcRealization {
        mode,
        amplitude_error: alpha_pre * (1.0 - rho),
        delay_error: if theta == 0.0 { 0.0 } else { theta / omega_c },
        residual: unit * alpha_pre,
    })
}

/// One draw of the coupling channel, taps aligned with the profile delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Cf64>,
}

impl ChannelRealization {
    /// Replaces the direct tap with its ALC residual, keeping its phase.
    pub fn apply_alc(
        &mut self,
        a_prime: f64,
        mode: AlcErrorMode,
        omega_c: f64,
    ) -> Result<AlcRealization> {
        let pre = self.taps[0];
        let alc = realize_alc_residual(pre.norm(), a_prime, mode, omega_c)?;
        self.taps[0] = alc.residual * Cf64::from_polar(1.0, pre.arg());
        Ok(alc)
    }
}

fn circular_normal<R: Rng + ?Sized>(power: f64, rng: &mut R) -> Cf64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cf64::new(re, im) * (power / 2.0).sqrt()
}

/// Draws a WSSUS realization: reflected taps circular complex Normal with
/// the profile powers, direct tap of fixed magnitude and uniform phase.
///
/// `post_alc = Some(a′)` scales the direct-tap power by `a′`.
pub fn draw_channel<R: Rng + ?Sized>(
    profile: &CouplingProfile,
    post_alc: Option<f64>,
    rng: &mut R,
) -> ChannelRealization {
    let main_power = profile.main_power() * post_alc.unwrap_or(1.0);
    let theta = rng.random_range(0.0..2.0 * PI);
    let mut taps = Vec::with_capacity(profile.tap_powers.len());
    taps.push(Cf64::from_polar(main_power.sqrt(), theta));
    for &p in &profile.tap_powers[1..] {
        taps.push(circular_normal(p, rng));
    }
    ChannelRealization { taps }
}

/// Free-space excess loss when the antennas move apart.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationModel {
    /// Each path is scaled by its own free-space law. Tap `b` travels
    /// `d + b·c·T_s`, so reflections lose far less than the direct path.
    #[default]
    PerPath,
    /// Every tap is scaled by `(d_ref/d)²`.
    Uniform,
}

/// Moves the antennas from `ref_distance` to `distance` metres. Tap sample
/// delays stay fixed and δ becomes `distance / c`.
pub fn distance_scaled_profile(
    profile: &CouplingProfile,
    distance: f64,
    ref_distance: f64,
    sample_interval: f64,
    model: PropagationModel,
) -> Result<CouplingProfile> {
    if !(ref_distance > 0.0 && distance >= ref_distance) {
        return Err(invalid(format!(
            "distance {distance} m must be at least the reference {ref_distance} m > 0"
        )));
    }
    let mut out = profile.clone();
    for (p, &b) in out.tap_powers.iter_mut().zip(&profile.tap_delays) {
        let extra = match model {
            PropagationModel::Uniform => 0.0,
            PropagationModel::PerPath => b as f64 * sample_interval * SPEED_OF_LIGHT,
        };
        *p *= ((ref_distance + extra) / (distance + extra)).powi(2);
    }
    out.main_delay = distance / SPEED_OF_LIGHT;
    Ok(out)
}
