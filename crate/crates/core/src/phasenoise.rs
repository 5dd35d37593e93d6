//! Free-running oscillator phase noise.
//!
//! The phase of a free-running oscillator with 3-dB bandwidth β is a Wiener
//! process: `φ(t) − φ(t + τ) ~ Normal(0, 4πβτ)`, with independent increments
//! over disjoint intervals.
//!
//! A trial needs the transmitter phase at every instant `nT_s − bT_s − δ`
//! (one stream per coupling tap delay `b`) and the receiver phase at `nT_s`.
//! With a shared oscillator both are samples of the same path, so the path
//! is drawn on the merged time grid and both streams are read off it.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Cf64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscillatorKind {
    /// One oscillator drives both up- and downconversion.
    Common,
    /// Transmitter and receiver have unrelated oscillators.
    Independent,
}

impl OscillatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Common => "common",
            Self::Independent => "independent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorScenario {
    pub kind: OscillatorKind,
    /// 3-dB bandwidth in Hz, shared by both oscillators.
    pub beta: f64,
    /// Delay δ from the upconverting to the downconverting mixer, seconds.
    pub tx_rx_delay: f64,
}

impl OscillatorScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(Error::NegativeBeta(self.beta));
        }
        if !(self.tx_rx_delay >= 0.0) {
            return Err(Error::NegativeDuration(self.tx_rx_delay));
        }
        Ok(())
    }
}

/// Phase samples for one symbol.
///
/// `tx_delayed[b][n] = φ_t(nT_s − bT_s − δ)` and `rx[n] = φ_r(nT_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStreams {
    pub tx_delayed: Vec<Vec<f64>>,
    pub rx: Vec<f64>,
}

impl PhaseStreams {
    /// `e^(j(φ_t(nT_s − bT_s − δ) − φ_r(nT_s)))` for one tap.
    pub fn net_rotation(&self, b: usize, n: usize) -> Cf64 {
        Cf64::from_polar(1.0, self.tx_delayed[b][n] - self.rx[n])
    }
}

/// Variance of a Wiener phase increment over `tau` seconds.
pub fn increment_variance(beta: f64, tau: f64) -> f64 {
    4.0 * PI * beta * tau
}

fn draw_increment<R: Rng + ?Sized>(beta: f64, tau: f64, rng: &mut R) -> f64 {
    // Always consume a draw so that different β values see the same stream.
    let z: f64 = rng.sample(StandardNormal);
    let std = increment_variance(beta, tau).sqrt();
    if std == 0.0 {
        0.0
    } else {
        std * z
    }
}

/// Independent zero-mean Normal increments with variance `4πβτ_i`.
pub fn sample_wiener_increments<R: Rng + ?Sized>(
    beta: f64,
    durations: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(beta >= 0.0) {
        return Err(Error::NegativeBeta(beta));
    }
    if let Some(&tau) = durations.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::NegativeDuration(tau));
    }
    Ok(durations.iter().map(|&tau| draw_increment(beta, tau, rng)).collect())
}

/// Wiener path of `len` samples on a uniform grid, starting at zero.
fn uniform_path<R: Rng + ?Sized>(beta: f64, step: f64, len: usize, rng: &mut R) -> Vec<f64> {
    let mut path = Vec::with_capacity(len);
    let mut phase = 0.0;
    for i in 0..len {
        if i > 0 {
            phase += draw_increment(beta, step, rng);
        }
        path.push(phase);
    }
    path
}

/// Splits `delay` into whole samples and a fractional remainder in `[0, ts)`.
fn split_delay(delay: f64, ts: f64) -> (usize, f64) {
    let whole = (delay / ts).floor();
    let mut samples = whole as usize;
    let mut frac = delay - whole * ts;
    let eps = 1e-12 * ts;
    if frac <= eps {
        frac = 0.0;
    } else if ts - frac <= eps {
        samples += 1;
        frac = 0.0;
    }
    (samples, frac)
}

/// Builds the TX and RX phase streams for `n` samples and tap delays
/// `0..=max_delay`.
///
/// The phase at the earliest required instant is zero. For a common
/// oscillator with `δ = D·T_s + f`, the path is drawn in time order on the
/// grid `{mT_s − f} ∪ {mT_s}`, with alternating increments of `f` and
/// `T_s − f`; when `f = 0` the grid collapses to `{mT_s}`.
pub fn build_streams<R: Rng + ?Sized>(
    scenario: &OscillatorScenario,
    n: usize,
    max_delay: usize,
    ts: f64,
    rng: &mut R,
) -> Result<PhaseStreams> {
    scenario.validate()?;
    if n == 0 {
        return Err(invalid("phase streams need at least one sample"));
    }
    if !(ts > 0.0) {
        return Err(invalid("sample interval must be positive"));
    }
    let beta = scenario.beta;

    let (tx_path, rx, tx_offset) = match scenario.kind {
        OscillatorKind::Independent => {
            // tx_path[i] is the phase at (i − P)·T_s − δ.
            let tx_path = uniform_path(beta, ts, n + max_delay, rng);
            let rx = uniform_path(beta, ts, n, rng);
            (tx_path, rx, max_delay)
        }
        OscillatorKind::Common => {
            let (whole, frac) = split_delay(scenario.tx_rx_delay, ts);
            // Grid index i ↔ m = i − (P + D); the TX instant for tap b and
            // sample n has m = n − b − D, i.e. index n − b + P.
            let lead = max_delay + whole;
            let len = n + lead;
            if frac == 0.0 {
                let path = uniform_path(beta, ts, len, rng);
                let rx = path[lead..].to_vec();
                (path, rx, max_delay)
            } else {
                let mut tx_path = Vec::with_capacity(len);
                let mut rx_path = Vec::with_capacity(len);
                let mut phase = 0.0;
                for i in 0..len {
                    if i > 0 {
                        phase += draw_increment(beta, ts - frac, rng);
                    }
                    tx_path.push(phase);
                    phase += draw_increment(beta, frac, rng);
                    rx_path.push(phase);
                }
                let rx = rx_path[lead..].to_vec();
                (tx_path, rx, max_delay)
            }
        }
    };

    let tx_delayed = (0..=max_delay)
        .map(|b| tx_path[tx_offset - b..tx_offset - b + n].to_vec())
        .collect();
    Ok(PhaseStreams { tx_delayed, rx })
}

/// Subtracts the circular-mean angle of `e^(jφ)` over the block.
pub fn remove_cpe(phases: &[f64]) -> Vec<f64> {
    let mean: Cf64 = phases.iter().map(|&p| Cf64::from_polar(1.0, p)).sum();
    let cpe = mean.arg();
    phases.iter().map(|p| p - cpe).collect()
}

/// Writes a phase trajectory as `sample_index,phase_rad` rows.
pub fn write_phase_csv<W: Write>(phases: &[f64], out: &mut W) -> Result<()> {
    writeln!(out, "sample_index,phase_rad")?;
    for (i, p) in phases.iter().enumerate() {
        writeln!(out, "{i},{p:.16e}")?;
    }
    Ok(())
}
