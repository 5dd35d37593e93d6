//! OFDM baseband waveform: numerology, 16QAM symbol generation, cyclic
//! prefix handling and the DFT pair used throughout the crate.
//!
//! DFT convention: the forward transform is unscaled,
//! `X[k] = Σ_n x[n]·e^(−j2πkn/N)`, and the inverse carries the `1/N`. A
//! subcarrier of unit power at the transmitter therefore shows up with unit
//! power at the receiver FFT output.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Cf64;

/// Subcarrier constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qam16,
}

/// Waveform numerology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    /// Active subcarrier indices in `[0, N)`.
    pub active_set: Vec<usize>,
    pub cp_len: usize,
    /// Sampling interval in seconds.
    pub sample_interval: f64,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing: f64,
    /// RF carrier frequency in Hz.
    pub carrier_freq: f64,
    pub modulation: Modulation,
}

impl OfdmConfig {
    /// Builds a configuration with `active_per_side` subcarriers on each side
    /// of DC (indices `1..=k` and `N−k..N`).
    pub fn new(
        n_subcarriers: usize,
        active_per_side: usize,
        cp_len: usize,
        sample_rate_hz: f64,
        carrier_hz: f64,
    ) -> Result<Self> {
        if n_subcarriers == 0 || 2 * active_per_side >= n_subcarriers {
            return Err(invalid(format!(
                "{active_per_side} active subcarriers per side do not fit in N = {n_subcarriers}"
            )));
        }
        let active_set = (1..=active_per_side)
            .chain(n_subcarriers - active_per_side..n_subcarriers)
            .collect();
        let cfg = Self {
            n_subcarriers,
            active_set,
            cp_len,
            sample_interval: 1.0 / sample_rate_hz,
            subcarrier_spacing: sample_rate_hz / n_subcarriers as f64,
            carrier_freq: carrier_hz,
            modulation: Modulation::Qam16,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// LTE-like 10 MHz downlink numerology: N = 1024, 600 active
    /// subcarriers, 63-sample CP, 15.36 MHz sampling, 1.875 GHz carrier.
    pub fn lte_like() -> Self {
        Self::new(1024, 300, 63, 15.36e6, 1.875e9).expect("canonical waveform is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_subcarriers;
        if n < 2 {
            return Err(invalid("need at least two subcarriers"));
        }
        if self.cp_len >= n {
            return Err(invalid(format!("cp_len {} must be below N = {n}", self.cp_len)));
        }
        if !(self.sample_interval > 0.0 && self.subcarrier_spacing > 0.0) {
            return Err(invalid("sample interval and subcarrier spacing must be positive"));
        }
        let product = self.sample_interval * self.subcarrier_spacing * n as f64;
        if (product - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("T_s·Δf·N = {product}, expected 1")));
        }
        if self.carrier_freq < 0.0 {
            return Err(invalid("carrier frequency must be non-negative"));
        }
        let mut seen = vec![false; n];
        for &k in &self.active_set {
            if k == 0 {
                return Err(invalid("DC subcarrier cannot be active"));
            }
            if k >= n {
                return Err(invalid(format!("active index {k} out of range")));
            }
            if seen[k] {
                return Err(invalid(format!("active index {k} listed twice")));
            }
            seen[k] = true;
        }
        if self.active_set.iter().any(|&k| !seen[n - k]) {
            return Err(invalid("active set must be symmetric about DC"));
        }
        Ok(())
    }

    /// Samples per symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.sample_interval
    }

    /// Angular carrier frequency ω_c.
    pub fn omega_c(&self) -> f64 {
        2.0 * PI * self.carrier_freq
    }

    pub fn active_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_subcarriers];
        for &k in &self.active_set {
            mask[k] = true;
        }
        mask
    }

    /// Per-subcarrier transmit power σ_k²: one on active bins, zero elsewhere.
    pub fn subcarrier_powers(&self) -> Vec<f64> {
        self.active_mask()
            .into_iter()
            .map(|a| if a { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Frequency-domain OFDM symbol, one complex value per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSymbol {
    pub bins: Vec<Cf64>,
}

/// Time-domain OFDM symbol with its cyclic prefix, `N + cp_len` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSymbol {
    pub samples: Vec<Cf64>,
}

impl TimeSymbol {
    /// The `N` samples after the cyclic prefix.
    pub fn body(&self, cp_len: usize) -> &[Cf64] {
        &self.samples[cp_len..]
    }
}

/// Gray-coded 16QAM level per 2-bit rail value, unit average symbol power.
const QAM16_LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

fn qam16_point(bits: u8) -> Cf64 {
    let scale = 1.0 / 10f64.sqrt();
    let i = QAM16_LEVELS[(bits & 0b11) as usize];
    let q = QAM16_LEVELS[((bits >> 2) & 0b11) as usize];
    Cf64::new(i * scale, q * scale)
}

/// Planned forward/inverse transform pair for a fixed size.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, block: &[Cf64]) -> Result<Vec<Cf64>> {
        self.check(block.len())?;
        let mut out = block.to_vec();
        self.forward.process(&mut out);
        Ok(out)
    }

    pub fn inverse(&self, bins: &[Cf64]) -> Result<Vec<Cf64>> {
        self.check(bins.len())?;
        let mut out = bins.to_vec();
        self.inverse.process(&mut out);
        let scale = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: len });
        }
        Ok(())
    }
}

/// Unscaled forward DFT of the whole block.
pub fn dft(block: &[Cf64]) -> Result<Vec<Cf64>> {
    Dft::new(block.len()).forward(block)
}

/// Inverse DFT scaled by `1/N`.
pub fn idft(bins: &[Cf64]) -> Result<Vec<Cf64>> {
    Dft::new(bins.len()).inverse(bins)
}

/// Prepends the last `cp_len` samples of `body`.
pub fn add_cyclic_prefix(body: &[Cf64], cp_len: usize) -> TimeSymbol {
    let n = body.len();
    let mut samples = Vec::with_capacity(n + cp_len);
    samples.extend_from_slice(&body[n - cp_len..]);
    samples.extend_from_slice(body);
    TimeSymbol { samples }
}

/// Draws one symbol of uniform 16QAM data on the active subcarriers.
pub fn generate_symbol<R: Rng + ?Sized>(
    cfg: &OfdmConfig,
    rng: &mut R,
) -> Result<(FreqSymbol, TimeSymbol)> {
    cfg.validate()?;
    generate_symbol_with(cfg, &Dft::new(cfg.n_subcarriers), rng)
}

/// As [`generate_symbol`], reusing a planned transform. The configuration
/// is assumed valid.
pub(crate) fn generate_symbol_with<R: Rng + ?Sized>(
    cfg: &OfdmConfig,
    dft: &Dft,
    rng: &mut R,
) -> Result<(FreqSymbol, TimeSymbol)> {
    let mut bins = vec![Cf64::new(0.0, 0.0); cfg.n_subcarriers];
    for &k in &cfg.active_set {
        bins[k] = match cfg.modulation {
            Modulation::Qam16 => qam16_point(rng.random_range(0..16u8)),
        };
    }
    let body = dft.inverse(&bins)?;
    Ok((FreqSymbol { bins }, add_cyclic_prefix(&body, cfg.cp_len)))
}

/// Strips the cyclic prefix and transforms the body.
pub fn demodulate(time: &TimeSymbol, cfg: &OfdmConfig) -> Result<FreqSymbol> {
    demodulate_with(time, cfg, &Dft::new(cfg.n_subcarriers))
}

pub(crate) fn demodulate_with(time: &TimeSymbol, cfg: &OfdmConfig, dft: &Dft) -> Result<FreqSymbol> {
    if time.samples.len() != cfg.symbol_len() {
        return Err(Error::LengthMismatch {
            expected: cfg.symbol_len(),
            got: time.samples.len(),
        });
    }
    Ok(FreqSymbol { bins: dft.forward(time.body(cfg.cp_len))? })
}
