//! Closed-form subcarrier-wise SI power with Wiener phase noise.
//!
//! Everything reduces to the lag kernel `K(m) = E[e^(j(θ(n) − θ(n+m)))]` of
//! the net phase `θ(n) = φ_t(nT_s − bT_s − δ) − φ_r(nT_s)` seen by a path of
//! delay `bT_s + δ`:
//!
//! * independent oscillators: the two phase differences are independent,
//!   each of variance `4πβ·mT_s`, so `K(m) = e^(−4πβ·mT_s)`;
//! * common oscillator: the TX and RX increments cover the same interval
//!   shifted by `D = bT_s + δ`. They are disjoint while `mT_s ≤ D` and the
//!   overlap cancels otherwise, giving `K(m) = e^(−4πβ·min(mT_s, D))`.
//!
//! The expected power of the mixing function `J_k(b, δ)` at offset `k` is
//! then `S[k] = (1/N²)·[N + Σ_{m=1}^{N−1} 2(N−m)·K(m)·cos(2πkm/N)]`, and the
//! SI power at subcarrier `k` is the circular convolution of the subcarrier
//! powers with `Σ_b σ_b²·S_b`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;
use crate::phasenoise::{OscillatorKind, OscillatorScenario};
use crate::scenario::ScenarioConfig;
use crate::to_db;

/// Round-off guard for negative spectrum values.
const NEGATIVE_CLAMP: f64 = 1e-15;

fn independent_exponent(m: usize, beta: f64, ts: f64) -> f64 {
    -4.0 * PI * beta * m as f64 * ts
}

fn common_exponent(m: usize, b: usize, beta: f64, ts: f64, delta: f64) -> f64 {
    let lag = m as f64 * ts;
    let path = b as f64 * ts + delta;
    -4.0 * PI * beta * lag.min(path)
}

/// `e^(−4πβ·mT_s)`.
pub fn kernel_independent(m: usize, beta: f64, ts: f64) -> f64 {
    independent_exponent(m, beta, ts).exp()
}

/// `e^(−4πβ·min(mT_s, bT_s + δ))`.
pub fn kernel_common(m: usize, b: usize, beta: f64, ts: f64, delta: f64) -> f64 {
    common_exponent(m, b, beta, ts, delta).exp()
}

/// `E[|J_m(b, δ)|²]` for every circular offset `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpectrum {
    pub values: Vec<f64>,
    pub tap_delay: usize,
    pub scenario: OscillatorScenario,
}

fn cos_table(n: usize) -> Vec<f64> {
    (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect()
}

/// Spectrum of a lag kernel given `K(m) − 1` for `m = 1..N`.
///
/// Written around the β = 0 delta so that round-off scales with the
/// deviation from it: `S[k] = δ_k + (1/N²)·Σ 2(N−m)(K(m) − 1)cos(2πkm/N)`.
fn spectrum_from_deviation(deviation: impl Fn(usize) -> f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "kernel spectrum needs N >= 2");
    let nf = n as f64;
    let weights: Vec<f64> = (1..n).map(|m| 2.0 * (nf - m as f64) * deviation(m)).collect();
    let cos = cos_table(n);
    let mut values = vec![0.0; n];
    for k in 0..=n / 2 {
        let mut acc = 0.0;
        let mut idx = 0;
        for w in &weights {
            idx += k;
            if idx >= n {
                idx -= n;
            }
            acc += w * cos[idx];
        }
        let mut v = acc / (nf * nf);
        if k == 0 {
            v += 1.0;
        }
        if v < 0.0 && v > -NEGATIVE_CLAMP {
            v = 0.0;
        }
        values[k] = v;
        values[(n - k) % n] = v;
    }
    values
}

/// Spectrum of an arbitrary real even lag kernel with `K(0) = 1`.
pub fn kernel_spectrum(kernel: impl Fn(usize) -> f64, n: usize) -> Vec<f64> {
    spectrum_from_deviation(|m| kernel(m) - 1.0, n)
}

/// Kernel spectrum for one coupling tap of delay `b` samples.
pub fn tap_kernel_spectrum(
    scenario: &OscillatorScenario,
    b: usize,
    ts: f64,
    n: usize,
) -> KernelSpectrum {
    let beta = scenario.beta;
    let delta = scenario.tx_rx_delay;
    let values = match scenario.kind {
        OscillatorKind::Independent => {
            spectrum_from_deviation(|m| independent_exponent(m, beta, ts).exp_m1(), n)
        }
        OscillatorKind::Common => {
            spectrum_from_deviation(|m| common_exponent(m, b, beta, ts, delta).exp_m1(), n)
        }
    };
    KernelSpectrum { values, tap_delay: b, scenario: *scenario }
}

/// Per-subcarrier power with the normalization used for the dB view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub values: Vec<f64>,
    pub reference_power: f64,
}

impl PowerSpectrum {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, reference_power: 1.0 }
    }

    pub fn with_reference(mut self, reference_power: f64) -> Self {
        self.reference_power = reference_power;
        self
    }

    /// `10·log10(value / reference)` per subcarrier.
    pub fn db(&self) -> Vec<f64> {
        self.values.iter().map(|v| to_db(v / self.reference_power)).collect()
    }
}

/// Mean over `active_set`, relative to the reference, in dB.
pub fn inband_average(spec: &PowerSpectrum, active_set: &[usize]) -> Result<f64> {
    if active_set.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let mean = active_set.iter().map(|&k| spec.values[k]).sum::<f64>() / active_set.len() as f64;
    Ok(to_db(mean / spec.reference_power))
}

fn check_inputs(cfg: &OfdmConfig, delays: &[usize], powers: &[f64], sigma_l2: &[f64]) -> Result<()> {
    if delays.len() != powers.len() {
        return Err(Error::LengthMismatch { expected: delays.len(), got: powers.len() });
    }
    if sigma_l2.len() != cfg.n_subcarriers {
        return Err(Error::LengthMismatch { expected: cfg.n_subcarriers, got: sigma_l2.len() });
    }
    Ok(())
}

/// `Σ_b σ_b²·S_b[m]` and `Σ_b S_b[0]`.
fn combined_kernel(
    cfg: &OfdmConfig,
    delays: &[usize],
    powers: &[f64],
    scenario: &OscillatorScenario,
) -> (Vec<f64>, f64) {
    let n = cfg.n_subcarriers;
    let mut total = vec![0.0; n];
    let mut centre_sum = 0.0;
    for (&b, &p) in delays.iter().zip(powers) {
        let s = tap_kernel_spectrum(scenario, b, cfg.sample_interval, n);
        centre_sum += s.values[0];
        if p != 0.0 {
            total.iter_mut().zip(&s.values).for_each(|(t, v)| *t += p * v);
        }
    }
    (total, centre_sum)
}

/// `out[k] = Σ_l σ_l²·kernel[(k − l) mod N]`, optionally leaving out `l = k`.
fn circular_convolve(sigma_l2: &[f64], kernel: &[f64], skip_diagonal: bool) -> Vec<f64> {
    let n = kernel.len();
    let sources: Vec<(usize, f64)> =
        sigma_l2.iter().copied().enumerate().filter(|(_, s)| *s != 0.0).collect();
    (0..n)
        .map(|k| {
            sources
                .iter()
                .filter(|(l, _)| !(skip_diagonal && *l == k))
                .map(|&(l, s)| s * kernel[(k + n - l) % n])
                .sum()
        })
        .collect()
}

/// `E[|Y_k|²]` before digital cancellation, for tap powers already
/// including separation and ALC.
pub fn si_power_pre_dlc(
    cfg: &OfdmConfig,
    tap_delays: &[usize],
    tap_powers: &[f64],
    scenario: &OscillatorScenario,
    sigma_l2: &[f64],
) -> Result<PowerSpectrum> {
    check_inputs(cfg, tap_delays, tap_powers, sigma_l2)?;
    let (kernel, _) = combined_kernel(cfg, tap_delays, tap_powers, scenario);
    Ok(PowerSpectrum::new(circular_convolve(sigma_l2, &kernel, false)))
}

/// `E[|U_k|²]` after digital cancellation. The ICI terms `l ≠ k` keep the
/// true tap powers; the `l = k` term is reduced to the estimation error,
/// `σ_ee²·σ_k²·S_b[0]` on each of the taps.
pub fn si_power_post_dlc(
    cfg: &OfdmConfig,
    tap_delays: &[usize],
    tap_powers: &[f64],
    scenario: &OscillatorScenario,
    sigma_l2: &[f64],
    sigma_ee2: f64,
) -> Result<PowerSpectrum> {
    check_inputs(cfg, tap_delays, tap_powers, sigma_l2)?;
    let (kernel, centre_sum) = combined_kernel(cfg, tap_delays, tap_powers, scenario);
    let mut values = circular_convolve(sigma_l2, &kernel, true);
    for (v, s) in values.iter_mut().zip(sigma_l2) {
        *v += sigma_ee2 * s * centre_sum;
    }
    Ok(PowerSpectrum::new(values))
}

/// Closed-form spectra for a full scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub pre_dlc: PowerSpectrum,
    pub post_dlc: PowerSpectrum,
}

impl Prediction {
    pub fn inband_post_db(&self, active_set: &[usize]) -> Result<f64> {
        inband_average(&self.post_dlc, active_set)
    }
}

pub fn predict(cfg: &ScenarioConfig) -> Result<Prediction> {
    cfg.validate()?;
    let reference = cfg.reference_power();
    let powers = cfg.post_alc_powers()?;
    let sigma_l2 = cfg.waveform.subcarrier_powers();
    let scenario = cfg.oscillator_scenario();
    let delays = &cfg.profile.tap_delays;
    let pre = si_power_pre_dlc(&cfg.waveform, delays, &powers, &scenario, &sigma_l2)?;
    let post = si_power_post_dlc(
        &cfg.waveform,
        delays,
        &powers,
        &scenario,
        &sigma_l2,
        cfg.est_error_power()?,
    )?;
    Ok(Prediction {
        pre_dlc: pre.with_reference(reference),
        post_dlc: post.with_reference(reference),
    })
}
