//! Brute-force checks of the closed-form spectra that share no code with the
//! crate's phase-noise generator or DFT.

use std::f64::consts::PI;

use fdpn::analytic::si_power_pre_dlc;
use fdpn::ofdm::OfdmConfig;
use fdpn::phasenoise::{OscillatorKind, OscillatorScenario};
use fdpn::Cf64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const N: usize = 32;

/// Samples one Wiener path (increment variance 4πβΔt) at the given
/// instants, returned in the input order.
fn wiener_at(times: &[f64], beta: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out = vec![0.0; times.len()];
    let mut phase = 0.0;
    let mut last = times[order[0]];
    for &i in &order {
        let dt = times[i] - last;
        let z: f64 = rng.sample(StandardNormal);
        phase += z * (4.0 * PI * beta * dt).sqrt();
        out[i] = phase;
        last = times[i];
    }
    out
}

fn direct_dft(x: &[Cf64]) -> Vec<Cf64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * Cf64::from_polar(1.0, -2.0 * PI * (k * i % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn pre_dlc_matches(kind: OscillatorKind) {
    let ts = 1.0 / 15.36e6;
    let cfg = OfdmConfig::new(N, 10, 4, 15.36e6, 1.875e9).unwrap();
    let beta = 2e4;
    let delta = 0.4 * ts;
    let delays = [0usize, 1, 3];
    let powers = [1.0, 0.3, 0.1];
    let sigma: Vec<f64> = (0..N).map(|k| if cfg.active_set.contains(&k) { 1.0 } else { 0.0 }).collect();

    let trials = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut sum = vec![0.0; N];
    let mut sum2 = vec![0.0; N];
    for _ in 0..trials {
        let bins: Vec<Cf64> = sigma
            .iter()
            .map(|&s| {
                let q = rng.random_range(0..4u8);
                Cf64::from_polar(s, PI / 4.0 + PI / 2.0 * q as f64)
            })
            .collect();
        // Inverse DFT through the forward one: x = conj(DFT(conj(X)))/N.
        let conj: Vec<Cf64> = bins.iter().map(|b| b.conj()).collect();
        let x: Vec<Cf64> = direct_dft(&conj).iter().map(|v| v.conj() / N as f64).collect();
        let taps: Vec<Cf64> = powers
            .iter()
            .map(|&p| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Cf64::new(re, im) * (p / 2.0f64).sqrt()
            })
            .collect();

        let rx_times: Vec<f64> = (0..N).map(|n| n as f64 * ts).collect();
        let tx_times: Vec<f64> = delays
            .iter()
            .flat_map(|&b| (0..N).map(move |n| (n as f64 - b as f64) * ts - delta))
            .collect();
        let (tx, rx) = match kind {
            OscillatorKind::Independent => (wiener_at(&tx_times, beta, &mut rng), wiener_at(&rx_times, beta, &mut rng)),
            OscillatorKind::Common => {
                let all: Vec<f64> = tx_times.iter().chain(&rx_times).copied().collect();
                let p = wiener_at(&all, beta, &mut rng);
                (p[..tx_times.len()].to_vec(), p[tx_times.len()..].to_vec())
            }
        };
        let y: Vec<Cf64> = (0..N)
            .map(|n| {
                delays
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| taps[i] * x[(n + N - b) % N] * Cf64::from_polar(1.0, tx[i * N + n] - rx[n]))
                    .sum()
            })
            .collect();
        for (k, v) in direct_dft(&y).iter().enumerate() {
            let p = v.norm_sqr();
            sum[k] += p;
            sum2[k] += p * p;
        }
    }

    let scenario = OscillatorScenario { kind, beta, tx_rx_delay: delta };
    let closed = si_power_pre_dlc(&cfg, &delays, &powers, &scenario, &sigma).unwrap();
    let t = trials as f64;
    for k in 0..N {
        let mean = sum[k] / t;
        let se = ((sum2[k] / t - mean * mean) / (t - 1.0)).sqrt();
        let err = (mean - closed.values[k]).abs();
        assert!(err <= 4.0 * se + 1e-12, "{kind:?} bin {k}: mc {mean:.6e} ± {se:.2e}, closed {:.6e}", closed.values[k]);
    }
}

#[test]
fn pre_dlc_power_independent_oscillators() {
    pre_dlc_matches(OscillatorKind::Independent);
}

#[test]
fn pre_dlc_power_common_oscillator() {
    pre_dlc_matches(OscillatorKind::Common);
}
