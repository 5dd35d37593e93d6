//! Sample-level Monte-Carlo engine.
//!
//! Each trial is one OFDM symbol passed through TX phase noise, the coupling
//! channel after ALC, RX phase noise and DLC. Trial `i` draws from
//! `ChaCha8Rng::seed_from_u64(master_seed)` switched to stream `i`, so any
//! trial can be reproduced on its own and scheduling cannot change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cancellation::{apply_dlc, common_phase_error, estimate_effective_channel};
use crate::coupling::draw_channel;
use crate::error::{invalid, Result};
use crate::ofdm::{demodulate_with, generate_symbol_with, Dft, TimeSymbol};
use crate::phasenoise::build_streams;
use crate::scenario::ScenarioConfig;
use crate::Cf64;

/// `|Y_k|²` before and `|U_k|²` after DLC for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPowers {
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub mean_pre: Vec<f64>,
    pub mean_post: Vec<f64>,
    pub stderr_pre: Vec<f64>,
    pub stderr_post: Vec<f64>,
    /// Mean and standard error of the per-trial active-bin average after DLC.
    pub inband_post: (f64, f64),
    pub inband_pre: (f64, f64),
    pub trials_run: usize,
    pub reference_power: f64,
}

impl McResult {
    /// Inband average after DLC, dB relative to the reference power.
    pub fn inband_post_db(&self) -> f64 {
        crate::to_db(self.inband_post.0 / self.reference_power)
    }

    pub fn inband_pre_db(&self) -> f64 {
        crate::to_db(self.inband_pre.0 / self.reference_power)
    }

    /// Standard error of the inband average after DLC, first-order dB.
    pub fn inband_post_stderr_db(&self) -> f64 {
        stderr_db(self.inband_post.0, self.inband_post.1)
    }
}

/// First-order conversion of a standard error to dB.
pub fn stderr_db(mean: f64, stderr: f64) -> f64 {
    if mean > 0.0 {
        10.0 / std::f64::consts::LN_10 * stderr / mean
    } else {
        0.0
    }
}

/// Σ_b σ_b² before ALC times the mean active-bin power.
pub fn reference_power(cfg: &ScenarioConfig) -> f64 {
    cfg.reference_power()
}

/// Random stream for one trial.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

struct Engine<'a> {
    cfg: &'a ScenarioConfig,
    dft: Dft,
    a_prime: f64,
    sigma_ee2: f64,
    rotations: Vec<Cf64>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let ts = cfg.waveform.sample_interval;
        let omega_c = cfg.waveform.omega_c();
        let delta = cfg.profile.main_delay;
        let rotations = cfg
            .profile
            .tap_delays
            .iter()
            .map(|&b| Cf64::from_polar(1.0, -omega_c * (b as f64 * ts + delta)))
            .collect();
        Ok(Self {
            cfg,
            dft: Dft::new(cfg.waveform.n_subcarriers),
            a_prime: cfg.alc_factor()?,
            sigma_ee2: cfg.est_error_power()?,
            rotations,
        })
    }

    fn run(&self, master_seed: u64, trial_index: u64) -> Result<TrialPowers> {
        let cfg = self.cfg;
        let wf = &cfg.waveform;
        let profile = &cfg.profile;
        let mut rng = trial_rng(master_seed, trial_index);

        let (_, x) = generate_symbol_with(wf, &self.dft, &mut rng)?;
        let len = wf.symbol_len();
        let streams = build_streams(
            &cfg.oscillator_scenario(),
            len,
            profile.max_delay(),
            wf.sample_interval,
            &mut rng,
        )?;
        let mut channel = draw_channel(profile, None, &mut rng);
        channel.apply_alc(self.a_prime, cfg.alc_error_mode(), wf.omega_c())?;

        let effective: Vec<Cf64> =
            channel.taps.iter().zip(&self.rotations).map(|(a, r)| a * r).collect();
        let mut y = vec![Cf64::new(0.0, 0.0); len];
        for (i, &b) in profile.tap_delays.iter().enumerate() {
            let tx_phase = &streams.tx_delayed[b];
            let h = effective[i];
            if h == Cf64::new(0.0, 0.0) {
                continue;
            }
            for n in b..len {
                y[n] += h * x.samples[n - b] * Cf64::from_polar(1.0, tx_phase[n]);
            }
        }
        for (s, &phi) in y.iter_mut().zip(&streams.rx) {
            *s *= Cf64::from_polar(1.0, -phi);
        }
        let y = TimeSymbol { samples: y };

        let cpe = if cfg.cpe_in_estimate {
            common_phase_error(&streams, wf.cp_len..len)
        } else {
            Cf64::new(1.0, 0.0)
        };
        let est = estimate_effective_channel(&channel, &self.rotations, cpe, self.sigma_ee2, &mut rng)?;
        let u = apply_dlc(&y, &x, &est, &profile.tap_delays)?;

        let pre = demodulate_with(&y, wf, &self.dft)?.bins.iter().map(|v| v.norm_sqr()).collect();
        let post = demodulate_with(&u, wf, &self.dft)?.bins.iter().map(|v| v.norm_sqr()).collect();
        Ok(TrialPowers { pre, post })
    }
}

/// Runs trial `trial_index` of the scenario seeded by `cfg.master_seed`.
pub fn run_trial(cfg: &ScenarioConfig, trial_index: u64) -> Result<TrialPowers> {
    Engine::new(cfg)?.run(cfg.master_seed, trial_index)
}

#[derive(Clone)]
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Self { n: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    fn stderr(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.n as f64;
        self.m2.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect()
    }
}

const CHUNK: usize = 256;

fn monte_carlo(cfg: &ScenarioConfig, trials: usize, master_seed: u64, parallel: bool) -> Result<McResult> {
    if trials == 0 {
        return Err(invalid("trials must be at least one"));
    }
    let engine = Engine::new(cfg)?;
    let n = cfg.waveform.n_subcarriers;
    let active = &cfg.waveform.active_set;
    let mut pre = Welford::new(n);
    let mut post = Welford::new(n);
    let mut inband = Welford::new(2);

    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let batch: Vec<Result<TrialPowers>> = if parallel {
            (start..end).into_par_iter().map(|i| engine.run(master_seed, i as u64)).collect()
        } else {
            (start..end).map(|i| engine.run(master_seed, i as u64)).collect()
        };
        for t in batch {
            let t = t?;
            let avg = |v: &[f64]| active.iter().map(|&k| v[k]).sum::<f64>() / active.len() as f64;
            inband.push(&[avg(&t.pre), avg(&t.post)]);
            pre.push(&t.pre);
            post.push(&t.post);
        }
        start = end;
    }

    let inband_se = inband.stderr();
    Ok(McResult {
        stderr_pre: pre.stderr(),
        stderr_post: post.stderr(),
        mean_pre: pre.mean,
        mean_post: post.mean,
        inband_pre: (inband.mean[0], inband_se[0]),
        inband_post: (inband.mean[1], inband_se[1]),
        trials_run: trials,
        reference_power: cfg.reference_power(),
    })
}

/// Averages `trials` trials on the rayon pool. Results are bit-identical to
/// [`run_monte_carlo_serial`].
pub fn run_monte_carlo(cfg: &ScenarioConfig, trials: usize, master_seed: u64) -> Result<McResult> {
    monte_carlo(cfg, trials, master_seed, true)
}

pub fn run_monte_carlo_serial(cfg: &ScenarioConfig, trials: usize, master_seed: u64) -> Result<McResult> {
    monte_carlo(cfg, trials, master_seed, false)
}
