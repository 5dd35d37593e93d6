//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use fdpn::analytic::{predict, tap_kernel_spectrum};
use fdpn::coupling::{feasibility_bounds, CouplingProfile};
use fdpn::experiments::{preset, run_sweep, SweepResult, Variant};
use fdpn::phasenoise::{OscillatorKind, OscillatorScenario};
use fdpn::scenario::{Preset, ScenarioConfig};
use fdpn::simulator::run_monte_carlo;
use fdpn::{to_db, Cf64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const TS: f64 = 1.0 / 15.36e6;
const DELTA: f64 = 6.6713e-10;
const TRIALS: usize = 1000;
const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn analytic_db(preset: Preset, kind: OscillatorKind, beta: f64) -> f64 {
    let cfg = ScenarioConfig::preset(preset, kind, beta);
    predict(&cfg).unwrap().inband_post_db(&cfg.waveform.active_set).unwrap()
}

fn series(result: &SweepResult, preset: Preset, oscillator: OscillatorKind) -> Vec<(f64, f64)> {
    let v = Variant { preset, oscillator };
    result
        .rows
        .iter()
        .filter(|r| r.variant == v)
        .map(|r| (r.axis_value, r.analytic_inband_db.expect("feasible row")))
        .collect()
}

fn non_decreasing(values: &[(f64, f64)]) -> bool {
    values.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9)
}

fn c1_kernel_unit_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let beta = rng.random_range(0.0..=1e4);
        let b = rng.random_range(0..=8usize);
        let delta = rng.random_range(0.0..=2.0 * TS);
        for kind in [OscillatorKind::Common, OscillatorKind::Independent] {
            let s = tap_kernel_spectrum(&OscillatorScenario { kind, beta, tx_rx_delay: delta }, b, TS, 1024);
            worst = worst.max((s.values.iter().sum::<f64>() - 1.0).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |sum - 1| = {worst:.2e} over 100 triples x 2 kinds"))
}

/// One Wiener path sampled at arbitrary instants, increments of variance
/// 4πβΔt between consecutive sorted instants.
fn wiener_at(times: &[f64], beta: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out = vec![0.0; times.len()];
    let (mut phase, mut last) = (0.0, times[order[0]]);
    for &i in &order {
        let z: f64 = rng.sample(StandardNormal);
        phase += z * (4.0 * PI * beta * (times[i] - last)).sqrt();
        out[i] = phase;
        last = times[i];
    }
    out
}

fn c2_wiener_oracle() -> Outcome {
    const N: usize = 64;
    const PATHS: usize = 50_000;
    let beta = 50.0;
    let twiddle: Vec<Cf64> =
        (0..N * N).map(|i| Cf64::from_polar(1.0, -2.0 * PI * ((i / N) * (i % N) % N) as f64 / N as f64)).collect();
    let mut cases = Vec::new();
    for kind in [OscillatorKind::Common, OscillatorKind::Independent] {
        for b in [0usize, 1, 4] {
            for delta in [0.0, DELTA, TS] {
                cases.push((kind, b, delta));
            }
        }
    }
    let results: Vec<Vec<String>> = cases
        .par_iter()
        .enumerate()
        .map(|(ci, &(kind, b, delta))| {
            let closed = tap_kernel_spectrum(&OscillatorScenario { kind, beta, tx_rx_delay: delta }, b, TS, N);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            rng.set_stream(ci as u64);
            let rx_t: Vec<f64> = (0..N).map(|n| n as f64 * TS).collect();
            let tx_t: Vec<f64> = (0..N).map(|n| (n as f64 - b as f64) * TS - delta).collect();
            // Deviations from the closed form keep the variance accurate
            // when |J_0|² sits within 1e-7 of one.
            let mut sum = vec![0.0; N];
            let mut sum2 = vec![0.0; N];
            for _ in 0..PATHS {
                let (tx, rx) = match kind {
                    OscillatorKind::Independent => (wiener_at(&tx_t, beta, &mut rng), wiener_at(&rx_t, beta, &mut rng)),
                    OscillatorKind::Common => {
                        let all: Vec<f64> = tx_t.iter().chain(&rx_t).copied().collect();
                        let p = wiener_at(&all, beta, &mut rng);
                        (p[..N].to_vec(), p[N..].to_vec())
                    }
                };
                let e: Vec<Cf64> = (0..N).map(|n| Cf64::from_polar(1.0, tx[n] - rx[n])).collect();
                for m in 0..N {
                    let j: Cf64 = e.iter().zip(&twiddle[m * N..(m + 1) * N]).map(|(a, w)| a * w).sum::<Cf64>() / N as f64;
                    let d = j.norm_sqr() - closed.values[m];
                    sum[m] += d;
                    sum2[m] += d * d;
                }
            }
            let t = PATHS as f64;
            (0..N)
                .filter_map(|m| {
                    let bias = sum[m] / t;
                    let se = ((sum2[m] / t - bias * bias).max(0.0) / (t - 1.0)).sqrt();
                    (bias.abs() > 3.0 * se + 1e-15).then(|| {
                        format!("{} b={b} delta={delta:.4e} bin {m}: {:+.2} se", kind.as_str(), bias / se)
                    })
                })
                .collect()
        })
        .collect();
    let misses: Vec<String> = results.into_iter().flatten().collect();
    let bins = cases.len() * N;
    outcome(
        misses.is_empty(),
        format!(
            "{} of {bins} bins outside 3 se (about {:.1} expected by chance) {}",
            misses.len(),
            bins as f64 * 0.0027,
            misses.join(", ")
        ),
    )
}

fn c3_zero_phase_noise() -> Outcome {
    let cfg = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 0.0);
    let ana = predict(&cfg).unwrap().inband_post_db(&cfg.waveform.active_set).unwrap();
    let sim = run_monte_carlo(&cfg, TRIALS, SEED).unwrap().inband_post_db();
    outcome(
        (ana + 80.0).abs() <= 1e-9 && (sim + 80.0).abs() <= 0.2,
        format!("analytic {ana:.12} dB, simulated {sim:.3} dB"),
    )
}

fn c4_practical_spectra() -> Outcome {
    let start = Instant::now();
    let res = run_sweep(&preset("fig3").unwrap(), TRIALS, SEED).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut pass = elapsed <= 60.0;
    let mut parts = Vec::new();
    for row in &res.rows {
        let (lo, hi) = match row.variant.oscillator {
            OscillatorKind::Common => (-76.5, -74.5),
            OscillatorKind::Independent => (-49.5, -46.5),
        };
        let (a, s) = (row.analytic_inband_db.unwrap(), row.sim_inband_db.unwrap());
        pass &= (lo..=hi).contains(&a) && (lo..=hi).contains(&s);
        parts.push(format!("{} analytic {a:.2} sim {s:.2}", row.variant.oscillator.as_str()));
    }
    for t in &res.spectra {
        let sim = t.sim_mean_db.as_ref().unwrap();
        let worst = t.active_set.iter().map(|&k| (sim[k] - t.analytic_db[k]).abs()).fold(0.0, f64::max);
        pass &= worst <= 0.75;
        parts.push(format!("{} max bin delta {worst:.3} dB", t.label));
    }
    parts.push(format!("{elapsed:.1} s"));
    outcome(pass, parts.join("; "))
}

fn c5_ideal_common() -> Outcome {
    let cfg = ScenarioConfig::preset(Preset::Ideal, OscillatorKind::Common, 50.0);
    let ana = predict(&cfg).unwrap().inband_post_db(&cfg.waveform.active_set).unwrap();
    let sim = run_monte_carlo(&cfg, TRIALS, SEED).unwrap().inband_post_db();
    outcome(
        (ana + 77.0).abs() <= 1.5 && (sim + 77.0).abs() <= 1.5,
        format!("analytic {ana:.2} dB, simulated {sim:.2} dB"),
    )
}

fn c6_max_alc() -> Outcome {
    let (_, a_min) = feasibility_bounds(&CouplingProfile::canonical());
    let db = -to_db(a_min);
    outcome((db - 33.5).abs() <= 0.1, format!("{db:.3} dB"))
}

fn c7_delay_sweep(fig9: &SweepResult) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (preset, target) in [(Preset::Practical, -48.6), (Preset::Ideal, -52.1)] {
        let ind = series(fig9, preset, OscillatorKind::Independent);
        let lo = ind.iter().map(|p| p.1).fold(f64::MAX, f64::min);
        let hi = ind.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let com = series(fig9, preset, OscillatorKind::Common);
        let mono = non_decreasing(&com);
        pass &= (lo - target).abs() <= 1.0 && (hi - target).abs() <= 1.0 && hi - lo < 0.1 && mono;
        parts.push(format!(
            "{} independent {lo:.2}..{hi:.2} dB (spread {:.4}), common {:.2}->{:.2} dB monotone={mono}",
            preset.as_str(),
            hi - lo,
            com[0].1,
            com.last().unwrap().1
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c8_bandwidth_anchors(fig5: &SweepResult) -> Outcome {
    let ind_1hz = analytic_db(Preset::Practical, OscillatorKind::Independent, 1.0);
    let com_1khz = analytic_db(Preset::Practical, OscillatorKind::Common, 1e3);
    let ind_mono = non_decreasing(&series(fig5, Preset::Practical, OscillatorKind::Independent));
    let com_mono = non_decreasing(&series(fig5, Preset::Practical, OscillatorKind::Common));
    let a = ind_1hz >= -65.0;
    let b = (com_1khz + 65.0).abs() <= 1.5;
    outcome(
        a && b && ind_mono && com_mono,
        format!(
            "independent at 1 Hz {ind_1hz:.2} dB (>= -65: {a}); common at 1 kHz {com_1khz:.2} dB (-65 +/- 1.5: {b}); \
             monotone independent={ind_mono} common={com_mono}"
        ),
    )
}

fn c9_ordering(sweeps: &[&SweepResult]) -> Outcome {
    let mut checked = 0;
    let mut violations = Vec::new();
    for res in sweeps {
        for preset in [Preset::Practical, Preset::Ideal] {
            let com = series(res, preset, OscillatorKind::Common);
            let ind = series(res, preset, OscillatorKind::Independent);
            for (c, i) in com.iter().zip(&ind) {
                checked += 1;
                if c.1 > i.1 + 1e-9 {
                    violations.push(format!("{} at {}: {:.3} > {:.3}", preset.as_str(), c.0, c.1, i.1));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{checked} point pairs, {} violations {}", violations.len(), violations.join(", ")),
    )
}

fn c10_grid_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for preset in [Preset::Practical, Preset::Ideal] {
        for kind in [OscillatorKind::Common, OscillatorKind::Independent] {
            for beta in [5.0, 50.0, 500.0] {
                let cfg = ScenarioConfig::preset(preset, kind, beta);
                let ana = predict(&cfg).unwrap().inband_post_db(&cfg.waveform.active_set).unwrap();
                let sim = run_monte_carlo(&cfg, TRIALS, SEED).unwrap().inband_post_db();
                let d = sim - ana;
                worst = worst.max(d.abs());
                parts.push(format!("{}/{}/{beta}: {d:+.3}", preset.as_str(), kind.as_str()));
            }
        }
    }
    outcome(worst <= 0.3, format!("max |delta| {worst:.3} dB [{}]", parts.join(" ")))
}

fn c11_distance() -> Outcome {
    let res = run_sweep(&preset("fig10").unwrap(), 0, SEED).unwrap();
    let total = |kind, first: bool| {
        let rows: Vec<_> = res.rows.iter().filter(|r| r.variant.oscillator == kind).collect();
        let row = if first { rows[0] } else { rows[rows.len() - 1] };
        row.total_suppression_db().unwrap()
    };
    let vals = [
        (total(OscillatorKind::Common, true), 108.0),
        (total(OscillatorKind::Independent, true), 82.0),
        (total(OscillatorKind::Common, false), 110.0),
        (total(OscillatorKind::Independent, false), 88.0),
    ];
    outcome(
        vals.iter().all(|(v, t)| (v - t).abs() <= 2.0),
        format!(
            "0.2 m: common {:.1} independent {:.1} dB; 20 m: common {:.1} independent {:.1} dB",
            vals[0].0, vals[1].0, vals[2].0, vals[3].0
        ),
    )
}

fn c12_cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        std::fs::create_dir(&out_dir).unwrap();
        let out = out_dir.join("fig3.csv");
        let status = Command::new(env!("CARGO_BIN_EXE_fdpn"))
            .args(["figure", "fig3", "--trials", "64", "--seed", "17", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let mut names: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        names.into_iter().map(|n| (n.clone(), std::fs::read(out_dir.join(n)).unwrap())).collect::<Vec<_>>()
    };
    let a = run("a");
    let b = run("b");
    outcome(a == b && a.len() == 3, format!("{} files per run, identical={}", a.len(), a == b))
}

fn main() -> ExitCode {
    let fig5 = run_sweep(&preset("fig5").unwrap(), 0, SEED).unwrap();
    let fig9 = run_sweep(&preset("fig9").unwrap(), 0, SEED).unwrap();
    let fig3 = run_sweep(&preset("fig3").unwrap(), 0, SEED).unwrap();
    let fig4 = run_sweep(&preset("fig4").unwrap(), 0, SEED).unwrap();

    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("kernel unit sum", Box::new(c1_kernel_unit_sum)),
        ("Wiener path oracle for kernel spectra", Box::new(c2_wiener_oracle)),
        ("zero phase noise anchor at -80 dB", Box::new(c3_zero_phase_noise)),
        ("practical spectra at 50 Hz", Box::new(c4_practical_spectra)),
        ("ideal preset, common oscillator", Box::new(c5_ideal_common)),
        ("maximum attainable ALC", Box::new(c6_max_alc)),
        ("TX-RX delay sweep", Box::new(|| c7_delay_sweep(&fig9))),
        ("bandwidth sweep anchors", Box::new(|| c8_bandwidth_anchors(&fig5))),
        ("common never worse than independent", Box::new(|| c9_ordering(&[&fig3, &fig4, &fig5, &fig9]))),
        ("closed form vs Monte-Carlo grid", Box::new(c10_grid_agreement)),
        ("antenna distance totals", Box::new(c11_distance)),
        ("CLI determinism", Box::new(c12_cli_determinism)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} ({:.1} s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
