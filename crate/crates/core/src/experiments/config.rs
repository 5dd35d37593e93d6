//! JSON scenario files for `fdpn run`.
//!
//! ```json
//! {
//!   "waveform": {"n_subcarriers": 1024, "active_per_side": 300, "cp_len": 63,
//!                "sample_rate_hz": 15.36e6, "carrier_hz": 1.875e9},
//!   "channel": {"delays_samples": [0, 1, 2, 4], "powers_db": [-30, -65, -70, -75],
//!               "separation_db": 30, "main_delay_s": 6.6713e-10},
//!   "oscillator": {"kind": "common", "beta_hz": 50},
//!   "alc": {"db": 30, "error_mode": "pure_amplitude"},
//!   "dlc": 50,
//!   "sim": {"trials": 1000, "seed": 1}
//! }
//! ```
//!
//! `alc` and `dlc` also accept the string `"ideal"`, and `alc` a bare dB
//! number.

use std::path::Path;

use serde::Deserialize;

use crate::cancellation::DlcMode;
use crate::coupling::{AlcErrorMode, CouplingProfile};
use crate::error::Result;
use crate::from_db;
use crate::ofdm::OfdmConfig;
use crate::phasenoise::OscillatorKind;
use crate::scenario::{AlcSetting, ScenarioConfig};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    waveform: WaveformJson,
    channel: ChannelJson,
    oscillator: OscillatorJson,
    alc: AlcJson,
    dlc: DlcJson,
    sim: SimJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveformJson {
    n_subcarriers: usize,
    active_per_side: usize,
    cp_len: usize,
    sample_rate_hz: f64,
    carrier_hz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    delays_samples: Vec<usize>,
    powers_db: Vec<f64>,
    separation_db: f64,
    main_delay_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OscillatorJson {
    kind: OscillatorKind,
    beta_hz: f64,
}

#[derive(Deserialize)]
enum IdealTag {
    #[serde(rename = "ideal")]
    Ideal,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlcDbJson {
    db: f64,
    #[serde(default)]
    error_mode: AlcErrorMode,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlcJson {
    Ideal(IdealTag),
    Db(f64),
    Full(AlcDbJson),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DlcJson {
    Ideal(IdealTag),
    Db(f64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimJson {
    trials: usize,
    seed: u64,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let f: FileConfig = serde_json::from_str(text)?;
    let w = f.waveform;
    let waveform = OfdmConfig::new(w.n_subcarriers, w.active_per_side, w.cp_len, w.sample_rate_hz, w.carrier_hz)?;
    let c = f.channel;
    let profile = CouplingProfile::from_db(&c.delays_samples, &c.powers_db, c.separation_db, c.main_delay_s)?;
    let alc = match f.alc {
        AlcJson::Ideal(IdealTag::Ideal) => AlcSetting::Ideal,
        AlcJson::Db(db) => AlcSetting::Suppression { a: from_db(-db), mode: AlcErrorMode::default() },
        AlcJson::Full(AlcDbJson { db, error_mode }) => AlcSetting::Suppression { a: from_db(-db), mode: error_mode },
    };
    let dlc = match f.dlc {
        DlcJson::Ideal(IdealTag::Ideal) => DlcMode::Ideal,
        DlcJson::Db(db) => DlcMode::Suppression(from_db(-db)),
    };
    let cfg = ScenarioConfig {
        waveform,
        profile,
        oscillator: f.oscillator.kind,
        beta: f.oscillator.beta_hz,
        alc,
        dlc,
        cpe_in_estimate: true,
        trials: f.sim.trials,
        master_seed: f.sim.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Preset;

    const CANONICAL: &str = r#"{
        "waveform": {"n_subcarriers": 1024, "active_per_side": 300, "cp_len": 63,
                     "sample_rate_hz": 15.36e6, "carrier_hz": 1.875e9},
        "channel": {"delays_samples": [0, 1, 2, 4], "powers_db": [-30, -65, -70, -75],
                    "separation_db": 30, "main_delay_s": 6.6713e-10},
        "oscillator": {"kind": "common", "beta_hz": 50},
        "alc": {"db": 30, "error_mode": "pure_amplitude"},
        "dlc": 50,
        "sim": {"trials": 1000, "seed": 1}
    }"#;

    #[test]
    fn canonical_file_matches_preset() {
        let cfg = parse_config(CANONICAL).unwrap();
        let mut expected = ScenarioConfig::preset(Preset::Practical, OscillatorKind::Common, 50.0);
        expected.dlc = DlcMode::Suppression(from_db(-50.0));
        expected.alc = AlcSetting::Suppression { a: from_db(-30.0), mode: AlcErrorMode::PureAmplitude };
        assert_eq!(cfg, expected);
    }

    #[test]
    fn ideal_strings_and_bare_numbers() {
        let text = CANONICAL.replace(r#"{"db": 30, "error_mode": "pure_amplitude"}"#, r#""ideal""#).replace(
            r#""dlc": 50"#,
            r#""dlc": "ideal""#,
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.alc, AlcSetting::Ideal);
        assert_eq!(cfg.dlc, DlcMode::Ideal);

        let text = CANONICAL.replace(r#"{"db": 30, "error_mode": "pure_amplitude"}"#, "30");
        assert!(matches!(parse_config(&text).unwrap().alc, AlcSetting::Suppression { .. }));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = CANONICAL.replace(r#""seed": 1"#, r#""seed": 1, "threads": 4"#);
        assert!(parse_config(&text).is_err());
        let text = CANONICAL.replace(r#""dlc": 50,"#, r#""dlc": 50, "extra": 1,"#);
        assert!(parse_config(&text).is_err());
        let text = CANONICAL.replace(r#""error_mode": "pure_amplitude""#, r#""error_mode": "pure_amplitude", "x": 0"#);
        assert!(parse_config(&text).is_err());
        assert!(parse_config(&CANONICAL.replace(r#""ideal""#, r#""perfect""#).replace("\"dlc\": 50", "\"dlc\": \"perfect\"")).is_err());
    }

    #[test]
    fn infeasible_alc_is_reported() {
        let text = CANONICAL.replace(r#"{"db": 30, "error_mode": "pure_amplitude"}"#, "40");
        assert!(parse_config(&text).is_err());
    }
}
