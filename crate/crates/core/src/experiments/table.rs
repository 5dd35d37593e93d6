//! CSV output and read-back.
//!
//! Floats are written with 17 significant digits so that parsing restores
//! them exactly. Missing values are empty fields.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{Axis, SpectrumTable, SweepResult, SweepRow, Variant};
use crate::error::{invalid, Result};
use crate::phasenoise::OscillatorKind;
use crate::scenario::Preset;

pub const SWEEP_HEADER: [&str; 9] = [
    "axis_name",
    "axis_value",
    "preset",
    "oscillator",
    "analytic_inband_db",
    "sim_inband_db",
    "sim_stderr_db",
    "trials",
    "feasible",
];

pub const SPECTRUM_HEADER: [&str; 4] = ["subcarrier_index", "analytic_db", "sim_mean_db", "sim_stderr_db"];

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).from_reader(input)
}

fn parse_f64(field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| invalid(format!("`{field}` is not a number")))
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(field).map(Some)
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.axis.as_str().to_string(),
            fmt(r.axis_value),
            r.variant.preset.as_str().to_string(),
            r.variant.oscillator.as_str().to_string(),
            fmt_opt(r.analytic_inband_db),
            fmt_opt(r.sim_inband_db),
            fmt_opt(r.sim_stderr_db),
            r.trials.to_string(),
            r.feasible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows are ordered by centred index `−N/2 … N/2 − 1`.
pub fn write_spectrum_csv<W: Write>(table: &SpectrumTable, out: W) -> Result<()> {
    let n = table.analytic_db.len();
    let mut w = writer(out);
    w.write_record(SPECTRUM_HEADER)?;
    let half = (n / 2) as i64;
    for idx in -half..(n as i64 - half) {
        let k = idx.rem_euclid(n as i64) as usize;
        let pick = |v: &Option<Vec<f64>>| fmt_opt(v.as_ref().map(|v| v[k]));
        w.write_record([
            idx.to_string(),
            fmt(table.analytic_db[k]),
            pick(&table.sim_mean_db),
            pick(&table.sim_stderr_db),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_preset(s: &str) -> Result<Preset> {
    match s {
        "practical" => Ok(Preset::Practical),
        "ideal" => Ok(Preset::Ideal),
        other => Err(invalid(format!("unknown preset `{other}`"))),
    }
}

fn parse_kind(s: &str) -> Result<OscillatorKind> {
    match s {
        "common" => Ok(OscillatorKind::Common),
        "independent" => Ok(OscillatorKind::Independent),
        other => Err(invalid(format!("unknown oscillator kind `{other}`"))),
    }
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = r.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(invalid(format!("unexpected CSV header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(())
}

/// Reads a sweep CSV back. Reference powers are not stored and come back
/// as NaN.
pub fn parse_sweep_csv<R: Read>(input: R) -> Result<SweepResult> {
    let mut r = reader(input);
    check_header(&mut r, &SWEEP_HEADER)?;
    let mut rows = Vec::new();
    let mut axis = None;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != SWEEP_HEADER.len() {
            return Err(invalid("sweep row has the wrong number of fields"));
        }
        let row_axis = Axis::parse(&rec[0])?;
        if *axis.get_or_insert(row_axis) != row_axis {
            return Err(invalid("sweep file mixes axes"));
        }
        rows.push(SweepRow {
            axis: row_axis,
            axis_value: parse_f64(&rec[1])?,
            variant: Variant { preset: parse_preset(&rec[2])?, oscillator: parse_kind(&rec[3])? },
            analytic_inband_db: parse_opt(&rec[4])?,
            sim_inband_db: parse_opt(&rec[5])?,
            sim_stderr_db: parse_opt(&rec[6])?,
            trials: rec[7].parse().map_err(|_| invalid(format!("bad trial count `{}`", &rec[7])))?,
            feasible: rec[8].parse().map_err(|_| invalid(format!("bad feasibility flag `{}`", &rec[8])))?,
            reference_power: f64::NAN,
        });
    }
    Ok(SweepResult { axis: axis.unwrap_or(Axis::Beta), rows, spectra: Vec::new() })
}

/// Reads a spectrum CSV back into natural bin order. Without the scenario
/// at hand every bin counts as active.
pub fn parse_spectrum_csv<R: Read>(input: R, label: &str) -> Result<SpectrumTable> {
    let mut r = reader(input);
    check_header(&mut r, &SPECTRUM_HEADER)?;
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != SPECTRUM_HEADER.len() {
            return Err(invalid("spectrum row has the wrong number of fields"));
        }
        let idx: i64 = rec[0].parse().map_err(|_| invalid(format!("bad subcarrier index `{}`", &rec[0])))?;
        entries.push((idx, parse_f64(&rec[1])?, parse_opt(&rec[2])?, parse_opt(&rec[3])?));
    }
    let n = entries.len();
    let mut analytic = vec![f64::NAN; n];
    let mut mean = vec![None; n];
    let mut se = vec![None; n];
    let mut seen = vec![false; n];
    for (idx, a, m, s) in entries {
        let k = idx.rem_euclid(n as i64) as usize;
        if seen[k] {
            return Err(invalid(format!("subcarrier {idx} listed twice")));
        }
        seen[k] = true;
        analytic[k] = a;
        mean[k] = m;
        se[k] = s;
    }
    let collect = |v: Vec<Option<f64>>| v.into_iter().collect::<Option<Vec<f64>>>();
    Ok(SpectrumTable {
        label: label.to_string(),
        analytic_db: analytic,
        sim_mean_db: collect(mean),
        sim_stderr_db: collect(se),
        active_set: (0..n).collect(),
    })
}

/// `<dir>/<stem>_<preset>_<oscillator>.csv` next to the sweep file.
pub fn spectrum_path(sweep_path: &Path, label: &str) -> PathBuf {
    let stem = sweep_path.file_stem().and_then(|s| s.to_str()).unwrap_or("spectrum");
    let name = format!("{stem}_{}.csv", label.replace('/', "_"));
    sweep_path.with_file_name(name)
}

/// Writes the sweep CSV at `path` and one spectrum CSV per table beside
/// it. Returns every path written.
pub fn write_result(result: &SweepResult, path: &Path) -> Result<Vec<PathBuf>> {
    write_sweep_csv(&result.rows, File::create(path)?)?;
    let mut written = vec![path.to_path_buf()];
    for t in &result.spectra {
        let p = spectrum_path(path, &t.label);
        write_spectrum_csv(t, File::create(&p)?)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads either CSV layout, telling them apart by the header.
pub fn read_result(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or_default();
    if first == SPECTRUM_HEADER.join(",") {
        let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("spectrum");
        let table = parse_spectrum_csv(text.as_bytes(), label)?;
        Ok(SweepResult { axis: Axis::Beta, rows: Vec::new(), spectra: vec![table] })
    } else {
        parse_sweep_csv(text.as_bytes())
    }
}
