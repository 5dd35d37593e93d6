use std::fmt;

use super::SweepResult;
use crate::error::{Error, Result};

/// Rows whose closed-form and simulated values differ by more than this are
/// flagged.
pub const FLAG_THRESHOLD_DB: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub label: String,
    pub compared: usize,
    pub max_abs_delta_db: f64,
    pub mean_abs_delta_db: f64,
    /// `(axis value or subcarrier index, delta)` above the threshold.
    pub flagged: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub sweeps: Vec<VariantSummary>,
    pub spectra: Vec<VariantSummary>,
}

impl CompareReport {
    pub fn max_abs_delta_db(&self) -> f64 {
        self.sweeps.iter().chain(&self.spectra).map(|s| s.max_abs_delta_db).fold(0.0, f64::max)
    }
}

fn summarize(label: String, deltas: &[(f64, f64)]) -> VariantSummary {
    let abs: Vec<f64> = deltas.iter().map(|d| d.1.abs()).collect();
    VariantSummary {
        label,
        compared: deltas.len(),
        max_abs_delta_db: abs.iter().cloned().fold(0.0, f64::max),
        mean_abs_delta_db: if abs.is_empty() { 0.0 } else { abs.iter().sum::<f64>() / abs.len() as f64 },
        flagged: deltas.iter().copied().filter(|d| d.1.abs() > FLAG_THRESHOLD_DB).collect(),
    }
}

/// Simulated minus closed-form, per variant for sweep rows and per active
/// subcarrier for spectra.
pub fn compare_report(result: &SweepResult) -> Result<CompareReport> {
    let has_sim = result.rows.iter().any(|r| r.sim_inband_db.is_some())
        || result.spectra.iter().any(|s| s.sim_mean_db.is_some());
    if !has_sim {
        return Err(Error::NoSimulationColumns);
    }

    let mut order = Vec::new();
    for r in &result.rows {
        if !order.contains(&r.variant) {
            order.push(r.variant);
        }
    }
    let sweeps = order
        .into_iter()
        .map(|v| {
            let deltas: Vec<(f64, f64)> = result
                .rows
                .iter()
                .filter(|r| r.variant == v)
                .filter_map(|r| Some((r.axis_value, r.sim_inband_db? - r.analytic_inband_db?)))
                .collect();
            summarize(v.label(), &deltas)
        })
        .collect();

    let spectra = result
        .spectra
        .iter()
        .filter_map(|t| {
            let sim = t.sim_mean_db.as_ref()?;
            let n = t.analytic_db.len() as i64;
            let deltas: Vec<(f64, f64)> = t
                .active_set
                .iter()
                .filter(|&&k| sim[k].is_finite() && t.analytic_db[k].is_finite())
                .map(|&k| {
                    let idx = if (k as i64) < n - n / 2 { k as i64 } else { k as i64 - n };
                    (idx as f64, sim[k] - t.analytic_db[k])
                })
                .collect();
            Some(summarize(t.label.clone(), &deltas))
        })
        .collect();

    Ok(CompareReport { sweeps, spectra })
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (kind, list) in [("inband", &self.sweeps), ("subcarrier", &self.spectra)] {
            for s in list {
                writeln!(
                    f,
                    "{kind} {}: {} compared, max |sim - analytic| {:.3} dB, mean {:.3} dB",
                    s.label, s.compared, s.max_abs_delta_db, s.mean_abs_delta_db
                )?;
                for (at, d) in &s.flagged {
                    writeln!(f, "  flagged at {at}: {d:+.3} dB")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{preset, run_sweep};

    #[test]
    fn analytic_only_is_rejected() {
        let r = run_sweep(&preset("fig9").unwrap(), 0, 1).unwrap();
        let err = compare_report(&r).unwrap_err();
        assert_eq!(err.to_string(), "no simulation columns");
    }

    #[test]
    fn identical_columns_give_zero_deltas() {
        let mut r = run_sweep(&preset("fig3").unwrap(), 0, 1).unwrap();
        for row in &mut r.rows {
            row.sim_inband_db = row.analytic_inband_db;
        }
        for t in &mut r.spectra {
            t.sim_mean_db = Some(t.analytic_db.clone());
        }
        let rep = compare_report(&r).unwrap();
        assert_eq!(rep.max_abs_delta_db(), 0.0);
        assert_eq!(rep.sweeps.len(), 2);
        assert_eq!(rep.spectra[0].compared, 600);
        assert!(rep.to_string().contains("practical/common"));
    }

    #[test]
    fn large_deltas_are_flagged() {
        let mut r = run_sweep(&preset("fig9").unwrap(), 0, 1).unwrap();
        for (i, row) in r.rows.iter_mut().enumerate() {
            row.sim_inband_db = row.analytic_inband_db.map(|a| a + if i == 0 { 0.6 } else { 0.1 });
        }
        let rep = compare_report(&r).unwrap();
        assert_eq!(rep.sweeps[0].flagged.len(), 1);
        assert!((rep.max_abs_delta_db() - 0.6).abs() < 1e-9);
        assert!(rep.sweeps[1..].iter().all(|s| s.flagged.is_empty()));
    }
}
