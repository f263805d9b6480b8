use std::io::{self, Write};

use serde::Serialize;

use crate::error::{invalid, Result};

use super::moments::empirical_mim;

pub const TRACKER_CSV_HEADER: &str = "i,delta_n,delta_N,n,N,p_hat,L_hat";

/// One batch of trials and the cumulative state after it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRecord {
    /// 1-based batch index.
    pub index: usize,
    pub delta_n: u64,
    pub delta_trials: u64,
    pub n: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// `None` while no event has occurred.
    pub l_hat: Option<f64>,
}

/// Running counts `n_i = Σ Δn_j`, `N_i = Σ ΔN_j` with `p̂_i = n_i / N_i` and
/// `L̂_i = empirical_mim(p̂_i)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EmpiricalTracker {
    records: Vec<BatchRecord>,
}

impl EmpiricalTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, delta_n: u64, delta_trials: u64) -> Result<&BatchRecord> {
        if delta_trials == 0 {
            return Err(invalid("delta_N", "batch must contain at least one trial"));
        }
        if delta_n > delta_trials {
            return Err(invalid("delta_n", "more events than trials"));
        }
        let (n0, t0) = self.records.last().map_or((0, 0), |r| (r.n, r.trials));
        let n = n0 + delta_n;
        let trials = t0 + delta_trials;
        let p_hat = n as f64 / trials as f64;
        self.records.push(BatchRecord {
            index: self.records.len() + 1,
            delta_n,
            delta_trials,
            n,
            trials,
            p_hat,
            l_hat: empirical_mim(p_hat),
        });
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn records(&self) -> &[BatchRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&BatchRecord> {
        self.records.last()
    }

    /// Columns `i,delta_n,delta_N,n,N,p_hat,L_hat`; undefined `L_hat` is an
    /// empty field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TRACKER_CSV_HEADER}")?;
        for r in &self.records {
            let l = r.l_hat.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.index, r.delta_n, r.delta_trials, r.n, r.trials, r.p_hat, l
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichKind {
    Probability,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichViolation {
    pub batch: usize,
    pub kind: SandwichKind,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SandwichReport {
    pub probability_checks: usize,
    pub measure_checks: usize,
    pub violations: Vec<SandwichViolation>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `a/b ≤ c/d` exactly.
fn frac_le(a: u64, b: u64, c: u64, d: u64) -> bool {
    (a as u128) * (d as u128) <= (c as u128) * (b as u128)
}

/// Checks, for every batch after the first, that `p̂_i` lies between the
/// previous cumulative frequency and the batch frequency (exact integer
/// test), and that `L̂_i` lies between `L̂_{i-1}` and the batch measure
/// (slack `1e-12`, relative above 1). Batches with an undefined measure
/// skip the second test.
pub fn tracker_sandwich_check(tracker: &EmpiricalTracker) -> SandwichReport {
    let mut report = SandwichReport::default();
    for w in tracker.records().windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let (a, b) = (prev.n, prev.trials);
        let (c, d) = (cur.delta_n, cur.delta_trials);
        let (lo, hi) = if frac_le(a, b, c, d) { ((a, b), (c, d)) } else { ((c, d), (a, b)) };
        report.probability_checks += 1;
        if !(frac_le(lo.0, lo.1, cur.n, cur.trials) && frac_le(cur.n, cur.trials, hi.0, hi.1)) {
            report.violations.push(SandwichViolation {
                batch: cur.index,
                kind: SandwichKind::Probability,
                value: cur.p_hat,
                lower: lo.0 as f64 / lo.1 as f64,
                upper: hi.0 as f64 / hi.1 as f64,
            });
        }

        let batch_l = empirical_mim(c as f64 / d as f64);
        if let (Some(l_prev), Some(l_batch), Some(l_cur)) = (prev.l_hat, batch_l, cur.l_hat) {
            report.measure_checks += 1;
            let (lower, upper) = (l_prev.min(l_batch), l_prev.max(l_batch));
            let slack = |x: f64| 1e-12 * x.abs().max(1.0);
            if l_cur < lower - slack(lower) || l_cur > upper + slack(upper) {
                report.violations.push(SandwichViolation {
                    batch: cur.index,
                    kind: SandwichKind::Measure,
                    value: l_cur,
                    lower,
                    upper,
                });
            }
        }
    }
    report
}
