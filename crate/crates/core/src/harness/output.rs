//! CSV and JSON writers. Every float in CSV output carries 9 significant
//! digits so that reruns diff cleanly.

use std::io::Write;

use serde::Serialize;

use super::{ComparisonReport, SelftestReport, ThresholdEstimate};
use crate::error::Result;
use crate::ode::Trajectory;
use crate::tracker::Snapshot;

pub const ESTIMATE_HEADER: [&str; 7] = ["model", "K", "n", "trials", "mean", "stddev", "timescale"];
pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "y", "z", "w", "v"];
pub const SNAPSHOT_HEADER: [&str; 8] = [
    "m",
    "t_g_units",
    "t_c_units",
    "I",
    "I2",
    "S",
    "largest_fraction",
    "components",
];
pub const COMPARISON_HEADER: [&str; 12] = [
    "K",
    "t",
    "m",
    "I_sim",
    "I2_sim",
    "S_sim",
    "y",
    "w",
    "z",
    "abs_dev_I",
    "abs_dev_I2",
    "abs_dev_S",
];
pub const SELFTEST_HEADER: [&str; 9] = [
    "model", "K", "sampling", "n", "draws", "chi2", "dof", "p_value", "passed",
];

/// `x` with 9 significant digits: fixed notation for magnitudes in
/// `[1e-5, 1e9)`, scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific format has an exponent");
    if (-5..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn write_estimates_csv<W: Write>(out: W, rows: &[ThresholdEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ESTIMATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.model.to_string(),
            fmt_sig(r.k),
            r.n.to_string(),
            r.trials.to_string(),
            fmt_sig(r.mean),
            fmt_sig(r.stddev),
            r.timescale.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        w.write_record([s.t, s.y, s.z, s.w, s.v].map(fmt_sig))?;
    }
    w.flush()?;
    Ok(())
}

/// Streaming writer for process snapshots.
pub struct SnapshotWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SnapshotWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(SNAPSHOT_HEADER)?;
        Ok(SnapshotWriter { inner })
    }

    pub fn write(&mut self, s: &Snapshot) -> Result<()> {
        self.inner.write_record([
            s.m.to_string(),
            fmt_sig(s.t_g),
            fmt_sig(s.t_c),
            fmt_sig(s.isolated),
            fmt_sig(s.isolated_edges),
            fmt_sig(s.susceptibility),
            fmt_sig(s.largest_fraction),
            s.num_components.to_string(),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// One row per grid point of every report.
pub fn write_comparison_csv<W: Write>(out: W, reports: &[ComparisonReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARISON_HEADER)?;
    for (report, p) in reports
        .iter()
        .flat_map(|r| r.points.iter().map(move |p| (r, p)))
    {
        let mut row = vec![fmt_sig(report.k), fmt_sig(p.t), p.m.to_string()];
        row.extend(
            [
                p.isolated_sim,
                p.isolated_edges_sim,
                p.susceptibility_sim,
                p.y,
                p.w,
                p.z,
                p.isolated_dev(),
                p.isolated_edges_dev(),
                p.susceptibility_dev(),
            ]
            .map(fmt_sig),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_selftest_csv<W: Write>(out: W, reports: &[SelftestReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SELFTEST_HEADER)?;
    for r in reports {
        w.write_record([
            r.model.to_string(),
            fmt_sig(r.k),
            match r.sampling {
                crate::process::Sampling::Exact => "exact".to_string(),
                crate::process::Sampling::OrderedPairApprox => "ordered-pair".to_string(),
            },
            r.n.to_string(),
            r.draws.to_string(),
            fmt_sig(r.statistic),
            r.dof.to_string(),
            fmt_sig(r.p_value),
            r.passed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
