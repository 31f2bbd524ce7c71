//! CSV emission. Floats are written in the shortest form that parses back
//! to the same binary64 value.

use std::io::Write;

use crate::coarse::CoarseGrainReport;
use crate::error::Result;
use crate::scaling::ScalingPoint;

/// Shortest round-trip decimal for an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// `bin_index,lo,hi,count,fraction,mean_svn_norm`; empty bins leave the mean blank.
pub fn write_bins_csv<W: Write>(report: &CoarseGrainReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "bin_index",
        "lo",
        "hi",
        "count",
        "fraction",
        "mean_svn_norm",
    ])?;
    for b in &report.bins {
        w.write_record([
            b.index.to_string(),
            fmt_f64(b.lo),
            fmt_f64(b.hi),
            b.count.to_string(),
            fmt_f64(b.fraction),
            opt(b.mean_svn_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per grid cell, counted or not.
pub fn write_cells_csv<W: Write>(report: &CoarseGrainReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "eta1",
        "eta2",
        "lambda1",
        "lambda2",
        "lambda3",
        "measure_value",
        "bin_index",
        "in_chamber",
    ])?;
    for c in &report.cells {
        w.write_record([
            fmt_f64(c.eta1),
            fmt_f64(c.eta2),
            fmt_f64(c.lambda[0]),
            fmt_f64(c.lambda[1]),
            fmt_f64(c.lambda[2]),
            fmt_f64(c.measure_value),
            c.bin_index.to_string(),
            c.in_chamber.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `N,lambda1_star,integral_ratio,mean_svn_norm,mean_svn_norm_unweighted`.
pub fn write_scaling_csv<W: Write>(points: &[ScalingPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "N",
        "lambda1_star",
        "integral_ratio",
        "mean_svn_norm",
        "mean_svn_norm_unweighted",
    ])?;
    for p in points {
        w.write_record([
            p.n.to_string(),
            fmt_f64(p.lambda1_star),
            fmt_f64(p.integral_ratio),
            fmt_f64(p.mean_svn_norm),
            fmt_f64(p.mean_svn_norm_unweighted),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `N,lambda1,v_norm` rows.
pub fn write_curve_csv<W: Write>(curves: &[(usize, Vec<(f64, f64)>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "lambda1", "v_norm"])?;
    for (n, samples) in curves {
        for &(x, v) in samples {
            w.write_record([n.to_string(), fmt_f64(x), fmt_f64(v)])?;
        }
    }
    w.flush()?;
    Ok(())
}
