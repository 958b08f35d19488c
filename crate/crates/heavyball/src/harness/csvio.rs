//! Trace serialization. CSV schemas are fixed:
//!
//! * phase:  `t,f,norm_w,w_par,norm_w_perp,dist,norm_m`
//! * cubic:  `t,f_gap,norm_w,rho_norm_w,norm_m`
//! * saddle: `t,f,norm_w,w1,w2,norm_m`
//! * eig:    `t,dist`
//!
//! Floats carry 17 significant digits so identical runs serialize to
//! identical bytes and values round-trip exactly.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cubic::{EXTRA_F_GAP, EXTRA_RHO_NORM_W};
use crate::experiments::{EXTRA_W1, EXTRA_W2};
use crate::momentum::Trace;
use crate::phase::{EXTRA_DIST, EXTRA_NORM_W_PERP, EXTRA_W_PAR};
use crate::Result;

/// 17 significant digits; round-trips any f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<F>(path: &Path, header: &str, rows: usize, mut row: F) -> Result<()>
where
    F: FnMut(usize) -> String,
{
    let file = std::fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{header}")?;
    for i in 0..rows {
        writeln!(out, "{}", row(i))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_phase_csv(path: &Path, trace: &Trace) -> Result<()> {
    write_rows(
        path,
        "t,f,norm_w,w_par,norm_w_perp,dist,norm_m",
        trace.len(),
        |i| {
            let r = &trace.records[i];
            format!(
                "{},{},{},{},{},{},{}",
                r.t,
                fmt_g17(r.f),
                fmt_g17(r.norm_w),
                fmt_g17(r.extras[EXTRA_W_PAR]),
                fmt_g17(r.extras[EXTRA_NORM_W_PERP]),
                fmt_g17(r.extras[EXTRA_DIST]),
                fmt_g17(r.norm_m),
            )
        },
    )
}

pub fn write_cubic_csv(path: &Path, trace: &Trace) -> Result<()> {
    write_rows(path, "t,f_gap,norm_w,rho_norm_w,norm_m", trace.len(), |i| {
        let r = &trace.records[i];
        format!(
            "{},{},{},{},{}",
            r.t,
            fmt_g17(r.extras[EXTRA_F_GAP]),
            fmt_g17(r.norm_w),
            fmt_g17(r.extras[EXTRA_RHO_NORM_W]),
            fmt_g17(r.norm_m),
        )
    })
}

pub fn write_saddle_csv(path: &Path, trace: &Trace) -> Result<()> {
    write_rows(path, "t,f,norm_w,w1,w2,norm_m", trace.len(), |i| {
        let r = &trace.records[i];
        format!(
            "{},{},{},{},{},{}",
            r.t,
            fmt_g17(r.f),
            fmt_g17(r.norm_w),
            fmt_g17(r.extras[EXTRA_W1]),
            fmt_g17(r.extras[EXTRA_W2]),
            fmt_g17(r.norm_m),
        )
    })
}

pub fn write_eig_csv(path: &Path, dists: &[f64]) -> Result<()> {
    write_rows(path, "t,dist", dists.len(), |i| {
        format!("{},{}", i, fmt_g17(dists[i]))
    })
}
