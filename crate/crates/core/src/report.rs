//! CSV and plain-text rendering of comparison reports and bin sweeps.
//!
//! CSV is UTF-8 with LF line endings and numbers at 6 significant digits
//! (`%g` style). Timing columns are left empty unless requested, so reports
//! from repeated runs compare byte for byte.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::harness::{BinSweepResult, ComparisonReport, ComparisonRow};

pub const COMPARISON_HEADER: &str =
    "model,B,isovalue,total_entropy_bits,delta_from_baseline,storage_values_per_vertex,fit_seconds,entropy_seconds";

pub const SWEEP_HEADER: &str = "B,total_entropy_bits";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            _ => Err(Error::Invalid(format!(
                "unknown format {s:?} (expected csv or text)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmitOptions {
    pub timings: bool,
}

/// Six significant digits, `%g` style, trailing zeros dropped.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", strip_zeros(mantissa.to_owned()))
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn seconds(opts: &EmitOptions, s: f64) -> String {
    if opts.timings {
        fmt_sig6(s)
    } else {
        String::new()
    }
}

pub fn comparison_csv(report: &ComparisonReport, opts: &EmitOptions) -> String {
    let mut out = String::new();
    out.push_str(COMPARISON_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.kind.name(),
            r.kind.bins().map(|b| b.to_string()).unwrap_or_default(),
            fmt_sig6(r.isovalue),
            fmt_sig6(r.total_entropy),
            fmt_sig6(r.delta_from_baseline),
            r.storage_cost,
            seconds(opts, r.fit_seconds),
            seconds(opts, r.entropy_seconds),
        );
    }
    out
}

/// Aligned tables in the layout of the usual model-by-isovalue summaries:
/// totals, then deltas from the baseline, then (optionally) timings.
pub fn comparison_text(report: &ComparisonReport, opts: &EmitOptions) -> String {
    let kinds = report.kinds();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Total summed entropy (bits): {} ({} members)",
        report.name, report.member_count
    );
    let label_width = kinds
        .iter()
        .map(|k| k.to_string().len())
        .max()
        .unwrap_or(0)
        .max("model".len());
    let col = 14;

    let mut table = |title: &str, cell: &dyn Fn(&ComparisonRow) -> String| {
        let _ = writeln!(out);
        let _ = writeln!(out, "{title}");
        let _ = write!(out, "{:<label_width$}  {:>7}", "model", "values");
        for &k in &report.isovalues {
            let _ = write!(out, "  {:>col$}", format!("k={}", fmt_sig6(k)));
        }
        out.push('\n');
        for &kind in &kinds {
            let storage = report
                .rows
                .iter()
                .find(|r| r.kind == kind)
                .map_or(0, |r| r.storage_cost);
            let _ = write!(out, "{:<label_width$}  {:>7}", kind.to_string(), storage);
            for &k in &report.isovalues {
                let text = report.row(kind, k).map(cell).unwrap_or_default();
                let _ = write!(out, "  {text:>col$}");
            }
            out.push('\n');
        }
    };
    table("total", &|r| format!("{:.2}", r.total_entropy));
    table("delta from full", &|r| {
        format!("{:+.2}", r.delta_from_baseline)
    });
    if opts.timings {
        table("fit s / entropy s", &|r| {
            format!(
                "{}/{}",
                fmt_sig6(r.fit_seconds),
                fmt_sig6(r.entropy_seconds)
            )
        });
    }
    out
}

pub fn sweep_csv(sweep: &BinSweepResult) -> String {
    let mut out = format!(
        "# model={} isovalue={} members={} baseline_total_entropy_bits={}\n{SWEEP_HEADER}\n",
        sweep.model.name(),
        fmt_sig6(sweep.isovalue),
        sweep.member_count,
        fmt_sig6(sweep.baseline),
    );
    for p in &sweep.points {
        let _ = writeln!(out, "{},{}", p.bins, fmt_sig6(p.total_entropy));
    }
    out
}

pub fn sweep_text(sweep: &BinSweepResult, opts: &EmitOptions) -> String {
    let mut out = format!(
        "{} bin sweep at k={} (baseline {:.2} bits)\n{:>6}  {:>14}  {:>10}\n",
        sweep.model.name(),
        fmt_sig6(sweep.isovalue),
        sweep.baseline,
        "B",
        "total",
        "delta",
    );
    for p in &sweep.points {
        let _ = write!(
            out,
            "{:>6}  {:>14.2}  {:>+10.2}",
            p.bins,
            p.total_entropy,
            p.total_entropy - sweep.baseline
        );
        if opts.timings {
            let _ = write!(
                out,
                "  {}s/{}s",
                fmt_sig6(p.fit_seconds),
                fmt_sig6(p.entropy_seconds)
            );
        }
        out.push('\n');
    }
    out
}

pub fn emit_comparison(
    report: &ComparisonReport,
    format: ReportFormat,
    opts: &EmitOptions,
    sink: &mut dyn Write,
) -> std::io::Result<()> {
    let text = match format {
        ReportFormat::Csv => comparison_csv(report, opts),
        ReportFormat::Text => comparison_text(report, opts),
    };
    sink.write_all(text.as_bytes())
}

pub fn emit_sweep(
    sweep: &BinSweepResult,
    format: ReportFormat,
    opts: &EmitOptions,
    sink: &mut dyn Write,
) -> std::io::Result<()> {
    let text = match format {
        ReportFormat::Csv => sweep_csv(sweep),
        ReportFormat::Text => sweep_text(sweep, opts),
    };
    sink.write_all(text.as_bytes())
}
