//! CSV renderings of sweep and traffic results.
//!
//! Floats use Rust's shortest round-trip formatting, so identical results
//! always render to identical bytes.

use std::io::{self, Write};

use crate::montecarlo::{OutageCurve, SweepResult};
use crate::scenario::watts_to_dbm;
use crate::traffic::TrafficReport;

pub const LONG_HEADER: &str = "sweep_var,value,mode,metric,amount";

pub const MODE_HEADER: &str = "value,tx_power_dbm,tx_power_w,interferer_power_dbm,interferer_power_w,\
trials,outage_count,outage_mc,outage_stderr,mean_rate,rate_stderr,ee,outage_analytic,outage_asymptotic";

pub const TRAFFIC_SUMMARY_HEADER: &str =
    "mode,mean_delivered,mean_served,mean_delay,mean_backlog,idle_slots,arrived,served,final_backlog,conserved";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Combined long-format table: one row per point, mode and metric.
pub fn write_long<W: Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{LONG_HEADER}")?;
    for curve in &result.curves {
        let var = curve.variable.name();
        let mode = curve.mode.name();
        for p in &curve.points {
            let mut row = |metric: &str, amount: f64| writeln!(out, "{var},{},{mode},{metric},{amount}", p.value);
            row("outage_mc", p.outage.mean)?;
            row("outage_stderr", p.outage.stderr)?;
            if let Some(a) = p.analytic {
                row("outage_analytic", a)?;
            }
            if let Some(a) = p.asymptotic {
                row("outage_asymptotic", a)?;
            }
            row("mean_rate", p.rate.mean)?;
            if let Some(e) = p.ee {
                row("ee", e)?;
            }
        }
    }
    Ok(())
}

/// Wide table of one mode, with powers in dBm and watts.
pub fn write_mode<W: Write>(curve: &OutageCurve, mut out: W) -> io::Result<()> {
    writeln!(out, "{MODE_HEADER}")?;
    for p in &curve.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.value,
            watts_to_dbm(p.tx_power_w),
            p.tx_power_w,
            watts_to_dbm(p.interferer_power_w),
            p.interferer_power_w,
            p.outage.trials,
            p.outage.outage_count.unwrap_or(0),
            p.outage.mean,
            p.outage.stderr,
            p.rate.mean,
            p.rate.stderr,
            opt(p.ee),
            opt(p.analytic),
            opt(p.asymptotic),
        )?;
    }
    Ok(())
}

/// Slot-outage rows in the long format.
pub fn write_traffic_long<W: Write>(reports: &[TrafficReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{LONG_HEADER}")?;
    for r in reports {
        for (rt, o) in r.target_rates.iter().zip(&r.outage) {
            writeln!(out, "target_rate,{rt},{},slot_outage,{o}", r.mode.name())?;
        }
    }
    Ok(())
}

pub const TRAFFIC_MODE_HEADER: &str = "target_rate,slot_outage";

/// Slot outage of one mode over the target-rate grid.
pub fn write_traffic_mode<W: Write>(report: &TrafficReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAFFIC_MODE_HEADER}")?;
    for (rt, o) in report.target_rates.iter().zip(&report.outage) {
        writeln!(out, "{rt},{o}")?;
    }
    Ok(())
}

pub fn write_traffic_summary<W: Write>(reports: &[TrafficReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAFFIC_SUMMARY_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.mode.name(),
            r.mean_delivered,
            r.mean_served,
            r.mean_delay,
            r.mean_backlog,
            r.idle_slots,
            r.arrived,
            r.served,
            r.final_backlog,
            r.conserved
        )?;
    }
    Ok(())
}

/// Long table rendered to a string.
pub fn long_csv(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_long(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_sweep, Executor, PairSelection, SweepSpec, SweepVariable};
    use crate::scenario::{ScenarioConfig, ScenarioFile};
    use crate::scheduler::Mode;

    #[test]
    fn long_rows_carry_analytics_for_flexd_only() {
        let cfg = ScenarioConfig::from_file(&ScenarioFile::new(1, 16)).unwrap();
        let spec = SweepSpec {
            variable: SweepVariable::Power,
            grid: vec![40.0, 45.0],
            trials: 64,
            modes: vec![Mode::FlexD, Mode::Hd],
            crn: true,
            pairs: PairSelection::All,
        };
        let r = run_sweep(&cfg, &spec, &Executor::Sequential).unwrap();
        let csv = long_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(LONG_HEADER));
        assert!(csv.contains("power_dbm,40,flexd,outage_analytic,"));
        assert!(!csv.contains(",hd,outage_analytic"));
        assert_eq!(csv.lines().filter(|l| l.contains(",flexd,")).count(), 2 * 6);
        let mut wide = Vec::new();
        write_mode(&r.curves[1], &mut wide).unwrap();
        let wide = String::from_utf8(wide).unwrap();
        let row: Vec<&str> = wide.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row.len(), MODE_HEADER.split(',').count());
        assert_eq!(row[1], "40");
        assert_eq!(row[12], "");
    }
}
