use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use flexd::analytics::oracle::{compare_with_quadrature, validation_grid};
use flexd::correlation::CorrelationModel;
use flexd::montecarlo::{
    analytic_power_for_outage, centred_grid, run_sweep, Executor, SweepResult, SweepSpec, SweepVariable,
};
use flexd::report;
use flexd::scenario::{load_scenario, ScenarioConfig, ScenarioFile};
use flexd::scheduler::Mode;
use flexd::traffic::{run_traffic, TrafficConfig};
use serde::Serialize;

use crate::args::{Common, DumpArgs, SweepArgs, SweepKind, TrafficArgs, TrafficCommand, ValidateArgs};
use crate::error::CliError;

#[derive(Debug, Serialize)]
struct RunManifest<'a, S: Serialize> {
    command: &'a str,
    argv: Vec<String>,
    tool_version: &'static str,
    seed: u64,
    scenario: ScenarioFile,
    settings: S,
    wall_time_s: f64,
    outputs: Vec<String>,
}

struct Session {
    cfg: ScenarioConfig,
    out: PathBuf,
    executor: Executor,
    started: Instant,
    outputs: Vec<String>,
}

impl Session {
    fn open(common: &Common) -> Result<Self, CliError> {
        let started = Instant::now();
        let mut cfg = load_scenario(&common.scenario)?;
        if let Some(seed) = common.seed {
            cfg = cfg.with_seed(seed)?;
        }
        let executor = Executor::from_env()?;
        fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;
        Ok(Self { cfg, out: common.out.clone(), executor, started, outputs: Vec::new() })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Manifest goes to a temporary name first and is renamed into place.
    fn finish<S: Serialize>(self, command: &str, settings: S) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            command,
            argv: std::env::args().collect(),
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.cfg.seed,
            scenario: self.cfg.to_file(),
            settings,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let path = self.out.join(format!("{command}_manifest.json"));
        let tmp = self.out.join(format!(".{command}_manifest.json.tmp"));
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::io(&tmp, e.into()))?;
        fs::write(&tmp, text + "\n").map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn write_sweep(session: &mut Session, stem: &str, result: &SweepResult) -> Result<(), CliError> {
    session.write(&format!("{stem}_long.csv"), |w| report::write_long(result, w))?;
    for curve in &result.curves {
        session.write(&format!("{stem}_{}.csv", curve.mode.name()), |w| report::write_mode(curve, w))?;
    }
    Ok(())
}

fn default_sweep(kind: SweepKind) -> (SweepVariable, Vec<f64>, Vec<Mode>) {
    let range = |a: f64, b: f64, step: f64| -> Vec<f64> {
        let n = ((b - a) / step).round() as usize;
        (0..=n).map(|i| a + step * i as f64).collect()
    };
    let all = Mode::ALL.to_vec();
    let ee_modes = vec![Mode::FlexD, Mode::Hd, Mode::FdConst];
    match kind {
        SweepKind::Power => (SweepVariable::Power, range(20.0, 60.0, 2.5), all),
        SweepKind::Sinr => (SweepVariable::SinrScale, range(120.0, 170.0, 5.0), all),
        SweepKind::Position => (SweepVariable::RisX, range(-50.0, 50.0, 5.0), all),
        SweepKind::MElements => (SweepVariable::Elements, vec![64.0, 128.0, 256.0], all),
        SweepKind::Ee => (SweepVariable::Power, range(30.0, 57.0, 3.0), ee_modes),
        SweepKind::Traffic => unreachable!("traffic runs through the traffic command"),
    }
}

fn traffic_config(args: &TrafficArgs) -> TrafficConfig {
    TrafficConfig {
        arrival_rate: args.arrival_rate,
        payload: args.payload,
        slots: args.slots,
        target_rates: args.rt_grid.0.clone(),
        counts_idle: args.outage_counts_idle,
        empty_buffer_fallback: args.empty_buffer_fallback,
        fd_delivery: args.fd_delivery,
    }
}

pub fn sweep(args: &SweepArgs) -> Result<PathBuf, CliError> {
    if args.kind == SweepKind::Traffic {
        return traffic(&TrafficCommand {
            common: args.common.clone(),
            modes: args.trials.modes.clone(),
            traffic: args.traffic.clone(),
        });
    }
    let mut session = Session::open(&args.common)?;
    let (variable, grid, modes) = default_sweep(args.kind);
    let spec = SweepSpec {
        variable,
        grid: args.grid.as_ref().map(|g| g.0.clone()).unwrap_or(grid),
        trials: args.trials.trials,
        modes: args.trials.modes.clone().unwrap_or(modes),
        crn: args.trials.crn,
        pairs: args.trials.pairs,
    };
    let result = run_sweep(&session.cfg, &spec, &session.executor)?;
    write_sweep(&mut session, args.kind.name(), &result)?;
    session.finish(args.kind.name(), &spec)
}

pub fn traffic(args: &TrafficCommand) -> Result<PathBuf, CliError> {
    let mut session = Session::open(&args.common)?;
    let cfg = traffic_config(&args.traffic);
    let modes = args.modes.clone().unwrap_or_else(|| vec![Mode::FlexD, Mode::Hd, Mode::FdConst]);
    let model = CorrelationModel::new(&session.cfg)?;
    let reports = run_traffic(&session.cfg, &model, &cfg, &modes, &session.executor)?;
    session.write("traffic_long.csv", |w| report::write_traffic_long(&reports, w))?;
    for r in &reports {
        session.write(&format!("traffic_{}.csv", r.mode.name()), |w| report::write_traffic_mode(r, w))?;
    }
    session.write("traffic_summary.csv", |w| report::write_traffic_summary(&reports, w))?;
    #[derive(Serialize)]
    struct Settings<'a> {
        traffic: &'a TrafficConfig,
        modes: &'a [Mode],
    }
    session.finish("traffic", Settings { traffic: &cfg, modes: &modes })
}

pub fn dump_correlation(args: &DumpArgs) -> Result<PathBuf, CliError> {
    let mut session = Session::open(&args.common)?;
    let model = CorrelationModel::new(&session.cfg)?;
    session.write("correlation.csv", |w| model.write_csv(w))?;
    let m = &model.moments;
    println!("M = {}: mu = {}, s = {}, rho = {}", model.elements(), m.mu, m.s, m.rho);
    println!(
        "eigenvalues in [{:e}, {:e}], {} floored",
        model.repair.min_eigenvalue, model.repair.max_eigenvalue, model.repair.floored
    );
    session.finish("dump-correlation", &model.repair)
}

#[derive(Debug, Serialize)]
struct ValidationSummary {
    oracle_points: usize,
    oracle_max_abs_gap: f64,
    oracle_max_rel_gap: f64,
    oracle_tol: f64,
    median_power_dbm: f64,
    mc_trials: u64,
    mc_max_abs_gap: f64,
    mc_worst_power_dbm: f64,
    mc_tol: f64,
    passed: bool,
}

pub fn validate(args: &ValidateArgs) -> Result<PathBuf, CliError> {
    let mut session = Session::open(&args.common)?;
    let cfg = session.cfg.clone();
    let model = CorrelationModel::new(&cfg)?;

    let oracle = compare_with_quadrature(&validation_grid(&model.moments))?;
    let oracle_ok = oracle.max_rel_gap <= args.oracle_tol;
    println!(
        "oracle: {} points, max abs gap {:e}, max rel gap {:e} (tol {:e}) {}",
        oracle.points,
        oracle.max_abs_gap,
        oracle.max_rel_gap,
        args.oracle_tol,
        verdict(oracle_ok)
    );

    let p50 = analytic_power_for_outage(&cfg, &model, 0.5)?;
    let spec = SweepSpec {
        variable: SweepVariable::Power,
        grid: centred_grid(p50, args.points, args.spacing_db),
        trials: args.trials,
        modes: vec![Mode::FlexD],
        crn: true,
        pairs: Default::default(),
    };
    let result = run_sweep(&cfg, &spec, &session.executor)?;
    let (mut gap, mut at) = (0.0f64, f64::NAN);
    for p in &result.curves[0].points {
        let a = p.analytic.expect("FlexD curves carry the closed form");
        let g = (p.outage.mean - a).abs();
        println!("  {:.2} dBm: mc {:.5} ± {:.5}, analytic {:.5}, gap {:.5}", p.value, p.outage.mean, p.outage.stderr, a, g);
        if g > gap || at.is_nan() {
            gap = g;
            at = p.value;
        }
    }
    let mc_ok = gap <= args.mc_tol;
    println!(
        "mc: {} points around {:.2} dBm, max |mc - analytic| {:.5} at {:.2} dBm (tol {}) {}",
        args.points,
        p50,
        gap,
        at,
        args.mc_tol,
        verdict(mc_ok)
    );
    write_sweep(&mut session, "validate", &result)?;
    let summary = ValidationSummary {
        oracle_points: oracle.points,
        oracle_max_abs_gap: oracle.max_abs_gap,
        oracle_max_rel_gap: oracle.max_rel_gap,
        oracle_tol: args.oracle_tol,
        median_power_dbm: p50,
        mc_trials: args.trials,
        mc_max_abs_gap: gap,
        mc_worst_power_dbm: at,
        mc_tol: args.mc_tol,
        passed: oracle_ok && mc_ok,
    };
    let path = session.finish("validate", &summary)?;
    if summary.passed {
        Ok(path)
    } else {
        Err(CliError::Validation(format!("oracle gap {:e}, mc gap {:.5}", oracle.max_rel_gap, gap)))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}
