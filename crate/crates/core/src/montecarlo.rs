//! Trial engine for outage, mean rate and energy efficiency.
//!
//! Trials are split into fixed-size blocks. Each block accumulates its own
//! tallies in trial order and blocks are merged in index order, so results
//! are bit-identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::analytics::{self, AsymptoticParams, ClampTally};
use crate::channel::{ChannelRealization, SampleBuffer};
use crate::correlation::CorrelationModel;
use crate::error::{Error, Result};
use crate::link::{fd_sinr_with, CascadeTerms, Direction, SinrSet};
use crate::mathkit::derive_seed;
use crate::scenario::{dbm_to_watts, db_to_linear, LinkBudget, RsiModel, ScenarioConfig};
use crate::scheduler::{flexd_direction, half_duplex_rate, Mode};

/// Trials per work unit.
pub const BLOCK_TRIALS: u64 = 512;

/// RSI level used by [`Mode::FdConst`] unless the scenario sets one.
pub const DEFAULT_CONSTANT_RSI_DBM: f64 = -150.0;
/// RSI slope used by [`Mode::FdLinear`] unless the scenario sets one.
pub const DEFAULT_LINEAR_RSI: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    /// `P = Q`, in dBm.
    Power,
    /// `Q` alone, in dBm.
    InterfererPower,
    /// `P/σ_n²` in dB with `Q` held fixed.
    SinrScale,
    Elements,
    TargetRate,
    /// RIS x coordinate in metres.
    RisX,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Power => "power_dbm",
            SweepVariable::InterfererPower => "interferer_power_dbm",
            SweepVariable::SinrScale => "snr_db",
            SweepVariable::Elements => "elements",
            SweepVariable::TargetRate => "target_rate",
            SweepVariable::RisX => "ris_x",
        }
    }

    /// Scenario at grid value `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        if !value.is_finite() {
            return Err(Error::invalid("grid", "sweep values must be finite"));
        }
        match self {
            SweepVariable::Power => {
                let w = dbm_to_watts(value);
                Ok(cfg.with_powers(w, w))
            }
            SweepVariable::InterfererPower => Ok(cfg.with_powers(cfg.tx_power_w, dbm_to_watts(value))),
            SweepVariable::SinrScale => Ok(cfg.with_powers(cfg.noise_w * db_to_linear(value), cfg.interferer_power_w)),
            SweepVariable::Elements => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::invalid("grid", "element counts must be positive integers"));
                }
                Ok(cfg.with_elements(value as usize))
            }
            SweepVariable::TargetRate => {
                if value < 0.0 {
                    return Err(Error::invalid("grid", "target rates must be non-negative"));
                }
                Ok(cfg.with_target_rate(value))
            }
            SweepVariable::RisX => cfg.with_ris_position([value, cfg.ris[1]]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelection {
    /// Max-throughput pair per block.
    #[default]
    All,
    /// First pair only.
    Single,
}

impl PairSelection {
    pub fn active_pairs(self, cfg: &ScenarioConfig) -> usize {
        match self {
            PairSelection::All => cfg.pairs,
            PairSelection::Single => 1,
        }
    }
}

impl std::str::FromStr for PairSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(PairSelection::All),
            "single" => Ok(PairSelection::Single),
            other => Err(Error::Usage(format!("--pairs expects all|single, got `{other}`"))),
        }
    }
}

/// How blocks are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Executor {
    Sequential,
    /// Rayon pool; `None` uses the global pool.
    #[cfg(feature = "parallel")]
    Parallel { threads: Option<usize> },
}

impl Default for Executor {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Executor::Parallel { threads: None }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Executor::Sequential
        }
    }
}

impl Executor {
    /// Honours `FLEXD_THREADS`.
    pub fn from_env() -> Result<Self> {
        match std::env::var("FLEXD_THREADS") {
            Ok(v) => Self::with_threads(
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::Configuration(format!("FLEXD_THREADS must be a positive integer, got `{v}`")))?,
            ),
            Err(_) => Ok(Self::default()),
        }
    }

    #[cfg_attr(not(feature = "parallel"), allow(unused_variables))]
    pub fn with_threads(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::Configuration("worker count must be positive".into()));
        }
        #[cfg(feature = "parallel")]
        {
            Ok(Executor::Parallel { threads: Some(threads) })
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Executor::Sequential)
        }
    }

    /// `f(0..n)` collected in index order.
    pub fn map_blocks<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match *self {
            Executor::Sequential => Ok((0..n).map(f).collect()),
            #[cfg(feature = "parallel")]
            Executor::Parallel { threads } => {
                use rayon::prelude::*;
                let run = || (0..n).into_par_iter().map(&f).collect();
                match threads {
                    None => Ok(run()),
                    Some(t) => {
                        let pool = rayon::ThreadPoolBuilder::new()
                            .num_threads(t)
                            .build()
                            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
                        Ok(pool.install(run))
                    }
                }
            }
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    /// Outage events (outage estimates only).
    pub outage_count: Option<u64>,
}

impl MCEstimate {
    pub fn proportion(count: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = count as f64 / n;
        Self { mean: p, stderr: (p * (1.0 - p) / n).sqrt(), trials, outage_count: Some(count) }
    }

    pub fn from_sums(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        Self { mean, stderr: (var / n).sqrt(), trials, outage_count: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    outages: u64,
    rate_sum: f64,
    rate_sq: f64,
}

impl Tally {
    fn push(&mut self, rate: f64, outage: bool) {
        self.outages += outage as u64;
        self.rate_sum += rate;
        self.rate_sq += rate * rate;
    }

    fn merge(&mut self, other: &Tally) {
        self.outages += other.outages;
        self.rate_sum += other.rate_sum;
        self.rate_sq += other.rate_sq;
    }
}

/// Per-point constants shared by all trials.
#[derive(Debug, Clone)]
struct PointSetup {
    budgets: Vec<LinkBudget>,
    target_rate: f64,
    constant_rsi: f64,
    linear_rsi: f64,
}

impl PointSetup {
    fn new(cfg: &ScenarioConfig, pairs: usize) -> Result<Self> {
        let budgets = cfg.link_budgets()?.into_iter().take(pairs).collect();
        Ok(Self {
            budgets,
            target_rate: cfg.target_rate,
            constant_rsi: constant_rsi_model(cfg).normalized(cfg.tx_power_w, cfg.noise_w),
            linear_rsi: linear_rsi_model(cfg).normalized(cfg.tx_power_w, cfg.noise_w),
        })
    }
}

pub fn constant_rsi_model(cfg: &ScenarioConfig) -> RsiModel {
    match cfg.rsi_model {
        m @ RsiModel::Constant { .. } => m,
        _ => RsiModel::Constant { dbm: DEFAULT_CONSTANT_RSI_DBM },
    }
}

pub fn linear_rsi_model(cfg: &ScenarioConfig) -> RsiModel {
    match cfg.rsi_model {
        m @ RsiModel::Linear { .. } => m,
        _ => RsiModel::Linear { lambda: DEFAULT_LINEAR_RSI },
    }
}

/// Rate of one pair under `mode`, in nats/s/Hz.
pub fn pair_rate(mode: Mode, terms: &CascadeTerms, budget: &LinkBudget, variance: f64, rsi: f64) -> f64 {
    match mode {
        Mode::FlexD => flexd_direction(0, &SinrSet::evaluate(terms, budget, variance, rsi)).rate,
        Mode::Hd => half_duplex_rate(crate::link::exact_sinr(terms, budget, Direction::Forward)),
        Mode::FdConst | Mode::FdLinear => {
            let f = fd_sinr_with(terms, budget, Direction::Forward, rsi);
            let r = fd_sinr_with(terms, budget, Direction::Reverse, rsi);
            f.ln_1p().min(r.ln_1p())
        }
    }
}

fn mode_rsi(mode: Mode, setup: &PointSetup) -> f64 {
    match mode {
        Mode::FdLinear => setup.linear_rsi,
        Mode::FdConst => setup.constant_rsi,
        _ => 0.0,
    }
}

/// Master seed feeding `mode`'s channels. With CRN every mode shares the
/// scenario seed; otherwise each baseline gets its own derived seed.
pub fn mode_seed(seed: u64, mode: Mode, crn: bool) -> u64 {
    if crn || mode == Mode::FlexD {
        seed
    } else {
        derive_seed(seed, 0x4d4f_4445_0000 + mode as u64)
    }
}

/// Outage and rate estimates of one (point, mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointEstimate {
    pub outage: MCEstimate,
    pub rate: MCEstimate,
}

/// Runs `trials` trials of every mode over scenarios `points`, which must
/// share an element count. Returns estimates indexed `[point][mode]`.
pub fn run_batch(
    model: &CorrelationModel,
    points: &[ScenarioConfig],
    modes: &[Mode],
    trials: u64,
    crn: bool,
    pairs: PairSelection,
    executor: &Executor,
) -> Result<Vec<Vec<PointEstimate>>> {
    let first = points.first().ok_or_else(|| Error::Usage("no sweep points".into()))?;
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if modes.is_empty() {
        return Err(Error::Usage("no modes selected".into()));
    }
    if points.iter().any(|p| p.elements != model.elements()) {
        return Err(Error::Configuration("batch points must match the correlation model size".into()));
    }
    if modes.iter().any(|m| m.is_full_duplex()) && points.iter().any(|p| !p.reciprocal) {
        return Err(Error::Configuration("full-duplex modes require `reciprocal: true`".into()));
    }
    let active = pairs.active_pairs(first).min(first.pairs);
    let setups = points.iter().map(|p| PointSetup::new(p, active)).collect::<Result<Vec<_>>>()?;
    let users = 2 * active;
    let reciprocal = first.reciprocal;
    let variance = model.variance;

    // Modes sharing a master seed share one draw per trial.
    let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
    for (i, &m) in modes.iter().enumerate() {
        let seed = mode_seed(first.seed, m, crn);
        match groups.iter_mut().find(|g| g.0 == seed) {
            Some(g) => g.1.push(i),
            None => groups.push((seed, vec![i])),
        }
    }

    let n_modes = modes.len();
    let blocks = trials.div_ceil(BLOCK_TRIALS) as usize;
    let run_block = |b: usize| {
        let mut tallies = vec![Tally::default(); setups.len() * n_modes];
        let mut buf = SampleBuffer::default();
        let mut realization: Option<ChannelRealization> = None;
        let mut terms = vec![CascadeTerms::default(); active];
        let start = b as u64 * BLOCK_TRIALS;
        let end = (start + BLOCK_TRIALS).min(trials);
        for trial in start..end {
            for (seed, members) in &groups {
                let rz = match realization.as_mut() {
                    Some(r) => {
                        r.redraw(model, *seed, trial, &mut buf);
                        r
                    }
                    None => realization.insert(ChannelRealization::sample(model, users, reciprocal, *seed, trial, &mut buf)),
                };
                for (k, t) in terms.iter_mut().enumerate() {
                    *t = CascadeTerms::compute(rz, k);
                }
                for (p, setup) in setups.iter().enumerate() {
                    for &mi in members {
                        let mode = modes[mi];
                        let rsi = mode_rsi(mode, setup);
                        let rate = terms
                            .iter()
                            .zip(&setup.budgets)
                            .map(|(t, bud)| pair_rate(mode, t, bud, variance, rsi))
                            .fold(f64::NEG_INFINITY, f64::max);
                        tallies[p * n_modes + mi].push(rate, rate <= setup.target_rate);
                    }
                }
            }
        }
        tallies
    };
    let per_block = executor.map_blocks(blocks, run_block)?;
    let mut total = vec![Tally::default(); setups.len() * n_modes];
    for block in &per_block {
        for (acc, t) in total.iter_mut().zip(block) {
            acc.merge(t);
        }
    }
    Ok((0..setups.len())
        .map(|p| {
            (0..n_modes)
                .map(|m| {
                    let t = &total[p * n_modes + m];
                    PointEstimate {
                        outage: MCEstimate::proportion(t.outages, trials),
                        rate: MCEstimate::from_sums(t.rate_sum, t.rate_sq, trials),
                    }
                })
                .collect()
        })
        .collect())
}

/// One scenario, one mode.
pub fn run_point(
    cfg: &ScenarioConfig,
    model: &CorrelationModel,
    mode: Mode,
    trials: u64,
    pairs: PairSelection,
    executor: &Executor,
) -> Result<PointEstimate> {
    Ok(run_batch(model, std::slice::from_ref(cfg), &[mode], trials, true, pairs, executor)?[0][0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub trials: u64,
    pub modes: Vec<Mode>,
    pub crn: bool,
    pub pairs: PairSelection,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::invalid("grid", "must not be empty"));
        }
        let increasing = self.grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("grid", "must be strictly monotone"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.modes.is_empty() {
            return Err(Error::invalid("modes", "select at least one mode"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub value: f64,
    pub tx_power_w: f64,
    pub interferer_power_w: f64,
    pub outage: MCEstimate,
    pub rate: MCEstimate,
    pub ee: Option<f64>,
    /// Closed-form network outage (FlexD only).
    pub analytic: Option<f64>,
    /// High-power floor (FlexD only).
    pub asymptotic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageCurve {
    pub mode: Mode,
    pub variable: SweepVariable,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub curves: Vec<OutageCurve>,
    pub clamp: ClampTally,
}

/// Closed-form network outage and floor of `cfg` restricted to `pairs`.
pub fn analytic_columns(cfg: &ScenarioConfig, model: &CorrelationModel, pairs: PairSelection, clamp: &mut ClampTally) -> Result<(f64, f64)> {
    let n = pairs.active_pairs(cfg);
    let budgets: Vec<_> = cfg.link_budgets()?.into_iter().take(n).collect();
    let outage = analytics::network_outage(&budgets, &model.moments, cfg.target_rate)?;
    clamp.add(&outage);
    let tau = cfg.threshold();
    let asym: Vec<_> = budgets.iter().map(|b| AsymptoticParams::from_budget(cfg, b, &model.moments, tau)).collect();
    let floor = if cfg.tx_power_w > 0.0 { analytics::asymptotic_outage(&asym)? } else { f64::NAN };
    Ok((outage.value, floor))
}

/// `P = Q` (dBm) at which the closed-form network outage equals `level`,
/// found by bisection on `[-100, 200]` dBm.
pub fn analytic_power_for_outage(cfg: &ScenarioConfig, model: &CorrelationModel, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", "must lie strictly between 0 and 1"));
    }
    let outage = |dbm: f64| -> Result<f64> {
        let c = SweepVariable::Power.apply(cfg, dbm)?;
        Ok(analytics::network_outage(&c.link_budgets()?, &model.moments, c.target_rate)?.value)
    };
    let (mut lo, mut hi) = (-100.0, 200.0);
    if outage(lo)? < level || outage(hi)? > level {
        return Err(Error::Configuration(format!("outage {level} is not reached between {lo} and {hi} dBm")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if outage(mid)? > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `points` powers spaced `spacing_db` apart and centred on `centre`.
pub fn centred_grid(centre: f64, points: usize, spacing_db: f64) -> Vec<f64> {
    let mid = (points as f64 - 1.0) / 2.0;
    (0..points).map(|i| centre + spacing_db * (i as f64 - mid)).collect()
}

pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, executor: &Executor) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.grid.iter().map(|&v| spec.variable.apply(cfg, v)).collect::<Result<Vec<_>>>()?;
    // Points sharing an element count share a model and channel draws.
    let mut batches: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match batches.iter_mut().find(|b| b.0 == p.elements) {
            Some(b) => b.1.push(i),
            None => batches.push((p.elements, vec![i])),
        }
    }
    let mut estimates: Vec<Option<Vec<PointEstimate>>> = vec![None; points.len()];
    let mut columns = vec![(None, None); points.len()];
    let mut clamp = ClampTally::default();
    for (_, idx) in &batches {
        let model = CorrelationModel::new(&points[idx[0]])?;
        let batch: Vec<_> = idx.iter().map(|&i| points[i].clone()).collect();
        let est = run_batch(&model, &batch, &spec.modes, spec.trials, spec.crn, spec.pairs, executor)?;
        for (&i, e) in idx.iter().zip(est) {
            estimates[i] = Some(e);
            if spec.modes.contains(&Mode::FlexD) {
                let (a, f) = analytic_columns(&points[i], &model, spec.pairs, &mut clamp)?;
                columns[i] = (Some(a), Some(f).filter(|v: &f64| v.is_finite()));
            }
        }
    }
    clamp.check()?;
    let curves = spec
        .modes
        .iter()
        .enumerate()
        .map(|(mi, &mode)| {
            let pts = points
                .iter()
                .zip(&spec.grid)
                .enumerate()
                .map(|(i, (p, &value))| {
                    let e = estimates[i].as_ref().expect("every point estimated")[mi];
                    let ee = analytics::energy_efficiency(e.rate.mean, p.tx_power_w, mode).ok();
                    let (analytic, asymptotic) = if mode == Mode::FlexD { columns[i] } else { (None, None) };
                    CurvePoint {
                        value,
                        tx_power_w: p.tx_power_w,
                        interferer_power_w: p.interferer_power_w,
                        outage: e.outage,
                        rate: e.rate,
                        ee,
                        analytic,
                        asymptotic,
                    }
                })
                .collect();
            OutageCurve { mode, variable: spec.variable, points: pts }
        })
        .collect();
    Ok(SweepResult { curves, clamp })
}
