//! Slot-based buffered traffic for one user pair.
//!
//! Backlogs are fluid FIFO queues counted in fixed-point quanta of
//! `2⁻³²` nats, so arrivals, service and remaining backlog balance exactly.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, SampleBuffer};
use crate::correlation::CorrelationModel;
use crate::error::{Error, Result};
use crate::link::{CascadeTerms, SinrSet};
use crate::mathkit::{derive_seed, RngStream};
use crate::montecarlo::{constant_rsi_model, linear_rsi_model, Executor, BLOCK_TRIALS};
use crate::scenario::ScenarioConfig;
use crate::scheduler::{half_duplex_rate, Mode};

/// Quanta per nat.
pub const QUANTA_PER_NAT: f64 = 4_294_967_296.0;

const ARRIVAL_TAG: u64 = 0x5452_4146;

fn to_quanta(nats: f64) -> u64 {
    // `as` saturates, so an infinite capacity becomes u64::MAX.
    (nats * QUANTA_PER_NAT).floor() as u64
}

fn to_nats(q: u64) -> f64 {
    q as f64 / QUANTA_PER_NAT
}

/// How a full-duplex slot's two served amounts become one throughput.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdDelivery {
    /// Two-way throughput: the smaller of the two directions.
    #[default]
    TwoWayMin,
    /// Both directions added.
    Sum,
}

impl std::str::FromStr for FdDelivery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" | "two-way-min" => Ok(FdDelivery::TwoWayMin),
            "sum" => Ok(FdDelivery::Sum),
            other => Err(Error::Usage(format!("FD delivery must be min|sum, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficConfig {
    /// Poisson packet arrivals per user per slot.
    pub arrival_rate: f64,
    /// Nats per packet.
    pub payload: f64,
    pub slots: u64,
    pub target_rates: Vec<f64>,
    /// Slots with nothing to send count as outages.
    pub counts_idle: bool,
    /// FlexD hands the slot to the other user when the winner is empty.
    pub empty_buffer_fallback: bool,
    pub fd_delivery: FdDelivery,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            arrival_rate: 0.8,
            payload: 1.0,
            slots: 100_000,
            target_rates: (1..=20).map(|i| i as f64 / 10.0).collect(),
            counts_idle: true,
            empty_buffer_fallback: true,
            fd_delivery: FdDelivery::default(),
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.arrival_rate >= 0.0 && self.arrival_rate.is_finite()) {
            return Err(Error::invalid("arrival_rate", "must be finite and non-negative"));
        }
        if !(self.payload > 0.0 && self.payload.is_finite()) {
            return Err(Error::invalid("payload", "must be positive"));
        }
        if self.slots == 0 {
            return Err(Error::invalid("slots", "must be at least 1"));
        }
        if self.target_rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("target_rates", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Packet {
    arrival_slot: u64,
    remaining: u64,
}

/// Backlogs of users `k` and `k'`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BufferState {
    queues: [VecDeque<Packet>; 2],
    backlog: [u64; 2],
    slot: u64,
    arrived: u64,
    served: u64,
    departures: u64,
    delay_sum: u64,
}

impl BufferState {
    pub fn backlog(&self) -> [f64; 2] {
        [to_nats(self.backlog[0]), to_nats(self.backlog[1])]
    }

    /// Adds `packets` arrivals of `payload` nats to `user` at the current slot.
    pub fn enqueue(&mut self, user: usize, packets: u64, payload: f64) {
        let size = to_quanta(payload);
        for _ in 0..packets {
            self.queues[user].push_back(Packet { arrival_slot: self.slot, remaining: size });
        }
        self.backlog[user] += packets * size;
        self.arrived += packets * size;
    }

    fn serve(&mut self, user: usize, mut amount: u64) -> u64 {
        amount = amount.min(self.backlog[user]);
        let total = amount;
        while amount > 0 {
            let front = self.queues[user].front_mut().expect("backlog implies a queued packet");
            if front.remaining <= amount {
                amount -= front.remaining;
                self.delay_sum += self.slot - front.arrival_slot;
                self.departures += 1;
                self.queues[user].pop_front();
            } else {
                front.remaining -= amount;
                amount = 0;
            }
        }
        self.backlog[user] -= total;
        self.served += total;
        total
    }

    /// `arrived = served + backlog`, checked in integer quanta.
    pub fn is_conserved(&self) -> bool {
        self.arrived == self.served + self.backlog[0] + self.backlog[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotOutcome {
    pub served: [f64; 2],
    /// Users that transmitted this slot.
    pub transmitted: [bool; 2],
    /// No data was queued at service time.
    pub idle: bool,
}

impl SlotOutcome {
    /// Throughput of the slot; only full duplex serves both users.
    pub fn delivered(&self, fd: FdDelivery) -> f64 {
        match (self.transmitted, fd) {
            ([true, true], FdDelivery::TwoWayMin) => self.served[0].min(self.served[1]),
            _ => self.served[0] + self.served[1],
        }
    }
}

/// One slot: arrivals for both users, then service under `mode`.
/// `capacities` are nats for `k → k'` and `k' → k`.
pub fn step<R: Rng + ?Sized>(
    state: &mut BufferState,
    capacities: [f64; 2],
    mode: Mode,
    cfg: &TrafficConfig,
    rng: &mut R,
) -> SlotOutcome {
    // Fixed draw order keeps arrivals common to every mode.
    let arrivals = if cfg.arrival_rate > 0.0 {
        let poisson = Poisson::new(cfg.arrival_rate).expect("validated rate");
        [poisson.sample(rng) as u64, poisson.sample(rng) as u64]
    } else {
        [0, 0]
    };
    let coin: bool = rng.random();
    state.enqueue(0, arrivals[0], cfg.payload);
    state.enqueue(1, arrivals[1], cfg.payload);
    let caps = [to_quanta(capacities[0].max(0.0)), to_quanta(capacities[1].max(0.0))];
    let b = state.backlog;
    let idle = b[0] == 0 && b[1] == 0;
    let mut transmitted = [false; 2];
    match mode {
        Mode::Hd => {
            let chosen = match (b[0] > 0, b[1] > 0) {
                (true, true) => Some(if coin { 0 } else { 1 }),
                (true, false) => Some(0),
                (false, true) => Some(1),
                (false, false) => None,
            };
            if let Some(u) = chosen {
                transmitted[u] = true;
            }
        }
        Mode::FlexD => {
            let score = [caps[0].min(b[0]), caps[1].min(b[1])];
            let mut u = if score[0] >= score[1] { 0 } else { 1 };
            if cfg.empty_buffer_fallback && b[u] == 0 {
                u = 1 - u;
            }
            transmitted[u] = true;
        }
        Mode::FdConst | Mode::FdLinear => transmitted = [b[0] > 0, b[1] > 0],
    }
    let mut served = [0.0; 2];
    for u in 0..2 {
        if transmitted[u] {
            served[u] = to_nats(state.serve(u, caps[u]));
        }
    }
    state.slot += 1;
    SlotOutcome { served, transmitted, idle }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrafficReport {
    pub mode: Mode,
    pub target_rates: Vec<f64>,
    /// Slot-outage per target rate.
    pub outage: Vec<f64>,
    /// Mean per-slot throughput under the configured FD delivery rule.
    pub mean_delivered: f64,
    /// Mean nats served per slot, both users.
    pub mean_served: f64,
    /// Mean slots from arrival to full departure.
    pub mean_delay: f64,
    /// Mean total backlog after service, nats.
    pub mean_backlog: f64,
    pub idle_slots: u64,
    pub arrived: f64,
    pub served: f64,
    pub final_backlog: f64,
    pub conserved: bool,
}

/// Per-direction capacities of pair 0 under `mode`.
pub fn mode_capacities(mode: Mode, sinrs: &SinrSet) -> [f64; 2] {
    match mode {
        Mode::Hd | Mode::FlexD => [half_duplex_rate(sinrs.exact_forward), half_duplex_rate(sinrs.exact_reverse)],
        Mode::FdConst | Mode::FdLinear => [sinrs.fd_forward.ln_1p(), sinrs.fd_reverse.ln_1p()],
    }
}

/// Runs every mode over the same fading and arrival sequences.
pub fn run_traffic(
    scenario: &ScenarioConfig,
    model: &CorrelationModel,
    cfg: &TrafficConfig,
    modes: &[Mode],
    executor: &Executor,
) -> Result<Vec<TrafficReport>> {
    cfg.validate()?;
    if modes.is_empty() {
        return Err(Error::Usage("no modes selected".into()));
    }
    if modes.iter().any(|m| m.is_full_duplex()) && !scenario.reciprocal {
        return Err(Error::Configuration("full-duplex modes require `reciprocal: true`".into()));
    }
    let budget = scenario.link_budget(0)?;
    let rsi: Vec<f64> = modes
        .iter()
        .map(|m| match m {
            Mode::FdConst => constant_rsi_model(scenario).normalized(scenario.tx_power_w, scenario.noise_w),
            Mode::FdLinear => linear_rsi_model(scenario).normalized(scenario.tx_power_w, scenario.noise_w),
            _ => 0.0,
        })
        .collect();
    let variance = model.variance;
    let blocks = cfg.slots.div_ceil(BLOCK_TRIALS) as usize;
    let caps_by_block = executor.map_blocks(blocks, |b| {
        let mut buf = SampleBuffer::default();
        let start = b as u64 * BLOCK_TRIALS;
        let end = (start + BLOCK_TRIALS).min(cfg.slots);
        let mut rz = ChannelRealization::sample(model, 2, scenario.reciprocal, scenario.seed, start, &mut buf);
        let mut out = Vec::with_capacity(((end - start) as usize) * modes.len());
        for slot in start..end {
            rz.redraw(model, scenario.seed, slot, &mut buf);
            let terms = CascadeTerms::compute(&rz, 0);
            for (&m, &r) in modes.iter().zip(&rsi) {
                out.push(mode_capacities(m, &SinrSet::evaluate(&terms, &budget, variance, r)));
            }
        }
        out
    })?;
    let arrival_seed = derive_seed(scenario.seed, ARRIVAL_TAG);
    let mut reports = Vec::with_capacity(modes.len());
    for (mi, &mode) in modes.iter().enumerate() {
        let mut state = BufferState::default();
        let mut delivered = Vec::with_capacity(cfg.slots as usize);
        let mut backlog_sum = 0.0;
        let mut idle_slots = 0;
        let mut slot = 0u64;
        for block in &caps_by_block {
            for caps in block.chunks_exact(modes.len()) {
                let mut rng = RngStream::new(arrival_seed, slot);
                let o = step(&mut state, caps[mi], mode, cfg, &mut rng);
                idle_slots += o.idle as u64;
                let b = state.backlog();
                backlog_sum += b[0] + b[1];
                delivered.push((o.delivered(cfg.fd_delivery), o.idle));
                slot += 1;
            }
        }
        let counted: Vec<f64> = delivered.iter().filter(|d| cfg.counts_idle || !d.1).map(|d| d.0).collect();
        let outage = cfg
            .target_rates
            .iter()
            .map(|&rt| {
                if counted.is_empty() {
                    1.0
                } else {
                    counted.iter().filter(|&&d| d < rt).count() as f64 / counted.len() as f64
                }
            })
            .collect();
        let n = cfg.slots as f64;
        reports.push(TrafficReport {
            mode,
            target_rates: cfg.target_rates.clone(),
            outage,
            mean_delivered: delivered.iter().map(|d| d.0).sum::<f64>() / n,
            mean_served: to_nats(state.served) / n,
            mean_delay: if state.departures > 0 { state.delay_sum as f64 / state.departures as f64 } else { 0.0 },
            mean_backlog: backlog_sum / n,
            idle_slots,
            arrived: to_nats(state.arrived),
            served: to_nats(state.served),
            final_backlog: to_nats(state.backlog[0] + state.backlog[1]),
            conserved: state.is_conserved(),
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioFile;
    use proptest::prelude::*;

    fn quiet() -> TrafficConfig {
        TrafficConfig { arrival_rate: 0.0, ..TrafficConfig::default() }
    }

    fn loaded(state: &mut BufferState, b: [f64; 2]) {
        for u in 0..2 {
            state.enqueue(u, 1, b[u]);
        }
    }

    #[test]
    fn empty_buffers_serve_nothing() {
        let mut s = BufferState::default();
        let mut rng = RngStream::new(1, 0);
        for mode in Mode::ALL {
            let o = step(&mut s, [5.0, 5.0], mode, &quiet(), &mut rng);
            assert_eq!(o.delivered(FdDelivery::Sum), 0.0);
            assert!(o.idle);
        }
        let mut rng = RngStream::new(1, 0);
        let busy = TrafficConfig { arrival_rate: 3.0, ..TrafficConfig::default() };
        let o = step(&mut s, [0.0, 0.0], Mode::FdConst, &busy, &mut rng);
        assert_eq!(o.delivered(FdDelivery::Sum), 0.0);
        assert!(s.backlog()[0] + s.backlog()[1] > 0.0);
    }

    #[test]
    fn infinite_capacity_clears_backlog() {
        for mode in [Mode::FdConst, Mode::FdLinear] {
            let mut s = BufferState::default();
            loaded(&mut s, [2.5, 4.0]);
            let o = step(&mut s, [f64::INFINITY; 2], mode, &quiet(), &mut RngStream::new(0, 0));
            assert_eq!(o.served, [2.5, 4.0]);
        }
        let mut s = BufferState::default();
        loaded(&mut s, [2.5, 0.0]);
        let o = step(&mut s, [f64::INFINITY; 2], Mode::Hd, &quiet(), &mut RngStream::new(0, 0));
        assert_eq!(o.served, [2.5, 0.0]);
    }

    #[test]
    fn flexd_picks_larger_min() {
        let mut s = BufferState::default();
        loaded(&mut s, [5.0, 1.0]);
        let o = step(&mut s, [2.0, 3.0], Mode::FlexD, &quiet(), &mut RngStream::new(0, 0));
        assert_eq!(o.transmitted, [true, false]);
        assert_eq!(o.served, [2.0, 0.0]);
    }

    #[test]
    fn flexd_falls_back_from_empty_winner() {
        let mut s = BufferState::default();
        loaded(&mut s, [0.0, 1.0]);
        // Tie at zero: user k wins but has nothing queued.
        let o = step(&mut s, [1.0, 0.0], Mode::FlexD, &quiet(), &mut RngStream::new(0, 0));
        assert_eq!(o.transmitted, [false, true]);
        let mut s = BufferState::default();
        loaded(&mut s, [0.0, 1.0]);
        let strict = TrafficConfig { empty_buffer_fallback: false, ..quiet() };
        let o = step(&mut s, [1.0, 0.0], Mode::FlexD, &strict, &mut RngStream::new(0, 0));
        assert_eq!(o.transmitted, [true, false]);
    }

    #[test]
    fn fd_delivery_rules() {
        let o = SlotOutcome { served: [0.5, 2.0], transmitted: [true, true], idle: false };
        assert_eq!(o.delivered(FdDelivery::TwoWayMin), 0.5);
        assert_eq!(o.delivered(FdDelivery::Sum), 2.5);
        let hd = SlotOutcome { served: [0.0, 2.0], transmitted: [false, true], idle: false };
        assert_eq!(hd.delivered(FdDelivery::TwoWayMin), 2.0);
    }

    #[test]
    fn fifo_delay_counts_full_departures() {
        let mut s = BufferState::default();
        let cfg = quiet();
        s.enqueue(0, 2, 1.0);
        let mut rng = RngStream::new(0, 0);
        step(&mut s, [1.5, 0.0], Mode::FdConst, &cfg, &mut rng);
        assert_eq!((s.departures, s.delay_sum), (1, 0));
        step(&mut s, [1.5, 0.0], Mode::FdConst, &cfg, &mut rng);
        assert_eq!((s.departures, s.delay_sum), (2, 1));
        assert!(s.is_conserved());
    }

    fn scenario() -> (ScenarioConfig, CorrelationModel) {
        let cfg = ScenarioConfig::from_file(&ScenarioFile::new(1, 16)).unwrap();
        let model = CorrelationModel::new(&cfg).unwrap();
        (cfg, model)
    }

    #[test]
    fn no_arrivals_means_full_outage() {
        let (cfg, model) = scenario();
        let t = TrafficConfig { arrival_rate: 0.0, slots: 300, ..TrafficConfig::default() };
        for r in run_traffic(&cfg, &model, &t, &Mode::ALL, &Executor::Sequential).unwrap() {
            assert!(r.outage.iter().all(|&o| o == 1.0));
            assert_eq!(r.mean_delivered, 0.0);
        }
    }

    #[test]
    fn saturated_flexd_serves_best_direction() {
        let (cfg, model) = scenario();
        let cfg = cfg.with_powers(cfg.tx_power_w * 1e4, 0.0);
        let t = TrafficConfig { arrival_rate: 1e3, slots: 200, ..TrafficConfig::default() };
        let r = run_traffic(&cfg, &model, &t, &[Mode::FlexD], &Executor::Sequential).unwrap();
        let budget = cfg.link_budget(0).unwrap();
        let mut buf = SampleBuffer::default();
        let mut expect = 0.0;
        for slot in 0..200 {
            let rz = ChannelRealization::sample(&model, 2, true, cfg.seed, slot, &mut buf);
            let s = SinrSet::evaluate(&CascadeTerms::compute(&rz, 0), &budget, model.variance, 0.0);
            expect += crate::scheduler::flexd_rate(&s);
        }
        let got = r[0].mean_delivered;
        // Quantisation floors each slot by < 2⁻³² nats.
        assert!((got - expect / 200.0).abs() < 1e-9, "{got} vs {}", expect / 200.0);
        assert!(r[0].conserved);
    }

    #[test]
    fn idle_slots_can_be_excluded() {
        let (cfg, model) = scenario();
        let base = TrafficConfig { arrival_rate: 0.05, slots: 2000, ..TrafficConfig::default() };
        let with = run_traffic(&cfg, &model, &base, &[Mode::Hd], &Executor::Sequential).unwrap();
        let without = TrafficConfig { counts_idle: false, ..base };
        let wo = run_traffic(&cfg, &model, &without, &[Mode::Hd], &Executor::Sequential).unwrap();
        assert!(with[0].idle_slots > 0);
        for (a, b) in with[0].outage.iter().zip(&wo[0].outage) {
            assert!(b <= a);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn conservation_and_single_transmitter(
            lam in 0.0f64..4.0,
            caps in proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..120),
            seed in 0u64..1000,
        ) {
            let cfg = TrafficConfig { arrival_rate: lam, ..TrafficConfig::default() };
            for mode in Mode::ALL {
                let mut s = BufferState::default();
                for (i, &(a, b)) in caps.iter().enumerate() {
                    let o = step(&mut s, [a, b], mode, &cfg, &mut RngStream::new(seed, i as u64));
                    if !mode.is_full_duplex() {
                        prop_assert!(!(o.transmitted[0] && o.transmitted[1]));
                    }
                    prop_assert!(s.is_conserved());
                }
            }
        }

        #[test]
        fn outage_monotone_in_target(lam in 0.1f64..2.0) {
            let (cfg, model) = scenario();
            let t = TrafficConfig { arrival_rate: lam, slots: 400, ..TrafficConfig::default() };
            for r in run_traffic(&cfg, &model, &t, &Mode::ALL, &Executor::Sequential).unwrap() {
                prop_assert!(r.outage.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(r.conserved);
            }
        }
    }
}
