//! RIS phase alignment and per-pair SINRs.
//!
//! Direction `Forward` is `U_k → U_k'` (the pair's first user transmits),
//! `Reverse` is `U_k' → U_k`.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{phase, ChannelRealization};
use crate::error::{Error, Result};
use crate::scenario::{pair_users, LinkBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    /// `(transmitter, receiver)` user indices of `pair` in this direction.
    pub fn endpoints(self, pair: usize) -> (usize, usize) {
        let (k, kp) = pair_users(pair);
        match self {
            Direction::Forward => (k, kp),
            Direction::Reverse => (kp, k),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }
}

/// `ψ_m = θ_{tx,m} + θ_{m,rx}` for the given direction.
pub fn ris_phases(real: &ChannelRealization, pair: usize, dir: Direction) -> Vec<f64> {
    let (tx, rx) = dir.endpoints(pair);
    real.user_to_ris(tx)
        .iter()
        .zip(real.ris_to_user(rx))
        .map(|(&a, &b)| phase(a) + phase(b))
        .collect()
}

/// Cascade sum `Σ_m h_{tx,m} e^{jψ_m} h_{m,rx}` for an arbitrary phase vector.
pub fn cascade(real: &ChannelRealization, pair: usize, dir: Direction, psi: &[f64]) -> Complex64 {
    let (tx, rx) = dir.endpoints(pair);
    real.user_to_ris(tx)
        .iter()
        .zip(real.ris_to_user(rx))
        .zip(psi)
        .map(|((&a, &b), &p)| a * Complex64::from_polar(1.0, p) * b)
        .sum()
}

/// Power-independent per-direction terms of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DirectionTerms {
    /// Aligned cascade amplitude `A = Σ α_{tx,m} α_{m,rx}`.
    pub gain: f64,
    /// Interference cascade `B = Σ β_m α_{m,rx} e^{−j(φ_m − θ_{tx,m})}`.
    pub interference: Complex64,
    /// `Σ α_{m,rx}²`, the receiver's statistical interference weight.
    pub rx_energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CascadeTerms {
    pub forward: DirectionTerms,
    pub reverse: DirectionTerms,
}

impl CascadeTerms {
    pub fn compute(real: &ChannelRealization, pair: usize) -> Self {
        Self {
            forward: direction_terms(real, pair, Direction::Forward),
            reverse: direction_terms(real, pair, Direction::Reverse),
        }
    }

    pub fn get(&self, dir: Direction) -> &DirectionTerms {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.reverse,
        }
    }
}

fn direction_terms(real: &ChannelRealization, pair: usize, dir: Direction) -> DirectionTerms {
    let (tx, rx) = dir.endpoints(pair);
    let mut gain = 0.0;
    let mut rx_energy = 0.0;
    let mut interference = Complex64::default();
    for ((&h_tx, &h_rx), &g) in real.user_to_ris(tx).iter().zip(real.ris_to_user(rx)).zip(real.interferer()) {
        let a_tx = h_tx.norm();
        let a_rx = h_rx.norm();
        gain += a_tx * a_rx;
        rx_energy += a_rx * a_rx;
        // g·e^{jθ_tx} = g·conj(h_tx)/|h_tx|.
        if a_tx > 0.0 {
            interference += g * h_tx.conj() * (a_rx / a_tx);
        }
    }
    DirectionTerms { gain, interference, rx_energy }
}

/// Interference scale `η` seen by the receiver of `dir`.
pub fn interference_scale(budget: &LinkBudget, dir: Direction) -> f64 {
    match dir {
        Direction::Forward => budget.interference_at_partner,
        Direction::Reverse => budget.interference_at_first,
    }
}

/// `γ = γ̄A²/(η|B|² + 1)`.
pub fn exact_sinr(terms: &CascadeTerms, budget: &LinkBudget, dir: Direction) -> f64 {
    let t = terms.get(dir);
    budget.mean_snr * t.gain * t.gain / (interference_scale(budget, dir) * t.interference.norm_sqr() + 1.0)
}

/// `γ̂ = γ̄A²/(ησ²Σα²_rx + 1)`, using only interferer statistics.
pub fn estimated_sinr(terms: &CascadeTerms, budget: &LinkBudget, dir: Direction, variance: f64) -> f64 {
    let t = terms.get(dir);
    budget.mean_snr * t.gain * t.gain / (interference_scale(budget, dir) * variance * t.rx_energy + 1.0)
}

/// Full-duplex SINR of `dir` with normalised RSI `rsi` added to the
/// denominator. Both directions share one phase vector, which aligns both
/// only under reciprocity.
pub fn fd_sinr_with(terms: &CascadeTerms, budget: &LinkBudget, dir: Direction, rsi: f64) -> f64 {
    let t = terms.get(dir);
    budget.mean_snr * t.gain * t.gain / (interference_scale(budget, dir) * t.interference.norm_sqr() + rsi + 1.0)
}

pub fn fd_sinr(
    real: &ChannelRealization,
    terms: &CascadeTerms,
    budget: &LinkBudget,
    rsi: f64,
) -> Result<(f64, f64)> {
    if !real.is_reciprocal() {
        return Err(Error::Configuration("full-duplex SINR requires reciprocal channels".into()));
    }
    Ok((
        fd_sinr_with(terms, budget, Direction::Forward, rsi),
        fd_sinr_with(terms, budget, Direction::Reverse, rsi),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SinrSet {
    pub exact_forward: f64,
    pub exact_reverse: f64,
    pub estimated_forward: f64,
    pub estimated_reverse: f64,
    pub fd_forward: f64,
    pub fd_reverse: f64,
}

impl SinrSet {
    /// All SINRs of one pair. `rsi` is normalised by the noise power.
    pub fn evaluate(terms: &CascadeTerms, budget: &LinkBudget, variance: f64, rsi: f64) -> Self {
        use Direction::*;
        Self {
            exact_forward: exact_sinr(terms, budget, Forward),
            exact_reverse: exact_sinr(terms, budget, Reverse),
            estimated_forward: estimated_sinr(terms, budget, Forward, variance),
            estimated_reverse: estimated_sinr(terms, budget, Reverse, variance),
            fd_forward: fd_sinr_with(terms, budget, Forward, rsi),
            fd_reverse: fd_sinr_with(terms, budget, Reverse, rsi),
        }
    }

    pub fn exact(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Forward => self.exact_forward,
            Direction::Reverse => self.exact_reverse,
        }
    }

    pub fn estimated(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Forward => self.estimated_forward,
            Direction::Reverse => self.estimated_reverse,
        }
    }
}
