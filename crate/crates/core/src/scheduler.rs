//! FlexD direction choice, network pair selection and baseline rates.
//! Rates are in nats/s/Hz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{Direction, SinrSet};

/// Duplexing strategy evaluated by the simulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[serde(rename = "flexd")]
    FlexD,
    Hd,
    /// Full duplex with constant residual self-interference.
    FdConst,
    /// Full duplex with RSI proportional to transmit power.
    FdLinear,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::FlexD, Mode::Hd, Mode::FdConst, Mode::FdLinear];

    pub fn is_full_duplex(self) -> bool {
        matches!(self, Mode::FdConst | Mode::FdLinear)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::FlexD => "flexd",
            Mode::Hd => "hd",
            Mode::FdConst => "fd-const",
            Mode::FdLinear => "fd-linear",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Usage(format!("unknown mode `{s}` (expected flexd, hd, fd-const, fd-linear)")))
    }
}

/// `ln(1 + γ)/2`: one direction active per block.
pub fn half_duplex_rate(sinr: f64) -> f64 {
    sinr.ln_1p() * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDecision {
    pub pair: usize,
    pub direction: Direction,
    pub sinr: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkDecision {
    pub winner: usize,
    pub rate: f64,
    pub decisions: Vec<PairDecision>,
}

/// Picks the direction with the larger estimated SINR (ties go forward) and
/// reports the exact SINR of that direction.
pub fn flexd_direction(pair: usize, sinrs: &SinrSet) -> PairDecision {
    let direction = if sinrs.estimated_forward >= sinrs.estimated_reverse {
        Direction::Forward
    } else {
        Direction::Reverse
    };
    let sinr = sinrs.exact(direction);
    PairDecision { pair, direction, sinr, rate: half_duplex_rate(sinr) }
}

/// Highest-rate pair; the lowest index wins ties.
pub fn select_pair(decisions: Vec<PairDecision>) -> Result<NetworkDecision> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in decisions.iter().enumerate() {
        if best.is_none_or(|(_, r)| d.rate > r) {
            best = Some((i, d.rate));
        }
    }
    let (idx, rate) = best.ok_or_else(|| Error::Usage("no pairs to select from".into()))?;
    Ok(NetworkDecision { winner: decisions[idx].pair, rate, decisions })
}

/// Fixed `U_k → U_k'` half duplex.
pub fn hd_rate(sinrs: &SinrSet) -> f64 {
    half_duplex_rate(sinrs.exact_forward)
}

/// Two-way full duplex limited by the weaker direction.
pub fn fd_rate(sinrs: &SinrSet) -> f64 {
    sinrs.fd_forward.ln_1p().min(sinrs.fd_reverse.ln_1p())
}

pub fn flexd_rate(sinrs: &SinrSet) -> f64 {
    flexd_direction(0, sinrs).rate
}
