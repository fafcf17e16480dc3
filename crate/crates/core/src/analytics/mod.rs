//! Closed-form outage analysis.
//!
//! The per-pair SINR CDF models the aligned cascade `Z₁` as Gaussian
//! `N(μ, s)` (so `X = Z₁²` is folded-normal squared) and the interference
//! power `Y = |Z₂|²` as exponential with rate `ρ`:
//!
//! ```text
//! F(δ, ε, s, μ, ρ, τ) = Pr(δX/(εY + 1) < τ)
//!                     = Pr(|Z₁| ≤ t) + C·[erfc(√a(t − m)) + erfc(√a(t + m))]
//! ```
//!
//! with `t = √(τ/δ)`, `a = ρδ/(τε) + 1/(2s)`, `m = μ/(2sa)`. Each `C·erfc`
//! product is recombined as `pre·erfcx(x)·exp(−(t ∓ μ)²/(2s))`, which never
//! forms the overflowing factors `e^{ρ/ε}` or `e^{μ²/2s}`.

pub mod oracle;

use serde::Serialize;

use crate::correlation::Moments;
use crate::error::{Error, Result};
use crate::mathkit::{erf, erfc, erfcx, ln_erfc, MathError};
use crate::scenario::{LinkBudget, ScenarioConfig};
use crate::scheduler::Mode;

/// Maximum fraction of clamped closed-form evaluations tolerated by a run.
pub const MAX_CLAMP_RATE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageParams {
    /// Mean-SNR scale of the selected direction.
    pub delta: f64,
    /// Interference scale at the selected receiver.
    pub epsilon: f64,
    pub s: f64,
    pub mu: f64,
    pub rho: f64,
    pub tau: f64,
}

impl OutageParams {
    pub fn new(delta: f64, epsilon: f64, moments: &Moments, tau: f64) -> Self {
        Self { delta, epsilon, s: moments.s, mu: moments.mu, rho: moments.rho, tau }
    }

    fn check(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("s", self.s),
            ("mu", self.mu),
            ("rho", self.rho),
            ("tau", self.tau),
        ];
        for (name, v) in fields {
            if v.is_nan() || v < 0.0 || (v.is_infinite() && name != "tau") {
                return Err(MathError::Domain { function: name_of(name), value: v }.into());
            }
        }
        if self.s == 0.0 || self.rho == 0.0 {
            return Err(MathError::Domain { function: "cdf_f", value: self.s.min(self.rho) }.into());
        }
        Ok(())
    }
}

fn name_of(field: &str) -> &'static str {
    match field {
        "delta" => "cdf_f(delta)",
        "epsilon" => "cdf_f(epsilon)",
        "s" => "cdf_f(s)",
        "mu" => "cdf_f(mu)",
        "rho" => "cdf_f(rho)",
        _ => "cdf_f(tau)",
    }
}

/// A probability from the closed form, flagged when it had to be clamped
/// into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    pub clamped: bool,
}

impl Probability {
    fn clamp(raw: f64) -> Result<Self> {
        if !raw.is_finite() {
            return Err(MathError::Domain { function: "cdf_f", value: raw }.into());
        }
        let value = raw.clamp(0.0, 1.0);
        Ok(Self { value, clamped: value != raw })
    }
}

/// `ln(erfc(x)·e^{x²})` without overflow for either sign of `x`.
fn ln_erfcx(x: f64) -> f64 {
    if x >= 0.0 {
        erfcx(x).ln()
    } else {
        x * x + ln_erfc(x)
    }
}

/// `Pr(|Z| ≤ t)` for `Z ~ N(μ, s)`.
fn folded_mass_below(t: f64, mu: f64, s: f64) -> f64 {
    let root = (2.0 * s).sqrt();
    let l = (t - mu) / root;
    let n = (t + mu) / root;
    if l < 0.0 {
        0.5 * (libm::erfc(-l) - libm::erfc(n))
    } else {
        1.0 - 0.5 * libm::erfc(l) - 0.5 * libm::erfc(n)
    }
}

/// Per-pair outage CDF in the closed form.
pub fn cdf_f(p: &OutageParams) -> Result<Probability> {
    p.check()?;
    if p.tau == 0.0 {
        return Probability::clamp(0.0);
    }
    if p.tau.is_infinite() || p.delta == 0.0 {
        return Probability::clamp(1.0);
    }
    let t = (p.tau / p.delta).sqrt();
    let below = folded_mass_below(t, p.mu, p.s);
    if p.epsilon == 0.0 {
        return Probability::clamp(below);
    }
    let a = p.rho * p.delta / (p.tau * p.epsilon) + 0.5 / p.s;
    let root_a = a.sqrt();
    let m = p.mu / (2.0 * p.s * a);
    let pre = 0.5 / (2.0 * p.s * a).sqrt();
    let lower = root_a * (t - m);
    let upper = root_a * (t + m);
    let two_s = 2.0 * p.s;
    let term = |x: f64, centre: f64| (ln_erfcx(x) - centre * centre / two_s).exp();
    let correction = pre * (term(lower, t - p.mu) + term(upper, t + p.mu));
    Probability::clamp(below + correction)
}

/// The closed form evaluated term by term exactly as printed:
/// `1 + C(1 + erf((μ/s − D)/G)) + C·erfc((μ/s + D)/G) − ½erfc(L) − ½erfc(N)`.
///
/// Loses all precision once `C` overflows or the result is tiny; kept as a
/// reference for [`cdf_f`].
pub fn cdf_f_printed(p: &OutageParams) -> Result<f64> {
    p.check()?;
    let (d, e, s, mu, rho, tau) = (p.delta, p.epsilon, p.s, p.mu, p.rho, p.tau);
    let l = (tau.sqrt() - mu * d.sqrt()) / (2.0 * s * d).sqrt();
    let n = (tau.sqrt() + mu * d.sqrt()) / (2.0 * s * d).sqrt();
    let mix = 2.0 * s * rho * d + tau * e;
    let c = (tau * e).sqrt() / (2.0 * mix.sqrt())
        * (mu * mu * tau * e / (2.0 * s * mix) + rho / e - mu * mu / (2.0 * s)).exp();
    let dd = (mix / (s * tau * e)) * (tau / d).sqrt();
    let g = 2.0 * (mix / (2.0 * s * tau * e)).sqrt();
    let v = 1.0 + c * (1.0 + erf((mu / s - dd) / g)?) + c * erfc((mu / s + dd) / g)?
        - 0.5 * erfc(l)?
        - 0.5 * erfc(n)?;
    Ok(v)
}

/// Receiver selection used by the closed form: the pair's first user
/// transmits when the interference at it is at least that at its partner.
pub fn pair_params(budget: &LinkBudget, moments: &Moments, tau: f64) -> OutageParams {
    let epsilon = if budget.interference_at_first >= budget.interference_at_partner {
        budget.interference_at_partner
    } else {
        budget.interference_at_first
    };
    OutageParams::new(budget.mean_snr, epsilon, moments, tau)
}

pub fn pair_cdf(budget: &LinkBudget, moments: &Moments, tau: f64) -> Result<Probability> {
    cdf_f(&pair_params(budget, moments, tau))
}

/// Product of pair CDFs with clamp bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkOutage {
    pub value: f64,
    pub clamped: u32,
    pub evaluations: u32,
}

pub fn network_outage(budgets: &[LinkBudget], moments: &Moments, target_rate: f64) -> Result<NetworkOutage> {
    if budgets.is_empty() {
        return Err(Error::Usage("network outage needs at least one pair".into()));
    }
    let tau = (2.0 * target_rate).exp_m1();
    let mut out = NetworkOutage { value: 1.0, clamped: 0, evaluations: 0 };
    for b in budgets {
        let p = pair_cdf(b, moments, tau)?;
        out.value *= p.value;
        out.clamped += p.clamped as u32;
        out.evaluations += 1;
    }
    Ok(out)
}

/// Tallies clamp events across many closed-form evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClampTally {
    pub clamped: u64,
    pub evaluations: u64,
}

impl ClampTally {
    pub fn add(&mut self, n: &NetworkOutage) {
        self.clamped += n.clamped as u64;
        self.evaluations += n.evaluations as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.evaluations == 0 {
            0.0
        } else {
            self.clamped as f64 / self.evaluations as f64
        }
    }

    /// Fails loudly when more than [`MAX_CLAMP_RATE`] of evaluations clamped.
    pub fn check(&self) -> Result<()> {
        if self.rate() > MAX_CLAMP_RATE {
            Err(Error::ExcessiveClamping { clamped: self.clamped, evaluations: self.evaluations })
        } else {
            Ok(())
        }
    }
}

/// High-power parameters of one pair. `nu` and `interferer_term` enter only
/// through their ratio; with unit reference losses and `P = Q` they are the
/// transmitter's `d^α` and `d_IR^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticParams {
    pub nu: f64,
    pub interferer_term: f64,
    pub s: f64,
    pub mu: f64,
    pub rho: f64,
    pub tau: f64,
}

impl AsymptoticParams {
    /// Transmitter = the user farther from interference at its partner,
    /// i.e. the first user when `d_{R,k'} ≥ d_{R,k}`.
    pub fn from_budget(cfg: &ScenarioConfig, budget: &LinkBudget, moments: &Moments, tau: f64) -> Self {
        let tx_gain = if budget.d_ris_partner >= budget.d_first_ris { budget.first_gain } else { budget.partner_gain };
        let power_ratio = cfg.interferer_power_w / cfg.tx_power_w;
        Self {
            nu: power_ratio / tx_gain,
            interferer_term: 1.0 / budget.interferer_gain,
            s: moments.s,
            mu: moments.mu,
            rho: moments.rho,
            tau,
        }
    }
}

/// `C̃(1 + erf(μ/(sG̃))) + C̃·erfc(μ/(sG̃))`.
pub fn asymptotic_cdf(p: &AsymptoticParams) -> Result<f64> {
    for v in [p.nu, p.interferer_term, p.s, p.mu, p.rho, p.tau] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(MathError::Domain { function: "asymptotic_cdf", value: v }.into());
        }
    }
    if p.tau == 0.0 {
        return Ok(0.0);
    }
    let (s, mu) = (p.s, p.mu);
    let mix = 2.0 * s * p.rho * p.interferer_term + p.tau * p.nu;
    let g = 2.0 * (mix / (2.0 * s * p.tau * p.nu)).sqrt();
    let ln_c = 0.5 * (p.tau * p.nu).ln() - (2.0 * mix.sqrt()).ln() + mu * mu * p.tau * p.nu / (2.0 * s * mix)
        - mu * mu / (2.0 * s);
    let c = ln_c.exp();
    let x = mu / (s * g);
    Ok(c * (1.0 + erf(x)?) + c * erfc(x)?)
}

pub fn asymptotic_outage(params: &[AsymptoticParams]) -> Result<f64> {
    params.iter().try_fold(1.0, |acc, p| Ok(acc * asymptotic_cdf(p)?))
}

pub fn network_asymptote(cfg: &ScenarioConfig, moments: &Moments) -> Result<f64> {
    let tau = cfg.threshold();
    let params: Vec<_> = cfg
        .link_budgets()?
        .iter()
        .map(|b| AsymptoticParams::from_budget(cfg, b, moments, tau))
        .collect();
    asymptotic_outage(&params)
}

/// Mean rate per unit of consumed power; full duplex spends `2P`.
pub fn energy_efficiency(mean_rate: f64, p_max_w: f64, mode: Mode) -> Result<f64> {
    if !(mean_rate >= 0.0 && mean_rate.is_finite()) {
        return Err(Error::invalid("mean_rate", "must be finite and non-negative"));
    }
    if !(p_max_w > 0.0) {
        return Err(Error::invalid("tx_power", "energy efficiency needs P > 0"));
    }
    let consumed = if mode.is_full_duplex() { 2.0 * p_max_w } else { p_max_w };
    Ok(mean_rate / consumed)
}
