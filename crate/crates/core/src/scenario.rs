//! Experiment description: geometry, RIS layout, powers and link budgets.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{derive_seed, RngStream};

const PLACEMENT_TAG: u64 = 0x504c_4143;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Users uniform (by area) on an annulus around the RIS, interferer on a
    /// circle; both at uniform angle, seeded from the master seed.
    Random {
        #[serde(default = "default_inner")]
        inner: f64,
        #[serde(default = "default_outer")]
        outer: f64,
        #[serde(default = "default_interferer_radius")]
        interferer_radius: f64,
    },
    Fixed {
        users: Vec<[f64; 2]>,
        interferer: [f64; 2],
        #[serde(default)]
        ris: [f64; 2],
    },
}

fn default_inner() -> f64 {
    100.0
}
fn default_outer() -> f64 {
    600.0
}
fn default_interferer_radius() -> f64 {
    300.0
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Random {
            inner: default_inner(),
            outer: default_outer(),
            interferer_radius: default_interferer_radius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RsiModel {
    None,
    /// Residual self-interference power fixed at `dbm`.
    Constant { dbm: f64 },
    /// Residual self-interference equal to `lambda · P`.
    Linear { lambda: f64 },
}

impl Default for RsiModel {
    fn default() -> Self {
        RsiModel::Constant { dbm: -150.0 }
    }
}

impl RsiModel {
    /// RSI power normalised by the noise power.
    pub fn normalized(&self, tx_power_w: f64, noise_w: f64) -> f64 {
        match *self {
            RsiModel::None => 0.0,
            RsiModel::Constant { dbm } => dbm_to_watts(dbm) / noise_w,
            RsiModel::Linear { lambda } => lambda * tx_power_w / noise_w,
        }
    }
}

/// On-disk scenario format. Powers in dBm, distances in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(rename = "K")]
    pub pairs: usize,
    #[serde(rename = "M")]
    pub elements: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    /// Defaults to `wavelength / 8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_width: Option<f64>,
    /// Intensity attenuation; defaults to `1/d²` so that each element has
    /// unit mean power gain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_user_ref_loss")]
    pub user_ref_loss_db: f64,
    #[serde(default = "default_interferer_ref_loss")]
    pub interferer_ref_loss_db: f64,
    #[serde(default = "default_power_dbm")]
    pub tx_power_dbm: f64,
    #[serde(default = "default_power_dbm")]
    pub interferer_power_dbm: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default)]
    pub rsi_model: RsiModel,
    #[serde(default = "default_target_rate")]
    pub target_rate: f64,
    #[serde(default = "default_reciprocal")]
    pub reciprocal: bool,
}

fn default_wavelength() -> f64 {
    0.1
}
fn default_alpha() -> f64 {
    2.5
}
fn default_user_ref_loss() -> f64 {
    -30.0
}
fn default_interferer_ref_loss() -> f64 {
    -35.0
}
fn default_power_dbm() -> f64 {
    40.0
}
fn default_noise_dbm() -> f64 {
    -100.0
}
fn default_target_rate() -> f64 {
    0.5
}
fn default_reciprocal() -> bool {
    true
}

impl ScenarioFile {
    pub fn new(pairs: usize, elements: usize) -> Self {
        serde_json::from_value(serde_json::json!({ "K": pairs, "M": elements }))
            .expect("defaults deserialize")
    }
}

/// Validated scenario with resolved geometry and linear-unit powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub pairs: usize,
    pub elements: usize,
    pub seed: u64,
    pub wavelength: f64,
    pub element_width: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub user_ref_loss_db: f64,
    pub interferer_ref_loss_db: f64,
    pub tx_power_w: f64,
    pub interferer_power_w: f64,
    pub noise_w: f64,
    pub users: Vec<[f64; 2]>,
    pub interferer: [f64; 2],
    pub ris: [f64; 2],
    pub placement: Placement,
    pub rsi_model: RsiModel,
    pub target_rate: f64,
    pub reciprocal: bool,
}

fn require(ok: bool, field: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(field, reason))
    }
}

fn finite(value: f64, field: &'static str) -> Result<f64> {
    require(value.is_finite(), field, "must be finite")?;
    Ok(value)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    ScenarioConfig::from_file(&file)
}

impl ScenarioConfig {
    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        require(file.pairs >= 1, "K", "need at least one pair")?;
        require(file.elements >= 1, "M", "need at least one element")?;
        let wavelength = finite(file.wavelength, "wavelength")?;
        require(wavelength > 0.0, "wavelength", "must be positive")?;
        let element_width = finite(file.element_width.unwrap_or(wavelength / 8.0), "element_width")?;
        require(element_width > 0.0, "element_width", "must be positive")?;
        let zeta = finite(file.zeta.unwrap_or(1.0 / (element_width * element_width)), "zeta")?;
        require(zeta > 0.0, "zeta", "must be positive")?;
        let alpha = finite(file.alpha, "alpha")?;
        require(alpha > 0.0, "alpha", "must be positive")?;
        finite(file.user_ref_loss_db, "user_ref_loss_db")?;
        finite(file.interferer_ref_loss_db, "interferer_ref_loss_db")?;
        finite(file.tx_power_dbm, "tx_power_dbm")?;
        finite(file.interferer_power_dbm, "interferer_power_dbm")?;
        finite(file.noise_dbm, "noise_dbm")?;
        let target_rate = finite(file.target_rate, "target_rate")?;
        require(target_rate >= 0.0, "target_rate", "must be non-negative")?;
        match file.rsi_model {
            RsiModel::None => {}
            RsiModel::Constant { dbm } => {
                finite(dbm, "rsi_model")?;
            }
            RsiModel::Linear { lambda } => {
                require(lambda.is_finite() && lambda >= 0.0, "rsi_model", "lambda must be ≥ 0")?;
            }
        }

        let (users, interferer, ris) = match &file.placement {
            Placement::Random { inner, outer, interferer_radius } => {
                require(
                    inner.is_finite() && outer.is_finite() && *inner > 0.0 && outer >= inner,
                    "placement",
                    "need 0 < inner ≤ outer",
                )?;
                require(
                    interferer_radius.is_finite() && *interferer_radius > 0.0,
                    "placement",
                    "interferer_radius must be positive",
                )?;
                let mut rng = RngStream::new(derive_seed(file.seed, PLACEMENT_TAG), 0);
                let polar = |r: f64, rng: &mut RngStream| {
                    let theta = rng.random::<f64>() * std::f64::consts::TAU;
                    [r * theta.cos(), r * theta.sin()]
                };
                let (i2, o2) = (inner * inner, outer * outer);
                let users: Vec<[f64; 2]> = (0..2 * file.pairs)
                    .map(|_| {
                        let r = (i2 + (o2 - i2) * rng.random::<f64>()).sqrt();
                        polar(r, &mut rng)
                    })
                    .collect();
                let interferer = polar(*interferer_radius, &mut rng);
                (users, interferer, [0.0, 0.0])
            }
            Placement::Fixed { users, interferer, ris } => {
                require(
                    users.len() == 2 * file.pairs,
                    "placement",
                    &format!("expected {} user positions, got {}", 2 * file.pairs, users.len()),
                )?;
                let all_finite = users.iter().chain([interferer, ris]).flatten().all(|v| v.is_finite());
                require(all_finite, "placement", "coordinates must be finite")?;
                (users.clone(), *interferer, *ris)
            }
        };

        let cfg = ScenarioConfig {
            pairs: file.pairs,
            elements: file.elements,
            seed: file.seed,
            wavelength,
            element_width,
            zeta,
            alpha,
            user_ref_loss_db: file.user_ref_loss_db,
            interferer_ref_loss_db: file.interferer_ref_loss_db,
            tx_power_w: dbm_to_watts(file.tx_power_dbm),
            interferer_power_w: dbm_to_watts(file.interferer_power_dbm),
            noise_w: dbm_to_watts(file.noise_dbm),
            users,
            interferer,
            ris,
            placement: file.placement.clone(),
            rsi_model: file.rsi_model,
            target_rate,
            reciprocal: file.reciprocal,
        };
        for k in 0..cfg.pairs {
            cfg.link_budget(k)?;
        }
        Ok(cfg)
    }

    /// Round-trips to the on-disk form (used for manifests).
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            pairs: self.pairs,
            elements: self.elements,
            seed: self.seed,
            wavelength: self.wavelength,
            element_width: Some(self.element_width),
            zeta: Some(self.zeta),
            alpha: self.alpha,
            user_ref_loss_db: self.user_ref_loss_db,
            interferer_ref_loss_db: self.interferer_ref_loss_db,
            tx_power_dbm: watts_to_dbm(self.tx_power_w),
            interferer_power_dbm: watts_to_dbm(self.interferer_power_w),
            noise_dbm: watts_to_dbm(self.noise_w),
            placement: self.placement.clone(),
            rsi_model: self.rsi_model,
            target_rate: self.target_rate,
            reciprocal: self.reciprocal,
        }
    }

    /// Element gain variance `σ² = A·ζ` with `A = d²`.
    pub fn element_variance(&self) -> f64 {
        self.element_width * self.element_width * self.zeta
    }

    pub fn threshold(&self) -> f64 {
        (2.0 * self.target_rate).exp_m1()
    }

    pub fn user_count(&self) -> usize {
        2 * self.pairs
    }

    /// Re-seeds the run. Random placements are redrawn from the new seed.
    pub fn with_seed(&self, seed: u64) -> Result<Self> {
        let mut file = self.to_file();
        file.seed = seed;
        if matches!(self.placement, Placement::Fixed { .. }) {
            let mut cfg = self.clone();
            cfg.seed = seed;
            return Ok(cfg);
        }
        Self::from_file(&file)
    }

    pub fn with_powers(&self, tx_power_w: f64, interferer_power_w: f64) -> Self {
        Self { tx_power_w, interferer_power_w, ..self.clone() }
    }

    pub fn with_elements(&self, elements: usize) -> Self {
        Self { elements, ..self.clone() }
    }

    pub fn with_target_rate(&self, target_rate: f64) -> Self {
        Self { target_rate, ..self.clone() }
    }

    pub fn with_ris_position(&self, ris: [f64; 2]) -> Result<Self> {
        let cfg = Self { ris, ..self.clone() };
        for k in 0..cfg.pairs {
            cfg.link_budget(k)?;
        }
        Ok(cfg)
    }

    /// Linear gain of a user↔RIS segment of length `d`.
    pub fn user_segment_gain(&self, d: f64) -> f64 {
        db_to_linear(self.user_ref_loss_db) * d.powf(-self.alpha)
    }

    /// Linear gain of the interferer→RIS segment of length `d`.
    pub fn interferer_segment_gain(&self, d: f64) -> f64 {
        db_to_linear(self.interferer_ref_loss_db) * d.powf(-self.alpha)
    }

    fn distance_to_ris(&self, p: [f64; 2], what: &str) -> Result<f64> {
        let d = (p[0] - self.ris[0]).hypot(p[1] - self.ris[1]);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::DegenerateGeometry(format!("{what} coincides with the RIS")))
        }
    }

    /// Link budget for pair `pair` (users `2·pair` and `2·pair + 1`, 0-based).
    pub fn link_budget(&self, pair: usize) -> Result<LinkBudget> {
        if pair >= self.pairs {
            return Err(Error::Usage(format!("pair {pair} out of range (K = {})", self.pairs)));
        }
        let (k, kp) = pair_users(pair);
        let d_k = self.distance_to_ris(self.users[k], &format!("user {}", k + 1))?;
        let d_kp = self.distance_to_ris(self.users[kp], &format!("user {}", kp + 1))?;
        let d_i = self.distance_to_ris(self.interferer, "interferer")?;
        let g_k = self.user_segment_gain(d_k);
        let g_kp = self.user_segment_gain(d_kp);
        let g_i = self.interferer_segment_gain(d_i);
        Ok(LinkBudget {
            mean_snr: self.tx_power_w * g_k * g_kp / self.noise_w,
            interference_at_partner: self.interferer_power_w * g_i * g_kp / self.noise_w,
            interference_at_first: self.interferer_power_w * g_i * g_k / self.noise_w,
            d_first_ris: d_k,
            d_ris_partner: d_kp,
            d_interferer_ris: d_i,
            first_gain: g_k,
            partner_gain: g_kp,
            interferer_gain: g_i,
        })
    }

    pub fn link_budgets(&self) -> Result<Vec<LinkBudget>> {
        (0..self.pairs).map(|k| self.link_budget(k)).collect()
    }
}

/// Partner of user `k` (0-based): odd users in 1-based numbering pair with
/// the next one.
pub fn partner(k: usize) -> usize {
    k ^ 1
}

/// 0-based users `(k, k')` forming pair `pair`.
pub fn pair_users(pair: usize) -> (usize, usize) {
    (2 * pair, 2 * pair + 1)
}

/// Large-scale terms of one pair. "first" is user `k`, "partner" is `k'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    /// `γ̄ = P·L_u(d_kR)·L_u(d_Rk')/σ_n²`, shared by both directions.
    pub mean_snr: f64,
    /// `η_{I,k'}`: interference scale at the partner (direction k→k').
    pub interference_at_partner: f64,
    /// `η_{I,k}`: interference scale at the first user (direction k'→k).
    pub interference_at_first: f64,
    pub d_first_ris: f64,
    pub d_ris_partner: f64,
    pub d_interferer_ris: f64,
    pub first_gain: f64,
    pub partner_gain: f64,
    pub interferer_gain: f64,
}

/// Rectangular element layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RisGrid {
    pub pitch: f64,
    pub columns: usize,
    pub positions: Vec<[f64; 3]>,
}

impl RisGrid {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }
}

/// Near-square row-major grid: `⌈√M⌉` columns, last row possibly partial.
pub fn build_grid(elements: usize, pitch: f64) -> RisGrid {
    let mut columns = 1;
    while columns * columns < elements {
        columns += 1;
    }
    let positions = (0..elements)
        .map(|i| [(i % columns) as f64 * pitch, (i / columns) as f64 * pitch, 0.0])
        .collect();
    RisGrid { pitch, columns, positions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference_scenario() -> ScenarioConfig {
        parse_scenario(r#"{"K": 6, "M": 128, "seed": 3}"#).unwrap()
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = parse_scenario(r#"{"K": 1, "M": 16, "seed": 7}"#).unwrap();
        assert_eq!(cfg.pairs, 1);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.users.len(), 2);
        assert_eq!(cfg.rsi_model, RsiModel::Constant { dbm: -150.0 });
        assert_eq!(cfg.target_rate, 0.5);
    }

    #[test]
    fn reference_defaults() {
        let cfg = reference_scenario();
        assert_eq!((cfg.pairs, cfg.elements), (6, 128));
        assert_eq!(cfg.wavelength, 0.1);
        assert_eq!(cfg.element_width, 0.1 / 8.0);
        assert_eq!(cfg.alpha, 2.5);
        assert_eq!(cfg.user_ref_loss_db, -30.0);
        assert_eq!(cfg.interferer_ref_loss_db, -35.0);
        assert!((cfg.noise_w - 1e-13).abs() < 1e-25);
        assert!((cfg.element_variance() - 1.0).abs() < 1e-12);
        for (i, u) in cfg.users.iter().enumerate() {
            let r = u[0].hypot(u[1]);
            assert!((100.0..=600.0).contains(&r), "user {i} at {r}");
        }
        assert!((cfg.interferer[0].hypot(cfg.interferer[1]) - 300.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_fields_by_name() {
        let err = parse_scenario(r#"{"K": 0, "M": 16}"#).unwrap_err();
        assert!(matches!(err, Error::Invalid { field: "K", .. }), "{err}");
        let err = parse_scenario(r#"{"K": 1, "M": 16, "alpha": -1}"#).unwrap_err();
        assert!(matches!(err, Error::Invalid { field: "alpha", .. }));
        let err = parse_scenario(r#"{"K": 1, "M": 16, "bogus": 1}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_scenario(
            r#"{"K": 2, "M": 4, "placement": {"fixed": {"users": [[1,0],[2,0]], "interferer": [0,5]}}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid { field: "placement", .. }));
    }

    #[test]
    fn user_on_ris_is_degenerate() {
        let err = parse_scenario(
            r#"{"K": 1, "M": 4, "placement": {"fixed": {"users": [[0,0],[2,0]], "interferer": [0,5]}}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateGeometry(_)));
    }

    #[test]
    fn unit_budget() {
        let cfg = parse_scenario(
            r#"{"K": 1, "M": 1, "user_ref_loss_db": 0, "interferer_ref_loss_db": 0,
               "tx_power_dbm": -100, "interferer_power_dbm": -100, "noise_dbm": -100,
               "placement": {"fixed": {"users": [[1,0],[0,1]], "interferer": [-1,0]}}}"#,
        )
        .unwrap();
        let b = cfg.link_budget(0).unwrap();
        assert!((b.mean_snr - 1.0).abs() < 1e-12);
        assert!((b.interference_at_partner - 1.0).abs() < 1e-12);
        assert!((b.interference_at_first - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_formula_and_symmetry() {
        let cfg = reference_scenario();
        let b = cfg.link_budget(2).unwrap();
        let (k, kp) = pair_users(2);
        let d = |p: [f64; 2]| p[0].hypot(p[1]);
        let lu = |x: f64| 1e-3 * x.powf(-2.5);
        let li = |x: f64| 10f64.powf(-3.5) * x.powf(-2.5);
        let want = cfg.tx_power_w * lu(d(cfg.users[k])) * lu(d(cfg.users[kp])) / cfg.noise_w;
        assert!(((b.mean_snr - want) / want).abs() < 1e-12);
        let want = cfg.interferer_power_w * li(300.0) * lu(d(cfg.users[kp])) / cfg.noise_w;
        assert!(((b.interference_at_partner - want) / want).abs() < 1e-12);
    }

    #[test]
    fn position_demo_coordinates() {
        let cfg = parse_scenario(
            r#"{"K": 1, "M": 16, "placement": {"fixed": {"users": [[-30,40],[50,-30]],
               "interferer": [10,15], "ris": [-50,0]}}}"#,
        )
        .unwrap();
        let b = cfg.link_budget(0).unwrap();
        assert!((b.d_first_ris - 20f64.hypot(40.0)).abs() < 1e-12);
        assert!((b.d_ris_partner - 100f64.hypot(30.0)).abs() < 1e-12);
        assert!((b.d_interferer_ris - 60f64.hypot(15.0)).abs() < 1e-12);
    }

    #[test]
    fn pairing_is_involution() {
        assert_eq!(partner(0), 1);
        assert_eq!(partner(1), 0);
        for k in 0..20 {
            assert_eq!(partner(partner(k)), k);
            // 1-based rule k' = 2(k mod 2) + k − 1.
            let one_based = k + 1;
            assert_eq!(partner(k) + 1, 2 * (one_based % 2) + one_based - 1);
        }
    }

    #[test]
    fn grids() {
        let g = build_grid(1, 0.0125);
        assert_eq!(g.positions, vec![[0.0, 0.0, 0.0]]);
        let g = build_grid(4, 0.0125);
        assert_eq!(g.columns, 2);
        assert_eq!(g.distance(0, 1), 0.0125);
        assert_eq!(g.distance(0, 2), 0.0125);
        let g = build_grid(128, 0.0125);
        assert_eq!(g.columns, 12);
        let rows = g.positions.iter().map(|p| (p[1] / 0.0125).round() as usize).max().unwrap() + 1;
        assert_eq!(rows, 11);
        assert_eq!(build_grid(128, 0.0125), g);
    }

    #[test]
    fn placement_follows_seed() {
        let a = reference_scenario();
        let b = a.with_seed(3).unwrap();
        assert_eq!(a.users, b.users);
        let c = a.with_seed(4).unwrap();
        assert_ne!(a.users, c.users);
    }

    #[test]
    fn file_round_trip() {
        let a = reference_scenario();
        let b = ScenarioConfig::from_file(&a.to_file()).unwrap();
        assert_eq!(a.users, b.users);
        assert!((a.tx_power_w - b.tx_power_w).abs() < 1e-15 * a.tx_power_w);
    }

    proptest! {
        #[test]
        fn budget_depends_on_power_ratios(scale_db in -60.0f64..60.0) {
            let a = reference_scenario();
            let mut b = a.clone();
            let c = db_to_linear(scale_db);
            b.tx_power_w *= c;
            b.interferer_power_w *= c;
            b.noise_w *= c;
            for k in 0..a.pairs {
                let (x, y) = (a.link_budget(k).unwrap(), b.link_budget(k).unwrap());
                prop_assert!(((x.mean_snr - y.mean_snr) / x.mean_snr).abs() < 1e-12);
                prop_assert!(((x.interference_at_partner - y.interference_at_partner)
                    / x.interference_at_partner).abs() < 1e-12);
            }
        }

        #[test]
        fn grid_pitch_exact(m in 1usize..300, pitch in 0.001f64..1.0) {
            let g = build_grid(m, pitch);
            prop_assert_eq!(g.len(), m);
            let mut min = f64::INFINITY;
            for i in 0..m.min(40) {
                for j in i + 1..m {
                    min = min.min(g.distance(i, j));
                }
            }
            if m > 1 {
                prop_assert!((min - pitch).abs() < 1e-12 * pitch.max(1.0));
            }
        }
    }
}
