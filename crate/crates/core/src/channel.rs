//! Correlated Rayleigh fading draws for every RIS link.
//!
//! Every vector has its own random stream, addressed by trial index and link
//! id, so adding pairs or changing the worker count never perturbs the draws
//! of an existing link.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::correlation::CorrelationModel;
use crate::mathkit::RngStream;

/// Stream ids reserved per trial; bounds the user count at `(STRIDE − 1)/2`.
pub const STREAM_STRIDE: u64 = 1 << 20;

/// Stream id of one link vector in trial `trial`.
pub fn link_stream(trial: u64, link: Link) -> u64 {
    let offset = match link {
        Link::Interferer => 0,
        Link::UserToRis(u) => 1 + 2 * u as u64,
        Link::RisToUser(u) => 2 + 2 * u as u64,
    };
    trial * STREAM_STRIDE + offset
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Interferer,
    UserToRis(usize),
    RisToUser(usize),
}

/// One draw of all fading vectors. Coefficients follow `h = α·e^{−jθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    elements: usize,
    users: usize,
    reciprocal: bool,
    to_ris: Vec<Complex64>,
    from_ris: Vec<Complex64>,
    interferer: Vec<Complex64>,
}

/// Reusable scratch for the innovation vector.
#[derive(Debug, Default, Clone)]
pub struct SampleBuffer {
    innovations: Vec<Complex64>,
}

fn draw_vector(model: &CorrelationModel, rng: &mut RngStream, buf: &mut SampleBuffer, out: &mut [Complex64]) {
    let rank = model.factor.rank();
    buf.innovations.clear();
    buf.innovations.extend((0..rank).map(|_| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    }));
    // z has unit variance per complex entry: (N + jN)/√2.
    let scale = (model.variance * 0.5).sqrt();
    model.factor.apply(&buf.innovations, scale, out);
}

impl ChannelRealization {
    /// Draws trial `trial` for `users` users.
    pub fn sample(
        model: &CorrelationModel,
        users: usize,
        reciprocal: bool,
        master_seed: u64,
        trial: u64,
        buf: &mut SampleBuffer,
    ) -> Self {
        let m = model.elements();
        let mut out = Self {
            elements: m,
            users,
            reciprocal,
            to_ris: vec![Complex64::default(); m * users],
            from_ris: if reciprocal { Vec::new() } else { vec![Complex64::default(); m * users] },
            interferer: vec![Complex64::default(); m],
        };
        out.redraw(model, master_seed, trial, buf);
        out
    }

    /// Overwrites this realization with trial `trial`, reusing allocations.
    pub fn redraw(&mut self, model: &CorrelationModel, master_seed: u64, trial: u64, buf: &mut SampleBuffer) {
        let m = self.elements;
        let mut rng = RngStream::new(master_seed, link_stream(trial, Link::Interferer));
        draw_vector(model, &mut rng, buf, &mut self.interferer);
        for u in 0..self.users {
            let mut rng = RngStream::new(master_seed, link_stream(trial, Link::UserToRis(u)));
            draw_vector(model, &mut rng, buf, &mut self.to_ris[u * m..(u + 1) * m]);
            if !self.reciprocal {
                let mut rng = RngStream::new(master_seed, link_stream(trial, Link::RisToUser(u)));
                draw_vector(model, &mut rng, buf, &mut self.from_ris[u * m..(u + 1) * m]);
            }
        }
    }

    /// Builds a realization from explicit vectors (tests and tooling).
    pub fn from_vectors(
        to_ris: Vec<Vec<Complex64>>,
        from_ris: Option<Vec<Vec<Complex64>>>,
        interferer: Vec<Complex64>,
    ) -> Self {
        let elements = interferer.len();
        let users = to_ris.len();
        assert!(to_ris.iter().all(|v| v.len() == elements), "vector length mismatch");
        let reciprocal = from_ris.is_none();
        let from_ris = from_ris.map(|v| {
            assert_eq!(v.len(), users);
            v.concat()
        });
        Self {
            elements,
            users,
            reciprocal,
            to_ris: to_ris.concat(),
            from_ris: from_ris.unwrap_or_default(),
            interferer,
        }
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn is_reciprocal(&self) -> bool {
        self.reciprocal
    }

    /// `h_{U_k,R}`.
    pub fn user_to_ris(&self, k: usize) -> &[Complex64] {
        &self.to_ris[k * self.elements..(k + 1) * self.elements]
    }

    /// `h_{R,U_k}`; the same vector as `user_to_ris` under reciprocity.
    pub fn ris_to_user(&self, k: usize) -> &[Complex64] {
        if self.reciprocal {
            self.user_to_ris(k)
        } else {
            &self.from_ris[k * self.elements..(k + 1) * self.elements]
        }
    }

    /// `g_R`.
    pub fn interferer(&self) -> &[Complex64] {
        &self.interferer
    }

    /// Applies `h ↦ h·e^{jφ}` to every coefficient.
    pub fn rotate(&mut self, phase: f64) {
        let r = Complex64::from_polar(1.0, phase);
        for z in self.to_ris.iter_mut().chain(self.from_ris.iter_mut()).chain(self.interferer.iter_mut()) {
            *z *= r;
        }
    }
}

/// Magnitude `α` of a coefficient written as `α·e^{−jθ}`.
pub fn magnitude(h: Complex64) -> f64 {
    h.norm()
}

/// Phase `θ ∈ (−π, π]` of a coefficient written as `α·e^{−jθ}`.
pub fn phase(h: Complex64) -> f64 {
    let t = -h.arg();
    if t <= -std::f64::consts::PI {
        t + 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::build_grid;

    fn model(m: usize) -> CorrelationModel {
        CorrelationModel::from_grid(&build_grid(m, 0.0125), 0.1, 1.0).unwrap()
    }

    #[test]
    fn replay_is_identical() {
        let md = model(16);
        let mut buf = SampleBuffer::default();
        let a = ChannelRealization::sample(&md, 4, false, 9, 17, &mut buf);
        let b = ChannelRealization::sample(&md, 4, false, 9, 17, &mut buf);
        assert_eq!(a, b);
        let c = ChannelRealization::sample(&md, 4, false, 9, 18, &mut buf);
        assert_ne!(a, c);
    }

    #[test]
    fn adding_users_keeps_existing_links() {
        let md = model(16);
        let mut buf = SampleBuffer::default();
        let small = ChannelRealization::sample(&md, 2, false, 1, 5, &mut buf);
        let large = ChannelRealization::sample(&md, 6, false, 1, 5, &mut buf);
        for k in 0..2 {
            assert_eq!(small.user_to_ris(k), large.user_to_ris(k));
            assert_eq!(small.ris_to_user(k), large.ris_to_user(k));
        }
        assert_eq!(small.interferer(), large.interferer());
    }

    #[test]
    fn polar_reconstruction() {
        let md = model(8);
        let mut buf = SampleBuffer::default();
        let r = ChannelRealization::sample(&md, 2, false, 3, 0, &mut buf);
        for &h in r.user_to_ris(0).iter().chain(r.interferer()) {
            let back = Complex64::from_polar(magnitude(h), -phase(h));
            assert!((back - h).norm() <= 1e-15 * h.norm().max(1.0));
            assert!(phase(h) > -std::f64::consts::PI && phase(h) <= std::f64::consts::PI);
        }
    }

    #[test]
    fn reciprocal_links_alias() {
        let md = model(8);
        let mut buf = SampleBuffer::default();
        let r = ChannelRealization::sample(&md, 2, true, 3, 0, &mut buf);
        assert_eq!(r.user_to_ris(1), r.ris_to_user(1));
    }

    #[test]
    fn single_element_rayleigh_mean() {
        let md = model(1);
        let mut buf = SampleBuffer::default();
        let n = 100_000;
        let mut r = ChannelRealization::sample(&md, 1, true, 11, 0, &mut buf);
        let (mut sum, mut sum_sq, mut power) = (0.0, 0.0, 0.0);
        for t in 0..n {
            r.redraw(&md, 11, t, &mut buf);
            let a = magnitude(r.user_to_ris(0)[0]);
            sum += a;
            sum_sq += a * a;
            power += r.interferer()[0].norm_sqr();
        }
        let nf = n as f64;
        let mean = sum / nf;
        let stderr = ((sum_sq / nf - mean * mean) / nf).sqrt();
        let want = std::f64::consts::PI.sqrt() / 2.0;
        assert!((mean - want).abs() < 3.0 * stderr, "{mean} vs {want} ± {stderr}");
        assert!((power / nf - 1.0).abs() < 0.02);
    }
}
