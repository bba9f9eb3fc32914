//! Executed actions and the projection of raw agent output onto the
//! feasible set.
//!
//! Raw action wire order, `4MK + 5N + 2` reals:
//!
//! | block            | length | meaning                                          |
//! |------------------|--------|--------------------------------------------------|
//! | `W` real parts   | `2MK`  | row-major `M x 2K`                               |
//! | `W` imag parts   | `2MK`  | row-major `M x 2K`                               |
//! | reflect phases   | `2N`   | `(cos, sin)` pair per element, angle via `atan2` |
//! | transmit phases  | `2N`   | `(cos, sin)` pair per element                    |
//! | reflect split    | `N`    | `beta_r = (clamp(x) + 1) / 2`                    |
//! | UAV position     | `2`    | `x_min + (clamp(u) + 1) / 2 * (x_max - x_min)`   |
//!
//! `clamp` limits a value to `[-1, 1]`; inside that range the map is the
//! identity, matching a tanh-bounded actor.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::numerics::{ComplexMatrix, RngStream};
use crate::{Error, Result};

use super::SystemConfig;

/// Which face of the STAR-RIS a user sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Reflect,
    Transmit,
}

/// Per-element phase angles and reflect-side energy split.
///
/// The transmit-side split is derived as `1 - beta_r`. `beta_r` is kept on a
/// grid of `2^-52` so that the complement is exact and the two splits add to
/// exactly one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub phase_r: Vec<f64>,
    pub phase_t: Vec<f64>,
    pub beta_r: Vec<f64>,
}

impl PhaseProfile {
    pub fn len(&self) -> usize {
        self.beta_r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_r.is_empty()
    }

    pub fn beta_t(&self, i: usize) -> f64 {
        1.0 - self.beta_r[i]
    }

    /// Diagonal of the phase-shift matrix of one face: `sqrt(beta) e^{j phi}`.
    pub fn coefficients(&self, side: Side) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| {
                let (beta, phi) = match side {
                    Side::Reflect => (self.beta_r[i], self.phase_r[i]),
                    Side::Transmit => (self.beta_t(i), self.phase_t[i]),
                };
                Complex64::from_polar(beta.sqrt(), phi)
            })
            .collect()
    }

    /// Unit-modulus phasors `e^{j phi}` of one face.
    pub fn phasors(&self, side: Side) -> Vec<Complex64> {
        let angles = match side {
            Side::Reflect => &self.phase_r,
            Side::Transmit => &self.phase_t,
        };
        angles.iter().map(|&phi| Complex64::from_polar(1.0, phi)).collect()
    }
}

/// One feasible configuration of the BS, the surface and the UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    /// `M x 2K`: columns `0..K` serve reflect-side users, `K..2K` transmit-side users.
    pub beamformer: ComplexMatrix,
    pub phases: PhaseProfile,
    pub uav_xy: [f64; 2],
}

impl Action {
    /// Precoders of one side's users as an `M x K` matrix.
    pub fn precoders(&self, side: Side) -> ComplexMatrix {
        let k = self.beamformer.cols() / 2;
        match side {
            Side::Reflect => self.beamformer.columns(0, k),
            Side::Transmit => self.beamformer.columns(k, 2 * k),
        }
    }

    /// Inverse of [`project_action`] on feasible actions.
    pub fn to_raw(&self, cfg: &SystemConfig) -> Vec<f64> {
        let layout = ActionLayout::new(cfg);
        let mut raw = vec![0.0; layout.len()];
        for (i, z) in self.beamformer.as_slice().iter().enumerate() {
            raw[layout.w_re + i] = z.re;
            raw[layout.w_im + i] = z.im;
        }
        for i in 0..layout.elements {
            let (s, c) = self.phases.phase_r[i].sin_cos();
            raw[layout.phase_r + 2 * i] = c;
            raw[layout.phase_r + 2 * i + 1] = s;
            let (s, c) = self.phases.phase_t[i].sin_cos();
            raw[layout.phase_t + 2 * i] = c;
            raw[layout.phase_t + 2 * i + 1] = s;
            raw[layout.beta + i] = 2.0 * self.phases.beta_r[i] - 1.0;
        }
        let b = &cfg.uav_bounds;
        raw[layout.uav] = 2.0 * (self.uav_xy[0] - b.x_min) / (b.x_max - b.x_min) - 1.0;
        raw[layout.uav + 1] = 2.0 * (self.uav_xy[1] - b.y_min) / (b.y_max - b.y_min) - 1.0;
        raw
    }

    /// Initial action of an episode: Gaussian precoders scaled into the
    /// power budget, uniform phases, even energy split, UAV at its start
    /// position.
    pub fn random_initial(cfg: &SystemConfig, rng: &mut RngStream) -> Result<Action> {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
        let mut w = crate::numerics::sample_complex_gaussian(rng, m, 2 * k, 1.0)?;
        let p = w.trace_gram();
        if p > cfg.max_power {
            w.scale_real((cfg.max_power / p).sqrt());
        }
        let phase_r = (0..n).map(|_| rng.uniform() * TAU).collect();
        let phase_t = (0..n).map(|_| rng.uniform() * TAU).collect();
        Ok(Action {
            beamformer: w,
            phases: PhaseProfile {
                phase_r,
                phase_t,
                beta_r: vec![0.5; n],
            },
            uav_xy: cfg.uav_start,
        })
    }

    /// Checks every constraint of the optimization problem, returning the
    /// first violation.
    pub fn check_feasible(&self, cfg: &SystemConfig, tol: f64) -> std::result::Result<(), String> {
        let p = self.beamformer.trace_gram();
        if p > cfg.max_power + tol {
            return Err(format!("power {p} exceeds budget {}", cfg.max_power));
        }
        for side in [Side::Reflect, Side::Transmit] {
            for (i, z) in self.phases.phasors(side).iter().enumerate() {
                if (z.norm() - 1.0).abs() > 1e-12 {
                    return Err(format!("{side:?} element {i} modulus {}", z.norm()));
                }
            }
        }
        for (i, &b) in self.phases.beta_r.iter().enumerate() {
            if !(0.0..=1.0).contains(&b) || !(0.0..=1.0).contains(&self.phases.beta_t(i)) {
                return Err(format!("element {i} split {b} outside [0, 1]"));
            }
            if b + self.phases.beta_t(i) != 1.0 {
                return Err(format!("element {i} splits do not sum to one"));
            }
        }
        if !cfg.uav_bounds.contains(self.uav_xy) {
            return Err(format!("UAV {:?} outside bounds", self.uav_xy));
        }
        Ok(())
    }
}

/// Offsets of each block inside the raw action vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionLayout {
    pub antennas: usize,
    pub elements: usize,
    pub users: usize,
    pub w_re: usize,
    pub w_im: usize,
    pub phase_r: usize,
    pub phase_t: usize,
    pub beta: usize,
    pub uav: usize,
}

impl ActionLayout {
    pub fn new(cfg: &SystemConfig) -> Self {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
        let w = 2 * m * k;
        ActionLayout {
            antennas: m,
            elements: n,
            users: k,
            w_re: 0,
            w_im: w,
            phase_r: 2 * w,
            phase_t: 2 * w + 2 * n,
            beta: 2 * w + 4 * n,
            uav: 2 * w + 5 * n,
        }
    }

    pub fn len(&self) -> usize {
        self.uav + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Length of the raw action vector, `4MK + 5N + 2`.
pub fn action_dim(cfg: &SystemConfig) -> usize {
    ActionLayout::new(cfg).len()
}

fn squash(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Snaps a split onto the `2^-52` grid so `beta + (1 - beta) == 1` exactly.
fn quantize_split(beta: f64) -> f64 {
    const GRID: f64 = (1u64 << 52) as f64;
    (beta * GRID).round() / GRID
}

/// Angle of the pair `(c, s)` in `[0, 2pi)`; the zero pair maps to 0.
fn pair_angle(c: f64, s: f64) -> f64 {
    let mut phi = s.atan2(c);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi = 0.0;
    }
    phi
}

/// Maps a raw action vector onto a feasible [`Action`].
///
/// The beamformer is rescaled by `sqrt(Pt / tr{WW^H})` only when it exceeds
/// the budget, phases are taken from `(cos, sin)` pairs so every phasor has
/// unit modulus, and the split and UAV coordinates are clamped to `[-1, 1]`
/// before the affine map onto their ranges.
pub fn project_action(raw: &[f64], cfg: &SystemConfig) -> Result<Action> {
    let layout = ActionLayout::new(cfg);
    if raw.len() != layout.len() {
        return Err(Error::dims(
            "project_action",
            format!("raw action has {} entries, expected {}", raw.len(), layout.len()),
        ));
    }
    if let Some(i) = raw.iter().position(|x| !x.is_finite()) {
        return Err(Error::Config(format!("raw action entry {i} is not finite")));
    }
    let (m, n, k) = (layout.antennas, layout.elements, layout.users);

    let entries = 2 * m * k;
    let mut w = ComplexMatrix::from_fn(m, 2 * k, |i, j| {
        let idx = i * 2 * k + j;
        Complex64::new(raw[layout.w_re + idx], raw[layout.w_im + idx])
    });
    debug_assert_eq!(w.as_slice().len(), entries);
    let p = w.trace_gram();
    if p > cfg.max_power {
        w.scale_real((cfg.max_power / p).sqrt());
    }

    let phase_r = (0..n)
        .map(|i| pair_angle(raw[layout.phase_r + 2 * i], raw[layout.phase_r + 2 * i + 1]))
        .collect();
    let phase_t = (0..n)
        .map(|i| pair_angle(raw[layout.phase_t + 2 * i], raw[layout.phase_t + 2 * i + 1]))
        .collect();
    let beta_r = (0..n)
        .map(|i| quantize_split((squash(raw[layout.beta + i]) + 1.0) / 2.0))
        .collect();

    let b = &cfg.uav_bounds;
    let ux = (squash(raw[layout.uav]) + 1.0) / 2.0;
    let uy = (squash(raw[layout.uav + 1]) + 1.0) / 2.0;
    let uav_xy = [
        (b.x_min + ux * (b.x_max - b.x_min)).clamp(b.x_min, b.x_max),
        (b.y_min + uy * (b.y_max - b.y_min)).clamp(b.y_min, b.y_max),
    ];

    Ok(Action {
        beamformer: w,
        phases: PhaseProfile {
            phase_r,
            phase_t,
            beta_r,
        },
        uav_xy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny() -> SystemConfig {
        let mut cfg = SystemConfig::with_sizes(1, 1, 1);
        cfg.max_power = 1.0;
        cfg
    }

    #[test]
    fn dims() {
        let cfg = SystemConfig::with_sizes(2, 1, 4);
        assert_eq!(action_dim(&cfg), 4 * 2 + 5 * 4 + 2);
        let cfg = SystemConfig::default();
        assert_eq!(action_dim(&cfg), 4 * 16 + 5 * 16 + 2);
    }

    #[test]
    fn wrong_length_rejected() {
        let cfg = tiny();
        assert!(matches!(
            project_action(&[0.0; 3], &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overbudget_beamformer_is_scaled() {
        // M=1, K=1: W is 1x2, raw re = (sqrt2, sqrt2) gives tr = 4
        let cfg = tiny();
        let mut raw = vec![0.0; action_dim(&cfg)];
        raw[0] = 2f64.sqrt();
        raw[1] = 2f64.sqrt();
        let a = project_action(&raw, &cfg).unwrap();
        assert!((a.beamformer.trace_gram() - 1.0).abs() < 1e-12);
        assert!((a.beamformer[(0, 0)].re - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn underbudget_beamformer_unchanged() {
        let cfg = tiny();
        let mut raw = vec![0.0; action_dim(&cfg)];
        raw[0] = 0.5;
        raw[2] = 0.5;
        let a = project_action(&raw, &cfg).unwrap();
        assert_eq!(a.beamformer.trace_gram(), 0.5);
        assert_eq!(a.beamformer[(0, 0)], Complex64::new(0.5, 0.5));
    }

    #[test]
    fn split_and_uav_maps() {
        let cfg = tiny();
        let layout = ActionLayout::new(&cfg);
        let mut raw = vec![0.0; layout.len()];
        raw[layout.beta] = 1.0;
        raw[layout.uav] = -1.0;
        raw[layout.uav + 1] = 5.0;
        let a = project_action(&raw, &cfg).unwrap();
        assert_eq!(a.phases.beta_r[0], 1.0);
        assert_eq!(a.phases.beta_t(0), 0.0);
        assert_eq!(a.uav_xy, [cfg.uav_bounds.x_min, cfg.uav_bounds.y_max]);
        raw[layout.beta] = 0.0;
        raw[layout.uav] = 0.0;
        let a = project_action(&raw, &cfg).unwrap();
        assert_eq!(a.phases.beta_r[0], 0.5);
        assert_eq!(a.uav_xy[0], 40.0);
    }

    #[test]
    fn phase_from_pair() {
        assert_eq!(pair_angle(1.0, 0.0), 0.0);
        assert!((pair_angle(0.0, 1.0) - TAU / 4.0).abs() < 1e-15);
        assert!((pair_angle(0.0, -1.0) - 3.0 * TAU / 4.0).abs() < 1e-15);
        assert_eq!(pair_angle(0.0, 0.0), 0.0);
        assert!(pair_angle(1.0, -1e-300) < TAU);
    }

    #[test]
    fn quantized_split_complement_exact() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100_000 {
            let b = quantize_split(rng.uniform());
            assert_eq!(b + (1.0 - b), 1.0);
        }
    }

    #[test]
    fn non_finite_raw_rejected() {
        let cfg = tiny();
        let mut raw = vec![0.0; action_dim(&cfg)];
        raw[3] = f64::NAN;
        assert!(project_action(&raw, &cfg).is_err());
    }

    #[test]
    fn random_initial_is_feasible() {
        let cfg = SystemConfig::default();
        let mut rng = RngStream::new(2, 0);
        for _ in 0..50 {
            let a = Action::random_initial(&cfg, &mut rng).unwrap();
            a.check_feasible(&cfg, 1e-9).unwrap();
        }
    }

    proptest! {
        #[test]
        fn projection_is_feasible(seed in any::<u64>(), m in 1usize..4, k in 1usize..4, n in 1usize..7, scale in 0.1f64..5.0) {
            let cfg = SystemConfig::with_sizes(m, k, n);
            let mut rng = RngStream::new(seed, 0);
            let raw: Vec<f64> = (0..action_dim(&cfg)).map(|_| rng.uniform_range(-scale, scale)).collect();
            let a = project_action(&raw, &cfg).unwrap();
            prop_assert!(a.check_feasible(&cfg, 1e-9).is_ok(), "{:?}", a.check_feasible(&cfg, 1e-9));
        }

        #[test]
        fn projection_idempotent(seed in any::<u64>(), m in 1usize..4, k in 1usize..4, n in 1usize..7) {
            let cfg = SystemConfig::with_sizes(m, k, n);
            let mut rng = RngStream::new(seed, 1);
            let raw: Vec<f64> = (0..action_dim(&cfg)).map(|_| rng.uniform_range(-3.0, 3.0)).collect();
            let a = project_action(&raw, &cfg).unwrap();
            let b = project_action(&a.to_raw(&cfg), &cfg).unwrap();
            prop_assert!(a.beamformer.distance(&b.beamformer) <= 1e-12);
            for side in [Side::Reflect, Side::Transmit] {
                for (x, y) in a.phases.coefficients(side).iter().zip(b.phases.coefficients(side)) {
                    prop_assert!((x - y).norm() <= 1e-12);
                }
            }
            prop_assert_eq!(&a.phases.beta_r, &b.phases.beta_r);
            prop_assert!((a.uav_xy[0] - b.uav_xy[0]).abs() <= 1e-12);
            prop_assert!((a.uav_xy[1] - b.uav_xy[1]).abs() <= 1e-12);
        }
    }
}
