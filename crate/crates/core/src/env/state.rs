//! State vector encoding.
//!
//! Flat layout, in order:
//!
//! | block                      | length |
//! |----------------------------|--------|
//! | previous `W`, real parts   | `2MK`  |
//! | previous `W`, imag parts   | `2MK`  |
//! | reflect phases (radians)   | `N`    |
//! | transmit phases (radians)  | `N`    |
//! | reflect splits             | `N`    |
//! | UAV position (meters)      | `2`    |
//! | transmit power per user    | `2K`   |
//! | received power parts       | `4K`   |
//! | `H_BR`, re/im interleaved  | `2NM`  |
//! | `H_RU`, re/im interleaved  | `2NK`  |
//! | `H_TU`, re/im interleaved  | `2NK`  |
//!
//! Users are ordered reflect side first. The received-power block holds
//! `(Re{p}^2, Im{p}^2)` for each user's desired-signal amplitude
//! `p = h_k^T Theta H_BR w_k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::ComplexMatrix;
use crate::Result;

use super::{effective_channel, Action, ChannelSet, Side, SystemConfig};

/// Structured view of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateParts {
    pub prev_action: Action,
    /// `||w_k||^2` for each of the `2K` users.
    pub tx_power: Vec<f64>,
    /// `[Re{p_k}^2, Im{p_k}^2]` for each of the `2K` users.
    pub rx_power_parts: Vec<[f64; 2]>,
    pub channels: ChannelSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub flat: Vec<f64>,
    pub parts: StateParts,
}

/// Length of the flat state: `4MK + 3N + 2 + 6K + 2NM + 4NK`.
pub fn state_dim(cfg: &SystemConfig) -> usize {
    let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
    4 * m * k + 3 * n + 2 + 6 * k + 2 * n * m + 4 * n * k
}

/// State dimension as given by the complexity analysis of the original
/// CA-DDPG formulation, `3K + 2NM + 4NK + 2MK + 4N + 2`. Reported alongside
/// [`state_dim`] for comparison only.
pub fn reference_state_dim(cfg: &SystemConfig) -> usize {
    let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
    3 * k + 2 * n * m + 4 * n * k + 2 * m * k + 4 * n + 2
}

/// Desired-signal amplitudes `h_k^T Theta H_BR w_k`, reflect users then
/// transmit users.
pub fn desired_amplitudes(prev: &Action, channels: &ChannelSet) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (side, h) in [
        (Side::Reflect, &channels.ris_reflect),
        (Side::Transmit, &channels.ris_transmit),
    ] {
        let eff = effective_channel(h, &prev.phases, side, &channels.bs_ris)?;
        let w = prev.precoders(side);
        let p = eff.matmul(&w)?;
        out.extend((0..p.rows()).map(|k| p[(k, k)]));
    }
    Ok(out)
}

fn push_interleaved(flat: &mut Vec<f64>, h: &ComplexMatrix) {
    for z in h.as_slice() {
        flat.push(z.re);
        flat.push(z.im);
    }
}

pub fn encode_state(prev: &Action, channels: &ChannelSet) -> Result<Observation> {
    let w = &prev.beamformer;
    let tx_power: Vec<f64> = (0..w.cols())
        .map(|j| (0..w.rows()).map(|i| w[(i, j)].norm_sqr()).sum())
        .collect();
    let rx_power_parts: Vec<[f64; 2]> = desired_amplitudes(prev, channels)?
        .into_iter()
        .map(|p| [p.re * p.re, p.im * p.im])
        .collect();

    let mut flat = Vec::new();
    flat.extend(w.as_slice().iter().map(|z| z.re));
    flat.extend(w.as_slice().iter().map(|z| z.im));
    flat.extend(&prev.phases.phase_r);
    flat.extend(&prev.phases.phase_t);
    flat.extend(&prev.phases.beta_r);
    flat.extend(prev.uav_xy);
    flat.extend(&tx_power);
    for part in &rx_power_parts {
        flat.extend(part);
    }
    push_interleaved(&mut flat, &channels.bs_ris);
    push_interleaved(&mut flat, &channels.ris_reflect);
    push_interleaved(&mut flat, &channels.ris_transmit);

    Ok(Observation {
        flat,
        parts: StateParts {
            prev_action: prev.clone(),
            tx_power,
            rx_power_parts,
            channels: channels.clone(),
        },
    })
}

/// Fixed per-entry affine normalization `(x - offset) * scale` that brings
/// every state block to order one before it reaches a network.
///
/// Channel blocks are scaled by the large-scale gains at the UAV start
/// position, power blocks by the budget, and received power by the mean
/// cascaded gain at full power.
#[derive(Debug, Clone, PartialEq)]
pub struct StateNormalizer {
    offset: Vec<f64>,
    scale: Vec<f64>,
}

impl StateNormalizer {
    pub fn for_config(cfg: &SystemConfig) -> Self {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
        let mut offset = Vec::with_capacity(state_dim(cfg));
        let mut scale = Vec::with_capacity(state_dim(cfg));
        let mut push = |len: usize, o: f64, s: f64| {
            offset.extend(std::iter::repeat(o).take(len));
            scale.extend(std::iter::repeat(s).take(len));
        };
        let pt = cfg.max_power;
        let start = cfg.uav_start;
        let g_br = cfg.gain_bs_uav(start);
        let mean = |users: &[[f64; 2]]| {
            users.iter().map(|&u| cfg.gain_uav_user(start, u)).sum::<f64>() / users.len() as f64
        };
        let g_ru = mean(&cfg.reflect_users);
        let g_tu = mean(&cfg.transmit_users);
        let b = &cfg.uav_bounds;

        push(4 * m * k, 0.0, (2.0 * (m * k) as f64 / pt).sqrt());
        push(2 * n, PI, 1.0 / PI);
        push(n, 0.5, 2.0);
        push(1, 0.5 * (b.x_min + b.x_max), 2.0 / (b.x_max - b.x_min));
        push(1, 0.5 * (b.y_min + b.y_max), 2.0 / (b.y_max - b.y_min));
        push(2 * k, 0.0, 2.0 * k as f64 / pt);
        let rx = |g: f64| 1.0 / (pt * n as f64 * g_br * g / (2.0 * k as f64));
        push(2 * k, 0.0, rx(g_ru));
        push(2 * k, 0.0, rx(g_tu));
        push(2 * n * m, 0.0, 1.0 / g_br.sqrt());
        push(2 * n * k, 0.0, 1.0 / g_ru.sqrt());
        push(2 * n * k, 0.0, 1.0 / g_tu.sqrt());
        debug_assert_eq!(scale.len(), state_dim(cfg));
        StateNormalizer { offset, scale }
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    pub fn apply(&self, flat: &[f64]) -> Vec<f64> {
        assert_eq!(flat.len(), self.scale.len(), "state length");
        flat.iter()
            .zip(self.offset.iter().zip(&self.scale))
            .map(|(&x, (&o, &s))| (x - o) * s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_channels, project_action, action_dim};
    use crate::numerics::RngStream;

    fn random_action(cfg: &SystemConfig, rng: &mut RngStream) -> Action {
        let raw: Vec<f64> = (0..action_dim(cfg)).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        project_action(&raw, cfg).unwrap()
    }

    #[test]
    fn reference_dims() {
        assert_eq!(reference_state_dim(&SystemConfig::with_sizes(4, 4, 16)), 494);
        assert_eq!(reference_state_dim(&SystemConfig::with_sizes(1, 1, 1)), 17);
    }

    #[test]
    fn zero_inputs_give_zero_power_blocks() {
        let cfg = SystemConfig::with_sizes(2, 2, 3);
        let mut action = random_action(&cfg, &mut RngStream::new(1, 0));
        action.beamformer = ComplexMatrix::zeros(2, 4);
        let obs = encode_state(&action, &ChannelSet::zeros(&cfg)).unwrap();
        assert!(obs.parts.tx_power.iter().all(|&p| p == 0.0));
        assert!(obs.parts.rx_power_parts.iter().all(|p| p == &[0.0, 0.0]));
        let start = 4 * 2 * 2 + 3 * 3 + 2;
        assert!(obs.flat[start..start + 6 * 2].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn flat_length_matches_state_dim() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..20 {
            let cfg = SystemConfig::with_sizes(1 + rng.below(5), 1 + rng.below(4), 1 + rng.below(10));
            let ch = generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
            let obs = encode_state(&random_action(&cfg, &mut rng), &ch).unwrap();
            assert_eq!(obs.flat.len(), state_dim(&cfg));
            assert!(obs.flat.iter().all(|x| x.is_finite()));
            assert_eq!(StateNormalizer::for_config(&cfg).len(), state_dim(&cfg));
        }
    }

    #[test]
    fn received_power_matches_scalar_oracle() {
        let cfg = SystemConfig::with_sizes(2, 2, 4);
        let mut rng = RngStream::new(3, 0);
        let ch = generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
        let a = random_action(&cfg, &mut rng);
        let obs = encode_state(&a, &ch).unwrap();
        let k = cfg.users;
        for (s, (h, betas, phis)) in [
            (&ch.ris_reflect, a.phases.beta_r.clone(), &a.phases.phase_r),
            (
                &ch.ris_transmit,
                a.phases.beta_r.iter().map(|b| 1.0 - b).collect(),
                &a.phases.phase_t,
            ),
        ]
        .into_iter()
        .enumerate()
        {
            for u in 0..k {
                let mut p = Complex64::new(0.0, 0.0);
                for e in 0..cfg.elements {
                    for ant in 0..cfg.antennas {
                        p += h[(e, u)]
                            * Complex64::from_polar(betas[e].sqrt(), phis[e])
                            * ch.bs_ris[(e, ant)]
                            * a.beamformer[(ant, s * k + u)];
                    }
                }
                let got = obs.parts.rx_power_parts[s * k + u];
                let want = [p.re * p.re, p.im * p.im];
                for c in 0..2 {
                    assert!((got[c] - want[c]).abs() <= 1e-10 * (want[0] + want[1]));
                }
            }
        }
    }

    #[test]
    fn normalizer_brings_default_state_to_order_one() {
        let cfg = SystemConfig::default();
        let mut rng = RngStream::new(4, 0);
        let ch = generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
        let obs = encode_state(&random_action(&cfg, &mut rng), &ch).unwrap();
        let x = StateNormalizer::for_config(&cfg).apply(&obs.flat);
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        assert!(rms > 0.1 && rms < 10.0, "rms {rms}");
    }
}
