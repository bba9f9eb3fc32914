use num_complex::Complex64;

use crate::numerics::ComplexMatrix;
use crate::{Error, Result};

use super::{Action, ChannelSet, PhaseProfile, Side};

/// Cascaded channel `H_side^T diag(sqrt(beta) e^{j phi}) H_BR`, one row per user.
///
/// `h_side` is `N x K`, `bs_ris` is `N x M`; the result is `K x M`.
pub fn effective_channel(
    h_side: &ComplexMatrix,
    phases: &PhaseProfile,
    side: Side,
    bs_ris: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = bs_ris.rows();
    if h_side.rows() != n || phases.len() != n {
        return Err(Error::dims(
            "effective_channel",
            format!(
                "user channel {:?}, BS channel {:?}, {} surface elements",
                h_side.shape(),
                bs_ris.shape(),
                phases.len()
            ),
        ));
    }
    let theta = phases.coefficients(side);
    let (k, m) = (h_side.cols(), bs_ris.cols());
    let mut out = ComplexMatrix::zeros(k, m);
    for (e, &t) in theta.iter().enumerate() {
        let row = bs_ris.row(e);
        for u in 0..k {
            let a = h_side[(e, u)] * t;
            for (j, &g) in row.iter().enumerate() {
                out[(u, j)] += a * g;
            }
        }
    }
    Ok(out)
}

/// SINR of user `k` given its side's effective channel (`K x M`) and
/// precoders (`M x K`).
pub fn sinr(eff: &ComplexMatrix, precoders: &ComplexMatrix, k: usize, noise_power: f64) -> f64 {
    debug_assert!(k < eff.rows());
    debug_assert_eq!(eff.cols(), precoders.rows());
    let h = eff.row(k);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for n in 0..precoders.cols() {
        let g: Complex64 = h
            .iter()
            .enumerate()
            .map(|(m, &hm)| hm * precoders[(m, n)])
            .sum();
        if n == k {
            signal = g.norm_sqr();
        } else {
            interference += g.norm_sqr();
        }
    }
    signal / (interference + noise_power)
}

/// Per-user achievable rates, bit/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub reflect: Vec<f64>,
    pub transmit: Vec<f64>,
}

impl RateReport {
    pub fn total(&self) -> f64 {
        self.reflect.iter().sum::<f64>() + self.transmit.iter().sum::<f64>()
    }
}

/// System sum rate `sum_k log2(1 + SINR_r,k) + log2(1 + SINR_t,k)`.
pub fn sum_rate(channels: &ChannelSet, action: &Action, noise_power: f64) -> Result<(f64, RateReport)> {
    let k = channels.ris_reflect.cols();
    if action.beamformer.cols() != 2 * k || action.beamformer.rows() != channels.bs_ris.cols() {
        return Err(Error::dims(
            "sum_rate",
            format!(
                "beamformer {:?} for {} antennas and {k} users per side",
                action.beamformer.shape(),
                channels.bs_ris.cols()
            ),
        ));
    }
    let side_rates = |h_side: &ComplexMatrix, side: Side| -> Result<Vec<f64>> {
        let eff = effective_channel(h_side, &action.phases, side, &channels.bs_ris)?;
        let w = action.precoders(side);
        Ok((0..k)
            .map(|u| (1.0 + sinr(&eff, &w, u, noise_power)).log2())
            .collect())
    };
    let report = RateReport {
        reflect: side_rates(&channels.ris_reflect, Side::Reflect)?,
        transmit: side_rates(&channels.ris_transmit, Side::Transmit)?,
    };
    Ok((report.total(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{project_action, action_dim, SystemConfig};
    use crate::numerics::{sample_complex_gaussian, RngStream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ones(r: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, k, |_, _| c(1.0, 0.0))
    }

    fn unit_profile(n: usize, beta_r: f64) -> PhaseProfile {
        PhaseProfile {
            phase_r: vec![0.0; n],
            phase_t: vec![0.0; n],
            beta_r: vec![beta_r; n],
        }
    }

    #[test]
    fn scalar_effective_channel() {
        let eff = effective_channel(&ones(1, 1), &unit_profile(1, 1.0), Side::Reflect, &ones(1, 1)).unwrap();
        assert_eq!(eff[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn all_energy_transmitted_zeroes_reflect_side() {
        let mut rng = RngStream::new(1, 0);
        let h = sample_complex_gaussian(&mut rng, 4, 2, 1.0).unwrap();
        let g = sample_complex_gaussian(&mut rng, 4, 3, 1.0).unwrap();
        let eff = effective_channel(&h, &unit_profile(4, 0.0), Side::Reflect, &g).unwrap();
        assert_eq!(eff.trace_gram(), 0.0);
    }

    #[test]
    fn effective_channel_matches_triple_sum() {
        let mut rng = RngStream::new(2, 0);
        let (n, m, k) = (5, 3, 2);
        let h = sample_complex_gaussian(&mut rng, n, k, 1.0).unwrap();
        let g = sample_complex_gaussian(&mut rng, n, m, 1.0).unwrap();
        let phases = PhaseProfile {
            phase_r: (0..n).map(|_| rng.uniform() * 6.0).collect(),
            phase_t: (0..n).map(|_| rng.uniform() * 6.0).collect(),
            beta_r: (0..n).map(|_| rng.uniform()).collect(),
        };
        for side in [Side::Reflect, Side::Transmit] {
            let eff = effective_channel(&h, &phases, side, &g).unwrap();
            for u in 0..k {
                for a in 0..m {
                    let mut acc = c(0.0, 0.0);
                    for e in 0..n {
                        let (beta, phi) = match side {
                            Side::Reflect => (phases.beta_r[e], phases.phase_r[e]),
                            Side::Transmit => (1.0 - phases.beta_r[e], phases.phase_t[e]),
                        };
                        acc += h[(e, u)] * c(phi.cos(), phi.sin()) * beta.sqrt() * g[(e, a)];
                    }
                    assert!((eff[(u, a)] - acc).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sinr_simple_cases() {
        let eff = ones(1, 1);
        assert_eq!(sinr(&eff, &ones(1, 1), 0, 1.0), 1.0);
        assert_eq!(sinr(&eff, &ComplexMatrix::zeros(1, 1), 0, 1.0), 0.0);
    }

    #[test]
    fn sinr_matches_loops() {
        let mut rng = RngStream::new(3, 0);
        let (k, m) = (3, 2);
        let eff = sample_complex_gaussian(&mut rng, k, m, 1.0).unwrap();
        let w = sample_complex_gaussian(&mut rng, m, k, 1.0).unwrap();
        let noise = 0.3;
        for u in 0..k {
            let mut num = 0.0;
            let mut den = noise;
            for n in 0..k {
                let (mut re, mut im) = (0.0, 0.0);
                for a in 0..m {
                    let (x, y) = (eff[(u, a)], w[(a, n)]);
                    re += x.re * y.re - x.im * y.im;
                    im += x.re * y.im + x.im * y.re;
                }
                let p = re * re + im * im;
                if n == u {
                    num = p;
                } else {
                    den += p;
                }
            }
            assert!((sinr(&eff, &w, u, noise) - num / den).abs() < 1e-12);
        }
    }

    fn unit_system() -> (ChannelSet, Action) {
        let ch = ChannelSet::from_matrices(ones(1, 1), ones(1, 1), ones(1, 1)).unwrap();
        let action = Action {
            beamformer: ComplexMatrix::from_vec(1, 2, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
            phases: unit_profile(1, 1.0),
            uav_xy: [40.0, 20.0],
        };
        (ch, action)
    }

    #[test]
    fn unit_link_rate_is_one_bit() {
        let (ch, action) = unit_system();
        let (r, report) = sum_rate(&ch, &action, 1.0).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(report.reflect, vec![1.0]);
        assert_eq!(report.transmit, vec![0.0]);
    }

    #[test]
    fn zero_beamformer_zero_rate() {
        let (ch, mut action) = unit_system();
        action.beamformer = ComplexMatrix::zeros(1, 2);
        assert_eq!(sum_rate(&ch, &action, 1.0).unwrap().0, 0.0);
    }

    #[test]
    fn global_phase_invariance() {
        let cfg = SystemConfig::with_sizes(3, 2, 5);
        let mut rng = RngStream::new(9, 0);
        let ch = crate::env::generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
        let raw: Vec<f64> = (0..action_dim(&cfg)).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let a = project_action(&raw, &cfg).unwrap();
        let (r0, _) = sum_rate(&ch, &a, cfg.noise_power).unwrap();
        let mut b = a.clone();
        b.beamformer = a.beamformer.scale(Complex64::from_polar(1.0, 1.234));
        let (r1, _) = sum_rate(&ch, &b, cfg.noise_power).unwrap();
        assert!(((r1 - r0) / r0).abs() < 1e-10);
    }

    #[test]
    fn single_user_power_monotone() {
        let mut rng = RngStream::new(10, 0);
        let eff = sample_complex_gaussian(&mut rng, 1, 3, 1.0).unwrap();
        let w = sample_complex_gaussian(&mut rng, 3, 1, 1.0).unwrap();
        let base = sinr(&eff, &w, 0, 0.5);
        for c in [1.1, 2.0, 5.0] {
            let scaled = w.scale(Complex64::new(c, 0.0));
            assert!(sinr(&eff, &scaled, 0, 0.5) > base);
        }
    }

    #[test]
    fn mismatched_beamformer_rejected() {
        let (ch, mut action) = unit_system();
        action.beamformer = ComplexMatrix::zeros(2, 2);
        assert!(sum_rate(&ch, &action, 1.0).is_err());
    }
}
