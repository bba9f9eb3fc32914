use crate::numerics::{sample_complex_gaussian, ComplexMatrix, RngStream};
use crate::{Error, Result};

use super::SystemConfig;

/// The three cascaded links, with the per-entry variance each was drawn with.
///
/// `bs_ris` is `N x M`; `ris_reflect` and `ris_transmit` are `N x K` with one
/// column per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub bs_ris: ComplexMatrix,
    pub ris_reflect: ComplexMatrix,
    pub ris_transmit: ComplexMatrix,
    /// Per-entry variance of `bs_ris`.
    pub var_bs_ris: f64,
    /// Per-column (per-user) variances of `ris_reflect`.
    pub var_reflect: Vec<f64>,
    /// Per-column (per-user) variances of `ris_transmit`.
    pub var_transmit: Vec<f64>,
}

impl ChannelSet {
    /// Position-independent channels with unit nominal variance.
    pub fn from_matrices(
        bs_ris: ComplexMatrix,
        ris_reflect: ComplexMatrix,
        ris_transmit: ComplexMatrix,
    ) -> Result<Self> {
        let n = bs_ris.rows();
        if ris_reflect.rows() != n
            || ris_transmit.rows() != n
            || ris_reflect.cols() != ris_transmit.cols()
        {
            return Err(Error::dims(
                "ChannelSet::from_matrices",
                format!(
                    "bs_ris {:?}, ris_reflect {:?}, ris_transmit {:?}",
                    bs_ris.shape(),
                    ris_reflect.shape(),
                    ris_transmit.shape()
                ),
            ));
        }
        let k = ris_reflect.cols();
        Ok(ChannelSet {
            bs_ris,
            ris_reflect,
            ris_transmit,
            var_bs_ris: 1.0,
            var_reflect: vec![1.0; k],
            var_transmit: vec![1.0; k],
        })
    }

    pub fn zeros(cfg: &SystemConfig) -> Self {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
        ChannelSet {
            bs_ris: ComplexMatrix::zeros(n, m),
            ris_reflect: ComplexMatrix::zeros(n, k),
            ris_transmit: ComplexMatrix::zeros(n, k),
            var_bs_ris: 1.0,
            var_reflect: vec![1.0; k],
            var_transmit: vec![1.0; k],
        }
    }

    pub fn matches(&self, cfg: &SystemConfig) -> bool {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
        self.bs_ris.shape() == (n, m)
            && self.ris_reflect.shape() == (n, k)
            && self.ris_transmit.shape() == (n, k)
    }
}

/// Unit-variance small-scale Rayleigh fading of one episode.
///
/// Held fixed within an episode; the large-scale gains are applied for
/// whatever UAV position is current.
#[derive(Debug, Clone, PartialEq)]
pub struct Fading {
    pub bs_ris: ComplexMatrix,
    pub ris_reflect: ComplexMatrix,
    pub ris_transmit: ComplexMatrix,
}

impl Fading {
    pub fn draw(cfg: &SystemConfig, rng: &mut RngStream) -> Result<Self> {
        let (m, n, k) = (cfg.antennas, cfg.elements, cfg.users);
        Ok(Fading {
            bs_ris: sample_complex_gaussian(rng, n, m, 1.0)?,
            ris_reflect: sample_complex_gaussian(rng, n, k, 1.0)?,
            ris_transmit: sample_complex_gaussian(rng, n, k, 1.0)?,
        })
    }
}

/// Anything that yields the channels seen with the UAV at a given position.
pub trait ChannelSource {
    fn channels_at(&self, cfg: &SystemConfig, uav_xy: [f64; 2]) -> ChannelSet;
}

impl ChannelSource for Fading {
    fn channels_at(&self, cfg: &SystemConfig, uav_xy: [f64; 2]) -> ChannelSet {
        let var_bs_ris = cfg.gain_bs_uav(uav_xy);
        let var_reflect: Vec<f64> = cfg
            .reflect_users
            .iter()
            .map(|&u| cfg.gain_uav_user(uav_xy, u))
            .collect();
        let var_transmit: Vec<f64> = cfg
            .transmit_users
            .iter()
            .map(|&u| cfg.gain_uav_user(uav_xy, u))
            .collect();
        let mut bs_ris = self.bs_ris.clone();
        bs_ris.scale_real(var_bs_ris.sqrt());
        ChannelSet {
            bs_ris,
            ris_reflect: scale_columns(&self.ris_reflect, &var_reflect),
            ris_transmit: scale_columns(&self.ris_transmit, &var_transmit),
            var_bs_ris,
            var_reflect,
            var_transmit,
        }
    }
}

/// A fixed channel realization that ignores the UAV position.
impl ChannelSource for ChannelSet {
    fn channels_at(&self, _cfg: &SystemConfig, _uav_xy: [f64; 2]) -> ChannelSet {
        self.clone()
    }
}

fn scale_columns(h: &ComplexMatrix, variances: &[f64]) -> ComplexMatrix {
    let amps: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    ComplexMatrix::from_fn(h.rows(), h.cols(), |i, j| h[(i, j)] * amps[j])
}

/// Draws Rayleigh channels for a UAV at `uav_xy`.
///
/// Every entry of a link is `CN(0, g)` where `g` is the log-distance gain of
/// the 3-D distance spanned by that link.
pub fn generate_channels(
    cfg: &SystemConfig,
    uav_xy: [f64; 2],
    rng: &mut RngStream,
) -> Result<ChannelSet> {
    Ok(Fading::draw(cfg, rng)?.channels_at(cfg, uav_xy))
}

/// Imperfect CSI: returns `h + dh` with `dh ~ CN(0, delta * var_h / (1 - delta))`
/// per entry, so that `E|h_est - h|^2 / E|h_est|^2 = delta`.
pub fn corrupt_csi(channels: &ChannelSet, delta: f64, rng: &mut RngStream) -> Result<ChannelSet> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Config(format!(
            "CSI uncertainty must lie in [0, 1), got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(channels.clone());
    }
    let ratio = delta / (1.0 - delta);
    let perturb = |h: &ComplexMatrix, col_var: &dyn Fn(usize) -> f64, rng: &mut RngStream| {
        let mut out = h.clone();
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                let sd = (ratio * col_var(j) / 2.0).sqrt();
                let re = rng.standard_normal() * sd;
                let im = rng.standard_normal() * sd;
                out[(i, j)].re += re;
                out[(i, j)].im += im;
            }
        }
        out
    };
    Ok(ChannelSet {
        bs_ris: perturb(&channels.bs_ris, &|_| channels.var_bs_ris, rng),
        ris_reflect: perturb(&channels.ris_reflect, &|j| channels.var_reflect[j], rng),
        ris_transmit: perturb(&channels.ris_transmit, &|j| channels.var_transmit[j], rng),
        ..channels.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_power(h: &ComplexMatrix) -> f64 {
        h.trace_gram() / h.as_slice().len() as f64
    }

    #[test]
    fn bs_ris_power_matches_gain() {
        let cfg = SystemConfig::with_sizes(4, 1, 16);
        let mut rng = RngStream::new(10, 0);
        let uav = cfg.uav_start;
        let g = cfg.gain_bs_uav(uav);
        let mut acc = 0.0;
        let mut count = 0usize;
        while count < 100_000 {
            let ch = generate_channels(&cfg, uav, &mut rng).unwrap();
            acc += ch.bs_ris.trace_gram();
            count += ch.bs_ris.as_slice().len();
        }
        let est = acc / count as f64;
        assert!((est / g - 1.0).abs() < 0.03, "{est} vs {g}");
    }

    #[test]
    fn closer_uav_raises_reflect_power() {
        let cfg = SystemConfig::with_sizes(2, 2, 8);
        let near = [80.0, 0.0];
        let far = [0.0, 80.0];
        let mut p_near = 0.0;
        let mut p_far = 0.0;
        let mut rng = RngStream::new(11, 0);
        for _ in 0..2000 {
            p_near += mean_power(&generate_channels(&cfg, near, &mut rng).unwrap().ris_reflect);
            p_far += mean_power(&generate_channels(&cfg, far, &mut rng).unwrap().ris_reflect);
        }
        assert!(p_near > p_far);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SystemConfig::default();
        let a = generate_channels(&cfg, cfg.uav_start, &mut RngStream::new(3, 7)).unwrap();
        let b = generate_channels(&cfg, cfg.uav_start, &mut RngStream::new(3, 7)).unwrap();
        assert_eq!(a, b);
        assert!(a.matches(&cfg));
    }

    #[test]
    fn per_user_columns_use_their_own_distance() {
        let mut cfg = SystemConfig::with_sizes(1, 2, 1);
        cfg.reflect_users = vec![[80.0, 0.0], [0.0, 80.0]];
        let ch = Fading::draw(&cfg, &mut RngStream::new(1, 0))
            .unwrap()
            .channels_at(&cfg, [80.0, 0.0]);
        assert!(ch.var_reflect[0] > ch.var_reflect[1]);
        assert_eq!(ch.var_reflect[0], cfg.gain_uav_user([80.0, 0.0], [80.0, 0.0]));
    }

    #[test]
    fn zero_delta_is_identity() {
        let cfg = SystemConfig::default();
        let mut rng = RngStream::new(4, 0);
        let ch = generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
        assert_eq!(corrupt_csi(&ch, 0.0, &mut rng).unwrap(), ch);
    }

    #[test]
    fn delta_out_of_range_rejected() {
        let cfg = SystemConfig::default();
        let mut rng = RngStream::new(4, 0);
        let ch = generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
        assert!(corrupt_csi(&ch, 1.0, &mut rng).is_err());
        assert!(corrupt_csi(&ch, -0.1, &mut rng).is_err());
    }

    #[test]
    fn half_delta_error_power_equals_channel_power() {
        // delta = 0.5 gives error variance equal to the channel variance
        let h = ComplexMatrix::zeros(1000, 100);
        let ch = ChannelSet::from_matrices(h.clone(), ComplexMatrix::zeros(1000, 1), ComplexMatrix::zeros(1000, 1))
            .unwrap();
        let est = corrupt_csi(&ch, 0.5, &mut RngStream::new(6, 0)).unwrap();
        let p = mean_power(&est.bs_ris);
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn tiny_delta_converges_to_identity() {
        let cfg = SystemConfig::default();
        let mut rng = RngStream::new(5, 0);
        let ch = generate_channels(&cfg, cfg.uav_start, &mut rng).unwrap();
        let est = corrupt_csi(&ch, 1e-6, &mut rng).unwrap();
        let sup = ch
            .ris_reflect
            .as_slice()
            .iter()
            .zip(est.ris_reflect.as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = ch.var_reflect[0].sqrt();
        assert!(sup < 1e-2 * scale, "sup {sup} vs channel scale {scale}");
    }
}
