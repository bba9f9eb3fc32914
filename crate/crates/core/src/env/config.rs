use crate::numerics::{db_to_linear, dbm_to_watts};
use crate::{Error, Result};

/// Rectangle the UAV is allowed to hover over, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl UavBounds {
    pub fn contains(&self, xy: [f64; 2]) -> bool {
        (self.x_min..=self.x_max).contains(&xy[0]) && (self.y_min..=self.y_max).contains(&xy[1])
    }
}

/// Physical scenario: array sizes, power budget, noise and geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antennas (M).
    pub antennas: usize,
    /// STAR-RIS elements per face (N).
    pub elements: usize,
    /// Users on each side of the surface (K).
    pub users: usize,
    /// Transmit power budget in watts.
    pub max_power: f64,
    /// Receiver noise power in watts.
    pub noise_power: f64,
    pub bs_xy: [f64; 2],
    pub bs_height: f64,
    pub uav_height: f64,
    /// UAV position at the start of every episode.
    pub uav_start: [f64; 2],
    pub uav_bounds: UavBounds,
    pub reflect_users: Vec<[f64; 2]>,
    pub transmit_users: Vec<[f64; 2]>,
    /// Large-scale power gain at the 1 m reference distance.
    pub ref_gain: f64,
    /// Path-loss exponent of the BS to UAV link.
    pub exponent_bs_ris: f64,
    /// Path-loss exponent of the UAV to user links.
    pub exponent_ris_user: f64,
}

/// Default transmit power budget, dB relative to 1 W.
pub const DEFAULT_PT_DB: f64 = 10.0;
/// Default noise power. Chosen together with `DEFAULT_REF_GAIN_DB` so that
/// sum rates at the default geometry fall in the 1-20 bit/s/Hz range.
pub const DEFAULT_NOISE_DBM: f64 = -110.0;
pub const DEFAULT_REF_GAIN_DB: f64 = -30.0;

impl Default for SystemConfig {
    fn default() -> Self {
        let users = 4;
        SystemConfig {
            antennas: 4,
            elements: 16,
            users,
            max_power: db_to_linear(DEFAULT_PT_DB),
            noise_power: dbm_to_watts(DEFAULT_NOISE_DBM),
            bs_xy: [0.0, 0.0],
            bs_height: 10.0,
            uav_height: 30.0,
            uav_start: [40.0, 20.0],
            uav_bounds: UavBounds {
                x_min: 0.0,
                x_max: 80.0,
                y_min: 0.0,
                y_max: 80.0,
            },
            reflect_users: vec![[80.0, 0.0]; users],
            transmit_users: vec![[80.0, 80.0]; users],
            ref_gain: db_to_linear(DEFAULT_REF_GAIN_DB),
            exponent_bs_ris: 2.2,
            exponent_ris_user: 2.8,
        }
    }
}

impl SystemConfig {
    /// Default scenario resized to `antennas x elements` with `users` per side.
    pub fn with_sizes(antennas: usize, users: usize, elements: usize) -> Self {
        let base = SystemConfig::default();
        SystemConfig {
            antennas,
            elements,
            users,
            reflect_users: vec![base.reflect_users[0]; users],
            transmit_users: vec![base.transmit_users[0]; users],
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.antennas == 0 || self.elements == 0 || self.users == 0 {
            return fail(format!(
                "antennas ({}), elements ({}) and users ({}) must all be at least 1",
                self.antennas, self.elements, self.users
            ));
        }
        if !(self.max_power > 0.0 && self.max_power.is_finite()) {
            return fail(format!("power budget must be positive, got {}", self.max_power));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return fail(format!("noise power must be positive, got {}", self.noise_power));
        }
        let b = &self.uav_bounds;
        if !(b.x_min < b.x_max && b.y_min < b.y_max) {
            return fail(format!("UAV bounds not well ordered: {b:?}"));
        }
        if !b.contains(self.uav_start) {
            return fail(format!("UAV start {:?} outside bounds", self.uav_start));
        }
        if self.reflect_users.len() != self.users || self.transmit_users.len() != self.users {
            return fail(format!(
                "expected {} user positions per side, got {} reflect and {} transmit",
                self.users,
                self.reflect_users.len(),
                self.transmit_users.len()
            ));
        }
        if !(self.ref_gain > 0.0) || !(self.exponent_bs_ris >= 0.0) || !(self.exponent_ris_user >= 0.0) {
            return fail("path-loss parameters must be positive".into());
        }
        Ok(())
    }

    pub fn distance_bs_uav(&self, uav_xy: [f64; 2]) -> f64 {
        distance_3d(self.bs_xy, self.bs_height, uav_xy, self.uav_height)
    }

    pub fn distance_uav_user(&self, uav_xy: [f64; 2], user_xy: [f64; 2]) -> f64 {
        distance_3d(uav_xy, self.uav_height, user_xy, 0.0)
    }

    pub fn gain_bs_uav(&self, uav_xy: [f64; 2]) -> f64 {
        large_scale_gain(self.distance_bs_uav(uav_xy), self.ref_gain, self.exponent_bs_ris)
    }

    pub fn gain_uav_user(&self, uav_xy: [f64; 2], user_xy: [f64; 2]) -> f64 {
        large_scale_gain(
            self.distance_uav_user(uav_xy, user_xy),
            self.ref_gain,
            self.exponent_ris_user,
        )
    }
}

fn distance_3d(a: [f64; 2], ha: f64, b: [f64; 2], hb: f64) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = ha - hb;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Log-distance power gain `ref_gain * d^-exponent`. Distances below the 1 m
/// reference are clamped to 1 m.
pub fn large_scale_gain(distance: f64, ref_gain: f64, exponent: f64) -> f64 {
    ref_gain * distance.max(1.0).powf(-exponent)
}
