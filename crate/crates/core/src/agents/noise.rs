use crate::numerics::RngStream;

/// Exploration scale `eta_t = eta0 * exp(-t / horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    eta0: f64,
    horizon: f64,
    step: u64,
}

impl NoiseSchedule {
    pub fn new(eta0: f64, horizon: f64) -> Self {
        assert!(eta0 >= 0.0 && horizon > 0.0, "invalid noise schedule");
        NoiseSchedule { eta0, horizon, step: 0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta_at(self.step)
    }

    pub fn eta_at(&self, step: u64) -> f64 {
        self.eta0 * (-(step as f64) / self.horizon).exp()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Perturbs `action` with the current scale, then advances the schedule.
    pub fn explore(&mut self, action: &[f64], rng: &mut RngStream) -> Vec<f64> {
        let eta = self.eta();
        self.step += 1;
        if eta == 0.0 {
            return action.to_vec();
        }
        action.iter().map(|&a| perturb(a, eta, rng.standard_normal())).collect()
    }
}

/// `a + eta * o`.
pub fn perturb(a: f64, eta: f64, o: f64) -> f64 {
    a + eta * o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_is_identity() {
        let mut s = NoiseSchedule::new(0.0, 10.0);
        let a = [0.3, -0.9, 0.0];
        assert_eq!(s.explore(&a, &mut RngStream::new(1, 0)), a.to_vec());
    }

    #[test]
    fn scalar_arithmetic() {
        assert!((perturb(0.5, 0.1, 0.3) - 0.53).abs() < 1e-15);
    }

    #[test]
    fn non_increasing() {
        let s = NoiseSchedule::new(0.1, 500.0);
        assert_eq!(s.eta_at(0), 0.1);
        assert!((s.eta_at(500) - 0.1 * (-1.0f64).exp()).abs() < 1e-15);
        for t in 0..5000 {
            assert!(s.eta_at(t + 1) <= s.eta_at(t) && s.eta_at(t) >= 0.0);
        }
    }

    #[test]
    fn perturbation_variance() {
        let eta = 0.1;
        let mut s = NoiseSchedule::new(eta, f64::INFINITY);
        let mut rng = RngStream::new(2, 0);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let d = s.explore(&[0.25], &mut rng)[0] - 0.25;
            sum += d;
            sq += d * d;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        // sampling sd of the variance estimate is eta^2 sqrt(2/n)
        assert!((var - eta * eta).abs() < 4.0 * eta * eta * (2.0 / n as f64).sqrt());
    }
}
