use super::network::Network;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Denominator floor of the relative error, so that gradients which are
/// zero analytically and numerically compare as equal.
pub const REL_FLOOR: f64 = 1e-6;

/// Outcome of a finite-difference comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest relative error over all parameters.
    pub max_param_error: f64,
    /// Parameter index attaining `max_param_error`.
    pub worst_param: usize,
    /// Largest relative error over the side-input (action) gradient.
    pub max_side_error: f64,
    pub checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR)
}

/// Analytic gradients of the scalar loss `sum(outputs)` with respect to
/// parameters and side input.
pub fn analytic_gradients(net: &Network, input: &[f64], side: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let trace = net.forward_trace(input, side);
    let mut grads = vec![0.0; net.param_count()];
    let ones = vec![1.0; net.output_len()];
    let g = net.backward(&trace, &ones, Some(&mut grads));
    (grads, g.side)
}

/// Central finite differences of `sum(outputs)`.
pub fn numeric_gradients(net: &Network, input: &[f64], side: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let loss = |p: &[f64], s: &[f64]| net.forward_with(p, input, s).iter().sum::<f64>();
    let mut params = net.params().to_vec();
    let mut grads = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + FD_STEP;
        let up = loss(&params, side);
        params[i] = orig - FD_STEP;
        let down = loss(&params, side);
        params[i] = orig;
        grads.push((up - down) / (2.0 * FD_STEP));
    }
    let mut s = side.to_vec();
    let mut side_grads = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let orig = s[i];
        s[i] = orig + FD_STEP;
        let up = loss(&params, &s);
        s[i] = orig - FD_STEP;
        let down = loss(&params, &s);
        s[i] = orig;
        side_grads.push((up - down) / (2.0 * FD_STEP));
    }
    (grads, side_grads)
}

/// Compares supplied analytic gradients against numeric ones.
pub fn compare(
    analytic: (&[f64], &[f64]),
    numeric: (&[f64], &[f64]),
    tolerance: f64,
) -> GradCheckReport {
    assert_eq!(analytic.0.len(), numeric.0.len());
    assert_eq!(analytic.1.len(), numeric.1.len());
    let mut max_param_error = 0.0;
    let mut worst_param = 0;
    for (i, (&a, &n)) in analytic.0.iter().zip(numeric.0).enumerate() {
        let e = relative_error(a, n);
        if e > max_param_error || e.is_nan() {
            max_param_error = e;
            worst_param = i;
        }
    }
    let max_side_error = analytic
        .1
        .iter()
        .zip(numeric.1)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max);
    GradCheckReport {
        max_param_error,
        worst_param,
        max_side_error,
        checked: analytic.0.len() + analytic.1.len(),
        tolerance,
        passed: max_param_error < tolerance && max_side_error < tolerance,
    }
}

/// Checks every parameter gradient and the side-input gradient of `net`.
pub fn finite_diff_check(net: &Network, input: &[f64], side: &[f64], tolerance: f64) -> GradCheckReport {
    let (ap, aside) = analytic_gradients(net, input, side);
    let (np, nside) = numeric_gradients(net, input, side);
    compare((&ap, &aside), (&np, &nside), tolerance)
}
