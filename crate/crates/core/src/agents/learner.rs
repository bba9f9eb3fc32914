//! Update rules shared by the learners, written as free functions over
//! networks so they can be checked in isolation.

use crate::nn::{Adam, Network};
use crate::numerics::RngStream;

use super::replay::Transition;

/// Target-policy smoothing: clipped Gaussian noise on the target action.
#[derive(Debug)]
pub struct Smoothing<'a> {
    pub sigma: f64,
    pub clip: f64,
    pub rng: &'a mut RngStream,
}

/// Regression targets `y_i = r_i + discount * Q'(s'_i, pi'(s'_i))`.
///
/// With several target critics the smallest estimate is used.
pub fn critic_target(
    batch: &[&Transition],
    target_actor: &Network,
    target_critics: &[Network],
    discount: f64,
    mut smoothing: Option<Smoothing<'_>>,
) -> Vec<f64> {
    assert!(!target_critics.is_empty());
    batch
        .iter()
        .map(|t| {
            let mut a = target_actor.forward(&t.next_state, &[]);
            if let Some(sm) = smoothing.as_mut() {
                for x in &mut a {
                    let eps = (sm.sigma * sm.rng.standard_normal()).clamp(-sm.clip, sm.clip);
                    *x = (*x + eps).clamp(-1.0, 1.0);
                }
            }
            let q = target_critics
                .iter()
                .map(|c| c.forward(&t.next_state, &a)[0])
                .fold(f64::INFINITY, f64::min);
            t.reward + discount * q
        })
        .collect()
}

/// Mean squared error of `critic` against `y` and its parameter gradient.
pub fn critic_loss_grad(critic: &Network, batch: &[&Transition], y: &[f64]) -> (f64, Vec<f64>) {
    assert_eq!(batch.len(), y.len());
    let b = batch.len() as f64;
    let mut grads = vec![0.0; critic.param_count()];
    let mut loss = 0.0;
    for (t, &yi) in batch.iter().zip(y) {
        let trace = critic.forward_trace(&t.state, &t.action);
        let err = trace.output()[0] - yi;
        loss += err * err / b;
        critic.backward(&trace, &[2.0 * err / b], Some(&mut grads));
    }
    (loss, grads)
}

/// One Adam step on the critic's squared error; returns the loss before the
/// step.
pub fn critic_update(critic: &mut Network, opt: &mut Adam, batch: &[&Transition], y: &[f64]) -> f64 {
    let (loss, grads) = critic_loss_grad(critic, batch, y);
    opt.step(critic.params_mut(), &grads);
    loss
}

/// Mean of `Q(s, pi(s))` over `states` and the gradient of its negation
/// with respect to the actor's parameters.
pub fn actor_objective_grad(actor: &Network, critic: &Network, states: &[&[f64]]) -> (f64, Vec<f64>) {
    let b = states.len() as f64;
    let mut grads = vec![0.0; actor.param_count()];
    let mut mean_q = 0.0;
    for s in states {
        let a_trace = actor.forward_trace(s, &[]);
        let c_trace = critic.forward_trace(s, a_trace.output());
        mean_q += c_trace.output()[0] / b;
        let dq_da = critic.backward(&c_trace, &[-1.0 / b], None).side;
        actor.backward(&a_trace, &dq_da, Some(&mut grads));
    }
    (mean_q, grads)
}

/// One Adam ascent step on the mean critic value of the actor's actions.
/// The critic is read only. Returns the mean value before the step.
pub fn actor_update(actor: &mut Network, opt: &mut Adam, critic: &Network, batch: &[&Transition]) -> f64 {
    let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
    let (mean_q, grads) = actor_objective_grad(actor, critic, &states);
    opt.step(actor.params_mut(), &grads);
    mean_q
}
