use crate::env::{Environment, StateNormalizer};
use crate::Result;

use super::agent::Agent;
use super::replay::Transition;

/// Per-step training record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Global step index, starting at 1.
    pub step: u64,
    pub episode: u64,
    pub reward: f64,
    /// Exploration scale applied at this step.
    pub eta: f64,
    /// Critic loss of this step's update, NaN when no update ran.
    pub critic_loss: f64,
    /// Critic learning rate after decay.
    pub critic_lr: f64,
}

/// Runs `episodes` episodes of `steps` steps, calling `on_step` after each.
///
/// Each episode redraws the fading and restarts from a random initial
/// configuration. Every step stores its transition and, once the buffer is
/// warm, performs one learning update. Transitions carry the reward the BS
/// computes from its channel estimate; records carry the delivered rate.
pub fn train<F>(env: &mut Environment, agent: &mut Agent, episodes: u64, steps: u64, mut on_step: F) -> Result<()>
where
    F: FnMut(&StepRecord) -> Result<()>,
{
    let norm = StateNormalizer::for_config(env.config());
    let mut global = 0u64;
    for episode in 0..episodes {
        if episode > 0 {
            env.reset()?;
        }
        let mut state = norm.apply(&env.observation().flat);
        for _ in 0..steps {
            global += 1;
            let eta = agent.eta();
            let action = agent.explore(&state);
            let out = env.step(&action)?;
            debug_assert!(out.action.check_feasible(env.config(), 1e-9).is_ok());
            let next_state = norm.apply(&out.next_obs.flat);
            agent.remember(Transition {
                state: std::mem::take(&mut state),
                action,
                reward: out.estimated_reward,
                next_state: next_state.clone(),
            });
            let stats = agent.update();
            state = next_state;
            let record = StepRecord {
                step: global,
                episode,
                reward: out.reward,
                eta,
                critic_loss: stats.map_or(f64::NAN, |s| s.critic_loss),
                critic_lr: agent.critic_lr(),
            };
            if global % 1000 == 0 {
                log::debug!(
                    "step {global} reward {:.4} eta {:.5} critic lr {:.3e}",
                    record.reward,
                    record.eta,
                    record.critic_lr
                );
            }
            on_step(&record)?;
        }
    }
    Ok(())
}

/// Collects the records of [`train`].
pub fn train_collect(env: &mut Environment, agent: &mut Agent, episodes: u64, steps: u64) -> Result<Vec<StepRecord>> {
    let mut out = Vec::with_capacity((episodes * steps) as usize);
    train(env, agent, episodes, steps, |r| {
        out.push(*r);
        Ok(())
    })?;
    Ok(out)
}
