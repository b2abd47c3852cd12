// SPDX-License-Identifier: Apache-2.0

//! Thompson-sampling selection among the candidate-producing pipelines.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Role;

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    #[error("reward {0} outside [0,1]")]
    Reward(f64),
    #[error("`{0}` is not a bandit arm")]
    NotAnArm(Role),
    #[error("bandit needs at least one arm")]
    NoArms,
    #[error("threshold {0} outside (0,1)")]
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmState {
    pub role: Role,
    pub success_count: u64,
    pub failure_count: u64,
}

/// Beta posterior counts per pipeline plus the binarization threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    pub arms: Vec<ArmState>,
    pub reward_threshold: f64,
}

impl BanditState {
    /// Uniform Beta(1,1) prior over the given arms.
    pub fn uniform(roles: &[Role], reward_threshold: f64) -> Result<Self, BanditError> {
        if roles.is_empty() {
            return Err(BanditError::NoArms);
        }
        if let Some(r) = roles.iter().find(|r| **r == Role::Critique) {
            return Err(BanditError::NotAnArm(*r));
        }
        if !(reward_threshold > 0.0 && reward_threshold < 1.0) {
            return Err(BanditError::Threshold(reward_threshold));
        }
        Ok(BanditState {
            arms: roles
                .iter()
                .map(|&role| ArmState {
                    role,
                    success_count: 1,
                    failure_count: 1,
                })
                .collect(),
            reward_threshold,
        })
    }

    /// Both mutators, plus a generator-restart arm when enabled.
    pub fn standard(generator_restart: bool, reward_threshold: f64) -> Result<Self, BanditError> {
        let mut roles = vec![Role::ConservativeMutator, Role::AggressiveMutator];
        if generator_restart {
            roles.push(Role::Generator);
        }
        BanditState::uniform(&roles, reward_threshold)
    }

    pub fn arm(&self, role: Role) -> Option<&ArmState> {
        self.arms.iter().find(|a| a.role == role)
    }
}

/// Samples each arm's Beta posterior and returns the arm with the highest
/// draw (earliest arm on ties).
pub fn select_pipeline<R: Rng + ?Sized>(state: &BanditState, rng: &mut R) -> Role {
    if state.arms.len() == 1 {
        return state.arms[0].role;
    }
    let mut best = (state.arms[0].role, f64::NEG_INFINITY);
    for arm in &state.arms {
        // Counts start at 1 and only grow, so the parameters are valid.
        let beta = Beta::new(arm.success_count as f64, arm.failure_count as f64)
            .expect("beta parameters are positive");
        let draw = beta.sample(rng);
        if draw > best.1 {
            best = (arm.role, draw);
        }
    }
    best.0
}

/// Binarizes `reward` at the threshold and bumps the matching count.
pub fn update_bandit(state: &BanditState, role: Role, reward: f64) -> Result<BanditState, BanditError> {
    if !(0.0..=1.0).contains(&reward) {
        return Err(BanditError::Reward(reward));
    }
    let mut next = state.clone();
    let arm = next
        .arms
        .iter_mut()
        .find(|a| a.role == role)
        .ok_or(BanditError::NotAnArm(role))?;
    if reward >= state.reward_threshold {
        arm.success_count += 1;
    } else {
        arm.failure_count += 1;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::stream_rng;

    fn counts(state: &BanditState, role: Role) -> (u64, u64) {
        let a = state.arm(role).unwrap();
        (a.success_count, a.failure_count)
    }

    #[test]
    fn update_threshold_rule() {
        let s = BanditState::standard(true, DEFAULT_THRESHOLD).unwrap();
        let up = update_bandit(&s, Role::AggressiveMutator, 0.95).unwrap();
        assert_eq!(counts(&up, Role::AggressiveMutator), (2, 1));
        assert_eq!(counts(&up, Role::ConservativeMutator), (1, 1));
        let down = update_bandit(&s, Role::AggressiveMutator, 0.5).unwrap();
        assert_eq!(counts(&down, Role::AggressiveMutator), (1, 2));
    }

    #[test]
    fn update_sequence() {
        let mut s = BanditState::standard(false, DEFAULT_THRESHOLD).unwrap();
        for r in [1.0, 1.0, 0.0] {
            s = update_bandit(&s, Role::ConservativeMutator, r).unwrap();
        }
        assert_eq!(counts(&s, Role::ConservativeMutator), (3, 2));
    }

    #[test]
    fn update_errors() {
        let s = BanditState::standard(false, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(
            update_bandit(&s, Role::ConservativeMutator, 1.5),
            Err(BanditError::Reward(1.5))
        );
        assert_eq!(
            update_bandit(&s, Role::Generator, 0.5),
            Err(BanditError::NotAnArm(Role::Generator))
        );
    }

    #[test]
    fn critique_cannot_be_an_arm() {
        assert!(BanditState::uniform(&[Role::Critique], 0.8).is_err());
        assert!(BanditState::uniform(&[], 0.8).is_err());
    }

    #[test]
    fn single_arm_always_chosen() {
        let s = BanditState::uniform(&[Role::AggressiveMutator], 0.8).unwrap();
        let mut rng = stream_rng(0, 3);
        assert!((0..100).all(|_| select_pipeline(&s, &mut rng) == Role::AggressiveMutator));
    }

    #[test]
    fn relabeling_permutes_selections() {
        let a = BanditState::uniform(
            &[Role::ConservativeMutator, Role::AggressiveMutator, Role::Generator],
            0.8,
        )
        .unwrap();
        let b = BanditState::uniform(
            &[Role::Generator, Role::ConservativeMutator, Role::AggressiveMutator],
            0.8,
        )
        .unwrap();
        let index = |s: &BanditState, r: Role| s.arms.iter().position(|x| x.role == r).unwrap();
        let mut ra = stream_rng(11, 3);
        let mut rb = stream_rng(11, 3);
        for _ in 0..500 {
            let x = select_pipeline(&a, &mut ra);
            let y = select_pipeline(&b, &mut rb);
            assert_eq!(index(&a, x), index(&b, y));
        }
    }
}
