//! Seeded Monte Carlo simulation of a policy on an instance, as an
//! independent cross-check of the exact evaluation.
//!
//! Replication `r` uses the stream seed `splitmix64(seed + (r + 1) * GOLDEN)`
//! feeding a ChaCha8 generator, so replications are independent but the
//! whole run is reproducible bit for bit from the root seed. Arrivals are
//! drawn by inverse transform on the truncated distribution `p[j][.]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    stage_cost_unchecked, Action, ArrivalModel, ProblemConfig, State, StateSpace,
};
use crate::policies::{apply_thresholds, RealizedPolicy, TabularPolicy, ThresholdPolicy};
use crate::Real;

/// Monte Carlo estimate of the long-run average cost.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimResult<T> {
    pub mean_cost: T,
    /// Standard error of the mean over replications (0 when only one
    /// replication is run).
    pub std_error: T,
    pub horizon: u64,
    pub warmup: u64,
    pub replications: u32,
    pub seed: u64,
}

/// A stationary decision rule the simulator can follow.
pub trait StationaryPolicy<T: Real> {
    fn action_at(&self, index: usize, x: &State, config: &ProblemConfig<T>) -> Action;
}

impl<T: Real> StationaryPolicy<T> for TabularPolicy {
    fn action_at(&self, index: usize, _x: &State, _config: &ProblemConfig<T>) -> Action {
        self.actions[index].clone()
    }
}

impl<T: Real> StationaryPolicy<T> for ThresholdPolicy {
    fn action_at(&self, _index: usize, x: &State, config: &ProblemConfig<T>) -> Action {
        apply_thresholds(self, x, config)
    }
}

impl<T: Real> StationaryPolicy<T> for RealizedPolicy {
    fn action_at(&self, index: usize, x: &State, config: &ProblemConfig<T>) -> Action {
        match self {
            RealizedPolicy::Tabular(p) => p.action_at(index, x, config),
            RealizedPolicy::Threshold(p) => p.action_at(index, x, config),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn replication_seed(root: u64, replication: u32) -> u64 {
    splitmix64(root.wrapping_add((replication as u64 + 1).wrapping_mul(GOLDEN)))
}

/// Simulates a policy from the empty state: each period the policy acts,
/// the stage cost accrues (after warmup), arrivals are sampled per lead
/// time, and the queue shifts.
#[allow(clippy::too_many_arguments)]
pub fn simulate<T: Real, P: StationaryPolicy<T>>(
    policy: &P,
    config: &ProblemConfig<T>,
    model: &ArrivalModel<T>,
    space: &StateSpace,
    horizon: u64,
    warmup: u64,
    replications: u32,
    seed: u64,
) -> Result<SimResult<T>> {
    if replications < 1 {
        return Err(Error::InvalidConfig("replications must be >= 1".into()));
    }
    if warmup >= horizon {
        return Err(Error::InvalidConfig("horizon must exceed warmup".into()));
    }
    let k = config.horizon as usize;
    // per-row cumulative distributions in f64, so sampling is identical
    // for every scalar type
    let cdf: Vec<Vec<f64>> = model
        .p
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.iter()
                .map(|&v| {
                    acc += v.to_f64().unwrap();
                    acc
                })
                .collect()
        })
        .collect();

    let measured = (horizon - warmup) as f64;
    let mut means = Vec::with_capacity(replications as usize);
    for r in 0..replications {
        let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed, r));
        let mut x = State(vec![0u32; k]);
        let mut total = 0.0f64;
        for t in 0..horizon {
            let idx = space.state_to_index(&x);
            let y = policy.action_at(idx, &x, config);
            debug_assert!(crate::model::check_feasible(&x, &y, config).is_ok());
            if t >= warmup {
                total += stage_cost_unchecked::<T>(&y.0, config).to_f64().unwrap();
            }
            let mut next = vec![0u32; k];
            for j in 0..k {
                let carried = if j + 1 < k { x.0[j + 1] - y.0[j + 1] } else { 0 };
                let u: f64 = rng.gen();
                let a = cdf[j].iter().position(|&c| u < c).unwrap_or(cdf[j].len() - 1) as u32;
                next[j] = carried + a;
                debug_assert!(next[j] <= space.digit_bound(j), "trajectory left the space");
            }
            x = State(next);
        }
        means.push(total / measured);
    }

    let n = replications as f64;
    let mean = means.iter().sum::<f64>() / n;
    let std_error = if replications >= 2 {
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(SimResult {
        mean_cost: T::from_f64(mean).unwrap(),
        std_error: T::from_f64(std_error).unwrap(),
        horizon,
        warmup,
        replications,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_arrival_model, enumerate_states, LoadPattern};
    use crate::policies::do_nothing_policy;
    use crate::solver::evaluate_policy;

    fn cfg(k: u32, m: u32, a: u32, lambda: f64, ce: f64, co: f64) -> ProblemConfig<f64> {
        ProblemConfig::new(k, m, a, lambda, ce, co, LoadPattern::Equal)
    }

    #[test]
    fn no_arrivals_costs_nothing() {
        let c = cfg(3, 1, 2, 0.0, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let pol = do_nothing_policy(&space);
        let r = simulate(&pol, &c, &model, &space, 5_000, 500, 3, 42).unwrap();
        assert_eq!(r.mean_cost, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn runs_are_reproducible() {
        let c = cfg(3, 1, 1, 0.6, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let pol = do_nothing_policy(&space);
        let a = simulate(&pol, &c, &model, &space, 10_000, 1_000, 4, 7).unwrap();
        let b = simulate(&pol, &c, &model, &space, 10_000, 1_000, 4, 7).unwrap();
        assert_eq!(a, b);
        let other = simulate(&pol, &c, &model, &space, 10_000, 1_000, 4, 8).unwrap();
        assert_ne!(a.mean_cost, other.mean_cost);
    }

    #[test]
    fn estimate_brackets_the_exact_gain() {
        let c = cfg(4, 1, 1, 0.2, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let pol = do_nothing_policy(&space);
        let exact = evaluate_policy(&pol, &space, &model, &c).unwrap().gain;
        let r = simulate(&pol, &c, &model, &space, 40_000, 2_000, 10, 20260823).unwrap();
        assert!(
            (r.mean_cost - exact).abs() <= 3.0 * r.std_error,
            "mean {} vs exact {exact}, 3se {}",
            r.mean_cost,
            3.0 * r.std_error
        );
    }

    #[test]
    fn input_guards() {
        let c = cfg(2, 1, 1, 0.4, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let pol = do_nothing_policy(&space);
        assert!(simulate(&pol, &c, &model, &space, 100, 100, 2, 1).is_err());
        assert!(simulate(&pol, &c, &model, &space, 100, 10, 0, 1).is_err());
    }

    #[test]
    fn replication_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..1000 {
            assert!(seen.insert(replication_seed(99, r)));
        }
    }
}
