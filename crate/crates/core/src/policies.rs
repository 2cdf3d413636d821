//! Allocation policies: explicit tabular policies, threshold policies, the
//! do-nothing benchmark, and the two threshold constructions (closed-form
//! for single-server systems, local-optimal search for multi-server
//! systems).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    enumerate_states, feasible_actions, Action, ArrivalModel, LoadPattern, ProblemConfig, State,
    StateSpace,
};
use crate::solver;
use crate::Real;

/// Threshold policy `S = (0, s_1, ..., s_{K-1})`: at lead time `j`, only
/// the excess above `s_j` is served early, subject to leftover capacity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub s: Vec<u32>,
}

impl ThresholdPolicy {
    pub fn new(s: Vec<u32>) -> Result<Self> {
        if s.is_empty() || s[0] != 0 {
            return Err(Error::InvalidConfig("thresholds must start with s_0 = 0".into()));
        }
        Ok(Self { s })
    }
}

/// A stationary deterministic policy stored as one feasible action per
/// state index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabularPolicy {
    pub actions: Vec<Action>,
}

impl TabularPolicy {
    pub fn action(&self, index: usize) -> &Action {
        &self.actions[index]
    }
}

/// The do-nothing benchmark: serve due jobs only, never early.
pub fn do_nothing_policy(space: &StateSpace) -> TabularPolicy {
    let k = space.radices.len();
    let actions = space
        .states()
        .map(|(_, x)| {
            let mut y = vec![0u32; k];
            y[0] = x.0[0];
            Action(y)
        })
        .collect();
    TabularPolicy { actions }
}

/// Applies thresholds at a state: `y_0 = x_0`, then sequentially
/// `y_j = min(max(x_j - s_j, 0), remaining capacity)` for `j = 1..K-1`,
/// starting from capacity `(M - x_0)^+`.
pub fn apply_thresholds<T: Real>(
    thresholds: &ThresholdPolicy,
    x: &State,
    config: &ProblemConfig<T>,
) -> Action {
    let k = config.horizon as usize;
    assert_eq!(thresholds.s.len(), k, "threshold dimension mismatch");
    assert_eq!(x.0.len(), k, "state dimension mismatch");
    let mut y = vec![0u32; k];
    y[0] = x.0[0];
    let mut cap = config.servers.saturating_sub(x.0[0]);
    for (j, yj) in y.iter_mut().enumerate().skip(1) {
        let excess = x.0[j].saturating_sub(thresholds.s[j]);
        *yj = excess.min(cap);
        cap -= *yj;
    }
    Action(y)
}

/// Never-early thresholds `(0, A(K-1), ..., A)`: each `s_j` sits at the
/// positional maximum, so no excess ever appears.
pub fn never_early_thresholds<T: Real>(config: &ProblemConfig<T>) -> ThresholdPolicy {
    let k = config.horizon;
    let s = (0..k)
        .map(|j| if j == 0 { 0 } else { (k - j) * config.max_arrivals })
        .collect();
    ThresholdPolicy { s }
}

/// Closed-form rolling thresholds for single-server systems.
///
/// For each consecutive lead-time pair, the risk factor
/// `theta = (1 + p(0) - p(0)p(1) - p(0)^2) / (1 - p(0)^2 - p(0)p(1))`
/// (computed from the earlier lead time's arrival row) prescribes
/// `s_j = 0` when `ce * theta <= co`, `s_j = 1` when `ce <= co < ce * theta`,
/// and `s_j = A` when `co < ce`. A vanishing denominator (`p(0) = 1`) makes
/// `theta` infinite, so the first branch is never taken.
pub fn closed_form_thresholds<T: Real>(
    config: &ProblemConfig<T>,
    model: &ArrivalModel<T>,
) -> Result<ThresholdPolicy> {
    if config.servers != 1 {
        return Err(Error::Unsupported(
            "closed-form thresholds apply to single-server systems (M = 1)".into(),
        ));
    }
    let k = config.horizon as usize;
    let mut s = vec![0u32; k];
    for (j, sj) in s.iter_mut().enumerate().skip(1) {
        *sj = threshold_from_risk_factor(model.row(j - 1), config)?;
    }
    Ok(ThresholdPolicy { s })
}

fn threshold_from_risk_factor<T: Real>(row: &[T], config: &ProblemConfig<T>) -> Result<u32> {
    let ce = config.early_cost;
    let co = config.overtime_cost;
    if co < ce {
        return Ok(config.max_arrivals);
    }
    let p0 = row[0];
    let p1 = row[1];
    let denom = T::one() - p0 * p0 - p0 * p1;
    let tiny = T::from_f64(1e-12).unwrap();
    let serve_all = if denom <= tiny {
        // theta = +inf: early service is never prescribed in full.
        false
    } else {
        let theta = (T::one() + p0 - p0 * p1 - p0 * p0) / denom;
        ce * theta <= co
    };
    Ok(if serve_all { 0 } else { 1 })
}

/// Local-optimal thresholds via auxiliary two-period chains.
///
/// For each lead-time pair `(j, j+1)` an auxiliary `K = 2` instance is
/// built with the same `M`, `A` and costs, period-0 arrivals `p_j` and
/// period-1 arrivals `p_{j+1}`. The exact average cost of threshold
/// `(0, s)` is evaluated for `s = A, A-1, ...`; the scan stops at the
/// first strict increase and keeps `s + 1`, falling back to 0 when the
/// cost never increases.
pub fn local_optimal_thresholds<T: Real>(
    config: &ProblemConfig<T>,
    model: &ArrivalModel<T>,
) -> Result<ThresholdPolicy> {
    config.validate()?;
    let k = config.horizon as usize;
    let a = config.max_arrivals;
    let aux_config = ProblemConfig::new(
        2,
        config.servers,
        a,
        config.lambda,
        config.early_cost,
        config.overtime_cost,
        LoadPattern::Equal,
    );
    let aux_space = StateSpace::new(2, a)?;
    let mut s = vec![0u32; k];
    for j in 0..k - 1 {
        let aux_model =
            ArrivalModel::from_probabilities(vec![model.p[j].clone(), model.p[j + 1].clone()])?;
        let dynamics = solver::Dynamics::new(&aux_space, &aux_model);
        let mut previous = T::infinity();
        let mut chosen = 0u32;
        for s1 in (0..=a).rev() {
            let pol = threshold_to_tabular(
                &ThresholdPolicy { s: vec![0, s1] },
                &aux_space,
                &aux_config,
            );
            let g = solver::evaluate_with(&dynamics, &pol, &aux_space, &aux_config, None)?.gain;
            if g > previous {
                chosen = s1 + 1;
                break;
            }
            previous = g;
        }
        s[j + 1] = chosen;
    }
    Ok(ThresholdPolicy { s })
}

/// Expands a threshold policy into a tabular policy over the full space.
pub fn threshold_to_tabular<T: Real>(
    thresholds: &ThresholdPolicy,
    space: &StateSpace,
    config: &ProblemConfig<T>,
) -> TabularPolicy {
    let actions = space
        .states()
        .map(|(_, x)| apply_thresholds(thresholds, &x, config))
        .collect();
    TabularPolicy { actions }
}

/// Serialized form of a policy: threshold vector or dense action table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolicyDocument {
    Threshold {
        #[serde(rename = "K")]
        horizon: u32,
        #[serde(rename = "M")]
        servers: u32,
        #[serde(rename = "A")]
        max_arrivals: u32,
        s: Vec<u32>,
    },
    Tabular {
        #[serde(rename = "K")]
        horizon: u32,
        #[serde(rename = "M")]
        servers: u32,
        #[serde(rename = "A")]
        max_arrivals: u32,
        /// Dense table: entry `i` is the action at state index `i`.
        actions: Vec<Vec<u32>>,
    },
}

impl PolicyDocument {
    pub fn from_threshold<T: Real>(pol: &ThresholdPolicy, config: &ProblemConfig<T>) -> Self {
        PolicyDocument::Threshold {
            horizon: config.horizon,
            servers: config.servers,
            max_arrivals: config.max_arrivals,
            s: pol.s.clone(),
        }
    }

    pub fn from_tabular<T: Real>(pol: &TabularPolicy, config: &ProblemConfig<T>) -> Self {
        PolicyDocument::Tabular {
            horizon: config.horizon,
            servers: config.servers,
            max_arrivals: config.max_arrivals,
            actions: pol.actions.iter().map(|a| a.0.clone()).collect(),
        }
    }

    /// Validates the document against a configuration and reconstructs the
    /// in-memory policy.
    pub fn realize<T: Real>(&self, config: &ProblemConfig<T>) -> Result<RealizedPolicy> {
        let (k, m, a) = match self {
            PolicyDocument::Threshold {
                horizon,
                servers,
                max_arrivals,
                ..
            }
            | PolicyDocument::Tabular {
                horizon,
                servers,
                max_arrivals,
                ..
            } => (*horizon, *servers, *max_arrivals),
        };
        if (k, m, a) != (config.horizon, config.servers, config.max_arrivals) {
            return Err(Error::InvalidConfig(format!(
                "policy was built for K={k} M={m} A={a}, configuration has K={} M={} A={}",
                config.horizon, config.servers, config.max_arrivals
            )));
        }
        match self {
            PolicyDocument::Threshold { s, .. } => {
                Ok(RealizedPolicy::Threshold(ThresholdPolicy::new(s.clone())?))
            }
            PolicyDocument::Tabular { actions, .. } => {
                let space = enumerate_states(config)?;
                if actions.len() != space.size {
                    return Err(Error::InvalidConfig(format!(
                        "action table has {} entries, state space has {}",
                        actions.len(),
                        space.size
                    )));
                }
                let pol = TabularPolicy {
                    actions: actions.iter().map(|v| Action(v.clone())).collect(),
                };
                for (i, x) in space.states() {
                    let feas = feasible_actions(&x, config);
                    if !feas.contains(&pol.actions[i]) {
                        return Err(Error::InvalidConfig(format!(
                            "action {:?} infeasible at state {:?}",
                            pol.actions[i].0, x.0
                        )));
                    }
                }
                Ok(RealizedPolicy::Tabular(pol))
            }
        }
    }
}

/// A policy loaded from a document, in either representation.
#[derive(Debug, Clone)]
pub enum RealizedPolicy {
    Tabular(TabularPolicy),
    Threshold(ThresholdPolicy),
}
