//! Problem instances: configuration, arrival probabilities, the state and
//! action spaces, stage costs and the exact transition kernel.
//!
//! A state `x = (x_0, ..., x_{K-1})` counts the jobs due `j` periods ahead.
//! Truncating arrivals at `A` per lead time per period closes the state
//! space under the shift dynamics: `x_j <= (K - j) * A`.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// How customer preferences are distributed over the planning horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoadPattern {
    /// Equal load: `q_j = 1/K`.
    #[serde(rename = "EL")]
    Equal,
    /// Front-loaded: `q_j = (K-j)^2 / sum(i^2)`.
    #[serde(rename = "FL")]
    Front,
    /// Back-loaded: `q_j = (j+1)^2 / sum(i^2)`.
    #[serde(rename = "BL")]
    Back,
    /// Arbitrarily loaded: seeded random positive vector, normalized.
    #[serde(rename = "AL")]
    Arbitrary,
    /// Caller-supplied `q`.
    #[serde(rename = "CUSTOM")]
    Custom,
}

impl fmt::Display for LoadPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LoadPattern::Equal => "EL",
            LoadPattern::Front => "FL",
            LoadPattern::Back => "BL",
            LoadPattern::Arbitrary => "AL",
            LoadPattern::Custom => "CUSTOM",
        };
        f.write_str(s)
    }
}

/// All scalar parameters defining one problem instance.
///
/// Serialized field names follow the configuration file format exactly
/// (`K`, `M`, `A`, `lambda`, `ce`, `co`, `load`, `q`, `seed`); unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig<T> {
    /// Planning-horizon length in periods (`K >= 2`).
    #[serde(rename = "K")]
    pub horizon: u32,
    /// Servers available per period (`M >= 1`).
    #[serde(rename = "M")]
    pub servers: u32,
    /// Maximum arrivals per lead time per period (`A >= 1`).
    #[serde(rename = "A")]
    pub max_arrivals: u32,
    /// Overall arrival rate in jobs per period.
    pub lambda: T,
    /// Early-service cost per job per period of earliness.
    #[serde(rename = "ce")]
    pub early_cost: T,
    /// Overtime/outsourcing cost per job.
    #[serde(rename = "co")]
    pub overtime_cost: T,
    pub load: LoadPattern,
    /// Lead-time preference probabilities; required when `load = CUSTOM`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<T>>,
    /// RNG seed; required for AL generation, also roots simulation streams.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl<T: Real> ProblemConfig<T> {
    pub fn new(
        horizon: u32,
        servers: u32,
        max_arrivals: u32,
        lambda: T,
        early_cost: T,
        overtime_cost: T,
        load: LoadPattern,
    ) -> Self {
        Self {
            horizon,
            servers,
            max_arrivals,
            lambda,
            early_cost,
            overtime_cost,
            load,
            q: None,
            seed: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_q(mut self, q: Vec<T>) -> Self {
        self.q = Some(q);
        self
    }

    // negated comparisons are deliberate: they reject NaN parameters too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::InvalidConfig(format!("K must be >= 2, got {}", self.horizon)));
        }
        if self.servers < 1 {
            return Err(Error::InvalidConfig("M must be >= 1".into()));
        }
        if self.max_arrivals < 1 {
            return Err(Error::InvalidConfig("A must be >= 1".into()));
        }
        if !(self.lambda >= T::zero()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.early_cost >= T::zero()) {
            return Err(Error::InvalidConfig(format!("ce must be >= 0, got {}", self.early_cost)));
        }
        if !(self.overtime_cost >= T::zero()) {
            return Err(Error::InvalidConfig(format!("co must be >= 0, got {}", self.overtime_cost)));
        }
        if let Some(q) = &self.q {
            validate_preference_vector(q, self.horizon as usize)?;
        }
        if self.load == LoadPattern::Custom && self.q.is_none() {
            return Err(Error::InvalidConfig("load=CUSTOM requires a q vector".into()));
        }
        if self.load == LoadPattern::Arbitrary && self.seed.is_none() {
            return Err(Error::InvalidConfig("load=AL requires a seed".into()));
        }
        Ok(())
    }

    /// Short instance fingerprint used in reports and logs.
    pub fn fingerprint(&self) -> String {
        format!(
            "K={} M={} A={} lambda={} ce={} co={} load={}",
            self.horizon,
            self.servers,
            self.max_arrivals,
            self.lambda,
            self.early_cost,
            self.overtime_cost,
            self.load
        )
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail validation
fn validate_preference_vector<T: Real>(q: &[T], k: usize) -> Result<()> {
    if q.len() != k {
        return Err(Error::InvalidConfig(format!(
            "q has length {}, expected K={}",
            q.len(),
            k
        )));
    }
    if q.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::InvalidConfig("all q_j must be > 0".into()));
    }
    let sum: T = q.iter().copied().sum();
    let tol = T::from_f64(1e-12).unwrap();
    if (sum - T::one()).abs() > tol {
        return Err(Error::InvalidConfig(format!("q must sum to 1, got {}", sum)));
    }
    Ok(())
}

/// Per-lead-time truncated-Poisson arrival probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel<T> {
    /// Preference probabilities `q_j`.
    pub q: Vec<T>,
    /// Per-lead-time rates `lambda_j = q_j * lambda`.
    pub lambda_j: Vec<T>,
    /// `p[j][a]` = probability of `a` arrivals at lead time `j`; each row
    /// has `A + 1` entries and sums to 1.
    pub p: Vec<Vec<T>>,
}

impl<T: Real> ArrivalModel<T> {
    /// Builds a model directly from probability rows, bypassing the
    /// truncated-Poisson construction. Used for the auxiliary two-period
    /// chains of the local-threshold search; `q` and `lambda_j` carry no
    /// information here and are zeroed.
    pub fn from_probabilities(p: Vec<Vec<T>>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidConfig("empty probability table".into()));
        }
        let width = p[0].len();
        let tol = T::from_f64(1e-12).unwrap();
        for (j, row) in p.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidConfig("ragged probability table".into()));
            }
            if row.iter().any(|&v| v < T::zero()) {
                return Err(Error::InvalidConfig(format!("negative probability in row {j}")));
            }
            let sum: T = row.iter().copied().sum();
            if (sum - T::one()).abs() > tol {
                return Err(Error::InvalidConfig(format!(
                    "arrival row {j} sums to {sum}, expected 1"
                )));
            }
        }
        let k = p.len();
        Ok(Self {
            q: vec![T::zero(); k],
            lambda_j: vec![T::zero(); k],
            p,
        })
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.p[j]
    }
}

/// Builds the arrival model for a configuration: the load pattern fixes
/// `q`, then each lead time gets a Poisson distribution with rate
/// `lambda_j = q_j * lambda` truncated at `A`.
pub fn build_arrival_model<T: Real>(config: &ProblemConfig<T>) -> Result<ArrivalModel<T>> {
    config.validate()?;
    let k = config.horizon as usize;
    let q: Vec<T> = match config.load {
        LoadPattern::Equal => {
            let v = T::one() / T::from_usize(k).unwrap();
            vec![v; k]
        }
        LoadPattern::Front => quadratic_weights(k, |j| (k - j) as u32),
        LoadPattern::Back => quadratic_weights(k, |j| (j + 1) as u32),
        LoadPattern::Arbitrary => arbitrary_q(k, config.seed.expect("validated")),
        LoadPattern::Custom => config.q.clone().expect("validated"),
    };
    let lambda_j: Vec<T> = q.iter().map(|&qj| qj * config.lambda).collect();
    let p = lambda_j
        .iter()
        .map(|&lj| truncated_poisson_row(lj, config.max_arrivals))
        .collect();
    Ok(ArrivalModel { q, lambda_j, p })
}

fn quadratic_weights<T: Real>(k: usize, weight: impl Fn(usize) -> u32) -> Vec<T> {
    let denom: u32 = (1..=k as u32).map(|i| i * i).sum();
    let denom = T::from_u32(denom).unwrap();
    (0..k)
        .map(|j| {
            let w = weight(j);
            T::from_u32(w * w).unwrap() / denom
        })
        .collect()
}

fn arbitrary_q<T: Real>(k: usize, seed: u64) -> Vec<T> {
    // uniform(eps, 1) draws, normalized; eps keeps every q_j positive.
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..k).map(|_| EPS + (1.0 - EPS) * rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|&v| T::from_f64(v / total).unwrap()).collect()
}

/// Truncated-Poisson row with raw weights `lambda^a / a!`; the `exp`
/// factors cancel in the normalization. `lambda = 0` degenerates to a
/// point mass at zero arrivals.
fn truncated_poisson_row<T: Real>(lambda_j: T, a_max: u32) -> Vec<T> {
    let len = a_max as usize + 1;
    if lambda_j == T::zero() {
        let mut row = vec![T::zero(); len];
        row[0] = T::one();
        return row;
    }
    let mut weights = Vec::with_capacity(len);
    let mut w = T::one();
    weights.push(w);
    for a in 1..=a_max {
        w = w * lambda_j / T::from_u32(a).unwrap();
        weights.push(w);
    }
    let total: T = weights.iter().copied().sum();
    weights.into_iter().map(|v| v / total).collect()
}

/// Queue state: `x_j` jobs due `j` periods ahead.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State(pub Vec<u32>);

/// Allocation action: `y_j` jobs due `j` periods ahead served now.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action(pub Vec<u32>);

/// Mixed-radix enumeration of the truncated state space.
///
/// Digit `j` has radix `(K - j) * A + 1`; the last lead time `j = K - 1` is
/// the most significant digit, so the empty state has index 0. The layout
/// is fixed for file-format stability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    pub horizon: u32,
    pub max_arrivals: u32,
    pub radices: Vec<u32>,
    pub size: usize,
    weights: Vec<usize>,
}

impl StateSpace {
    pub fn new(horizon: u32, max_arrivals: u32) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::InvalidConfig("K must be >= 2".into()));
        }
        let k = horizon as usize;
        let radices: Vec<u32> = (0..k)
            .map(|j| (horizon - j as u32) * max_arrivals + 1)
            .collect();
        let mut size: u128 = 1;
        for &r in &radices {
            size = size.saturating_mul(r as u128);
        }
        if size > usize::MAX as u128 / 2 {
            return Err(Error::CapacityExceeded {
                states: size,
                horizon,
                max_arrivals,
            });
        }
        let mut weights = Vec::with_capacity(k);
        let mut w = 1usize;
        for &r in &radices {
            weights.push(w);
            w *= r as usize;
        }
        Ok(Self {
            horizon,
            max_arrivals,
            radices,
            size: size as usize,
            weights,
        })
    }

    /// Upper bound on `x_j`.
    pub fn digit_bound(&self, j: usize) -> u32 {
        self.radices[j] - 1
    }

    pub(crate) fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn state_to_index(&self, x: &State) -> usize {
        assert_eq!(x.0.len(), self.radices.len(), "state dimension mismatch");
        let mut idx = 0usize;
        for (j, &d) in x.0.iter().enumerate() {
            assert!(d < self.radices[j], "digit {j} out of range: {d}");
            idx += d as usize * self.weights[j];
        }
        idx
    }

    pub fn index_to_state(&self, mut index: usize) -> State {
        assert!(index < self.size, "index out of range");
        let mut digits = Vec::with_capacity(self.radices.len());
        for &r in &self.radices {
            digits.push((index % r as usize) as u32);
            index /= r as usize;
        }
        State(digits)
    }

    /// Index of the empty-queue state (always 0 in this layout).
    pub fn empty_index(&self) -> usize {
        0
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, State)> + '_ {
        (0..self.size).map(move |i| (i, self.index_to_state(i)))
    }
}

/// Enumerates the truncated state space for a configuration.
pub fn enumerate_states<T: Real>(config: &ProblemConfig<T>) -> Result<StateSpace> {
    config.validate()?;
    StateSpace::new(config.horizon, config.max_arrivals)
}

/// All feasible actions at `x`, in lexicographically ascending order: the
/// first element is always the do-nothing action `(x_0, 0, ..., 0)`.
///
/// Due jobs are always served (`y_0 = x_0`) and early service is limited to
/// the residual capacity `(M - x_0)^+`; serving early into overtime is
/// dominated and excluded.
pub fn feasible_actions<T: Real>(x: &State, config: &ProblemConfig<T>) -> Vec<Action> {
    let k = config.horizon as usize;
    assert_eq!(x.0.len(), k, "state dimension mismatch");
    let cap = config.servers.saturating_sub(x.0[0]);
    let mut out = Vec::new();
    let mut y = vec![0u32; k];
    y[0] = x.0[0];
    fill_actions(&x.0, 1, cap, &mut y, &mut out);
    out
}

fn fill_actions(x: &[u32], j: usize, cap: u32, y: &mut Vec<u32>, out: &mut Vec<Action>) {
    if j == x.len() {
        out.push(Action(y.clone()));
        return;
    }
    let top = x[j].min(cap);
    for v in 0..=top {
        y[j] = v;
        fill_actions(x, j + 1, cap - v, y, out);
    }
    y[j] = 0;
}

pub(crate) fn check_feasible<T: Real>(
    x: &State,
    y: &Action,
    config: &ProblemConfig<T>,
) -> Result<()> {
    let k = config.horizon as usize;
    if x.0.len() != k || y.0.len() != k {
        return Err(Error::ContractViolation("state/action dimension mismatch".into()));
    }
    if y.0[0] != x.0[0] {
        return Err(Error::ContractViolation(format!(
            "y_0 = {} must equal x_0 = {}",
            y.0[0], x.0[0]
        )));
    }
    if y.0.iter().zip(&x.0).any(|(&yj, &xj)| yj > xj) {
        return Err(Error::ContractViolation("y_j exceeds x_j".into()));
    }
    let early: u32 = y.0.iter().skip(1).sum();
    if early > config.servers.saturating_sub(x.0[0]) {
        return Err(Error::ContractViolation(format!(
            "early allocation {} exceeds residual capacity",
            early
        )));
    }
    Ok(())
}

/// Stage cost `c_o (y_0 - M)^+ + c_e sum_j j y_j` (Eq. form; overtime and
/// earliness never mix in the same action).
pub fn stage_cost<T: Real>(x: &State, y: &Action, config: &ProblemConfig<T>) -> Result<T> {
    check_feasible(x, y, config)?;
    Ok(stage_cost_unchecked(&y.0, config))
}

pub(crate) fn stage_cost_unchecked<T: Real>(y: &[u32], config: &ProblemConfig<T>) -> T {
    let overtime = y[0].saturating_sub(config.servers);
    let early_periods: u32 = y
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &v)| j as u32 * v)
        .sum();
    config.overtime_cost * T::from_u32(overtime).unwrap()
        + config.early_cost * T::from_u32(early_periods).unwrap()
}

/// Arrival outcomes as (probability, state-index offset) pairs: applying a
/// combo to a post-decision queue `z` lands in index `index(z) + offset`.
/// Only strictly positive probabilities are kept. The truncation closure
/// guarantees `z_j + a_j` never overflows digit `j`.
pub(crate) fn arrival_combos<T: Real>(model: &ArrivalModel<T>, space: &StateSpace) -> Vec<(T, usize)> {
    let mut out = Vec::new();
    combo_rec(&model.p, space.weights(), 0, T::one(), 0, &mut out);
    out
}

fn combo_rec<T: Real>(
    p: &[Vec<T>],
    weights: &[usize],
    j: usize,
    prob: T,
    offset: usize,
    out: &mut Vec<(T, usize)>,
) {
    if j == p.len() {
        out.push((prob, offset));
        return;
    }
    for (a, &pa) in p[j].iter().enumerate() {
        if pa > T::zero() {
            combo_rec(p, weights, j + 1, prob * pa, offset + a * weights[j], out);
        }
    }
}

/// Post-decision queue after serving `y` from `x`: jobs shift one period
/// closer to their due date.
pub(crate) fn post_decision_queue(x: &[u32], y: &[u32]) -> Vec<u32> {
    let k = x.len();
    let mut z = vec![0u32; k];
    for j in 0..k - 1 {
        z[j] = x[j + 1] - y[j + 1];
    }
    z
}

/// Exact one-step transition distribution for a feasible `(x, y)` pair:
/// strictly positive `(next-state index, probability)` entries whose
/// probabilities sum to 1.
pub fn transition_distribution<T: Real>(
    x: &State,
    y: &Action,
    model: &ArrivalModel<T>,
    space: &StateSpace,
) -> Result<Vec<(usize, T)>> {
    if x.0.len() != space.radices.len() || y.0.len() != x.0.len() {
        return Err(Error::ContractViolation("state/action dimension mismatch".into()));
    }
    if y.0[0] != x.0[0] || y.0.iter().zip(&x.0).any(|(&yj, &xj)| yj > xj) {
        return Err(Error::ContractViolation("infeasible action".into()));
    }
    let z = post_decision_queue(&x.0, &y.0);
    // Closure: z_j <= (K - j - 1) * A, so every arrival lands in range.
    for (j, &zj) in z.iter().enumerate() {
        debug_assert!(zj + space.max_arrivals <= space.digit_bound(j));
    }
    let base = space.state_to_index(&State(z));
    let combos = arrival_combos(model, space);
    Ok(combos.into_iter().map(|(p, off)| (base + off, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(k: u32, m: u32, a: u32, lambda: f64, ce: f64, co: f64, load: LoadPattern) -> ProblemConfig<f64> {
        ProblemConfig::new(k, m, a, lambda, ce, co, load)
    }

    #[test]
    fn load_pattern_weights() {
        let m = build_arrival_model(&cfg(3, 1, 1, 0.6, 5.0, 20.0, LoadPattern::Equal)).unwrap();
        for &qj in &m.q {
            assert!((qj - 1.0 / 3.0).abs() < 1e-15);
        }
        let m = build_arrival_model(&cfg(3, 1, 1, 0.6, 5.0, 20.0, LoadPattern::Front)).unwrap();
        assert!((m.q[0] - 9.0 / 14.0).abs() < 1e-15);
        assert!((m.q[1] - 4.0 / 14.0).abs() < 1e-15);
        assert!((m.q[2] - 1.0 / 14.0).abs() < 1e-15);
        let m = build_arrival_model(&cfg(3, 1, 1, 0.6, 5.0, 20.0, LoadPattern::Back)).unwrap();
        assert!((m.q[0] - 1.0 / 14.0).abs() < 1e-15);
        assert!((m.q[2] - 9.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn truncated_poisson_values() {
        // lambda_j = 0.4, A = 2: weights (1, 0.4, 0.08) / 1.48
        let row = truncated_poisson_row(0.4f64, 2);
        assert!((row[0] - 0.675_676).abs() < 1e-6);
        assert!((row[1] - 0.270_270).abs() < 1e-6);
        assert!((row[2] - 0.054_054).abs() < 1e-6);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_rate_is_point_mass() {
        let row = truncated_poisson_row(0.0f64, 3);
        assert_eq!(row, vec![1.0, 0.0, 0.0, 0.0]);
        let c = cfg(3, 1, 2, 0.0, 5.0, 20.0, LoadPattern::Equal);
        let m = build_arrival_model(&c).unwrap();
        for row in &m.p {
            assert_eq!(row[0], 1.0);
        }
    }

    #[test]
    fn arbitrary_q_is_seeded_and_normalized() {
        let c = cfg(4, 1, 1, 0.8, 5.0, 20.0, LoadPattern::Arbitrary).with_seed(7);
        let m1 = build_arrival_model(&c).unwrap();
        let m2 = build_arrival_model(&c).unwrap();
        assert_eq!(m1.q, m2.q);
        assert!((m1.q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m1.q.iter().all(|&v| v > 0.0));
        let other = build_arrival_model(&c.clone().with_seed(8)).unwrap();
        assert_ne!(m1.q, other.q);
    }

    #[test]
    fn state_space_sizes() {
        assert_eq!(StateSpace::new(3, 2).unwrap().size, 105); // 3*5*7... = 7*5*3
        assert_eq!(StateSpace::new(2, 1).unwrap().size, 6);
        assert_eq!(StateSpace::new(2, 0).unwrap().size, 1);
        assert_eq!(StateSpace::new(4, 1).unwrap().size, 120);
        assert_eq!(StateSpace::new(5, 2).unwrap().size, 10395);
    }

    #[test]
    fn empty_state_is_index_zero() {
        let s = StateSpace::new(4, 2).unwrap();
        assert_eq!(s.empty_index(), 0);
        assert_eq!(s.index_to_state(0).0, vec![0, 0, 0, 0]);
    }

    #[test]
    fn capacity_guard_trips() {
        // radices ~ (K - j) * A + 1 with huge A overflow usize comfortably
        let err = StateSpace::new(32, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { .. }));
    }

    #[test]
    fn feasible_actions_shape() {
        let c = cfg(3, 2, 2, 0.6, 5.0, 20.0, LoadPattern::Equal);
        // x = (1, 2, 1): cap = 1, y_1 + y_2 <= 1
        let acts = feasible_actions(&State(vec![1, 2, 1]), &c);
        let raw: Vec<Vec<u32>> = acts.iter().map(|a| a.0.clone()).collect();
        assert_eq!(raw, vec![vec![1, 0, 0], vec![1, 0, 1], vec![1, 1, 0]]);
        // overtime state: no residual capacity, only do-nothing
        let acts = feasible_actions(&State(vec![4, 2, 1]), &c);
        assert_eq!(acts.len(), 1);
        assert_eq!(acts[0].0, vec![4, 0, 0]);
    }

    #[test]
    fn stage_cost_examples() {
        let c = cfg(4, 1, 2, 0.8, 5.0, 20.0, LoadPattern::Equal);
        let x = State(vec![0, 2, 0, 0]);
        let y = Action(vec![0, 1, 0, 0]);
        assert_eq!(stage_cost(&x, &y, &c).unwrap(), 5.0);
        let x = State(vec![2, 0, 0, 0]);
        let y = Action(vec![2, 0, 0, 0]);
        assert_eq!(stage_cost(&x, &y, &c).unwrap(), 20.0);
        let x = State(vec![1, 0, 0, 2]);
        let y = Action(vec![1, 0, 0, 0]);
        assert_eq!(stage_cost(&x, &y, &c).unwrap(), 0.0);
        // earliness weighted by lead time: y_3 = 1 costs 3 * ce
        let x = State(vec![0, 0, 0, 2]);
        let y = Action(vec![0, 0, 0, 1]);
        assert_eq!(stage_cost(&x, &y, &c).unwrap(), 15.0);
    }

    #[test]
    fn stage_cost_rejects_infeasible() {
        let c = cfg(3, 1, 1, 0.6, 5.0, 20.0, LoadPattern::Equal);
        // y_0 != x_0
        let r = stage_cost(&State(vec![1, 0, 0]), &Action(vec![0, 0, 0]), &c);
        assert!(matches!(r, Err(Error::ContractViolation(_))));
        // early service beyond residual capacity
        let r = stage_cost(&State(vec![1, 1, 1]), &Action(vec![1, 1, 0]), &c);
        assert!(matches!(r, Err(Error::ContractViolation(_))));
    }

    #[test]
    fn transition_matches_hand_computation() {
        let c = cfg(2, 1, 1, 0.4, 5.0, 20.0, LoadPattern::Equal);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        // x = (0, 1), do nothing: z = (1, 0), next = (1 + a0, a1)
        let dist =
            transition_distribution(&State(vec![0, 1]), &Action(vec![0, 0]), &model, &space)
                .unwrap();
        let mut total = 0.0;
        for (idx, p) in &dist {
            let ns = space.index_to_state(*idx);
            let expected = model.p[0][(ns.0[0] - 1) as usize] * model.p[1][ns.0[1] as usize];
            assert!((p - expected).abs() < 1e-15);
            total += p;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_rows_are_stochastic() {
        let c = cfg(3, 2, 2, 1.2, 5.0, 20.0, LoadPattern::Back);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        for (_, x) in space.states() {
            for y in feasible_actions(&x, &c) {
                let dist = transition_distribution(&x, &y, &model, &space).unwrap();
                let total: f64 = dist.iter().map(|&(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12, "row sum {total} at {:?}", x.0);
            }
        }
    }

    #[test]
    fn config_validation_failures() {
        assert!(cfg(1, 1, 1, 0.2, 5.0, 20.0, LoadPattern::Equal).validate().is_err());
        assert!(cfg(3, 0, 1, 0.2, 5.0, 20.0, LoadPattern::Equal).validate().is_err());
        assert!(cfg(3, 1, 0, 0.2, 5.0, 20.0, LoadPattern::Equal).validate().is_err());
        assert!(cfg(3, 1, 1, -0.2, 5.0, 20.0, LoadPattern::Equal).validate().is_err());
        assert!(cfg(3, 1, 1, 0.2, 5.0, 20.0, LoadPattern::Custom).validate().is_err());
        assert!(cfg(3, 1, 1, 0.2, 5.0, 20.0, LoadPattern::Arbitrary).validate().is_err());
        let bad_len = cfg(3, 1, 1, 0.2, 5.0, 20.0, LoadPattern::Custom).with_q(vec![0.5, 0.5]);
        assert!(bad_len.validate().is_err());
        let bad_sum = cfg(3, 1, 1, 0.2, 5.0, 20.0, LoadPattern::Custom).with_q(vec![0.5, 0.3, 0.1]);
        assert!(bad_sum.validate().is_err());
        let ok = cfg(3, 1, 1, 0.2, 5.0, 20.0, LoadPattern::Custom).with_q(vec![0.5, 0.3, 0.2]);
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn config_file_keys() {
        let c: ProblemConfig<f64> = toml::from_str(
            "K = 4\nM = 1\nA = 2\nlambda = 0.4\nce = 5.0\nco = 20.0\nload = \"EL\"\n",
        )
        .unwrap();
        assert_eq!(c.horizon, 4);
        assert_eq!(c.early_cost, 5.0);
        assert_eq!(c.load, LoadPattern::Equal);
        let bad: std::result::Result<ProblemConfig<f64>, _> = toml::from_str(
            "K = 4\nM = 1\nA = 2\nlambda = 0.4\nce = 5.0\nco = 20.0\nload = \"EL\"\nextra = 1\n",
        );
        assert!(bad.is_err());
    }

    proptest! {
        #[test]
        fn index_state_bijection(k in 2u32..6, a in 1u32..4, pick in 0usize..1000) {
            let space = StateSpace::new(k, a).unwrap();
            let idx = pick % space.size;
            let x = space.index_to_state(idx);
            prop_assert_eq!(space.state_to_index(&x), idx);
            for (j, &d) in x.0.iter().enumerate() {
                prop_assert!(d <= space.digit_bound(j));
            }
        }
    }
}
