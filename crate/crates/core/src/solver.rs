//! Exact average-cost machinery: policy evaluation (gain and bias),
//! one-step policy improvement, policy iteration, and the two-period
//! finite-horizon value recursion used by the structure checks.
//!
//! Evaluation solves the unichain equations
//! `h(x) + g = u(x, pi(x)) + sum_x' P[x'|x, pi(x)] h(x')`, `h(empty) = 0`,
//! by relative value iteration. Every sweep factors the expectation
//! through the post-decision queue `z` (the state after service, before
//! arrivals): `E[h | x, y]` depends on `(x, y)` only through `z`, so it is
//! computed once per post-decision state instead of once per state-action
//! pair. The residual contract (max-norm residual of the evaluation
//! equations) is enforced on exit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    arrival_combos, feasible_actions, post_decision_queue, stage_cost_unchecked, Action,
    ArrivalModel, ProblemConfig, StateSpace,
};
use crate::policies::TabularPolicy;
use crate::Real;

/// Hard cap on policy-iteration rounds; a breach indicates a tie-breaking
/// cycle rather than a hard instance.
pub const MAX_POLICY_ITERATIONS: u32 = 1000;

const MAX_EVALUATION_SWEEPS: u64 = 400_000;

/// Long-run average cost `g` and bias vector `h`, normalized so that the
/// bias of the empty state is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub gain: T,
    pub bias: Vec<T>,
}

/// Serialized form of an evaluation; the bias array may be omitted for
/// large spaces.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationDocument<T> {
    pub g: T,
    pub reference_state: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<T>>,
}

impl<T: Real + Serialize> Evaluation<T> {
    pub fn to_document(&self, space: &StateSpace, include_bias: bool) -> EvaluationDocument<T> {
        EvaluationDocument {
            g: self.gain,
            reference_state: space.empty_index(),
            h: include_bias.then(|| self.bias.clone()),
        }
    }
}

/// Precomputed transition machinery shared by evaluation and improvement.
///
/// `combos` lists every positive-probability arrival outcome as a
/// (probability, index offset) pair; `post_full` maps each post-decision
/// state to its index in the full space.
pub struct Dynamics<T> {
    combos: Vec<(T, usize)>,
    post_weights: Vec<usize>,
    post_full: Vec<usize>,
    post_size: usize,
}

impl<T: Real> Dynamics<T> {
    pub fn new(space: &StateSpace, model: &ArrivalModel<T>) -> Self {
        let k = space.radices.len();
        let a = space.max_arrivals;
        // post digit j (= z_j, j < K-1) has radix (K-1-j)*A + 1; z_{K-1} = 0.
        let post_radices: Vec<usize> = (0..k - 1)
            .map(|j| ((k - 1 - j) as u32 * a + 1) as usize)
            .collect();
        let mut post_weights = Vec::with_capacity(k - 1);
        let mut w = 1usize;
        for &r in &post_radices {
            post_weights.push(w);
            w *= r;
        }
        let post_size = w;
        let full_weights = space.weights();
        let mut post_full = vec![0usize; post_size];
        for (idx, slot) in post_full.iter_mut().enumerate() {
            let mut rest = idx;
            let mut full = 0usize;
            for (j, &r) in post_radices.iter().enumerate() {
                full += (rest % r) * full_weights[j];
                rest /= r;
            }
            *slot = full;
        }
        Self {
            combos: arrival_combos(model, space),
            post_weights,
            post_full,
            post_size,
        }
    }

    /// Compact index of the post-decision queue reached by `(x, y)`.
    pub fn post_index(&self, x: &[u32], y: &[u32]) -> usize {
        let z = post_decision_queue(x, y);
        z.iter()
            .take(z.len() - 1)
            .enumerate()
            .map(|(j, &zj)| zj as usize * self.post_weights[j])
            .sum()
    }

    /// Expected bias after arrivals, for every post-decision state.
    pub fn expected_bias(&self, h: &[T]) -> Vec<T> {
        (0..self.post_size)
            .map(|zi| {
                let base = self.post_full[zi];
                self.combos
                    .iter()
                    .map(|&(p, off)| p * h[base + off])
                    .sum()
            })
            .collect()
    }
}

/// Evaluates a policy: gain and bias with `h(empty) = 0`.
pub fn evaluate_policy<T: Real>(
    pi: &TabularPolicy,
    space: &StateSpace,
    model: &ArrivalModel<T>,
    config: &ProblemConfig<T>,
) -> Result<Evaluation<T>> {
    let dynamics = Dynamics::new(space, model);
    evaluate_with(&dynamics, pi, space, config, None)
}

/// Evaluation core with a shared `Dynamics` and an optional warm-start
/// bias (used by policy iteration).
pub(crate) fn evaluate_with<T: Real>(
    dynamics: &Dynamics<T>,
    pi: &TabularPolicy,
    space: &StateSpace,
    config: &ProblemConfig<T>,
    warm_start: Option<&[T]>,
) -> Result<Evaluation<T>> {
    let n = space.size;
    if pi.actions.len() != n {
        return Err(Error::ContractViolation(format!(
            "policy covers {} states, space has {}",
            pi.actions.len(),
            n
        )));
    }
    let mut cost = Vec::with_capacity(n);
    let mut post = Vec::with_capacity(n);
    let mut max_cost = T::zero();
    for (i, x) in space.states() {
        let y = &pi.actions[i];
        let u = stage_cost_unchecked(&y.0, config);
        if u > max_cost {
            max_cost = u;
        }
        cost.push(u);
        post.push(dynamics.post_index(&x.0, &y.0));
    }

    let mut h: Vec<T> = match warm_start {
        Some(w) if w.len() == n => {
            let pivot = w[space.empty_index()];
            w.iter().map(|&v| v - pivot).collect()
        }
        _ => vec![T::zero(); n],
    };
    // Residual target scales with the cost magnitude and the precision of T.
    let span_tol = (T::one() + max_cost) * T::epsilon() * T::from_u32(256).unwrap();
    let mut next = vec![T::zero(); n];
    for sweep in 1..=MAX_EVALUATION_SWEEPS {
        let expected = dynamics.expected_bias(&h);
        let mut span_min = T::infinity();
        let mut span_max = T::neg_infinity();
        for i in 0..n {
            let t = cost[i] + expected[post[i]];
            let delta = t - h[i];
            if delta < span_min {
                span_min = delta;
            }
            if delta > span_max {
                span_max = delta;
            }
            next[i] = t;
        }
        let gain = next[space.empty_index()];
        let pivot = gain; // h(empty) was 0, so t(empty) is both gain and pivot
        for i in 0..n {
            h[i] = next[i] - pivot;
        }
        let span = span_max - span_min;
        if span <= span_tol {
            // |residual| = |delta(x) - g| <= span everywhere.
            return Ok(Evaluation { gain, bias: h });
        }
        if sweep == MAX_EVALUATION_SWEEPS {
            return Err(Error::NoConvergence {
                residual: span.to_f64().unwrap_or(f64::NAN),
                sweeps: sweep,
            });
        }
    }
    unreachable!("sweep loop always returns")
}

/// One-step policy improvement: at each state, the feasible action
/// minimizing `u(x, y) + E[h | x, y]`. Ties (within a relative 1e-9 band)
/// keep the lexicographically smallest action, so output is deterministic.
pub fn improve_policy<T: Real>(
    evaluation: &Evaluation<T>,
    space: &StateSpace,
    model: &ArrivalModel<T>,
    config: &ProblemConfig<T>,
) -> TabularPolicy {
    let dynamics = Dynamics::new(space, model);
    improve_with(&dynamics, evaluation, space, config)
}

pub(crate) fn improve_with<T: Real>(
    dynamics: &Dynamics<T>,
    evaluation: &Evaluation<T>,
    space: &StateSpace,
    config: &ProblemConfig<T>,
) -> TabularPolicy {
    let expected = dynamics.expected_bias(&evaluation.bias);
    let tie = T::from_f64(1e-9).unwrap();
    let actions = space
        .states()
        .map(|(_, x)| {
            let mut best: Option<(Action, T)> = None;
            for y in feasible_actions(&x, config) {
                let v = stage_cost_unchecked(&y.0, config)
                    + expected[dynamics.post_index(&x.0, &y.0)];
                match &best {
                    None => best = Some((y, v)),
                    Some((_, bv)) => {
                        if v < *bv - tie * (T::one() + bv.abs()) {
                            best = Some((y, v));
                        }
                    }
                }
            }
            best.expect("feasible action set is never empty").0
        })
        .collect();
    TabularPolicy { actions }
}

/// Result of policy iteration: the fixed-point policy, its evaluation, the
/// number of evaluate/improve rounds, and the gain after each round.
#[derive(Debug, Clone)]
pub struct PolicyIterationOutcome<T> {
    pub policy: TabularPolicy,
    pub evaluation: Evaluation<T>,
    pub iterations: u32,
    pub gains: Vec<T>,
}

/// Policy iteration from an initial policy, alternating exact evaluation
/// and improvement until the policy is stable.
pub fn policy_iteration<T: Real>(
    initial: &TabularPolicy,
    space: &StateSpace,
    model: &ArrivalModel<T>,
    config: &ProblemConfig<T>,
) -> Result<PolicyIterationOutcome<T>> {
    let dynamics = Dynamics::new(space, model);
    let mut current = initial.clone();
    let mut gains = Vec::new();
    let mut warm: Option<Vec<T>> = None;
    for iteration in 1..=MAX_POLICY_ITERATIONS {
        let evaluation = evaluate_with(&dynamics, &current, space, config, warm.as_deref())?;
        gains.push(evaluation.gain);
        let improved = improve_with(&dynamics, &evaluation, space, config);
        if improved == current {
            return Ok(PolicyIterationOutcome {
                policy: current,
                evaluation,
                iterations: iteration,
                gains,
            });
        }
        warm = Some(evaluation.bias);
        current = improved;
    }
    Err(Error::IterationCapExceeded(MAX_POLICY_ITERATIONS))
}

/// Finite-horizon value table for the two-period system: expected total
/// cost with `n` periods to go, plus the smallest minimizing `y_1` per
/// state. States are indexed `x_0 + x_1 * (2A + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable<T> {
    pub n: u32,
    pub values: Vec<T>,
    pub argmin: Vec<u32>,
}

impl<T: Real> ValueTable<T> {
    pub fn value(&self, x0: u32, x1: u32, max_arrivals: u32) -> T {
        self.values[x0 as usize + x1 as usize * (2 * max_arrivals as usize + 1)]
    }
}

/// Backward recursion for `V_n` on a `K = 2` instance, from the boundary
/// `V_0 = 0`.
pub fn finite_horizon_values<T: Real>(
    n: u32,
    config: &ProblemConfig<T>,
    model: &ArrivalModel<T>,
) -> Result<ValueTable<T>> {
    let mut seq = finite_horizon_sequence(n, config, model)?;
    Ok(seq.pop().expect("sequence contains n + 1 tables"))
}

/// All tables `V_0, ..., V_n` for a `K = 2` instance.
pub fn finite_horizon_sequence<T: Real>(
    n: u32,
    config: &ProblemConfig<T>,
    model: &ArrivalModel<T>,
) -> Result<Vec<ValueTable<T>>> {
    if config.horizon != 2 {
        return Err(Error::Unsupported(format!(
            "finite-horizon recursion requires K = 2, got K = {}",
            config.horizon
        )));
    }
    let a = config.max_arrivals as usize;
    let width = 2 * a + 1; // x_0 in 0..=2A
    let height = a + 1; // x_1 in 0..=A
    let size = width * height;
    let p0 = &model.p[0];
    let p1 = &model.p[1];

    let mut tables = Vec::with_capacity(n as usize + 1);
    tables.push(ValueTable {
        n: 0,
        values: vec![T::zero(); size],
        argmin: vec![0u32; size],
    });

    for step in 1..=n {
        let prev = &tables[step as usize - 1].values;
        let mut values = vec![T::zero(); size];
        let mut argmin = vec![0u32; size];
        for x1 in 0..=a {
            for x0 in 0..width {
                let overtime = (x0 as u32).saturating_sub(config.servers);
                let fixed = config.overtime_cost * T::from_u32(overtime).unwrap();
                let cap = (config.servers as usize).saturating_sub(x0).min(x1);
                let mut best = T::infinity();
                let mut best_y = 0u32;
                for y1 in 0..=cap {
                    let carried = x1 - y1;
                    let mut expect = T::zero();
                    for (a0, &q0) in p0.iter().enumerate() {
                        if q0 == T::zero() {
                            continue;
                        }
                        for (a1, &q1) in p1.iter().enumerate() {
                            if q1 == T::zero() {
                                continue;
                            }
                            expect += q0 * q1 * prev[(a0 + carried) + a1 * width];
                        }
                    }
                    let v = config.early_cost * T::from_usize(y1).unwrap() + expect;
                    if v < best {
                        best = v;
                        best_y = y1 as u32;
                    }
                }
                values[x0 + x1 * width] = fixed + best;
                argmin[x0 + x1 * width] = best_y;
            }
        }
        tables.push(ValueTable {
            n: step,
            values,
            argmin,
        });
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_arrival_model, enumerate_states, transition_distribution, LoadPattern,
    };
    use crate::policies::{
        closed_form_thresholds, do_nothing_policy, threshold_to_tabular, ThresholdPolicy,
    };

    fn cfg(k: u32, m: u32, a: u32, lambda: f64, ce: f64, co: f64) -> ProblemConfig<f64> {
        ProblemConfig::new(k, m, a, lambda, ce, co, LoadPattern::Equal)
    }

    /// Gain oracle: power-iterate the stationary distribution of the policy's
    /// Markov chain (built row by row from the exact kernel) and average the
    /// stage costs under it.
    fn stationary_gain(
        pi: &TabularPolicy,
        space: &StateSpace,
        model: &ArrivalModel<f64>,
        config: &ProblemConfig<f64>,
    ) -> f64 {
        let n = space.size;
        let mut rows = Vec::with_capacity(n);
        for (i, x) in space.states() {
            rows.push(transition_distribution(&x, &pi.actions[i], model, space).unwrap());
        }
        let mut dist = vec![1.0 / n as f64; n];
        for _ in 0..200_000 {
            let mut next = vec![0.0; n];
            for (i, row) in rows.iter().enumerate() {
                for &(j, p) in row {
                    next[j] += dist[i] * p;
                }
            }
            let diff: f64 = next
                .iter()
                .zip(&dist)
                .map(|(a, b)| (a - b).abs())
                .sum();
            dist = next;
            if diff < 1e-14 {
                break;
            }
        }
        space
            .states()
            .map(|(i, _)| dist[i] * stage_cost_unchecked(&pi.actions[i].0, config))
            .sum()
    }

    #[test]
    fn no_arrivals_means_zero_cost() {
        let c = cfg(3, 1, 2, 0.0, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let eval = evaluate_policy(&do_nothing_policy(&space), &space, &model, &c).unwrap();
        assert_eq!(eval.gain, 0.0);
    }

    #[test]
    fn gain_matches_stationary_distribution_oracle() {
        let c = cfg(3, 1, 2, 0.9, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        for pol in [
            do_nothing_policy(&space),
            threshold_to_tabular(&ThresholdPolicy { s: vec![0, 1, 2] }, &space, &c),
            threshold_to_tabular(&ThresholdPolicy { s: vec![0, 0, 0] }, &space, &c),
        ] {
            let eval = evaluate_policy(&pol, &space, &model, &c).unwrap();
            let oracle = stationary_gain(&pol, &space, &model, &c);
            assert!(
                (eval.gain - oracle).abs() < 1e-9,
                "gain {} vs oracle {oracle}",
                eval.gain
            );
        }
    }

    #[test]
    fn evaluation_satisfies_the_optimality_equations() {
        let c = cfg(3, 2, 1, 0.7, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let pol = threshold_to_tabular(&ThresholdPolicy { s: vec![0, 1, 1] }, &space, &c);
        let eval = evaluate_policy(&pol, &space, &model, &c).unwrap();
        assert_eq!(eval.bias[space.empty_index()], 0.0);
        for (i, x) in space.states() {
            let y = &pol.actions[i];
            let mut rhs = stage_cost_unchecked(&y.0, &c);
            for (j, p) in transition_distribution(&x, y, &model, &space).unwrap() {
                rhs += p * eval.bias[j];
            }
            let residual = (eval.bias[i] + eval.gain - rhs).abs();
            assert!(residual < 1e-10, "residual {residual} at {:?}", x.0);
        }
    }

    #[test]
    fn benchmark_instance_gains() {
        // M=1, K=4, A=1, lambda=0.2, ce=5, co=20, equal load; published
        // two-decimal averages: DN 0.26, TH 0.19, TH1S 0.18 = optimum.
        let c = cfg(4, 1, 1, 0.2, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();

        let dn = do_nothing_policy(&space);
        let e_dn = evaluate_policy(&dn, &space, &model, &c).unwrap();
        assert!((e_dn.gain - 0.26).abs() < 0.005);

        let th = closed_form_thresholds(&c, &model).unwrap();
        assert_eq!(th.s, vec![0, 1, 1, 1]);
        let e_th =
            evaluate_policy(&threshold_to_tabular(&th, &space, &c), &space, &model, &c).unwrap();
        assert!((e_th.gain - 0.19).abs() < 0.005);

        let th1s = improve_policy(&e_th, &space, &model, &c);
        let e_th1s = evaluate_policy(&th1s, &space, &model, &c).unwrap();
        assert!((e_th1s.gain - 0.18).abs() < 0.005);

        let opt = policy_iteration(&dn, &space, &model, &c).unwrap();
        assert!((opt.evaluation.gain - e_th1s.gain).abs() < 1e-9);
        assert!(opt.iterations <= 50);
    }

    #[test]
    fn improvement_never_raises_the_gain() {
        let c = cfg(3, 1, 2, 1.1, 10.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let out = policy_iteration(&do_nothing_policy(&space), &space, &model, &c).unwrap();
        for w in out.gains.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "gain rose: {} -> {}", w[0], w[1]);
        }
        assert_eq!(out.gains.len() as u32, out.iterations);
    }

    #[test]
    fn optimum_beats_every_threshold_policy() {
        let c = cfg(3, 1, 1, 0.6, 10.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let opt = policy_iteration(&do_nothing_policy(&space), &space, &model, &c)
            .unwrap()
            .evaluation
            .gain;
        let mut best = f64::INFINITY;
        for s1 in 0..=space.digit_bound(1) {
            for s2 in 0..=space.digit_bound(2) {
                let pol = threshold_to_tabular(
                    &ThresholdPolicy { s: vec![0, s1, s2] },
                    &space,
                    &c,
                );
                let g = evaluate_policy(&pol, &space, &model, &c).unwrap().gain;
                assert!(opt <= g + 1e-9, "threshold ({s1},{s2}) beat the optimum");
                best = best.min(g);
            }
        }
        // on this instance the best rolling threshold is optimal
        assert!((best - opt).abs() < 1e-9);
    }

    #[test]
    fn gains_scale_with_costs() {
        let c = cfg(3, 1, 2, 0.9, 5.0, 20.0);
        let scaled = cfg(3, 1, 2, 0.9, 5.0 * 7.5, 20.0 * 7.5);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let a = policy_iteration(&do_nothing_policy(&space), &space, &model, &c).unwrap();
        let b = policy_iteration(&do_nothing_policy(&space), &space, &model, &scaled).unwrap();
        assert_eq!(a.policy, b.policy);
        assert!((b.evaluation.gain - 7.5 * a.evaluation.gain).abs() < 1e-8 * 7.5);
    }

    #[test]
    fn finite_horizon_hand_values() {
        let c = cfg(2, 1, 2, 0.8, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let tables = finite_horizon_sequence(3, &c, &model).unwrap();
        assert_eq!(tables.len(), 4);
        // V_0 = 0 everywhere
        assert!(tables[0].values.iter().all(|&v| v == 0.0));
        // V_1(x) = co (x_0 - M)^+ : serving early only adds cost with V_0 = 0
        for x1 in 0..=2u32 {
            for x0 in 0..=4u32 {
                let expect = 20.0 * (x0.saturating_sub(1)) as f64;
                assert!((tables[1].value(x0, x1, 2) - expect).abs() < 1e-12);
            }
        }
        // V_2(0, 0) = E[V_1(a_0, a_1)] = co * E[(a_0 - 1)^+]
        let p0 = &model.p[0];
        let expect = 20.0 * p0[2];
        assert!((tables[2].value(0, 0, 2) - expect).abs() < 1e-12);
        assert_eq!(tables[3].n, 3);
    }

    #[test]
    fn finite_horizon_rejects_longer_horizons() {
        let c = cfg(3, 1, 1, 0.6, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        assert!(matches!(
            finite_horizon_values(2, &c, &model),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn evaluation_document_shape() {
        let c = cfg(2, 1, 1, 0.4, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let eval = evaluate_policy(&do_nothing_policy(&space), &space, &model, &c).unwrap();
        let slim = serde_json::to_value(eval.to_document(&space, false)).unwrap();
        assert!(slim.get("h").is_none());
        assert_eq!(slim["reference_state"], 0);
        let full = serde_json::to_value(eval.to_document(&space, true)).unwrap();
        assert_eq!(full["h"].as_array().unwrap().len(), space.size);
        assert_eq!(full["h"][0], 0.0);
    }
}
