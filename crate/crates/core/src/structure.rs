//! Numerical verification of the structural properties of optimal
//! policies on concrete instances: threshold/monotone structure in the
//! two-period system, value-function monotonicity and componentwise
//! convexity under the recursion, the small-system closed-form optimum,
//! and never-early optimality when overtime is cheap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{feasible_actions, ArrivalModel, ProblemConfig, StateSpace};
use crate::policies::{do_nothing_policy, threshold_to_tabular, TabularPolicy, ThresholdPolicy};
use crate::solver::{self, Dynamics, ValueTable};
use crate::Real;

/// One failed assertion in a check: where, what was seen, what was
/// expected, and by how much it missed.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub state: Vec<u32>,
    pub observed: f64,
    pub expected: f64,
    pub slack: f64,
}

/// Outcome of a structure check; empty violation list means pass.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub instance: String,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn new(check: &str, instance: String) -> Self {
        Self {
            check: check.to_string(),
            instance,
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "[{}] {} — {}",
            if self.passed() { "pass" } else { "FAIL" },
            self.check,
            self.instance
        );
        for v in &self.violations {
            out.push_str(&format!(
                "\n  violation at {:?}: observed {} expected {} (slack {:e})",
                v.state, v.observed, v.expected, v.slack
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("\n  note: {n}"));
        }
        out
    }
}

/// Checks that the early-service component `y_1` of a two-period tabular
/// policy is non-decreasing in `x_1` for every fixed `x_0` (the threshold
/// structure of Theorem-type results).
pub fn check_monotone_in_x1(pi: &TabularPolicy, space: &StateSpace, instance: String) -> CheckReport {
    assert_eq!(space.radices.len(), 2, "check requires K = 2");
    let mut report = CheckReport::new("monotone-in-x1", instance);
    let width = space.radices[0];
    let height = space.radices[1];
    for x0 in 0..width {
        let mut prev = 0u32;
        for x1 in 0..height {
            let idx = x0 as usize + x1 as usize * width as usize;
            let y1 = pi.actions[idx].0[1];
            if x1 > 0 && y1 < prev {
                report.violations.push(Violation {
                    state: vec![x0, x1],
                    observed: y1 as f64,
                    expected: prev as f64,
                    slack: (prev - y1) as f64,
                });
            }
            prev = y1;
        }
    }
    report
}

/// Checks a finite-horizon value sequence for the operator-preserved
/// properties: increasing along the diagonal step `e_1 + e_2`, and
/// componentwise convex in each coordinate, wherever all arguments stay
/// inside the truncated domain.
pub fn check_value_properties<T: Real>(
    tables: &[ValueTable<T>],
    config: &ProblemConfig<T>,
    instance: String,
) -> CheckReport {
    let mut report = CheckReport::new("value-properties", instance);
    let a = config.max_arrivals as usize;
    let width = 2 * a + 1;
    let height = a + 1;
    let at = |v: &[T], x0: usize, x1: usize| v[x0 + x1 * width];
    for table in tables {
        let v = &table.values;
        let tol = |scale: T| T::from_f64(1e-9).unwrap() * (T::one() + scale.abs());
        for x1 in 0..height {
            for x0 in 0..width {
                let base = at(v, x0, x1);
                // increasing along e_1 + e_2
                if x0 + 1 < width && x1 + 1 < height {
                    let up = at(v, x0 + 1, x1 + 1);
                    if base > up + tol(base) {
                        report.violations.push(Violation {
                            state: vec![table.n, x0 as u32, x1 as u32],
                            observed: base.to_f64().unwrap_or(f64::NAN),
                            expected: up.to_f64().unwrap_or(f64::NAN),
                            slack: (base - up).to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
                // componentwise convexity: 2 V(x+e_i) <= V(x) + V(x+2e_i)
                if x0 + 2 < width {
                    let mid = at(v, x0 + 1, x1);
                    let far = at(v, x0 + 2, x1);
                    if mid + mid > base + far + tol(base + far) {
                        report.violations.push(Violation {
                            state: vec![table.n, x0 as u32, x1 as u32],
                            observed: (mid + mid).to_f64().unwrap_or(f64::NAN),
                            expected: (base + far).to_f64().unwrap_or(f64::NAN),
                            slack: (mid + mid - base - far).to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
                if x1 + 2 < height {
                    let mid = at(v, x0, x1 + 1);
                    let far = at(v, x0, x1 + 2);
                    if mid + mid > base + far + tol(base + far) {
                        report.violations.push(Violation {
                            state: vec![table.n, x0 as u32, x1 as u32],
                            observed: (mid + mid).to_f64().unwrap_or(f64::NAN),
                            expected: (base + far).to_f64().unwrap_or(f64::NAN),
                            slack: (mid + mid - base - far).to_f64().unwrap_or(f64::NAN),
                        });
                    }
                }
            }
        }
    }
    report
}

/// Verifies that the closed-form threshold for the `M=1, K=2, A=2` system
/// attains the policy-iteration optimum. Boundary ties of the threshold
/// condition are reported as notes, not failures.
pub fn check_proposition1<T: Real>(
    config: &ProblemConfig<T>,
    model: &ArrivalModel<T>,
) -> Result<CheckReport> {
    if (config.servers, config.horizon, config.max_arrivals) != (1, 2, 2) {
        return Err(Error::Unsupported(
            "closed-form optimality check requires M=1, K=2, A=2".into(),
        ));
    }
    let mut report = CheckReport::new("closed-form-optimal", config.fingerprint());

    let p0 = model.p[0][0];
    let p1 = model.p[0][1];
    let ce = config.early_cost;
    let co = config.overtime_cost;
    let denom = T::one() - p0 * p0 - p0 * p1;
    let boundary_tol = T::from_f64(1e-12).unwrap();
    let s1 = if co < ce {
        config.max_arrivals
    } else if denom > boundary_tol && ce * ((T::one() + p0 - p0 * p1 - p0 * p0) / denom) <= co {
        0
    } else {
        1
    };
    if denom > boundary_tol {
        let theta_ce = ce * ((T::one() + p0 - p0 * p1 - p0 * p0) / denom);
        if (theta_ce - co).abs() <= boundary_tol || (ce - co).abs() <= boundary_tol {
            report
                .notes
                .push("tie — both adjacent thresholds optimal".into());
        }
    }

    let space = StateSpace::new(2, config.max_arrivals)?;
    let tabular = threshold_to_tabular(&ThresholdPolicy { s: vec![0, s1] }, &space, config);
    let threshold_g = solver::evaluate_policy(&tabular, &space, model, config)?.gain;
    let optimum = solver::policy_iteration(&do_nothing_policy(&space), &space, model, config)?;
    let gap = (threshold_g - optimum.evaluation.gain).abs();
    let tol = T::from_f64(1e-9).unwrap();
    if gap > tol {
        report.violations.push(Violation {
            state: vec![s1],
            observed: threshold_g.to_f64().unwrap_or(f64::NAN),
            expected: optimum.evaluation.gain.to_f64().unwrap_or(f64::NAN),
            slack: gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(report)
}

/// Verifies that when `c_o <= c_e` the never-early action attains the
/// optimality-equation minimum at every state (within 1e-9), using the
/// bias of the supplied optimal policy.
pub fn check_never_early<T: Real>(
    pi: &TabularPolicy,
    space: &StateSpace,
    model: &ArrivalModel<T>,
    config: &ProblemConfig<T>,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("never-early", config.fingerprint());
    let dynamics = Dynamics::new(space, model);
    let evaluation = solver::evaluate_policy(pi, space, model, config)?;
    let expected = dynamics.expected_bias(&evaluation.bias);
    let tol = T::from_f64(1e-9).unwrap();
    for (_, x) in space.states() {
        let mut never_early_value = None;
        let mut best = T::infinity();
        for y in feasible_actions(&x, config) {
            let v = crate::model::stage_cost_unchecked(&y.0, config)
                + expected[dynamics.post_index(&x.0, &y.0)];
            if never_early_value.is_none() {
                never_early_value = Some(v); // first action is do-nothing
            }
            if v < best {
                best = v;
            }
        }
        let ne = never_early_value.expect("non-empty action set");
        if ne > best + tol * (T::one() + best.abs()) {
            report.violations.push(Violation {
                state: x.0.clone(),
                observed: ne.to_f64().unwrap_or(f64::NAN),
                expected: best.to_f64().unwrap_or(f64::NAN),
                slack: (ne - best).to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_arrival_model, enumerate_states, Action, LoadPattern, ProblemConfig};
    use crate::policies::ThresholdPolicy;
    use crate::solver::finite_horizon_sequence;

    fn cfg(k: u32, m: u32, a: u32, lambda: f64, ce: f64, co: f64) -> ProblemConfig<f64> {
        ProblemConfig::new(k, m, a, lambda, ce, co, LoadPattern::Equal)
    }

    #[test]
    fn optimal_two_period_policy_is_monotone() {
        let c = cfg(2, 2, 3, 1.4, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let opt = solver::policy_iteration(&do_nothing_policy(&space), &space, &model, &c).unwrap();
        let report = check_monotone_in_x1(&opt.policy, &space, c.fingerprint());
        assert!(report.passed(), "{}", report.render());
    }

    #[test]
    fn monotone_check_catches_a_planted_dip() {
        let c = cfg(2, 1, 2, 0.4, 5.0, 20.0);
        let space = enumerate_states(&c).unwrap();
        let mut pol = do_nothing_policy(&space);
        let mid = space.state_to_index(&crate::model::State(vec![0, 1]));
        pol.actions[mid] = Action(vec![0, 1]); // y_1(0,1) = 1, y_1(0,2) = 0: dip
        let report = check_monotone_in_x1(&pol, &space, c.fingerprint());
        assert!(!report.passed());
        assert_eq!(report.violations[0].state, vec![0, 2]);
    }

    #[test]
    fn value_recursion_preserves_monotonicity_and_convexity() {
        for &(m, a, lambda, ce, co) in &[
            (1u32, 2u32, 0.4, 5.0, 20.0),
            (1, 3, 0.9, 10.0, 20.0),
            (2, 2, 1.2, 10.0, 20.0),
        ] {
            let c = cfg(2, m, a, lambda, ce, co);
            let model = build_arrival_model(&c).unwrap();
            let tables = finite_horizon_sequence(20, &c, &model).unwrap();
            let report = check_value_properties(&tables, &c, c.fingerprint());
            assert!(report.passed(), "{}", report.render());
        }
    }

    #[test]
    fn value_check_catches_a_planted_concavity() {
        let c = cfg(2, 1, 2, 0.4, 5.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        let mut tables = finite_horizon_sequence(2, &c, &model).unwrap();
        // bump V(1, 0) far above its neighbors' midpoint
        tables[2].values[1] += 100.0;
        let report = check_value_properties(&tables, &c, c.fingerprint());
        assert!(!report.passed());
    }

    #[test]
    fn closed_form_threshold_attains_the_optimum() {
        for &(ce, co, lambda) in &[
            (10.0, 20.0, 0.4),
            (10.0, 20.0, 1.0),
            (10.0, 5.0, 0.4),
            (2.0, 20.0, 0.4),
        ] {
            let c = cfg(2, 1, 2, lambda, ce, co);
            let model = build_arrival_model(&c).unwrap();
            let report = check_proposition1(&c, &model).unwrap();
            assert!(report.passed(), "{}", report.render());
        }
    }

    #[test]
    fn closed_form_check_rejects_other_shapes() {
        let c = cfg(3, 1, 2, 0.4, 10.0, 20.0);
        let model = build_arrival_model(&c).unwrap();
        assert!(check_proposition1(&c, &model).is_err());
    }

    #[test]
    fn never_early_is_optimal_when_overtime_is_cheap() {
        let c = cfg(3, 1, 2, 0.9, 10.0, 10.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let opt = solver::policy_iteration(&do_nothing_policy(&space), &space, &model, &c).unwrap();
        let report = check_never_early(&opt.policy, &space, &model, &c).unwrap();
        assert!(report.passed(), "{}", report.render());
    }

    #[test]
    fn never_early_check_flags_expensive_overtime() {
        // co >> ce: early service is strictly better somewhere
        let c = cfg(3, 1, 2, 0.9, 1.0, 50.0);
        let model = build_arrival_model(&c).unwrap();
        let space = enumerate_states(&c).unwrap();
        let pol = crate::policies::threshold_to_tabular(
            &ThresholdPolicy { s: vec![0, 0, 0] },
            &space,
            &c,
        );
        let report = check_never_early(&pol, &space, &model, &c).unwrap();
        assert!(!report.passed());
    }
}
