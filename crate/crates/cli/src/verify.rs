//! Verification suites: fixed instance grids driving the structural checks
//! and the simulation cross-check.

use std::fmt;
use std::str::FromStr;

use anyhow::Result;

use capq_core::model::{
    build_arrival_model, enumerate_states, feasible_actions, transition_distribution, LoadPattern,
};
use capq_core::policies::{closed_form_thresholds, do_nothing_policy, threshold_to_tabular};
use capq_core::sim::simulate;
use capq_core::solver::{evaluate_policy, finite_horizon_sequence, policy_iteration};
use capq_core::structure::{
    check_monotone_in_x1, check_never_early, check_proposition1, check_value_properties,
};
use capq_core::ProblemConfig64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Threshold structure of optimal two-period policies.
    Monotone,
    /// Monotonicity/convexity of the finite-horizon value recursion.
    Convexity,
    /// Never-early optimality when overtime is no dearer than earliness.
    #[value(name = "never-early")]
    NeverEarly,
    /// Closed-form threshold optimality on the M=1, K=2, A=2 system.
    Proposition1,
    /// Closed-form threshold optimality for general A on K=2 systems.
    Corollary1,
    /// Monte Carlo estimates bracket the exact gains.
    Simulation,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Monotone => "monotone",
            Suite::Convexity => "convexity",
            Suite::NeverEarly => "never-early",
            Suite::Proposition1 => "proposition1",
            Suite::Corollary1 => "corollary1",
            Suite::Simulation => "simulation",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "monotone" => Ok(Suite::Monotone),
            "convexity" => Ok(Suite::Convexity),
            "never-early" => Ok(Suite::NeverEarly),
            "proposition1" => Ok(Suite::Proposition1),
            "corollary1" => Ok(Suite::Corollary1),
            "simulation" => Ok(Suite::Simulation),
            other => Err(format!("unknown suite '{other}'")),
        }
    }
}

pub const ALL_SUITES: [Suite; 6] = [
    Suite::Monotone,
    Suite::Convexity,
    Suite::NeverEarly,
    Suite::Proposition1,
    Suite::Corollary1,
    Suite::Simulation,
];

/// Aggregated result of one suite: per-check report lines and the verdict.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub lines: Vec<String>,
    pub passed: bool,
}

impl SuiteOutcome {
    pub fn render(&self) -> String {
        let mut out = format!(
            "suite {}: {} ({} checks)\n",
            self.suite,
            if self.passed { "pass" } else { "FAIL" },
            self.lines.len()
        );
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

/// 20 randomized two-period instances with seeded loads.
pub fn monotone_instances() -> Vec<ProblemConfig64> {
    (0..20u64)
        .map(|i| {
            let a = 1 + (i % 3) as u32;
            let m = 1 + ((i / 3) % 3) as u32;
            ProblemConfig64::new(2, m, a, 0.3 * a as f64, 10.0, 20.0, LoadPattern::Arbitrary)
                .with_seed(1000 + i)
        })
        .collect()
}

/// 10 seeded two-period instances for the value-recursion scans.
pub fn convexity_instances() -> Vec<ProblemConfig64> {
    (0..10u64)
        .map(|i| {
            let a = 1 + (i % 3) as u32;
            let m = 1 + (i % 2) as u32;
            let co = if i % 2 == 0 { 20.0 } else { 5.0 };
            ProblemConfig64::new(2, m, a, 0.25 * a as f64, 10.0, co, LoadPattern::Arbitrary)
                .with_seed(2000 + i)
        })
        .collect()
}

/// The c_o ≤ c_e grid: K, M, A in {2,3}×{1,2}×{1,2} and three cost pairs.
pub fn never_early_instances() -> Vec<ProblemConfig64> {
    let mut out = Vec::new();
    for k in [2u32, 3] {
        for m in [1u32, 2] {
            for a in [1u32, 2] {
                for (ce, co) in [(10.0, 10.0), (20.0, 10.0), (20.0, 5.0)] {
                    out.push(ProblemConfig64::new(
                        k,
                        m,
                        a,
                        a as f64 / 5.0,
                        ce,
                        co,
                        LoadPattern::Equal,
                    ));
                }
            }
        }
    }
    out
}

/// 15 (cost-ratio, λ) combinations at ce = 10.
fn cost_rate_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for ratio in [0.5, 1.0, 1.5, 2.0, 4.0] {
        for lambda in [0.2, 0.4, 1.0] {
            out.push((10.0 * ratio, lambda));
        }
    }
    out
}

/// The 15-combination grid on the M=1, K=2, A=2 system.
pub fn proposition1_instances() -> Vec<ProblemConfig64> {
    cost_rate_grid()
        .into_iter()
        .map(|(co, lambda)| {
            ProblemConfig64::new(2, 1, 2, lambda, 10.0, co, LoadPattern::Equal)
        })
        .collect()
}

/// The same grid extended over A in {1, 2, 3}.
pub fn corollary1_instances() -> Vec<ProblemConfig64> {
    let mut out = Vec::new();
    for a in [1u32, 2, 3] {
        for (co, lambda) in cost_rate_grid() {
            out.push(ProblemConfig64::new(2, 1, a, lambda, 10.0, co, LoadPattern::Equal));
        }
    }
    out
}

/// The six (instance, policy) pairs for the simulation cross-check: the
/// three A=1 load rows of the first benchmark table, each under the
/// do-nothing and threshold policies.
pub fn simulation_instances() -> Vec<ProblemConfig64> {
    [LoadPattern::Equal, LoadPattern::Front, LoadPattern::Back]
        .into_iter()
        .map(|load| ProblemConfig64::new(4, 1, 1, 0.2, 5.0, 20.0, load))
        .collect()
}

/// Every instance the suites touch; used by the kernel-invariant scan.
pub fn all_suite_instances() -> Vec<ProblemConfig64> {
    let mut out = monotone_instances();
    out.extend(convexity_instances());
    out.extend(never_early_instances());
    out.extend(proposition1_instances());
    out.extend(corollary1_instances());
    out.extend(simulation_instances());
    out
}

/// Arrival rows and transition rows must be probability distributions.
/// Checks every arrival row, and the full kernel row for every feasible
/// state-action pair on small spaces (every do-nothing row otherwise).
pub fn check_kernel_invariants(config: &ProblemConfig64) -> Result<f64> {
    let model = build_arrival_model(config)?;
    let space = enumerate_states(config)?;
    let mut worst = 0.0f64;
    for row in &model.p {
        worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
    }
    let exhaustive = space.size <= 2_000;
    let dn = do_nothing_policy(&space);
    for (i, x) in space.states() {
        let actions = if exhaustive {
            feasible_actions(&x, config)
        } else {
            vec![dn.actions[i].clone()]
        };
        for y in actions {
            let total: f64 = transition_distribution(&x, &y, &model, &space)?
                .iter()
                .map(|&(_, p)| p)
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok(worst)
}

const SIM_HORIZON: u64 = 200_000;
const SIM_WARMUP: u64 = 10_000;
const SIM_REPS: u32 = 20;
const SIM_SEED: u64 = 20_26;

pub fn run_suite(suite: Suite) -> Result<SuiteOutcome> {
    let mut lines = Vec::new();
    let mut passed = true;
    let record = |ok: bool, line: String, lines: &mut Vec<String>| {
        lines.push(line);
        ok
    };

    match suite {
        Suite::Monotone => {
            for config in monotone_instances() {
                let model = build_arrival_model(&config)?;
                let space = enumerate_states(&config)?;
                let opt = policy_iteration(&do_nothing_policy(&space), &space, &model, &config)?;
                let report = check_monotone_in_x1(&opt.policy, &space, config.fingerprint());
                passed &= record(report.passed(), report.render(), &mut lines);
            }
        }
        Suite::Convexity => {
            for config in convexity_instances() {
                let model = build_arrival_model(&config)?;
                let tables = finite_horizon_sequence(20, &config, &model)?;
                let report = check_value_properties(&tables, &config, config.fingerprint());
                passed &= record(report.passed(), report.render(), &mut lines);
            }
        }
        Suite::NeverEarly => {
            for config in never_early_instances() {
                let model = build_arrival_model(&config)?;
                let space = enumerate_states(&config)?;
                let opt = policy_iteration(&do_nothing_policy(&space), &space, &model, &config)?;
                let report = check_never_early(&opt.policy, &space, &model, &config)?;
                passed &= record(report.passed(), report.render(), &mut lines);
            }
        }
        Suite::Proposition1 => {
            for config in proposition1_instances() {
                let model = build_arrival_model(&config)?;
                let report = check_proposition1(&config, &model)?;
                passed &= record(report.passed(), report.render(), &mut lines);
            }
        }
        Suite::Corollary1 => {
            for config in corollary1_instances() {
                let model = build_arrival_model(&config)?;
                let space = enumerate_states(&config)?;
                let th = closed_form_thresholds(&config, &model)?;
                let pol = threshold_to_tabular(&th, &space, &config);
                let g = evaluate_policy(&pol, &space, &model, &config)?.gain;
                let opt = policy_iteration(&do_nothing_policy(&space), &space, &model, &config)?;
                let gap = (g - opt.evaluation.gain).abs();
                let ok = gap <= 1e-9;
                passed &= record(
                    ok,
                    format!(
                        "[{}] closed-form-optimal — {} s={:?} gap={gap:.2e}",
                        if ok { "pass" } else { "FAIL" },
                        config.fingerprint(),
                        th.s,
                    ),
                    &mut lines,
                );
            }
        }
        Suite::Simulation => {
            for config in simulation_instances() {
                let model = build_arrival_model(&config)?;
                let space = enumerate_states(&config)?;
                let th = closed_form_thresholds(&config, &model)?;
                let policies = [
                    ("dn", do_nothing_policy(&space)),
                    ("th", threshold_to_tabular(&th, &space, &config)),
                ];
                for (name, pol) in policies {
                    let exact = evaluate_policy(&pol, &space, &model, &config)?.gain;
                    let sim = simulate(
                        &pol, &config, &model, &space, SIM_HORIZON, SIM_WARMUP, SIM_REPS, SIM_SEED,
                    )?;
                    let gap = (sim.mean_cost - exact).abs();
                    let ok = gap <= 3.0 * sim.std_error;
                    passed &= record(
                        ok,
                        format!(
                            "[{}] simulation — {} {name}: mean={:.6} exact={exact:.6} 3se={:.6}",
                            if ok { "pass" } else { "FAIL" },
                            config.fingerprint(),
                            sim.mean_cost,
                            3.0 * sim.std_error,
                        ),
                        &mut lines,
                    );
                }
            }
        }
    }

    Ok(SuiteOutcome { suite, lines, passed })
}
