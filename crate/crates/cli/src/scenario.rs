//! Running the five solution methods on one instance and emitting the
//! fixed-schema CSV rows.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use capq_core::model::{build_arrival_model, enumerate_states};
use capq_core::policies::{
    closed_form_thresholds, do_nothing_policy, local_optimal_thresholds, threshold_to_tabular,
};
use capq_core::solver::{evaluate_policy, improve_policy, policy_iteration};
use capq_core::{ProblemConfig64, Result};

/// The five benchmark methods, in the fixed output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Policy iteration from the do-nothing policy.
    Opt,
    /// Do nothing: serve due jobs only.
    Dn,
    /// Do nothing plus one improvement step.
    Dn1s,
    /// Rolling thresholds (closed form for M=1, local search otherwise).
    Th,
    /// Thresholds plus one improvement step.
    Th1s,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Opt, Method::Dn, Method::Dn1s, Method::Th, Method::Th1s];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Opt => "opt",
            Method::Dn => "dn",
            Method::Dn1s => "dn1s",
            Method::Th => "th",
            Method::Th1s => "th1s",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "opt" => Ok(Method::Opt),
            "dn" => Ok(Method::Dn),
            "dn1s" => Ok(Method::Dn1s),
            "th" => Ok(Method::Th),
            "th1s" => Ok(Method::Th1s),
            other => Err(format!("unknown method '{other}' (expected opt|dn|dn1s|th|th1s)")),
        }
    }
}

/// One CSV row of a scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub scenario: String,
    pub config: ProblemConfig64,
    pub method: Method,
    pub avg_cost: f64,
    pub runtime_sec: f64,
    /// Policy-iteration rounds; only optimal runs report this.
    pub iterations: Option<u32>,
}

pub const CSV_HEADER: &str = "scenario,load,K,M,A,lambda,ce,co,method,avg_cost,runtime_sec,iterations";

impl ScenarioResult {
    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{}",
            self.scenario,
            c.load,
            c.horizon,
            c.servers,
            c.max_arrivals,
            c.lambda,
            c.early_cost,
            c.overtime_cost,
            self.method,
            self.avg_cost,
            self.runtime_sec,
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
        )
    }
}

/// Runs the requested methods on one instance. Methods always execute (and
/// are reported) in the fixed order opt, dn, dn1s, th, th1s.
pub fn run_scenario(
    scenario: &str,
    config: &ProblemConfig64,
    methods: &[Method],
) -> Result<Vec<ScenarioResult>> {
    config.validate()?;
    let model = build_arrival_model(config)?;
    let space = enumerate_states(config)?;
    let mut out = Vec::new();
    for method in Method::ALL {
        if !methods.contains(&method) {
            continue;
        }
        let start = Instant::now();
        let (avg_cost, iterations) = match method {
            Method::Opt => {
                let pi = policy_iteration(&do_nothing_policy(&space), &space, &model, config)?;
                (pi.evaluation.gain, Some(pi.iterations))
            }
            Method::Dn => {
                let dn = do_nothing_policy(&space);
                (evaluate_policy(&dn, &space, &model, config)?.gain, None)
            }
            Method::Dn1s => {
                let dn = do_nothing_policy(&space);
                let eval = evaluate_policy(&dn, &space, &model, config)?;
                let improved = improve_policy(&eval, &space, &model, config);
                (evaluate_policy(&improved, &space, &model, config)?.gain, None)
            }
            Method::Th => {
                let th = thresholds_for(config, &model)?;
                let pol = threshold_to_tabular(&th, &space, config);
                (evaluate_policy(&pol, &space, &model, config)?.gain, None)
            }
            Method::Th1s => {
                let th = thresholds_for(config, &model)?;
                let pol = threshold_to_tabular(&th, &space, config);
                let eval = evaluate_policy(&pol, &space, &model, config)?;
                let improved = improve_policy(&eval, &space, &model, config);
                (evaluate_policy(&improved, &space, &model, config)?.gain, None)
            }
        };
        out.push(ScenarioResult {
            scenario: scenario.to_string(),
            config: config.clone(),
            method,
            avg_cost,
            runtime_sec: start.elapsed().as_secs_f64(),
            iterations,
        });
    }
    Ok(out)
}

fn thresholds_for(
    config: &ProblemConfig64,
    model: &capq_core::ArrivalModel64,
) -> Result<capq_core::policies::ThresholdPolicy> {
    if config.servers == 1 {
        closed_form_thresholds(config, model)
    } else {
        local_optimal_thresholds(config, model)
    }
}
