//! Capacity allocation in discrete-time queues where every job carries a
//! preferred service-completion period.
//!
//! Jobs arrive each period with a requested completion time up to `K - 1`
//! periods ahead. All jobs must be served on or before their requested
//! period; serving early costs `c_e` per job per period of earliness, and
//! serving a due job beyond the `M`-server capacity costs `c_o` per job
//! (overtime/outsourcing). The crate models the resulting unichain
//! average-cost MDP exactly and provides:
//!
//! * [`model`] — problem configuration, truncated-Poisson arrivals, the
//!   mixed-radix state space, stage costs and the transition kernel;
//! * [`policies`] — tabular and threshold policies, the do-nothing policy,
//!   closed-form thresholds for single-server systems and local-optimal
//!   thresholds for multi-server systems;
//! * [`solver`] — exact policy evaluation (gain and bias), one-step policy
//!   improvement, policy iteration, and the two-period finite-horizon
//!   value recursion;
//! * [`structure`] — numerical verification of the structural properties of
//!   optimal policies (monotonicity, convexity, never-early optimality);
//! * [`sim`] — seeded Monte Carlo simulation for cross-validating exact
//!   evaluations.
//!
//! All numeric code is generic over the scalar type through [`Real`];
//! concrete `f64`/`f32` aliases live at the crate root.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub mod error;
pub mod model;
pub mod policies;
pub mod sim;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};

/// Scalar type the numeric core is generic over.
///
/// Blanket-implemented for any float-like type with the required
/// conversions; in practice `f64` (the default throughout the CLI) and
/// `f32`.
pub trait Real:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

pub type ProblemConfig64 = model::ProblemConfig<f64>;
pub type ArrivalModel64 = model::ArrivalModel<f64>;
pub type Evaluation64 = solver::Evaluation<f64>;
pub type ValueTable64 = solver::ValueTable<f64>;
pub type SimResult64 = sim::SimResult<f64>;

pub type ProblemConfig32 = model::ProblemConfig<f32>;
pub type ArrivalModel32 = model::ArrivalModel<f32>;
pub type Evaluation32 = solver::Evaluation<f32>;
