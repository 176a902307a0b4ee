//! Receding-horizon multi-robot trajectory planning for cluttered
//! environments.
//!
//! Every sampling step each robot solves one convex program that combines
//! pairwise separating half-spaces (with an elastic warning band at the
//! terminal horizon), an online-built polyhedral safe corridor around its
//! previously planned trajectory, and an adaptive penalty that resolves
//! deadlocks by biasing robots to pass each other on a consistent side.
//! The shifted previous solution is always feasible for the new program, so
//! replanning never fails.
//!
//! Modules mirror the planning pipeline: [`geometry`] is the convex kernel,
//! [`qp`] the dense QP solver, [`dynamics`] the double-integrator model,
//! [`pathfind`] the global path and tractive-point search, [`corridor`] the
//! safe-corridor construction, [`coordination`] the inter-robot machinery,
//! [`mpc`] the per-robot program, and [`sim`] the synchronous swarm loop.

pub mod coordination;
pub mod corridor;
pub mod dynamics;
pub mod geometry;
pub mod mpc;
pub mod pathfind;
pub mod qp;
pub mod sim;

pub use dynamics::{Limits, State, Trajectory};
pub use geometry::{ConvexObstacle, HalfSpace, Hull, Point};
pub use sim::{AnyScenario, Outcome, RunLog, Scenario};
