//! Crowd navigation with sparse interacting Gaussian processes.
//!
//! Agents are modelled as GP mixtures over positions on a discrete time grid;
//! the planner picks the joint robot/crowd basis with the largest
//! non-collision coefficient and executes its first robot step.

pub mod baselines;
pub mod gp;
pub mod interaction;
pub mod linalg;
pub mod planner;
pub mod sampling;
pub mod sim;
