//! Independent reference solvers used to cross-check the production paths:
//! a projected-gradient simplex solver for the share problem, and exhaustive
//! policy search plus an occupation-measure LP for small scheduling MDPs.

pub mod check;
pub mod mdp;
pub mod stage1;

pub use check::{mdp_oracle_check, stage1_oracle_check, MdpCheck, Stage1Check};
pub use mdp::{dense, enumerate_policies, lp_average_cost, policy_gain, toy_config, toy_instance, ToyInstance, ToyParams};
pub use stage1::{project_simplex, projected_gradient_shares};
