//! Model-based inverse reinforcement learning of time-invariant costs.
//!
//! A cost is learned from demonstrations by bi-level optimization: an inner
//! loop extracts actions by gradient descent on the current cost, an outer
//! loop updates the cost so the resulting rollout imitates the
//! demonstration. Temporally scaled costs (`lrbf`, `lmlp`) see each
//! execution's timestamps mapped onto a fixed base timeline, which lets one
//! learned cost serve executions of any duration.

pub mod costs;
pub mod diffcore;
pub mod env;
pub mod error;
pub mod eval;
pub mod trainer;
pub mod verify;

pub use error::{Error, Result};
