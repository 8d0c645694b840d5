//! Small reference models used as oracles and in tests.

mod linear;
mod ou;

pub use linear::{Discretized, LinearModel};
pub use ou::OrnsteinUhlenbeck;
