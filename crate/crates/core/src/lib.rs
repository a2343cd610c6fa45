//! Equilibrium computation for repeated-sale pricing games in which a buyer is
//! either a myopic price-taker (naive) or a forward-looking strategist
//! (sophisticated).
//!
//! The two-round model is solved for any regular value distribution on [0,1]
//! ([`continuation`], [`equilibrium`]), with an exact closed-form oracle for
//! uniform values ([`linear_oracle`]), a commitment benchmark ([`commitment`]),
//! a Monte-Carlo player ([`simulator`]) and verification tooling for the
//! discrete infinite-horizon game ([`infinite_horizon`]).

pub mod commitment;
pub mod continuation;
pub mod dist;
pub mod equilibrium;
pub mod error;
pub mod infinite_horizon;
pub mod linear_oracle;
pub mod optim;
pub mod parallel;
pub mod posterior;
pub mod simulator;

pub use continuation::{Continuation, Focus, PriceLottery};
pub use dist::{Distribution, TruncationSide};
pub use equilibrium::TwoRoundEquilibrium;
pub use error::{Error, Result};
pub use parallel::Exec;
