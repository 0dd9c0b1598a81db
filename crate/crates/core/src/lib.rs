//! Card guessing with complete feedback.
//!
//! A deck holds `n` types with `m` copies each. Cards are revealed one at a
//! time and a player guesses each card before it is shown. This crate
//! simulates the game, computes the expected score of optimal play exactly,
//! and evaluates the approximations used to study it: an independent-binomial
//! surrogate, a birthday-problem reset chain, Chernoff tail bounds and
//! closed-form asymptotics.

pub mod asymptotics;
pub mod birthday;
pub mod cli;
pub mod error;
pub mod exact;
pub mod game;
pub mod indep;
pub mod mc;
pub mod numeric;
pub mod rng;
pub mod strategy;

mod tracked;

pub use error::{Error, Result};
pub use exact::{ExactOptions, ExactValue, MaxProfile, Precision};
pub use game::{CountsState, DeckSpec};
pub use mc::ScoreSummary;
pub use rng::RngStream;
pub use strategy::{Strategy, Tiebreak};
