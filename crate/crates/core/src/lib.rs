//! Opacity verification and sensor-deception attack synthesis for
//! supervised discrete-event systems.
//!
//! The toolkit models a plant under partial-observation supervisory
//! control, verifies that the closed loop never reveals having started in
//! a secret initial state, and — taking the intruder's side — synthesizes
//! a stealthy sensor-tampering strategy that forces exactly such a
//! revelation when one exists.
//!
//! The pipeline: [`automata`] and [`supervision`] define plants,
//! supervisors and their closed loop; [`estimation`] provides the
//! partial-observation operators and state estimates; [`opacity`] decides
//! initial-state opacity. On the offensive side, [`attack`] fixes the
//! attacker's action model, [`aas`] builds the arena embedding every
//! admissible strategy, [`classify`] prunes it to the simplified arena,
//! and [`synthesis`] extracts a single attack structure together with its
//! executable strategy. [`oracle`] holds independent brute-force
//! procedures used to cross-check all of the above on small instances.

pub mod aas;
pub mod attack;
pub mod automata;
pub mod classify;
pub mod document;
pub mod dot;
pub mod error;
pub mod estimation;
pub mod fixtures;
pub mod opacity;
pub mod oracle;
pub mod random;
pub mod supervision;
pub mod synthesis;

pub use error::{ModelError, Result};
