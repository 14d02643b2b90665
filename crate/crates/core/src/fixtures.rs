//! Canonical small models used throughout the tests, benches and docs.
//!
//! `plant_g` / `supervisor_h` form the running example: a six-state plant
//! with two possible initial states (state `1` secret) controlled by a
//! three-state supervisor that disables `c` exactly after observing `b`.

use crate::automata::{Alphabet, Plant};
use crate::supervision::SupervisorAutomaton;

/// Shared alphabet of the running example: `a` unobservable, `b`
/// uncontrollable, `b` the only vulnerable event.
pub fn alphabet() -> Alphabet {
    Alphabet::new(
        vec!["a", "b", "c", "d"],
        vec!["b", "c", "d"],
        vec!["a", "c", "d"],
        vec!["b"],
    )
    .unwrap()
}

/// Six-state plant with initial states {1,2} and secret initial state 1.
pub fn plant_g() -> Plant {
    Plant::new(
        vec!["1", "2", "3", "4", "5", "6"],
        alphabet(),
        vec![
            ("1", "a", "2"),
            ("1", "b", "3"),
            ("1", "c", "5"),
            ("2", "b", "4"),
            ("2", "c", "3"),
            ("3", "a", "4"),
            ("3", "c", "6"),
            ("4", "d", "6"),
            ("5", "c", "6"),
            ("6", "c", "1"),
        ],
        vec!["1", "2"],
        vec!["1"],
    )
    .unwrap()
}

/// Supervisor that disables `c` only after observing `b`, realized with
/// states z0 (nothing observed), z1 (b observed first) and z2 (anything
/// else observed).
pub fn supervisor_h() -> SupervisorAutomaton {
    SupervisorAutomaton::new(
        vec!["z0", "z1", "z2"],
        alphabet(),
        vec![
            ("z0", "a", "z0"),
            ("z0", "d", "z0"),
            ("z0", "b", "z1"),
            ("z0", "c", "z2"),
            ("z1", "a", "z1"),
            ("z1", "b", "z1"),
            ("z1", "d", "z2"),
            ("z2", "a", "z2"),
            ("z2", "b", "z2"),
            ("z2", "c", "z2"),
            ("z2", "d", "z2"),
        ],
        "z0",
    )
    .unwrap()
}

/// One-state supervisor that enables every event (no restriction at all).
pub fn supervisor_all() -> SupervisorAutomaton {
    SupervisorAutomaton::new(
        vec!["z0"],
        alphabet(),
        vec![
            ("z0", "a", "z0"),
            ("z0", "b", "z0"),
            ("z0", "c", "z0"),
            ("z0", "d", "z0"),
        ],
        "z0",
    )
    .unwrap()
}

/// The running example with both `b` and `d` vulnerable, giving the
/// attacker replacement moves in addition to erasure.
pub fn vulnerable_bd_pair() -> (Plant, SupervisorAutomaton) {
    let alphabet = Alphabet::new(
        vec!["a", "b", "c", "d"],
        vec!["b", "c", "d"],
        vec!["a", "c", "d"],
        vec!["b", "d"],
    )
    .unwrap();
    rebuild_with_alphabet(alphabet)
}

/// The running example with every vulnerability stripped from the
/// alphabet: the attacker can only forward what it sees.
pub fn no_vulnerable_pair() -> (Plant, SupervisorAutomaton) {
    let alphabet = Alphabet::new(
        vec!["a", "b", "c", "d"],
        vec!["b", "c", "d"],
        vec!["a", "c", "d"],
        Vec::<&str>::new(),
    )
    .unwrap();
    rebuild_with_alphabet(alphabet)
}

fn rebuild_with_alphabet(alphabet: Alphabet) -> (Plant, SupervisorAutomaton) {
    let g = plant_g();
    let plant = Plant::new(
        g.states().iter().cloned().collect::<Vec<_>>(),
        alphabet.clone(),
        g.transitions()
            .map(|(f, e, t)| (f.to_string(), e.to_string(), t.to_string()))
            .collect::<Vec<_>>(),
        g.initial().iter().cloned().collect::<Vec<_>>(),
        g.secret_initial().iter().cloned().collect::<Vec<_>>(),
    )
    .unwrap();
    let h = supervisor_h();
    let sup = SupervisorAutomaton::new(
        h.states().iter().cloned().collect::<Vec<_>>(),
        alphabet,
        h.transitions()
            .map(|(f, e, t)| (f.to_string(), e.to_string(), t.to_string()))
            .collect::<Vec<_>>(),
        h.initial(),
    )
    .unwrap();
    (plant, sup)
}
