//! Seeded random instance generation for equivalence testing and benches.
//!
//! Instances are small by design: the brute-force oracles they feed are
//! exponential. Generated supervisors satisfy both realization conditions
//! by construction (unobservable moves only as self-loops, uncontrollable
//! events enabled everywhere), and the secret set is always a proper
//! nonempty subset of at least two initial states so that neither
//! detection polarity is degenerate from the start.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Alphabet, Plant};
use crate::supervision::SupervisorAutomaton;

/// Size knobs for generated instances.
#[derive(Debug, Clone, Copy)]
pub struct InstanceConfig {
    pub max_states: usize,
    pub max_events: usize,
    pub max_sup_states: usize,
    pub max_vulnerable: usize,
    pub transition_density: f64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            max_states: 5,
            max_events: 4,
            max_sup_states: 3,
            max_vulnerable: 2,
            transition_density: 0.4,
        }
    }
}

/// One generated plant/supervisor pair with its secret set.
#[derive(Debug, Clone)]
pub struct Instance {
    pub plant: Plant,
    pub sup: SupervisorAutomaton,
    pub secret: BTreeSet<String>,
}

const EVENT_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Deterministically generate one valid instance from a seed.
pub fn random_instance(seed: u64, config: &InstanceConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_states = rng.gen_range(2..=config.max_states.max(2));
    let states: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();

    let n_events = rng.gen_range(2..=config.max_events.max(2).min(EVENT_NAMES.len()));
    let events: Vec<String> = EVENT_NAMES[..n_events]
        .iter()
        .map(|e| e.to_string())
        .collect();
    let mut observable: Vec<String> = events
        .iter()
        .filter(|_| rng.gen_bool(0.75))
        .cloned()
        .collect();
    if observable.is_empty() {
        observable.push(events[rng.gen_range(0..events.len())].clone());
    }
    let controllable: Vec<String> = events
        .iter()
        .filter(|_| rng.gen_bool(0.6))
        .cloned()
        .collect();
    let mut vulnerable: Vec<String> = Vec::new();
    for e in &observable {
        if vulnerable.len() < config.max_vulnerable && rng.gen_bool(0.5) {
            vulnerable.push(e.clone());
        }
    }
    let alphabet = Alphabet::new(
        events.clone(),
        observable.clone(),
        controllable,
        vulnerable,
    )
    .expect("generated alphabet is well-formed");

    let mut transitions = Vec::new();
    for from in &states {
        for e in &events {
            if rng.gen_bool(config.transition_density) {
                let to = &states[rng.gen_range(0..n_states)];
                transitions.push((from.clone(), e.clone(), to.clone()));
            }
        }
    }

    let n_initial = rng.gen_range(2..=n_states.min(3));
    let mut initial: BTreeSet<String> = BTreeSet::new();
    while initial.len() < n_initial {
        initial.insert(states[rng.gen_range(0..n_states)].clone());
    }
    let initial: Vec<String> = initial.into_iter().collect();
    let n_secret = rng.gen_range(1..initial.len());
    let mut secret: BTreeSet<String> = BTreeSet::new();
    while secret.len() < n_secret {
        secret.insert(initial[rng.gen_range(0..initial.len())].clone());
    }

    let plant = Plant::new(
        states,
        alphabet.clone(),
        transitions,
        initial,
        secret.iter().cloned().collect::<Vec<_>>(),
    )
    .expect("generated plant is well-formed");

    let n_sup = rng.gen_range(1..=config.max_sup_states.max(1));
    let sup_states: Vec<String> = (0..n_sup).map(|i| format!("z{i}")).collect();
    let uncontrollable = plant.alphabet().uncontrollable();
    let mut sup_transitions = Vec::new();
    for z in &sup_states {
        for e in &events {
            let is_obs = plant.alphabet().is_observable(e);
            let required = uncontrollable.contains(e);
            if required || rng.gen_bool(0.6) {
                let to = if is_obs {
                    sup_states[rng.gen_range(0..n_sup)].clone()
                } else {
                    // unobservable events may only self-loop
                    z.clone()
                };
                sup_transitions.push((z.clone(), e.clone(), to));
            }
        }
    }
    let sup = SupervisorAutomaton::new(sup_states, alphabet, sup_transitions, "z0")
        .expect("generated supervisor is well-formed");
    debug_assert!(sup.validate().is_empty());

    Instance { plant, sup, secret }
}
