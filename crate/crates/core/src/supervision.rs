//! Supervisor realizations and closed-loop composition.
//!
//! A supervisor is realized by a deterministic automaton whose per-state
//! active-event set *is* the control decision issued after the observation
//! driving the automaton to that state. Two realization conditions apply:
//! (i) every transition that leaves its source state is labeled by an
//! observable event, so decisions depend only on observations; and the
//! decision at every state contains all uncontrollable events.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automata::{product, Alphabet, Plant};
use crate::error::{check_identifier, ModelError, Result};

/// Reserved identifier for the synthetic supervisor position reached once
/// the doctored observation has become impossible; rejected in input files.
pub const ATTACK_STATE_ID: &str = "z_att";

/// A supervisor position: either a real state of the realization automaton
/// or the distinguished marker that the supervisor has detected tampering.
/// The control decision at `Attack` is empty, so nothing can be enabled
/// once detection happens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ZState {
    Normal(String),
    Attack,
}

impl ZState {
    pub fn normal(z: impl Into<String>) -> Self {
        ZState::Normal(z.into())
    }

    pub fn is_attack(&self) -> bool {
        matches!(self, ZState::Attack)
    }
}

impl fmt::Display for ZState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZState::Normal(z) => f.write_str(z),
            ZState::Attack => f.write_str(ATTACK_STATE_ID),
        }
    }
}

/// Deterministic realization of a partial-observation supervisor.
///
/// Construction performs structural checks only (known identifiers,
/// determinism, reserved names); the realization conditions are reported by
/// [`SupervisorAutomaton::validate`] and never repaired silently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervisorAutomaton {
    states: BTreeSet<String>,
    alphabet: Alphabet,
    transitions: BTreeMap<String, BTreeMap<String, String>>,
    initial: String,
}

/// A realization-condition violation, reported with the offending state and
/// event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SupervisorViolation {
    /// A non-self-loop transition is labeled by an unobservable event.
    UnobservableMove { state: String, event: String },
    /// An uncontrollable event is missing from the decision at `state`.
    UncontrollableDisabled { state: String, event: String },
}

impl fmt::Display for SupervisorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupervisorViolation::UnobservableMove { state, event } => write!(
                f,
                "unobservable event '{event}' moves the supervisor out of state '{state}'"
            ),
            SupervisorViolation::UncontrollableDisabled { state, event } => write!(
                f,
                "uncontrollable event '{event}' is disabled at state '{state}'"
            ),
        }
    }
}

impl SupervisorAutomaton {
    pub fn new<S, T>(
        states: impl IntoIterator<Item = S>,
        alphabet: Alphabet,
        transitions: impl IntoIterator<Item = (T, T, T)>,
        initial: impl Into<String>,
    ) -> Result<Self>
    where
        S: Into<String>,
        T: Into<String>,
    {
        let mut state_set = BTreeSet::new();
        for z in states {
            let z = z.into();
            check_identifier(&z)?;
            if z == ATTACK_STATE_ID {
                return Err(ModelError::ReservedState(z));
            }
            if !state_set.insert(z.clone()) {
                return Err(ModelError::DuplicateIdentifier(z));
            }
        }
        let mut map: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for (from, event, to) in transitions {
            let (from, event, to) = (from.into(), event.into(), to.into());
            if !state_set.contains(&from) {
                return Err(ModelError::UnknownState(from));
            }
            if !state_set.contains(&to) {
                return Err(ModelError::UnknownState(to));
            }
            if !alphabet.contains(&event) {
                return Err(ModelError::UnknownEvent(event));
            }
            let row = map.entry(from.clone()).or_default();
            if let Some(prev) = row.get(&event) {
                if prev != &to {
                    return Err(ModelError::Nondeterministic { state: from, event });
                }
            }
            row.insert(event, to);
        }
        let initial = initial.into();
        if !state_set.contains(&initial) {
            return Err(ModelError::InitialNotDeclared(initial));
        }
        Ok(SupervisorAutomaton {
            states: state_set,
            alphabet,
            transitions: map,
            initial,
        })
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.transitions.iter().flat_map(|(from, row)| {
            row.iter()
                .map(move |(event, to)| (from.as_str(), event.as_str(), to.as_str()))
        })
    }

    /// One step of the realization automaton.
    pub fn step(&self, z: &str, event: &str) -> Result<Option<&str>> {
        if !self.states.contains(z) {
            return Err(ModelError::UnknownState(z.to_string()));
        }
        if !self.alphabet.contains(event) {
            return Err(ModelError::UnknownEvent(event.to_string()));
        }
        Ok(self
            .transitions
            .get(z)
            .and_then(|row| row.get(event))
            .map(|s| s.as_str()))
    }

    /// The supervisor position after an observation, starting from the
    /// initial state. `Attack` once any step is undefined.
    pub fn locate(&self, observation: &[String]) -> Result<ZState> {
        let mut z = self.initial.clone();
        for e in observation {
            match self.step(&z, e)? {
                Some(next) => z = next.to_string(),
                None => return Ok(ZState::Attack),
            }
        }
        Ok(ZState::Normal(z))
    }

    /// The control decision at a supervisor position: the active-event set
    /// of a real state, or the empty set at the detection marker.
    pub fn control_decision(&self, z: &ZState) -> Result<BTreeSet<String>> {
        match z {
            ZState::Attack => Ok(BTreeSet::new()),
            ZState::Normal(name) => {
                if !self.states.contains(name) {
                    return Err(ModelError::UnknownState(name.clone()));
                }
                Ok(self
                    .transitions
                    .get(name)
                    .map(|row| row.keys().cloned().collect())
                    .unwrap_or_default())
            }
        }
    }

    /// Check both realization conditions and report every violation.
    /// Determinism is structural here, so it cannot be violated.
    pub fn validate(&self) -> Vec<SupervisorViolation> {
        let mut violations = Vec::new();
        for (from, row) in &self.transitions {
            for (event, to) in row {
                if from != to && !self.alphabet.is_observable(event) {
                    violations.push(SupervisorViolation::UnobservableMove {
                        state: from.clone(),
                        event: event.clone(),
                    });
                }
            }
        }
        let uncontrollable = self.alphabet.uncontrollable();
        for z in &self.states {
            let decision = self
                .transitions
                .get(z)
                .map(|row| row.keys().cloned().collect::<BTreeSet<_>>())
                .unwrap_or_default();
            for u in &uncontrollable {
                if !decision.contains(u) {
                    violations.push(SupervisorViolation::UncontrollableDisabled {
                        state: z.clone(),
                        event: u.clone(),
                    });
                }
            }
        }
        violations
    }

    /// Reject the supervisor with an error if it violates either
    /// realization condition.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(ModelError::InvalidSupervisor(msgs.join("; ")))
        }
    }

    /// View the realization automaton as a plant so the generic product and
    /// language machinery applies to it.
    pub fn as_plant(&self) -> Plant {
        Plant::new(
            self.states.iter().cloned().collect::<Vec<_>>(),
            self.alphabet.clone(),
            self.transitions()
                .map(|(f, e, t)| (f.to_string(), e.to_string(), t.to_string()))
                .collect::<Vec<_>>(),
            vec![self.initial.clone()],
            Vec::<String>::new(),
        )
        .expect("a structurally valid supervisor is a valid plant")
    }
}

/// The closed loop of a plant under a supervisor: the product automaton
/// whose language is exactly the supervised language. States are composite
/// identifiers `(z,x)` and the initial set is `{z0} x X_0`.
pub fn closed_loop(plant: &Plant, sup: &SupervisorAutomaton) -> Result<Plant> {
    sup.ensure_valid()?;
    if plant.alphabet() != sup.alphabet() {
        return Err(ModelError::AlphabetMismatch(
            "plant and supervisor must share one alphabet".to_string(),
        ));
    }
    product(&sup.as_plant(), plant)
}
