//! Sensor-deception attack model.
//!
//! An attacker sits between the plant's sensors and the supervisor. On each
//! new observable event it either forwards some vulnerable event in its
//! place, erases it, or — for non-vulnerable events — passes it through
//! unchanged. The supervisor therefore reacts to the doctored observation
//! while the attacker keeps the real one.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::automata::{Alphabet, Plant, Trace};
use crate::error::{ModelError, Result};
use crate::estimation::{current_state_estimate, Observation};
use crate::supervision::{SupervisorAutomaton, ZState};

/// One attacker move: suppress the observed event or deliver some event in
/// its place. Ordering puts `Erase` before any `Forward`, which fixes every
/// tie-break involving actions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttackAction {
    Erase,
    Forward(String),
}

impl AttackAction {
    pub fn forward(event: impl Into<String>) -> Self {
        AttackAction::Forward(event.into())
    }

    /// The event the supervisor receives, if any.
    pub fn delivered(&self) -> Option<&str> {
        match self {
            AttackAction::Erase => None,
            AttackAction::Forward(e) => Some(e),
        }
    }
}

impl fmt::Display for AttackAction {
    // compact file-safe form: `erase` or `fwd:<event>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackAction::Erase => f.write_str("erase"),
            AttackAction::Forward(e) => write!(f, "fwd:{e}"),
        }
    }
}

impl FromStr for AttackAction {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "erase" {
            Ok(AttackAction::Erase)
        } else if let Some(event) = s.strip_prefix("fwd:") {
            Ok(AttackAction::forward(event))
        } else {
            Err(ModelError::Invalid(format!("unknown attack action '{s}'")))
        }
    }
}

/// Admissible actions on observing `sigma`: erase or any vulnerable
/// replacement when `sigma` is vulnerable, plain forwarding otherwise.
pub fn action_space(alphabet: &Alphabet, sigma: &str) -> Result<BTreeSet<AttackAction>> {
    if !alphabet.contains(sigma) {
        return Err(ModelError::UnknownEvent(sigma.to_string()));
    }
    if !alphabet.is_observable(sigma) {
        return Err(ModelError::NotObservable(sigma.to_string()));
    }
    let mut out = BTreeSet::new();
    if alphabet.is_vulnerable(sigma) {
        out.insert(AttackAction::Erase);
        for v in alphabet.vulnerable() {
            out.insert(AttackAction::forward(v.clone()));
        }
    } else {
        out.insert(AttackAction::forward(sigma));
    }
    Ok(out)
}

/// A deterministic attack strategy: a function of the actual observation.
///
/// `decide` is called with the nonempty observation ending in the newest
/// observable event and must return an action admissible for that event.
/// Nothing is decided before the first observation.
pub trait AttackStrategy {
    fn decide(&self, alpha: &[String]) -> AttackAction;
}

/// The identity attacker: every event is forwarded unchanged.
#[derive(Debug, Clone, Default)]
pub struct PassThrough;

impl AttackStrategy for PassThrough {
    fn decide(&self, alpha: &[String]) -> AttackAction {
        AttackAction::forward(alpha.last().expect("nonempty observation").clone())
    }
}

/// Erases the first occurrence of one event and forwards everything else.
#[derive(Debug, Clone)]
pub struct EraseFirst {
    pub event: String,
}

impl EraseFirst {
    pub fn new(event: impl Into<String>) -> Self {
        EraseFirst {
            event: event.into(),
        }
    }
}

impl AttackStrategy for EraseFirst {
    fn decide(&self, alpha: &[String]) -> AttackAction {
        let last = alpha.last().expect("nonempty observation");
        if *last == self.event && !alpha[..alpha.len() - 1].contains(&self.event) {
            AttackAction::Erase
        } else {
            AttackAction::forward(last.clone())
        }
    }
}

fn check_admissible(
    alphabet: &Alphabet,
    sigma: &str,
    action: &AttackAction,
) -> Result<()> {
    if !action_space(alphabet, sigma)?.contains(action) {
        return Err(ModelError::StrategyContract(format!(
            "action '{action}' is not admissible for event '{sigma}'"
        )));
    }
    Ok(())
}

/// The observation-modification map: apply the strategy along every prefix
/// of `alpha` and concatenate what gets delivered.
pub fn modify(
    strategy: &dyn AttackStrategy,
    alpha: &[String],
    alphabet: &Alphabet,
) -> Result<Observation> {
    let mut doctored = Vec::new();
    for end in 1..=alpha.len() {
        let sigma = &alpha[end - 1];
        let action = strategy.decide(&alpha[..end]);
        check_admissible(alphabet, sigma, &action)?;
        if let Some(delivered) = action.delivered() {
            doctored.push(delivered.to_string());
        }
    }
    Ok(doctored)
}

/// Stealthiness of a strategy along an actual observation: the supervisor's
/// estimate of the doctored observation must remain nonempty.
pub fn is_stealthy(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    alpha: &[String],
) -> Result<bool> {
    let doctored = modify(strategy, alpha, plant.alphabet())?;
    Ok(!current_state_estimate(plant, sup, &doctored)?.is_empty())
}

/// Configuration of an attacked closed-loop run: the plant state, the
/// supervisor position as driven by doctored events, and both observation
/// histories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackedState {
    pub plant_state: String,
    pub sup_state: ZState,
    pub actual: Observation,
    pub doctored: Observation,
}

impl AttackedState {
    /// Start a run at one plant initial state.
    pub fn start(plant: &Plant, sup: &SupervisorAutomaton, x0: &str) -> Result<Self> {
        if !plant.initial().contains(x0) {
            return Err(ModelError::UnknownState(x0.to_string()));
        }
        Ok(AttackedState {
            plant_state: x0.to_string(),
            sup_state: ZState::normal(sup.initial()),
            actual: Vec::new(),
            doctored: Vec::new(),
        })
    }
}

/// Execute one plant event in the attacked closed loop.
///
/// The event must be feasible in the plant and enabled by the supervisor's
/// current decision (taken at its doctored-observation position).
/// Unobservable events leave the supervisor and both histories untouched;
/// observable events trigger the attacker, and a forwarded event the
/// supervisor cannot process marks supervisor-side detection, after which
/// the empty decision blocks every further event.
pub fn attacked_step(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    state: &AttackedState,
    event: &str,
) -> Result<AttackedState> {
    let next_plant = plant.step(&state.plant_state, event)?.ok_or_else(|| {
        ModelError::DisabledEvent {
            state: state.plant_state.clone(),
            event: event.to_string(),
        }
    })?;
    let decision = sup.control_decision(&state.sup_state)?;
    if !decision.contains(event) {
        return Err(ModelError::DisabledEvent {
            state: state.sup_state.to_string(),
            event: event.to_string(),
        });
    }
    let mut next = state.clone();
    next.plant_state = next_plant.to_string();
    if !plant.alphabet().is_observable(event) {
        return Ok(next);
    }
    next.actual.push(event.to_string());
    let action = strategy.decide(&next.actual);
    check_admissible(plant.alphabet(), event, &action)?;
    if let Some(delivered) = action.delivered() {
        next.doctored.push(delivered.to_string());
        next.sup_state = match &state.sup_state {
            ZState::Normal(z) => match sup.step(z, delivered)? {
                Some(z_next) => ZState::normal(z_next),
                None => ZState::Attack,
            },
            ZState::Attack => ZState::Attack,
        };
    }
    Ok(next)
}

/// Exhaustively enumerate the traces of the attacked closed loop up to a
/// length bound, from every plant initial state.
pub fn bounded_attacked_language(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    horizon: usize,
) -> Result<BTreeSet<Trace>> {
    let mut out = BTreeSet::new();
    for x0 in plant.initial() {
        let mut queue: VecDeque<(AttackedState, Trace)> = VecDeque::new();
        queue.push_back((AttackedState::start(plant, sup, x0)?, Vec::new()));
        while let Some((state, trace)) = queue.pop_front() {
            out.insert(trace.clone());
            if trace.len() == horizon {
                continue;
            }
            let decision = sup.control_decision(&state.sup_state)?;
            for event in plant.feasible_events(&state.plant_state)? {
                if !decision.contains(&event) {
                    continue;
                }
                let next = attacked_step(plant, sup, strategy, &state, &event)?;
                let mut ext = trace.clone();
                ext.push(event);
                queue.push_back((next, ext));
            }
        }
    }
    Ok(out)
}

/// One observable step of a simulated attacked run, with everything the
/// parties know at that point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackStep {
    pub event: String,
    pub action: AttackAction,
    pub actual: Observation,
    pub doctored: Observation,
    /// Supervisor's current-state estimate of the doctored observation.
    pub supervisor_estimate: BTreeSet<String>,
    /// Attacker's initial-state estimate of the actual observation.
    pub attacker_initial_estimate: BTreeSet<String>,
    pub stealthy: bool,
}

/// Trace of a simulated attacked run over a given observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackRun {
    pub steps: Vec<AttackStep>,
    /// The supervisor never saw an impossible observation.
    pub stealthy: bool,
    /// The final attacker estimate is nonempty and inside the secret set.
    pub secret_revealed: bool,
}

/// Drive a strategy along an observation of the attacked closed loop and
/// record per-step estimates, stealth flags and the final verdict.
///
/// Estimate bookkeeping mirrors the doctored/actual split: the supervisor
/// component follows delivered events, the attacker component follows real
/// ones over the augmented system.
pub fn simulate_run(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    observation: &[String],
    secret: &BTreeSet<String>,
) -> Result<AttackRun> {
    let aug = crate::estimation::build_augmented(plant);
    let mut q: BTreeSet<String> = plant.initial().clone();
    let mut qt: BTreeSet<String> = aug.base().initial().clone();
    let mut z = ZState::normal(sup.initial());
    let mut actual: Observation = Vec::new();
    let mut doctored: Observation = Vec::new();
    let mut steps = Vec::new();
    let mut attacker_estimate = aug.initial_projection(&qt)?;

    for sigma in observation {
        if !plant.alphabet().is_observable(sigma) {
            return Err(ModelError::NotObservable(sigma.clone()));
        }
        let gamma = sup.control_decision(&z)?;
        let feasible =
            crate::estimation::observable_events(aug.base(), &qt, &gamma)?;
        if !feasible.contains(sigma) {
            return Err(ModelError::DisabledEvent {
                state: z.to_string(),
                event: sigma.clone(),
            });
        }
        actual.push(sigma.clone());
        let action = strategy.decide(&actual);
        check_admissible(plant.alphabet(), sigma, &action)?;
        if let Some(delivered) = action.delivered() {
            doctored.push(delivered.to_string());
        }
        let (q_next, qt_next, z_next) =
            crate::aas::attack_update(plant, &aug, sup, &q, &qt, &z, sigma, &action)?;
        q = q_next;
        qt = qt_next;
        z = z_next;
        attacker_estimate = aug.initial_projection(&qt)?;
        steps.push(AttackStep {
            event: sigma.clone(),
            action,
            actual: actual.clone(),
            doctored: doctored.clone(),
            supervisor_estimate: crate::estimation::unobservable_reach(
                plant,
                &q,
                &sup.control_decision(&z)?,
            )?,
            attacker_initial_estimate: attacker_estimate.clone(),
            stealthy: !z.is_attack(),
        });
    }
    let stealthy = !z.is_attack();
    let secret_revealed = !attacker_estimate.is_empty() && attacker_estimate.is_subset(secret);
    Ok(AttackRun {
        steps,
        stealthy,
        secret_revealed,
    })
}

/// Projection of the attacked closed-loop language: every realizable
/// actual observation of at most `horizon` events.
///
/// Run endpoints are deduplicated per observation — a strategy is a
/// function of the observation, so (plant state, supervisor position,
/// observation) determines all future behavior and silent cycles do not
/// blow the search up.
pub fn bounded_attacked_observations(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    horizon: usize,
) -> Result<BTreeSet<Observation>> {
    let mut out = BTreeSet::from([Vec::new()]);
    let mut seen: BTreeSet<(String, ZState, Observation)> = BTreeSet::new();
    let mut queue: VecDeque<AttackedState> = VecDeque::new();
    for x0 in plant.initial() {
        let start = AttackedState::start(plant, sup, x0)?;
        if seen.insert((
            start.plant_state.clone(),
            start.sup_state.clone(),
            start.actual.clone(),
        )) {
            queue.push_back(start);
        }
    }
    while let Some(state) = queue.pop_front() {
        let decision = sup.control_decision(&state.sup_state)?;
        for event in plant.feasible_events(&state.plant_state)? {
            if !decision.contains(&event) {
                continue;
            }
            if plant.alphabet().is_observable(&event) && state.actual.len() == horizon {
                continue;
            }
            let next = attacked_step(plant, sup, strategy, &state, &event)?;
            out.insert(next.actual.clone());
            if seen.insert((
                next.plant_state.clone(),
                next.sup_state.clone(),
                next.actual.clone(),
            )) {
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}
