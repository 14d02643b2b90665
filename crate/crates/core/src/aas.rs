//! The attack arena: a bipartite graph alternating system moves and
//! attacker moves.
//!
//! Environment states carry the supervisor's estimate (driven by doctored
//! events), the attacker's augmented estimate (driven by real events) and
//! the supervisor position; the system picks the next observable event
//! there. Attack states remember that pending event; the attacker answers
//! with an action from its admissible set. A detection marker in the
//! supervisor component makes a state terminal: the game embeds every
//! attack strategy up to the point where tampering is exposed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::attack::{action_space, AttackAction};
use crate::automata::Plant;
use crate::error::{ModelError, Result};
use crate::estimation::{
    build_augmented, observable_events, observable_reach, unobservable_reach, AugmentedPlant,
    Observation,
};
use crate::supervision::{SupervisorAutomaton, ZState};

/// Default cap on constructed nodes; a plain resource guard, far beyond
/// anything the bundled models or the test generators produce.
const NODE_LIMIT: usize = 4_000_000;

/// A state where the system moves. Estimate sets are stored exactly as the
/// transition formulas produce them (before the next unobservable closure).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EnvState {
    /// Supervisor-side estimate over plant states.
    pub supervisor_estimate: BTreeSet<String>,
    /// Attacker-side estimate over augmented (initial, current) states.
    pub attacker_estimate: BTreeSet<String>,
    /// Supervisor position under the doctored observation.
    pub z: ZState,
}

impl EnvState {
    pub fn is_revealing(&self) -> bool {
        self.z.is_attack()
    }
}

/// A state where the attacker moves: an environment state plus the pending
/// actual observation. Revealing states have no active events, so no attack
/// state ever carries the detection marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AttackState {
    pub supervisor_estimate: BTreeSet<String>,
    pub attacker_estimate: BTreeSet<String>,
    pub z: String,
    pub pending: String,
}

/// The full attack arena for one plant/supervisor pair.
///
/// Construction is breadth-first from the initial environment state with
/// lexicographic event order and erase-before-forward action order, so the
/// node numbering and every serialized form are reproducible. Environment
/// states are deduplicated by value except revealing ones, which are kept
/// as distinct terminal nodes; merging those is left to
/// [`AasGraph::merge_revealing`].
#[derive(Debug, Clone)]
pub struct AasGraph {
    pub(crate) plant: Plant,
    pub(crate) sup: SupervisorAutomaton,
    pub(crate) aug: AugmentedPlant,
    pub(crate) env_nodes: Vec<EnvState>,
    pub(crate) attack_nodes: Vec<AttackState>,
    pub(crate) env_edges: Vec<BTreeMap<String, usize>>,
    pub(crate) attack_edges: Vec<BTreeMap<AttackAction, usize>>,
    /// Classification labels, present once a simplification pass ran.
    pub(crate) labels: Option<Vec<crate::classify::StateLabel>>,
}

impl AasGraph {
    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn supervisor(&self) -> &SupervisorAutomaton {
        &self.sup
    }

    pub fn augmented(&self) -> &AugmentedPlant {
        &self.aug
    }

    /// The initial environment state is always node 0.
    pub fn initial(&self) -> usize {
        0
    }

    pub fn env_states(&self) -> &[EnvState] {
        &self.env_nodes
    }

    pub fn attack_states(&self) -> &[AttackState] {
        &self.attack_nodes
    }

    /// Events active at an environment node, with their attack successors.
    pub fn env_successors(&self, env: usize) -> &BTreeMap<String, usize> {
        &self.env_edges[env]
    }

    /// Actions active at an attack node, with their environment successors.
    pub fn attack_successors(&self, attack: usize) -> &BTreeMap<AttackAction, usize> {
        &self.attack_edges[attack]
    }

    pub fn node_count(&self) -> usize {
        self.env_nodes.len() + self.attack_nodes.len()
    }

    pub fn labels(&self) -> Option<&[crate::classify::StateLabel]> {
        self.labels.as_deref()
    }

    /// Walk an extended string from the initial state; `None` as soon as a
    /// transition is missing. The result is an environment node by
    /// alternation.
    pub fn run_extended(&self, h: &ExtendedString) -> Option<usize> {
        let mut env = self.initial();
        for (sigma, action) in h.steps() {
            let attack = *self.env_edges[env].get(sigma)?;
            env = *self.attack_edges[attack].get(action)?;
        }
        Some(env)
    }

    /// All extended strings of at most `max_pairs` (event, action) pairs,
    /// with the environment node each one reaches. Enumeration follows the
    /// construction order.
    pub fn enumerate_extended(&self, max_pairs: usize) -> Vec<(ExtendedString, usize)> {
        let mut out = Vec::new();
        let mut queue: VecDeque<(Vec<(String, AttackAction)>, usize)> = VecDeque::new();
        queue.push_back((Vec::new(), self.initial()));
        while let Some((steps, env)) = queue.pop_front() {
            out.push((ExtendedString::new(steps.clone()), env));
            if steps.len() == max_pairs {
                continue;
            }
            for (sigma, attack) in &self.env_edges[env] {
                for (action, next) in &self.attack_edges[*attack] {
                    let mut ext = steps.clone();
                    ext.push((sigma.clone(), action.clone()));
                    queue.push_back((ext, *next));
                }
            }
        }
        out
    }

    /// Optional normalization: collapse value-identical revealing states
    /// into one node each. Off by default everywhere.
    pub fn merge_revealing(&self) -> AasGraph {
        let mut keep: BTreeMap<EnvState, usize> = BTreeMap::new();
        let mut remap: Vec<usize> = (0..self.env_nodes.len()).collect();
        let mut new_nodes: Vec<EnvState> = Vec::new();
        let mut new_edges: Vec<BTreeMap<String, usize>> = Vec::new();
        for (idx, node) in self.env_nodes.iter().enumerate() {
            if let Some(&existing) = keep.get(node) {
                remap[idx] = existing;
            } else {
                let fresh = new_nodes.len();
                keep.insert(node.clone(), fresh);
                remap[idx] = fresh;
                new_nodes.push(node.clone());
                new_edges.push(self.env_edges[idx].clone());
            }
        }
        let attack_edges = self
            .attack_edges
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(action, env)| (action.clone(), remap[*env]))
                    .collect()
            })
            .collect();
        AasGraph {
            plant: self.plant.clone(),
            sup: self.sup.clone(),
            aug: self.aug.clone(),
            env_nodes: new_nodes,
            attack_nodes: self.attack_nodes.clone(),
            env_edges: new_edges,
            attack_edges,
            labels: None,
        }
    }
}

/// One estimate-level step of the attacked loop: the attacker-side
/// augmented estimate follows the real event, the supervisor-side estimate
/// and position follow the delivered one. Delivery the supervisor cannot
/// process, or an emptied supervisor estimate, flips the position to the
/// detection marker.
#[allow(clippy::too_many_arguments)]
pub(crate) fn attack_update(
    plant: &Plant,
    aug: &AugmentedPlant,
    sup: &SupervisorAutomaton,
    q: &BTreeSet<String>,
    qt: &BTreeSet<String>,
    z: &ZState,
    sigma: &str,
    action: &AttackAction,
) -> Result<(BTreeSet<String>, BTreeSet<String>, ZState)> {
    let gamma = sup.control_decision(z)?;
    let qt_closed = unobservable_reach(aug.base(), qt, &gamma)?;
    let qt_next = observable_reach(aug.base(), &qt_closed, Some(sigma))?;
    let q_closed = unobservable_reach(plant, q, &gamma)?;
    match action {
        AttackAction::Erase => Ok((q_closed, qt_next, z.clone())),
        AttackAction::Forward(delivered) => {
            let (q_next, z_next) = match z {
                ZState::Normal(name) => match sup.step(name, delivered)? {
                    Some(z2) => {
                        let stepped = observable_reach(plant, &q_closed, Some(delivered))?;
                        if stepped.is_empty() {
                            (stepped, ZState::Attack)
                        } else {
                            (stepped, ZState::normal(z2))
                        }
                    }
                    None => (BTreeSet::new(), ZState::Attack),
                },
                ZState::Attack => (BTreeSet::new(), ZState::Attack),
            };
            Ok((q_next, qt_next, z_next))
        }
    }
}

/// Build the full attack arena for a validated plant/supervisor pair.
pub fn build_aas(plant: &Plant, sup: &SupervisorAutomaton) -> Result<AasGraph> {
    sup.ensure_valid()?;
    if plant.alphabet() != sup.alphabet() {
        return Err(ModelError::AlphabetMismatch(
            "plant and supervisor must share one alphabet".to_string(),
        ));
    }
    let aug = build_augmented(plant);
    let root = EnvState {
        supervisor_estimate: plant.initial().clone(),
        attacker_estimate: aug.base().initial().clone(),
        z: ZState::normal(sup.initial()),
    };
    let mut env_nodes = vec![root.clone()];
    let mut env_index: BTreeMap<EnvState, usize> = BTreeMap::new();
    env_index.insert(root, 0);
    let mut attack_nodes: Vec<AttackState> = Vec::new();
    let mut env_edges: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new()];
    let mut attack_edges: Vec<BTreeMap<AttackAction, usize>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::from([0]);

    while let Some(env_idx) = queue.pop_front() {
        let node = env_nodes[env_idx].clone();
        let ZState::Normal(z_name) = &node.z else {
            continue; // revealing states are terminal
        };
        let gamma = sup.control_decision(&node.z)?;
        let active = observable_events(aug.base(), &node.attacker_estimate, &gamma)?;
        for sigma in active {
            let attack_idx = attack_nodes.len();
            attack_nodes.push(AttackState {
                supervisor_estimate: node.supervisor_estimate.clone(),
                attacker_estimate: node.attacker_estimate.clone(),
                z: z_name.clone(),
                pending: sigma.clone(),
            });
            attack_edges.push(BTreeMap::new());
            env_edges[env_idx].insert(sigma.clone(), attack_idx);
            for action in action_space(plant.alphabet(), &sigma)? {
                let (q_next, qt_next, z_next) = attack_update(
                    plant,
                    &aug,
                    sup,
                    &node.supervisor_estimate,
                    &node.attacker_estimate,
                    &node.z,
                    &sigma,
                    &action,
                )?;
                let successor = EnvState {
                    supervisor_estimate: q_next,
                    attacker_estimate: qt_next,
                    z: z_next,
                };
                // revealing copies stay distinct; everything else merges
                let next_idx = if successor.is_revealing() {
                    let idx = env_nodes.len();
                    env_nodes.push(successor);
                    env_edges.push(BTreeMap::new());
                    idx
                } else if let Some(&idx) = env_index.get(&successor) {
                    idx
                } else {
                    let idx = env_nodes.len();
                    env_index.insert(successor.clone(), idx);
                    env_nodes.push(successor);
                    env_edges.push(BTreeMap::new());
                    queue.push_back(idx);
                    idx
                };
                attack_edges[attack_idx].insert(action, next_idx);
                if env_nodes.len() + attack_nodes.len() > NODE_LIMIT {
                    return Err(ModelError::LimitExceeded(NODE_LIMIT as u64));
                }
            }
        }
    }
    Ok(AasGraph {
        plant: plant.clone(),
        sup: sup.clone(),
        aug,
        env_nodes,
        attack_nodes,
        env_edges,
        attack_edges,
        labels: None,
    })
}

/// An alternating sequence of actual events and attacker actions, read off
/// a walk through the arena that ends at an environment state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExtendedString {
    steps: Vec<(String, AttackAction)>,
}

impl ExtendedString {
    pub fn new(steps: Vec<(String, AttackAction)>) -> Self {
        ExtendedString { steps }
    }

    pub fn empty() -> Self {
        ExtendedString { steps: Vec::new() }
    }

    /// Parse a flat token sequence where plain tokens are actual events and
    /// `erase` / `fwd:<event>` tokens are attacker actions; the two kinds
    /// must strictly alternate starting with an event.
    pub fn parse(tokens: &[String]) -> Result<Self> {
        if !tokens.len().is_multiple_of(2) {
            return Err(ModelError::MalformedExtendedString(
                "odd number of tokens".to_string(),
            ));
        }
        let mut steps = Vec::new();
        for pair in tokens.chunks(2) {
            let event = &pair[0];
            if event.parse::<AttackAction>().is_ok() {
                return Err(ModelError::MalformedExtendedString(format!(
                    "expected an actual event at '{event}'"
                )));
            }
            let action: AttackAction = pair[1].parse().map_err(|_| {
                ModelError::MalformedExtendedString(format!(
                    "expected an attacker action at '{}'",
                    pair[1]
                ))
            })?;
            steps.push((event.clone(), action));
        }
        Ok(ExtendedString { steps })
    }

    pub fn steps(&self) -> impl Iterator<Item = (&String, &AttackAction)> {
        self.steps.iter().map(|(s, a)| (s, a))
    }

    pub fn len_pairs(&self) -> usize {
        self.steps.len()
    }

    /// The actual observation: the odd positions.
    pub fn obs(&self) -> Observation {
        self.steps.iter().map(|(s, _)| s.clone()).collect()
    }

    /// The doctored observation: delivered events of the even positions.
    pub fn tam(&self) -> Observation {
        self.steps
            .iter()
            .filter_map(|(_, a)| a.delivered().map(str::to_string))
            .collect()
    }
}
