//! Attack-strategy synthesis on the simplified arena.
//!
//! A single attack structure (SAS) restricts the arena so that every
//! attack state keeps exactly one action while every environment state
//! keeps its full branching. Reaching a positive detected state inside
//! such a structure is equivalent to the existence of a working attacker,
//! and the structure itself executes as a deterministic strategy.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::aas::{attack_update, AasGraph};
use crate::attack::{action_space, AttackAction, AttackStrategy};
use crate::automata::Plant;
use crate::classify::DetectionClass;
use crate::error::{ModelError, Result};
use crate::estimation::{build_augmented, observable_events, Observation};
use crate::supervision::{SupervisorAutomaton, ZState};

/// Node guard for the witness search; generous compared to every bundled
/// or generated instance.
const SEARCH_LIMIT: u64 = 2_000_000;

/// A deterministic sub-structure of a labeled simplified arena: all system
/// branching, one pinned action per attack state, restricted to the
/// reachable closure.
#[derive(Debug, Clone)]
pub struct Sas {
    saas: AasGraph,
    env_nodes: BTreeSet<usize>,
    attack_nodes: BTreeSet<usize>,
    choice: BTreeMap<usize, AttackAction>,
}

impl Sas {
    /// The labeled simplified arena this structure was cut from.
    pub fn saas(&self) -> &AasGraph {
        &self.saas
    }

    /// Indices (into the arena) of the surviving environment nodes.
    pub fn env_nodes(&self) -> &BTreeSet<usize> {
        &self.env_nodes
    }

    pub fn attack_nodes(&self) -> &BTreeSet<usize> {
        &self.attack_nodes
    }

    /// The pinned action of every surviving attack node.
    pub fn choice(&self) -> &BTreeMap<usize, AttackAction> {
        &self.choice
    }

    /// Whether some surviving environment node is positive detected.
    pub fn contains_positive(&self) -> bool {
        let labels = self.saas.labels().expect("synthesis requires labels");
        self.env_nodes
            .iter()
            .any(|&env| labels[env].class == DetectionClass::PositiveDetected)
    }

    /// Check both structural clauses plus closure consistency; returns a
    /// description of each violation.
    pub fn definition_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for &attack in &self.attack_nodes {
            match self.choice.get(&attack) {
                None => out.push(format!("attack node {attack} has no pinned action")),
                Some(action) => {
                    if !self.saas.attack_successors(attack).contains_key(action) {
                        out.push(format!(
                            "attack node {attack} pins '{action}' which the arena does not offer"
                        ));
                    }
                }
            }
        }
        for extra in self.choice.keys() {
            if !self.attack_nodes.contains(extra) {
                out.push(format!("choice lists unreachable attack node {extra}"));
            }
        }
        for &env in &self.env_nodes {
            for attack in self.saas.env_successors(env).values() {
                if !self.attack_nodes.contains(attack) {
                    out.push(format!(
                        "environment node {env} lost its branch to attack node {attack}"
                    ));
                }
            }
        }
        // the kept sets must be exactly the closure under the choices
        let (env_reach, attack_reach) = reachable_closure(&self.saas, &self.choice);
        if env_reach != self.env_nodes || attack_reach != self.attack_nodes {
            out.push("kept nodes differ from the reachable closure".to_string());
        }
        out
    }

    /// Materialize the structure as an executable attack strategy.
    pub fn induced_strategy(&self) -> InducedStrategy {
        let mut env_moves: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut attack_moves: BTreeMap<String, (AttackAction, String)> = BTreeMap::new();
        for &env in &self.env_nodes {
            let row = env_moves.entry(format!("e{env}")).or_default();
            for (sigma, attack) in self.saas.env_successors(env) {
                row.insert(sigma.clone(), format!("a{attack}"));
            }
        }
        for (&attack, action) in &self.choice {
            let target = self.saas.attack_successors(attack)[action];
            attack_moves.insert(
                format!("a{attack}"),
                (action.clone(), format!("e{target}")),
            );
        }
        InducedStrategy::new(format!("e{}", self.saas.initial()), env_moves, attack_moves)
    }
}

fn reachable_closure(
    saas: &AasGraph,
    choice: &BTreeMap<usize, AttackAction>,
) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut env_reach = BTreeSet::from([saas.initial()]);
    let mut attack_reach = BTreeSet::new();
    let mut queue = VecDeque::from([saas.initial()]);
    while let Some(env) = queue.pop_front() {
        for attack in saas.env_successors(env).values() {
            if attack_reach.insert(*attack) {
                if let Some(action) = choice.get(attack) {
                    if let Some(next) = saas.attack_successors(*attack).get(action) {
                        if env_reach.insert(*next) {
                            queue.push_back(*next);
                        }
                    }
                }
            }
        }
    }
    (env_reach, attack_reach)
}

/// Default completion policy: keep the observation unchanged when
/// possible, otherwise erase, otherwise deliver the smallest replacement.
fn default_action(saas: &AasGraph, attack: usize) -> AttackAction {
    let node = &saas.attack_states()[attack];
    let offers = saas.attack_successors(attack);
    let pass = AttackAction::forward(node.pending.clone());
    if offers.contains_key(&pass) {
        return pass;
    }
    if offers.contains_key(&AttackAction::Erase) {
        return AttackAction::Erase;
    }
    offers
        .keys()
        .next()
        .expect("attack nodes always offer an action")
        .clone()
}

fn labels_of(saas: &AasGraph) -> Result<&[crate::classify::StateLabel]> {
    saas.labels().ok_or_else(|| {
        ModelError::Invalid("structure carries no labels; simplify it first".to_string())
    })
}

/// Whether the closed loop admits a working attacker: some positive
/// detected environment state is reachable in the labeled arena.
pub fn is_attackable(saas: &AasGraph, secret: &BTreeSet<String>) -> Result<bool> {
    match saas.labels() {
        Some(labels) => Ok(labels
            .iter()
            .any(|l| l.class == DetectionClass::PositiveDetected)),
        None => {
            for env in 0..saas.env_states().len() {
                if crate::classify::classify(saas, env, secret)?.class
                    == DetectionClass::PositiveDetected
                {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

/// Cut a single attack structure containing a positive detected state out
/// of a labeled simplified arena; `None` when no such state is reachable.
///
/// The breadth-first shortest path to a positive state (events, then
/// actions, in their natural orders) pins the on-path actions; every other
/// reachable attack state is completed with the default policy and the
/// result is restricted to its reachable closure. Shortest paths are
/// cycle-free, so no attack state is pinned twice.
pub fn extract_sas(saas: &AasGraph, secret: &BTreeSet<String>) -> Result<Option<Sas>> {
    let labels = labels_of(saas)?;
    if !is_attackable(saas, secret)? {
        return Ok(None);
    }
    // BFS over the bipartite arena with parent links
    let mut env_parent: BTreeMap<usize, (usize, AttackAction)> = BTreeMap::new();
    let mut attack_parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen_env = BTreeSet::from([saas.initial()]);
    let mut queue = VecDeque::from([saas.initial()]);
    let mut target = None;
    if labels[saas.initial()].class == DetectionClass::PositiveDetected {
        target = Some(saas.initial());
    }
    'search: while let Some(env) = queue.pop_front() {
        for attack in saas.env_successors(env).values() {
            attack_parent.entry(*attack).or_insert(env);
            for (action, next) in saas.attack_successors(*attack) {
                if seen_env.insert(*next) {
                    env_parent.insert(*next, (*attack, action.clone()));
                    if labels[*next].class == DetectionClass::PositiveDetected {
                        target = Some(*next);
                        break 'search;
                    }
                    queue.push_back(*next);
                }
            }
        }
    }
    let Some(mut cursor) = target else {
        // a positive state exists but is unreachable: cannot happen in a
        // reachability-closed arena, treated as not attackable
        return Ok(None);
    };
    // walk the parent links back to the root, pinning on-path actions
    let mut choice: BTreeMap<usize, AttackAction> = BTreeMap::new();
    while let Some((attack, action)) = env_parent.get(&cursor) {
        choice.insert(*attack, action.clone());
        cursor = attack_parent[attack];
    }
    // complete off-path attack states and restrict to the closure; newly
    // reachable attack states may appear while completing, so iterate
    loop {
        let (env_reach, attack_reach) = reachable_closure(saas, &choice);
        let missing: Vec<usize> = attack_reach
            .iter()
            .copied()
            .filter(|a| !choice.contains_key(a))
            .collect();
        if missing.is_empty() {
            let sas = Sas {
                saas: saas.clone(),
                env_nodes: env_reach,
                attack_nodes: attack_reach,
                choice,
            };
            debug_assert!(sas.definition_violations().is_empty());
            return Ok(Some(sas));
        }
        for attack in missing {
            choice.insert(attack, default_action(saas, attack));
        }
    }
}

/// The all-default structure: no pinned path at all. Useful as a baseline
/// attacker and as the negative case in synthesis tests.
pub fn extract_default_sas(saas: &AasGraph) -> Result<Sas> {
    labels_of(saas)?;
    let mut choice: BTreeMap<usize, AttackAction> = BTreeMap::new();
    loop {
        let (env_reach, attack_reach) = reachable_closure(saas, &choice);
        let missing: Vec<usize> = attack_reach
            .iter()
            .copied()
            .filter(|a| !choice.contains_key(a))
            .collect();
        if missing.is_empty() {
            return Ok(Sas {
                saas: saas.clone(),
                env_nodes: env_reach,
                attack_nodes: attack_reach,
                choice,
            });
        }
        for attack in missing {
            choice.insert(attack, default_action(saas, attack));
        }
    }
}

/// Executable strategy induced by a single attack structure: walk the
/// structure along the actual observation and answer with the pinned
/// action; once the observation leaves the structure, pass everything
/// through unchanged forever.
#[derive(Debug, Clone)]
pub struct InducedStrategy {
    initial: String,
    env_moves: BTreeMap<String, BTreeMap<String, String>>,
    attack_moves: BTreeMap<String, (AttackAction, String)>,
}

impl InducedStrategy {
    pub fn new(
        initial: String,
        env_moves: BTreeMap<String, BTreeMap<String, String>>,
        attack_moves: BTreeMap<String, (AttackAction, String)>,
    ) -> Self {
        InducedStrategy {
            initial,
            env_moves,
            attack_moves,
        }
    }
}

impl AttackStrategy for InducedStrategy {
    fn decide(&self, alpha: &[String]) -> AttackAction {
        let fallback = || {
            AttackAction::forward(alpha.last().expect("nonempty observation").clone())
        };
        let mut cursor = &self.initial;
        for (idx, sigma) in alpha.iter().enumerate() {
            let attack = match self.env_moves.get(cursor).and_then(|row| row.get(sigma)) {
                Some(attack) => attack,
                None => return fallback(),
            };
            let Some((action, next)) = self.attack_moves.get(attack) else {
                return fallback();
            };
            if idx + 1 == alpha.len() {
                return action.clone();
            }
            cursor = next;
        }
        fallback()
    }
}

/// Search the attacked closed loop for an observation proving the strategy
/// detects the secret: a shortest `ασ` such that the strategy is stealthy
/// along `α` and its initial-state estimate after `ασ` is a nonempty subset
/// of the secret. Observations are explored breadth-first up to `horizon`
/// events; a sensible horizon is the environment-state count of the
/// simplified arena, since a cycle-free winning path suffices.
pub fn verify_is_detectable(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    secret: &BTreeSet<String>,
    horizon: usize,
) -> Result<Option<Observation>> {
    if horizon == 0 {
        return Err(ModelError::Invalid(
            "witness search needs a horizon of at least one event".to_string(),
        ));
    }
    sup.ensure_valid()?;
    let aug = build_augmented(plant);
    type Node = (
        BTreeSet<String>,
        BTreeSet<String>,
        ZState,
        Observation,
    );
    let mut queue: VecDeque<Node> = VecDeque::new();
    queue.push_back((
        plant.initial().clone(),
        aug.base().initial().clone(),
        ZState::normal(sup.initial()),
        Vec::new(),
    ));
    let mut visited: u64 = 0;
    while let Some((q, qt, z, alpha)) = queue.pop_front() {
        let gamma = sup.control_decision(&z)?;
        for sigma in observable_events(aug.base(), &qt, &gamma)? {
            visited += 1;
            if visited > SEARCH_LIMIT {
                return Err(ModelError::LimitExceeded(SEARCH_LIMIT));
            }
            let mut extended = alpha.clone();
            extended.push(sigma.clone());
            let action = strategy.decide(&extended);
            if !action_space(plant.alphabet(), &sigma)?.contains(&action) {
                return Err(ModelError::StrategyContract(format!(
                    "action '{action}' is not admissible for event '{sigma}'"
                )));
            }
            let (q_next, qt_next, z_next) =
                attack_update(plant, &aug, sup, &q, &qt, &z, &sigma, &action)?;
            let estimate = aug.initial_projection(&qt_next)?;
            // the prefix is stealthy by construction: only stealthy nodes
            // are ever expanded
            if !estimate.is_empty() && estimate.is_subset(secret) {
                return Ok(Some(extended));
            }
            if !z_next.is_attack() && extended.len() < horizon {
                queue.push_back((q_next, qt_next, z_next, extended));
            }
        }
    }
    Ok(None)
}
