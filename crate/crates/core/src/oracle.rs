//! Brute-force decision procedures used as independent test oracles.
//!
//! Everything here works on explicit runs of the plant and supervisor,
//! never on the estimation operators or the arena, so agreement between
//! this module and the constructive machinery is meaningful evidence.
//! Attacker existence is decided by exhaustively enumerating bounded
//! decision chains — every distinguishable restriction of a strategy table
//! to the observations it can actually influence — and simulating each one
//! from the definitions. Scalability is a non-goal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::attack::{action_space, AttackAction, AttackStrategy};
use crate::automata::Plant;
use crate::error::{ModelError, Result};
use crate::estimation::Observation;
use crate::supervision::SupervisorAutomaton;

/// A finite attack-strategy table: explicit decisions for the stored
/// observation histories, pass-through everywhere else. Nothing is decided
/// on the empty history.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrategyTable {
    decisions: BTreeMap<Observation, AttackAction>,
}

impl StrategyTable {
    pub fn new(decisions: BTreeMap<Observation, AttackAction>) -> Self {
        StrategyTable { decisions }
    }

    pub fn decisions(&self) -> &BTreeMap<Observation, AttackAction> {
        &self.decisions
    }

    fn from_chain(chain: &[(String, AttackAction)]) -> Self {
        let mut decisions = BTreeMap::new();
        let mut history = Vec::new();
        for (sigma, action) in chain {
            history.push(sigma.clone());
            decisions.insert(history.clone(), action.clone());
        }
        StrategyTable { decisions }
    }
}

impl AttackStrategy for StrategyTable {
    fn decide(&self, alpha: &[String]) -> AttackAction {
        match self.decisions.get(alpha) {
            Some(action) => action.clone(),
            None => AttackAction::forward(alpha.last().expect("nonempty observation").clone()),
        }
    }
}

/// Resource guard for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 5_000_000,
        }
    }
}

/// The control pattern in force at a mechanical supervisor position;
/// nothing is enabled once the position left the realization's domain.
fn pattern(sup: &SupervisorAutomaton, z: &Option<String>) -> BTreeSet<String> {
    match z {
        Some(name) => sup
            .control_decision(&crate::supervision::ZState::normal(name.clone()))
            .expect("supervisor state exists"),
        None => BTreeSet::new(),
    }
}

fn advance(sup: &SupervisorAutomaton, z: &Option<String>, event: &str) -> Option<String> {
    match z {
        Some(name) => sup
            .step(name, event)
            .expect("validated inputs")
            .map(str::to_string),
        None => None,
    }
}

/// Close run endpoints under enabled unobservable plant moves by walking
/// actual transitions; the first tuple component is carried along
/// untouched.
fn silent_close(
    plant: &Plant,
    pairs: &BTreeSet<(String, String)>,
    enabled: &BTreeSet<String>,
) -> BTreeSet<(String, String)> {
    let silent: Vec<String> = plant
        .alphabet()
        .unobservable()
        .intersection(enabled)
        .cloned()
        .collect();
    let mut out = pairs.clone();
    let mut queue: VecDeque<(String, String)> = pairs.iter().cloned().collect();
    while let Some((tag, x)) = queue.pop_front() {
        for e in &silent {
            if let Some(next) = plant.step(&x, e).expect("validated inputs") {
                let pair = (tag.clone(), next.to_string());
                if out.insert(pair.clone()) {
                    queue.push_back(pair);
                }
            }
        }
    }
    out
}

/// Step every run endpoint on one event, provided the decision enables it.
fn step_pairs(
    plant: &Plant,
    pairs: &BTreeSet<(String, String)>,
    event: &str,
    enabled: &BTreeSet<String>,
) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    if !enabled.contains(event) {
        return out;
    }
    for (tag, x) in pairs {
        if let Some(next) = plant.step(x, event).expect("validated inputs") {
            out.insert((tag.clone(), next.to_string()));
        }
    }
    out
}

fn initials(pairs: &BTreeSet<(String, String)>) -> BTreeSet<String> {
    pairs.iter().map(|(x0, _)| x0.clone()).collect()
}

fn currents(pairs: &BTreeSet<(String, String)>) -> BTreeSet<String> {
    pairs.iter().map(|(_, x)| x.clone()).collect()
}

fn diagonal(plant: &Plant) -> BTreeSet<(String, String)> {
    plant
        .initial()
        .iter()
        .map(|x0| (x0.clone(), x0.clone()))
        .collect()
}

/// Definition-level estimates for a strategy and an actual observation:
/// the attacker's current- and initial-state estimates in the attacked
/// loop, and the supervisor's current-state estimate of the doctored
/// observation in the nominal loop.
pub fn definitional_estimates(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    strategy: &dyn AttackStrategy,
    alpha: &[String],
) -> Result<(BTreeSet<String>, BTreeSet<String>, BTreeSet<String>)> {
    for e in alpha {
        if !plant.alphabet().contains(e) {
            return Err(ModelError::UnknownEvent(e.clone()));
        }
        if !plant.alphabet().is_observable(e) {
            return Err(ModelError::NotObservable(e.clone()));
        }
    }
    // attacked-loop runs: the supervisor position follows the delivered
    // events while the plant produces the actual ones
    let mut z = Some(sup.initial().to_string());
    let mut doctored: Observation = Vec::new();
    let mut pairs = silent_close(plant, &diagonal(plant), &pattern(sup, &z));
    for end in 1..=alpha.len() {
        let sigma = &alpha[end - 1];
        let action = strategy.decide(&alpha[..end]);
        if !action_space(plant.alphabet(), sigma)?.contains(&action) {
            return Err(ModelError::StrategyContract(format!(
                "action '{action}' is not admissible for event '{sigma}'"
            )));
        }
        let stepped = step_pairs(plant, &pairs, sigma, &pattern(sup, &z));
        if let Some(delivered) = action.delivered() {
            doctored.push(delivered.to_string());
            z = advance(sup, &z, delivered);
        }
        pairs = silent_close(plant, &stepped, &pattern(sup, &z));
    }
    let attacker_current = currents(&pairs);
    let attacker_initial = initials(&pairs);

    // nominal-loop runs consistent with the doctored observation
    let mut z = Some(sup.initial().to_string());
    let mut sup_runs = silent_close(plant, &diagonal(plant), &pattern(sup, &z));
    for sigma in &doctored {
        let stepped = step_pairs(plant, &sup_runs, sigma, &pattern(sup, &z));
        z = advance(sup, &z, sigma);
        sup_runs = silent_close(plant, &stepped, &pattern(sup, &z));
    }
    Ok((attacker_current, attacker_initial, currents(&sup_runs)))
}

#[derive(Debug, Clone)]
struct ChainNode {
    chain: Vec<(String, AttackAction)>,
    /// (initial, current) endpoints of attacked runs matching the chain.
    runs: BTreeSet<(String, String)>,
    /// Endpoints of nominal runs matching the doctored observation; empty
    /// exactly when the chain has stopped being stealthy.
    sup_states: BTreeSet<(String, String)>,
    z: Option<String>,
}

struct Search<'a> {
    plant: &'a Plant,
    sup: &'a SupervisorAutomaton,
    secret: &'a BTreeSet<String>,
    horizon: usize,
    max_nodes: u64,
}

impl Search<'_> {
    fn root(&self) -> ChainNode {
        let z = Some(self.sup.initial().to_string());
        let gamma = pattern(self.sup, &z);
        let closed = silent_close(self.plant, &diagonal(self.plant), &gamma);
        ChainNode {
            chain: Vec::new(),
            runs: closed.clone(),
            sup_states: closed,
            z,
        }
    }

    /// All (event, action) extensions of a node, in deterministic order.
    fn extensions(&self, node: &ChainNode) -> Result<Vec<(String, AttackAction)>> {
        let gamma = pattern(self.sup, &node.z);
        let mut out = Vec::new();
        for sigma in self.plant.alphabet().observable() {
            if !gamma.contains(sigma) {
                continue;
            }
            let realizable = node
                .runs
                .iter()
                .any(|(_, x)| self.plant.step(x, sigma).expect("validated").is_some());
            if !realizable {
                continue;
            }
            for action in action_space(self.plant.alphabet(), sigma)? {
                out.push((sigma.clone(), action));
            }
        }
        Ok(out)
    }

    /// Simulate one extension from the definitions.
    fn child(&self, node: &ChainNode, sigma: &str, action: &AttackAction) -> ChainNode {
        let gamma = pattern(self.sup, &node.z);
        let stepped = step_pairs(self.plant, &node.runs, sigma, &gamma);
        let (z_next, sup_next) = match action {
            AttackAction::Erase => (node.z.clone(), node.sup_states.clone()),
            AttackAction::Forward(delivered) => {
                let sup_stepped = step_pairs(self.plant, &node.sup_states, delivered, &gamma);
                let z_next = advance(self.sup, &node.z, delivered);
                let closed = silent_close(self.plant, &sup_stepped, &pattern(self.sup, &z_next));
                (z_next, closed)
            }
        };
        let runs = silent_close(self.plant, &stepped, &pattern(self.sup, &z_next));
        let mut chain = node.chain.clone();
        chain.push((sigma.to_string(), action.clone()));
        ChainNode {
            chain,
            runs,
            sup_states: sup_next,
            z: z_next,
        }
    }

    fn is_witness(&self, child: &ChainNode) -> bool {
        let estimate = initials(&child.runs);
        !estimate.is_empty() && estimate.is_subset(self.secret)
    }

    /// Breadth-first search over decision chains seeded with `start`.
    /// Returns the first witness in (length, chain) order.
    fn bfs(&self, start: ChainNode) -> Result<Option<ChainNode>> {
        let mut nodes: u64 = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            for (sigma, action) in self.extensions(&node)? {
                nodes += 1;
                if nodes > self.max_nodes {
                    return Err(ModelError::LimitExceeded(self.max_nodes));
                }
                let child = self.child(&node, &sigma, &action);
                if child.runs.is_empty() {
                    continue;
                }
                if self.is_witness(&child) {
                    return Ok(Some(child));
                }
                // expand only while the supervisor has seen nothing
                // impossible: later witnesses need a stealthy prefix
                if !child.sup_states.is_empty() && child.chain.len() < self.horizon {
                    queue.push_back(child);
                }
            }
        }
        Ok(None)
    }
}

fn package(found: Option<ChainNode>) -> Option<(StrategyTable, Observation)> {
    found.map(|node| {
        let observation = node.chain.iter().map(|(s, _)| s.clone()).collect();
        (StrategyTable::from_chain(&node.chain), observation)
    })
}

/// Decide attacker existence by exhaustive search, sequentially.
///
/// The search enumerates decision chains — observations paired with
/// admissible actions along them — in breadth-first, lexicographic order.
/// A chain endpoint with a stealthy prefix and an attacked initial-state
/// estimate inside the secret set extends to a full working strategy
/// (pass-through elsewhere); that completed table and the witness
/// observation are returned.
pub fn exists_attacker_sequential(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    secret: &BTreeSet<String>,
    horizon: usize,
    limits: OracleLimits,
) -> Result<Option<(StrategyTable, Observation)>> {
    sup.ensure_valid()?;
    let search = Search {
        plant,
        sup,
        secret,
        horizon,
        max_nodes: limits.max_nodes,
    };
    let root = search.root();
    if root.runs.is_empty() {
        return Ok(None);
    }
    Ok(package(search.bfs(root)?))
}

/// Decide attacker existence by exhaustive search, splitting the top-level
/// decision branches across threads. Results are identical to the
/// sequential search; only the node guard is accounted per branch.
#[cfg(feature = "parallel")]
pub fn exists_attacker(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    secret: &BTreeSet<String>,
    horizon: usize,
    limits: OracleLimits,
) -> Result<Option<(StrategyTable, Observation)>> {
    use rayon::prelude::*;

    sup.ensure_valid()?;
    let search = Search {
        plant,
        sup,
        secret,
        horizon,
        max_nodes: limits.max_nodes,
    };
    let root = search.root();
    if root.runs.is_empty() {
        return Ok(None);
    }
    // depth-one children are cheap; check them in order first
    let mut branches = Vec::new();
    for (sigma, action) in search.extensions(&root)? {
        let child = search.child(&root, &sigma, &action);
        if child.runs.is_empty() {
            continue;
        }
        if search.is_witness(&child) {
            return Ok(package(Some(child)));
        }
        if !child.sup_states.is_empty() && horizon > 1 {
            branches.push(child);
        }
    }
    let hits: Vec<Option<ChainNode>> = branches
        .into_par_iter()
        .map(|branch| search.bfs(branch))
        .collect::<Result<_>>()?;
    // deterministic reduction: shortest witness, then chain order
    let best = hits
        .into_iter()
        .flatten()
        .min_by(|a, b| (a.chain.len(), &a.chain).cmp(&(b.chain.len(), &b.chain)));
    Ok(package(best))
}

/// Sequential fallback when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn exists_attacker(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    secret: &BTreeSet<String>,
    horizon: usize,
    limits: OracleLimits,
) -> Result<Option<(StrategyTable, Observation)>> {
    exists_attacker_sequential(plant, sup, secret, horizon, limits)
}
