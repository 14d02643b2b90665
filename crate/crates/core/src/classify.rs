//! Classification of arena states and pruning to the simplified arena.
//!
//! Once the attacker's initial-state estimate is contained in the secret
//! set (positive detected) or disjoint from it (negative detected), its
//! win or loss is settled forever. A third terminal situation is the
//! undetectable state, where every secret-rooted estimate pair has a
//! non-secret companion ending in the same current state: from there the
//! secret can never again be pinned. The simplified arena drops all
//! outgoing transitions from such states and keeps the reachable part.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::aas::AasGraph;
use crate::error::{ModelError, Result};
use crate::estimation::unobservable_reach;

/// Terminal quality of an environment state with respect to the secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DetectionClass {
    PositiveDetected,
    NegativeDetected,
    Undetectable,
    Neutral,
}

impl DetectionClass {
    /// Terminal classes lose their outgoing transitions in the simplified
    /// arena.
    pub fn is_terminal(&self) -> bool {
        !matches!(self, DetectionClass::Neutral)
    }
}

impl fmt::Display for DetectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            DetectionClass::PositiveDetected => "positive_detected",
            DetectionClass::NegativeDetected => "negative_detected",
            DetectionClass::Undetectable => "undetectable",
            DetectionClass::Neutral => "neutral",
        };
        f.write_str(text)
    }
}

/// Classification of one environment state: its detection class plus the
/// independent flag marking states where the supervisor has exposed the
/// attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLabel {
    pub class: DetectionClass,
    pub attack_revealing: bool,
}

/// Classify one environment state of an arena.
///
/// The label depends only on the attacker estimate, the supervisor
/// position and the secret set, so recomputation is idempotent. An empty
/// estimate counts as negative detected (its intersection with the secret
/// is vacuously empty).
pub fn classify(aas: &AasGraph, env: usize, secret: &BTreeSet<String>) -> Result<StateLabel> {
    let node = aas
        .env_states()
        .get(env)
        .ok_or_else(|| ModelError::Invalid(format!("no environment node {env}")))?;
    let initials = aas.augmented().initial_projection(&node.attacker_estimate)?;
    let attack_revealing = node.is_revealing();
    let class = if !initials.is_empty() && initials.is_subset(secret) {
        DetectionClass::PositiveDetected
    } else if initials.intersection(secret).next().is_none() {
        DetectionClass::NegativeDetected
    } else {
        // the decision at the detection marker is empty, so the closure
        // below degenerates to the identity there
        let gamma = aas.supervisor().control_decision(&node.z)?;
        let closure = unobservable_reach(aas.augmented().base(), &node.attacker_estimate, &gamma)?;
        let pairs = aas.augmented().pairs(&closure)?;
        let covered = pairs.iter().all(|(x0, x)| {
            !secret.contains(x0)
                || pairs
                    .iter()
                    .any(|(y0, y)| y == x && !secret.contains(y0))
        });
        if covered {
            DetectionClass::Undetectable
        } else {
            DetectionClass::Neutral
        }
    };
    Ok(StateLabel {
        class,
        attack_revealing,
    })
}

/// Prune the arena to its simplified form: classify every environment
/// state, cut all transitions leaving terminal ones, and keep the part
/// reachable from the initial state. Surviving environment states carry
/// their labels.
pub fn simplify(aas: &AasGraph, secret: &BTreeSet<String>) -> Result<AasGraph> {
    let mut env_map: BTreeMap<usize, usize> = BTreeMap::new();
    let mut env_nodes = Vec::new();
    let mut env_edges: Vec<BTreeMap<String, usize>> = Vec::new();
    let mut attack_nodes = Vec::new();
    let mut attack_edges: Vec<BTreeMap<crate::attack::AttackAction, usize>> = Vec::new();
    let mut labels = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();

    let admit_env = |old: usize,
                         env_map: &mut BTreeMap<usize, usize>,
                         env_nodes: &mut Vec<crate::aas::EnvState>,
                         env_edges: &mut Vec<BTreeMap<String, usize>>,
                         labels: &mut Vec<StateLabel>,
                         queue: &mut VecDeque<usize>|
     -> Result<usize> {
        if let Some(&idx) = env_map.get(&old) {
            return Ok(idx);
        }
        let idx = env_nodes.len();
        env_map.insert(old, idx);
        env_nodes.push(aas.env_states()[old].clone());
        env_edges.push(BTreeMap::new());
        labels.push(classify(aas, old, secret)?);
        queue.push_back(old);
        Ok(idx)
    };

    admit_env(
        aas.initial(),
        &mut env_map,
        &mut env_nodes,
        &mut env_edges,
        &mut labels,
        &mut queue,
    )?;
    while let Some(old_env) = queue.pop_front() {
        let new_env = env_map[&old_env];
        if labels[new_env].class.is_terminal() {
            continue;
        }
        for (sigma, old_attack) in aas.env_successors(old_env) {
            let new_attack = attack_nodes.len();
            attack_nodes.push(aas.attack_states()[*old_attack].clone());
            attack_edges.push(BTreeMap::new());
            env_edges[new_env].insert(sigma.clone(), new_attack);
            for (action, old_next) in aas.attack_successors(*old_attack) {
                let new_next = admit_env(
                    *old_next,
                    &mut env_map,
                    &mut env_nodes,
                    &mut env_edges,
                    &mut labels,
                    &mut queue,
                )?;
                attack_edges[new_attack].insert(action.clone(), new_next);
            }
        }
    }
    Ok(AasGraph {
        plant: aas.plant().clone(),
        sup: aas.supervisor().clone(),
        aug: aas.augmented().clone(),
        env_nodes,
        attack_nodes,
        env_edges,
        attack_edges,
        labels: Some(labels),
    })
}

/// Environment states reachable from each environment state, via any
/// number of event/action steps (reflexive).
fn env_reachability(aas: &AasGraph) -> Vec<BTreeSet<usize>> {
    let n = aas.env_states().len();
    let mut out = Vec::with_capacity(n);
    for start in 0..n {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(env) = queue.pop_front() {
            for attack in aas.env_successors(env).values() {
                for next in aas.attack_successors(*attack).values() {
                    if seen.insert(*next) {
                        queue.push_back(*next);
                    }
                }
            }
        }
        out.push(seen);
    }
    out
}

/// Check the two closure properties of classification on an unpruned
/// arena: detected polarity is preserved along reachability, and
/// undetectable states only reach undetectable or negative detected
/// states. Returns a description of every violation.
pub fn closure_violations(aas: &AasGraph, secret: &BTreeSet<String>) -> Result<Vec<String>> {
    let labels: Vec<StateLabel> = (0..aas.env_states().len())
        .map(|idx| classify(aas, idx, secret))
        .collect::<Result<_>>()?;
    let reach = env_reachability(aas);
    let mut violations = Vec::new();
    for (env, label) in labels.iter().enumerate() {
        for &next in &reach[env] {
            let target = labels[next].class;
            let ok = match label.class {
                DetectionClass::PositiveDetected => target == DetectionClass::PositiveDetected,
                DetectionClass::NegativeDetected => target == DetectionClass::NegativeDetected,
                DetectionClass::Undetectable => matches!(
                    target,
                    DetectionClass::Undetectable | DetectionClass::NegativeDetected
                ),
                DetectionClass::Neutral => true,
            };
            if !ok {
                violations.push(format!(
                    "environment node {env} ({}) reaches node {next} ({})",
                    label.class, labels[next].class
                ));
            }
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aas::build_aas;
    use crate::fixtures;
    use crate::supervision::ZState;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn labeled_saas() -> AasGraph {
        let aas = build_aas(&fixtures::plant_g(), &fixtures::supervisor_h()).unwrap();
        simplify(&aas, &set(&["1"])).unwrap()
    }

    fn find_env(aas: &AasGraph, qt: &BTreeSet<String>, z: &ZState) -> usize {
        aas.env_states()
            .iter()
            .position(|n| &n.attacker_estimate == qt && &n.z == z)
            .expect("environment node exists")
    }

    #[test]
    fn running_example_classifications() {
        let saas = labeled_saas();
        let labels = saas.labels().unwrap();

        let positive = find_env(&saas, &set(&["(1,6)"]), &ZState::normal("z2"));
        assert_eq!(labels[positive].class, DetectionClass::PositiveDetected);
        assert!(!labels[positive].attack_revealing);

        let undetectable = find_env(&saas, &set(&["(1,6)", "(2,6)"]), &ZState::normal("z2"));
        assert_eq!(labels[undetectable].class, DetectionClass::Undetectable);
        assert!(!labels[undetectable].attack_revealing);

        let revealing = find_env(&saas, &set(&["(1,6)", "(2,6)"]), &ZState::Attack);
        assert_eq!(labels[revealing].class, DetectionClass::Undetectable);
        assert!(labels[revealing].attack_revealing);
    }

    #[test]
    fn simplified_arena_matches_reference_shape() {
        let saas = labeled_saas();
        assert_eq!(saas.env_states().len(), 7);
        assert_eq!(saas.attack_states().len(), 7);
        let labels = saas.labels().unwrap();
        let positives = labels
            .iter()
            .filter(|l| l.class == DetectionClass::PositiveDetected)
            .count();
        assert_eq!(positives, 1);
        // terminal states keep no outgoing transitions
        for (env, label) in labels.iter().enumerate() {
            if label.class.is_terminal() {
                assert!(saas.env_successors(env).is_empty());
            }
        }
        let undetectable = find_env(&saas, &set(&["(1,6)", "(2,6)"]), &ZState::normal("z2"));
        assert!(saas.env_successors(undetectable).is_empty());
    }

    #[test]
    fn simplification_only_removes() {
        let aas = build_aas(&fixtures::plant_g(), &fixtures::supervisor_h()).unwrap();
        let saas = simplify(&aas, &set(&["1"])).unwrap();
        assert!(saas.node_count() <= aas.node_count());
        // every surviving edge exists in the full arena, located by value
        for (env, edges) in saas.env_edges.iter().enumerate() {
            let env_value = &saas.env_states()[env];
            let orig = aas
                .env_states()
                .iter()
                .position(|n| n == env_value)
                .expect("surviving node exists in the full arena");
            for (sigma, attack) in edges {
                let orig_attack = aas.env_successors(orig)[sigma];
                assert_eq!(
                    aas.attack_states()[orig_attack],
                    saas.attack_states()[*attack]
                );
            }
        }
    }

    #[test]
    fn pruning_at_the_root() {
        // one initial secret state only: the root estimate is already
        // contained in the secret set, so nothing survives but the root
        let g = crate::automata::Plant::new(
            vec!["1", "2"],
            fixtures::alphabet(),
            vec![("1", "b", "2")],
            vec!["1"],
            vec!["1"],
        )
        .unwrap();
        let aas = build_aas(&g, &fixtures::supervisor_h()).unwrap();
        let saas = simplify(&aas, &set(&["1"])).unwrap();
        assert_eq!(saas.env_states().len(), 1);
        assert_eq!(saas.attack_states().len(), 0);
        assert_eq!(
            saas.labels().unwrap()[0].class,
            DetectionClass::PositiveDetected
        );
    }

    #[test]
    fn labels_are_idempotent() {
        let saas = labeled_saas();
        let labels = saas.labels().unwrap();
        for (env, label) in labels.iter().enumerate() {
            assert_eq!(&classify(&saas, env, &set(&["1"])).unwrap(), label);
        }
    }

    #[test]
    fn closure_properties_hold_on_running_example() {
        for sup in [fixtures::supervisor_h(), fixtures::supervisor_all()] {
            let aas = build_aas(&fixtures::plant_g(), &sup).unwrap();
            assert_eq!(closure_violations(&aas, &set(&["1"])).unwrap(), Vec::<String>::new());
            assert_eq!(closure_violations(&aas, &set(&["2"])).unwrap(), Vec::<String>::new());
        }
    }
}
