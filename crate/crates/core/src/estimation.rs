//! Partial-observation state estimation.
//!
//! The building blocks are the natural projection, the unobservable reach
//! (closure under enabled unobservable transitions), the observable reach
//! (one-event image) and the set of events observable from an estimate
//! under a control decision. On top of these sit the supervised
//! current-state estimate recursion and, via the augmented system over
//! (initial, current) state pairs, the initial-state estimate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automata::{Alphabet, Plant};
use crate::error::{ModelError, Result};
use crate::supervision::SupervisorAutomaton;

/// A sequence of observable events.
pub type Observation = Vec<String>;

/// Delete unobservable events from a trace, preserving the order of the
/// rest.
pub fn project(s: &[String], alphabet: &Alphabet) -> Result<Observation> {
    let mut out = Vec::new();
    for e in s {
        if !alphabet.contains(e) {
            return Err(ModelError::UnknownEvent(e.clone()));
        }
        if alphabet.is_observable(e) {
            out.push(e.clone());
        }
    }
    Ok(out)
}

fn check_subset(plant: &Plant, q: &BTreeSet<String>) -> Result<()> {
    for x in q {
        if !plant.states().contains(x) {
            return Err(ModelError::UnknownState(x.clone()));
        }
    }
    Ok(())
}

fn check_events(plant: &Plant, gamma: &BTreeSet<String>) -> Result<()> {
    for e in gamma {
        if !plant.alphabet().contains(e) {
            return Err(ModelError::UnknownEvent(e.clone()));
        }
    }
    Ok(())
}

/// Closure of `q` under unobservable transitions enabled by `gamma`,
/// computed as a worklist fixpoint. Always a superset of `q`.
pub fn unobservable_reach(
    plant: &Plant,
    q: &BTreeSet<String>,
    gamma: &BTreeSet<String>,
) -> Result<BTreeSet<String>> {
    check_subset(plant, q)?;
    check_events(plant, gamma)?;
    let silent: Vec<String> = plant
        .alphabet()
        .unobservable()
        .intersection(gamma)
        .cloned()
        .collect();
    let mut reach = q.clone();
    let mut queue: VecDeque<String> = q.iter().cloned().collect();
    while let Some(x) = queue.pop_front() {
        for e in &silent {
            if let Some(next) = plant.step(&x, e)? {
                if reach.insert(next.to_string()) {
                    queue.push_back(next.to_string());
                }
            }
        }
    }
    Ok(reach)
}

/// Image of `q` under one observable event; the empty label is the
/// identity.
pub fn observable_reach(
    plant: &Plant,
    q: &BTreeSet<String>,
    sigma: Option<&str>,
) -> Result<BTreeSet<String>> {
    check_subset(plant, q)?;
    let Some(sigma) = sigma else {
        return Ok(q.clone());
    };
    if !plant.alphabet().contains(sigma) {
        return Err(ModelError::UnknownEvent(sigma.to_string()));
    }
    if !plant.alphabet().is_observable(sigma) {
        return Err(ModelError::NotObservable(sigma.to_string()));
    }
    let mut out = BTreeSet::new();
    for x in q {
        if let Some(next) = plant.step(x, sigma)? {
            out.insert(next.to_string());
        }
    }
    Ok(out)
}

/// Observable events in `gamma` that can occur from `q` after any enabled
/// unobservable prefix; equivalently, the observable events feasible from
/// the unobservable reach of `q`.
pub fn observable_events(
    plant: &Plant,
    q: &BTreeSet<String>,
    gamma: &BTreeSet<String>,
) -> Result<BTreeSet<String>> {
    let reach = unobservable_reach(plant, q, gamma)?;
    let mut out = BTreeSet::new();
    for x in &reach {
        for e in plant.feasible_events(x)? {
            if gamma.contains(&e) && plant.alphabet().is_observable(&e) {
                out.insert(e);
            }
        }
    }
    Ok(out)
}

/// Supervised current-state estimate of the closed loop after an
/// observation.
///
/// Observations outside the projected closed-loop language yield the empty
/// set rather than an error; downstream attack bookkeeping relies on
/// exactly that to notice revelation.
pub fn current_state_estimate(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    alpha: &[String],
) -> Result<BTreeSet<String>> {
    for e in alpha {
        if !plant.alphabet().contains(e) {
            return Err(ModelError::UnknownEvent(e.clone()));
        }
        if !plant.alphabet().is_observable(e) {
            return Err(ModelError::NotObservable(e.clone()));
        }
    }
    let mut z = sup.initial().to_string();
    let decision = |z: &str, sup: &SupervisorAutomaton| -> BTreeSet<String> {
        sup.control_decision(&crate::supervision::ZState::normal(z))
            .expect("supervisor state exists")
    };
    let mut estimate = unobservable_reach(plant, plant.initial(), &decision(&z, sup))?;
    for sigma in alpha {
        let stepped = observable_reach(plant, &estimate, Some(sigma))?;
        let next_z = match sup.step(&z, sigma)? {
            Some(next) => next.to_string(),
            None => return Ok(BTreeSet::new()),
        };
        z = next_z;
        estimate = unobservable_reach(plant, &stepped, &decision(&z, sup))?;
        if estimate.is_empty() {
            return Ok(BTreeSet::new());
        }
    }
    Ok(estimate)
}

/// The plant lifted to (initial, current) state pairs so that joint
/// initial/current knowledge can be tracked with the unchanged estimation
/// operators. States carry composite identifiers `(x0,x)` and the pairing
/// map recovers the components.
#[derive(Debug, Clone)]
pub struct AugmentedPlant {
    base: Plant,
    pairing: BTreeMap<String, (String, String)>,
}

impl AugmentedPlant {
    /// The lifted automaton itself.
    pub fn base(&self) -> &Plant {
        &self.base
    }

    /// The (initial, current) components of an augmented state.
    pub fn components(&self, id: &str) -> Result<&(String, String)> {
        self.pairing
            .get(id)
            .ok_or_else(|| ModelError::UnknownState(id.to_string()))
    }

    /// The composite identifier of a pair, if that pair is reachable.
    pub fn id_of(&self, x0: &str, x: &str) -> Option<String> {
        let id = compose_pair(x0, x);
        self.pairing.contains_key(&id).then_some(id)
    }

    /// The set of first components of an augmented estimate.
    pub fn initial_projection(&self, qt: &BTreeSet<String>) -> Result<BTreeSet<String>> {
        let mut out = BTreeSet::new();
        for id in qt {
            out.insert(self.components(id)?.0.clone());
        }
        Ok(out)
    }

    /// Decode an estimate into explicit (initial, current) pairs.
    pub fn pairs(&self, qt: &BTreeSet<String>) -> Result<BTreeSet<(String, String)>> {
        qt.iter().map(|id| self.components(id).cloned()).collect()
    }
}

pub(crate) fn compose_pair(x0: &str, x: &str) -> String {
    format!("({x0},{x})")
}

/// Lift a plant to its reachable (initial, current) pair space. The initial
/// states are the diagonal pairs, and transitions move the second component
/// only.
pub fn build_augmented(plant: &Plant) -> AugmentedPlant {
    let mut pairing: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut transitions: Vec<(String, String, String)> = Vec::new();
    let mut initial = Vec::new();
    let mut queue: VecDeque<(String, String)> = VecDeque::new();
    for x0 in plant.initial() {
        let id = compose_pair(x0, x0);
        initial.push(id.clone());
        pairing.insert(id, (x0.clone(), x0.clone()));
        queue.push_back((x0.clone(), x0.clone()));
    }
    while let Some((x0, x)) = queue.pop_front() {
        let from = compose_pair(&x0, &x);
        for e in plant.feasible_events(&x).expect("state is reachable") {
            let next = plant.step(&x, &e).unwrap().unwrap().to_string();
            let to = compose_pair(&x0, &next);
            if !pairing.contains_key(&to) {
                pairing.insert(to.clone(), (x0.clone(), next.clone()));
                queue.push_back((x0.clone(), next));
            }
            transitions.push((from.clone(), e, to));
        }
    }
    let base = Plant::new_composite(
        pairing.keys().cloned().collect::<Vec<_>>(),
        plant.alphabet().clone(),
        transitions,
        initial,
    )
    .expect("augmented states and transitions are well-formed by construction");
    AugmentedPlant { base, pairing }
}

/// Supervised initial-state estimate: the first components of the
/// current-state estimate computed over the augmented system.
pub fn initial_state_estimate(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    alpha: &[String],
) -> Result<BTreeSet<String>> {
    let aug = build_augmented(plant);
    let estimate = current_state_estimate(aug.base(), sup, alpha)?;
    aug.initial_projection(&estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::format_set;
    use crate::fixtures;

    fn obs(events: &[&str]) -> Vec<String> {
        events.iter().map(|e| e.to_string()).collect()
    }

    fn states(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn projection_deletes_unobservable_events() {
        let ab = fixtures::alphabet();
        assert_eq!(project(&obs(&["a", "b"]), &ab).unwrap(), obs(&["b"]));
        assert_eq!(project(&[], &ab).unwrap(), Vec::<String>::new());
        assert_eq!(
            project(&obs(&["a", "b", "a", "c"]), &ab).unwrap(),
            obs(&["b", "c"])
        );
        assert!(project(&obs(&["x"]), &ab).is_err());
    }

    #[test]
    fn unobservable_reach_examples() {
        let g = fixtures::plant_g();
        let sigma = g.alphabet().events().clone();
        assert_eq!(
            unobservable_reach(&g, &states(&["1"]), &sigma).unwrap(),
            states(&["1", "2"])
        );
        // excluding the unobservable event from the decision freezes the set
        assert_eq!(
            unobservable_reach(&g, &states(&["1", "2"]), &states(&["b", "c", "d"])).unwrap(),
            states(&["1", "2"])
        );
        assert!(unobservable_reach(&g, &BTreeSet::new(), &sigma)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unobservable_reach_is_a_closure_operator() {
        let g = fixtures::plant_g();
        let sigma = g.alphabet().events().clone();
        let sets = [
            states(&[]),
            states(&["1"]),
            states(&["1", "2"]),
            states(&["3", "5"]),
            states(&["6"]),
        ];
        for q in &sets {
            let once = unobservable_reach(&g, q, &sigma).unwrap();
            // extensive
            assert!(once.is_superset(q));
            // idempotent
            assert_eq!(unobservable_reach(&g, &once, &sigma).unwrap(), once);
            // monotone
            for r in &sets {
                if q.is_subset(r) {
                    let bigger = unobservable_reach(&g, r, &sigma).unwrap();
                    assert!(once.is_subset(&bigger));
                }
            }
        }
    }

    #[test]
    fn observable_reach_examples() {
        let g = fixtures::plant_g();
        let q = states(&["1", "2"]);
        assert_eq!(
            observable_reach(&g, &q, Some("b")).unwrap(),
            states(&["3", "4"])
        );
        assert_eq!(observable_reach(&g, &q, None).unwrap(), q);
        assert!(observable_reach(&g, &q, Some("d")).unwrap().is_empty());
        // a is unobservable, so it is not a legal label here
        assert!(observable_reach(&g, &q, Some("a")).is_err());
    }

    #[test]
    fn observable_events_examples() {
        let g = fixtures::plant_g();
        let sigma = g.alphabet().events().clone();
        assert_eq!(
            format_set(&observable_events(&g, &states(&["1", "2"]), &sigma).unwrap()),
            "{b,c}"
        );
        assert!(observable_events(&g, &BTreeSet::new(), &sigma)
            .unwrap()
            .is_empty());
        // over the augmented plant
        let aug = build_augmented(&g);
        let qt = states(&["(1,3)", "(1,4)", "(2,4)"]);
        assert_eq!(
            format_set(&observable_events(aug.base(), &qt, &sigma).unwrap()),
            "{c,d}"
        );
    }

    #[test]
    fn current_state_estimate_examples() {
        let g = fixtures::plant_g();
        let h = fixtures::supervisor_h();
        assert_eq!(
            current_state_estimate(&g, &h, &obs(&["b"])).unwrap(),
            states(&["3", "4"])
        );
        assert_eq!(
            current_state_estimate(&g, &h, &[]).unwrap(),
            states(&["1", "2"])
        );
        assert!(current_state_estimate(&g, &h, &obs(&["d"]))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn augmented_plant_structure() {
        let g = fixtures::plant_g();
        let aug = build_augmented(&g);
        // two disjoint components rooted at the diagonal pairs
        assert_eq!(aug.base().states().len(), 12);
        assert_eq!(
            aug.base().initial(),
            &states(&["(1,1)", "(2,2)"]),
        );
        for id in aug.base().states() {
            let (x0, _) = aug.components(id).unwrap();
            // the first component never changes along transitions
            for e in aug.base().feasible_events(id).unwrap() {
                let next = aug.base().step(id, &e).unwrap().unwrap();
                assert_eq!(&aug.components(next).unwrap().0, x0);
            }
        }
        assert_eq!(
            aug.base().step("(1,6)", "c").unwrap(),
            Some("(1,1)")
        );
    }

    #[test]
    fn augmented_plant_of_single_initial_is_isomorphic() {
        let g = fixtures::plant_g();
        let restricted = Plant::new(
            g.states().iter().cloned().collect::<Vec<_>>(),
            g.alphabet().clone(),
            g.transitions()
                .map(|(f, e, t)| (f.to_string(), e.to_string(), t.to_string()))
                .collect::<Vec<_>>(),
            vec!["1".to_string()],
            Vec::<String>::new(),
        )
        .unwrap();
        let aug = build_augmented(&restricted);
        assert_eq!(aug.base().states().len(), restricted.states().len());
        for id in aug.base().states() {
            assert_eq!(aug.components(id).unwrap().0, "1");
        }
    }

    #[test]
    fn initial_projection_examples() {
        let g = fixtures::plant_g();
        let aug = build_augmented(&g);
        assert_eq!(
            aug.initial_projection(&states(&["(1,3)", "(1,4)", "(2,4)"]))
                .unwrap(),
            states(&["1", "2"])
        );
        assert!(aug.initial_projection(&BTreeSet::new()).unwrap().is_empty());
        assert_eq!(
            aug.initial_projection(&states(&["(1,6)"])).unwrap(),
            states(&["1"])
        );
    }

    #[test]
    fn initial_state_estimate_examples() {
        let g = fixtures::plant_g();
        let h = fixtures::supervisor_h();
        assert_eq!(
            initial_state_estimate(&g, &h, &obs(&["b"])).unwrap(),
            states(&["1", "2"])
        );
        assert_eq!(
            initial_state_estimate(&g, &h, &[]).unwrap(),
            states(&["1", "2"])
        );
        let all = fixtures::supervisor_all();
        assert_eq!(
            initial_state_estimate(&g, &all, &obs(&["b", "c"])).unwrap(),
            states(&["1"])
        );
    }

    /// Definition-level oracle: the estimate is the set of run endpoints
    /// over all closed-loop traces with the given projection.
    fn brute_force_estimates(
        plant: &Plant,
        sup: &SupervisorAutomaton,
        alpha: &[String],
        horizon: usize,
    ) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut current = BTreeSet::new();
        let mut initial = BTreeSet::new();
        let loop_ = crate::supervision::closed_loop(plant, sup).unwrap();
        for x0 in plant.initial() {
            let start = format!("({},{})", sup.initial(), x0);
            for s in loop_.bounded_language(&start, horizon).unwrap() {
                if project(&s, plant.alphabet()).unwrap() == alpha {
                    // strip the supervisor component from the endpoint
                    let end = loop_.run(&start, &s).unwrap().unwrap();
                    let plant_part = end.rsplit(',').next().unwrap().trim_end_matches(')');
                    current.insert(plant_part.to_string());
                    initial.insert(x0.clone());
                }
            }
        }
        (current, initial)
    }

    #[test]
    fn recursion_matches_definition_on_running_example() {
        let g = fixtures::plant_g();
        for sup in [fixtures::supervisor_h(), fixtures::supervisor_all()] {
            let mut alphas: BTreeSet<Vec<String>> = BTreeSet::new();
            for x0 in g.initial() {
                for s in g.bounded_language(x0, 4).unwrap() {
                    alphas.insert(project(&s, g.alphabet()).unwrap());
                }
            }
            for alpha in alphas {
                let (current, initial) = brute_force_estimates(&g, &sup, &alpha, 7);
                // horizon 7 suffices: traces add at most one unobservable
                // event (a) between observables and |alpha| <= 4
                if current.is_empty() {
                    continue;
                }
                assert_eq!(
                    current_state_estimate(&g, &sup, &alpha).unwrap(),
                    current,
                    "current-state estimate of {alpha:?}"
                );
                assert_eq!(
                    initial_state_estimate(&g, &sup, &alpha).unwrap(),
                    initial,
                    "initial-state estimate of {alpha:?}"
                );
            }
        }
    }

    #[test]
    fn observation_extension_iff_observable_event() {
        let g = fixtures::plant_g();
        let h = fixtures::supervisor_h();
        let loop_ = crate::supervision::closed_loop(&g, &h).unwrap();
        let mut alphas: BTreeSet<Vec<String>> = BTreeSet::new();
        for x0 in loop_.initial() {
            for s in loop_.bounded_language(x0, 6).unwrap() {
                alphas.insert(project(&s, g.alphabet()).unwrap());
            }
        }
        for alpha in &alphas {
            let estimate = current_state_estimate(&g, &h, alpha).unwrap();
            let z = h.locate(alpha).unwrap();
            let decision = h.control_decision(&z).unwrap();
            for sigma in g.alphabet().observable() {
                let mut extended = alpha.clone();
                extended.push(sigma.clone());
                let observed = alphas.contains(&extended)
                    || !current_state_estimate(&g, &h, &extended).unwrap().is_empty();
                let predicted = observable_events(&g, &estimate, &decision)
                    .unwrap()
                    .contains(sigma);
                assert_eq!(observed, predicted, "extension {extended:?}");
            }
        }
    }
}
