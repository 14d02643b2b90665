//! Finite automata with partial deterministic transitions.
//!
//! A [`Plant`] is a deterministic automaton with a *set* of initial states,
//! an optional set of secret initial states, and an event alphabet carrying
//! observability / controllability / vulnerability flags. States and events
//! are opaque string identifiers; every internal ordering is the
//! lexicographic order of those identifiers, which makes all derived
//! artifacts reproducible byte for byte.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{check_identifier, ModelError, Result};

/// A finite string of events.
pub type Trace = Vec<String>;

/// Event alphabet with attribute flags.
///
/// Invariants enforced at construction: identifiers are unique and
/// well-formed, the observable/controllable/vulnerable sets are subsets of
/// the alphabet, and every vulnerable event is observable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    events: BTreeSet<String>,
    observable: BTreeSet<String>,
    controllable: BTreeSet<String>,
    vulnerable: BTreeSet<String>,
}

impl Alphabet {
    pub fn new(
        events: impl IntoIterator<Item = impl Into<String>>,
        observable: impl IntoIterator<Item = impl Into<String>>,
        controllable: impl IntoIterator<Item = impl Into<String>>,
        vulnerable: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in events {
            let e = e.into();
            check_identifier(&e)?;
            if !set.insert(e.clone()) {
                return Err(ModelError::DuplicateIdentifier(e));
            }
        }
        fn subset(
            set: &BTreeSet<String>,
            items: impl IntoIterator<Item = impl Into<String>>,
        ) -> Result<BTreeSet<String>> {
            let mut out = BTreeSet::new();
            for e in items {
                let e = e.into();
                if !set.contains(&e) {
                    return Err(ModelError::UnknownEvent(e));
                }
                out.insert(e);
            }
            Ok(out)
        }
        let observable = subset(&set, observable)?;
        let controllable = subset(&set, controllable)?;
        let vulnerable = subset(&set, vulnerable)?;
        for v in &vulnerable {
            if !observable.contains(v) {
                return Err(ModelError::VulnerableNotObservable(v.clone()));
            }
        }
        Ok(Alphabet {
            events: set,
            observable,
            controllable,
            vulnerable,
        })
    }

    pub fn events(&self) -> &BTreeSet<String> {
        &self.events
    }

    pub fn observable(&self) -> &BTreeSet<String> {
        &self.observable
    }

    pub fn controllable(&self) -> &BTreeSet<String> {
        &self.controllable
    }

    pub fn vulnerable(&self) -> &BTreeSet<String> {
        &self.vulnerable
    }

    /// Derived complement of the observable set.
    pub fn unobservable(&self) -> BTreeSet<String> {
        self.events.difference(&self.observable).cloned().collect()
    }

    /// Derived complement of the controllable set.
    pub fn uncontrollable(&self) -> BTreeSet<String> {
        self.events
            .difference(&self.controllable)
            .cloned()
            .collect()
    }

    pub fn contains(&self, event: &str) -> bool {
        self.events.contains(event)
    }

    pub fn is_observable(&self, event: &str) -> bool {
        self.observable.contains(event)
    }

    pub fn is_vulnerable(&self, event: &str) -> bool {
        self.vulnerable.contains(event)
    }
}

/// Deterministic automaton with partial transitions and a set of initial
/// states, a subset of which may be marked secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    states: BTreeSet<String>,
    alphabet: Alphabet,
    // state -> event -> successor; kept sparse, never completed with a sink
    transitions: BTreeMap<String, BTreeMap<String, String>>,
    initial: BTreeSet<String>,
    secret_initial: BTreeSet<String>,
}

impl Plant {
    pub fn new<S, T>(
        states: impl IntoIterator<Item = S>,
        alphabet: Alphabet,
        transitions: impl IntoIterator<Item = (T, T, T)>,
        initial: impl IntoIterator<Item = S>,
        secret_initial: impl IntoIterator<Item = S>,
    ) -> Result<Self>
    where
        S: Into<String>,
        T: Into<String>,
    {
        Self::build(states, alphabet, transitions, initial, secret_initial, true)
    }

    /// Constructor for internally derived automata (products, augmented
    /// systems) whose composite state names `(a,b)` intentionally contain
    /// separators that user-supplied identifiers may not.
    pub(crate) fn new_composite<S, T>(
        states: impl IntoIterator<Item = S>,
        alphabet: Alphabet,
        transitions: impl IntoIterator<Item = (T, T, T)>,
        initial: impl IntoIterator<Item = S>,
    ) -> Result<Self>
    where
        S: Into<String>,
        T: Into<String>,
    {
        Self::build(
            states,
            alphabet,
            transitions,
            initial,
            Vec::<String>::new(),
            false,
        )
    }

    fn build<S, T, U>(
        states: impl IntoIterator<Item = S>,
        alphabet: Alphabet,
        transitions: impl IntoIterator<Item = (T, T, T)>,
        initial: impl IntoIterator<Item = S>,
        secret_initial: impl IntoIterator<Item = U>,
        check_ids: bool,
    ) -> Result<Self>
    where
        S: Into<String>,
        T: Into<String>,
        U: Into<String>,
    {
        let mut state_set = BTreeSet::new();
        for s in states {
            let s = s.into();
            if check_ids {
                check_identifier(&s)?;
            }
            if !state_set.insert(s.clone()) {
                return Err(ModelError::DuplicateIdentifier(s));
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
        let mut init = BTreeSet::new();
        for s in initial {
            let s = s.into();
            if !state_set.contains(&s) {
                return Err(ModelError::InitialNotDeclared(s));
            }
            init.insert(s);
        }
        let mut secret = BTreeSet::new();
        for s in secret_initial {
            let s = s.into();
            if !init.contains(&s) {
                return Err(ModelError::SecretNotInitial(s));
            }
            secret.insert(s);
        }
        Ok(Plant {
            states: state_set,
            alphabet,
            transitions: map,
            initial: init,
            secret_initial: secret,
        })
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> &BTreeSet<String> {
        &self.initial
    }

    pub fn secret_initial(&self) -> &BTreeSet<String> {
        &self.secret_initial
    }

    /// Iterate over all transitions in lexicographic (from, event) order.
    pub fn transitions(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.transitions.iter().flat_map(|(from, row)| {
            row.iter()
                .map(move |(event, to)| (from.as_str(), event.as_str(), to.as_str()))
        })
    }

    fn check_state(&self, x: &str) -> Result<()> {
        if self.states.contains(x) {
            Ok(())
        } else {
            Err(ModelError::UnknownState(x.to_string()))
        }
    }

    fn check_event(&self, e: &str) -> Result<()> {
        if self.alphabet.contains(e) {
            Ok(())
        } else {
            Err(ModelError::UnknownEvent(e.to_string()))
        }
    }

    /// The one-step transition, `None` where it is undefined.
    pub fn step(&self, x: &str, e: &str) -> Result<Option<&str>> {
        self.check_state(x)?;
        self.check_event(e)?;
        Ok(self
            .transitions
            .get(x)
            .and_then(|row| row.get(e))
            .map(|s| s.as_str()))
    }

    /// Extension of the transition function to traces; `run(x, ε) = x`.
    pub fn run(&self, x0: &str, s: &[String]) -> Result<Option<&str>> {
        self.check_state(x0)?;
        let mut cur = self.states.get(x0).map(|s| s.as_str()).unwrap();
        for e in s {
            match self.step(cur, e)? {
                Some(next) => cur = next,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    /// The set of events with a transition defined at `x`.
    pub fn feasible_events(&self, x: &str) -> Result<BTreeSet<String>> {
        self.check_state(x)?;
        Ok(self
            .transitions
            .get(x)
            .map(|row| row.keys().cloned().collect())
            .unwrap_or_default())
    }

    /// All traces of length at most `horizon` defined from `x0`, enumerated
    /// exhaustively. Intended for tests and small-scope oracles.
    pub fn bounded_language(&self, x0: &str, horizon: usize) -> Result<BTreeSet<Trace>> {
        self.check_state(x0)?;
        let mut out = BTreeSet::new();
        let mut queue: VecDeque<(String, Trace)> = VecDeque::new();
        queue.push_back((x0.to_string(), Vec::new()));
        while let Some((x, trace)) = queue.pop_front() {
            out.insert(trace.clone());
            if trace.len() == horizon {
                continue;
            }
            if let Some(row) = self.transitions.get(&x) {
                for (e, to) in row {
                    let mut next = trace.clone();
                    next.push(e.clone());
                    queue.push_back((to.clone(), next));
                }
            }
        }
        Ok(out)
    }
}

/// Synchronous product of two deterministic automata over a shared alphabet.
///
/// The result moves on an event exactly when both operands do. Its state set
/// is the reachable part of the pair space from the cross product of the
/// operands' initial sets, with composite identifiers `(a,b)`. Secret
/// markings do not carry over.
pub fn product(a: &Plant, b: &Plant) -> Result<Plant> {
    if a.alphabet != b.alphabet {
        return Err(ModelError::AlphabetMismatch(
            "product operands must share one alphabet".to_string(),
        ));
    }
    let compose = |x: &str, y: &str| format!("({x},{y})");
    let mut states = BTreeSet::new();
    let mut transitions: Vec<(String, String, String)> = Vec::new();
    let mut initial = BTreeSet::new();
    let mut queue: VecDeque<(String, String)> = VecDeque::new();
    for xa in &a.initial {
        for xb in &b.initial {
            let id = compose(xa, xb);
            initial.insert(id.clone());
            if states.insert(id) {
                queue.push_back((xa.clone(), xb.clone()));
            }
        }
    }
    while let Some((xa, xb)) = queue.pop_front() {
        let from = compose(&xa, &xb);
        for e in a.alphabet.events() {
            let (na, nb) = (a.step(&xa, e)?, b.step(&xb, e)?);
            if let (Some(na), Some(nb)) = (na, nb) {
                let to = compose(na, nb);
                if states.insert(to.clone()) {
                    queue.push_back((na.to_string(), nb.to_string()));
                }
                transitions.push((from.clone(), e.clone(), to));
            }
        }
    }
    Plant::new_composite(
        states.into_iter().collect::<Vec<_>>(),
        a.alphabet.clone(),
        transitions,
        initial.into_iter().collect::<Vec<_>>(),
    )
}

/// Format a set of identifiers the way estimates are printed everywhere:
/// sorted, comma-separated, in braces.
pub fn format_set<'a>(set: impl IntoIterator<Item = &'a String>) -> String {
    let items: Vec<&str> = set.into_iter().map(|s| s.as_str()).collect();
    format!("{{{}}}", items.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn vulnerable_must_be_observable() {
        let err = Alphabet::new(
            vec!["a", "b"],
            vec!["b"],
            vec!["a"],
            vec!["a"], // a is unobservable
        )
        .unwrap_err();
        assert_eq!(err, ModelError::VulnerableNotObservable("a".to_string()));
    }

    fn none() -> Vec<&'static str> {
        Vec::new()
    }

    #[test]
    fn identifier_rules() {
        assert!(Alphabet::new(vec![""], none(), none(), none()).is_err());
        assert!(Alphabet::new(vec!["a b"], none(), none(), none()).is_err());
        assert!(Alphabet::new(vec!["a,b"], none(), none(), none()).is_err());
        assert!(Alphabet::new(vec!["(a)"], none(), none(), none()).is_err());
    }

    #[test]
    fn derived_partitions() {
        let g = fixtures::plant_g();
        let ab = g.alphabet();
        assert_eq!(format_set(&ab.unobservable()), "{a}");
        assert_eq!(format_set(&ab.uncontrollable()), "{b}");
    }

    #[test]
    fn step_on_running_example() {
        let g = fixtures::plant_g();
        assert_eq!(g.step("1", "a").unwrap(), Some("2"));
        assert_eq!(g.step("1", "d").unwrap(), None);
        assert_eq!(g.step("5", "a").unwrap(), None);
        assert!(matches!(
            g.step("9", "a"),
            Err(ModelError::UnknownState(_))
        ));
        assert!(matches!(
            g.step("1", "x"),
            Err(ModelError::UnknownEvent(_))
        ));
    }

    #[test]
    fn run_folds_step() {
        let g = fixtures::plant_g();
        let bc: Vec<String> = vec!["b".into(), "c".into()];
        assert_eq!(g.run("1", &bc).unwrap(), Some("6"));
        assert_eq!(g.run("1", &[]).unwrap(), Some("1"));
        // fold of step over 2 -b-> 4 -d-> 6
        let bd: Vec<String> = vec!["b".into(), "d".into()];
        let mut cur = "2".to_string();
        for e in &bd {
            cur = g.step(&cur, e).unwrap().unwrap().to_string();
        }
        assert_eq!(g.run("2", &bd).unwrap().map(str::to_string), Some(cur));
        assert_eq!(g.run("2", &bd).unwrap(), Some("6"));
        // undefined continuation
        let dd: Vec<String> = vec!["d".into()];
        assert_eq!(g.run("1", &dd).unwrap(), None);
    }

    #[test]
    fn feasible_events_on_running_example() {
        let g = fixtures::plant_g();
        assert_eq!(format_set(&g.feasible_events("1").unwrap()), "{a,b,c}");
        assert_eq!(format_set(&g.feasible_events("6").unwrap()), "{c}");
        // definition-level consistency on every state
        for x in g.states() {
            let via_step: BTreeSet<String> = g
                .alphabet()
                .events()
                .iter()
                .filter(|e| g.step(x, e).unwrap().is_some())
                .cloned()
                .collect();
            assert_eq!(g.feasible_events(x).unwrap(), via_step);
        }
    }

    #[test]
    fn product_with_universal_automaton_is_identity() {
        let g = fixtures::plant_g();
        let all: Vec<(String, String, String)> = g
            .alphabet()
            .events()
            .iter()
            .map(|e| ("u".to_string(), e.clone(), "u".to_string()))
            .collect();
        let one = Plant::new(
            vec!["u"],
            g.alphabet().clone(),
            all,
            vec!["u"],
            Vec::<&str>::new(),
        )
        .unwrap();
        let p = product(&g, &one).unwrap();
        assert_eq!(p.states().len(), g.states().len());
        // transitions are in bijection with the reachable part of g
        let mut count = 0;
        for (from, e, to) in g.transitions() {
            assert_eq!(
                p.step(&format!("({from},u)"), e).unwrap(),
                Some(format!("({to},u)").as_str())
            );
            count += 1;
        }
        assert_eq!(p.transitions().count(), count);
    }

    #[test]
    fn product_with_restricted_initial_set() {
        // dropping one plant initial state shrinks the initial set of the
        // product but not its reachable part here: the dropped pair stays
        // reachable through the unobservable move out of the kept one
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
        let h = crate::fixtures::supervisor_h().as_plant();
        let full = product(&g, &h).unwrap();
        let part = product(&restricted, &h).unwrap();
        assert_eq!(part.initial().len(), 1);
        assert_eq!(part.states().len(), 10);
        assert_eq!(part.states(), full.states());
    }

    #[test]
    fn product_alphabet_mismatch() {
        let g = fixtures::plant_g();
        let other = Alphabet::new(vec!["a"], vec!["a"], vec!["a"], none()).unwrap();
        let h = Plant::new(vec!["u"], other, Vec::<(&str, &str, &str)>::new(), vec!["u"], none())
            .unwrap();
        assert!(matches!(
            product(&g, &h),
            Err(ModelError::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn bounded_language_examples() {
        let g = fixtures::plant_g();
        let l1 = g.bounded_language("1", 1).unwrap();
        let expect: BTreeSet<Trace> = [vec![], vec!["a"], vec!["b"], vec!["c"]]
            .into_iter()
            .map(|t| t.into_iter().map(str::to_string).collect())
            .collect();
        assert_eq!(l1, expect);

        assert_eq!(
            g.bounded_language("1", 0).unwrap(),
            BTreeSet::from([Vec::new()])
        );

        // exhaustive depth-2 walk from state 2
        let l2 = g.bounded_language("2", 2).unwrap();
        let expect2: BTreeSet<Trace> = [
            vec![],
            vec!["b"],
            vec!["c"],
            vec!["b", "d"],
            vec!["c", "a"],
            vec!["c", "c"],
        ]
        .into_iter()
        .map(|t| t.into_iter().map(str::to_string).collect())
        .collect();
        assert_eq!(l2, expect2);
    }

    #[test]
    fn run_composes() {
        let g = fixtures::plant_g();
        for s in g.bounded_language("1", 3).unwrap() {
            for cut in 0..=s.len() {
                let (front, back) = s.split_at(cut);
                let whole = g.run("1", &s).unwrap().map(str::to_string);
                let staged = match g.run("1", front).unwrap() {
                    Some(mid) => g.run(mid, back).unwrap().map(str::to_string),
                    None => None,
                };
                assert_eq!(whole, staged);
            }
        }
    }
}
