//! Initial-state opacity of the supervised closed loop.
//!
//! The closed loop keeps its initial state private when no observation pins
//! the initial-state estimate inside the secret set. Verification runs a
//! subset construction over the augmented system, interleaving unobservable
//! closure and observable steps under the supervisor's decisions, and
//! reports a shortest violating observation when one exists.

use std::collections::{BTreeSet, VecDeque};

use crate::automata::Plant;
use crate::error::{ModelError, Result};
use crate::estimation::{
    build_augmented, observable_events, observable_reach, unobservable_reach, Observation,
};
use crate::supervision::{SupervisorAutomaton, ZState};

/// Outcome of an opacity check. A witness is present exactly when the
/// verdict is negative; its initial-state estimate is nonempty and
/// contained in the secret set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpacityVerdict {
    pub opaque: bool,
    pub witness: Option<Observation>,
}

/// Decide initial-state opacity of the closed loop with respect to a
/// secret subset of the plant's initial states.
///
/// Empty estimates never count as violations: only observations of the
/// closed loop are examined, and along those the estimate stays nonempty.
pub fn check_initial_state_opacity(
    plant: &Plant,
    sup: &SupervisorAutomaton,
    secret: &BTreeSet<String>,
) -> Result<OpacityVerdict> {
    for s in secret {
        if !plant.initial().contains(s) {
            return Err(ModelError::SecretNotInitial(s.clone()));
        }
    }
    sup.ensure_valid()?;
    if plant.alphabet() != sup.alphabet() {
        return Err(ModelError::AlphabetMismatch(
            "plant and supervisor must share one alphabet".to_string(),
        ));
    }
    let aug = build_augmented(plant);
    let decision = |z: &str| {
        sup.control_decision(&ZState::normal(z))
            .expect("supervisor state exists")
    };

    let z0 = sup.initial().to_string();
    let root = unobservable_reach(aug.base(), aug.base().initial(), &decision(&z0))?;
    let mut visited: BTreeSet<(BTreeSet<String>, String)> = BTreeSet::new();
    let mut queue: VecDeque<(BTreeSet<String>, String, Observation)> = VecDeque::new();
    visited.insert((root.clone(), z0.clone()));
    queue.push_back((root, z0, Vec::new()));

    while let Some((estimate, z, alpha)) = queue.pop_front() {
        let initials = aug.initial_projection(&estimate)?;
        if !initials.is_empty() && initials.is_subset(secret) {
            return Ok(OpacityVerdict {
                opaque: false,
                witness: Some(alpha),
            });
        }
        let gamma = decision(&z);
        for sigma in observable_events(aug.base(), &estimate, &gamma)? {
            let next_z = match sup.step(&z, &sigma)? {
                Some(next) => next.to_string(),
                None => continue,
            };
            let stepped = observable_reach(aug.base(), &estimate, Some(&sigma))?;
            let next = unobservable_reach(aug.base(), &stepped, &decision(&next_z))?;
            if next.is_empty() {
                continue;
            }
            if visited.insert((next.clone(), next_z.clone())) {
                let mut ext = alpha.clone();
                ext.push(sigma.clone());
                queue.push_back((next, next_z, ext));
            }
        }
    }
    Ok(OpacityVerdict {
        opaque: true,
        witness: None,
    })
}
