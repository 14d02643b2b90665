//! File formats: structured-text (JSON) documents for models and attack
//! structures, with full validation on load.
//!
//! One model schema serves plants and supervisors. A plant declares
//! `secret_initial` and vulnerability flags; a supervisor must not declare
//! secrets, has exactly one initial state, and may omit `vulnerable`
//! flags, inheriting them from the plant it is paired with.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aas::AasGraph;
use crate::attack::AttackAction;
use crate::automata::{Alphabet, Plant};
use crate::classify::StateLabel;
use crate::error::ModelError;
use crate::supervision::{SupervisorAutomaton, ATTACK_STATE_ID};
use crate::synthesis::{InducedStrategy, Sas};

/// Errors raised by loading or saving documents.
#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("cannot read '{path}': {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot write '{path}': {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot parse '{path}': {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },

    #[error("invalid document: {0}")]
    Model(#[from] ModelError),

    #[error("invalid document: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, DocumentError>;

/// Declaration of one event with its attribute flags.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EventDecl {
    pub name: String,
    #[serde(default)]
    pub observable: bool,
    #[serde(default)]
    pub controllable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vulnerable: Option<bool>,
}

/// Declaration of one transition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TransitionDecl {
    pub from: String,
    pub event: String,
    pub to: String,
}

/// The shared on-disk schema for plants and supervisors.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelDocument {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret_initial: Option<Vec<String>>,
    pub events: Vec<EventDecl>,
    pub transitions: Vec<TransitionDecl>,
}

impl ModelDocument {
    fn alphabet(&self) -> std::result::Result<Alphabet, ModelError> {
        Alphabet::new(
            self.events.iter().map(|e| e.name.clone()),
            self.events
                .iter()
                .filter(|e| e.observable)
                .map(|e| e.name.clone()),
            self.events
                .iter()
                .filter(|e| e.controllable)
                .map(|e| e.name.clone()),
            self.events
                .iter()
                .filter(|e| e.vulnerable.unwrap_or(false))
                .map(|e| e.name.clone()),
        )
    }

    /// Interpret the document as a plant.
    pub fn to_plant(&self) -> Result<Plant> {
        let alphabet = self.alphabet()?;
        Ok(Plant::new(
            self.states.clone(),
            alphabet,
            self.transitions
                .iter()
                .map(|t| (t.from.clone(), t.event.clone(), t.to.clone())),
            self.initial.clone(),
            self.secret_initial.clone().unwrap_or_default(),
        )?)
    }

    /// Interpret the document as a supervisor, enforcing the realization
    /// conditions. When a plant is given, the supervisor inherits its
    /// alphabet; flags present in both documents must agree.
    pub fn to_supervisor(&self, plant: Option<&Plant>) -> Result<SupervisorAutomaton> {
        if self.secret_initial.is_some() {
            return Err(DocumentError::Invalid(
                "supervisor documents must not declare secret_initial".to_string(),
            ));
        }
        if self.initial.len() != 1 {
            return Err(DocumentError::Invalid(format!(
                "supervisor documents need exactly one initial state, found {}",
                self.initial.len()
            )));
        }
        if self.states.iter().any(|s| s == ATTACK_STATE_ID) {
            return Err(DocumentError::Model(ModelError::ReservedState(
                ATTACK_STATE_ID.to_string(),
            )));
        }
        let alphabet = match plant {
            None => self.alphabet()?,
            Some(plant) => {
                let own = self.alphabet()?;
                let reference = plant.alphabet();
                if own.events() != reference.events()
                    || own.observable() != reference.observable()
                    || own.controllable() != reference.controllable()
                {
                    return Err(DocumentError::Model(ModelError::AlphabetMismatch(
                        "supervisor event declarations disagree with the plant".to_string(),
                    )));
                }
                let declared_vulnerable = self.events.iter().any(|e| e.vulnerable.is_some());
                if declared_vulnerable && own.vulnerable() != reference.vulnerable() {
                    return Err(DocumentError::Model(ModelError::AlphabetMismatch(
                        "supervisor vulnerability flags disagree with the plant".to_string(),
                    )));
                }
                reference.clone()
            }
        };
        let sup = SupervisorAutomaton::new(
            self.states.clone(),
            alphabet,
            self.transitions
                .iter()
                .map(|t| (t.from.clone(), t.event.clone(), t.to.clone())),
            self.initial[0].clone(),
        )?;
        sup.ensure_valid()?;
        Ok(sup)
    }

    pub fn from_plant(plant: &Plant) -> Self {
        let ab = plant.alphabet();
        ModelDocument {
            states: plant.states().iter().cloned().collect(),
            initial: plant.initial().iter().cloned().collect(),
            secret_initial: Some(plant.secret_initial().iter().cloned().collect()),
            events: ab
                .events()
                .iter()
                .map(|e| EventDecl {
                    name: e.clone(),
                    observable: ab.is_observable(e),
                    controllable: ab.controllable().contains(e),
                    vulnerable: Some(ab.is_vulnerable(e)),
                })
                .collect(),
            transitions: plant
                .transitions()
                .map(|(from, event, to)| TransitionDecl {
                    from: from.to_string(),
                    event: event.to_string(),
                    to: to.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_supervisor(sup: &SupervisorAutomaton) -> Self {
        let ab = sup.alphabet();
        ModelDocument {
            states: sup.states().iter().cloned().collect(),
            initial: vec![sup.initial().to_string()],
            secret_initial: None,
            events: ab
                .events()
                .iter()
                .map(|e| EventDecl {
                    name: e.clone(),
                    observable: ab.is_observable(e),
                    controllable: ab.controllable().contains(e),
                    vulnerable: None,
                })
                .collect(),
            transitions: sup
                .transitions()
                .map(|(from, event, to)| TransitionDecl {
                    from: from.to_string(),
                    event: event.to_string(),
                    to: to.to_string(),
                })
                .collect(),
        }
    }
}

/// One node of a serialized attack structure.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeDecl {
    pub id: String,
    pub kind: String,
    pub supervisor_estimate: Vec<String>,
    pub attacker_estimate: Vec<(String, String)>,
    pub z: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack_revealing: Option<bool>,
}

/// One labeled edge of a serialized attack structure.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeDecl {
    pub from: String,
    pub label: String,
    pub to: String,
}

/// On-disk schema shared by full arenas, simplified arenas and single
/// attack structures; the `choice` map is present for the latter.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StructureDocument {
    pub kind: String,
    pub initial: String,
    pub nodes: Vec<NodeDecl>,
    pub edges: Vec<EdgeDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub choice: BTreeMap<String, String>,
}

fn env_node_decl(aas: &AasGraph, idx: usize, label: Option<&StateLabel>) -> NodeDecl {
    let node = &aas.env_states()[idx];
    let pairs = aas
        .augmented()
        .pairs(&node.attacker_estimate)
        .expect("estimates reference augmented states");
    NodeDecl {
        id: format!("e{idx}"),
        kind: "environment".to_string(),
        supervisor_estimate: node.supervisor_estimate.iter().cloned().collect(),
        attacker_estimate: pairs.into_iter().collect(),
        z: node.z.to_string(),
        event: None,
        label: label.map(|l| l.class.to_string()),
        attack_revealing: label.map(|l| l.attack_revealing),
    }
}

fn attack_node_decl(aas: &AasGraph, idx: usize) -> NodeDecl {
    let node = &aas.attack_states()[idx];
    let pairs = aas
        .augmented()
        .pairs(&node.attacker_estimate)
        .expect("estimates reference augmented states");
    NodeDecl {
        id: format!("a{idx}"),
        kind: "attack".to_string(),
        supervisor_estimate: node.supervisor_estimate.iter().cloned().collect(),
        attacker_estimate: pairs.into_iter().collect(),
        z: node.z.clone(),
        event: Some(node.pending.clone()),
        label: None,
        attack_revealing: None,
    }
}

/// Serialize an arena (labels included when present).
pub fn structure_from_aas(aas: &AasGraph) -> StructureDocument {
    let labels = aas.labels();
    let mut nodes = Vec::new();
    for idx in 0..aas.env_states().len() {
        nodes.push(env_node_decl(aas, idx, labels.map(|l| &l[idx])));
    }
    for idx in 0..aas.attack_states().len() {
        nodes.push(attack_node_decl(aas, idx));
    }
    let mut edges = Vec::new();
    for idx in 0..aas.env_states().len() {
        for (sigma, attack) in aas.env_successors(idx) {
            edges.push(EdgeDecl {
                from: format!("e{idx}"),
                label: sigma.clone(),
                to: format!("a{attack}"),
            });
        }
    }
    for idx in 0..aas.attack_states().len() {
        for (action, env) in aas.attack_successors(idx) {
            edges.push(EdgeDecl {
                from: format!("a{idx}"),
                label: action.to_string(),
                to: format!("e{env}"),
            });
        }
    }
    StructureDocument {
        kind: if labels.is_some() { "saas" } else { "aas" }.to_string(),
        initial: format!("e{}", aas.initial()),
        nodes,
        edges,
        choice: BTreeMap::new(),
    }
}

/// Serialize a single attack structure: the surviving nodes and edges of
/// its arena plus the pinned choices.
pub fn structure_from_sas(sas: &Sas) -> StructureDocument {
    let aas = sas.saas();
    let labels = aas.labels();
    let mut nodes = Vec::new();
    for &idx in sas.env_nodes() {
        nodes.push(env_node_decl(aas, idx, labels.map(|l| &l[idx])));
    }
    for &idx in sas.attack_nodes() {
        nodes.push(attack_node_decl(aas, idx));
    }
    let mut edges = Vec::new();
    for &idx in sas.env_nodes() {
        for (sigma, attack) in aas.env_successors(idx) {
            edges.push(EdgeDecl {
                from: format!("e{idx}"),
                label: sigma.clone(),
                to: format!("a{attack}"),
            });
        }
    }
    for (&idx, action) in sas.choice() {
        let env = aas.attack_successors(idx)[action];
        edges.push(EdgeDecl {
            from: format!("a{idx}"),
            label: action.to_string(),
            to: format!("e{env}"),
        });
    }
    StructureDocument {
        kind: "sas".to_string(),
        initial: format!("e{}", aas.initial()),
        nodes,
        edges,
        choice: sas
            .choice()
            .iter()
            .map(|(idx, action)| (format!("a{idx}"), action.to_string()))
            .collect(),
    }
}

/// Reconstruct the executable strategy encoded by a structure document
/// with a choice map.
pub fn strategy_from_document(doc: &StructureDocument) -> Result<InducedStrategy> {
    let mut kinds: BTreeMap<&str, &str> = BTreeMap::new();
    for node in &doc.nodes {
        if kinds.insert(&node.id, &node.kind).is_some() {
            return Err(DocumentError::Invalid(format!(
                "duplicate node id '{}'",
                node.id
            )));
        }
    }
    let check = |id: &str, want: &str| -> Result<()> {
        match kinds.get(id) {
            Some(kind) if *kind == want => Ok(()),
            Some(kind) => Err(DocumentError::Invalid(format!(
                "node '{id}' is a {kind} node, expected {want}"
            ))),
            None => Err(DocumentError::Invalid(format!("unknown node '{id}'"))),
        }
    };
    check(&doc.initial, "environment")?;
    let mut env_moves: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut attack_targets: BTreeMap<String, BTreeMap<AttackAction, String>> = BTreeMap::new();
    for edge in &doc.edges {
        match kinds.get(edge.from.as_str()) {
            Some(&"environment") => {
                check(&edge.to, "attack")?;
                let row = env_moves.entry(edge.from.clone()).or_default();
                if row.insert(edge.label.clone(), edge.to.clone()).is_some() {
                    return Err(DocumentError::Invalid(format!(
                        "nondeterministic edge from '{}' on '{}'",
                        edge.from, edge.label
                    )));
                }
            }
            Some(&"attack") => {
                check(&edge.to, "environment")?;
                let action: AttackAction = edge.label.parse()?;
                let row = attack_targets.entry(edge.from.clone()).or_default();
                if row.insert(action, edge.to.clone()).is_some() {
                    return Err(DocumentError::Invalid(format!(
                        "nondeterministic edge from '{}' on '{}'",
                        edge.from, edge.label
                    )));
                }
            }
            _ => {
                return Err(DocumentError::Invalid(format!(
                    "edge from unknown node '{}'",
                    edge.from
                )))
            }
        }
    }
    let mut attack_moves: BTreeMap<String, (AttackAction, String)> = BTreeMap::new();
    for (id, action_text) in &doc.choice {
        check(id, "attack")?;
        let action: AttackAction = action_text.parse()?;
        let target = attack_targets
            .get(id)
            .and_then(|row| row.get(&action))
            .ok_or_else(|| {
                DocumentError::Invalid(format!(
                    "choice at '{id}' names action '{action_text}' with no matching edge"
                ))
            })?;
        attack_moves.insert(id.clone(), (action, target.clone()));
    }
    for id in attack_targets.keys() {
        if !doc.choice.contains_key(id) {
            return Err(DocumentError::Invalid(format!(
                "attack node '{id}' has edges but no pinned choice"
            )));
        }
    }
    Ok(InducedStrategy::new(
        doc.initial.clone(),
        env_moves,
        attack_moves,
    ))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| DocumentError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| DocumentError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serialization cannot fail");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| DocumentError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model_document(path: &Path) -> Result<ModelDocument> {
    parse_json(path, &read_text(path)?)
}

pub fn load_plant(path: &Path) -> Result<Plant> {
    load_model_document(path)?.to_plant()
}

pub fn load_supervisor(path: &Path, plant: Option<&Plant>) -> Result<SupervisorAutomaton> {
    load_model_document(path)?.to_supervisor(plant)
}

pub fn save_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    write_json(path, doc)
}

pub fn load_structure(path: &Path) -> Result<StructureDocument> {
    parse_json(path, &read_text(path)?)
}

pub fn save_structure(path: &Path, doc: &StructureDocument) -> Result<()> {
    write_json(path, doc)
}
