//! Command-line front end: model validation, estimation, opacity checking,
//! arena construction, attack synthesis and simulation.
//!
//! Exit codes: 0 success (opaque / attackable / valid), 1 input or I/O
//! error, 2 not attackable (`synthesize`), 3 not opaque (`check-opacity`).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use covert_core::aas::build_aas;
use covert_core::attack::simulate_run;
use covert_core::automata::format_set;
use covert_core::classify::simplify;
use covert_core::document::{
    load_model_document, load_plant, load_structure, load_supervisor, save_structure,
    structure_from_aas, structure_from_sas, strategy_from_document, StructureDocument,
};
use covert_core::dot::structure_to_dot;
use covert_core::estimation::{current_state_estimate, initial_state_estimate};
use covert_core::opacity::check_initial_state_opacity;
use covert_core::oracle::{exists_attacker, OracleLimits};
use covert_core::synthesis::{extract_sas, is_attackable, verify_is_detectable};

#[derive(Parser)]
#[command(
    name = "covert",
    about = "Opacity verification and sensor-deception attack synthesis for supervised discrete-event systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelPair {
    /// Plant model file (JSON)
    #[arg(long)]
    plant: PathBuf,
    /// Supervisor model file (JSON)
    #[arg(long)]
    supervisor: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check model invariants; exit 0 only if everything is clean
    Validate {
        /// Plant model file (JSON)
        plant: PathBuf,
        /// Optional supervisor to validate against the plant
        #[arg(long)]
        supervisor: Option<PathBuf>,
    },
    /// Print the current- and initial-state estimates of an observation
    Estimate {
        #[command(flatten)]
        models: ModelPair,
        /// Observation, events separated by commas or spaces
        #[arg(long)]
        obs: String,
    },
    /// Verify initial-state opacity of the closed loop
    CheckOpacity {
        #[command(flatten)]
        models: ModelPair,
    },
    /// Build the full attack arena and write it as a document
    BuildAas {
        #[command(flatten)]
        models: ModelPair,
        /// Output document path
        #[arg(long)]
        out: PathBuf,
        /// Also write a Graphviz rendering
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build and prune the arena to its simplified, labeled form
    Simplify {
        #[command(flatten)]
        models: ModelPair,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Synthesize an attack strategy; exit 2 when none exists
    Synthesize {
        #[command(flatten)]
        models: ModelPair,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Replay an observation against a synthesized strategy
    Simulate {
        #[command(flatten)]
        models: ModelPair,
        /// Single-attack-structure document
        #[arg(long)]
        sas: PathBuf,
        /// Actual observation, events separated by commas or spaces
        #[arg(long)]
        run: String,
    },
    /// Cross-check attackability against the brute-force search
    Oracle {
        #[command(flatten)]
        models: ModelPair,
        /// Observation-length bound; default: environment-state count of
        /// the simplified arena, capped at 6
        #[arg(long)]
        horizon: Option<usize>,
        /// Node guard for the exhaustive search
        #[arg(long, default_value_t = 5_000_000)]
        max_nodes: u64,
    },
    /// Render a structure document as Graphviz input
    ExportDot {
        /// Structure document produced by build-aas, simplify or synthesize
        #[arg(long)]
        input: PathBuf,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_events(text: &str) -> Vec<String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|part| !part.is_empty())
        .map(str::to_string)
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write '{}': {e}", path.display()))
}

struct Loaded {
    plant: covert_core::automata::Plant,
    sup: covert_core::supervision::SupervisorAutomaton,
    secret: BTreeSet<String>,
}

fn load_pair(models: &ModelPair) -> Result<Loaded, String> {
    let plant = load_plant(&models.plant).map_err(|e| e.to_string())?;
    let sup = load_supervisor(&models.supervisor, Some(&plant)).map_err(|e| e.to_string())?;
    let secret = plant.secret_initial().clone();
    Ok(Loaded { plant, sup, secret })
}

fn format_observation(events: &[String]) -> String {
    if events.is_empty() {
        "\u{03b5}".to_string()
    } else {
        events.join(" ")
    }
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { plant, supervisor } => {
            let mut clean = true;
            match load_plant(&plant) {
                Ok(loaded) => {
                    println!("plant: ok ({} states)", loaded.states().len());
                    if let Some(sup_path) = supervisor {
                        match load_supervisor(&sup_path, Some(&loaded)) {
                            Ok(sup) => {
                                println!("supervisor: ok ({} states)", sup.states().len());
                            }
                            Err(e) => {
                                println!("supervisor: {e}");
                                clean = false;
                            }
                        }
                    }
                }
                Err(e) => {
                    println!("plant: {e}");
                    clean = false;
                    if let Some(sup_path) = supervisor {
                        match load_model_document(&sup_path)
                            .and_then(|doc| doc.to_supervisor(None))
                        {
                            Ok(sup) => {
                                println!("supervisor: ok ({} states)", sup.states().len());
                            }
                            Err(e) => println!("supervisor: {e}"),
                        }
                    }
                }
            }
            Ok(if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Estimate { models, obs } => {
            let loaded = load_pair(&models)?;
            let alpha = parse_events(&obs);
            let current = current_state_estimate(&loaded.plant, &loaded.sup, &alpha)
                .map_err(|e| e.to_string())?;
            let initial = initial_state_estimate(&loaded.plant, &loaded.sup, &alpha)
                .map_err(|e| e.to_string())?;
            println!("current: {}", format_set(&current));
            println!("initial: {}", format_set(&initial));
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckOpacity { models } => {
            let loaded = load_pair(&models)?;
            let verdict =
                check_initial_state_opacity(&loaded.plant, &loaded.sup, &loaded.secret)
                    .map_err(|e| e.to_string())?;
            if verdict.opaque {
                println!("opaque");
                Ok(ExitCode::SUCCESS)
            } else {
                let witness = verdict.witness.expect("witness accompanies a violation");
                let estimate = initial_state_estimate(&loaded.plant, &loaded.sup, &witness)
                    .map_err(|e| e.to_string())?;
                println!("not opaque");
                println!("witness: {}", format_observation(&witness));
                println!("estimate: {}", format_set(&estimate));
                Ok(ExitCode::from(3))
            }
        }
        Command::BuildAas { models, out, dot } => {
            let loaded = load_pair(&models)?;
            let aas = build_aas(&loaded.plant, &loaded.sup).map_err(|e| e.to_string())?;
            let doc = structure_from_aas(&aas);
            save_structure(&out, &doc).map_err(|e| e.to_string())?;
            if let Some(dot_path) = dot {
                write_text(&dot_path, &structure_to_dot(&doc))?;
            }
            println!(
                "aas: {} environment states, {} attack states",
                aas.env_states().len(),
                aas.attack_states().len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Simplify { models, out, dot } => {
            let loaded = load_pair(&models)?;
            let aas = build_aas(&loaded.plant, &loaded.sup).map_err(|e| e.to_string())?;
            let saas = simplify(&aas, &loaded.secret).map_err(|e| e.to_string())?;
            let doc = structure_from_aas(&saas);
            save_structure(&out, &doc).map_err(|e| e.to_string())?;
            if let Some(dot_path) = dot {
                write_text(&dot_path, &structure_to_dot(&doc))?;
            }
            let labels = saas.labels().expect("simplification attaches labels");
            let count = |class: covert_core::classify::DetectionClass| {
                labels.iter().filter(|l| l.class == class).count()
            };
            println!(
                "saas: {} environment states, {} attack states",
                saas.env_states().len(),
                saas.attack_states().len()
            );
            println!(
                "labels: {} positive, {} negative, {} undetectable, {} neutral",
                count(covert_core::classify::DetectionClass::PositiveDetected),
                count(covert_core::classify::DetectionClass::NegativeDetected),
                count(covert_core::classify::DetectionClass::Undetectable),
                count(covert_core::classify::DetectionClass::Neutral),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Synthesize { models, out, dot } => {
            let loaded = load_pair(&models)?;
            let aas = build_aas(&loaded.plant, &loaded.sup).map_err(|e| e.to_string())?;
            let saas = simplify(&aas, &loaded.secret).map_err(|e| e.to_string())?;
            match extract_sas(&saas, &loaded.secret).map_err(|e| e.to_string())? {
                None => {
                    println!("not attackable");
                    Ok(ExitCode::from(2))
                }
                Some(sas) => {
                    let doc = structure_from_sas(&sas);
                    save_structure(&out, &doc).map_err(|e| e.to_string())?;
                    if let Some(dot_path) = dot {
                        write_text(&dot_path, &structure_to_dot(&doc))?;
                    }
                    let strategy = sas.induced_strategy();
                    let witness = verify_is_detectable(
                        &loaded.plant,
                        &loaded.sup,
                        &strategy,
                        &loaded.secret,
                        saas.env_states().len().max(1),
                    )
                    .map_err(|e| e.to_string())?;
                    println!("attackable");
                    println!(
                        "sas: {} environment states, {} attack states",
                        sas.env_nodes().len(),
                        sas.attack_nodes().len()
                    );
                    match witness {
                        Some(w) => println!("witness: {}", format_observation(&w)),
                        None => println!("witness: none within horizon"),
                    }
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Simulate { models, sas, run } => {
            let loaded = load_pair(&models)?;
            let doc = load_structure(&sas).map_err(|e| e.to_string())?;
            let strategy = strategy_from_document(&doc).map_err(|e| e.to_string())?;
            let observation = parse_events(&run);
            let record = simulate_run(
                &loaded.plant,
                &loaded.sup,
                &strategy,
                &observation,
                &loaded.secret,
            )
            .map_err(|e| e.to_string())?;
            for (idx, step) in record.steps.iter().enumerate() {
                println!(
                    "step {}: event={} action={} actual={} doctored={} supervisor estimate={} attacker initial estimate={} stealthy={}",
                    idx + 1,
                    step.event,
                    step.action,
                    format_observation(&step.actual),
                    format_observation(&step.doctored),
                    format_set(&step.supervisor_estimate),
                    format_set(&step.attacker_initial_estimate),
                    step.stealthy,
                );
            }
            println!(
                "verdict: {}; {}",
                if record.stealthy {
                    "attack undetected"
                } else {
                    "attack detected by supervisor"
                },
                if record.secret_revealed {
                    "secret initial state revealed"
                } else {
                    "secret initial state not revealed"
                }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            models,
            horizon,
            max_nodes,
        } => {
            let loaded = load_pair(&models)?;
            let aas = build_aas(&loaded.plant, &loaded.sup).map_err(|e| e.to_string())?;
            let saas = simplify(&aas, &loaded.secret).map_err(|e| e.to_string())?;
            let structural = is_attackable(&saas, &loaded.secret).map_err(|e| e.to_string())?;
            let horizon = horizon.unwrap_or_else(|| saas.env_states().len().clamp(1, 6));
            let found = exists_attacker(
                &loaded.plant,
                &loaded.sup,
                &loaded.secret,
                horizon,
                OracleLimits { max_nodes },
            )
            .map_err(|e| e.to_string())?;
            println!("horizon: {horizon}");
            match &found {
                Some((_, witness)) => {
                    println!("oracle: attackable (witness: {})", format_observation(witness));
                }
                None => println!("oracle: not attackable"),
            }
            println!(
                "structure: {}",
                if structural {
                    "attackable"
                } else {
                    "not attackable"
                }
            );
            println!("agreement: {}", found.is_some() == structural);
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportDot { input, out } => {
            let doc: StructureDocument = load_structure(&input).map_err(|e| e.to_string())?;
            let dot = structure_to_dot(&doc);
            match out {
                Some(path) => write_text(&path, &dot)?,
                None => print!("{dot}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
