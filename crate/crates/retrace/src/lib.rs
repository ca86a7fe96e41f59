//! Reproduce a mobile app crash from nothing but its stack trace.
//!
//! Given a crash stack trace and a model of an app's GUI, `retrace` searches for a
//! minimal interaction sequence that re-triggers the crash. The trace yields two
//! clues — the crash-occurring page and the crash-involved APIs — and three scorers
//! turn them into per-widget priorities on every page:
//!
//! * **page reaching** ([`predictor`]): a pluggable next-page / next-widget predictor
//!   (offline heuristic or remote completion service) ranks widgets likely to lead
//!   toward the crash page, scored `1/(rank+2)`;
//! * **widget hitting** ([`score`]): token overlap between widget names and the
//!   crash-involved APIs finds the crash-triggering widget;
//! * **exploration optimization** ([`explore`]): tabular Q-learning over the observed
//!   page graph rewards crash-related progress and penalizes revisits and dead ends.
//!
//! Selection is ε-greedy over the summed scores, with an escape mode that raises ε
//! when exploration cycles. Everything runs against a deterministic in-process app
//! simulator ([`sim`]), so whole-corpus experiments are reproducible bit for bit.
//! After a successful run the interaction cache is minimized and emitted as a replay
//! script plus human-readable steps ([`replay`]).
//!
//! The `retrace` binary exposes the pipeline as `parse`, `reproduce`, `replay`, and
//! `bench` subcommands; the crate's `examples/` directory demonstrates each major
//! capability in isolation.

pub mod cli;
pub mod corpus;
pub mod explore;
pub mod predictor;
pub mod replay;
pub mod score;
pub mod sim;
pub mod token;
pub mod trace;

pub use explore::{
    detect_stuck, reproduce, Budget, EngineKind, ExplorationMemory, QTable, ReproduceOptions,
    ReproductionResult, RewardConfig, SelectorConfig, StateKey,
};
pub use predictor::{
    render_prompt_p1, render_prompt_p2, Predictor, PromptContext, RankedWidgets, RemoteConfig,
};
pub use replay::{emit_script, emit_steps, minimize, parse_script, ReproductionTrace};
pub use score::{combine, page_reach_scores, widget_hit_score, AblationMode, ScoredWidget};
pub use sim::{start_session, AppModel, Session, SessionEvent};
pub use token::{tokenize, TokenList};
pub use trace::{parse_trace, signature_matches, AppMetadata, CrashSignature, RawTrace};
