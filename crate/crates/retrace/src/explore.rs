//! The exploration loop: states, Q-table, rewards, ε-greedy selection, restarts,
//! and target-crash detection.
//!
//! Exploration is a Markov decision process. Each observed page is a state (activity
//! name, page type, and a fingerprint of its interactable widget names); interactions
//! with widgets are the actions. Every performed action is rewarded — large positive
//! for touching crash-related elements, small positive for new pages, small negative
//! for known pages, large negative for leaving the app or crashing somewhere else —
//! and the widget's Q-value is updated with the one-step Bellman rule. Selection sums
//! the three scorer components and follows an ε-greedy policy whose ε jumps from a
//! small focused value to a large escape value when the recent window shows no
//! progress.
//!
//! Actions that left the app or triggered a non-target crash are never chosen again
//! within a run. The interaction cache records everything since the last launch and
//! becomes the reproduction trace when the target crash fires.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::predictor::{Predictor, PromptContext};
use crate::replay::{ReproductionTrace, StepResult, TraceStep};
use crate::score::{combine, page_reach_scores, widget_hit_score, AblationMode, ScoredWidget};
use crate::sim::{
    start_session, Action, AppModel, PageId, PageType, SessionEventKind, SimError, WidgetId,
    WidgetSpec,
};
use crate::token::{tokenize, TokenList};
use crate::trace::{parse_trace, signature_matches, CrashSignature, RawTrace};

/// State identity: two observations are the same state iff activity, page type, and
/// the (order-insensitive) set of interactable widget names all agree. The
/// fingerprint keeps menu or dialog overlays over one activity distinct from the
/// underlying page.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StateKey {
    pub activity_name: String,
    pub page_kind: PageType,
    pub widget_fingerprint: u64,
}

impl StateKey {
    pub fn of(page: &crate::sim::PageSpec, interactables: &[WidgetSpec]) -> Self {
        let mut names: Vec<String> = interactables.iter().map(|w| w.display_name()).collect();
        names.sort();
        let mut h = DefaultHasher::new();
        for n in &names {
            n.hash(&mut h);
        }
        StateKey {
            activity_name: page.activity_name.clone(),
            page_kind: page.kind,
            widget_fingerprint: h.finish(),
        }
    }

    pub fn short(&self) -> String {
        format!(
            "{}/{}#{:04x}",
            self.activity_name,
            self.page_kind,
            self.widget_fingerprint & 0xffff
        )
    }
}

/// One action within a state: a widget plus the interaction kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ActionId {
    pub widget: WidgetId,
    pub action: Action,
}

/// Tabular state-action values. Absent entries read as zero; every widget of a newly
/// reached page is registered at zero.
#[derive(Debug, Clone)]
pub struct QTable {
    values: HashMap<StateKey, HashMap<ActionId, f64>>,
    pub learning_rate: f64,
    pub discount: f64,
}

impl Default for QTable {
    fn default() -> Self {
        QTable {
            values: HashMap::new(),
            learning_rate: 0.1,
            discount: 0.9,
        }
    }
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, state: &StateKey, action: &ActionId) -> f64 {
        self.values
            .get(state)
            .and_then(|m| m.get(action))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn has_state(&self, state: &StateKey) -> bool {
        self.values.contains_key(state)
    }

    pub fn register_state<I: IntoIterator<Item = ActionId>>(&mut self, state: &StateKey, actions: I) {
        let m = self.values.entry(state.clone()).or_default();
        for a in actions {
            m.entry(a).or_insert(0.0);
        }
    }

    /// Highest value among the state's registered actions; zero for unknown states.
    pub fn max_value(&self, state: &StateKey) -> f64 {
        self.values
            .get(state)
            .and_then(|m| m.values().copied().fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            }))
            .unwrap_or(0.0)
    }

    /// One Bellman update:
    /// `Q(s,a) ← Q(s,a) + α (r + γ · max_a' Q(s',a') − Q(s,a))`.
    /// Terminal follow-ups (crash, left app) pass `None` and contribute zero.
    pub fn update(
        &mut self,
        state: &StateKey,
        action: &ActionId,
        reward: f64,
        next_state: Option<&StateKey>,
    ) -> f64 {
        let max_next = next_state.map(|s| self.max_value(s)).unwrap_or(0.0);
        let current = self.get(state, action);
        let updated = current + self.learning_rate * (reward + self.discount * max_next - current);
        self.values
            .entry(state.clone())
            .or_default()
            .insert(action.clone(), updated);
        updated
    }

    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.values().flat_map(|m| m.values().copied())
    }

    pub fn state_count(&self) -> usize {
        self.values.len()
    }
}

/// Reward magnitudes. The shape is fixed: crash-related ≫ new page > 0 > known page ≫
/// failure.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RewardConfig {
    pub crash_related: f64,
    pub new_state: f64,
    pub duplicate_state: f64,
    pub failure_state: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            crash_related: 10.0,
            new_state: 1.0,
            duplicate_state: -1.0,
            failure_state: -10.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), ExploreError> {
        if self.crash_related > self.new_state
            && self.new_state > 0.0
            && 0.0 > self.duplicate_state
            && self.duplicate_state > self.failure_state
        {
            Ok(())
        } else {
            Err(ExploreError::BadConfig(
                "rewards must satisfy crash_related > new_state > 0 > duplicate_state > failure_state"
                    .into(),
            ))
        }
    }

    pub fn value(&self, class: RewardClass) -> f64 {
        match class {
            RewardClass::CrashRelated => self.crash_related,
            RewardClass::NewState => self.new_state,
            RewardClass::DuplicateState => self.duplicate_state,
            RewardClass::FailureState => self.failure_state,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardClass {
    CrashRelated,
    NewState,
    DuplicateState,
    FailureState,
}

/// ε-greedy settings. Focused ε stays near zero; stuck detection switches to the
/// escape ε for a few actions to break cycles.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelectorConfig {
    pub epsilon_focused: f64,
    pub epsilon_escape: f64,
    pub stuck_window: usize,
    pub escape_duration: usize,
    pub rng_seed: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            epsilon_focused: 0.05,
            epsilon_escape: 0.9,
            stuck_window: 12,
            escape_duration: 6,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMode {
    Focused,
    Escape,
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("no selectable candidates: every action here has been ruled out")]
    NoCandidates,
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Per-action outcome flags feeding stuck detection.
#[derive(Debug, Clone, Copy)]
struct ProgressFlags {
    new_state: bool,
    crash_related: bool,
}

/// Run-level exploration bookkeeping: visited states, the observed transition
/// relation, the per-launch interaction cache, and the recent-progress window.
#[derive(Default)]
pub struct ExplorationMemory {
    pub visited_states: HashSet<StateKey>,
    pub transition_log: Vec<(StateKey, ActionId, Option<StateKey>)>,
    pub interaction_cache: Vec<TraceStep>,
    pub action_counter: u64,
    excluded: HashSet<(StateKey, ActionId)>,
    recent: VecDeque<ProgressFlags>,
}

impl ExplorationMemory {
    /// The app restarted: the cache is gone, everything learned stays.
    pub fn clear_cache(&mut self) {
        self.interaction_cache.clear();
    }

    pub fn exclude(&mut self, state: &StateKey, action: &ActionId) {
        self.excluded.insert((state.clone(), action.clone()));
    }

    pub fn is_excluded(&self, state: &StateKey, action: &ActionId) -> bool {
        self.excluded.contains(&(state.clone(), action.clone()))
    }

    fn push_progress(&mut self, flags: ProgressFlags) {
        self.recent.push_back(flags);
        if self.recent.len() > 256 {
            self.recent.pop_front();
        }
    }
}

/// True when the last `stuck_window` actions produced no new state and no
/// crash-related reward. Only the tail of the history matters, so retaining more
/// history never changes the verdict.
pub fn detect_stuck(memory: &ExplorationMemory, cfg: &SelectorConfig) -> bool {
    if memory.recent.len() < cfg.stuck_window {
        return false;
    }
    memory
        .recent
        .iter()
        .rev()
        .take(cfg.stuck_window)
        .all(|f| !f.new_state && !f.crash_related)
}

/// ε-greedy pick over scored candidates (already filtered of excluded actions).
///
/// With probability 1−ε the total-score argmax wins (ties go to the lowest on-page
/// ordinal); with probability ε a uniformly random non-argmax candidate wins. A
/// single candidate is always taken. Returns an index into `scored`.
pub fn select_widget(
    scored: &[ScoredWidget],
    cfg: &SelectorConfig,
    mode: SelectMode,
    rng: &mut ChaCha8Rng,
) -> Result<usize, ExploreError> {
    if scored.is_empty() {
        return Err(ExploreError::NoCandidates);
    }
    let epsilon = match mode {
        SelectMode::Focused => cfg.epsilon_focused,
        SelectMode::Escape => cfg.epsilon_escape,
    };
    let argmax = scored
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            a.total
                .partial_cmp(&b.total)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.ordinal.cmp(&a.ordinal))
        })
        .map(|(i, _)| i)
        .expect("non-empty");
    if scored.len() == 1 {
        return Ok(0);
    }
    if rng.random::<f64>() < epsilon {
        let others: Vec<usize> = (0..scored.len()).filter(|&i| i != argmax).collect();
        Ok(others[rng.random_range(0..others.len())])
    } else {
        Ok(argmax)
    }
}

/// Which engine drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    /// Three-scorer guided exploration.
    Guided,
    /// Uniformly random selection with the same restart and budget rules.
    Random,
}

impl EngineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EngineKind::Guided => "guided",
            EngineKind::Random => "random",
        }
    }
}

/// Stop conditions: whichever of wall clock and action count trips first.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Budget {
    pub max_actions: u64,
    pub budget_seconds: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_actions: 500,
            budget_seconds: 3600.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReproduceOptions {
    pub engine: EngineKind,
    pub ablation: AblationMode,
    pub selector: SelectorConfig,
    pub rewards: RewardConfig,
    pub budget: Budget,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            engine: EngineKind::Guided,
            ablation: AblationMode::None,
            selector: SelectorConfig::default(),
            rewards: RewardConfig::default(),
            budget: Budget::default(),
        }
    }
}

/// What one reproduction attempt produced.
pub struct ReproductionResult {
    pub success: bool,
    pub trace: Option<ReproductionTrace>,
    pub observed: Option<CrashSignature>,
    pub actions: u64,
    pub restarts: u64,
    pub unique_states: usize,
    pub wall_clock: Duration,
    pub failure_reason: Option<String>,
    pub action_log: Vec<String>,
}

fn stem_set(tokens: &TokenList) -> BTreeSet<String> {
    tokens.stemmed().into_iter().collect()
}

/// Does this activity name the crash-occurring page? Stemmed token sets must be
/// equal, so `InstalledSearchEnginesSettingsFragment` matches the page named
/// `installed search engines settings`.
pub fn state_matches_crash_page(activity_name: &str, target: &CrashSignature) -> bool {
    let Some(page) = &target.crash_page else {
        return false;
    };
    let a = stem_set(&tokenize(activity_name));
    let b = stem_set(&page.tokens);
    !a.is_empty() && a == b
}

/// Does any invoked API name one of the crash-involved APIs? The fixture may declare
/// either the full `Class.method` or just the method, so containment in either
/// direction counts.
pub fn apis_intersect(invoked: &[String], crash_apis: &[TokenList]) -> bool {
    invoked.iter().any(|api| {
        let a: BTreeSet<String> = tokenize(api).stemmed().into_iter().collect();
        if a.is_empty() {
            return false;
        }
        crash_apis.iter().any(|c| {
            let b = stem_set(c);
            !b.is_empty() && (a.is_subset(&b) || b.is_subset(&a))
        })
    })
}

/// Facts about one performed action, for reward classification.
pub struct ActionOutcome<'a> {
    pub kind: SessionEventKind,
    pub invoked_apis: &'a [String],
    /// State reached when still in the app.
    pub next_state: Option<&'a StateKey>,
    /// Activity name of the reached page, when still in the app.
    pub next_activity: Option<&'a str>,
    /// True when the action actually moved to a different page; staying put through
    /// a no-op never counts as reaching a page.
    pub page_arrived: bool,
    /// Whether a crash matched the target signature.
    pub crash_matched: bool,
}

/// Classifies an action per the reward taxonomy; crash-related dominates.
pub fn classify_reward(
    outcome: &ActionOutcome<'_>,
    target: &CrashSignature,
    visited: &HashSet<StateKey>,
) -> RewardClass {
    let crash_related = (outcome.page_arrived
        && outcome
            .next_activity
            .is_some_and(|a| state_matches_crash_page(a, target)))
        || apis_intersect(outcome.invoked_apis, &target.crash_apis)
        || (outcome.kind == SessionEventKind::Crashed && outcome.crash_matched);
    if crash_related {
        return RewardClass::CrashRelated;
    }
    match outcome.kind {
        SessionEventKind::LeftApp | SessionEventKind::Crashed => RewardClass::FailureState,
        SessionEventKind::PageChanged | SessionEventKind::NoChange => {
            match outcome.next_state {
                Some(s) if !visited.contains(s) => RewardClass::NewState,
                _ => RewardClass::DuplicateState,
            }
        }
    }
}

/// Reward value for one performed action.
pub fn reward_for(
    outcome: &ActionOutcome<'_>,
    target: &CrashSignature,
    memory: &ExplorationMemory,
    cfg: &RewardConfig,
) -> f64 {
    cfg.value(classify_reward(outcome, target, &memory.visited_states))
}

/// Static facts about one page, computed once per run.
struct PageInfo {
    state: StateKey,
    interactables: Vec<WidgetSpec>,
    /// (widget, action, display name, widget-hit score), in candidate order.
    candidates: Vec<(WidgetId, Action, String, f64)>,
    /// Page-reach scores, filled on first visit when the predictor runs.
    reach: Option<HashMap<WidgetId, f64>>,
}

/// Runs the full exploration loop against a simulated app until the target crash is
/// triggered or the budget runs out. Deterministic given (app, options, seed).
pub fn reproduce(
    app: &AppModel,
    target: &CrashSignature,
    predictor: &mut Predictor,
    opts: &ReproduceOptions,
) -> Result<ReproductionResult, ExploreError> {
    opts.rewards.validate()?;
    let started = Instant::now();
    let meta = app.metadata();
    let mut session = start_session(app, opts.selector.rng_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.selector.rng_seed);
    let mut q = QTable::new();
    let mut memory = ExplorationMemory::default();
    let mut log: Vec<String> = Vec::new();
    let mut page_cache: HashMap<PageId, PageInfo> = HashMap::new();
    let mut escape_remaining = 0usize;
    let mut restarts = 0u64;

    let guided = opts.engine == EngineKind::Guided;
    let use_predictor =
        guided && opts.ablation != AblationMode::NoPageReach && target.crash_page.is_some();
    let use_hit =
        guided && opts.ablation != AblationMode::NoWidgetHit && !target.crash_apis.is_empty();

    let compute_info = |session: &crate::sim::Session<'_>| -> Result<PageInfo, SimError> {
        let (page, interactables) = session.observe()?;
        let state = StateKey::of(page, &interactables);
        let mut candidates = Vec::new();
        for w in &interactables {
            let name = w.display_name();
            let hit = if use_hit {
                widget_hit_score(&tokenize(&name), &target.crash_apis)
            } else {
                0.0
            };
            for action in w.actions() {
                candidates.push((w.widget_id.clone(), action, name.clone(), hit));
            }
        }
        Ok(PageInfo {
            state,
            interactables,
            candidates,
            reach: None,
        })
    };

    macro_rules! fail {
        ($reason:expr) => {
            return Ok(ReproductionResult {
                success: false,
                trace: None,
                observed: None,
                actions: memory.action_counter,
                restarts,
                unique_states: memory.visited_states.len(),
                wall_clock: started.elapsed(),
                failure_reason: Some($reason),
                action_log: log,
            })
        };
    }

    loop {
        if memory.action_counter >= opts.budget.max_actions {
            fail!(format!(
                "action budget exhausted ({} actions, {} restarts, {} states seen)",
                memory.action_counter,
                restarts,
                memory.visited_states.len()
            ));
        }
        if started.elapsed().as_secs_f64() >= opts.budget.budget_seconds {
            fail!(format!(
                "wall-clock budget exhausted after {:.1}s ({} actions)",
                started.elapsed().as_secs_f64(),
                memory.action_counter
            ));
        }

        let page_id = session.current_page_id().clone();
        if !page_cache.contains_key(&page_id) {
            let info = compute_info(&session)?;
            page_cache.insert(page_id.clone(), info);
        }

        // First sight of this state: every action starts at zero.
        let state = page_cache[&page_id].state.clone();
        if guided && !q.has_state(&state) {
            let actions: Vec<ActionId> = page_cache[&page_id]
                .candidates
                .iter()
                .map(|(w, a, _, _)| ActionId {
                    widget: w.clone(),
                    action: *a,
                })
                .collect();
            q.register_state(&state, actions);
        }
        memory.visited_states.insert(state.clone());

        if use_predictor && page_cache[&page_id].reach.is_none() {
            let info = page_cache.get_mut(&page_id).expect("cached");
            let page = app.page(&page_id).expect("page exists");
            let ctx = PromptContext::from_observation(
                &meta.activity_names,
                page,
                &info.interactables,
                target.crash_page.as_ref().expect("crash page present"),
            );
            let plan = predictor.plan_for(&ctx);
            info.reach = Some(page_reach_scores(&plan.ranked, &info.interactables));
        }

        // Score the candidates that are still allowed.
        let info = &page_cache[&page_id];
        let scored: Vec<ScoredWidget> = info
            .candidates
            .iter()
            .enumerate()
            .filter(|(_, (w, a, _, _))| {
                !guided
                    || !memory.is_excluded(
                        &state,
                        &ActionId {
                            widget: w.clone(),
                            action: *a,
                        },
                    )
            })
            .map(|(ordinal, (w, a, _, hit))| {
                let aid = ActionId {
                    widget: w.clone(),
                    action: *a,
                };
                let reach = info
                    .reach
                    .as_ref()
                    .and_then(|r| r.get(w).copied())
                    .unwrap_or(0.0);
                let qv = if guided { q.get(&state, &aid) } else { 0.0 };
                combine(w.clone(), *a, ordinal, reach, *hit, qv, opts.ablation)
            })
            .collect();

        if scored.is_empty() {
            // Everything on this page is ruled out: relaunch and try elsewhere.
            restarts += 1;
            memory.action_counter += 1;
            memory.clear_cache();
            session.restart();
            log.push(format!(
                "{:04} restart: no selectable candidates on {}",
                memory.action_counter,
                state.short()
            ));
            continue;
        }

        let picked = if guided {
            let mode = if escape_remaining > 0 {
                SelectMode::Escape
            } else if detect_stuck(&memory, &opts.selector) {
                escape_remaining = opts.selector.escape_duration;
                SelectMode::Escape
            } else {
                SelectMode::Focused
            };
            if mode == SelectMode::Escape && escape_remaining > 0 {
                escape_remaining -= 1;
            }
            select_widget(&scored, &opts.selector, mode, &mut rng)?
        } else {
            rng.random_range(0..scored.len())
        };
        let chosen = scored[picked].clone();
        let aid = ActionId {
            widget: chosen.widget_id.clone(),
            action: chosen.action,
        };
        let display_name = info
            .candidates
            .iter()
            .find(|(w, a, _, _)| w == &aid.widget && *a == aid.action)
            .map(|(_, _, n, _)| n.clone())
            .unwrap_or_default();

        let event = session.perform(&aid.widget, aid.action)?;
        memory.action_counter += 1;

        match event.kind {
            SessionEventKind::PageChanged | SessionEventKind::NoChange => {
                let next_page_id = session.current_page_id().clone();
                if !page_cache.contains_key(&next_page_id) {
                    let next_info = compute_info(&session)?;
                    page_cache.insert(next_page_id.clone(), next_info);
                }
                let next_state = page_cache[&next_page_id].state.clone();
                let next_activity = app
                    .page(&next_page_id)
                    .map(|p| p.activity_name.clone())
                    .unwrap_or_default();
                let outcome = ActionOutcome {
                    kind: event.kind,
                    invoked_apis: &event.invoked_apis,
                    next_state: Some(&next_state),
                    next_activity: Some(&next_activity),
                    page_arrived: event.kind == SessionEventKind::PageChanged
                        && next_state != state,
                    crash_matched: false,
                };
                let class = classify_reward(&outcome, target, &memory.visited_states);
                let was_new = class == RewardClass::NewState;
                let reward = opts.rewards.value(class);
                let new_q = if guided {
                    q.update(&state, &aid, reward, Some(&next_state))
                } else {
                    0.0
                };
                memory.transition_log.push((
                    state.clone(),
                    aid.clone(),
                    Some(next_state.clone()),
                ));
                memory.interaction_cache.push(TraceStep {
                    pre_state: state.clone(),
                    pre_page: page_id.clone(),
                    widget: aid.widget.clone(),
                    display_name: display_name.clone(),
                    action: aid.action,
                    result: StepResult::State(next_state.clone()),
                });
                memory.push_progress(ProgressFlags {
                    new_state: was_new,
                    crash_related: class == RewardClass::CrashRelated,
                });
                memory.visited_states.insert(next_state.clone());
                log.push(format!(
                    "{:04} {} {}/{} '{}' => {} [{}] r={:+} q={:.4}",
                    memory.action_counter,
                    aid.action,
                    page_id,
                    aid.widget,
                    display_name,
                    next_page_id,
                    class_tag(class),
                    reward,
                    new_q,
                ));
            }
            SessionEventKind::Crashed => {
                let text = event.crash_trace.clone().expect("crash carries trace");
                let observed = parse_trace(&RawTrace::new(text), &meta).ok();
                let matched = observed
                    .as_ref()
                    .map(|o| signature_matches(o, target))
                    .unwrap_or(false);
                let outcome = ActionOutcome {
                    kind: SessionEventKind::Crashed,
                    invoked_apis: &event.invoked_apis,
                    next_state: None,
                    next_activity: None,
                    page_arrived: false,
                    crash_matched: matched,
                };
                let class = classify_reward(&outcome, target, &memory.visited_states);
                let reward = opts.rewards.value(class);
                if guided {
                    q.update(&state, &aid, reward, None);
                }
                memory.transition_log.push((state.clone(), aid.clone(), None));
                memory.interaction_cache.push(TraceStep {
                    pre_state: state.clone(),
                    pre_page: page_id.clone(),
                    widget: aid.widget.clone(),
                    display_name: display_name.clone(),
                    action: aid.action,
                    result: StepResult::Crashed,
                });
                memory.push_progress(ProgressFlags {
                    new_state: false,
                    crash_related: class == RewardClass::CrashRelated,
                });
                let exception = observed
                    .as_ref()
                    .map(|o| o.exception_type.clone())
                    .unwrap_or_else(|| "<unparseable>".into());
                log.push(format!(
                    "{:04} {} {}/{} '{}' => crash {} [{}] r={:+}",
                    memory.action_counter,
                    aid.action,
                    page_id,
                    aid.widget,
                    display_name,
                    exception,
                    if matched { "target" } else { "other" },
                    reward,
                ));
                if matched {
                    let trace = ReproductionTrace::unminimized(
                        memory.interaction_cache.clone(),
                        target.clone(),
                    );
                    return Ok(ReproductionResult {
                        success: true,
                        trace: Some(trace),
                        observed,
                        actions: memory.action_counter,
                        restarts,
                        unique_states: memory.visited_states.len(),
                        wall_clock: started.elapsed(),
                        failure_reason: None,
                        action_log: log,
                    });
                }
                // A different crash: poison the action and start over.
                memory.exclude(&state, &aid);
                restarts += 1;
                memory.clear_cache();
                session.restart();
            }
            SessionEventKind::LeftApp => {
                let outcome = ActionOutcome {
                    kind: SessionEventKind::LeftApp,
                    invoked_apis: &event.invoked_apis,
                    next_state: None,
                    next_activity: None,
                    page_arrived: false,
                    crash_matched: false,
                };
                let class = classify_reward(&outcome, target, &memory.visited_states);
                let reward = opts.rewards.value(class);
                if guided {
                    q.update(&state, &aid, reward, None);
                }
                memory.transition_log.push((state.clone(), aid.clone(), None));
                memory.push_progress(ProgressFlags {
                    new_state: false,
                    crash_related: class == RewardClass::CrashRelated,
                });
                log.push(format!(
                    "{:04} {} {}/{} '{}' => left app r={:+}",
                    memory.action_counter, aid.action, page_id, aid.widget, display_name, reward,
                ));
                memory.exclude(&state, &aid);
                restarts += 1;
                memory.clear_cache();
                session.restart();
            }
        }
    }
}

fn class_tag(class: RewardClass) -> &'static str {
    match class {
        RewardClass::CrashRelated => "crash-related",
        RewardClass::NewState => "new",
        RewardClass::DuplicateState => "dup",
        RewardClass::FailureState => "fail",
    }
}
