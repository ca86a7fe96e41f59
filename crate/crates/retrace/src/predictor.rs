//! Page reaching prediction: which page next, and which widget gets there.
//!
//! Two fixed prompt templates describe the navigation task. The questions are
//! answered either by a deterministic offline heuristic (stemmed-token overlap with
//! the crash page) or by a remote text-completion service; the remote path falls back
//! to the offline answer whenever the service is unreachable or its reply cannot be
//! resolved to a legal name, so guidance never degrades below the heuristic.
//!
//! Widget predictions are collected by re-asking: each round removes the widgets
//! already predicted from the prompt, until five distinct widgets are ranked.
//! Answers are cached per (current page, widget set, crash page), which bounds the
//! number of prompts a reproduction sends.

use std::collections::{BTreeSet, HashMap};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{PageSpec, PageType, WidgetSpec};
use crate::token::tokenize;
use crate::trace::CrashPage;

/// One interactable widget as it is phrased to the predictor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptWidget {
    /// Representative display name.
    pub name: String,
    /// Layout group label; non-empty widgets render as "<name> in a <group>".
    pub container_group: String,
}

impl PromptWidget {
    pub fn phrased(&self) -> String {
        if self.container_group.is_empty() {
            self.name.clone()
        } else {
            format!("{} in a {}", self.name, self.container_group)
        }
    }
}

/// Everything a prompt needs to know about the current situation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptContext {
    /// Tokenized activity names, space-joined, in manifest order.
    pub page_names: Vec<String>,
    /// Current page name; menu and dialog pages read "menu of x" / "dialog of x".
    pub current_page: String,
    /// Space-joined crash page tokens.
    pub crash_page: String,
    pub interactable_widgets: Vec<PromptWidget>,
}

/// Page name used in prompts: tokenized activity name, falling back to the lowercased
/// raw name when tokenization leaves nothing.
pub fn page_display_name(activity_name: &str) -> String {
    let joined = tokenize(activity_name).joined();
    if joined.is_empty() {
        activity_name.to_ascii_lowercase()
    } else {
        joined
    }
}

impl PromptContext {
    pub fn from_observation(
        activity_names: &[String],
        page: &PageSpec,
        interactables: &[WidgetSpec],
        crash_page: &CrashPage,
    ) -> Self {
        let name = page_display_name(&page.activity_name);
        let current_page = match page.kind {
            PageType::General => name,
            PageType::Menu => format!("menu of {name}"),
            PageType::Dialog => format!("dialog of {name}"),
        };
        PromptContext {
            page_names: activity_names.iter().map(|a| page_display_name(a)).collect(),
            current_page,
            crash_page: crash_page.tokens.joined(),
            interactable_widgets: interactables
                .iter()
                .map(|w| PromptWidget {
                    name: w.display_name(),
                    container_group: w.container_group.clone(),
                })
                .collect(),
        }
    }
}

/// A predicted next page; always one of the context's page names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextPagePrediction {
    pub next_page: String,
}

/// Up to five distinct widget names, best first, each naming a current interactable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RankedWidgets {
    pub ranked: Vec<String>,
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("every interactable widget is already excluded")]
    EmptyWidgetList,
    #[error("predictor unavailable: {0}")]
    Unavailable(String),
}

/// Renders the next-page question. Pure; equal contexts render byte-identical
/// strings. Applied literally even for degenerate inputs ("There are 1 pages ...").
pub fn render_prompt_p1(ctx: &PromptContext) -> String {
    format!(
        "There are {} pages in the app, named: {}. I want to go from the {} page to the {} page. What is the next page?",
        ctx.page_names.len(),
        ctx.page_names.join(", "),
        ctx.current_page,
        ctx.crash_page,
    )
}

/// Renders the transfer-widget question, omitting widgets already predicted in
/// earlier rounds.
pub fn render_prompt_p2(
    ctx: &PromptContext,
    next_page: &str,
    excluded: &BTreeSet<String>,
) -> Result<String, PredictorError> {
    let remaining: Vec<String> = ctx
        .interactable_widgets
        .iter()
        .filter(|w| !excluded.contains(&w.name))
        .map(|w| w.phrased())
        .collect();
    if remaining.is_empty() {
        return Err(PredictorError::EmptyWidgetList);
    }
    Ok(format!(
        "There are {} pages in the app, named: {}. I want to go from the {} page to the {} page. The next page may be the {} page. Here are widgets I can click: {}. What should I click?",
        ctx.page_names.len(),
        ctx.page_names.join(", "),
        ctx.current_page,
        ctx.crash_page,
        next_page,
        remaining.join(", "),
    ))
}

fn stem_set(text: &str) -> BTreeSet<String> {
    tokenize(text).stemmed().into_iter().collect()
}

fn overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> usize {
    a.intersection(b).count()
}

/// Offline answer to P1: the page name with the highest stemmed-token overlap with
/// the crash page; ties resolve to manifest order. Total on non-empty input.
fn offline_next_page(ctx: &PromptContext) -> Option<String> {
    let crash = stem_set(&ctx.crash_page);
    ctx.page_names
        .iter()
        .map(|name| overlap(&stem_set(name), &crash))
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .map(|(i, _)| ctx.page_names[i].clone())
}

/// Offline answer to one P2 round: among the non-excluded widgets, the one whose name
/// overlaps most with the predicted next page and the crash page; ties resolve to
/// on-page order.
fn offline_best_widget(
    ctx: &PromptContext,
    next_page: &str,
    excluded: &BTreeSet<String>,
) -> Option<String> {
    let mut targets = stem_set(next_page);
    targets.extend(stem_set(&ctx.crash_page));
    let mut seen = BTreeSet::new();
    let mut best: Option<(usize, String)> = None;
    for w in &ctx.interactable_widgets {
        if excluded.contains(&w.name) || !seen.insert(w.name.clone()) {
            continue;
        }
        let score = overlap(&stem_set(&w.name), &targets);
        let better = match &best {
            None => true,
            Some((s, _)) => score > *s,
        };
        if better {
            best = Some((score, w.name.clone()));
        }
    }
    best.map(|(_, name)| name)
}

/// Resolves a free-form reply to one of `candidates`.
///
/// Only the first non-empty line is considered. The candidate whose stemmed token
/// sequence appears earliest (contiguously) in the stemmed reply wins; among matches
/// at the same position the longest candidate wins, then candidate order.
pub fn resolve_reply(reply: &str, candidates: &[String]) -> Option<String> {
    let first_line = reply.lines().find(|l| !l.trim().is_empty())?;
    let reply_stems = tokenize(first_line).stemmed();
    let mut best: Option<(usize, usize, usize)> = None; // (start, -len sentinel via cmp, index)
    for (ci, cand) in candidates.iter().enumerate() {
        let cand_stems = tokenize(cand).stemmed();
        if cand_stems.is_empty() || cand_stems.len() > reply_stems.len() {
            continue;
        }
        let found = reply_stems
            .windows(cand_stems.len())
            .position(|w| w == cand_stems.as_slice());
        if let Some(start) = found {
            let better = match best {
                None => true,
                Some((bs, blen, _)) => {
                    start < bs || (start == bs && cand_stems.len() > blen)
                }
            };
            if better {
                best = Some((start, cand_stems.len(), ci));
            }
        }
    }
    best.map(|(_, _, ci)| candidates[ci].clone())
}

/// One prompt/answer exchange, recorded for the run transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub task: PromptTask,
    pub prompt: String,
    pub answer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptTask {
    NextPage,
    TransferWidget,
}

/// A raw HTTP exchange, kept only when debug logging is on.
#[derive(Debug, Clone, Serialize)]
pub struct HttpExchange {
    pub request_body: String,
    pub response_body: String,
}

/// Completion backend for the remote predictor. One blocking request at a time.
pub trait CompletionClient: Send {
    fn complete(&mut self, prompt: &str) -> Result<String, PredictorError>;

    /// Raw request/response bodies accumulated so far (debug logging only).
    fn take_http_log(&mut self) -> Vec<HttpExchange> {
        Vec::new()
    }
}

/// Remote completion endpoint settings. Environment variables
/// `RETRACE_PREDICTOR_URL`, `RETRACE_PREDICTOR_TOKEN`, `RETRACE_PREDICTOR_MODEL` and
/// `RETRACE_PREDICTOR_TIMEOUT_MS` override whatever a config file provided.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(default)]
    pub auth_token: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Log request/response bodies verbatim into the run directory.
    #[serde(default)]
    pub debug_log: bool,
}

fn default_model() -> String {
    "text-completion".into()
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl RemoteConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, PredictorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PredictorError::Unavailable(format!("config {}: {e}", path.display())))?;
        let mut cfg: RemoteConfig = serde_json::from_str(&text)
            .map_err(|e| PredictorError::Unavailable(format!("config {}: {e}", path.display())))?;
        cfg.apply_env_overrides();
        Ok(cfg)
    }

    pub fn apply_env_overrides(&mut self) {
        if let Ok(v) = std::env::var("RETRACE_PREDICTOR_URL") {
            self.endpoint = v;
        }
        if let Ok(v) = std::env::var("RETRACE_PREDICTOR_TOKEN") {
            self.auth_token = Some(v);
        }
        if let Ok(v) = std::env::var("RETRACE_PREDICTOR_MODEL") {
            self.model = v;
        }
        if let Ok(v) = std::env::var("RETRACE_PREDICTOR_TIMEOUT_MS") {
            if let Ok(ms) = v.parse() {
                self.timeout_ms = ms;
            }
        }
    }
}

/// HTTP client posting `{"model", "prompt", "max_tokens"}` and reading the first of
/// `choices[0].text`, `choices[0].message.content`, `completion`, or the raw body.
pub struct HttpCompletionClient {
    cfg: RemoteConfig,
    agent: ureq::Agent,
    http_log: Vec<HttpExchange>,
}

impl HttpCompletionClient {
    pub fn new(cfg: RemoteConfig) -> Self {
        let agent_cfg = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
            .build();
        HttpCompletionClient {
            cfg,
            agent: agent_cfg.into(),
            http_log: Vec::new(),
        }
    }
}

impl CompletionClient for HttpCompletionClient {
    fn complete(&mut self, prompt: &str) -> Result<String, PredictorError> {
        let body = serde_json::json!({
            "model": self.cfg.model,
            "prompt": prompt,
            "max_tokens": 64,
        });
        let request_body = body.to_string();
        let mut req = self.agent.post(&self.cfg.endpoint);
        if let Some(token) = &self.cfg.auth_token {
            req = req.header("authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| PredictorError::Unavailable(e.to_string()))?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| PredictorError::Unavailable(e.to_string()))?;
        if self.cfg.debug_log {
            self.http_log.push(HttpExchange {
                request_body,
                response_body: text.clone(),
            });
        }
        let reply = match serde_json::from_str::<serde_json::Value>(&text) {
            Ok(v) => v["choices"][0]["text"]
                .as_str()
                .or_else(|| v["choices"][0]["message"]["content"].as_str())
                .or_else(|| v["completion"].as_str())
                .map(str::to_string)
                .unwrap_or(text),
            Err(_) => text,
        };
        Ok(reply)
    }

    fn take_http_log(&mut self) -> Vec<HttpExchange> {
        std::mem::take(&mut self.http_log)
    }
}

enum Backend {
    Offline,
    Remote(Box<dyn CompletionClient>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    current_page: String,
    crash_page: String,
    widgets: Vec<String>,
}

impl CacheKey {
    fn of(ctx: &PromptContext) -> Self {
        CacheKey {
            current_page: ctx.current_page.clone(),
            crash_page: ctx.crash_page.clone(),
            widgets: ctx.interactable_widgets.iter().map(|w| w.name.clone()).collect(),
        }
    }
}

/// The page reaching predictor: renders prompts, answers them offline or remotely,
/// caches per visited page, and records a transcript.
pub struct Predictor {
    backend: Backend,
    cache: HashMap<CacheKey, PagePlan>,
    transcript: Vec<TranscriptEntry>,
    prompts_sent: usize,
}

/// The cached answer for one page: predicted next page plus ranked widgets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PagePlan {
    pub next_page: Option<String>,
    pub ranked: RankedWidgets,
}

impl Predictor {
    pub fn offline() -> Self {
        Predictor {
            backend: Backend::Offline,
            cache: HashMap::new(),
            transcript: Vec::new(),
            prompts_sent: 0,
        }
    }

    pub fn remote(client: Box<dyn CompletionClient>) -> Self {
        Predictor {
            backend: Backend::Remote(client),
            cache: HashMap::new(),
            transcript: Vec::new(),
            prompts_sent: 0,
        }
    }

    pub fn remote_http(cfg: RemoteConfig) -> Self {
        Self::remote(Box::new(HttpCompletionClient::new(cfg)))
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn prompts_sent(&self) -> usize {
        self.prompts_sent
    }

    pub fn take_http_log(&mut self) -> Vec<HttpExchange> {
        match &mut self.backend {
            Backend::Offline => Vec::new(),
            Backend::Remote(c) => c.take_http_log(),
        }
    }

    fn record(&mut self, task: PromptTask, prompt: String, answer: String) {
        self.prompts_sent += 1;
        self.transcript.push(TranscriptEntry { task, prompt, answer });
    }

    /// Answers P1 for this context. Remote replies are fuzzy-matched against the
    /// legal page names; unresolved or failed calls fall back to the offline answer.
    pub fn predict_next_page(&mut self, ctx: &PromptContext) -> Option<NextPagePrediction> {
        let prompt = render_prompt_p1(ctx);
        let offline = offline_next_page(ctx)?;
        let answer = match &mut self.backend {
            Backend::Offline => offline,
            Backend::Remote(client) => match client.complete(&prompt) {
                Ok(reply) => resolve_reply(&reply, &ctx.page_names).unwrap_or(offline),
                Err(_) => offline,
            },
        };
        self.record(PromptTask::NextPage, prompt, answer.clone());
        Some(NextPagePrediction { next_page: answer })
    }

    /// Collects the top-five widget ranking for this context by re-asking P2 with
    /// already-predicted widgets removed.
    pub fn predict_widgets(&mut self, ctx: &PromptContext, next_page: &str) -> RankedWidgets {
        let mut excluded: BTreeSet<String> = BTreeSet::new();
        let mut ranked = Vec::new();
        while ranked.len() < 5 {
            let prompt = match render_prompt_p2(ctx, next_page, &excluded) {
                Ok(p) => p,
                Err(_) => break, // every widget predicted already
            };
            let offline = offline_best_widget(ctx, next_page, &excluded);
            let Some(offline) = offline else { break };
            let answer = match &mut self.backend {
                Backend::Offline => offline,
                Backend::Remote(client) => {
                    let legal: Vec<String> = ctx
                        .interactable_widgets
                        .iter()
                        .map(|w| w.name.clone())
                        .filter(|n| !excluded.contains(n))
                        .collect();
                    match client.complete(&prompt) {
                        Ok(reply) => resolve_reply(&reply, &legal).unwrap_or(offline),
                        Err(_) => offline,
                    }
                }
            };
            self.record(PromptTask::TransferWidget, prompt, answer.clone());
            excluded.insert(answer.clone());
            ranked.push(answer);
        }
        RankedWidgets { ranked }
    }

    /// The full plan for one page visit, cached so re-visits send no prompts.
    pub fn plan_for(&mut self, ctx: &PromptContext) -> PagePlan {
        let key = CacheKey::of(ctx);
        if let Some(plan) = self.cache.get(&key) {
            return plan.clone();
        }
        let next_page = self.predict_next_page(ctx).map(|p| p.next_page);
        let ranked = match &next_page {
            Some(np) => self.predict_widgets(ctx, np),
            None => RankedWidgets::default(),
        };
        let plan = PagePlan { next_page, ranked };
        self.cache.insert(key, plan.clone());
        plan
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(pages: &[&str], current: &str, crash: &str, widgets: &[&str]) -> PromptContext {
        PromptContext {
            page_names: pages.iter().map(|s| s.to_string()).collect(),
            current_page: current.into(),
            crash_page: crash.into(),
            interactable_widgets: widgets
                .iter()
                .map(|w| PromptWidget {
                    name: w.to_string(),
                    container_group: String::new(),
                })
                .collect(),
        }
    }

    #[test]
    fn p1_template_is_literal() {
        let c = ctx(&["main"], "main", "export settings", &[]);
        assert_eq!(
            render_prompt_p1(&c),
            "There are 1 pages in the app, named: main. I want to go from the main page to the export settings page. What is the next page?"
        );
    }

    #[test]
    fn p2_excludes_predicted_widgets() {
        let c = ctx(
            &["main", "setting"],
            "menu of main",
            "export settings",
            &["what's new", "help", "settings"],
        );
        let excluded = BTreeSet::from(["settings".to_string()]);
        let p = render_prompt_p2(&c, "setting", &excluded).unwrap();
        assert!(p.contains("what's new, help."));
        assert!(!p.contains("settings in"));

        let all: BTreeSet<String> =
            ["what's new", "help", "settings"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(
            render_prompt_p2(&c, "setting", &all),
            Err(PredictorError::EmptyWidgetList)
        ));
    }

    #[test]
    fn container_phrasing() {
        let w = PromptWidget {
            name: "settings".into(),
            container_group: "list".into(),
        };
        assert_eq!(w.phrased(), "settings in a list");
    }

    #[test]
    fn rendering_is_pure() {
        let c = ctx(&["a", "b"], "a", "b things", &["x"]);
        assert_eq!(render_prompt_p1(&c), render_prompt_p1(&c.clone()));
    }

    // Brute-force overlap oracle used to freeze the heuristic's expected answers.
    fn overlap_oracle(name: &str, target: &str) -> usize {
        let a: BTreeSet<String> = tokenize(name).stemmed().into_iter().collect();
        let b: BTreeSet<String> = tokenize(target).stemmed().into_iter().collect();
        a.intersection(&b).count()
    }

    #[test]
    fn offline_next_page_maximizes_stem_overlap() {
        let crash = "installed search engines settings";
        let pages = ["intro", "main", "search", "setting"];
        let scores: Vec<usize> = pages.iter().map(|p| overlap_oracle(p, crash)).collect();
        assert_eq!(scores, vec![0, 0, 1, 1]); // tie between search and setting
        let c = ctx(&pages, "main", crash, &[]);
        // Tie resolves to manifest order: "search" is listed first.
        assert_eq!(offline_next_page(&c).unwrap(), "search");

        let c2 = ctx(&["intro", "main", "setting", "search"], "main", crash, &[]);
        assert_eq!(offline_next_page(&c2).unwrap(), "setting");
    }

    #[test]
    fn offline_next_page_total_on_no_overlap() {
        let c = ctx(&["alpha", "beta"], "alpha", "gamma delta", &[]);
        assert_eq!(offline_next_page(&c).unwrap(), "alpha");
    }

    #[test]
    fn offline_widget_ranking_follows_overlap() {
        let c = ctx(
            &["intro", "main", "setting"],
            "menu of main",
            "installed search engines settings",
            &["what's new", "help", "settings"],
        );
        let mut p = Predictor::offline();
        let ranked = p.predict_widgets(&c, "setting");
        assert_eq!(ranked.ranked[0], "settings");
        assert_eq!(ranked.ranked.len(), 3);
        // Re-asking excluded the earlier answers, so all entries are distinct.
        let set: BTreeSet<&String> = ranked.ranked.iter().collect();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn ranking_truncates_to_five() {
        let widgets = ["a1", "b2", "c3", "d4", "e5", "f6", "g7"];
        let c = ctx(&["main"], "main", "zzz", &widgets);
        let mut p = Predictor::offline();
        let ranked = p.predict_widgets(&c, "main");
        assert_eq!(ranked.ranked.len(), 5);
    }

    struct CannedClient {
        replies: Vec<Result<String, ()>>,
    }

    impl CompletionClient for CannedClient {
        fn complete(&mut self, _prompt: &str) -> Result<String, PredictorError> {
            if self.replies.is_empty() {
                return Err(PredictorError::Unavailable("exhausted".into()));
            }
            self.replies
                .remove(0)
                .map_err(|_| PredictorError::Unavailable("refused".into()))
        }
    }

    #[test]
    fn remote_reply_resolves_fuzzily() {
        let c = ctx(
            &["intro", "main", "setting"],
            "menu of main",
            "installed search engines settings",
            &["what's new", "help", "settings"],
        );
        let client = CannedClient {
            replies: vec![
                Ok("I believe the setting page comes next.".into()),
                Ok("I think you should tap Settings.".into()),
                Ok("help".into()),
                Ok("no idea".into()),
            ],
        };
        let mut p = Predictor::remote(Box::new(client));
        let next = p.predict_next_page(&c).unwrap();
        assert_eq!(next.next_page, "setting");
        let ranked = p.predict_widgets(&c, &next.next_page);
        assert_eq!(ranked.ranked[0], "settings");
        assert_eq!(ranked.ranked[1], "help");
        // "no idea" resolved to nothing, so round three fell back to the offline pick.
        assert_eq!(ranked.ranked.len(), 3);
    }

    #[test]
    fn failing_remote_equals_offline() {
        let contexts = [
            ctx(
                &["intro", "main", "search", "setting"],
                "main",
                "installed search engines settings",
                &["what's new", "help", "settings", "history"],
            ),
            ctx(&["alpha", "beta"], "alpha", "beta tools", &["tools", "about"]),
        ];
        for c in &contexts {
            let mut offline = Predictor::offline();
            let mut failing = Predictor::remote(Box::new(CannedClient { replies: vec![] }));
            assert_eq!(offline.plan_for(c), failing.plan_for(c));
        }
    }

    #[test]
    fn resolution_prefers_earliest_then_longest() {
        let candidates = vec![
            "search".to_string(),
            "search engine".to_string(),
            "help".to_string(),
        ];
        // "search engine" and "search" both match at position 2; longer wins.
        let got = resolve_reply("tap the search engine row", &candidates);
        assert_eq!(got.as_deref(), Some("search engine"));
        // Earliest match wins over later longer ones.
        let got = resolve_reply("help, not the search engine", &candidates);
        assert_eq!(got.as_deref(), Some("help"));
        // Only the first non-empty line is read.
        let got = resolve_reply("\n\nnothing relevant\nsearch engine", &candidates);
        assert_eq!(got, None);
    }

    #[test]
    fn plan_is_cached_per_page() {
        let c = ctx(
            &["intro", "main", "setting"],
            "menu of main",
            "installed search engines settings",
            &["what's new", "help", "settings"],
        );
        let mut p = Predictor::offline();
        let first = p.plan_for(&c);
        let sent = p.prompts_sent();
        assert!(sent > 0);
        let second = p.plan_for(&c);
        assert_eq!(first, second);
        assert_eq!(p.prompts_sent(), sent, "cache hit must not send prompts");
    }
}
