//! Deterministic app simulator: the device layer the explorer drives.
//!
//! An [`AppModel`] is a JSON fixture describing pages, widgets, and guarded
//! transitions; a [`Session`] executes interactions against it. There is no rendering
//! and no timing — an interaction either changes the page, leaves the app, renders a
//! crash trace from a template, or does nothing. Everything is a pure function of
//! `(fixture, seed, action sequence)`, which keeps every downstream search and replay
//! test reproducible.
//!
//! # Fixture format (schema version 1)
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "package_name": "com.example.notes",
//!   "activity_names": ["MainActivity", "SettingActivity"],
//!   "entry_page": "main",
//!   "pages": [
//!     {
//!       "page_id": "main",
//!       "activity_name": "MainActivity",
//!       "kind": "general",
//!       "widgets": [
//!         {"widget_id": "w_settings", "widget_class": "text_like",
//!          "text": "Settings", "clickable": true, "container_group": "toolbar"}
//!       ]
//!     }
//!   ],
//!   "transitions": [
//!     {"from_page": "main", "widget": "w_settings", "action": "tap",
//!      "invoked_apis": ["SettingActivity.onCreate"],
//!      "outcome": {"next_page": "settings"}}
//!   ],
//!   "crashes": {"c1": "java.lang.NullPointerException: ...\n    at ..."}
//! }
//! ```
//!
//! Missing `(widget, action)` entries mean no-op. Guarded transitions fire once every
//! event in their guard has occurred in the current session; among satisfied guards
//! the longest wins. Crash templates may contain `{line}` placeholders, replaced with
//! a value that varies with the session's action count so that two different paths to
//! the same crash render superficially different traces.
//!
//! Every page exposes one synthetic `back` widget. Pressing back pops the page stack
//! (leaving the app from the entry page) unless the fixture declares an explicit
//! transition for it; the screen-rotate action also rides on this widget.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::AppMetadata;

/// Identifier of a page within one fixture.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PageId(pub String);

/// Identifier of a widget within one page.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WidgetId(pub String);

/// Identifier of a crash template within one fixture.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CrashId(pub String);

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
impl fmt::Display for WidgetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
impl fmt::Display for CrashId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PageId {
    fn from(s: &str) -> Self {
        PageId(s.to_string())
    }
}
impl From<&str> for WidgetId {
    fn from(s: &str) -> Self {
        WidgetId(s.to_string())
    }
}
impl From<&str> for CrashId {
    fn from(s: &str) -> Self {
        CrashId(s.to_string())
    }
}

/// The widget id of the synthetic per-page back widget.
pub const BACK_WIDGET_ID: &str = "__back";

/// Page flavor; menu and dialog pages get a "menu of"/"dialog of" naming prefix so
/// that overlays over the same activity read as distinct pages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PageType {
    General,
    Menu,
    Dialog,
}

impl fmt::Display for PageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PageType::General => f.write_str("general"),
            PageType::Menu => f.write_str("menu"),
            PageType::Dialog => f.write_str("dialog"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetClass {
    TextLike,
    IconLike,
    Input,
}

/// User interactions the simulator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Tap,
    LongTap,
    TypeText,
    Rotate,
    Back,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Tap => "tap",
            Action::LongTap => "long_tap",
            Action::TypeText => "type_text",
            Action::Rotate => "rotate",
            Action::Back => "back",
        }
    }

    pub fn parse(s: &str) -> Option<Action> {
        match s {
            "tap" => Some(Action::Tap),
            "long_tap" => Some(Action::LongTap),
            "type_text" => Some(Action::TypeText),
            "rotate" => Some(Action::Rotate),
            "back" => Some(Action::Back),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetSpec {
    pub widget_id: WidgetId,
    pub widget_class: WidgetClass,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub content_description: String,
    #[serde(default)]
    pub resource_id: String,
    #[serde(default)]
    pub nearby_text: String,
    #[serde(default)]
    pub sibling_text: String,
    #[serde(default)]
    pub child_text: String,
    #[serde(default)]
    pub clickable: bool,
    #[serde(default)]
    pub long_clickable: bool,
    /// Layout grouping label ("list", "toolbar", ...) used when phrasing the widget
    /// for prompts; empty means ungrouped.
    #[serde(default)]
    pub container_group: String,
}

impl WidgetSpec {
    /// Widgets that are neither clickable, long-clickable, nor inputs are invisible
    /// to the explorer.
    pub fn is_interactable(&self) -> bool {
        self.clickable || self.long_clickable || self.widget_class == WidgetClass::Input
    }

    /// Representative name: text-like widgets use the first non-empty of
    /// text / content-description / resource-id, icon-like widgets the first
    /// non-empty of nearby / sibling / child text.
    pub fn display_name(&self) -> String {
        let fields: [&str; 3] = match self.widget_class {
            WidgetClass::TextLike | WidgetClass::Input => {
                [&self.text, &self.content_description, &self.resource_id]
            }
            WidgetClass::IconLike => [&self.nearby_text, &self.sibling_text, &self.child_text],
        };
        fields
            .iter()
            .find(|s| !s.is_empty())
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("unnamed widget {}", self.widget_id))
    }

    /// Actions this widget affords, in a fixed order.
    pub fn actions(&self) -> Vec<Action> {
        if self.widget_id.0 == BACK_WIDGET_ID {
            return vec![Action::Back, Action::Rotate];
        }
        let mut out = Vec::new();
        if self.clickable {
            out.push(Action::Tap);
        }
        if self.long_clickable {
            out.push(Action::LongTap);
        }
        if self.widget_class == WidgetClass::Input {
            out.push(Action::TypeText);
        }
        out
    }
}

/// Builds the synthetic back widget appended to every observation.
pub fn back_widget() -> WidgetSpec {
    WidgetSpec {
        widget_id: WidgetId(BACK_WIDGET_ID.into()),
        widget_class: WidgetClass::IconLike,
        text: String::new(),
        content_description: String::new(),
        resource_id: String::new(),
        nearby_text: "back".into(),
        sibling_text: String::new(),
        child_text: String::new(),
        clickable: true,
        long_clickable: false,
        container_group: String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSpec {
    pub page_id: PageId,
    pub activity_name: String,
    pub kind: PageType,
    pub widgets: Vec<WidgetSpec>,
}

impl PageSpec {
    pub fn interactables(&self) -> Vec<WidgetSpec> {
        let mut out: Vec<WidgetSpec> = self
            .widgets
            .iter()
            .filter(|w| w.is_interactable())
            .cloned()
            .collect();
        out.push(back_widget());
        out
    }
}

/// An event that must have occurred earlier in the current session.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GuardEvent {
    pub page: PageId,
    pub widget: WidgetId,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeSpec {
    NextPage(PageId),
    OutOfApp,
    Crash(CrashId),
    NoOp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub from_page: PageId,
    pub widget: WidgetId,
    pub action: Action,
    #[serde(default)]
    pub guard: Vec<GuardEvent>,
    #[serde(default)]
    pub invoked_apis: Vec<String>,
    pub outcome: OutcomeSpec,
}

pub const FIXTURE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppModel {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub package_name: String,
    pub activity_names: Vec<String>,
    pub entry_page: PageId,
    pub pages: Vec<PageSpec>,
    pub transitions: Vec<TransitionSpec>,
    #[serde(default)]
    pub crashes: BTreeMap<CrashId, String>,
}

fn default_schema_version() -> u32 {
    FIXTURE_SCHEMA_VERSION
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid model at {path}: {message}")]
    InvalidModel { path: String, message: String },
    #[error("session is dead ({0})")]
    SessionDead(&'static str),
    #[error("illegal action on page `{page}`: {action} on `{widget}` ({reason})")]
    IllegalAction {
        page: PageId,
        widget: WidgetId,
        action: Action,
        reason: String,
    },
    #[error("fixture io: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture json: {0}")]
    Json(#[from] serde_json::Error),
}

impl AppModel {
    pub fn from_json_str(s: &str) -> Result<Self, SimError> {
        let model: AppModel = serde_json::from_str(s)?;
        Ok(model)
    }

    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }

    pub fn page(&self, id: &PageId) -> Option<&PageSpec> {
        self.pages.iter().find(|p| &p.page_id == id)
    }

    pub fn metadata(&self) -> AppMetadata {
        AppMetadata {
            package_name: self.package_name.clone(),
            activity_names: self.activity_names.clone(),
        }
    }

    fn invalid(path: impl Into<String>, message: impl Into<String>) -> SimError {
        SimError::InvalidModel {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Referential validation with a diagnostic path to the offending element.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.package_name.is_empty() {
            return Err(Self::invalid("package_name", "must not be empty"));
        }
        if self.activity_names.is_empty() {
            return Err(Self::invalid("activity_names", "must not be empty"));
        }
        let mut acts = HashSet::new();
        for (i, a) in self.activity_names.iter().enumerate() {
            if !acts.insert(a) {
                return Err(Self::invalid(
                    format!("activity_names[{i}]"),
                    format!("duplicate `{a}`"),
                ));
            }
        }
        let mut page_ids = HashSet::new();
        for (pi, page) in self.pages.iter().enumerate() {
            if page.page_id.0.is_empty()
                || page.page_id.0.contains(char::is_whitespace)
                || page.page_id.0.contains('/')
            {
                return Err(Self::invalid(
                    format!("pages[{pi}].page_id"),
                    "must be non-empty, without whitespace or `/`",
                ));
            }
            if !page_ids.insert(&page.page_id) {
                return Err(Self::invalid(
                    format!("pages[{pi}].page_id"),
                    format!("duplicate `{}`", page.page_id),
                ));
            }
            let mut widget_ids = HashSet::new();
            for (wi, w) in page.widgets.iter().enumerate() {
                if w.widget_id.0.is_empty()
                    || w.widget_id.0.contains(char::is_whitespace)
                    || w.widget_id.0.contains('/')
                    || w.widget_id.0 == BACK_WIDGET_ID
                {
                    return Err(Self::invalid(
                        format!("pages[{pi}].widgets[{wi}].widget_id"),
                        "must be non-empty, without whitespace or `/`, and not the reserved back id",
                    ));
                }
                if !widget_ids.insert(&w.widget_id) {
                    return Err(Self::invalid(
                        format!("pages[{pi}].widgets[{wi}].widget_id"),
                        format!("duplicate `{}` on page `{}`", w.widget_id, page.page_id),
                    ));
                }
            }
        }
        if self.page(&self.entry_page).is_none() {
            return Err(Self::invalid(
                "entry_page",
                format!("page `{}` is not defined", self.entry_page),
            ));
        }

        let widget_exists = |page: &PageId, widget: &WidgetId| -> bool {
            widget.0 == BACK_WIDGET_ID
                || self
                    .page(page)
                    .is_some_and(|p| p.widgets.iter().any(|w| &w.widget_id == widget))
        };

        let mut unguarded = HashSet::new();
        for (ti, t) in self.transitions.iter().enumerate() {
            if self.page(&t.from_page).is_none() {
                return Err(Self::invalid(
                    format!("transitions[{ti}].from_page"),
                    format!("page `{}` is not defined", t.from_page),
                ));
            }
            if !widget_exists(&t.from_page, &t.widget) {
                return Err(Self::invalid(
                    format!("transitions[{ti}].widget"),
                    format!("widget `{}` is not on page `{}`", t.widget, t.from_page),
                ));
            }
            if t.guard.is_empty()
                && !unguarded.insert((atomic_key(&t.from_page, &t.widget, t.action),))
            {
                return Err(Self::invalid(
                    format!("transitions[{ti}]"),
                    format!(
                        "second unguarded transition for ({}, {}, {})",
                        t.from_page, t.widget, t.action
                    ),
                ));
            }
            for (gi, g) in t.guard.iter().enumerate() {
                if self.page(&g.page).is_none() {
                    return Err(Self::invalid(
                        format!("transitions[{ti}].guard[{gi}].page"),
                        format!("page `{}` is not defined", g.page),
                    ));
                }
                if !widget_exists(&g.page, &g.widget) {
                    return Err(Self::invalid(
                        format!("transitions[{ti}].guard[{gi}].widget"),
                        format!("widget `{}` is not on page `{}`", g.widget, g.page),
                    ));
                }
            }
            match &t.outcome {
                OutcomeSpec::NextPage(p) if self.page(p).is_none() => {
                    return Err(Self::invalid(
                        format!("transitions[{ti}].outcome"),
                        format!("next_page `{p}` is not defined"),
                    ));
                }
                OutcomeSpec::Crash(c) if !self.crashes.contains_key(c) => {
                    return Err(Self::invalid(
                        format!("transitions[{ti}].outcome"),
                        format!("crash `{c}` has no template"),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn atomic_key(page: &PageId, widget: &WidgetId, action: Action) -> String {
    format!("{page}\u{1}{widget}\u{1}{action}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionEventKind {
    PageChanged,
    Crashed,
    LeftApp,
    NoChange,
}

/// What one interaction produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionEvent {
    pub kind: SessionEventKind,
    /// Rendered stack trace text when `kind == Crashed`.
    pub crash_trace: Option<String>,
    pub invoked_apis: Vec<String>,
    pub new_page: Option<PageId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SessionState {
    Live,
    Crashed,
    LeftApp,
}

/// A live run of the app. Single-threaded; distinct sessions are independent.
#[derive(Debug, Clone)]
pub struct Session<'a> {
    app: &'a AppModel,
    seed: u64,
    current_page: PageId,
    state: SessionState,
    history: Vec<GuardEvent>,
    back_stack: Vec<PageId>,
    actions_performed: u64,
}

/// Validates the model and opens a session positioned at the entry page.
pub fn start_session(app: &AppModel, seed: u64) -> Result<Session<'_>, SimError> {
    app.validate()?;
    Ok(Session {
        app,
        seed,
        current_page: app.entry_page.clone(),
        state: SessionState::Live,
        history: Vec::new(),
        back_stack: vec![app.entry_page.clone()],
        actions_performed: 0,
    })
}

impl<'a> Session<'a> {
    pub fn app(&self) -> &'a AppModel {
        self.app
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_live(&self) -> bool {
        self.state == SessionState::Live
    }

    pub fn current_page_id(&self) -> &PageId {
        &self.current_page
    }

    /// Current page plus its interactable widgets (fixture order, synthetic back
    /// widget last).
    pub fn observe(&self) -> Result<(&'a PageSpec, Vec<WidgetSpec>), SimError> {
        match self.state {
            SessionState::Crashed => return Err(SimError::SessionDead("crashed")),
            SessionState::LeftApp => return Err(SimError::SessionDead("left the app")),
            SessionState::Live => {}
        }
        let page = self
            .app
            .page(&self.current_page)
            .expect("validated model has current page");
        Ok((page, page.interactables()))
    }

    fn find_widget(&self, page: &'a PageSpec, widget: &WidgetId) -> Option<WidgetSpec> {
        if widget.0 == BACK_WIDGET_ID {
            return Some(back_widget());
        }
        page.widgets
            .iter()
            .find(|w| &w.widget_id == widget && w.is_interactable())
            .cloned()
    }

    /// Picks the transition for `(current page, widget, action)`: satisfied guards
    /// take precedence (longest guard first, declaration order breaks ties), then the
    /// unguarded entry, then the built-in default for the action.
    fn select_transition(&self, widget: &WidgetId, action: Action) -> Option<&'a TransitionSpec> {
        let mut best_guarded: Option<&TransitionSpec> = None;
        let mut unguarded: Option<&TransitionSpec> = None;
        for t in &self.app.transitions {
            if t.from_page != self.current_page || &t.widget != widget || t.action != action {
                continue;
            }
            if t.guard.is_empty() {
                unguarded.get_or_insert(t);
            } else if t.guard.iter().all(|g| self.history.contains(g)) {
                let better = match best_guarded {
                    None => true,
                    Some(b) => t.guard.len() > b.guard.len(),
                };
                if better {
                    best_guarded = Some(t);
                }
            }
        }
        best_guarded.or(unguarded)
    }

    fn render_crash(&self, template: &str) -> String {
        // Line numbers vary with how much happened this session; the signature of the
        // rendered trace does not.
        let line = 17 + self.actions_performed;
        template.replace("{line}", &line.to_string())
    }

    /// Performs one interaction and reports what happened. No-ops still report their
    /// invoked APIs and still count as occurred events for guards.
    pub fn perform(&mut self, widget: &WidgetId, action: Action) -> Result<SessionEvent, SimError> {
        match self.state {
            SessionState::Crashed => return Err(SimError::SessionDead("crashed")),
            SessionState::LeftApp => return Err(SimError::SessionDead("left the app")),
            SessionState::Live => {}
        }
        let page = self
            .app
            .page(&self.current_page)
            .expect("validated model has current page");
        let spec = self.find_widget(page, widget).ok_or_else(|| SimError::IllegalAction {
            page: self.current_page.clone(),
            widget: widget.clone(),
            action,
            reason: "no such interactable widget on this page".into(),
        })?;
        if !spec.actions().contains(&action) {
            return Err(SimError::IllegalAction {
                page: self.current_page.clone(),
                widget: widget.clone(),
                action,
                reason: format!("widget does not afford {action}"),
            });
        }

        let transition = self.select_transition(widget, action).cloned();
        self.history.push(GuardEvent {
            page: self.current_page.clone(),
            widget: widget.clone(),
            action,
        });
        self.actions_performed += 1;

        let (outcome, invoked_apis) = match &transition {
            Some(t) => (t.outcome.clone(), t.invoked_apis.clone()),
            None if action == Action::Back => {
                // Default back: pop the page stack, leave the app from the root.
                if self.back_stack.len() > 1 {
                    self.back_stack.pop();
                    let prev = self.back_stack.last().expect("non-empty stack").clone();
                    self.current_page = prev.clone();
                    return Ok(SessionEvent {
                        kind: SessionEventKind::PageChanged,
                        crash_trace: None,
                        invoked_apis: Vec::new(),
                        new_page: Some(prev),
                    });
                }
                (OutcomeSpec::OutOfApp, Vec::new())
            }
            None => (OutcomeSpec::NoOp, Vec::new()),
        };

        let event = match outcome {
            OutcomeSpec::NextPage(p) => {
                self.current_page = p.clone();
                self.back_stack.push(p.clone());
                SessionEvent {
                    kind: SessionEventKind::PageChanged,
                    crash_trace: None,
                    invoked_apis,
                    new_page: Some(p),
                }
            }
            OutcomeSpec::OutOfApp => {
                self.state = SessionState::LeftApp;
                SessionEvent {
                    kind: SessionEventKind::LeftApp,
                    crash_trace: None,
                    invoked_apis,
                    new_page: None,
                }
            }
            OutcomeSpec::Crash(cid) => {
                let template = self
                    .app
                    .crashes
                    .get(&cid)
                    .expect("validated model has crash template");
                let rendered = self.render_crash(template);
                self.state = SessionState::Crashed;
                SessionEvent {
                    kind: SessionEventKind::Crashed,
                    crash_trace: Some(rendered),
                    invoked_apis,
                    new_page: None,
                }
            }
            OutcomeSpec::NoOp => SessionEvent {
                kind: SessionEventKind::NoChange,
                crash_trace: None,
                invoked_apis,
                new_page: Some(self.current_page.clone()),
            },
        };
        Ok(event)
    }

    /// Fresh session at the entry page; history and guards are gone.
    pub fn restart(&mut self) {
        self.current_page = self.app.entry_page.clone();
        self.state = SessionState::Live;
        self.history.clear();
        self.back_stack = vec![self.app.entry_page.clone()];
        // actions_performed keeps counting across restarts so rendered line numbers
        // never repeat within a run.
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{parse_trace, RawTrace};

    fn widget(id: &str, text: &str, clickable: bool) -> WidgetSpec {
        WidgetSpec {
            widget_id: id.into(),
            widget_class: WidgetClass::TextLike,
            text: text.into(),
            content_description: String::new(),
            resource_id: String::new(),
            nearby_text: String::new(),
            sibling_text: String::new(),
            child_text: String::new(),
            clickable,
            long_clickable: false,
            container_group: String::new(),
        }
    }

    fn two_page_model() -> AppModel {
        AppModel {
            schema_version: FIXTURE_SCHEMA_VERSION,
            package_name: "com.example.demo".into(),
            activity_names: vec!["MainActivity".into(), "SettingActivity".into()],
            entry_page: "main".into(),
            pages: vec![
                PageSpec {
                    page_id: "main".into(),
                    activity_name: "MainActivity".into(),
                    kind: PageType::General,
                    widgets: vec![
                        widget("w_settings", "Settings", true),
                        widget("w_label", "Just a label", false),
                        widget("w_toggle", "Enable sync", true),
                        widget("w_crash", "Sync now", true),
                    ],
                },
                PageSpec {
                    page_id: "settings".into(),
                    activity_name: "SettingActivity".into(),
                    kind: PageType::General,
                    widgets: vec![widget("w_theme", "Theme", true)],
                },
            ],
            transitions: vec![
                TransitionSpec {
                    from_page: "main".into(),
                    widget: "w_settings".into(),
                    action: Action::Tap,
                    guard: vec![],
                    invoked_apis: vec!["SettingActivity.onCreate".into()],
                    outcome: OutcomeSpec::NextPage("settings".into()),
                },
                TransitionSpec {
                    from_page: "main".into(),
                    widget: "w_crash".into(),
                    action: Action::Tap,
                    guard: vec![GuardEvent {
                        page: "main".into(),
                        widget: "w_toggle".into(),
                        action: Action::Tap,
                    }],
                    invoked_apis: vec!["SyncService.start".into()],
                    outcome: OutcomeSpec::Crash("c1".into()),
                },
                TransitionSpec {
                    from_page: "main".into(),
                    widget: "w_crash".into(),
                    action: Action::Tap,
                    guard: vec![],
                    invoked_apis: vec!["SyncService.start".into()],
                    outcome: OutcomeSpec::NoOp,
                },
            ],
            crashes: BTreeMap::from([(
                CrashId("c1".into()),
                "java.lang.IllegalStateException: not ready\n    at com.example.demo.sync.SyncService.start(SyncService.java:{line})\n    at android.os.Handler.dispatchMessage(Handler.java:106)".into(),
            )]),
        }
    }

    #[test]
    fn starts_at_entry_page() {
        let app = two_page_model();
        let session = start_session(&app, 0).unwrap();
        let (page, widgets) = session.observe().unwrap();
        assert_eq!(page.page_id, PageId("main".into()));
        // 3 clickable + synthetic back; the plain label is filtered out.
        assert_eq!(widgets.len(), 4);
        assert!(widgets.iter().all(|w| w.is_interactable()));
        assert_eq!(widgets.last().unwrap().widget_id.0, BACK_WIDGET_ID);
    }

    #[test]
    fn invalid_model_reports_path() {
        let mut app = two_page_model();
        app.transitions[0].outcome = OutcomeSpec::NextPage("nowhere".into());
        let err = start_session(&app, 0).unwrap_err();
        match err {
            SimError::InvalidModel { path, .. } => assert_eq!(path, "transitions[0].outcome"),
            other => panic!("expected InvalidModel, got {other:?}"),
        }
    }

    #[test]
    fn tap_navigates_and_reports_apis() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        let ev = s.perform(&"w_settings".into(), Action::Tap).unwrap();
        assert_eq!(ev.kind, SessionEventKind::PageChanged);
        assert_eq!(ev.new_page, Some(PageId("settings".into())));
        assert_eq!(ev.invoked_apis, vec!["SettingActivity.onCreate"]);
    }

    #[test]
    fn guard_unmet_falls_back_to_noop_but_keeps_apis() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        let ev = s.perform(&"w_crash".into(), Action::Tap).unwrap();
        assert_eq!(ev.kind, SessionEventKind::NoChange);
        assert_eq!(ev.invoked_apis, vec!["SyncService.start"]);

        // Satisfy the guard, then the same tap crashes.
        s.perform(&"w_toggle".into(), Action::Tap).unwrap();
        let ev = s.perform(&"w_crash".into(), Action::Tap).unwrap();
        assert_eq!(ev.kind, SessionEventKind::Crashed);
        assert!(!s.is_live());
    }

    #[test]
    fn guard_resets_on_restart() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        s.perform(&"w_toggle".into(), Action::Tap).unwrap();
        s.restart();
        let ev = s.perform(&"w_crash".into(), Action::Tap).unwrap();
        assert_eq!(ev.kind, SessionEventKind::NoChange);
    }

    #[test]
    fn restart_is_idempotent() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        s.perform(&"w_settings".into(), Action::Tap).unwrap();
        s.restart();
        let (p1, _) = s.observe().unwrap();
        assert_eq!(p1.page_id, app.entry_page);
        s.restart();
        let (p2, _) = s.observe().unwrap();
        assert_eq!(p2.page_id, app.entry_page);
    }

    #[test]
    fn dead_session_refuses_observation() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        s.perform(&"w_toggle".into(), Action::Tap).unwrap();
        s.perform(&"w_crash".into(), Action::Tap).unwrap();
        assert!(matches!(s.observe(), Err(SimError::SessionDead(_))));
        s.restart();
        assert!(s.observe().is_ok());
    }

    #[test]
    fn illegal_action_is_rejected() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        assert!(matches!(
            s.perform(&"w_theme".into(), Action::Tap),
            Err(SimError::IllegalAction { .. })
        ));
        assert!(matches!(
            s.perform(&"w_settings".into(), Action::LongTap),
            Err(SimError::IllegalAction { .. })
        ));
        // Non-interactable widgets are not reachable even by id.
        assert!(matches!(
            s.perform(&"w_label".into(), Action::Tap),
            Err(SimError::IllegalAction { .. })
        ));
    }

    #[test]
    fn back_pops_stack_and_leaves_from_root() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        s.perform(&"w_settings".into(), Action::Tap).unwrap();
        let ev = s.perform(&BACK_WIDGET_ID.into(), Action::Back).unwrap();
        assert_eq!(ev.kind, SessionEventKind::PageChanged);
        assert_eq!(ev.new_page, Some(PageId("main".into())));
        let ev = s.perform(&BACK_WIDGET_ID.into(), Action::Back).unwrap();
        assert_eq!(ev.kind, SessionEventKind::LeftApp);
        assert!(!s.is_live());
    }

    #[test]
    fn longest_satisfied_guard_wins() {
        let mut app = two_page_model();
        app.transitions.push(TransitionSpec {
            from_page: "main".into(),
            widget: "w_crash".into(),
            action: Action::Tap,
            guard: vec![
                GuardEvent {
                    page: "main".into(),
                    widget: "w_toggle".into(),
                    action: Action::Tap,
                },
                GuardEvent {
                    page: "main".into(),
                    widget: "w_settings".into(),
                    action: Action::Tap,
                },
            ],
            invoked_apis: vec![],
            outcome: OutcomeSpec::NoOp,
        });
        let mut s = start_session(&app, 0).unwrap();
        s.perform(&"w_toggle".into(), Action::Tap).unwrap();
        s.perform(&"w_settings".into(), Action::Tap).unwrap();
        s.perform(&BACK_WIDGET_ID.into(), Action::Back).unwrap();
        // Both guards satisfied: the two-event guard (NoOp) beats the one-event
        // guard (Crash).
        let ev = s.perform(&"w_crash".into(), Action::Tap).unwrap();
        assert_eq!(ev.kind, SessionEventKind::NoChange);
    }

    #[test]
    fn determinism_same_seed_same_events() {
        let app = two_page_model();
        let script = [
            ("w_crash", Action::Tap),
            ("w_toggle", Action::Tap),
            ("w_crash", Action::Tap),
        ];
        let run = |seed| {
            let mut s = start_session(&app, seed).unwrap();
            script
                .iter()
                .map(|(w, a)| s.perform(&WidgetId((*w).into()), *a).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
    }

    #[test]
    fn rendered_crash_reparses_under_fixture_package() {
        let app = two_page_model();
        let mut s = start_session(&app, 0).unwrap();
        s.perform(&"w_toggle".into(), Action::Tap).unwrap();
        let ev = s.perform(&"w_crash".into(), Action::Tap).unwrap();
        let text = ev.crash_trace.unwrap();
        assert!(text.contains("SyncService.java:19")); // {line} filled in
        let sig = parse_trace(&RawTrace::new(text), &app.metadata()).unwrap();
        assert_eq!(sig.exception_type, "java.lang.IllegalStateException");
        assert!(sig
            .app_frames
            .iter()
            .all(|f| f.class_path.starts_with("com.example.demo")));
    }

    #[test]
    fn display_name_rules() {
        let mut w = widget("w7", "", true);
        w.content_description = "Search engine".into();
        assert_eq!(w.display_name(), "Search engine");

        let icon = WidgetSpec {
            widget_id: "w8".into(),
            widget_class: WidgetClass::IconLike,
            nearby_text: String::new(),
            sibling_text: "Settings".into(),
            ..back_widget()
        };
        assert_eq!(icon.display_name(), "Settings");

        let unnamed = widget("w7", "", true);
        assert_eq!(unnamed.display_name(), "unnamed widget w7");
    }

    #[test]
    fn fixture_round_trips_through_json() {
        let app = two_page_model();
        let json = app.to_json_string();
        let back = AppModel::from_json_str(&json).unwrap();
        assert_eq!(app, back);
    }
}
