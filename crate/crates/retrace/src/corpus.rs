//! The bundled fixture corpus and the corpus directory convention.
//!
//! Each case pairs an app fixture with the target stack trace and a flag saying
//! whether the crash is reachable at all. On disk a corpus is a directory of case
//! directories:
//!
//! ```text
//! corpus/
//!   focus_search/
//!     app.json      # the AppModel fixture
//!     trace.txt     # the target stack trace
//!     case.json     # {"name", "expected_reproducible", "notes"}
//! ```
//!
//! The built-in cases cover crash depths from one to eight interactions, guarded
//! event combinations, a decoy crash, an unreachable precondition, and two degraded
//! traces (one without app frames, one without a crash page). Widget counts are
//! calibrated so pages average about 6.6 interactable widgets.
//!
//! [`shortest_crash_path`] is an exhaustive breadth-first search over live sessions —
//! an oracle for case depth and solvability that is independent of the exploration
//! engine.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{
    start_session, Action, AppModel, CrashId, GuardEvent, OutcomeSpec, PageId, PageSpec, PageType,
    SessionEventKind, TransitionSpec, WidgetClass, WidgetId, WidgetSpec, FIXTURE_SCHEMA_VERSION,
};
use crate::trace::{parse_trace, signature_matches, CrashSignature, RawTrace, TraceError};

/// One benchmark case: fixture, target trace, and ground truth.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub name: String,
    pub app: AppModel,
    pub trace_text: String,
    pub expected_reproducible: bool,
    pub notes: String,
}

impl CorpusCase {
    /// Parses the case's target trace against its own fixture metadata.
    pub fn target(&self) -> Result<CrashSignature, TraceError> {
        parse_trace(&RawTrace::new(self.trace_text.clone()), &self.app.metadata())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus io: {0}")]
    Io(#[from] io::Error),
    #[error("corpus json in {path}: {message}")]
    Json { path: String, message: String },
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

#[derive(Serialize, Deserialize)]
struct CaseMeta {
    name: String,
    expected_reproducible: bool,
    #[serde(default)]
    notes: String,
}

/// Materializes the cases under `dir` in the corpus directory convention.
pub fn write_corpus(dir: &Path, cases: &[CorpusCase]) -> io::Result<()> {
    for case in cases {
        let case_dir = dir.join(&case.name);
        std::fs::create_dir_all(&case_dir)?;
        std::fs::write(case_dir.join("app.json"), case.app.to_json_string())?;
        std::fs::write(case_dir.join("trace.txt"), &case.trace_text)?;
        let meta = CaseMeta {
            name: case.name.clone(),
            expected_reproducible: case.expected_reproducible,
            notes: case.notes.clone(),
        };
        std::fs::write(
            case_dir.join("case.json"),
            serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n",
        )?;
    }
    Ok(())
}

/// Loads every case directory under `dir`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusCase>, CorpusError> {
    let mut cases = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|e| e.path().is_dir())
        .collect();
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let case_dir = entry.path();
        let meta_path = case_dir.join("case.json");
        if !meta_path.exists() {
            continue;
        }
        let meta: CaseMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)
            .map_err(|e| CorpusError::Json {
                path: meta_path.display().to_string(),
                message: e.to_string(),
            })?;
        let app = AppModel::from_path(&case_dir.join("app.json"))?;
        let trace_text = std::fs::read_to_string(case_dir.join("trace.txt"))?;
        cases.push(CorpusCase {
            name: meta.name,
            app,
            trace_text,
            expected_reproducible: meta.expected_reproducible,
            notes: meta.notes,
        });
    }
    Ok(cases)
}

// ---------------------------------------------------------------------------
// Exhaustive search oracle
// ---------------------------------------------------------------------------

/// Fewest interactions from launch to the target crash, by breadth-first search over
/// exact session states (page, guard-relevant history, back stack). `None` when the
/// crash is unreachable within `max_depth` actions.
pub fn shortest_crash_path(
    app: &AppModel,
    target: &CrashSignature,
    max_depth: u32,
) -> Option<u32> {
    let meta = app.metadata();
    let relevant: BTreeSet<GuardEvent> = app
        .transitions
        .iter()
        .flat_map(|t| t.guard.iter().cloned())
        .collect();

    let session = start_session(app, 0).ok()?;
    let mut queue = VecDeque::new();
    queue.push_back((session, 0u32, BTreeSet::<GuardEvent>::new(), Vec::<PageId>::new()));
    let mut seen: HashSet<(PageId, Vec<GuardEvent>, Vec<PageId>)> = HashSet::new();

    while let Some((session, depth, sat, stack)) = queue.pop_front() {
        if depth >= max_depth {
            continue;
        }
        let Ok((page, interactables)) = session.observe() else {
            continue;
        };
        let sig = (
            page.page_id.clone(),
            sat.iter().cloned().collect::<Vec<_>>(),
            stack.clone(),
        );
        if !seen.insert(sig) {
            continue;
        }
        for widget in &interactables {
            for action in widget.actions() {
                let mut next = session.clone();
                let Ok(event) = next.perform(&widget.widget_id, action) else {
                    continue;
                };
                match event.kind {
                    SessionEventKind::Crashed => {
                        let text = event.crash_trace.expect("crash carries trace");
                        if let Ok(observed) = parse_trace(&RawTrace::new(text), &meta) {
                            if signature_matches(&observed, target) {
                                return Some(depth + 1);
                            }
                        }
                    }
                    SessionEventKind::LeftApp => {}
                    SessionEventKind::PageChanged | SessionEventKind::NoChange => {
                        let ev = GuardEvent {
                            page: page.page_id.clone(),
                            widget: widget.widget_id.clone(),
                            action,
                        };
                        let mut sat2 = sat.clone();
                        if relevant.contains(&ev) {
                            sat2.insert(ev);
                        }
                        let stack2 = next_stack(&stack, &event.kind, next.current_page_id());
                        queue.push_back((next, depth + 1, sat2, stack2));
                    }
                }
            }
        }
    }
    None
}

fn next_stack(stack: &[PageId], kind: &SessionEventKind, current: &PageId) -> Vec<PageId> {
    // Track the page stack only as deep as the default back behavior can see.
    let mut s = stack.to_vec();
    if *kind == SessionEventKind::PageChanged {
        if s.last() == Some(current) {
            // A pop: default back moved us up one level.
            s.pop();
        } else {
            s.push(current.clone());
        }
    }
    s.truncate(16);
    s
}

/// Aggregate facts about a corpus.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub cases: usize,
    pub solvable: usize,
    /// Oracle depth per case; `None` for unreachable crashes.
    pub depth_by_case: BTreeMap<String, Option<u32>>,
    /// Mean interactable widgets per page, synthetic back widget included.
    pub mean_interactables: f64,
    pub depths_covered: BTreeSet<u32>,
}

pub fn corpus_stats(cases: &[CorpusCase]) -> CorpusStats {
    let mut depth_by_case = BTreeMap::new();
    let mut depths_covered = BTreeSet::new();
    let mut pages = 0usize;
    let mut widgets = 0usize;
    let mut solvable = 0usize;
    for case in cases {
        let target = case.target().expect("corpus traces parse");
        let depth = shortest_crash_path(&case.app, &target, 12);
        if let Some(d) = depth {
            depths_covered.insert(d);
            solvable += 1;
        }
        depth_by_case.insert(case.name.clone(), depth);
        for page in &case.app.pages {
            pages += 1;
            widgets += page.interactables().len();
        }
    }
    CorpusStats {
        cases: cases.len(),
        solvable,
        depth_by_case,
        mean_interactables: widgets as f64 / pages.max(1) as f64,
        depths_covered,
    }
}

// ---------------------------------------------------------------------------
// Fixture builders
// ---------------------------------------------------------------------------

fn slug(label: &str) -> String {
    let mut s = String::from("w_");
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    s.trim_end_matches('_').to_string()
}

fn btn(label: &str) -> WidgetSpec {
    WidgetSpec {
        widget_id: WidgetId(slug(label)),
        widget_class: WidgetClass::TextLike,
        text: label.to_string(),
        content_description: String::new(),
        resource_id: String::new(),
        nearby_text: String::new(),
        sibling_text: String::new(),
        child_text: String::new(),
        clickable: true,
        long_clickable: false,
        container_group: String::new(),
    }
}

fn btn_in(label: &str, group: &str) -> WidgetSpec {
    WidgetSpec {
        container_group: group.to_string(),
        ..btn(label)
    }
}

fn long_btn(label: &str) -> WidgetSpec {
    WidgetSpec {
        clickable: false,
        long_clickable: true,
        ..btn(label)
    }
}

fn icon(id: &str, nearby: &str) -> WidgetSpec {
    WidgetSpec {
        widget_id: WidgetId(id.to_string()),
        widget_class: WidgetClass::IconLike,
        text: String::new(),
        content_description: String::new(),
        resource_id: String::new(),
        nearby_text: nearby.to_string(),
        sibling_text: String::new(),
        child_text: String::new(),
        clickable: true,
        long_clickable: false,
        container_group: String::new(),
    }
}

fn input_box(label: &str) -> WidgetSpec {
    WidgetSpec {
        widget_id: WidgetId(slug(label)),
        widget_class: WidgetClass::Input,
        text: label.to_string(),
        content_description: String::new(),
        resource_id: String::new(),
        nearby_text: String::new(),
        sibling_text: String::new(),
        child_text: String::new(),
        clickable: false,
        long_clickable: false,
        container_group: String::new(),
    }
}

fn page(id: &str, activity: &str, kind: PageType, widgets: Vec<WidgetSpec>) -> PageSpec {
    PageSpec {
        page_id: PageId(id.to_string()),
        activity_name: activity.to_string(),
        kind,
        widgets,
    }
}

fn nav(from: &str, widget_label: &str, to: &str) -> TransitionSpec {
    TransitionSpec {
        from_page: PageId(from.to_string()),
        widget: WidgetId(slug(widget_label)),
        action: Action::Tap,
        guard: vec![],
        invoked_apis: vec![],
        outcome: OutcomeSpec::NextPage(PageId(to.to_string())),
    }
}

fn nav_widget(from: &str, widget_id: &str, to: &str) -> TransitionSpec {
    TransitionSpec {
        from_page: PageId(from.to_string()),
        widget: WidgetId(widget_id.to_string()),
        action: Action::Tap,
        guard: vec![],
        invoked_apis: vec![],
        outcome: OutcomeSpec::NextPage(PageId(to.to_string())),
    }
}

fn crash_on(
    from: &str,
    widget_label: &str,
    action: Action,
    crash: &str,
    apis: &[&str],
) -> TransitionSpec {
    TransitionSpec {
        from_page: PageId(from.to_string()),
        widget: WidgetId(slug(widget_label)),
        action,
        guard: vec![],
        invoked_apis: apis.iter().map(|s| s.to_string()).collect(),
        outcome: OutcomeSpec::Crash(CrashId(crash.to_string())),
    }
}

fn out_of_app(from: &str, widget_label: &str) -> TransitionSpec {
    TransitionSpec {
        from_page: PageId(from.to_string()),
        widget: WidgetId(slug(widget_label)),
        action: Action::Tap,
        guard: vec![],
        invoked_apis: vec![],
        outcome: OutcomeSpec::OutOfApp,
    }
}

/// Crash template: innermost API frame, a page lifecycle frame, framework tail.
fn crash_template(
    exception: &str,
    message: &str,
    package: &str,
    frames: &[(&str, &str)],
) -> String {
    let mut t = if message.is_empty() {
        format!("{exception}\n")
    } else {
        format!("{exception}: {message}\n")
    };
    for (class_rel, method) in frames {
        let simple = class_rel.rsplit('.').next().unwrap_or(class_rel);
        t.push_str(&format!(
            "    at {package}.{class_rel}.{method}({simple}.java:{{line}})\n"
        ));
    }
    t.push_str("    at android.view.View.performClick(View.java:7448)\n");
    t.push_str("    at android.os.Handler.handleCallback(Handler.java:938)\n");
    t.push_str("    at android.os.Looper.loop(Looper.java:223)\n");
    t
}

fn render_target_trace(template: &str) -> String {
    template.replace("{line}", "99")
}

// ---------------------------------------------------------------------------
// Themed chain fixtures
// ---------------------------------------------------------------------------

struct ChainLink {
    page_id: &'static str,
    activity: &'static str,
    kind: PageType,
    enter_label: &'static str,
}

struct ChainTheme {
    name: &'static str,
    package: &'static str,
    exception: &'static str,
    message: &'static str,
    links: Vec<ChainLink>,
    crash_widget: &'static str,
    crash_action: Action,
    /// Innermost frame: package-relative class path plus method.
    api_class: &'static str,
    api_method: &'static str,
    /// Lifecycle method on the crash page's activity, second app frame.
    lifecycle: &'static str,
    red_herrings: &'static [&'static str],
    distractors: &'static [&'static str],
    extra_activities: &'static [&'static str],
    website_trap: bool,
}

const fn general(
    page_id: &'static str,
    activity: &'static str,
    enter_label: &'static str,
) -> ChainLink {
    ChainLink {
        page_id,
        activity,
        kind: PageType::General,
        enter_label,
    }
}

fn chain_case(theme: &ChainTheme) -> CorpusCase {
    let depth = theme.links.len() + 1;
    let crash_link = theme.links.last().expect("chain has pages");
    let crash_activity = crash_link.activity;

    let mut activities: Vec<String> = vec!["MainActivity".into()];
    for l in &theme.links {
        if !activities.contains(&l.activity.to_string()) {
            activities.push(l.activity.to_string());
        }
    }
    activities.push("AboutActivity".into());
    for a in theme.extra_activities {
        if !activities.contains(&a.to_string()) {
            activities.push(a.to_string());
        }
    }

    let mut pages = Vec::new();
    let mut transitions = Vec::new();
    let mut pool = theme.distractors.iter().cycle();
    // Distinct labels within one page; across pages the pool cycles and repeats.
    let mut take = |n: usize, pool: &mut dyn Iterator<Item = &&'static str>| -> Vec<WidgetSpec> {
        let mut used = HashSet::new();
        let mut out = Vec::new();
        while out.len() < n.min(theme.distractors.len()) {
            let label = pool.next().expect("cycled pool");
            if used.insert(*label) {
                out.push(btn(label));
            }
        }
        out
    };

    // Entry page plus every link page except the crash page get a forward widget
    // placed after a couple of distractors.
    let hops: Vec<(&str, PageType, &str)> =
        std::iter::once(("main", PageType::General, "MainActivity"))
            .chain(
                theme.links[..theme.links.len() - 1]
                    .iter()
                    .map(|l| (l.page_id, l.kind, l.activity)),
            )
            .collect();
    for (i, (page_id, kind, activity)) in hops.iter().enumerate() {
        let forward = &theme.links[i];
        let n_front = 3 + (i % 2);
        let n_back_side = 2 + ((i + depth) % 2);
        let mut drawn = take(n_front + n_back_side, &mut pool);
        let tail = drawn.split_off(n_front.min(drawn.len()));
        let mut widgets = drawn;
        widgets.push(btn(forward.enter_label));
        widgets.extend(tail);
        if i == 0 {
            widgets.push(btn("about"));
            if theme.website_trap {
                widgets.push(btn("visit website"));
            }
        }
        if *kind == PageType::Menu {
            for w in widgets.iter_mut() {
                w.container_group = "list".into();
            }
        }
        pages.push(page(page_id, activity, *kind, widgets));
        transitions.push(nav(page_id, forward.enter_label, forward.page_id));
    }

    // Crash page: red herrings around the crash widget.
    let crash_widget_spec = match theme.crash_action {
        Action::TypeText => input_box(theme.crash_widget),
        Action::LongTap => long_btn(theme.crash_widget),
        _ => btn(theme.crash_widget),
    };
    let mut widgets: Vec<WidgetSpec> = theme.red_herrings.iter().map(|rh| btn(rh)).collect();
    widgets.insert(widgets.len().min(1), crash_widget_spec);
    widgets.extend(take(2, &mut pool));
    pages.push(page(
        crash_link.page_id,
        crash_activity,
        crash_link.kind,
        widgets,
    ));

    // Shared about page off the entry.
    pages.push(page(
        "about",
        "AboutActivity",
        PageType::General,
        vec![btn("version"), btn("credits")],
    ));
    transitions.push(nav("main", "about", "about"));
    if theme.website_trap {
        transitions.push(out_of_app("main", "visit website"));
    }

    let api_simple = format!(
        "{}.{}",
        theme.api_class.rsplit('.').next().unwrap_or(theme.api_class),
        theme.api_method
    );
    transitions.push(crash_on(
        crash_link.page_id,
        theme.crash_widget,
        theme.crash_action,
        "c_target",
        &[api_simple.as_str()],
    ));

    let template = crash_template(
        theme.exception,
        theme.message,
        theme.package,
        &[
            (theme.api_class, theme.api_method),
            (crash_activity, theme.lifecycle),
        ],
    );
    let trace_text = render_target_trace(&template);

    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: theme.package.to_string(),
        activity_names: activities,
        entry_page: PageId("main".into()),
        pages,
        transitions,
        crashes: BTreeMap::from([(CrashId("c_target".into()), template)]),
    };
    CorpusCase {
        name: theme.name.to_string(),
        app,
        trace_text,
        expected_reproducible: true,
        notes: format!("depth-{depth} chain"),
    }
}

// ---------------------------------------------------------------------------
// Built-in cases
// ---------------------------------------------------------------------------

fn focus_search() -> CorpusCase {
    let package = "org.nightjar.focus";
    let template = crash_template(
        "java.lang.IllegalStateException",
        "Fragment InstalledSearchEnginesSettingsFragment not attached to a context.",
        package,
        &[
            ("search.SearchEngineListPreference", "refetchSearchEngines"),
            ("fragment.InstalledSearchEnginesSettingsFragment", "onResume"),
        ],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec![
            "IntroActivity".into(),
            "MainActivity".into(),
            "SettingActivity".into(),
            "SearchSettingsActivity".into(),
            "AboutActivity".into(),
            "HelpActivity".into(),
            "RightsActivity".into(),
            "LocaleActivity".into(),
        ],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![
                    input_box("Search or enter address"),
                    icon("w_more_options", "More options"),
                    btn("shortcuts"),
                    btn("history"),
                ],
            ),
            page(
                "menu_main",
                "MainActivity",
                PageType::Menu,
                vec![
                    btn("what's new"),
                    btn("help"),
                    btn_in("settings", "list"),
                    btn("add to home screen"),
                ],
            ),
            page(
                "settings",
                "SettingActivity",
                PageType::General,
                vec![
                    btn("general"),
                    btn("privacy and security"),
                    btn("search"),
                    btn("advanced"),
                    btn("mozilla nightjar"),
                ],
            ),
            page(
                "search_settings",
                "SearchSettingsActivity",
                PageType::General,
                vec![
                    btn("autocomplete"),
                    btn("installed search engines"),
                    btn("add url hints"),
                ],
            ),
            page(
                "engines",
                "InstalledSearchEnginesSettingsFragment",
                PageType::General,
                vec![
                    btn("restore defaults"),
                    btn("Search engine"),
                    btn("add engine"),
                    btn("autocomplete"),
                ],
            ),
        ],
        transitions: vec![
            nav_widget("main", "w_more_options", "menu_main"),
            nav("menu_main", "settings", "settings"),
            nav("settings", "search", "search_settings"),
            nav("search_settings", "installed search engines", "engines"),
            crash_on(
                "engines",
                "Search engine",
                Action::Tap,
                "c_engines",
                &["SearchEngineListPreference.refetchSearchEngines"],
            ),
        ],
        crashes: BTreeMap::from([(CrashId("c_engines".into()), template.clone())]),
    };
    CorpusCase {
        name: "focus_search".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "depth-5 chain through a menu page to a fragment crash page".into(),
    }
}

fn export_tap() -> CorpusCase {
    let package = "com.quilljot.notes";
    let template = crash_template(
        "java.lang.NullPointerException",
        "Attempt to read from null array",
        package,
        &[("io.ExportManager", "writeAllNotes"), ("MainActivity", "onMenuItemClick")],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "EditorActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![page(
            "main",
            "MainActivity",
            PageType::General,
            vec![
                btn("recent"),
                btn("new note"),
                btn("export notes"),
                btn("archive"),
                btn("tags"),
                btn("trash"),
            ],
        )],
        transitions: vec![crash_on(
            "main",
            "export notes",
            Action::Tap,
            "c_export",
            &["ExportManager.writeAllNotes"],
        )],
        crashes: BTreeMap::from([(CrashId("c_export".into()), template.clone())]),
    };
    CorpusCase {
        name: "export_tap".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "depth-1: crash widget on the entry page with an informative name".into(),
    }
}

fn unnamed_widget() -> CorpusCase {
    let package = "io.pixelbin.gallery";
    let template = crash_template(
        "java.lang.ArrayIndexOutOfBoundsException",
        "length=0; index=0",
        package,
        &[("MainActivity", "onOptionsItemSelected")],
    );
    let mystery = WidgetSpec {
        widget_id: WidgetId("w_mystery".into()),
        widget_class: WidgetClass::IconLike,
        text: String::new(),
        content_description: String::new(),
        resource_id: String::new(),
        nearby_text: String::new(),
        sibling_text: String::new(),
        child_text: String::new(),
        clickable: true,
        long_clickable: false,
        container_group: String::new(),
    };
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "ViewerActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![page(
            "main",
            "MainActivity",
            PageType::General,
            vec![
                btn("camera roll"),
                btn("favorites"),
                mystery,
                btn("albums overview"),
                btn("slideshow"),
            ],
        )],
        transitions: vec![TransitionSpec {
            from_page: PageId("main".into()),
            widget: WidgetId("w_mystery".into()),
            action: Action::Tap,
            guard: vec![],
            invoked_apis: vec!["MainActivity.onOptionsItemSelected".into()],
            outcome: OutcomeSpec::Crash(CrashId("c_mystery".into())),
        }],
        crashes: BTreeMap::from([(CrashId("c_mystery".into()), template.clone())]),
    };
    CorpusCase {
        name: "unnamed_widget".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "depth-1: the crash widget has no name, guidance scores it zero".into(),
    }
}

fn framework_crash() -> CorpusCase {
    let package = "com.nava.player";
    let template = "\
android.view.WindowManager$BadTokenException: Unable to add window -- token null is not valid
    at android.view.ViewRootImpl.setView(ViewRootImpl.java:{line})
    at android.view.WindowManagerGlobal.addView(WindowManagerGlobal.java:{line})
    at android.widget.Toast$TN.handleShow(Toast.java:{line})
    at android.os.Handler.handleCallback(Handler.java:938)
"
    .to_string();
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "PlayerActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![page(
            "main",
            "MainActivity",
            PageType::General,
            vec![
                btn("now playing"),
                btn("cast to device"),
                btn("queue"),
                btn("sleep timer"),
            ],
        )],
        transitions: vec![crash_on("main", "cast to device", Action::Tap, "c_cast", &[])],
        crashes: BTreeMap::from([(CrashId("c_cast".into()), template.clone())]),
    };
    CorpusCase {
        name: "framework_crash".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "degraded: no app frames and no crash page in the trace".into(),
    }
}

fn disk_cache() -> CorpusCase {
    let package = "io.keeper.notes";
    let template = crash_template(
        "java.io.IOException",
        "disk quota exceeded",
        package,
        &[("cache.DiskCache", "evictAll"), ("cache.CacheManager", "trimToSize")],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "StorageActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![
                    btn("notes"),
                    btn("notebooks"),
                    btn("storage"),
                    btn("reminders"),
                    btn("search notes"),
                ],
            ),
            page(
                "storage",
                "StorageActivity",
                PageType::General,
                vec![
                    btn("usage"),
                    btn("clear cache"),
                    btn("auto sync"),
                    btn("compact database"),
                ],
            ),
        ],
        transitions: vec![
            nav("main", "storage", "storage"),
            crash_on(
                "storage",
                "clear cache",
                Action::Tap,
                "c_evict",
                &["DiskCache.evictAll"],
            ),
        ],
        crashes: BTreeMap::from([(CrashId("c_evict".into()), template.clone())]),
    };
    CorpusCase {
        name: "disk_cache".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "degraded: the trace names APIs but no activity or fragment".into(),
    }
}

fn wide_menu() -> CorpusCase {
    let package = "org.memodeck.cards";
    let template = crash_template(
        "java.util.ConcurrentModificationException",
        "",
        package,
        &[("deck.DeckShuffler", "shuffleAllCards"), ("CardBrowserActivity", "onItemLongClick")],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec![
            "MainActivity".into(),
            "CardBrowserActivity".into(),
            "StatsActivity".into(),
        ],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![
                    btn("new deck"),
                    btn("open deck"),
                    btn("download decks"),
                    btn("card browser"),
                    btn("statistics"),
                    btn("backup"),
                    btn("restore backup"),
                    btn("night mode"),
                    btn("help center"),
                    btn("exit"),
                ],
            ),
            page(
                "cards",
                "CardBrowserActivity",
                PageType::General,
                vec![
                    btn("deck list"),
                    long_btn("shuffle all"),
                    btn("sort cards"),
                    btn("filter"),
                    btn("preview card"),
                ],
            ),
        ],
        transitions: vec![
            nav("main", "card browser", "cards"),
            out_of_app("main", "exit"),
            crash_on(
                "cards",
                "shuffle all",
                Action::LongTap,
                "c_shuffle",
                &["DeckShuffler.shuffleAllCards"],
            ),
        ],
        crashes: BTreeMap::from([(CrashId("c_shuffle".into()), template.clone())]),
    };
    CorpusCase {
        name: "wide_menu".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "depth-2 with a wide entry page and a long-tap crash".into(),
    }
}

fn trash_decoy() -> CorpusCase {
    let package = "org.fmgr.files";
    let target_template = crash_template(
        "java.lang.NullPointerException",
        "null bin entry",
        package,
        &[("trash.TrashBin", "purgeAll"), ("TrashActivity", "onActionClick")],
    );
    let decoy_template = crash_template(
        "java.lang.ArrayIndexOutOfBoundsException",
        "length=2; index=4",
        package,
        &[("zip.Compressor", "packSelection"), ("TrashActivity", "onActionClick")],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "TrashActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![
                    btn("internal storage"),
                    btn("sd card"),
                    btn("trash"),
                    btn("bookmarks"),
                    btn("ftp server"),
                ],
            ),
            page(
                "trash_page",
                "TrashActivity",
                PageType::General,
                vec![
                    btn("restore selection"),
                    btn("compress selection"),
                    btn("purge trash"),
                    btn("sort by size"),
                ],
            ),
        ],
        transitions: vec![
            nav("main", "trash", "trash_page"),
            crash_on(
                "trash_page",
                "purge trash",
                Action::Tap,
                "c_purge",
                &["TrashBin.purgeAll"],
            ),
            crash_on(
                "trash_page",
                "compress selection",
                Action::Tap,
                "c_decoy",
                &["Compressor.packSelection"],
            ),
        ],
        crashes: BTreeMap::from([
            (CrashId("c_purge".into()), target_template.clone()),
            (CrashId("c_decoy".into()), decoy_template),
        ]),
    };
    CorpusCase {
        name: "trash_decoy".into(),
        app,
        trace_text: render_target_trace(&target_template),
        expected_reproducible: true,
        notes: "depth-2 with a decoy crash next to the target".into(),
    }
}

fn scanner_guard() -> CorpusCase {
    let package = "dev.bluekit.scan";
    let template = crash_template(
        "java.lang.SecurityException",
        "Need BLUETOOTH_SCAN permission",
        package,
        &[("ble.BluetoothScanner", "startDiscovery"), ("ScannerActivity", "onScanClick")],
    );
    let transitions = vec![
        nav("main", "scanner", "scanner"),
        // Without the toggle the scan button is a dead tap.
        TransitionSpec {
            from_page: PageId("scanner".into()),
            widget: WidgetId(slug("start scan")),
            action: Action::Tap,
            guard: vec![],
            invoked_apis: vec![],
            outcome: OutcomeSpec::NoOp,
        },
        TransitionSpec {
            from_page: PageId("scanner".into()),
            widget: WidgetId(slug("start scan")),
            action: Action::Tap,
            guard: vec![GuardEvent {
                page: PageId("scanner".into()),
                widget: WidgetId(slug("enable bluetooth scanner")),
                action: Action::Tap,
            }],
            invoked_apis: vec!["BluetoothScanner.startDiscovery".into()],
            outcome: OutcomeSpec::Crash(CrashId("c_scan".into())),
        },
    ];
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "ScannerActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![
                    btn("devices"),
                    btn("scanner"),
                    btn("pairing codes"),
                    btn("signal meter"),
                    btn("log viewer"),
                ],
            ),
            page(
                "scanner",
                "ScannerActivity",
                PageType::General,
                vec![
                    btn("enable bluetooth scanner"),
                    btn("start scan"),
                    btn("scan interval"),
                    btn("filter duplicates"),
                ],
            ),
        ],
        transitions,
        crashes: BTreeMap::from([(CrashId("c_scan".into()), template.clone())]),
    };
    CorpusCase {
        name: "scanner_guard".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "depth-3: the crash needs an event combination (toggle, then scan)".into(),
    }
}

fn theme_preview_loop() -> CorpusCase {
    let package = "app.lumen.theme";
    let template = crash_template(
        "java.lang.IllegalArgumentException",
        "Unknown palette: dark",
        package,
        &[("render.ThemePainter", "paintPreview"), ("MainActivity", "onPreviewClick")],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec!["MainActivity".into(), "DisplayActivity".into()],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![
                    btn("gallery"),
                    btn("preview theme"),
                    btn("display settings"),
                    btn("wallpapers"),
                    btn("icon packs"),
                ],
            ),
            page(
                "display",
                "DisplayActivity",
                PageType::General,
                vec![btn("dark theme"), btn("font size"), btn("grid density")],
            ),
        ],
        transitions: vec![
            nav("main", "display settings", "display"),
            TransitionSpec {
                from_page: PageId("main".into()),
                widget: WidgetId(slug("preview theme")),
                action: Action::Tap,
                guard: vec![],
                invoked_apis: vec![],
                outcome: OutcomeSpec::NoOp,
            },
            TransitionSpec {
                from_page: PageId("main".into()),
                widget: WidgetId(slug("preview theme")),
                action: Action::Tap,
                guard: vec![GuardEvent {
                    page: PageId("display".into()),
                    widget: WidgetId(slug("dark theme")),
                    action: Action::Tap,
                }],
                invoked_apis: vec!["ThemePainter.paintPreview".into()],
                outcome: OutcomeSpec::Crash(CrashId("c_preview".into())),
            },
        ],
        crashes: BTreeMap::from([(CrashId("c_preview".into()), template.clone())]),
    };
    CorpusCase {
        name: "theme_preview_loop".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: true,
        notes: "depth-4: a guard armed on a side page makes the loop load-bearing".into(),
    }
}

fn precondition_crash() -> CorpusCase {
    let package = "net.molla.reader";
    let template = crash_template(
        "java.lang.IllegalStateException",
        "night palette missing",
        package,
        &[("render.NightPalette", "applyNightMode"), ("ReaderActivity", "onModeClick")],
    );
    let app = AppModel {
        schema_version: FIXTURE_SCHEMA_VERSION,
        package_name: package.to_string(),
        activity_names: vec![
            "MainActivity".into(),
            "ReaderActivity".into(),
            "LabActivity".into(),
        ],
        entry_page: PageId("main".into()),
        pages: vec![
            page(
                "main",
                "MainActivity",
                PageType::General,
                vec![btn("library"), btn("open reader"), btn("bookmarks"), btn("feeds")],
            ),
            page(
                "reader",
                "ReaderActivity",
                PageType::General,
                vec![btn("night mode"), btn("font"), btn("margins"), btn("share quote")],
            ),
            // Never reachable: no transition leads here, so the guard below can
            // never be satisfied.
            page(
                "lab",
                "LabActivity",
                PageType::General,
                vec![btn("enable experiments")],
            ),
        ],
        transitions: vec![
            nav("main", "open reader", "reader"),
            TransitionSpec {
                from_page: PageId("reader".into()),
                widget: WidgetId(slug("night mode")),
                action: Action::Tap,
                guard: vec![],
                invoked_apis: vec![],
                outcome: OutcomeSpec::NoOp,
            },
            TransitionSpec {
                from_page: PageId("reader".into()),
                widget: WidgetId(slug("night mode")),
                action: Action::Tap,
                guard: vec![GuardEvent {
                    page: PageId("lab".into()),
                    widget: WidgetId(slug("enable experiments")),
                    action: Action::Tap,
                }],
                invoked_apis: vec!["NightPalette.applyNightMode".into()],
                outcome: OutcomeSpec::Crash(CrashId("c_night".into())),
            },
        ],
        crashes: BTreeMap::from([(CrashId("c_night".into()), template.clone())]),
    };
    CorpusCase {
        name: "precondition_crash".into(),
        app,
        trace_text: render_target_trace(&template),
        expected_reproducible: false,
        notes: "unreproducible: the guarding precondition is unreachable".into(),
    }
}

fn chain_themes() -> Vec<ChainTheme> {
    vec![
        ChainTheme {
            name: "radar_layers",
            package: "org.skycast.weather",
            exception: "java.lang.NullPointerException",
            message: "null tile bitmap",
            links: vec![
                general("layers", "MapLayersActivity", "map layers"),
                general("radar", "RadarLayersActivity", "radar layers"),
            ],
            crash_widget: "refresh overlays",
            crash_action: Action::Tap,
            api_class: "render.TileComposer",
            api_method: "refreshRadarOverlays",
            lifecycle: "onLayerClick",
            red_herrings: &["radar legend", "layer opacity"],
            distractors: &["alerts", "humidity", "sunrise times", "wind speed", "stations", "units"],
            extra_activities: &["ForecastActivity", "AlertsActivity"],
            website_trap: false,
        },
        ChainTheme {
            name: "signature_editor",
            package: "com.plume.mail",
            exception: "java.lang.StringIndexOutOfBoundsException",
            message: "length=0",
            links: vec![
                general("settings", "SettingsActivity", "settings"),
                general("signature", "SignatureEditorActivity", "signature editor"),
            ],
            crash_widget: "signature text",
            crash_action: Action::TypeText,
            api_class: "compose.SignatureRenderer",
            api_method: "renderSignatureText",
            lifecycle: "onTextChanged",
            red_herrings: &["editor font", "signature templates"],
            distractors: &["inbox", "folders", "swipe gestures", "notifications", "accounts", "filters"],
            extra_activities: &["InboxActivity", "ComposeActivity"],
            website_trap: false,
        },
        ChainTheme {
            name: "album_sort",
            package: "io.lumo.gallery",
            exception: "java.lang.IllegalArgumentException",
            message: "comparator violates contract",
            links: vec![
                general("albums", "AlbumsActivity", "albums"),
                general("album_view", "AlbumViewActivity", "album view"),
                general("sort", "AlbumSortOptionsActivity", "sort options"),
            ],
            crash_widget: "sort by date taken",
            crash_action: Action::Tap,
            api_class: "sort.AlbumSorter",
            api_method: "sortByDateTaken",
            lifecycle: "onOptionClick",
            red_herrings: &["sort direction", "option presets"],
            distractors: &["camera roll", "sharing", "slideshow", "import", "duplicates", "places"],
            extra_activities: &["ViewerActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "week_start",
            package: "app.tempus.cal",
            exception: "java.lang.ArrayIndexOutOfBoundsException",
            message: "length=7; index=7",
            links: vec![
                general("settings", "SettingsActivity", "calendar settings"),
                general("cal_prefs", "CalendarPreferencesActivity", "calendar preferences"),
                ChainLink {
                    page_id: "week_dialog",
                    activity: "CalendarPreferencesActivity",
                    kind: PageType::Dialog,
                    enter_label: "start of week",
                },
            ],
            crash_widget: "monday first",
            crash_action: Action::Tap,
            api_class: "prefs.WeekStartPicker",
            api_method: "applyWeekStart",
            lifecycle: "onPreferenceClick",
            red_herrings: &["sunday first", "saturday first"],
            distractors: &["agenda", "invitations", "time zones", "widgets", "import ics", "holidays"],
            extra_activities: &["AgendaActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "download_queue",
            package: "org.podkit.app",
            exception: "java.lang.IllegalStateException",
            message: "queue is draining",
            links: vec![
                general("downloads", "DownloadsActivity", "downloads"),
                general("dl_settings", "DownloadSettingsActivity", "download settings"),
                general("queue", "DownloadQueueActivity", "download queue"),
                general("limits", "DownloadQueueLimitsActivity", "queue limits"),
            ],
            crash_widget: "refresh stalled downloads",
            crash_action: Action::Tap,
            api_class: "queue.QueueRefresher",
            api_method: "refreshStalledDownloads",
            lifecycle: "onLimitClick",
            red_herrings: &["daily limit", "queue size"],
            distractors: &["subscriptions", "discover", "playback speed", "episodes", "auto delete", "storage usage"],
            extra_activities: &["PlayerActivity", "DiscoverActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "offline_regions",
            package: "net.atlas.maps",
            exception: "java.lang.NullPointerException",
            message: "region store closed",
            links: vec![
                ChainLink {
                    page_id: "menu_main",
                    activity: "MainActivity",
                    kind: PageType::Menu,
                    enter_label: "more options",
                },
                general("offline", "OfflineAreasActivity", "offline areas"),
                general("regions", "OfflineRegionManagerActivity", "manage regions"),
                general("region_detail", "OfflineRegionDetailActivity", "region details"),
            ],
            crash_widget: "delete region",
            crash_action: Action::Tap,
            api_class: "region.RegionStore",
            api_method: "deleteOfflineRegion",
            lifecycle: "onDetailClick",
            red_herrings: &["region size", "detail zoom"],
            distractors: &["bookmarks", "share location", "traffic", "satellite", "compass", "routes"],
            extra_activities: &["NavigationActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "font_kerning",
            package: "dev.folio.reader",
            exception: "java.lang.UnsupportedOperationException",
            message: "kerning table is immutable",
            links: vec![
                general("settings", "SettingsActivity", "settings"),
                general("display", "DisplaySettingsActivity", "display settings"),
                general("typo", "TypographyActivity", "typography"),
                general("font", "FontOptionsActivity", "font options"),
                general("kern", "FontKerningSettingsActivity", "font kerning settings"),
            ],
            crash_widget: "adjust kerning",
            crash_action: Action::Tap,
            api_class: "text.GlyphMeasurer",
            api_method: "adjustKerningTable",
            lifecycle: "onKerningClick",
            red_herrings: &["kerning presets", "settings help"],
            distractors: &["library", "collections", "highlights", "dictionaries", "page turn", "brightness"],
            extra_activities: &["LibraryActivity", "ShelfActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "notification_sound",
            package: "im.pigeon.chat",
            exception: "java.lang.SecurityException",
            message: "no READ_MEDIA permission",
            links: vec![
                general("settings", "SettingsActivity", "settings"),
                general("notif", "NotificationSettingsActivity", "notification settings"),
                general("channels", "NotificationChannelsActivity", "notification channels"),
                general("channel", "ChannelDetailActivity", "message channel"),
                general("sound", "ChannelNotificationSoundActivity", "notification sound"),
            ],
            crash_widget: "preview sound",
            crash_action: Action::Tap,
            api_class: "audio.SoundPreviewPlayer",
            api_method: "previewNotificationSound",
            lifecycle: "onSoundClick",
            red_herrings: &["sound volume", "channel badge"],
            distractors: &["chats", "calls", "stories", "contacts", "stickers", "backup"],
            extra_activities: &["CallsActivity", "ContactsActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "site_permissions",
            package: "org.emberfox.browser",
            exception: "java.lang.IllegalStateException",
            message: "permission store not initialized",
            links: vec![
                ChainLink {
                    page_id: "menu_b",
                    activity: "MainActivity",
                    kind: PageType::Menu,
                    enter_label: "more options",
                },
                general("settings", "SettingsActivity", "settings"),
                general("privacy", "PrivacySettingsActivity", "site privacy"),
                general("sites", "SitePermissionsActivity", "site permissions"),
                general("site", "SitePermissionDetailActivity", "site details"),
                general("camera", "SiteCameraPermissionSettingsActivity", "camera permission"),
            ],
            crash_widget: "reset camera permission",
            crash_action: Action::Tap,
            api_class: "perms.PermissionStore",
            api_method: "resetCameraPermission",
            lifecycle: "onPermissionClick",
            red_herrings: &["permission log", "camera devices"],
            distractors: &["tabs", "downloads", "bookmarks", "reader view", "find in page", "desktop site"],
            extra_activities: &["TabsActivity", "DownloadsActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "timer_burst",
            package: "cam.obscura.app",
            exception: "java.lang.ArithmeticException",
            message: "divide by zero",
            links: vec![
                general("modes", "CaptureModesActivity", "capture modes"),
                general("timer", "TimerModeActivity", "timer mode"),
                general("timer_opts", "TimerOptionsActivity", "timer options"),
                general("burst", "TimerBurstActivity", "burst timer"),
                general("burst_cfg", "TimerBurstConfigActivity", "burst config"),
                general("burst_adv", "TimerBurstAdvancedActivity", "advanced burst"),
            ],
            crash_widget: "start burst capture",
            crash_action: Action::Tap,
            api_class: "capture.BurstScheduler",
            api_method: "startTimedBurstCapture",
            lifecycle: "onBurstClick",
            red_herrings: &["burst spacing", "advanced grid"],
            distractors: &["gallery", "filters", "hdr", "flash", "white balance", "gridlines"],
            extra_activities: &["GalleryActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "preset_editor",
            package: "fm.arpeggio.player",
            exception: "java.lang.IndexOutOfBoundsException",
            message: "band 11 of 10",
            links: vec![
                general("library", "LibraryActivity", "library"),
                general("playlists", "PlaylistsActivity", "playlists"),
                general("playlist", "PlaylistDetailActivity", "playlist detail"),
                general("tools", "PlaylistToolsActivity", "playlist tools"),
                general("eq", "EqualizerActivity", "equalizer"),
                general("presets", "EqualizerPresetsActivity", "equalizer presets"),
                general("editor", "PlaylistEqualizerPresetEditorActivity", "preset editor"),
            ],
            crash_widget: "apply preset",
            crash_action: Action::Tap,
            api_class: "audio.PresetApplier",
            api_method: "applyEqualizerPreset",
            lifecycle: "onEditorClick",
            red_herrings: &["editor bands", "preset name"],
            distractors: &["radio", "podcasts", "sleep timer", "lyrics", "queue", "artists"],
            extra_activities: &["RadioActivity", "NowPlayingActivity"],
            website_trap: true,
        },
        ChainTheme {
            name: "goal_reminder",
            package: "fit.stride.app",
            exception: "java.lang.NullPointerException",
            message: "null ringtone uri",
            links: vec![
                general("profile", "ProfileActivity", "profile"),
                general("goals", "GoalsActivity", "goals"),
                general("goal", "GoalDetailActivity", "goal detail"),
                general("schedule", "GoalScheduleActivity", "goal schedule"),
                general("reminders", "GoalRemindersActivity", "goal reminders"),
                general("reminder", "ReminderDetailActivity", "reminder detail"),
                general("ringtone", "GoalReminderRingtoneActivity", "reminder ringtone"),
            ],
            crash_widget: "play ringtone",
            crash_action: Action::Tap,
            api_class: "alerts.RingtonePlayer",
            api_method: "playReminderRingtone",
            lifecycle: "onRingtoneClick",
            red_herrings: &["ringtone volume", "reminder badge"],
            distractors: &["workouts", "steps", "heart rate", "routes", "badges", "friends"],
            extra_activities: &["WorkoutActivity", "StepsActivity"],
            website_trap: true,
        },
    ]
}

/// Every bundled case, in a stable order.
pub fn builtin_corpus() -> Vec<CorpusCase> {
    let mut cases = vec![
        export_tap(),
        unnamed_widget(),
        framework_crash(),
        wide_menu(),
        disk_cache(),
        trash_decoy(),
        scanner_guard(),
        theme_preview_loop(),
        focus_search(),
        precondition_crash(),
    ];
    cases.extend(chain_themes().iter().map(chain_case));
    cases.sort_by(|a, b| a.name.cmp(&b.name));
    cases
}

/// The bundled case modeled on a browser's search-engine settings crash; used by
/// examples and prompt-fidelity checks.
pub fn focus_case() -> CorpusCase {
    focus_search()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Degradation;

    #[test]
    fn fixtures_validate_and_traces_parse() {
        for case in builtin_corpus() {
            case.app
                .validate()
                .unwrap_or_else(|e| panic!("{}: {e}", case.name));
            let target = case.target().unwrap_or_else(|e| panic!("{}: {e}", case.name));
            assert!(!target.exception_type.is_empty());
        }
    }

    #[test]
    fn degraded_cases_degrade_as_designed() {
        let by_name = |n: &str| {
            builtin_corpus()
                .into_iter()
                .find(|c| c.name == n)
                .expect("case exists")
        };
        let fw = by_name("framework_crash").target().unwrap();
        assert_eq!(
            fw.degradations(),
            vec![Degradation::NoAppFrames, Degradation::NoCrashPage]
        );
        let dc = by_name("disk_cache").target().unwrap();
        assert_eq!(dc.degradations(), vec![Degradation::NoCrashPage]);
        let focus = by_name("focus_search").target().unwrap();
        assert!(focus.degradations().is_empty());
    }

    #[test]
    fn oracle_depths_match_design() {
        let expected: BTreeMap<&str, Option<u32>> = BTreeMap::from([
            ("export_tap", Some(1)),
            ("unnamed_widget", Some(1)),
            ("framework_crash", Some(1)),
            ("wide_menu", Some(2)),
            ("disk_cache", Some(2)),
            ("trash_decoy", Some(2)),
            ("scanner_guard", Some(3)),
            ("radar_layers", Some(3)),
            ("signature_editor", Some(3)),
            ("theme_preview_loop", Some(4)),
            ("album_sort", Some(4)),
            ("week_start", Some(4)),
            ("focus_search", Some(5)),
            ("download_queue", Some(5)),
            ("offline_regions", Some(5)),
            ("font_kerning", Some(6)),
            ("notification_sound", Some(6)),
            ("site_permissions", Some(7)),
            ("timer_burst", Some(7)),
            ("preset_editor", Some(8)),
            ("goal_reminder", Some(8)),
            ("precondition_crash", None),
        ]);
        let stats = corpus_stats(&builtin_corpus());
        for (name, depth) in &stats.depth_by_case {
            assert_eq!(
                expected.get(name.as_str()),
                Some(depth),
                "case {name} has oracle depth {depth:?}"
            );
        }
        assert_eq!(stats.depth_by_case.len(), expected.len());
    }

    #[test]
    fn solvability_flags_match_oracle() {
        for case in builtin_corpus() {
            let target = case.target().unwrap();
            let reachable = shortest_crash_path(&case.app, &target, 12).is_some();
            assert_eq!(
                reachable, case.expected_reproducible,
                "{}: flag disagrees with search",
                case.name
            );
        }
    }

    #[test]
    fn corpus_shape_matches_reported_dataset() {
        let cases = builtin_corpus();
        let stats = corpus_stats(&cases);
        assert!(stats.cases >= 20, "need at least 20 cases, have {}", stats.cases);
        assert!(
            stats.solvable >= 20,
            "need at least 20 solvable, have {}",
            stats.solvable
        );
        let covered: Vec<u32> = stats.depths_covered.iter().copied().collect();
        for d in 1..=8 {
            assert!(covered.contains(&d), "no case with crash depth {d}");
        }
        assert!(
            (stats.mean_interactables - 6.6).abs() <= 0.3,
            "mean interactables per page is {:.2}, want about 6.6",
            stats.mean_interactables
        );
    }

    #[test]
    fn corpus_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let cases = builtin_corpus();
        write_corpus(dir.path(), &cases).unwrap();
        let loaded = load_corpus(dir.path()).unwrap();
        assert_eq!(loaded.len(), cases.len());
        for (a, b) in loaded.iter().zip(cases.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.app, b.app);
            assert_eq!(a.trace_text, b.trace_text);
            assert_eq!(a.expected_reproducible, b.expected_reproducible);
        }
    }
}
