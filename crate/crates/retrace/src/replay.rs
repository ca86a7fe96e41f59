//! Trace minimization and the two replay artifacts.
//!
//! A successful reproduction yields the interaction cache from the last app launch to
//! the crash. Minimization removes looped transitions — whenever the same pre-state
//! recurs, everything between the two occurrences goes — and then proves the result
//! by replaying it on a fresh session. Removing a loop can break a crash whose guard
//! was satisfied inside it, so failed verification restores removed cycles greedily,
//! smallest and earliest first, until the crash fires again.
//!
//! Two artifacts come out of a verified trace: a line-oriented auto-replay script and
//! numbered human-readable steps ("event type + widget name").

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::explore::StateKey;
use crate::sim::{start_session, Action, AppModel, PageId, SessionEventKind, WidgetId};
use crate::trace::{parse_trace, signature_matches, CrashSignature, RawTrace};

/// Where one replayed step landed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StepResult {
    /// Still in the app, at this state.
    State(StateKey),
    /// The step rendered a crash.
    Crashed,
}

/// One interaction of a reproduction trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub pre_state: StateKey,
    pub pre_page: PageId,
    pub widget: WidgetId,
    pub display_name: String,
    pub action: Action,
    pub result: StepResult,
}

/// The interaction cache from app launch to crash, raw and minimized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproductionTrace {
    pub raw_steps: Vec<TraceStep>,
    pub minimized_steps: Vec<TraceStep>,
    pub target: CrashSignature,
}

impl ReproductionTrace {
    /// A fresh trace whose minimized side simply mirrors the raw steps.
    pub fn unminimized(raw_steps: Vec<TraceStep>, target: CrashSignature) -> Self {
        ReproductionTrace {
            minimized_steps: raw_steps.clone(),
            raw_steps,
            target,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("minimization failed: even the raw trace no longer reproduces the crash")]
    MinimizationFailed,
    #[error("bad script at line {line}: {message}")]
    BadScript { line: usize, message: String },
    #[error("replay failed at step {step}: {message}")]
    ReplayFailed { step: usize, message: String },
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Replays `steps` on a fresh session; true iff every step executes, nothing
/// terminates early, and the final step crashes with the target signature.
pub fn replay_reproduces(steps: &[TraceStep], app: &AppModel, target: &CrashSignature) -> bool {
    if steps.is_empty() {
        return false;
    }
    let Ok(mut session) = start_session(app, 0) else {
        return false;
    };
    let meta = app.metadata();
    let last = steps.len() - 1;
    for (i, step) in steps.iter().enumerate() {
        let Ok(event) = session.perform(&step.widget, step.action) else {
            return false;
        };
        match event.kind {
            SessionEventKind::Crashed => {
                if i != last {
                    return false;
                }
                let Some(text) = event.crash_trace else {
                    return false;
                };
                let Ok(observed) = parse_trace(&RawTrace::new(text), &meta) else {
                    return false;
                };
                return signature_matches(&observed, target);
            }
            SessionEventKind::LeftApp => return false,
            SessionEventKind::PageChanged | SessionEventKind::NoChange => {
                if i == last {
                    return false;
                }
            }
        }
    }
    false
}

/// A cycle spliced out during minimization, remembered for possible restoration.
#[derive(Debug, Clone)]
struct RemovedCycle {
    /// Position in the kept sequence where the cycle used to start, expressed as the
    /// original index of the first kept step after it.
    original_start: usize,
    steps: Vec<(usize, TraceStep)>,
}

fn splice_cycles(
    steps: Vec<(usize, TraceStep)>,
) -> (Vec<(usize, TraceStep)>, Vec<RemovedCycle>) {
    let mut kept = steps;
    let mut removed = Vec::new();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < kept.len() {
            // Latest recurrence of this pre-state; splice everything in between.
            let recur = (i + 1..kept.len())
                .rev()
                .find(|&j| kept[j].1.pre_state == kept[i].1.pre_state);
            if let Some(j) = recur {
                let cycle: Vec<(usize, TraceStep)> = kept.drain(i..j).collect();
                removed.push(RemovedCycle {
                    original_start: cycle[0].0,
                    steps: cycle,
                });
                changed = true;
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
    (kept, removed)
}

fn restore(kept: &[(usize, TraceStep)], cycle: &RemovedCycle) -> Vec<(usize, TraceStep)> {
    // Merge by original index: restoring every cycle reconstructs the raw trace.
    let mut out = kept.to_vec();
    out.extend(cycle.steps.iter().cloned());
    out.sort_by_key(|(orig, _)| *orig);
    out
}

/// Removes looped transitions from the raw trace and verifies the result by replay.
///
/// When the spliced trace no longer crashes (a removed loop satisfied a guard),
/// removed cycles are restored greedily — smallest first, earliest first among equal
/// sizes — until replay reproduces the crash again. Idempotent; fails only if even
/// the raw steps no longer reproduce, which a deterministic simulator never does.
pub fn minimize(raw: &ReproductionTrace, app: &AppModel) -> Result<ReproductionTrace, ReplayError> {
    let indexed: Vec<(usize, TraceStep)> =
        raw.raw_steps.iter().cloned().enumerate().collect();
    let (mut kept, mut removed) = splice_cycles(indexed);

    if !replay_reproduces(&strip(&kept), app, &raw.target) {
        removed.sort_by_key(|c| (c.steps.len(), c.original_start));
        let mut verified = false;
        'outer: while !removed.is_empty() {
            for (ci, cycle) in removed.iter().enumerate() {
                let candidate = restore(&kept, cycle);
                if replay_reproduces(&strip(&candidate), app, &raw.target) {
                    kept = candidate;
                    removed.remove(ci);
                    verified = true;
                    break 'outer;
                }
            }
            // No single restoration was enough: restore the smallest-earliest cycle
            // for good and try combinations from there.
            let cycle = removed.remove(0);
            kept = restore(&kept, &cycle);
            if replay_reproduces(&strip(&kept), app, &raw.target) {
                verified = true;
                break;
            }
        }
        if !verified && !replay_reproduces(&strip(&kept), app, &raw.target) {
            return Err(ReplayError::MinimizationFailed);
        }
    }

    Ok(ReproductionTrace {
        raw_steps: raw.raw_steps.clone(),
        minimized_steps: strip(&kept),
        target: raw.target.clone(),
    })
}

fn strip(indexed: &[(usize, TraceStep)]) -> Vec<TraceStep> {
    indexed.iter().map(|(_, s)| s.clone()).collect()
}

pub const SCRIPT_VERSION: u32 = 1;

/// Emits the auto-replay script for the minimized steps.
///
/// Grammar (version 1): `#`-prefixed comment lines carry the version, the app
/// package, and the expected crash; every other line is one action,
/// `<ordinal> <action> <page_id>/<widget_id>`.
pub fn emit_script(trace: &ReproductionTrace) -> String {
    let mut out = String::new();
    out.push_str(&format!("# retrace-script v{SCRIPT_VERSION}\n"));
    out.push_str(&format!(
        "# expect-exception {}\n",
        trace.target.exception_type
    ));
    if let Some(f) = trace.target.innermost_app_frame() {
        out.push_str(&format!("# expect-frame {} {}\n", f.class_path, f.method_name));
    }
    for (i, step) in trace.minimized_steps.iter().enumerate() {
        out.push_str(&format!(
            "{} {} {}/{}\n",
            i + 1,
            step.action,
            step.pre_page,
            step.widget
        ));
    }
    out
}

fn step_phrase(step: &TraceStep) -> String {
    match step.action {
        Action::Tap => format!("Tap '{}'.", step.display_name),
        Action::LongTap => format!("Long-tap '{}'.", step.display_name),
        Action::TypeText => format!("Type into '{}'.", step.display_name),
        Action::Rotate => "Rotate the screen.".to_string(),
        Action::Back => "Press back.".to_string(),
    }
}

/// Emits human-readable reproducing steps: launch, one numbered line per
/// interaction, and the expected exception type last.
pub fn emit_steps(trace: &ReproductionTrace) -> String {
    let mut lines = vec!["1. Launch the app.".to_string()];
    for (i, step) in trace.minimized_steps.iter().enumerate() {
        lines.push(format!("{}. {}", i + 2, step_phrase(step)));
    }
    lines.push(format!(
        "{}. Expect crash: {}.",
        trace.minimized_steps.len() + 2,
        trace.target.exception_type
    ));
    lines.join("\n") + "\n"
}

/// One parsed script action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub ordinal: usize,
    pub action: Action,
    pub page: PageId,
    pub widget: WidgetId,
}

/// A parsed auto-replay script.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub steps: Vec<ScriptStep>,
    pub expect_exception: Option<String>,
    pub expect_frame: Option<(String, String)>,
}

pub fn parse_script(text: &str) -> Result<Script, ReplayError> {
    let mut script = Script::default();
    let mut expected_ordinal = 1;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("expect-exception ") {
                script.expect_exception = Some(rest.trim().to_string());
            } else if let Some(rest) = comment.strip_prefix("expect-frame ") {
                let mut parts = rest.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some(class), Some(method)) => {
                        script.expect_frame = Some((class.to_string(), method.to_string()));
                    }
                    _ => {
                        return Err(ReplayError::BadScript {
                            line: line_no,
                            message: "expect-frame needs `<class_path> <method>`".into(),
                        })
                    }
                }
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (ord, act, target) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(o), Some(a), Some(t), None) => (o, a, t),
            _ => {
                return Err(ReplayError::BadScript {
                    line: line_no,
                    message: "expected `<ordinal> <action> <page_id>/<widget_id>`".into(),
                })
            }
        };
        let ordinal: usize = ord.parse().map_err(|_| ReplayError::BadScript {
            line: line_no,
            message: format!("bad ordinal `{ord}`"),
        })?;
        if ordinal != expected_ordinal {
            return Err(ReplayError::BadScript {
                line: line_no,
                message: format!("ordinal {ordinal} out of order, expected {expected_ordinal}"),
            });
        }
        expected_ordinal += 1;
        let action = Action::parse(act).ok_or_else(|| ReplayError::BadScript {
            line: line_no,
            message: format!("unknown action `{act}`"),
        })?;
        let (page, widget) = target.split_once('/').ok_or_else(|| ReplayError::BadScript {
            line: line_no,
            message: format!("bad target `{target}`, expected `<page_id>/<widget_id>`"),
        })?;
        script.steps.push(ScriptStep {
            ordinal,
            action,
            page: PageId(page.to_string()),
            widget: WidgetId(widget.to_string()),
        });
    }
    Ok(script)
}

/// Outcome of executing a script against a fixture.
#[derive(Debug, Clone, Serialize)]
pub struct ScriptOutcome {
    pub crashed: bool,
    pub exception_type: Option<String>,
    /// True when the crash matched the script's embedded expectation (or no
    /// expectation was embedded).
    pub matches_expectation: bool,
}

impl fmt::Display for ScriptOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.crashed {
            write!(f, "no crash")
        } else if self.matches_expectation {
            write!(
                f,
                "crashed with expected {}",
                self.exception_type.as_deref().unwrap_or("?")
            )
        } else {
            write!(
                f,
                "crashed with unexpected {}",
                self.exception_type.as_deref().unwrap_or("?")
            )
        }
    }
}

/// Executes a parsed script on a fresh session. Page mismatches and illegal widgets
/// fail with the script step number; early termination fails likewise.
pub fn execute_script(script: &Script, app: &AppModel) -> Result<ScriptOutcome, ReplayError> {
    let mut session = start_session(app, 0)?;
    let meta = app.metadata();
    let last = script.steps.len().checked_sub(1);
    for (i, step) in script.steps.iter().enumerate() {
        let (page, _) = session.observe().map_err(|e| ReplayError::ReplayFailed {
            step: step.ordinal,
            message: e.to_string(),
        })?;
        if page.page_id != step.page {
            return Err(ReplayError::ReplayFailed {
                step: step.ordinal,
                message: format!(
                    "expected page `{}` but the session is on `{}`",
                    step.page, page.page_id
                ),
            });
        }
        let event = session
            .perform(&step.widget, step.action)
            .map_err(|e| ReplayError::ReplayFailed {
                step: step.ordinal,
                message: e.to_string(),
            })?;
        match event.kind {
            SessionEventKind::Crashed => {
                if Some(i) != last {
                    return Err(ReplayError::ReplayFailed {
                        step: step.ordinal,
                        message: "crashed before the final script step".into(),
                    });
                }
                let text = event.crash_trace.expect("crash carries trace");
                let observed = parse_trace(&RawTrace::new(text), &meta).map_err(|e| {
                    ReplayError::ReplayFailed {
                        step: step.ordinal,
                        message: format!("rendered trace does not parse: {e}"),
                    }
                })?;
                let mut ok = true;
                if let Some(exc) = &script.expect_exception {
                    ok &= &observed.exception_type == exc;
                }
                if let Some((class, method)) = &script.expect_frame {
                    ok &= observed.innermost_app_frame().is_some_and(|f| {
                        &f.class_path == class && &f.method_name == method
                    });
                }
                return Ok(ScriptOutcome {
                    crashed: true,
                    exception_type: Some(observed.exception_type),
                    matches_expectation: ok,
                });
            }
            SessionEventKind::LeftApp => {
                return Err(ReplayError::ReplayFailed {
                    step: step.ordinal,
                    message: "left the app before the final script step".into(),
                });
            }
            _ => {}
        }
    }
    Ok(ScriptOutcome {
        crashed: false,
        exception_type: None,
        matches_expectation: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::StateKey;
    use crate::sim::PageType;

    fn key(name: &str) -> StateKey {
        StateKey {
            activity_name: name.to_string(),
            page_kind: PageType::General,
            widget_fingerprint: 0,
        }
    }

    fn step(pre: &str, widget: &str, to: Option<&str>) -> TraceStep {
        TraceStep {
            pre_state: key(pre),
            pre_page: PageId(pre.to_lowercase()),
            widget: WidgetId(widget.to_string()),
            display_name: widget.to_string(),
            action: Action::Tap,
            result: match to {
                Some(s) => StepResult::State(key(s)),
                None => StepResult::Crashed,
            },
        }
    }

    fn dummy_target() -> CrashSignature {
        CrashSignature {
            exception_type: "java.lang.NullPointerException".into(),
            message: String::new(),
            app_frames: vec![],
            crash_apis: vec![],
            crash_page: None,
        }
    }

    #[test]
    fn splice_removes_simple_loop() {
        // S0 -> S1 -> S0 -> S2 -> crash collapses to S0 -> S2 -> crash.
        let steps = vec![
            step("S0", "a", Some("S1")),
            step("S1", "b", Some("S0")),
            step("S0", "c", Some("S2")),
            step("S2", "d", None),
        ];
        let indexed: Vec<_> = steps.into_iter().enumerate().collect();
        let (kept, removed) = splice_cycles(indexed);
        let kept = strip(&kept);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].pre_state, key("S0"));
        assert_eq!(kept[0].widget, WidgetId("c".into()));
        assert_eq!(kept[1].pre_state, key("S2"));
        assert_eq!(removed.len(), 1);
        assert_eq!(removed[0].steps.len(), 2);
    }

    #[test]
    fn splice_keeps_loop_free_traces() {
        let steps = vec![
            step("S0", "a", Some("S1")),
            step("S1", "b", Some("S2")),
            step("S2", "c", None),
        ];
        let indexed: Vec<_> = steps.clone().into_iter().enumerate().collect();
        let (kept, removed) = splice_cycles(indexed);
        assert_eq!(strip(&kept), steps);
        assert!(removed.is_empty());
    }

    #[test]
    fn splice_leaves_no_repeated_pre_state() {
        let steps = vec![
            step("S0", "a", Some("S1")),
            step("S1", "b", Some("S1")), // self-loop via no-op
            step("S1", "c", Some("S0")),
            step("S0", "d", Some("S2")),
            step("S2", "e", Some("S1")),
            step("S1", "f", None),
        ];
        let indexed: Vec<_> = steps.into_iter().enumerate().collect();
        let (kept, _) = splice_cycles(indexed);
        let kept = strip(&kept);
        let mut seen = std::collections::HashSet::new();
        for s in &kept {
            assert!(seen.insert(s.pre_state.clone()), "repeated pre-state");
        }
        assert!(matches!(kept.last().unwrap().result, StepResult::Crashed));
    }

    #[test]
    fn script_emission_and_parsing_round_trip() {
        let trace = ReproductionTrace::unminimized(
            vec![step("S0", "w_go", Some("S1")), step("S1", "w_boom", None)],
            dummy_target(),
        );
        let text = emit_script(&trace);
        let script = parse_script(&text).unwrap();
        assert_eq!(script.steps.len(), 2);
        assert_eq!(script.steps[0].widget, WidgetId("w_go".into()));
        assert_eq!(script.steps[1].page, PageId("s1".into()));
        assert_eq!(
            script.expect_exception.as_deref(),
            Some("java.lang.NullPointerException")
        );
    }

    #[test]
    fn steps_text_for_empty_trace() {
        let trace = ReproductionTrace::unminimized(vec![], dummy_target());
        let steps = emit_steps(&trace);
        assert_eq!(
            steps,
            "1. Launch the app.\n2. Expect crash: java.lang.NullPointerException.\n"
        );
    }

    #[test]
    fn steps_text_uses_event_type_plus_widget_name() {
        let mut s1 = step("S0", "w1", Some("S1"));
        s1.display_name = "Search engine".into();
        let mut s2 = step("S1", "w2", None);
        s2.display_name = "Feed list".into();
        s2.action = Action::LongTap;
        let trace = ReproductionTrace::unminimized(vec![s1, s2], dummy_target());
        let text = emit_steps(&trace);
        assert!(text.contains("2. Tap 'Search engine'."));
        assert!(text.contains("3. Long-tap 'Feed list'."));
        assert!(text.ends_with("4. Expect crash: java.lang.NullPointerException.\n"));
    }

    #[test]
    fn bad_scripts_name_the_line() {
        let cases = [
            ("1 tap main\n", "bad target"),
            ("1 fly main/w\n", "unknown action"),
            ("2 tap main/w\n", "out of order"),
            ("x tap main/w\n", "bad ordinal"),
        ];
        for (text, needle) in cases {
            match parse_script(text) {
                Err(ReplayError::BadScript { line, message }) => {
                    assert_eq!(line, 1, "{text:?}");
                    assert!(message.contains(needle), "{message} vs {needle}");
                }
                other => panic!("expected BadScript for {text:?}, got {other:?}"),
            }
        }
    }
}
