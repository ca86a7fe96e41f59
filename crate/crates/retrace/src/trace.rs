//! Stack trace parsing: from raw crash text to a [`CrashSignature`].
//!
//! A signature carries the two clues the exploration engine runs on: the
//! crash-occurring page (the activity or fragment live when the crash fired) and the
//! crash-involved APIs (app-package frames of the trace, tokenized). Traces that lack
//! one or both clues still parse; the missing guidance is reported as a
//! [`Degradation`] and the engine falls back to undirected exploration.
//!
//! Only the innermost `Caused by:` chain is considered. Native frames and
//! de-obfuscation are out of scope.

use serde::Serialize;
use thiserror::Error;

use crate::token::{tokenize, TokenList};

/// A crash stack trace as pasted into a report: one header line
/// (`ExceptionType: message`) followed by `at pkg.Class.method(File:line)` frames.
#[derive(Debug, Clone)]
pub struct RawTrace {
    text: String,
}

impl RawTrace {
    pub fn new(text: impl Into<String>) -> Self {
        RawTrace { text: text.into() }
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Package name plus the activity list, as recorded in the app's manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppMetadata {
    pub package_name: String,
    pub activity_names: Vec<String>,
}

impl AppMetadata {
    pub fn new(
        package_name: impl Into<String>,
        activity_names: Vec<String>,
    ) -> Result<Self, TraceError> {
        let package_name = package_name.into();
        if package_name.is_empty() {
            return Err(TraceError::BadMetadata("package_name is empty".into()));
        }
        if activity_names.is_empty() {
            return Err(TraceError::BadMetadata("activity_names is empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for a in &activity_names {
            if !seen.insert(a) {
                return Err(TraceError::BadMetadata(format!(
                    "duplicate activity name `{a}`"
                )));
            }
        }
        Ok(AppMetadata {
            package_name,
            activity_names,
        })
    }
}

/// One stack frame: fully qualified class plus method name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Frame {
    pub class_path: String,
    pub method_name: String,
}

impl Frame {
    pub fn simple_class_name(&self) -> &str {
        self.class_path
            .rsplit('.')
            .next()
            .unwrap_or(&self.class_path)
    }
}

/// Whether the crash-occurring page was identified as an activity or a fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrashPageKind {
    Activity,
    Fragment,
}

/// The crash-occurring page: tokenized name plus the frame class it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrashPage {
    pub tokens: TokenList,
    pub kind: CrashPageKind,
    pub source_class: String,
}

/// Guidance missing from a parsed trace. The engine still explores, it just loses the
/// corresponding scorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degradation {
    /// No frame matched the app package: widget hitting has no APIs to match.
    NoAppFrames,
    /// Neither an activity nor a fragment was found: page reaching has no target.
    NoCrashPage,
}

/// Everything the engine extracts from one stack trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrashSignature {
    pub exception_type: String,
    pub message: String,
    /// App-package frames in stack order, innermost first.
    pub app_frames: Vec<Frame>,
    /// Tokenized `ClassName.methodName` per app frame, first-occurrence order,
    /// duplicate pairs removed.
    pub crash_apis: Vec<TokenList>,
    pub crash_page: Option<CrashPage>,
}

impl CrashSignature {
    pub fn innermost_app_frame(&self) -> Option<&Frame> {
        self.app_frames.first()
    }

    pub fn degradations(&self) -> Vec<Degradation> {
        let mut out = Vec::new();
        if self.app_frames.is_empty() {
            out.push(Degradation::NoAppFrames);
        }
        if self.crash_page.is_none() {
            out.push(Degradation::NoCrashPage);
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("invalid app metadata: {0}")]
    BadMetadata(String),
}

fn parse_header(line: &str) -> Option<(String, String)> {
    let line = line.trim();
    let (ty, msg) = match line.split_once(':') {
        Some((ty, msg)) => (ty.trim(), msg.trim()),
        None => (line, ""),
    };
    if ty.is_empty()
        || !ty
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '$'))
        || !ty.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
    {
        return None;
    }
    Some((ty.to_string(), msg.to_string()))
}

fn parse_frame(line: &str) -> Option<Frame> {
    let rest = line.trim().strip_prefix("at ")?.trim();
    // Drop the trailing "(File.java:123)" location if present.
    let qualified = rest.split('(').next().unwrap_or(rest).trim();
    let (class_path, method_name) = qualified.rsplit_once('.')?;
    if class_path.is_empty() || method_name.is_empty() {
        return None;
    }
    Some(Frame {
        class_path: class_path.to_string(),
        method_name: method_name.to_string(),
    })
}

/// Parses a raw trace against the app metadata.
///
/// Frames of the innermost `Caused by:` chain whose class has the package name as a
/// dotted prefix become `app_frames` (stack order, innermost first). The crash page is
/// the first app frame whose simple class name — minus a trailing `Activity` — matches
/// an activity from the metadata; otherwise the innermost frame whose class name
/// contains `Fragment` (app frames searched first, all frames when there are none).
///
/// Missing app frames or a missing crash page are reported via
/// [`CrashSignature::degradations`], not as errors; only a trace with no parseable
/// header fails.
pub fn parse_trace(raw: &RawTrace, meta: &AppMetadata) -> Result<CrashSignature, TraceError> {
    let mut header: Option<(String, String)> = None;
    let mut frames: Vec<Frame> = Vec::new();
    let mut saw_nonblank = false;

    for line in raw.text().lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("Caused by:") {
            // Innermost chain wins: restart collection.
            match parse_header(rest) {
                Some(h) => {
                    header = Some(h);
                    frames.clear();
                    continue;
                }
                None => {
                    return Err(TraceError::MalformedTrace(format!(
                        "unparseable Caused by line: `{trimmed}`"
                    )))
                }
            }
        }
        if trimmed.starts_with("at ") {
            if header.is_none() {
                return Err(TraceError::MalformedTrace(
                    "frame line before exception header".into(),
                ));
            }
            if let Some(f) = parse_frame(trimmed) {
                frames.push(f);
            }
            continue;
        }
        if trimmed.starts_with("...") {
            continue; // "... N more"
        }
        if !saw_nonblank {
            saw_nonblank = true;
            match parse_header(trimmed) {
                Some(h) => {
                    header = Some(h);
                    continue;
                }
                None => {
                    return Err(TraceError::MalformedTrace(format!(
                        "first line is not an exception header: `{trimmed}`"
                    )));
                }
            }
        }
        // Trailing prose after the frames (log noise) is ignored.
    }

    let (exception_type, message) = header.ok_or_else(|| {
        TraceError::MalformedTrace("no exception header found".into())
    })?;

    let package_prefix = format!("{}.", meta.package_name);
    let app_frames: Vec<Frame> = frames
        .iter()
        .filter(|f| {
            f.class_path == meta.package_name || f.class_path.starts_with(&package_prefix)
        })
        .cloned()
        .collect();

    let mut crash_apis = Vec::new();
    let mut seen_pairs = std::collections::HashSet::new();
    for f in &app_frames {
        let pair = format!("{}.{}", f.simple_class_name(), f.method_name);
        if seen_pairs.insert(pair.clone()) {
            crash_apis.push(tokenize(&pair));
        }
    }

    let crash_page = find_crash_page(&app_frames, &frames, meta);

    Ok(CrashSignature {
        exception_type,
        message,
        app_frames,
        crash_apis,
        crash_page,
    })
}

fn strip_activity_suffix(name: &str) -> &str {
    let lower = name.to_ascii_lowercase();
    if lower.len() > "activity".len() && lower.ends_with("activity") {
        &name[..name.len() - "activity".len()]
    } else {
        name
    }
}

fn find_crash_page(
    app_frames: &[Frame],
    all_frames: &[Frame],
    meta: &AppMetadata,
) -> Option<CrashPage> {
    // Activity match: innermost app frame whose stripped class name equals a
    // stripped manifest activity, case-insensitively.
    for f in app_frames {
        let simple = f.simple_class_name();
        let stripped = strip_activity_suffix(simple).to_ascii_lowercase();
        let matched = meta
            .activity_names
            .iter()
            .any(|a| strip_activity_suffix(a).to_ascii_lowercase() == stripped);
        if matched {
            return Some(CrashPage {
                tokens: tokenize(simple),
                kind: CrashPageKind::Activity,
                source_class: simple.to_string(),
            });
        }
    }
    // Fragment match: innermost frame whose class name carries the keyword.
    let candidates: &[Frame] = if app_frames.is_empty() {
        all_frames
    } else {
        app_frames
    };
    for f in candidates {
        let simple = f.simple_class_name();
        if simple.contains("Fragment") {
            return Some(CrashPage {
                tokens: tokenize(simple),
                kind: CrashPageKind::Fragment,
                source_class: simple.to_string(),
            });
        }
    }
    None
}

/// Observed and target crashes are the same crash when the exception type and the
/// innermost app frame agree. Messages carry run-specific values and are ignored, as
/// are outer frames.
pub fn signature_matches(observed: &CrashSignature, target: &CrashSignature) -> bool {
    observed.exception_type == target.exception_type
        && observed.innermost_app_frame() == target.innermost_app_frame()
}
