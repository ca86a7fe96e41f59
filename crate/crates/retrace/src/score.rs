//! The three per-widget score components and their sum.
//!
//! Page reaching turns the predictor's ranking into `1/(rank+2)` scores, widget
//! hitting measures token overlap between a widget's name and the crash-involved
//! APIs, and the exploration score is the widget's learned Q-value. Selection always
//! works on the plain, unweighted sum; ablation variants zero one component.

use std::collections::HashMap;

use serde::Serialize;

use crate::predictor::RankedWidgets;
use crate::sim::{Action, WidgetId, WidgetSpec};
use crate::token::{tokens_match, TokenList};

/// Which score component, if any, is switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    #[default]
    None,
    /// Run without the page reaching scorer.
    NoPageReach,
    /// Run without the widget hitting scorer.
    NoWidgetHit,
}

impl AblationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AblationMode::None => "none",
            AblationMode::NoPageReach => "no_page_reach",
            AblationMode::NoWidgetHit => "no_widget_hit",
        }
    }
}

/// One candidate interaction with its score breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredWidget {
    pub widget_id: WidgetId,
    pub action: Action,
    /// Position among the page's (widget, action) candidates; breaks selection ties.
    pub ordinal: usize,
    pub page_reach_score: f64,
    pub widget_hit_score: f64,
    pub q_score: f64,
    pub total: f64,
}

/// Maps a ranking to scores: rank r (1-based) scores 1/(r+2), so the top five score
/// 1/3, 1/4, 1/5, 1/6, 1/7; unranked widgets score 0.
///
/// Ranked names resolve to the first interactable with that display name.
pub fn page_reach_scores(
    ranked: &RankedWidgets,
    interactables: &[WidgetSpec],
) -> HashMap<WidgetId, f64> {
    let mut scores = HashMap::new();
    for (i, name) in ranked.ranked.iter().enumerate() {
        let rank = (i + 1) as f64;
        if let Some(w) = interactables.iter().find(|w| &w.display_name() == name) {
            scores.entry(w.widget_id.clone()).or_insert(1.0 / (rank + 2.0));
        }
    }
    scores
}

/// Fraction of the widget's distinct name tokens that overlap one crash-involved API,
/// maximized over the APIs. Tokens overlap when their stems are equal or one
/// abbreviates the other. Nameless widgets score 0.
pub fn widget_hit_score(widget_name_tokens: &TokenList, crash_apis: &[TokenList]) -> f64 {
    let mut widget_tokens: Vec<&str> =
        widget_name_tokens.tokens().iter().map(String::as_str).collect();
    widget_tokens.sort_unstable();
    widget_tokens.dedup();
    if widget_tokens.is_empty() {
        return 0.0;
    }
    let mut best = 0.0f64;
    for api in crash_apis {
        let matched = widget_tokens
            .iter()
            .filter(|wt| api.tokens().iter().any(|at| tokens_match(wt, at)))
            .count();
        best = best.max(matched as f64 / widget_tokens.len() as f64);
    }
    best
}

/// Sums the three components into a [`ScoredWidget`], zeroing whichever component the
/// ablation disables.
pub fn combine(
    widget_id: WidgetId,
    action: Action,
    ordinal: usize,
    page_reach: f64,
    widget_hit: f64,
    q_value: f64,
    ablation: AblationMode,
) -> ScoredWidget {
    let page_reach_score = if ablation == AblationMode::NoPageReach {
        0.0
    } else {
        page_reach
    };
    let widget_hit_score = if ablation == AblationMode::NoWidgetHit {
        0.0
    } else {
        widget_hit
    };
    ScoredWidget {
        widget_id,
        action,
        ordinal,
        page_reach_score,
        widget_hit_score,
        q_score: q_value,
        total: page_reach_score + widget_hit_score + q_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{WidgetClass, WidgetSpec};
    use crate::token::tokenize;
    use proptest::prelude::*;

    fn named_widget(id: &str, text: &str) -> WidgetSpec {
        WidgetSpec {
            widget_id: id.into(),
            widget_class: WidgetClass::TextLike,
            text: text.into(),
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

    #[test]
    fn rank_scores_are_the_five_fixed_fractions() {
        let widgets: Vec<WidgetSpec> = (0..6)
            .map(|i| named_widget(&format!("w{i}"), &format!("name{i}")))
            .collect();
        let ranked = RankedWidgets {
            ranked: (0..5).map(|i| format!("name{i}")).collect(),
        };
        let scores = page_reach_scores(&ranked, &widgets);
        for (i, expected) in [1.0 / 3.0, 1.0 / 4.0, 1.0 / 5.0, 1.0 / 6.0, 1.0 / 7.0]
            .iter()
            .enumerate()
        {
            assert_eq!(scores[&WidgetId(format!("w{i}"))], *expected);
        }
        assert!(!scores.contains_key(&WidgetId("w5".into())));
    }

    #[test]
    fn empty_and_partial_rankings() {
        let widgets: Vec<WidgetSpec> = (0..6)
            .map(|i| named_widget(&format!("w{i}"), &format!("name{i}")))
            .collect();
        assert!(page_reach_scores(&RankedWidgets::default(), &widgets).is_empty());

        let two = RankedWidgets {
            ranked: vec!["name3".into(), "name0".into()],
        };
        let scores = page_reach_scores(&two, &widgets);
        assert_eq!(scores.len(), 2);
        assert_eq!(scores[&WidgetId("w3".into())], 1.0 / 3.0);
        assert_eq!(scores[&WidgetId("w0".into())], 1.0 / 4.0);
    }

    #[test]
    fn hit_score_full_overlap_through_stemming() {
        // Clicking "Search engine" runs refetchSearchEngines: both widget tokens
        // match, "engine" ~ "engines" via stemming.
        let widget = tokenize("Search engine");
        let apis = vec![tokenize("refetchSearchEngines")];
        assert_eq!(widget_hit_score(&widget, &apis), 1.0);
    }

    #[test]
    fn hit_score_no_overlap() {
        let widget = tokenize("help");
        let apis = vec![tokenize("refetchSearchEngines")];
        assert_eq!(widget_hit_score(&widget, &apis), 0.0);
    }

    #[test]
    fn hit_score_abbreviation() {
        let widget = tokenize("msg list");
        let apis = vec![tokenize("showMessageList")];
        assert_eq!(widget_hit_score(&widget, &apis), 1.0);
    }

    #[test]
    fn hit_score_partial_and_max_over_apis() {
        let widget = tokenize("clear cache");
        let apis = vec![tokenize("DiskCache.evictAll"), tokenize("Prefs.reset")];
        assert_eq!(widget_hit_score(&widget, &apis), 0.5);
        assert_eq!(widget_hit_score(&tokenize(""), &apis), 0.0);
    }

    #[test]
    fn hit_score_is_set_level() {
        let single = tokenize("search engine");
        let doubled = tokenize("search engine search engine");
        let apis = vec![tokenize("refetchSearchEngines refetch search engines")];
        assert_eq!(
            widget_hit_score(&single, &apis),
            widget_hit_score(&doubled, &apis)
        );
    }

    #[test]
    fn combine_sums_exactly() {
        let s = combine(
            "w".into(),
            Action::Tap,
            0,
            1.0 / 3.0,
            1.0,
            0.5,
            AblationMode::None,
        );
        assert!((s.total - 11.0 / 6.0).abs() < 1e-15);

        let zero = combine("w".into(), Action::Tap, 0, 0.0, 0.0, 0.0, AblationMode::None);
        assert_eq!(zero.total, 0.0);

        // Dyadic rationals sum without rounding.
        let dyadic = combine("w".into(), Action::Tap, 0, 0.25, 0.5, 0.25, AblationMode::None);
        assert_eq!(dyadic.total, 1.0);
    }

    #[test]
    fn ablations_zero_one_component() {
        let wp = combine(
            "w".into(),
            Action::Tap,
            0,
            1.0 / 3.0,
            1.0,
            0.5,
            AblationMode::NoPageReach,
        );
        assert_eq!(wp.page_reach_score, 0.0);
        assert_eq!(wp.total, 1.5);

        let ww = combine(
            "w".into(),
            Action::Tap,
            0,
            1.0 / 3.0,
            1.0,
            0.5,
            AblationMode::NoWidgetHit,
        );
        assert_eq!(ww.widget_hit_score, 0.0);
        assert!((ww.total - (1.0 / 3.0 + 0.5)).abs() < 1e-15);
    }

    proptest! {
        /// The rank-score image is within {0} ∪ {1/3..1/7} and strictly decreasing.
        #[test]
        fn rank_image_and_monotonicity(n in 0usize..6) {
            let widgets: Vec<WidgetSpec> = (0..6)
                .map(|i| named_widget(&format!("w{i}"), &format!("name{i}")))
                .collect();
            let ranked = RankedWidgets {
                ranked: (0..n).map(|i| format!("name{i}")).collect(),
            };
            let scores = page_reach_scores(&ranked, &widgets);
            let allowed = [1.0/3.0, 1.0/4.0, 1.0/5.0, 1.0/6.0, 1.0/7.0];
            let mut prev = f64::INFINITY;
            for i in 0..n {
                let s = scores[&WidgetId(format!("w{i}"))];
                prop_assert!(allowed.contains(&s));
                prop_assert!(s < prev);
                prev = s;
            }
        }

        /// Adding a constant to every q value shifts totals uniformly, so the argmax
        /// ordering among widgets sharing the other two components is unchanged.
        #[test]
        fn argmax_invariant_under_q_shift(
            qs in prop::collection::vec(-50.0f64..50.0, 2..6),
            shift in -10.0f64..10.0,
        ) {
            // Keep q values apart so float rounding of (q + shift) cannot reorder
            // genuinely distinct totals.
            for (i, a) in qs.iter().enumerate() {
                for b in qs.iter().skip(i + 1) {
                    prop_assume!((a - b).abs() > 1e-6);
                }
            }
            let base: Vec<ScoredWidget> = qs.iter().enumerate().map(|(i, q)| {
                combine(WidgetId(format!("w{i}")), Action::Tap, i, 0.25, 0.5, *q, AblationMode::None)
            }).collect();
            let shifted: Vec<ScoredWidget> = qs.iter().enumerate().map(|(i, q)| {
                combine(WidgetId(format!("w{i}")), Action::Tap, i, 0.25, 0.5, *q + shift, AblationMode::None)
            }).collect();
            let argmax = |v: &[ScoredWidget]| {
                v.iter().enumerate()
                    .max_by(|(_, a), (_, b)| a.total.partial_cmp(&b.total).unwrap().then(b.ordinal.cmp(&a.ordinal)))
                    .map(|(i, _)| i)
            };
            prop_assert_eq!(argmax(&base), argmax(&shifted));
        }
    }
}
