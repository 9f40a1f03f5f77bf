//! Engine configuration: every tunable constant of the pipeline with its default.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interchange::PromptLevel;

/// Which pipeline components are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Components {
    pub multi_prompt_search: bool,
    pub temporal_validation: bool,
    pub motion_scoring: bool,
    pub backward_refinement: bool,
    pub multi_candidate_retry: bool,
}

impl Default for Components {
    fn default() -> Self {
        Self {
            multi_prompt_search: true,
            temporal_validation: true,
            motion_scoring: true,
            backward_refinement: true,
            multi_candidate_retry: true,
        }
    }
}

impl Components {
    /// Rows of the ablation table in order: single prompt + fixed threshold,
    /// multi-prompt search, temporal validation, motion scoring, backward
    /// refinement, multi-candidate retry.
    pub fn table_row(&self) -> [bool; 6] {
        [
            !self.multi_prompt_search,
            self.multi_prompt_search,
            self.temporal_validation,
            self.motion_scoring,
            self.backward_refinement,
            self.multi_candidate_retry,
        ]
    }
}

/// How the consistency score treats validation frames without a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyMode {
    /// Mean over matched frames only.
    MatchedOnly,
    /// Mean over every in-range validation frame, unmatched frames counting 0.
    AllFrames,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptSet {
    pub gear: String,
    pub nogear: String,
    pub generic: String,
    pub dummy: String,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self {
            gear: "helmeted football player sprinting in a forward lean".into(),
            nogear: "player in practice clothes running forward".into(),
            generic: "person running toward a red object".into(),
            dummy: "red tackle dummy".into(),
        }
    }
}

impl PromptSet {
    pub fn player_prompt(&self, level: PromptLevel) -> &str {
        match level {
            PromptLevel::Gear => &self.gear,
            PromptLevel::Nogear => &self.nogear,
            PromptLevel::Generic => &self.generic,
        }
    }

    /// The joint phrase-grounding query submitted for one level.
    pub fn query_text(&self, level: PromptLevel) -> String {
        format!("{} . {} .", self.player_prompt(level), self.dummy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    // detection classification
    pub dummy_aspect_ratio: f64,
    pub horizontal_dummy_floor: f64,
    pub min_player_area_fraction: f64,
    pub edge_margin_x: f64,
    pub edge_margin_top: f64,
    pub dummy_keywords: Vec<String>,
    pub player_keywords: Vec<String>,
    /// Weights on (score, centrality, verticality) for picking the dummy.
    pub dummy_score_weights: [f64; 3],
    pub dummy_aspect_cap: f64,
    pub player_candidates: usize,

    // temporal validation and motion
    /// Weights on (IoU, center distance, size ratio) of the match confidence.
    pub match_weights: [f64; 3],
    pub match_iou_norm: f64,
    pub match_distance_norm: f64,
    pub min_player_matches: usize,
    pub min_dummy_matches: usize,
    pub min_consistency: f64,
    pub consistency_mode: ConsistencyMode,
    pub validation_offsets: Vec<i64>,
    pub displacement_reference: f64,
    pub min_displacement: f64,
    pub min_direction: f64,
    /// Weights on (consistency, displacement, direction) of the overall score.
    pub overall_weights: [f64; 3],

    // candidate search
    /// Normalized probe positions, listed in evaluation order.
    pub probe_positions: Vec<f64>,
    pub probe_window: usize,
    pub probe_step: usize,
    pub threshold_tiers: Vec<f64>,
    pub prompt_levels: Vec<PromptLevel>,
    pub prompts: PromptSet,
    pub escalate_on_failure: bool,
    pub dedup_iou: f64,

    // backward refinement
    pub refine_offsets: Vec<usize>,
    pub max_consecutive_misses: usize,
    pub restart_ladder: bool,
    pub presence_iou: f64,

    // contact verification
    pub overlap_threshold: u64,
    pub post_contact_frames: usize,
    pub propagation_horizon: usize,
    pub seed_iou: f64,
    pub review_confidence: f64,
    pub review_direction: f64,

    pub components: Components,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        Self {
            dummy_aspect_ratio: 2.0,
            horizontal_dummy_floor: 0.8,
            min_player_area_fraction: 0.01,
            edge_margin_x: 0.15,
            edge_margin_top: 0.10,
            dummy_keywords: words(&["dummy", "pad", "bag", "tackle", "training", "blocking"]),
            player_keywords: words(&[
                "player", "person", "athlete", "helmet", "football", "running", "sprint",
            ]),
            dummy_score_weights: [0.4, 0.3, 0.3],
            dummy_aspect_cap: 3.0,
            player_candidates: 3,

            match_weights: [0.55, 0.30, 0.15],
            match_iou_norm: 0.20,
            match_distance_norm: 200.0,
            min_player_matches: 3,
            min_dummy_matches: 2,
            min_consistency: 0.5,
            consistency_mode: ConsistencyMode::MatchedOnly,
            validation_offsets: (-7..=-1).chain(1..=7).collect(),
            displacement_reference: 200.0,
            min_displacement: 0.08,
            min_direction: 0.30,
            overall_weights: [0.3, 0.3, 0.4],

            probe_positions: vec![0.50, 0.70, 0.90, 0.30, 0.95, 0.10],
            probe_window: 5,
            probe_step: 1,
            threshold_tiers: vec![0.35, 0.27, 0.20],
            prompt_levels: vec![PromptLevel::Gear, PromptLevel::Nogear, PromptLevel::Generic],
            prompts: PromptSet::default(),
            escalate_on_failure: false,
            dedup_iou: 0.8,

            refine_offsets: vec![5, 10, 20, 50],
            max_consecutive_misses: 1,
            restart_ladder: true,
            presence_iou: 0.3,

            overlap_threshold: 1,
            post_contact_frames: 20,
            propagation_horizon: 600,
            seed_iou: 0.3,
            review_confidence: 0.25,
            review_direction: 0.20,

            components: Components::default(),
        }
    }
}

fn check_weights(field: &str, w: &[f64]) -> Result<()> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::invalid(field, "weights must be nonnegative"));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(field, format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

fn check_unit(field: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(field, format!("{v} is outside [0, 1]")));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(field, format!("{v} must be positive")));
    }
    Ok(())
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        check_weights("dummy_score_weights", &self.dummy_score_weights)?;
        check_weights("match_weights", &self.match_weights)?;
        check_weights("overall_weights", &self.overall_weights)?;
        check_positive("dummy_aspect_ratio", self.dummy_aspect_ratio)?;
        check_positive("dummy_aspect_cap", self.dummy_aspect_cap)?;
        check_positive("match_iou_norm", self.match_iou_norm)?;
        check_positive("match_distance_norm", self.match_distance_norm)?;
        check_positive("displacement_reference", self.displacement_reference)?;
        if self.horizontal_dummy_floor < 0.0 || self.horizontal_dummy_floor > self.dummy_aspect_ratio {
            return Err(Error::invalid(
                "horizontal_dummy_floor",
                "must lie in [0, dummy_aspect_ratio]",
            ));
        }
        check_unit("min_player_area_fraction", self.min_player_area_fraction)?;
        if !(0.0..0.5).contains(&self.edge_margin_x) {
            return Err(Error::invalid("edge_margin_x", "must lie in [0, 0.5)"));
        }
        check_unit("edge_margin_top", self.edge_margin_top)?;
        check_unit("min_consistency", self.min_consistency)?;
        check_unit("min_displacement", self.min_displacement)?;
        check_unit("min_direction", self.min_direction)?;
        check_unit("dedup_iou", self.dedup_iou)?;
        check_unit("presence_iou", self.presence_iou)?;
        check_unit("seed_iou", self.seed_iou)?;
        check_unit("review_confidence", self.review_confidence)?;
        check_unit("review_direction", self.review_direction)?;
        if self.player_candidates == 0 {
            return Err(Error::invalid("player_candidates", "must be at least 1"));
        }
        if self.validation_offsets.contains(&0) {
            return Err(Error::invalid("validation_offsets", "offset 0 is the anchor itself"));
        }
        if self.probe_positions.is_empty() {
            return Err(Error::invalid("probe_positions", "at least one position required"));
        }
        for &p in &self.probe_positions {
            check_unit("probe_positions", p)?;
        }
        if self.probe_step == 0 {
            return Err(Error::invalid("probe_step", "must be at least 1"));
        }
        if self.threshold_tiers.is_empty() {
            return Err(Error::invalid("threshold_tiers", "at least one tier required"));
        }
        for &t in &self.threshold_tiers {
            check_unit("threshold_tiers", t)?;
        }
        if self.threshold_tiers.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("threshold_tiers", "tiers must relax monotonically"));
        }
        if self.prompt_levels.is_empty() {
            return Err(Error::invalid("prompt_levels", "at least one level required"));
        }
        if self.refine_offsets.is_empty() || self.refine_offsets.contains(&0) {
            return Err(Error::invalid("refine_offsets", "offsets must be positive"));
        }
        if self.refine_offsets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("refine_offsets", "offsets must increase"));
        }
        if self.overlap_threshold == 0 {
            return Err(Error::invalid("overlap_threshold", "must be at least 1 pixel"));
        }
        if self.propagation_horizon == 0 {
            return Err(Error::invalid("propagation_horizon", "must be at least 1 frame"));
        }
        Ok(())
    }

    /// Prompt levels searched under the current components.
    pub fn active_prompt_levels(&self) -> &[PromptLevel] {
        if self.components.multi_prompt_search {
            &self.prompt_levels
        } else {
            &self.prompt_levels[..1]
        }
    }

    /// Threshold tiers (by index) searched under the current components.
    pub fn active_tiers(&self) -> std::ops::Range<usize> {
        if self.components.multi_prompt_search {
            0..self.threshold_tiers.len()
        } else {
            0..1
        }
    }

    pub fn is_dummy_keyword(&self, word: &str) -> bool {
        self.dummy_keywords.iter().any(|k| k.eq_ignore_ascii_case(word))
    }

    pub fn is_player_keyword(&self, word: &str) -> bool {
        self.player_keywords.iter().any(|k| k.eq_ignore_ascii_case(word))
    }
}
