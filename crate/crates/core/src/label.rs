//! Label vocabularies for the two tasks.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// One of the fifteen cognitive distortions, or the `NotDistorted` sentinel.
///
/// The derived ordering is the canonical one: alphabetical by display name,
/// `NotDistorted` last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistortionLabel {
    BeingRight,
    Blaming,
    Catastrophizing,
    ControlFallacy,
    EmotionalReasoning,
    FallacyOfChange,
    FallacyOfFairness,
    Filtering,
    GlobalLabeling,
    HeavensRewardFallacy,
    MindReading,
    Overgeneralization,
    Personalization,
    PolarizedThinking,
    Shoulds,
    NotDistorted,
}

impl DistortionLabel {
    pub const ALL: [DistortionLabel; 16] = [
        DistortionLabel::BeingRight,
        DistortionLabel::Blaming,
        DistortionLabel::Catastrophizing,
        DistortionLabel::ControlFallacy,
        DistortionLabel::EmotionalReasoning,
        DistortionLabel::FallacyOfChange,
        DistortionLabel::FallacyOfFairness,
        DistortionLabel::Filtering,
        DistortionLabel::GlobalLabeling,
        DistortionLabel::HeavensRewardFallacy,
        DistortionLabel::MindReading,
        DistortionLabel::Overgeneralization,
        DistortionLabel::Personalization,
        DistortionLabel::PolarizedThinking,
        DistortionLabel::Shoulds,
        DistortionLabel::NotDistorted,
    ];

    /// The fifteen distortions, without the sentinel.
    pub const DISTORTIONS: [DistortionLabel; 15] = {
        let mut out = [DistortionLabel::BeingRight; 15];
        let mut i = 0;
        while i < 15 {
            out[i] = Self::ALL[i];
            i += 1;
        }
        out
    };

    pub fn name(self) -> &'static str {
        match self {
            DistortionLabel::BeingRight => "Being Right",
            DistortionLabel::Blaming => "Blaming",
            DistortionLabel::Catastrophizing => "Catastrophizing",
            DistortionLabel::ControlFallacy => "Control Fallacy",
            DistortionLabel::EmotionalReasoning => "Emotional Reasoning",
            DistortionLabel::FallacyOfChange => "Fallacy of Change",
            DistortionLabel::FallacyOfFairness => "Fallacy of Fairness",
            DistortionLabel::Filtering => "Filtering",
            DistortionLabel::GlobalLabeling => "Global Labeling",
            DistortionLabel::HeavensRewardFallacy => "Heaven's Reward Fallacy",
            DistortionLabel::MindReading => "Mind Reading",
            DistortionLabel::Overgeneralization => "Overgeneralization",
            DistortionLabel::Personalization => "Personalization",
            DistortionLabel::PolarizedThinking => "Polarized Thinking",
            DistortionLabel::Shoulds => "Should's",
            DistortionLabel::NotDistorted => "Not Distorted",
        }
    }

    /// Lowercase alphanumeric form of the name, e.g. `heavensrewardfallacy`.
    pub fn slug(self) -> alloc::string::String {
        self.name()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect()
    }

    pub fn is_distortion(self) -> bool {
        self != DistortionLabel::NotDistorted
    }
}

impl fmt::Display for DistortionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistortionLabel {
    type Err = Error;

    /// Accepts the display name exactly, with a typographic apostrophe in
    /// place of `'`, or `NotDistorted` for the sentinel.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed == "NotDistorted" {
            return Ok(DistortionLabel::NotDistorted);
        }
        let canon: alloc::string::String = trimmed
            .chars()
            .map(|c| if c == '\u{2019}' { '\'' } else { c })
            .collect();
        DistortionLabel::ALL
            .iter()
            .copied()
            .find(|l| l.name() == canon)
            .ok_or_else(|| Error::UnknownLabel(s.into()))
    }
}

impl Serialize for DistortionLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for DistortionLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Binary label of the detection task. `NotDistorted` sorts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DetectionLabel {
    NotDistorted,
    Distorted,
}

impl DetectionLabel {
    pub fn name(self) -> &'static str {
        match self {
            DetectionLabel::NotDistorted => "NotDistorted",
            DetectionLabel::Distorted => "Distorted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Detection,
    Classification,
}

impl Task {
    /// Every class the task can produce, in canonical order.
    pub fn classes(self) -> alloc::vec::Vec<TaskLabel> {
        match self {
            Task::Detection => alloc::vec![
                TaskLabel::Detection(DetectionLabel::NotDistorted),
                TaskLabel::Detection(DetectionLabel::Distorted),
            ],
            Task::Classification => DistortionLabel::DISTORTIONS
                .iter()
                .map(|&l| TaskLabel::Classification(l))
                .collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Detection => "detection",
            Task::Classification => "classification",
        }
    }
}

/// A gold or predicted label for one task.
///
/// Detection labels never name a specific distortion; classification labels
/// never hold the sentinel once adjudicated. Serialized as the bare display
/// string: `Distorted`/`NotDistorted` for detection, the distortion name
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskLabel {
    Detection(DetectionLabel),
    Classification(DistortionLabel),
}

impl TaskLabel {
    pub fn task(self) -> Task {
        match self {
            TaskLabel::Detection(_) => Task::Detection,
            TaskLabel::Classification(_) => Task::Classification,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskLabel::Detection(l) => l.name(),
            TaskLabel::Classification(l) => l.name(),
        }
    }

    /// Parses a label string in the context of a known task.
    pub fn parse(task: Task, s: &str) -> Result<Self, Error> {
        match task {
            Task::Detection => match s.trim() {
                "Distorted" => Ok(TaskLabel::Detection(DetectionLabel::Distorted)),
                "NotDistorted" | "Not Distorted" => Ok(TaskLabel::Detection(DetectionLabel::NotDistorted)),
                _ => Err(Error::UnknownLabel(s.into())),
            },
            Task::Classification => match s.parse::<DistortionLabel>()? {
                DistortionLabel::NotDistorted => Err(Error::UnknownLabel(s.into())),
                l => Ok(TaskLabel::Classification(l)),
            },
        }
    }

    /// Parses a label string, inferring the task from the string itself.
    pub fn parse_any(s: &str) -> Result<Self, Error> {
        TaskLabel::parse(Task::Detection, s).or_else(|_| TaskLabel::parse(Task::Classification, s))
    }
}

impl fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for TaskLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for TaskLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        TaskLabel::parse_any(&s).map_err(serde::de::Error::custom)
    }
}
