use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyCorpus,
    DuplicateId(String),
    EmptyId,
    DuplicateAnnotator {
        passage: String,
        annotator: String,
    },
    NoAnnotations(String),
    /// `NotDistorted` was placed inside an annotator's label set.
    SentinelInAnnotation(String),
    UnknownLabel(String),
    InvalidArgument(String),
    EmptyVocabulary,
    SingleClass,
    NonFiniteFeature {
        row: usize,
    },
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    ClassNotInModel(String),
    MixedTasks,
    ZeroVector,
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    InvalidConfig {
        field: &'static str,
        reason: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyCorpus => f.write_str("empty corpus"),
            Error::DuplicateId(id) => write!(f, "duplicate passage id {id:?}"),
            Error::EmptyId => f.write_str("passage id must be non-empty"),
            Error::DuplicateAnnotator { passage, annotator } => {
                write!(f, "annotator {annotator:?} appears twice on passage {passage:?}")
            }
            Error::NoAnnotations(id) => write!(f, "passage {id:?} has no annotations"),
            Error::SentinelInAnnotation(id) => write!(
                f,
                "passage {id:?}: NotDistorted cannot appear in a label set (use an empty set)"
            ),
            Error::UnknownLabel(s) => write!(f, "unknown label {s:?}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::EmptyVocabulary => f.write_str("empty vocabulary"),
            Error::SingleClass => f.write_str("training labels contain a single class"),
            Error::NonFiniteFeature { row } => write!(f, "non-finite feature value in row {row}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::ClassNotInModel(c) => write!(f, "class {c:?} is not in the model"),
            Error::MixedTasks => f.write_str("corpus mixes detection and classification labels"),
            Error::ZeroVector => f.write_str("zero vector"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::InvalidConfig { field, reason } => write!(f, "invalid config field `{field}`: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
