//! Normalization, whitespace tokenization and n-gram expansion.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Lowercases letters, keeps digits and whitespace, keeps apostrophes only
/// between two word characters and turns every other character into a
/// single space.
///
/// Typographic apostrophes are emitted as `'`. Lowercase expansions that
/// contain non-alphanumeric marks (e.g. the combining dot of `İ`) keep only
/// their alphanumeric part, which makes the function idempotent.
pub fn normalize(text: &str) -> String {
    enum Piece {
        Keep(char),
        Apostrophe,
    }
    let mut pieces = Vec::with_capacity(text.len());
    for c in text.chars() {
        if c.is_whitespace() {
            pieces.push(Piece::Keep(c));
        } else if is_word_char(c) {
            let mut any = false;
            for lc in c.to_lowercase().filter(|lc| is_word_char(*lc)) {
                pieces.push(Piece::Keep(lc));
                any = true;
            }
            if !any {
                pieces.push(Piece::Keep(' '));
            }
        } else if is_apostrophe(c) {
            pieces.push(Piece::Apostrophe);
        } else {
            pieces.push(Piece::Keep(' '));
        }
    }

    let mut out = String::with_capacity(text.len());
    let mut prev: Option<char> = None;
    for (i, piece) in pieces.iter().enumerate() {
        let c = match *piece {
            Piece::Keep(c) => c,
            Piece::Apostrophe => {
                let next_is_word = matches!(pieces.get(i + 1), Some(Piece::Keep(n)) if is_word_char(*n));
                if prev.is_some_and(is_word_char) && next_is_word {
                    '\''
                } else {
                    ' '
                }
            }
        };
        out.push(c);
        prev = Some(c);
    }
    out
}

/// Maximal runs of non-whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(String::from).collect()
}

/// Inclusive n-gram length range; only `1..=1`, `1..=2` and `2..=2` exist.
/// Serialized as `"1-2"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NgramRange {
    pub min: usize,
    pub max: usize,
}

impl NgramRange {
    pub const UNIGRAMS: NgramRange = NgramRange { min: 1, max: 1 };
    pub const UNI_BI: NgramRange = NgramRange { min: 1, max: 2 };

    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min < 1 || min > max || max > 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "n-gram range {min}..{max} must satisfy 1 <= min <= max <= 2"
            )));
        }
        Ok(NgramRange { min, max })
    }

    pub fn validate(self) -> Result<Self> {
        NgramRange::new(self.min, self.max)
    }
}

impl core::fmt::Display for NgramRange {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}-{}", self.min, self.max)
    }
}

impl core::str::FromStr for NgramRange {
    type Err = Error;

    /// Parses `"1-2"`, `"1..2"` or a single length such as `"1"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(alloc::format!("cannot parse n-gram range {s:?}"));
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let (lo, hi) = if let Some((a, b)) = s.split_once("..") {
            (parse(a)?, parse(b.trim_start_matches('='))?)
        } else if let Some((a, b)) = s.split_once('-') {
            (parse(a)?, parse(b)?)
        } else {
            let n = parse(s)?;
            (n, n)
        };
        NgramRange::new(lo, hi)
    }
}

impl TryFrom<String> for NgramRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NgramRange> for String {
    fn from(r: NgramRange) -> String {
        alloc::format!("{r}")
    }
}

/// Ordered unigrams and space-joined bigrams of one document.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermSequence(pub Vec<String>);

impl TermSequence {
    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for TermSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TermSequence(iter.into_iter().map(Into::into).collect())
    }
}

/// All contiguous n-grams for each length in `min..=max`, shortest first,
/// each in document order.
pub fn ngrams(tokens: &[String], min: usize, max: usize) -> Result<TermSequence> {
    let range = NgramRange::new(min, max)?;
    Ok(ngrams_in(tokens, range))
}

pub(crate) fn ngrams_in(tokens: &[String], range: NgramRange) -> TermSequence {
    let mut terms = Vec::new();
    for n in range.min..=range.max {
        for window in tokens.windows(n) {
            terms.push(window.join(" "));
        }
    }
    TermSequence(terms)
}

/// `ngrams(tokenize(normalize(text)))`.
pub fn analyze(text: &str, range: NgramRange) -> TermSequence {
    ngrams_in(&tokenize(&normalize(text)), range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| String::from(*t)).collect()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize("Hello, World!"), "hello  world ");
        assert_eq!(normalize("I'll never"), "i'll never");
        assert_eq!(normalize("I\u{2019}ll never"), "i'll never");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize("end.Next"), "end next");
        assert_eq!(normalize("'quoted' rock'n'roll"), " quoted  rock'n'roll");
        assert_eq!(normalize("a''b"), "a  b");
        assert_eq!(normalize("Ünïcode 42"), "ünïcode 42");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("i was right"), toks(&["i", "was", "right"]));
        assert_eq!(tokenize("hello  world "), toks(&["hello", "world"]));
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn ngram_examples() {
        let abc = toks(&["a", "b", "c"]);
        assert_eq!(ngrams(&abc, 1, 2).unwrap().0, toks(&["a", "b", "c", "a b", "b c"]));
        assert_eq!(ngrams(&toks(&["a"]), 1, 2).unwrap().0, toks(&["a"]));
        assert_eq!(ngrams(&abc, 1, 1).unwrap().0, toks(&["a", "b", "c"]));
        assert_eq!(ngrams(&abc, 2, 2).unwrap().0, toks(&["a b", "b c"]));
        assert!(ngrams(&abc, 0, 1).is_err());
        assert!(ngrams(&abc, 2, 1).is_err());
        assert!(ngrams(&abc, 1, 3).is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!("1-2".parse::<NgramRange>().unwrap(), NgramRange::UNI_BI);
        assert_eq!("1..2".parse::<NgramRange>().unwrap(), NgramRange::UNI_BI);
        assert_eq!("1".parse::<NgramRange>().unwrap(), NgramRange::UNIGRAMS);
        assert!("3".parse::<NgramRange>().is_err());
        assert!("x-2".parse::<NgramRange>().is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once.clone());
        }

        #[test]
        fn tokens_only_contain_word_chars_and_inner_apostrophes(s in "\\PC{0,40}") {
            for t in tokenize(&normalize(&s)) {
                prop_assert!(!t.is_empty());
                for (i, c) in t.chars().enumerate() {
                    if c == '\'' {
                        prop_assert!(i > 0 && i + 1 < t.chars().count());
                    } else {
                        prop_assert!(c.is_alphanumeric(), "{:?} in {:?}", c, t);
                    }
                }
                prop_assert_eq!(t.to_lowercase(), t.clone());
            }
        }

        #[test]
        fn ngram_count_identity(words in proptest::collection::vec("[a-z]{1,4}", 0..12)) {
            let seq = ngrams(&words, 1, 2).unwrap();
            prop_assert_eq!(seq.len(), words.len() + words.len().saturating_sub(1));
            for t in seq.terms() {
                prop_assert_eq!(t.trim(), t.as_str());
                prop_assert!(t.matches(' ').count() <= 1);
            }
        }
    }

    #[test]
    fn analyze_composes_the_stages() {
        assert_eq!(
            analyze("I was RIGHT.", NgramRange::UNI_BI).0,
            toks(&["i", "was", "right", "i was", "was right"])
        );
    }
}
