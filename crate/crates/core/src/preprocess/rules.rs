use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Stems where the consonant-vowel-consonant heuristic would wrongly append
/// an "e" after stripping "-ing" ("visiting" -> "visit", not "visite").
const NO_RESTORE: &[&str] = &[
    "answer", "benefit", "bother", "consider", "cover", "deliver", "differ", "edit", "enter",
    "exit", "gather", "happen", "level", "limit", "listen", "matter", "monitor", "offer", "open",
    "order", "profit", "remember", "suffer", "travel", "visit", "wander", "wonder",
];

/// Token normalization settings: stopwords, exclusions, base-form merging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationRules {
    pub stopwords: BTreeSet<String>,
    pub exclusions: BTreeSet<String>,
    /// Explicit word -> base overrides; these win over the suffix rules.
    pub merge_table: BTreeMap<String, String>,
    pub lowercase: bool,
    pub min_token_length: usize,
    /// Stems exempt from final-"e" restoration when stripping "-ing".
    pub no_restore: BTreeSet<String>,
}

impl Default for NormalizationRules {
    fn default() -> Self {
        NormalizationRules {
            stopwords: DEFAULT_STOPWORDS
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned)
                .collect(),
            exclusions: ["things", "stuff"].into_iter().map(str::to_owned).collect(),
            merge_table: BTreeMap::new(),
            lowercase: true,
            min_token_length: 2,
            no_restore: NO_RESTORE.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

impl NormalizationRules {
    /// Check that merging is idempotent: every base form in the table must be
    /// a fixpoint of [`NormalizationRules::merge`].
    pub fn validate(&self) -> Result<()> {
        for (word, base) in &self.merge_table {
            let next = self.merge(base);
            if &next != base {
                return Err(Error::config(
                    "normalize.merge",
                    format!("merge table is not idempotent: {word} -> {base} -> {next}"),
                ));
            }
        }
        Ok(())
    }

    /// Load stopwords from a one-word-per-line UTF-8 file, replacing the
    /// default list.
    pub fn load_stopwords(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopwords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Ok(())
    }

    /// Load merge entries from a file of "word base" lines, added on top of
    /// any existing entries.
    pub fn load_merge_table(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(word), Some(base), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected \"word base\", got {line:?}"),
                });
            };
            self.merge_table.insert(word.to_owned(), base.to_owned());
        }
        self.validate()
    }

    /// Map a token to its base form. An explicit table entry wins outright;
    /// otherwise the "-ing" / "-ies" / "-es" / "-s" suffix rules run to a
    /// fixpoint so that e.g. "crossings" lands on "cross" in one call.
    pub fn merge(&self, token: &str) -> String {
        let mut current = token.to_owned();
        loop {
            if let Some(base) = self.merge_table.get(&current) {
                return base.clone();
            }
            let next = self.suffix_step(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    fn suffix_step(&self, token: &str) -> String {
        if !token.is_ascii() {
            return token.to_owned();
        }
        let n = token.len();
        if token.ends_with("ing") && n > 5 {
            let stem = &token[..n - 3];
            let sb = stem.as_bytes();
            let m = sb.len();
            // Undo gemination: running -> run.
            if m >= 2 && sb[m - 1] == sb[m - 2] && b"bdgmnprt".contains(&sb[m - 1]) {
                return stem[..m - 1].to_owned();
            }
            if !self.no_restore.contains(stem) && ends_cvc(sb) {
                return format!("{stem}e");
            }
            return stem.to_owned();
        }
        if token.ends_with("ies") && n > 4 {
            return format!("{}y", &token[..n - 3]);
        }
        if token.ends_with("es") && n > 3 {
            let stem = &token[..n - 2];
            if stem.ends_with('s')
                || stem.ends_with('x')
                || stem.ends_with('z')
                || stem.ends_with("ch")
                || stem.ends_with("sh")
            {
                return stem.to_owned();
            }
        }
        if token.ends_with('s')
            && n > 3
            && !token.ends_with("ss")
            && !token.ends_with("us")
            && !token.ends_with("is")
        {
            return token[..n - 1].to_owned();
        }
        token.to_owned()
    }
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// consonant-vowel-consonant ending, the classic cue for a dropped final "e"
/// (bik-ing -> bike). Final w/x/y never take the restored "e".
fn ends_cvc(stem: &[u8]) -> bool {
    let m = stem.len();
    if m < 3 {
        return false;
    }
    let (a, b, c) = (stem[m - 3], stem[m - 2], stem[m - 1]);
    !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, b'w' | b'x' | b'y')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rules_have_stopwords_and_exclusions() {
        let r = NormalizationRules::default();
        assert!(r.stopwords.contains("the"));
        assert!(r.stopwords.contains("and"));
        assert!(r.exclusions.contains("things"));
        assert!(r.exclusions.contains("stuff"));
        assert!(!r.stopwords.contains("walk"));
    }

    #[test]
    fn merge_suffix_rules() {
        let r = NormalizationRules::default();
        assert_eq!(r.merge("walking"), "walk");
        assert_eq!(r.merge("biking"), "bike");
        assert_eq!(r.merge("driving"), "drive");
        assert_eq!(r.merge("running"), "run");
        assert_eq!(r.merge("visiting"), "visit");
        assert_eq!(r.merge("lanes"), "lane");
        assert_eq!(r.merge("buses"), "bus");
        assert_eq!(r.merge("cities"), "city");
        assert_eq!(r.merge("bus"), "bus");
        assert_eq!(r.merge("class"), "class");
        assert_eq!(r.merge("walk"), "walk");
    }

    #[test]
    fn merge_explicit_table_wins() {
        let mut r = NormalizationRules::default();
        r.merge_table.insert("cycling".into(), "cycle".into());
        assert_eq!(r.merge("cycling"), "cycle");
    }

    #[test]
    fn merge_is_idempotent_on_suffix_outputs() {
        let r = NormalizationRules::default();
        for word in [
            "walking", "biking", "running", "blessing", "lanes", "buses", "cities", "glasses",
            "stations", "crossings", "does", "ties", "parks",
        ] {
            let once = r.merge(word);
            assert_eq!(r.merge(&once), once, "word {word:?} merged to {once:?}");
        }
    }

    #[test]
    fn validate_rejects_chained_merges() {
        let mut r = NormalizationRules::default();
        r.merge_table.insert("a1".into(), "b1".into());
        r.merge_table.insert("b1".into(), "c1".into());
        assert!(r.validate().is_err());
    }

    #[test]
    fn validate_accepts_self_mapping_base() {
        let mut r = NormalizationRules::default();
        r.merge_table.insert("walking".into(), "walk".into());
        r.merge_table.insert("walk".into(), "walk".into());
        assert!(r.validate().is_ok());
    }
}
