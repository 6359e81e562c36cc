use std::collections::BTreeSet;
use std::sync::OnceLock;

/// Coarse part-of-speech classes, just enough to spot modifier-noun phrases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Adjective,
    Adverb,
    Noun,
    /// Determiners, pronouns, prepositions, conjunctions, auxiliaries.
    Closed,
}

const ADVERBS: &[&str] = &[
    "really", "very", "quite", "too", "so", "rather", "extremely", "pretty", "somewhat", "super",
    "incredibly", "fairly", "truly", "highly", "always", "never", "often", "barely", "hardly",
    "almost",
];

const ADJECTIVES: &[&str] = &[
    "good", "bad", "horrible", "awful", "wonderful", "spectacular", "great", "nice", "terrible",
    "devastating", "safe", "unsafe", "clean", "dirty", "slow", "fast", "late", "early", "crowded",
    "busy", "cheap", "convenient", "frequent", "easy", "hard", "long", "short", "new", "old",
    "big", "small", "poor", "fine", "happy", "scary", "rough", "smooth", "quick", "loud", "quiet",
    "cold", "hot", "full", "empty", "broken", "ugly", "friendly", "unfriendly", "dark", "bright",
    "wide", "narrow", "steep", "flat", "rude", "kind", "fresh", "stale", "wet", "dry", "heavy",
    "light", "strong", "weak", "deep", "shallow", "high", "low", "free", "direct", "local",
    "public", "private",
];

const CLOSED: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "and", "or",
    "but", "nor", "yet", "if", "because", "while", "when", "where", "how", "why", "what", "who",
    "whom", "which", "to", "of", "in", "on", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "from", "up",
    "down", "out", "off", "over", "under", "again", "then", "once", "here", "there", "all", "any",
    "both", "each", "few", "more", "most", "other", "some", "such", "no", "not", "own", "same",
    "than", "as", "less", "is", "am", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "will", "would", "shall", "should", "can",
    "could", "may", "might", "must", "don't", "doesn't", "didn't", "isn't", "aren't", "wasn't",
    "weren't", "won't", "wouldn't", "can't", "couldn't", "shouldn't", "i'm", "i've", "i'd",
    "it's", "that's", "there's", "they're", "we're", "you're",
];

/// Common "-ly" words that are nouns, not adverbs.
const LY_NOUNS: &[&str] = &[
    "family", "assembly", "supply", "rally", "bully", "jelly", "belly", "alley", "reply", "italy",
    "lily", "holly",
];

fn set(words: &'static [&'static str]) -> BTreeSet<&'static str> {
    words.iter().copied().collect()
}

fn adverbs() -> &'static BTreeSet<&'static str> {
    static S: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    S.get_or_init(|| set(ADVERBS))
}

fn adjectives() -> &'static BTreeSet<&'static str> {
    static S: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    S.get_or_init(|| set(ADJECTIVES))
}

fn closed() -> &'static BTreeSet<&'static str> {
    static S: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    S.get_or_init(|| set(CLOSED))
}

fn ly_nouns() -> &'static BTreeSet<&'static str> {
    static S: OnceLock<BTreeSet<&'static str>> = OnceLock::new();
    S.get_or_init(|| set(LY_NOUNS))
}

/// Tag one token. Word lists win over suffix heuristics; anything unmatched
/// counts as a noun, which errs toward producing phrase candidates.
pub fn tag_token(token: &str) -> PosTag {
    let lower = token.to_lowercase();
    let w = lower.as_str();
    if adverbs().contains(w) {
        return PosTag::Adverb;
    }
    if adjectives().contains(w) {
        return PosTag::Adjective;
    }
    if closed().contains(w) {
        return PosTag::Closed;
    }
    let n = w.len();
    if w.is_ascii() {
        if w.ends_with("ly") && n >= 4 && !ly_nouns().contains(w) {
            return PosTag::Adverb;
        }
        if (w.ends_with("ous") && n >= 5)
            || (w.ends_with("ful") && n >= 5)
            || (w.ends_with("ible") && n >= 6)
            || (w.ends_with("able") && n >= 6)
            || (w.ends_with("ive") && n >= 6)
            || (w.ends_with("less") && n >= 6)
        {
            return PosTag::Adjective;
        }
    }
    PosTag::Noun
}

pub fn tag_tokens(tokens: &[String]) -> Vec<PosTag> {
    tokens.iter().map(|t| tag_token(t)).collect()
}
