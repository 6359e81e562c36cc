use super::rules::NormalizationRules;

/// Split text into tokens: maximal runs of alphanumeric characters plus the
/// ASCII and typographic apostrophes. Everything else separates tokens.
/// Tokens are returned verbatim, in order.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '\'' || ch == '\u{2019}' {
            current.push(ch);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Apply [`NormalizationRules`] to a token stream: lowercase, merge to base
/// forms, and drop stopwords, excluded words, and short tokens.
///
/// Stopword and exclusion lists are checked against both the pre-merge and the
/// post-merge form, so an entry like "things" still matches even though
/// merging would first reduce it to "thing". The minimum length applies to the
/// post-merge form, counted in characters.
pub fn normalize(tokens: &[String], rules: &NormalizationRules) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        let pre = if rules.lowercase {
            token.to_lowercase()
        } else {
            token.clone()
        };
        let merged = rules.merge(&pre);
        if merged.chars().count() < rules.min_token_length {
            continue;
        }
        if rules.stopwords.contains(&pre) || rules.stopwords.contains(&merged) {
            continue;
        }
        if rules.exclusions.contains(&pre) || rules.exclusions.contains(&merged) {
            continue;
        }
        out.push(merged);
    }
    out
}
