//! Case folding and tokenization shared by the catalog and the search engine.

use unicode_normalization::UnicodeNormalization;

/// Folds a string for case-insensitive comparison: NFC, lowercase, NFC again.
pub fn fold(s: &str) -> String {
    let lowered: String = s.nfc().collect::<String>().to_lowercase();
    lowered.nfc().collect()
}

/// Splits `s` into alphanumeric runs, preserving their display form.
///
/// The input is NFC-normalized first so that combining sequences stay inside
/// a single token.
pub fn words(s: &str) -> Vec<String> {
    let normalized: String = s.nfc().collect();
    normalized.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_owned).collect()
}

/// Folded alphanumeric tokens of `s`.
pub fn tokens(s: &str) -> Vec<String> {
    words(s).iter().map(|w| fold(w)).collect()
}

/// Query token match rule: exact match or the query token is a prefix of the
/// candidate.
pub fn token_matches(query: &str, candidate: &str) -> bool {
    candidate.starts_with(query)
}
