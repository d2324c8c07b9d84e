use unicode_normalization::UnicodeNormalization;

/// Function words removed during normalization.
pub const STOPWORDS: [&str; 12] = [
    "a", "an", "and", "by", "for", "in", "of", "on", "or", "the", "to", "with",
];

/// Sorted, deduplicated set of normalized tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenSet(Vec<String>);

impl TokenSet {
    /// Builds a set from arbitrary tokens, sorting and deduplicating them.
    /// Empty tokens are discarded.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = tokens.into_iter().filter(|t| !t.is_empty()).collect();
        tokens.sort_unstable();
        tokens.dedup();
        TokenSet(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical normalized string: tokens joined by single spaces.
    /// Two atoms share a LUI exactly when their keys are equal.
    pub fn key(&self) -> String {
        self.0.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

/// Normalizes a term into its token set.
///
/// Pipeline: NFKC fold, lowercase, possessive `'s` removal, punctuation to
/// whitespace, whitespace split, stopword removal, singularization, then
/// dedupe and sort.
pub fn normalize(raw: &str) -> TokenSet {
    let folded: String = raw.nfkc().flat_map(char::to_lowercase).collect();
    let stripped = strip_possessives(&folded);
    let spaced: String = stripped
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    TokenSet::from_tokens(
        spaced
            .split_whitespace()
            .filter(|t| !STOPWORDS.contains(t))
            .map(singularize),
    )
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Drops `'s` when it ends a word.
fn strip_possessives(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_apostrophe(c)
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1) == Some(&'s')
            && chars.get(i + 2).is_none_or(|n| !n.is_alphanumeric())
        {
            i += 2;
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

/// Suffix rules, first match wins:
/// `-ies` → `-y` (when a stem of at least two letters remains),
/// `-sses` → `-ss`, `-ss` kept, otherwise a trailing `s` is dropped from
/// tokens longer than three characters.
fn singularize(token: &str) -> String {
    let len = token.chars().count();
    if let Some(stem) = token.strip_suffix("ies") {
        if stem.chars().count() >= 2 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = token.strip_suffix("sses") {
        return format!("{stem}ss");
    }
    if token.ends_with("ss") {
        return token.to_string();
    }
    if len > 3 {
        if let Some(stem) = token.strip_suffix('s') {
            return stem.to_string();
        }
    }
    token.to_string()
}
