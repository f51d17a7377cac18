//! Text folding shared by name and affiliation matching.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Compatibility-decomposes `s`, drops combining marks and lowercases.
pub fn fold(s: &str) -> String {
    s.nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Folds `s` and keeps only alphanumeric characters.
pub fn fold_compact(s: &str) -> String {
    fold(s).chars().filter(|c| c.is_alphanumeric()).collect()
}

/// Folds `s` into space-separated alphanumeric words.
pub fn fold_words(s: &str) -> String {
    let folded = fold(s);
    let mut out = String::with_capacity(folded.len());
    for word in folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Splits on `;`, honouring `\;` and `\\` escapes.
pub fn split_escaped(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.peek() {
                Some(';') | Some('\\') => current.push(chars.next().unwrap()),
                _ => current.push('\\'),
            },
            ';' => parts.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    parts.push(current);
    parts
}

/// Inverse of [`split_escaped`] for a single item.
pub fn escape_item(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c == ';' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

pub fn join_escaped<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .map(|s| escape_item(s.as_ref()))
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn folding() {
        assert_eq!(fold("Ñúñez"), "nunez");
        assert_eq!(fold_compact("D'Amico"), "damico");
        assert_eq!(fold_compact("De  La-Torre"), "delatorre");
        assert_eq!(fold_words("Univ. Bologna, Dept Phys;"), "univ bologna dept phys");
        assert_eq!(fold_words("ﬁsica"), "fisica");
    }

    #[test]
    fn escaped_split() {
        assert_eq!(split_escaped(r"a;b\;c;d"), vec!["a", "b;c", "d"]);
        assert_eq!(split_escaped(r"x\y"), vec![r"x\y"]);
        assert_eq!(split_escaped(""), vec![""]);
    }

    proptest! {
        #[test]
        fn escape_roundtrip(items in prop::collection::vec(".*", 1..5)) {
            let joined = join_escaped(&items);
            prop_assert_eq!(split_escaped(&joined), items);
        }
    }
}
