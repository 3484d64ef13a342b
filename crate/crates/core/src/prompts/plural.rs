//! Noun pluralization: exception lexicon first, then a small rule cascade.

use std::collections::HashMap;
use std::sync::OnceLock;

const IRREGULARS_TSV: &str = include_str!("../../assets/irregular_plurals.tsv");

fn irregulars() -> &'static HashMap<&'static str, &'static str> {
    static LEXICON: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        IRREGULARS_TSV
            .lines()
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(|line| {
                line.split_once('\t')
                    .unwrap_or_else(|| panic!("malformed irregular-plural line {line:?}"))
            })
            .collect()
    })
}

/// Plural surface form of an English noun.
///
/// Compounds joined by spaces pluralize their last word. Lookup order:
/// bundled irregular lexicon, then rules (`-ss/-x/-z/-ch/-sh` take `es`,
/// consonant + `y` becomes `ies`, everything else takes `s`). Words already
/// ending in a bare `s` are left alone, which makes the function idempotent
/// on its own regular outputs; bare-`s` singulars like "bus" live in the
/// lexicon. Non-alphabetic input falls back to identity.
pub fn pluralize(noun: &str) -> String {
    match noun.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", pluralize_word(last)),
        None => pluralize_word(noun),
    }
}

fn pluralize_word(word: &str) -> String {
    if let Some(plural) = irregulars().get(word.to_lowercase().as_str()) {
        return (*plural).to_string();
    }
    let lower = word.to_lowercase();
    let Some(last) = lower.chars().last() else {
        return word.to_string();
    };
    if !last.is_alphabetic() {
        return word.to_string();
    }
    if lower.ends_with("ss")
        || lower.ends_with('x')
        || lower.ends_with('z')
        || lower.ends_with("ch")
        || lower.ends_with("sh")
    {
        return format!("{word}es");
    }
    if lower.ends_with('s') {
        // treated as already plural; singular bare-s nouns are lexicon entries
        return word.to_string();
    }
    if let Some(stem) = lower.strip_suffix('y') {
        if stem.chars().last().is_some_and(|c| !is_vowel(c)) {
            return format!("{}ies", &word[..word.len() - 1]);
        }
    }
    format!("{word}s")
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_plus_s() {
        assert_eq!(pluralize("animal"), "animals");
        assert_eq!(pluralize("weapon"), "weapons");
        assert_eq!(pluralize("insect"), "insects");
        assert_eq!(pluralize("artisan"), "artisans");
    }

    #[test]
    fn sibilant_rule() {
        assert_eq!(pluralize("class"), "classes");
        assert_eq!(pluralize("box"), "boxes");
        assert_eq!(pluralize("church"), "churches");
        assert_eq!(pluralize("bush"), "bushes");
    }

    #[test]
    fn consonant_y_rule() {
        assert_eq!(pluralize("family"), "families");
        assert_eq!(pluralize("boy"), "boys");
    }

    #[test]
    fn exception_lexicon() {
        assert_eq!(pluralize("person"), "people");
        assert_eq!(pluralize("child"), "children");
        assert_eq!(pluralize("bus"), "buses");
        assert_eq!(pluralize("quiz"), "quizzes");
        assert_eq!(pluralize("stomach"), "stomachs");
        assert_eq!(pluralize("sheep"), "sheep");
    }

    #[test]
    fn idempotent_on_regular_outputs() {
        for noun in ["animal", "weapon", "tree", "family", "reptile"] {
            let plural = pluralize(noun);
            assert_eq!(pluralize(&plural), plural, "noun {noun}");
        }
    }

    #[test]
    fn compounds_pluralize_last_word() {
        assert_eq!(pluralize("fire truck"), "fire trucks");
        assert_eq!(pluralize("wisdom tooth"), "wisdom teeth");
    }

    #[test]
    fn non_alphabetic_identity() {
        assert_eq!(pluralize("42"), "42");
        assert_eq!(pluralize("c++"), "c++");
    }

    #[test]
    fn lexicon_is_well_formed_and_sizeable() {
        let lex = irregulars();
        assert!(lex.len() >= 150, "only {} irregulars bundled", lex.len());
        for (s, p) in lex.iter() {
            assert!(!s.is_empty() && !p.is_empty());
        }
    }
}
