//! Prompt templates: slotted sentence patterns instantiated with
//! (hyponym, hypernym\[, co-hyponym\]) triples.
//!
//! A pattern contains the slot markers `{hypo}`, `{hyper}` and `{cohypo}`.
//! Catalog rows may bundle surface variants with parenthesized alternation
//! groups like `(and-or) (any-some)`; such a row expands into one template
//! per variant, all sharing the row's id as their group, and the group scores
//! as the mean of its variants.

mod plural;

pub use plural::pluralize;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("missing argument for slot {{{0}}}")]
    MissingArgument(&'static str),
    #[error("argument given for slot {{{0}}} which the template does not contain")]
    UnexpectedArgument(&'static str),
    #[error("term for slot {{{slot}}} is invalid: {reason}")]
    BadTerm { slot: &'static str, reason: String },
    #[error("invalid pattern {pattern:?}: {reason}")]
    InvalidPattern { pattern: String, reason: String },
    #[error("catalog line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("catalog line {line}: duplicate template id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("failed to read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptFamily {
    /// `{hypo}` + `{hyper}`.
    Hypernym,
    /// `{hypo}` + `{cohypo}`, no `{hyper}`.
    Cohyponym,
    /// All three slots.
    CohypoAugmented,
}

/// A concrete (alternation-free) prompt pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    /// Shared by all variants expanded from one catalog row; equals `id`
    /// for plain rows.
    pub group: String,
    pub pattern: String,
    /// Pluralize the hypernym argument before substitution.
    pub hyper_is_plural: bool,
    pub family: PromptFamily,
}

impl PromptTemplate {
    pub fn new(
        id: impl Into<String>,
        pattern: impl Into<String>,
        hyper_is_plural: bool,
    ) -> Result<Self, PromptError> {
        let id = id.into();
        let group = id.clone();
        let pattern = pattern.into();
        let family = validate_pattern(&pattern)?;
        Ok(PromptTemplate {
            id,
            group,
            pattern,
            hyper_is_plural,
            family,
        })
    }

    pub fn has_hyper(&self) -> bool {
        self.family != PromptFamily::Cohyponym
    }

    pub fn has_cohypo(&self) -> bool {
        self.family != PromptFamily::Hypernym
    }
}

/// A pattern with its slots filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub text: String,
    /// Byte offset of the substituted hypernym surface form in `text`;
    /// present iff the template contains `{hyper}`.
    pub hyper_start: Option<usize>,
    pub template_id: String,
    pub hypo: String,
    pub hyper: Option<String>,
    pub cohypo: Option<String>,
}

const SLOTS: [&str; 3] = ["hypo", "hyper", "cohypo"];

fn validate_pattern(pattern: &str) -> Result<PromptFamily, PromptError> {
    let invalid = |reason: String| PromptError::InvalidPattern {
        pattern: pattern.to_string(),
        reason,
    };
    let mut counts = [0usize; 3];
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let Some(close) = after.find('}') else {
            return Err(invalid("unclosed '{'".into()));
        };
        let name = &after[..close];
        match SLOTS.iter().position(|s| *s == name) {
            Some(i) => counts[i] += 1,
            None => return Err(invalid(format!("unknown slot marker {{{name}}}"))),
        }
        rest = &after[close + 1..];
    }
    if rest.contains('}') {
        return Err(invalid("stray '}'".into()));
    }
    let [hypo, hyper, cohypo] = counts;
    if hypo != 1 {
        return Err(invalid(format!("{{hypo}} must appear exactly once, found {hypo}")));
    }
    if hyper > 1 {
        return Err(invalid(format!("{{hyper}} may appear at most once, found {hyper}")));
    }
    if cohypo > 1 {
        return Err(invalid(format!("{{cohypo}} may appear at most once, found {cohypo}")));
    }
    match (hyper, cohypo) {
        (1, 0) => Ok(PromptFamily::Hypernym),
        (0, 1) => Ok(PromptFamily::Cohyponym),
        (1, 1) => Ok(PromptFamily::CohypoAugmented),
        _ => Err(invalid("pattern needs {hyper} or {cohypo}".into())),
    }
}

fn validate_term(slot: &'static str, term: &str) -> Result<(), PromptError> {
    if term.is_empty() {
        return Err(PromptError::BadTerm {
            slot,
            reason: "empty term".into(),
        });
    }
    if term.contains(['\t', '\n', '\r']) {
        return Err(PromptError::BadTerm {
            slot,
            reason: "term contains tab or newline".into(),
        });
    }
    if term.contains(['{', '}']) {
        return Err(PromptError::BadTerm {
            slot,
            reason: "term contains a slot-marker delimiter".into(),
        });
    }
    Ok(())
}

/// Substitutes the template's slots, pluralizing the hypernym when the
/// template demands it, and records where the hypernym surface form starts.
pub fn instantiate(
    template: &PromptTemplate,
    hypo: &str,
    hyper: Option<&str>,
    cohypo: Option<&str>,
) -> Result<PromptInstance, PromptError> {
    validate_term("hypo", hypo)?;
    if let Some(h) = hyper {
        validate_term("hyper", h)?;
    }
    if let Some(c) = cohypo {
        validate_term("cohypo", c)?;
    }
    if hyper.is_some() && !template.has_hyper() {
        return Err(PromptError::UnexpectedArgument("hyper"));
    }
    if cohypo.is_some() && !template.has_cohypo() {
        return Err(PromptError::UnexpectedArgument("cohypo"));
    }

    let hyper_surface = match (template.has_hyper(), hyper) {
        (true, Some(h)) => Some(if template.hyper_is_plural {
            pluralize(h)
        } else {
            h.to_string()
        }),
        (true, None) => return Err(PromptError::MissingArgument("hyper")),
        (false, _) => None,
    };
    if template.has_cohypo() && cohypo.is_none() {
        return Err(PromptError::MissingArgument("cohypo"));
    }

    let mut text = String::with_capacity(template.pattern.len() + 32);
    let mut hyper_start = None;
    let mut rest = template.pattern.as_str();
    while let Some(open) = rest.find('{') {
        text.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').expect("validated pattern");
        match &after[..close] {
            "hypo" => text.push_str(hypo),
            "hyper" => {
                hyper_start = Some(text.len());
                text.push_str(hyper_surface.as_deref().expect("checked above"));
            }
            "cohypo" => text.push_str(cohypo.expect("checked above")),
            other => unreachable!("validated pattern had slot {other}"),
        }
        rest = &after[close + 1..];
    }
    text.push_str(rest);

    Ok(PromptInstance {
        text,
        hyper_start,
        template_id: template.id.clone(),
        hypo: hypo.to_string(),
        hyper: hyper.map(str::to_string),
        cohypo: cohypo.map(str::to_string),
    })
}

/// Expands parenthesized dash alternations into all surface variants.
///
/// `"a (x-y) b"` becomes `["a x b", "a y b"]`; groups multiply left to
/// right. Parentheses without a dash, or containing a slot marker, are
/// literal text.
fn expand_alternations(pattern: &str) -> Vec<String> {
    let mut variants = vec![String::new()];
    let mut rest = pattern;
    while let Some(open) = rest.find('(') {
        let after = &rest[open + 1..];
        let alternation = after.find(')').and_then(|close| {
            let body = &after[..close];
            let alts: Vec<&str> = body.split('-').collect();
            let is_alternation = alts.len() >= 2
                && alts.iter().all(|a| !a.is_empty())
                && !body.contains(['{', '}', '(']);
            is_alternation.then_some((alts, close))
        });
        match alternation {
            Some((alts, close)) => {
                let prefix = &rest[..open];
                variants = variants
                    .iter()
                    .flat_map(|v| {
                        alts.iter().map(move |alt| {
                            let mut next = v.clone();
                            next.push_str(prefix);
                            next.push_str(alt);
                            next
                        })
                    })
                    .collect();
                rest = &after[close + 1..];
            }
            None => {
                // literal '(' with no alternation body
                for v in &mut variants {
                    v.push_str(&rest[..=open]);
                }
                rest = after;
            }
        }
    }
    for v in &mut variants {
        v.push_str(rest);
    }
    variants
}

/// Parses a catalog from text: one template per line,
/// `id<TAB>pattern<TAB>flags`, `#` comments, empty lines ignored.
///
/// Recognized flag: `plural_hyper`. Alternation rows expand into variant
/// templates with ids `id~0`, `id~1`, ... sharing the row id as group.
pub fn parse_catalog(source: &str) -> Result<Vec<PromptTemplate>, PromptError> {
    let mut templates = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    for (line_idx, raw) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let id = fields.next().unwrap_or("").trim();
        let pattern = fields.next().map(str::trim).unwrap_or("");
        let flags = fields.next().map(str::trim).unwrap_or("");
        if let Some(extra) = fields.next() {
            return Err(PromptError::Parse {
                line: line_no,
                reason: format!("unexpected fourth field {extra:?}"),
            });
        }
        if id.is_empty() || pattern.is_empty() {
            return Err(PromptError::Parse {
                line: line_no,
                reason: "expected id<TAB>pattern[<TAB>flags]".into(),
            });
        }
        let mut hyper_is_plural = false;
        for flag in flags.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            match flag {
                "plural_hyper" => hyper_is_plural = true,
                other => {
                    return Err(PromptError::Parse {
                        line: line_no,
                        reason: format!("unknown flag {other:?}"),
                    })
                }
            }
        }
        if !seen_ids.insert(id.to_string()) {
            return Err(PromptError::DuplicateId {
                line: line_no,
                id: id.to_string(),
            });
        }
        let variants = expand_alternations(pattern);
        let expanded_ids: Vec<String> = if variants.len() == 1 {
            vec![id.to_string()]
        } else {
            (0..variants.len()).map(|i| format!("{id}~{i}")).collect()
        };
        for (variant_id, variant_pattern) in expanded_ids.into_iter().zip(variants) {
            if variant_id != id && !seen_ids.insert(variant_id.clone()) {
                return Err(PromptError::DuplicateId {
                    line: line_no,
                    id: variant_id,
                });
            }
            let family = validate_pattern(&variant_pattern).map_err(|e| PromptError::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
            templates.push(PromptTemplate {
                id: variant_id,
                group: id.to_string(),
                pattern: variant_pattern,
                hyper_is_plural,
                family,
            });
        }
    }
    Ok(templates)
}

/// Loads a catalog file in the [`parse_catalog`] format.
pub fn load_catalog(path: &Path) -> Result<Vec<PromptTemplate>, PromptError> {
    let source = std::fs::read_to_string(path).map_err(|source| PromptError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_catalog(&source)
}

/// One catalog row: the variants sharing a group id. Scores as the mean of
/// its variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateGroup {
    pub id: String,
    pub variants: Vec<PromptTemplate>,
}

impl TemplateGroup {
    pub fn family(&self) -> PromptFamily {
        self.variants[0].family
    }

    /// Representative pattern: the row pattern for single-variant groups.
    pub fn pattern(&self) -> &str {
        &self.variants[0].pattern
    }
}

/// Groups a parsed catalog by row id, preserving catalog order.
pub fn group_catalog(templates: &[PromptTemplate]) -> Vec<TemplateGroup> {
    let mut groups: Vec<TemplateGroup> = Vec::new();
    for template in templates {
        match groups.last_mut() {
            Some(last) if last.id == template.group => last.variants.push(template.clone()),
            _ => groups.push(TemplateGroup {
                id: template.group.clone(),
                variants: vec![template.clone()],
            }),
        }
    }
    groups
}

/// The catalogs bundled with the crate.
pub mod builtin {
    use super::{group_catalog, parse_catalog, TemplateGroup};

    pub const HYPERNYM_TSV: &str = include_str!("../../assets/prompts_hypernym.tsv");
    pub const COHYPONYM_TSV: &str = include_str!("../../assets/prompts_cohyponym.tsv");
    pub const COHYPO_AUGMENTED_TSV: &str =
        include_str!("../../assets/prompts_cohypo_augmented.tsv");

    fn parse(source: &str) -> Vec<TemplateGroup> {
        group_catalog(&parse_catalog(source).expect("bundled catalog is valid"))
    }

    /// The 76 hypernym prompt rows.
    pub fn hypernym() -> Vec<TemplateGroup> {
        parse(HYPERNYM_TSV)
    }

    /// The 11 co-hyponym (enumeration) prompt rows.
    pub fn cohyponym() -> Vec<TemplateGroup> {
        parse(COHYPONYM_TSV)
    }

    /// The co-hyponym-augmented hypernym prompt rows (plural hypernym slot).
    pub fn cohypo_augmented() -> Vec<TemplateGroup> {
        parse(COHYPO_AUGMENTED_TSV)
    }

    /// Default rerank prompt for co-hyponym discovery.
    pub const DEFAULT_RERANK_PROMPT: &str = "c_such_as_and_other_same_type";
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tpl(pattern: &str) -> PromptTemplate {
        PromptTemplate::new("t", pattern, false).unwrap()
    }

    #[test]
    fn instantiate_tracks_hyper_offset() {
        let instance = tpl_instance("{hypo} is a kind of {hyper}", "alligator", "reptile");
        assert_eq!(instance.text, "alligator is a kind of reptile");
        assert_eq!(instance.hyper_start, Some(23));
    }

    fn tpl_instance(pattern: &str, hypo: &str, hyper: &str) -> PromptInstance {
        instantiate(&tpl(pattern), hypo, Some(hyper), None).unwrap()
    }

    #[test]
    fn instantiate_simple_substitution() {
        let instance = tpl_instance("{hypo} or some other {hyper}", "dagger", "weapon");
        assert_eq!(instance.text, "dagger or some other weapon");
        assert_eq!(instance.hyper_start, Some(21));
        assert!(instance.text[instance.hyper_start.unwrap()..].starts_with("weapon"));
    }

    #[test]
    fn instantiate_pluralizes_hyper_when_flagged() {
        let template = PromptTemplate::new(
            "t",
            "{hypo}, {cohypo} are an {hyper} that",
            true,
        )
        .unwrap();
        let instance =
            instantiate(&template, "jeweller", Some("artisan"), Some("watchmaker")).unwrap();
        assert_eq!(instance.text, "jeweller, watchmaker are an artisans that");
        let start = instance.hyper_start.unwrap();
        assert!(instance.text[start..].starts_with("artisans"));
        // the raw argument is preserved, only the surface form is plural
        assert_eq!(instance.hyper.as_deref(), Some("artisan"));
    }

    #[test]
    fn instantiate_rejects_missing_and_unexpected_args() {
        let template = tpl("{hypo} is a {hyper}");
        assert!(matches!(
            instantiate(&template, "dog", None, None),
            Err(PromptError::MissingArgument("hyper"))
        ));
        assert!(matches!(
            instantiate(&template, "dog", Some("animal"), Some("cat")),
            Err(PromptError::UnexpectedArgument("cohypo"))
        ));
    }

    #[test]
    fn instantiate_rejects_bad_terms() {
        let template = tpl("{hypo} is a {hyper}");
        assert!(matches!(
            instantiate(&template, "a\tb", Some("animal"), None),
            Err(PromptError::BadTerm { slot: "hypo", .. })
        ));
        assert!(matches!(
            instantiate(&template, "dog", Some("{hyper}"), None),
            Err(PromptError::BadTerm { slot: "hyper", .. })
        ));
        assert!(matches!(
            instantiate(&template, "", Some("animal"), None),
            Err(PromptError::BadTerm { slot: "hypo", .. })
        ));
    }

    #[test]
    fn multiword_hyper_offset_marks_phrase_start() {
        let instance = tpl_instance("{hypo} is a {hyper}", "dagger", "edged weapon");
        assert_eq!(instance.text, "dagger is a edged weapon");
        assert_eq!(instance.hyper_start, Some(12));
    }

    #[test]
    fn pattern_validation() {
        assert!(PromptTemplate::new("t", "{hypo} and {hypo}", false).is_err());
        assert!(PromptTemplate::new("t", "no slots at all", false).is_err());
        assert!(PromptTemplate::new("t", "{hypo} is {unknown}", false).is_err());
        assert!(PromptTemplate::new("t", "{hypo} {hyper} {cohypo}", false).is_ok());
        assert_eq!(
            tpl("{hypo} or {cohypo}").family,
            PromptFamily::Cohyponym
        );
    }

    #[test]
    fn alternation_expansion_order() {
        assert_eq!(
            expand_alternations("{hypo} (and-or) (any-some) other {hyper}"),
            vec![
                "{hypo} and any other {hyper}",
                "{hypo} and some other {hyper}",
                "{hypo} or any other {hyper}",
                "{hypo} or some other {hyper}",
            ]
        );
        assert_eq!(expand_alternations("plain (text)"), vec!["plain (text)"]);
    }

    #[test]
    fn parse_catalog_expands_bundles() {
        let templates = parse_catalog(
            "# comment\np1\t{hypo} is a {hyper}\npb\t{hypo} (and-or) other {hyper}\n",
        )
        .unwrap();
        assert_eq!(templates.len(), 3);
        assert_eq!(templates[0].id, "p1");
        assert_eq!(templates[1].id, "pb~0");
        assert_eq!(templates[1].group, "pb");
        assert_eq!(templates[2].pattern, "{hypo} or other {hyper}");
        let groups = group_catalog(&templates);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[1].variants.len(), 2);
    }

    #[test]
    fn parse_catalog_rejects_bad_lines() {
        assert!(matches!(
            parse_catalog("p1\t{hypo} and {hypo}\n"),
            Err(PromptError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_catalog("p1\t{hypo} is a {hyper}\np1\t{hypo} was a {hyper}\n"),
            Err(PromptError::DuplicateId { line: 2, .. })
        ));
        assert!(matches!(
            parse_catalog("p1\t{hypo} is a {hyper}\tmystery_flag\n"),
            Err(PromptError::Parse { line: 1, .. })
        ));
        assert_eq!(parse_catalog("").unwrap(), vec![]);
    }

    #[test]
    fn builtin_catalog_sizes() {
        assert_eq!(builtin::hypernym().len(), 76);
        assert_eq!(builtin::cohyponym().len(), 11);
        assert_eq!(builtin::cohypo_augmented().len(), 35);
    }

    #[test]
    fn builtin_catalog_families() {
        for group in builtin::hypernym() {
            assert_eq!(group.family(), PromptFamily::Hypernym, "{}", group.id);
        }
        for group in builtin::cohyponym() {
            assert_eq!(group.family(), PromptFamily::Cohyponym, "{}", group.id);
        }
        for group in builtin::cohypo_augmented() {
            assert_eq!(group.family(), PromptFamily::CohypoAugmented, "{}", group.id);
            assert!(group.variants.iter().all(|t| t.hyper_is_plural));
        }
    }
}
