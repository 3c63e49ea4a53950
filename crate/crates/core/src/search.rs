//! Filtering, ranking, keyword suggestions and facet counts over a
//! [`Catalog`].
//!
//! Everything here is a pure function of its inputs and scans the catalog
//! linearly.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Capability, Catalog, ExampleRecord, Tag};
use crate::text::{fold, token_matches, tokens};

pub const DEFAULT_PAGE_SIZE: usize = 30;
pub const MAX_PAGE_SIZE: usize = 100;

pub const TITLE_WEIGHT: u32 = 3;
pub const TAG_WEIGHT: u32 = 2;
pub const DESCRIPTION_WEIGHT: u32 = 1;

/// Title words shorter than this are not offered as suggestions.
pub const MIN_SUGGESTION_WORD_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    Relevance,
    DateDesc,
    DateAsc,
    TitleAsc,
}

impl SortKey {
    pub const ALL: [SortKey; 4] = [Self::Relevance, Self::DateDesc, Self::DateAsc, Self::TitleAsc];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Relevance => "relevance",
            Self::DateDesc => "date_desc",
            Self::DateAsc => "date_asc",
            Self::TitleAsc => "title_asc",
        }
    }
}

impl fmt::Display for SortKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SortKey {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.trim().replace('-', "_");
        Self::ALL.into_iter().find(|k| k.as_str() == normalized).ok_or_else(|| QueryError::UnknownSort(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("page_size must be between 1 and {MAX_PAGE_SIZE}, got {0}")]
    PageSize(usize),
    #[error("date range is reversed: {from} > {to}")]
    DateRange { from: NaiveDate, to: NaiveDate },
    #[error("unknown sort key `{0}`")]
    UnknownSort(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub text: String,
    /// Tag names, matched case-insensitively. All must be present.
    pub required_tags: BTreeSet<String>,
    /// Case-insensitive substring of any author.
    pub author: Option<String>,
    pub added_from: Option<NaiveDate>,
    pub added_to: Option<NaiveDate>,
    pub caps: BTreeSet<Capability>,
    /// `None` picks relevance for non-empty text and newest-first otherwise.
    pub sort: Option<SortKey>,
    pub page: usize,
    pub page_size: usize,
}

impl Default for SearchQuery {
    fn default() -> Self {
        Self {
            text: String::new(),
            required_tags: BTreeSet::new(),
            author: None,
            added_from: None,
            added_to: None,
            caps: BTreeSet::new(),
            sort: None,
            page: 0,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

impl SearchQuery {
    pub fn text(text: impl Into<String>) -> Self {
        Self { text: text.into(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            return Err(QueryError::PageSize(self.page_size));
        }
        if let (Some(from), Some(to)) = (self.added_from, self.added_to) {
            if from > to {
                return Err(QueryError::DateRange { from, to });
            }
        }
        Ok(())
    }

    /// Distinct folded query tokens in order of first appearance. Text with
    /// no alphanumeric content yields no tokens and behaves like empty text.
    pub fn text_tokens(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        tokens(&self.text).into_iter().filter(|t| seen.insert(t.clone())).collect()
    }

    pub fn effective_sort(&self) -> SortKey {
        self.sort.unwrap_or(if self.text_tokens().is_empty() { SortKey::DateDesc } else { SortKey::Relevance })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub slug: String,
    pub title: String,
    pub tags: Vec<Tag>,
    pub first_image: Option<String>,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Matches across all pages.
    pub total: usize,
    pub items: Vec<SearchHit>,
}

/// Token sets of one record, computed once per query.
struct Indexed {
    title: Vec<String>,
    tags: Vec<String>,
    description: Vec<String>,
}

impl Indexed {
    fn new(record: &ExampleRecord) -> Self {
        Self {
            title: tokens(&record.title),
            tags: record.tags.iter().flat_map(|t| tokens(&t.name)).collect(),
            description: tokens(record.section(crate::catalog::SectionId::Description)),
        }
    }

    fn score(&self, query_tokens: &[String]) -> u32 {
        let hits = |candidates: &[String]| -> u32 {
            query_tokens.iter().filter(|q| candidates.iter().any(|c| token_matches(q, c))).count() as u32
        };
        TITLE_WEIGHT * hits(&self.title) + TAG_WEIGHT * hits(&self.tags) + DESCRIPTION_WEIGHT * hits(&self.description)
    }
}

/// Relevance score of `record` for already-folded query tokens: 3 per token
/// matching a title word, 2 per token matching a tag word, 1 per token
/// matching a description word. A token matches a word it equals or prefixes.
pub fn score(record: &ExampleRecord, text_tokens: &[String]) -> u32 {
    Indexed::new(record).score(text_tokens)
}

/// Filter predicate without the text clause.
struct Filter {
    tag_keys: Vec<String>,
    author: Option<String>,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
    caps: Vec<Capability>,
}

impl Filter {
    fn new(query: &SearchQuery) -> Self {
        Self {
            tag_keys: query.required_tags.iter().map(|t| fold(t)).collect(),
            author: query.author.as_deref().map(fold),
            from: query.added_from,
            to: query.added_to,
            caps: query.caps.iter().copied().collect(),
        }
    }

    fn accepts(&self, record: &ExampleRecord) -> bool {
        self.tag_keys.iter().all(|k| record.has_tag_key(k))
            && self.caps.iter().all(|c| record.capabilities.has(*c))
            && self.author.as_deref().is_none_or(|needle| record.authors.iter().any(|a| fold(a).contains(needle)))
            && self.from.is_none_or(|from| record.added >= from)
            && self.to.is_none_or(|to| record.added <= to)
    }
}

/// Scored matches of `query`, ignoring sort and pagination.
fn matching<'a>(catalog: &'a Catalog, query: &SearchQuery, filter: &Filter) -> Vec<(&'a ExampleRecord, u32)> {
    let query_tokens = query.text_tokens();
    catalog
        .iter()
        .filter(|r| filter.accepts(r))
        .filter_map(|r| {
            let score = Indexed::new(r).score(&query_tokens);
            (query_tokens.is_empty() || score > 0).then_some((r, score))
        })
        .collect()
}

/// Total order for results: the sort key first, then score desc, date desc
/// and slug asc.
fn compare(sort: SortKey, a: &(&ExampleRecord, u32), b: &(&ExampleRecord, u32)) -> Ordering {
    let (ra, sa) = a;
    let (rb, sb) = b;
    let fallback = || sb.cmp(sa).then(rb.added.cmp(&ra.added)).then(ra.slug.cmp(&rb.slug));
    match sort {
        SortKey::Relevance => fallback(),
        SortKey::DateDesc => rb.added.cmp(&ra.added).then_with(fallback),
        SortKey::DateAsc => ra.added.cmp(&rb.added).then_with(fallback),
        SortKey::TitleAsc => fold(&ra.title).cmp(&fold(&rb.title)).then(ra.title.cmp(&rb.title)).then_with(fallback),
    }
}

pub fn search(catalog: &Catalog, query: &SearchQuery) -> Result<SearchResult, QueryError> {
    query.validate()?;
    let mut hits = matching(catalog, query, &Filter::new(query));
    let sort = query.effective_sort();
    hits.sort_by(|a, b| compare(sort, a, b));

    let total = hits.len();
    let items = hits
        .into_iter()
        .skip(query.page.saturating_mul(query.page_size))
        .take(query.page_size)
        .map(|(r, score)| SearchHit {
            slug: r.slug.clone(),
            title: r.title.clone(),
            tags: r.tags.clone(),
            first_image: r.first_image().map(str::to_owned),
            score,
        })
        .collect();
    Ok(SearchResult { total, items })
}

/// For every tag in the vocabulary, how many examples would match if that tag
/// were also required. Sort and pagination are ignored.
pub fn facet_counts(catalog: &Catalog, query: &SearchQuery) -> BTreeMap<String, usize> {
    let base = matching(catalog, query, &Filter::new(query));
    catalog
        .tag_vocabulary()
        .iter()
        .map(|tag| {
            let key = tag.key();
            let count = base.iter().filter(|(r, _)| r.has_tag_key(&key)).count();
            (tag.name.clone(), count)
        })
        .collect()
}

#[derive(Default)]
struct Candidate {
    tag_display: Option<String>,
    word_display: Option<String>,
    documents: usize,
}

impl Candidate {
    fn display(&self) -> &str {
        self.tag_display.as_deref().or(self.word_display.as_deref()).unwrap_or_default()
    }
}

/// Keyword suggestions: tag names and title words (at least three
/// characters) whose folded form starts with the folded prefix, most
/// frequent first, then alphabetical.
pub fn suggest(catalog: &Catalog, prefix: &str, limit: usize) -> Vec<String> {
    let mut candidates: BTreeMap<String, Candidate> = BTreeMap::new();
    for record in catalog.iter() {
        let mut in_record = BTreeSet::new();
        for tag in &record.tags {
            let entry = candidates.entry(tag.key()).or_default();
            entry.tag_display.get_or_insert_with(|| tag.name.clone());
            in_record.insert(tag.key());
        }
        for word in crate::text::words(&record.title) {
            if word.chars().count() < MIN_SUGGESTION_WORD_LEN {
                continue;
            }
            let key = fold(&word);
            let entry = candidates.entry(key.clone()).or_default();
            if entry.word_display.as_ref().is_none_or(|d| word < *d) {
                entry.word_display = Some(word);
            }
            in_record.insert(key);
        }
        for key in in_record {
            candidates.get_mut(&key).expect("inserted above").documents += 1;
        }
    }

    let prefix = fold(prefix);
    let mut ranked: Vec<(&String, &Candidate)> =
        candidates.iter().filter(|(key, _)| key.starts_with(&prefix)).collect();
    ranked
        .sort_by(|(ka, a), (kb, b)| b.documents.cmp(&a.documents).then(ka.cmp(kb)).then(a.display().cmp(b.display())));
    ranked.into_iter().take(limit).map(|(_, c)| c.display().to_owned()).collect()
}
