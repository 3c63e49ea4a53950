//! Brute-force reference implementations of the search operations. These
//! share no code with the library: tokenization, matching, filtering and
//! ordering are restated directly from the definitions.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use chrono::Datelike;
use unicode_normalization::UnicodeNormalization;
use vizcat_core::catalog::{Catalog, ExampleRecord, SectionId};
use vizcat_core::search::{SearchQuery, SortKey};

pub fn lower(s: &str) -> String {
    s.nfc().collect::<String>().to_lowercase().nfc().collect()
}

pub fn toks(s: &str) -> Vec<String> {
    let composed: String = s.nfc().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for c in composed.chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            out.push(lower(&current));
            current.clear();
        }
    }
    if !current.is_empty() {
        out.push(lower(&current));
    }
    out
}

fn query_tokens(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in toks(text) {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

fn token_hits(query: &[String], candidates: &[String]) -> u32 {
    let mut n = 0;
    for q in query {
        let mut hit = false;
        for c in candidates {
            if c == q || c.starts_with(q.as_str()) {
                hit = true;
            }
        }
        if hit {
            n += 1;
        }
    }
    n
}

pub fn oracle_score(record: &ExampleRecord, query: &[String]) -> u32 {
    let title = toks(&record.title);
    let mut tags = Vec::new();
    for tag in &record.tags {
        tags.extend(toks(&tag.name));
    }
    let description = toks(record.sections.get(&SectionId::Description).map(String::as_str).unwrap_or(""));
    3 * token_hits(query, &title) + 2 * token_hits(query, &tags) + token_hits(query, &description)
}

fn passes_filters(record: &ExampleRecord, query: &SearchQuery) -> bool {
    for wanted in &query.required_tags {
        if !record.tags.iter().any(|t| lower(&t.name) == lower(wanted)) {
            return false;
        }
    }
    for cap in &query.caps {
        if !record.capabilities.has(*cap) {
            return false;
        }
    }
    if let Some(author) = &query.author {
        if !record.authors.iter().any(|a| lower(a).contains(&lower(author))) {
            return false;
        }
    }
    if let Some(from) = query.added_from {
        if record.added < from {
            return false;
        }
    }
    if let Some(to) = query.added_to {
        if record.added > to {
            return false;
        }
    }
    true
}

/// All matches with their scores, unordered.
pub fn oracle_matches<'a>(catalog: &'a Catalog, query: &SearchQuery) -> Vec<(&'a ExampleRecord, u32)> {
    let tokens = query_tokens(&query.text);
    let mut out = Vec::new();
    for record in catalog.iter() {
        if !passes_filters(record, query) {
            continue;
        }
        let score = oracle_score(record, &tokens);
        if tokens.is_empty() || score > 0 {
            out.push((record, score));
        }
    }
    out
}

/// (total, [(slug, score)]) for the requested page.
pub fn oracle_search(catalog: &Catalog, query: &SearchQuery) -> (usize, Vec<(String, u32)>) {
    let mut hits = oracle_matches(catalog, query);
    let sort =
        query.sort.unwrap_or(if query_tokens(&query.text).is_empty() { SortKey::DateDesc } else { SortKey::Relevance });
    // Key: optional primary component, then score desc, added desc, slug asc.
    hits.sort_by_key(|(r, s)| {
        let primary = match sort {
            SortKey::Relevance => (0i64, String::new(), String::new()),
            SortKey::DateDesc => (-r.added.num_days_from_ce() as i64, String::new(), String::new()),
            SortKey::DateAsc => (r.added.num_days_from_ce() as i64, String::new(), String::new()),
            SortKey::TitleAsc => (0, lower(&r.title), r.title.clone()),
        };
        (primary, Reverse(*s), Reverse(r.added), r.slug.clone())
    });
    let total = hits.len();
    let start = query.page * query.page_size;
    let page = hits
        .into_iter()
        .enumerate()
        .filter(|(i, _)| *i >= start && *i < start + query.page_size)
        .map(|(_, (r, s))| (r.slug.clone(), s))
        .collect();
    (total, page)
}

/// Recount of facet counts by re-running the oracle with each tag added.
pub fn oracle_facets(catalog: &Catalog, query: &SearchQuery) -> BTreeMap<String, usize> {
    let mut names = BTreeSet::new();
    for record in catalog.iter() {
        for tag in &record.tags {
            names.insert(tag.name.clone());
        }
    }
    names
        .into_iter()
        .map(|name| {
            let mut q = query.clone();
            q.required_tags.insert(name.clone());
            (name, oracle_matches(catalog, &q).len())
        })
        .collect()
}
