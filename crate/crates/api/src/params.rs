//! Query-string form of a [`SearchQuery`].
//!
//! Keys: `q`, `tags`, `author`, `from`, `to`, `caps`, `sort`, `page`,
//! `page_size`. `tags` and `caps` are comma-separated and may repeat; every
//! other key may appear at most once. Empty values count as absent.

use std::collections::BTreeSet;

use vizcat_core::catalog::parse_date;
use vizcat_core::search::{SearchQuery, SortKey};

use crate::error::ApiError;

const KEYS: [&str; 9] = ["q", "tags", "author", "from", "to", "caps", "sort", "page", "page_size"];

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_search_query(raw: Option<&str>) -> Result<SearchQuery, ApiError> {
    let mut query = SearchQuery::default();
    let mut seen = BTreeSet::new();
    for (key, value) in url::form_urlencoded::parse(raw.unwrap_or("").as_bytes()) {
        let key = key.as_ref();
        if !KEYS.contains(&key) {
            return Err(ApiError::bad_query(format!("unknown parameter `{key}`")));
        }
        if !matches!(key, "tags" | "caps") && !seen.insert(key.to_owned()) {
            return Err(ApiError::bad_query(format!("parameter `{key}` given more than once")));
        }
        if value.is_empty() {
            continue;
        }
        let date = |v: &str| {
            parse_date(v).ok_or_else(|| ApiError::bad_query(format!("`{key}` must be YYYY-MM-DD, got `{v}`")))
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| ApiError::bad_query(format!("`{key}` must be a non-negative integer, got `{v}`")))
        };
        match key {
            "q" => query.text = value.into_owned(),
            "tags" => query.required_tags.extend(list(&value).map(str::to_owned)),
            "author" => query.author = Some(value.into_owned()),
            "from" => query.added_from = Some(date(&value)?),
            "to" => query.added_to = Some(date(&value)?),
            "caps" => {
                for cap in list(&value) {
                    query.caps.insert(cap.parse().map_err(ApiError::bad_query)?);
                }
            }
            "sort" => query.sort = Some(value.parse::<SortKey>()?),
            "page" => query.page = count(&value)?,
            "page_size" => query.page_size = count(&value)?,
            _ => unreachable!("checked against KEYS"),
        }
    }
    query.validate()?;
    Ok(query)
}

/// The inverse of [`parse_search_query`] for queries whose tags contain no
/// commas.
pub fn search_query_string(query: &SearchQuery) -> String {
    let mut out = url::form_urlencoded::Serializer::new(String::new());
    if !query.text.is_empty() {
        out.append_pair("q", &query.text);
    }
    if !query.required_tags.is_empty() {
        out.append_pair("tags", &query.required_tags.iter().cloned().collect::<Vec<_>>().join(","));
    }
    if let Some(author) = &query.author {
        out.append_pair("author", author);
    }
    if let Some(from) = query.added_from {
        out.append_pair("from", &from.to_string());
    }
    if let Some(to) = query.added_to {
        out.append_pair("to", &to.to_string());
    }
    if !query.caps.is_empty() {
        out.append_pair("caps", &query.caps.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(","));
    }
    if let Some(sort) = query.sort {
        out.append_pair("sort", sort.as_str());
    }
    out.append_pair("page", &query.page.to_string());
    out.append_pair("page_size", &query.page_size.to_string());
    out.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use vizcat_core::catalog::Capability;

    #[test]
    fn parses_lists_and_scalars() {
        let q = parse_search_query(Some(
            "q=vector+glyph&tags=CFD,%20Vector&tags=2D&caps=mpi,slurm&sort=date-asc&page=2&page_size=5&from=2023-01-01",
        ))
        .unwrap();
        assert_eq!(q.text, "vector glyph");
        assert_eq!(q.required_tags, ["2D", "CFD", "Vector"].map(String::from).into());
        assert_eq!(q.caps, [Capability::Mpi, Capability::Slurm].into());
        assert_eq!(q.sort, Some(SortKey::DateAsc));
        assert_eq!((q.page, q.page_size), (2, 5));
        assert_eq!(q.added_from, parse_date("2023-01-01"));
        assert_eq!(parse_search_query(None).unwrap(), SearchQuery::default());
        assert_eq!(parse_search_query(Some("author=&sort=")).unwrap(), SearchQuery::default());
    }

    #[test]
    fn rejects_bad_parameters() {
        for raw in [
            "sort=newest",
            "from=2024-02-01&to=2024-01-01",
            "from=2024-2-1",
            "page_size=0",
            "page_size=101",
            "page=-1",
            "caps=gpu",
            "colour=red",
            "q=a&q=b",
        ] {
            let err = parse_search_query(Some(raw)).unwrap_err();
            assert_eq!(err.code, "bad-query", "{raw}");
        }
    }

    #[test]
    fn query_string_round_trips() {
        let mut q = SearchQuery::text("flow & glyphs = 100%");
        q.required_tags.insert("Time Series".into());
        q.author = Some("Émile".into());
        q.caps.insert(Capability::DatasetReplaceable);
        q.sort = Some(SortKey::TitleAsc);
        q.page = 3;
        assert_eq!(parse_search_query(Some(&search_query_string(&q))).unwrap(), q);
    }

    proptest::proptest! {
        #[test]
        fn any_valid_query_survives_the_url(seed: u64, text in ".*", author in proptest::option::of(".+")) {
            use rand::SeedableRng;
            let mut q = vizcat_testkit::synth::query(&mut rand::rngs::StdRng::seed_from_u64(seed));
            q.text = text;
            q.author = author;
            proptest::prop_assert_eq!(parse_search_query(Some(&search_query_string(&q))).unwrap(), q);
        }
    }
}
