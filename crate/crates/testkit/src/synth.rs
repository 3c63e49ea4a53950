//! Random catalogs and queries over a deliberately small vocabulary so that
//! prefix hits, ties on score and date, and case/normalization variants are
//! frequent.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use vizcat_core::catalog::{
    Capabilities, Capability, Catalog, ContainerRef, ExampleRecord, SectionId, Tag, TagCategory,
};
use vizcat_core::search::{SearchQuery, SortKey};

const WORDS: &[&str] = &[
    "vector",
    "vectors",
    "vec",
    "Vortex",
    "flow",
    "Fluid",
    "flows",
    "glyph",
    "Glyphs",
    "volume",
    "VOLUMES",
    "mesh",
    "Meshing",
    "straße",
    "STRASSE",
    "École",
    "e\u{301}cole",
    "Ωmega",
    "ωmega",
    "2D",
    "3D",
    "x",
    "in",
    "situ",
    "catalyst",
    "ray",
    "rays",
    "slice",
];

const SEPARATORS: &[&str] = &[" ", " ", " ", "-", ", ", ": ", " / ", "_"];

pub const TAGS: &[(&str, TagCategory)] = &[
    ("Vector", TagCategory::DataType),
    ("Scalar", TagCategory::DataType),
    ("2D", TagCategory::DataType),
    ("3D", TagCategory::DataType),
    ("Time Series", TagCategory::DataType),
    ("Glyphs", TagCategory::Technique),
    ("Volume Rendering", TagCategory::Technique),
    ("In-Situ", TagCategory::Technique),
    ("CFD", TagCategory::Domain),
    ("Astrophysics", TagCategory::Domain),
    ("École", TagCategory::Domain),
];

const AUTHORS: &[&str] = &["Ada Lovelace", "Grace Hopper", "Émile Borel", "ALAN TURING", "Jo Doe", "Jo Lee"];

fn phrase(rng: &mut impl Rng, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    let mut out = String::new();
    for i in 0..n {
        if i > 0 {
            out.push_str(SEPARATORS.choose(rng).unwrap());
        }
        out.push_str(WORDS.choose(rng).unwrap());
    }
    out
}

fn date(rng: &mut impl Rng) -> NaiveDate {
    // A narrow window so that equal dates are common.
    NaiveDate::from_ymd_opt(2023, 1, 1).unwrap() + chrono::Duration::days(rng.gen_range(0..40))
}

pub fn record(rng: &mut impl Rng, slug: String) -> ExampleRecord {
    let mut tags: Vec<Tag> =
        TAGS.iter().filter(|_| rng.gen_bool(0.3)).map(|(name, category)| Tag::new(*name, *category)).collect();
    if !tags.iter().any(|t| t.category == TagCategory::DataType) {
        tags.insert(0, Tag::new("Scalar", TagCategory::DataType));
    }
    tags.shuffle(rng);
    let mut sections: BTreeMap<SectionId, String> = SectionId::ALL.into_iter().map(|id| (id, String::new())).collect();
    sections.insert(SectionId::Description, if rng.gen_bool(0.15) { String::new() } else { phrase(rng, 8) });
    sections.insert(SectionId::Instructions, phrase(rng, 3));
    let mpi = rng.gen_bool(0.5);
    let n_authors = rng.gen_range(1..=2);
    ExampleRecord {
        slug,
        title: phrase(rng, 4),
        authors: AUTHORS.choose_multiple(rng, n_authors).map(|a| a.to_string()).collect(),
        added: date(rng),
        tags,
        capabilities: Capabilities {
            preview: rng.gen_bool(0.5),
            mpi,
            slurm: mpi && rng.gen_bool(0.6),
            dataset_replaceable: rng.gen_bool(0.5),
        },
        single_task: false,
        container: ContainerRef { image: "alpine:3.19".into(), entrypoint: vec!["true".into()], recipe_path: None },
        sections,
        images: (1..=rng.gen_range(0..3)).map(|i| format!("images/{i:02}.png")).collect(),
        issue_url: None,
        resources_dir: None,
    }
}

/// A catalog with `0..=max` examples.
pub fn catalog(rng: &mut impl Rng, max: usize) -> Catalog {
    let n = rng.gen_range(0..=max);
    catalog_of(rng, n)
}

/// A catalog with exactly `n` examples.
pub fn catalog_of(rng: &mut impl Rng, n: usize) -> Catalog {
    let records: Vec<_> = (0..n).map(|i| record(rng, format!("ex-{:02}-{}", (i * 7919) % 97, i))).collect();
    Catalog::from_records("/synthetic", records)
}

fn vary_case(rng: &mut impl Rng, s: &str) -> String {
    match rng.gen_range(0..3) {
        0 => s.to_string(),
        1 => s.to_uppercase(),
        _ => s.to_lowercase(),
    }
}

fn query_word(rng: &mut impl Rng) -> String {
    let word = WORDS.choose(rng).unwrap();
    let word = if rng.gen_bool(0.4) {
        let chars: Vec<char> = word.chars().collect();
        chars[..rng.gen_range(1..=chars.len())].iter().collect()
    } else {
        word.to_string()
    };
    vary_case(rng, &word)
}

/// A valid query (page size in range, date range ordered).
pub fn query(rng: &mut impl Rng) -> SearchQuery {
    let text = match rng.gen_range(0..10) {
        0..=2 => String::new(),
        3 => "  --  ".into(),
        4 => "zzz".into(),
        _ => (0..rng.gen_range(1..=3)).map(|_| query_word(rng)).collect::<Vec<_>>().join(" "),
    };
    let mut q = SearchQuery { text, ..SearchQuery::default() };
    for _ in 0..rng.gen_range(0..3) {
        if rng.gen_bool(0.5) {
            let (name, _) = TAGS.choose(rng).unwrap();
            q.required_tags.insert(vary_case(rng, name));
        }
    }
    if rng.gen_bool(0.25) {
        let author = AUTHORS.choose(rng).unwrap();
        let chars: Vec<char> = author.chars().collect();
        let start = rng.gen_range(0..chars.len());
        let end = rng.gen_range(start + 1..=chars.len());
        q.author = Some(vary_case(rng, &chars[start..end].iter().collect::<String>()));
    }
    if rng.gen_bool(0.3) {
        let (a, b) = (date(rng), date(rng));
        let (from, to) = if a <= b { (a, b) } else { (b, a) };
        match rng.gen_range(0..3) {
            0 => q.added_from = Some(from),
            1 => q.added_to = Some(to),
            _ => (q.added_from, q.added_to) = (Some(from), Some(to)),
        }
    }
    for cap in Capability::ALL {
        if rng.gen_bool(0.15) {
            q.caps.insert(cap);
        }
    }
    q.sort = if rng.gen_bool(0.4) { None } else { Some(*SortKey::ALL.choose(rng).unwrap()) };
    q.page_size = match rng.gen_range(0..4) {
        0 => rng.gen_range(1..=3),
        1 => rng.gen_range(1..=10),
        2 => rng.gen_range(1..=100),
        _ => 30,
    };
    q.page = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..5) };
    q
}

const HOSTILE: &[&str] = &[
    " ",
    "  ",
    "'",
    "\"",
    ";",
    "$(",
    ")",
    "`",
    "\\",
    "*",
    "?",
    "&",
    "|",
    "<",
    ">",
    "#",
    "~",
    "!",
    "{",
    "}",
    "[",
    "]",
    "$HOME",
    "${x}",
    "-",
    "--",
    "=",
    "%",
    "^",
    "é",
    "データ",
    "\u{a0}",
    "a",
    "b",
    "run 1",
    "'; rm -rf / #",
    "$(touch pwned)",
    "`id`",
    "&&",
    "||",
];

/// An absolute path whose components are made of shell metacharacters,
/// quotes and non-ASCII text.
pub fn hostile_path(rng: &mut impl Rng) -> String {
    let mut path = String::new();
    for _ in 0..rng.gen_range(1..=4) {
        path.push('/');
        for _ in 0..rng.gen_range(1..=4) {
            path.push_str(HOSTILE[rng.gen_range(0..HOSTILE.len())]);
        }
    }
    path
}
