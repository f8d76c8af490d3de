//! Similarity profiles: discretized pairwise comparisons of author references.
//!
//! A profile is a fixed-length vector of small integer levels, one per
//! comparison dimension. Schema v1 has ten dimensions with a total table
//! size of 4·2·3⁸ = 52,488 cells, small enough that the likelihood-ratio
//! table can be stored densely by mixed-radix index.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_token, CitationRecord, Corpus, RefId};
use crate::{Error, Result};

/// Schema version produced by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Dimension order is fixed; the index of each entry is the dimension's
/// position in every [`SimilarityProfile`].
const V1_DIMENSIONS: [(&str, u8); 10] = [
    ("title", 4),
    ("journal", 2),
    ("coauthor", 3),
    ("subject", 3),
    ("language", 3),
    ("affiliation", 3),
    ("email", 3),
    ("middle_initial", 3),
    ("suffix", 3),
    ("name_popularity", 3),
];

/// A fixed, embedded English stopword list used when tokenizing titles and
/// affiliations. Exactly 50 words; tokens shorter than two characters are
/// dropped separately by the tokenizer.
pub const STOPWORDS: [&str; 50] = [
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "has", "have", "in",
    "into", "is", "it", "its", "no", "not", "of", "on", "or", "over", "such", "than", "that",
    "the", "their", "then", "there", "these", "they", "this", "to", "under", "upon", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "will", "with", "within", "without",
];

/// The ordered list of comparison dimensions and their cardinalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileSchema {
    version: u32,
    dimensions: &'static [(&'static str, u8)],
}

impl ProfileSchema {
    pub const fn v1() -> Self {
        ProfileSchema {
            version: SCHEMA_VERSION,
            dimensions: &V1_DIMENSIONS,
        }
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn dimension_count(&self) -> usize {
        self.dimensions.len()
    }

    pub fn dimension_name(&self, d: usize) -> &'static str {
        self.dimensions[d].0
    }

    pub fn cardinality(&self, d: usize) -> u8 {
        self.dimensions[d].1
    }

    /// Product of all cardinalities: the number of distinct profiles.
    pub fn table_size(&self) -> usize {
        self.dimensions
            .iter()
            .map(|&(_, c)| c as usize)
            .product()
    }
}

impl Default for ProfileSchema {
    fn default() -> Self {
        ProfileSchema::v1()
    }
}

/// The discretized similarity vector for one pair of references.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimilarityProfile {
    pub levels: Vec<u8>,
    pub schema_version: u32,
}

impl SimilarityProfile {
    /// Validates every level against its dimension's cardinality.
    pub fn new(levels: Vec<u8>, schema: &ProfileSchema) -> Result<Self> {
        if levels.len() != schema.dimension_count() {
            return Err(Error::OutOfRange(format!(
                "profile has {} levels, schema has {} dimensions",
                levels.len(),
                schema.dimension_count()
            )));
        }
        for (d, &level) in levels.iter().enumerate() {
            if level >= schema.cardinality(d) {
                return Err(Error::OutOfRange(format!(
                    "level {} out of range for dimension '{}' (cardinality {})",
                    level,
                    schema.dimension_name(d),
                    schema.cardinality(d)
                )));
            }
        }
        Ok(SimilarityProfile {
            levels,
            schema_version: schema.version(),
        })
    }
}

// ---------------------------------------------------------------------------
// Mixed-radix indexing
// ---------------------------------------------------------------------------

/// Maps a profile to its dense table index. The last dimension is least
/// significant.
pub fn profile_index(profile: &SimilarityProfile, schema: &ProfileSchema) -> Result<usize> {
    if profile.levels.len() != schema.dimension_count() {
        return Err(Error::OutOfRange(format!(
            "profile has {} levels, schema has {} dimensions",
            profile.levels.len(),
            schema.dimension_count()
        )));
    }
    let mut index = 0usize;
    for (d, &level) in profile.levels.iter().enumerate() {
        let card = schema.cardinality(d);
        if level >= card {
            return Err(Error::OutOfRange(format!(
                "level {} out of range for dimension '{}' (cardinality {})",
                level,
                schema.dimension_name(d),
                card
            )));
        }
        index = index * card as usize + level as usize;
    }
    Ok(index)
}

/// Inverse of [`profile_index`].
pub fn profile_unindex(index: usize, schema: &ProfileSchema) -> Result<SimilarityProfile> {
    if index >= schema.table_size() {
        return Err(Error::OutOfRange(format!(
            "index {} out of range for table of size {}",
            index,
            schema.table_size()
        )));
    }
    let n = schema.dimension_count();
    let mut levels = vec![0u8; n];
    let mut rest = index;
    for d in (0..n).rev() {
        let card = schema.cardinality(d) as usize;
        levels[d] = (rest % card) as u8;
        rest /= card;
    }
    Ok(SimilarityProfile {
        levels,
        schema_version: schema.version(),
    })
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Lowercase alphanumeric tokens, at least two characters, stopwords removed.
pub(crate) fn content_tokens(text: &str) -> HashSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .map(normalize_token)
        .filter(|t| t.len() >= 2 && !is_stopword(t))
        .collect()
}

fn normalize_field(text: &str) -> String {
    text.split(|c: char| !c.is_alphanumeric())
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------------
// Per-reference features
// ---------------------------------------------------------------------------

/// Comparison-ready view of one reference, precomputed so that block scoring
/// tokenizes each reference once instead of once per pair.
#[derive(Debug, Clone)]
pub struct RefFeatures {
    title_tokens: HashSet<String>,
    journal: Option<String>,
    coauthor_last_names: HashSet<String>,
    subjects: HashSet<String>,
    language: Option<String>,
    affiliation_tokens: Option<HashSet<String>>,
    email: Option<String>,
    middle_initial: Option<char>,
    suffix: Option<String>,
}

impl RefFeatures {
    pub fn new(citation: &CitationRecord, position: u32) -> Self {
        let author = &citation.authors[position as usize];
        let coauthor_last_names = citation
            .authors
            .iter()
            .enumerate()
            .filter(|&(p, _)| p != position as usize)
            .map(|(_, a)| a.name.last.clone())
            .collect();
        let affiliation_tokens = author.affiliation.as_deref().map(content_tokens).filter(|t| !t.is_empty());
        RefFeatures {
            title_tokens: content_tokens(&citation.title),
            journal: citation.journal.as_deref().map(normalize_field),
            coauthor_last_names,
            subjects: citation.subjects.iter().cloned().collect(),
            language: citation.language.clone(),
            affiliation_tokens,
            email: author.email.clone(),
            middle_initial: author.name.middle_initial,
            suffix: author.name.suffix.clone(),
        }
    }
}

fn tri_state<T: PartialEq>(a: &Option<T>, b: &Option<T>) -> u8 {
    match (a, b) {
        (Some(x), Some(y)) => {
            if x == y {
                2
            } else {
                0
            }
        }
        _ => 1,
    }
}

fn intersection_size(a: &HashSet<String>, b: &HashSet<String>) -> usize {
    if a.len() <= b.len() {
        a.iter().filter(|t| b.contains(*t)).count()
    } else {
        b.iter().filter(|t| a.contains(*t)).count()
    }
}

fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let inter = intersection_size(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Computes the profile from precomputed features. `popularity_bin` comes
/// from the pair's block (or, for cross-block training pairs, the first
/// reference's block).
pub fn profile_from_features(
    a: &RefFeatures,
    b: &RefFeatures,
    popularity_bin: u8,
    schema: &ProfileSchema,
) -> SimilarityProfile {
    let title = (intersection_size(&a.title_tokens, &b.title_tokens)).min(3) as u8;

    let journal = match (&a.journal, &b.journal) {
        (Some(x), Some(y)) if x == y => 1,
        _ => 0,
    };

    let coauthor =
        (intersection_size(&a.coauthor_last_names, &b.coauthor_last_names)).min(2) as u8;

    let subject = (intersection_size(&a.subjects, &b.subjects)).min(2) as u8;

    let language = tri_state(&a.language, &b.language);

    let affiliation = match (&a.affiliation_tokens, &b.affiliation_tokens) {
        (Some(x), Some(y)) => {
            let j = jaccard(x, y);
            if j < 0.2 {
                0
            } else if j <= 0.6 {
                1
            } else {
                2
            }
        }
        _ => 0,
    };

    let email = tri_state(&a.email, &b.email);
    let middle_initial = tri_state(&a.middle_initial, &b.middle_initial);
    let suffix = tri_state(&a.suffix, &b.suffix);

    SimilarityProfile {
        levels: vec![
            title,
            journal,
            coauthor,
            subject,
            language,
            affiliation,
            email,
            middle_initial,
            suffix,
            popularity_bin.min(2),
        ],
        schema_version: schema.version(),
    }
}

/// Computes the similarity profile for two references in the same block.
pub fn compute_profile(
    corpus: &Corpus,
    a: &RefId,
    b: &RefId,
    schema: &ProfileSchema,
) -> Result<SimilarityProfile> {
    if a == b {
        return Err(Error::SelfPair(a.clone()));
    }
    let ra = corpus.reference(a)?;
    let rb = corpus.reference(b)?;
    if ra.block_key != rb.block_key {
        return Err(Error::BlockMismatch {
            a: a.clone(),
            key_a: ra.block_key,
            b: b.clone(),
            key_b: rb.block_key,
        });
    }
    let bin = corpus.block_of(a)?.popularity_bin;
    let (cit_a, _) = corpus.author(a)?;
    let (cit_b, _) = corpus.author(b)?;
    Ok(profile_from_features(
        &RefFeatures::new(cit_a, a.position),
        &RefFeatures::new(cit_b, b.position),
        bin,
        schema,
    ))
}

/// Computes a profile for a cross-block pair as if the references were
/// co-blocked: the name popularity is taken from `a`'s block. Used when
/// sampling non-match training pairs.
pub fn compute_cross_block_profile(
    corpus: &Corpus,
    a: &RefId,
    b: &RefId,
    schema: &ProfileSchema,
) -> Result<SimilarityProfile> {
    if a == b {
        return Err(Error::SelfPair(a.clone()));
    }
    let bin = corpus.block_of(a)?.popularity_bin;
    let (cit_a, _) = corpus.author(a)?;
    let (cit_b, _) = corpus.author(b)?;
    Ok(profile_from_features(
        &RefFeatures::new(cit_a, a.position),
        &RefFeatures::new(cit_b, b.position),
        bin,
        schema,
    ))
}
