//! Citation records, author references, and LN-FI blocking.
//!
//! Ingestion reads one citation per JSON line, normalizes every author name
//! (lowercase, diacritics folded to ASCII, punctuation stripped), and derives
//! one [`AuthorReference`] per (citation, author position). References are
//! then partitioned into blocks keyed on last name + first initial; candidate
//! pairs are only ever formed within a block.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Current on-disk format version for persisted corpora.
pub const CORPUS_FORMAT_VERSION: u64 = 1;

/// Default popularity thresholds: blocks with at most 5 references are rare
/// (bin 0), at most 50 are common (bin 1), anything larger is very common
/// (bin 2).
pub const DEFAULT_POPULARITY_THRESHOLDS: (usize, usize) = (5, 50);

/// A normalized personal name.
///
/// All parts are lowercase ASCII with punctuation and internal whitespace
/// removed. `last` is never empty; `middle_initial` is a single character
/// when present; `suffix` is one of `jr`, `sr`, `ii`, `iii`, `iv`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameParts {
    pub last: String,
    #[serde(default)]
    pub first: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub middle_initial: Option<char>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suffix: Option<String>,
}

/// One author slot on a citation: a normalized name plus optional
/// affiliation and email.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub name: NameParts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
}

/// A bibliographic record with normalized authors and subject terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    pub authors: Vec<Author>,
    #[serde(default)]
    pub subjects: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
}

/// Identifies one author name occurrence: a citation id plus the position of
/// the author on that citation.
///
/// The string form is `<citation id>#<position>`; ordering is by citation id
/// then position, which fixes the deterministic order used everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefId {
    pub citation: String,
    pub position: u32,
}

impl RefId {
    pub fn new(citation: impl Into<String>, position: u32) -> Self {
        RefId {
            citation: citation.into(),
            position,
        }
    }
}

impl fmt::Display for RefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.citation, self.position)
    }
}

impl FromStr for RefId {
    type Err = Error;

    /// Splits on the last `#` so citation ids may themselves contain `#`.
    fn from_str(s: &str) -> Result<Self> {
        let (citation, position) = s
            .rsplit_once('#')
            .ok_or_else(|| Error::InvalidRefId(s.to_string()))?;
        if citation.is_empty() {
            return Err(Error::InvalidRefId(s.to_string()));
        }
        let position = position
            .parse::<u32>()
            .map_err(|_| Error::InvalidRefId(s.to_string()))?;
        Ok(RefId::new(citation, position))
    }
}

impl Serialize for RefId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RefId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One author name occurrence, resolved to its normalized name and block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorReference {
    pub ref_id: RefId,
    pub name: NameParts,
    pub block_key: String,
}

/// A set of author references sharing a last name + first initial key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub key: String,
    /// Reference ids sorted by (citation id, position).
    pub refs: Vec<RefId>,
    /// 0 = rare, 1 = common, 2 = very common; derived from `refs.len()` and
    /// the corpus popularity thresholds.
    pub popularity_bin: u8,
}

impl Block {
    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Name normalization
// ---------------------------------------------------------------------------

/// Folds one lowercase character with a diacritic or ligature to its ASCII
/// expansion. Covers Latin-1 Supplement and Latin Extended-A; characters
/// without a fold return `None` and are dropped by the tokenizer.
fn fold_diacritic(c: char) -> Option<&'static str> {
    let folded = match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => "a",
        'æ' => "ae",
        'ç' | 'ć' | 'ĉ' | 'ċ' | 'č' => "c",
        'ď' | 'đ' | 'ð' => "d",
        'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => "e",
        'ĝ' | 'ğ' | 'ġ' | 'ģ' => "g",
        'ĥ' | 'ħ' => "h",
        'ì' | 'í' | 'î' | 'ï' | 'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' => "i",
        'ĵ' => "j",
        'ķ' => "k",
        'ĺ' | 'ļ' | 'ľ' | 'ŀ' | 'ł' => "l",
        'ñ' | 'ń' | 'ņ' | 'ň' => "n",
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' => "o",
        'œ' => "oe",
        'ŕ' | 'ŗ' | 'ř' => "r",
        'ś' | 'ŝ' | 'ş' | 'š' | 'ș' => "s",
        'ß' => "ss",
        'ţ' | 'ť' | 'ŧ' | 'ț' => "t",
        'þ' => "th",
        'ù' | 'ú' | 'û' | 'ü' | 'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' => "u",
        'ŵ' => "w",
        'ý' | 'ÿ' | 'ŷ' => "y",
        'ź' | 'ż' | 'ž' => "z",
        _ => return None,
    };
    Some(folded)
}

fn is_combining_mark(c: char) -> bool {
    matches!(c,
        '\u{0300}'..='\u{036F}'
        | '\u{1AB0}'..='\u{1AFF}'
        | '\u{1DC0}'..='\u{1DFF}'
        | '\u{20D0}'..='\u{20FF}'
        | '\u{FE20}'..='\u{FE2F}')
}

/// Lowercases, folds diacritics, and keeps only ASCII alphanumerics. Spaces,
/// hyphens, and apostrophes vanish, so "García-López" and "O'Brien" become
/// "garcialopez" and "obrien".
pub(crate) fn normalize_token(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        for lc in c.to_lowercase() {
            if lc.is_ascii_alphanumeric() {
                out.push(lc);
            } else if let Some(folded) = fold_diacritic(lc) {
                out.push_str(folded);
            } else if is_combining_mark(lc) {
                // decomposed input: base char already emitted
            }
            // everything else (punctuation, whitespace, unfoldable) drops
        }
    }
    out
}

/// Maps a normalized suffix token to its canonical form, or `None` when the
/// token is not a recognized generational suffix.
fn canonical_suffix(token: &str) -> Option<&'static str> {
    match token {
        "jr" | "jnr" | "junior" => Some("jr"),
        "sr" | "snr" | "senior" => Some("sr"),
        "ii" | "2nd" => Some("ii"),
        "iii" | "3rd" => Some("iii"),
        "iv" | "4th" => Some("iv"),
        _ => None,
    }
}

/// Normalizes the four raw name fields into [`NameParts`].
///
/// The middle name is reduced to its first character; the suffix is
/// canonicalized against {jr, sr, ii, iii, iv} and dropped when
/// unrecognized. Applying the function to its own output is a no-op.
pub fn normalize_name(
    raw_last: &str,
    raw_first: &str,
    raw_middle: &str,
    raw_suffix: &str,
) -> Result<NameParts> {
    let last = normalize_token(raw_last);
    if last.is_empty() {
        return Err(Error::EmptyLastName);
    }
    let first = normalize_token(raw_first);
    let middle_initial = normalize_token(raw_middle).chars().next();
    let suffix = canonical_suffix(&normalize_token(raw_suffix)).map(str::to_string);
    Ok(NameParts {
        last,
        first,
        middle_initial,
        suffix,
    })
}

/// Returns the LN-FI block key for a name: `<last>_<first initial>`, or
/// `<last>_` when the first name is missing so that initial-less references
/// form their own block.
pub fn block_key(name: &NameParts) -> String {
    match name.first.chars().next() {
        Some(initial) => format!("{}_{}", name.last, initial),
        None => format!("{}_", name.last),
    }
}

// ---------------------------------------------------------------------------
// Block building
// ---------------------------------------------------------------------------

fn popularity_bin(size: usize, thresholds: (usize, usize)) -> u8 {
    let (t1, t2) = thresholds;
    if size <= t1 {
        0
    } else if size <= t2 {
        1
    } else {
        2
    }
}

/// Partitions every author reference of `records` into LN-FI blocks.
///
/// Blocks come back sorted by key with their refs sorted by id, so the
/// result is a pure function of the record set.
pub fn build_blocks(records: &[CitationRecord], thresholds: (usize, usize)) -> Result<Vec<Block>> {
    let mut seen = HashSet::with_capacity(records.len());
    for record in records {
        if !seen.insert(record.id.as_str()) {
            return Err(Error::DuplicateCitationId(record.id.clone()));
        }
    }

    let mut by_key: BTreeMap<String, Vec<RefId>> = BTreeMap::new();
    for record in records {
        for (position, author) in record.authors.iter().enumerate() {
            let key = block_key(&author.name);
            by_key
                .entry(key)
                .or_default()
                .push(RefId::new(record.id.clone(), position as u32));
        }
    }

    Ok(by_key
        .into_iter()
        .map(|(key, mut refs)| {
            refs.sort();
            let bin = popularity_bin(refs.len(), thresholds);
            Block {
                key,
                refs,
                popularity_bin: bin,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

/// A validated, blocked corpus: the unit every later stage operates on.
///
/// Records and blocks are immutable after construction; lookup maps are
/// rebuilt on load rather than persisted.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<CitationRecord>,
    blocks: Vec<Block>,
    thresholds: (usize, usize),
    record_index: HashMap<String, usize>,
    block_index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    format_version: u64,
    popularity_thresholds: (usize, usize),
    records: Vec<CitationRecord>,
}

impl Corpus {
    /// Builds a corpus from validated records, deriving blocks.
    pub fn from_records(
        records: Vec<CitationRecord>,
        thresholds: (usize, usize),
    ) -> Result<Self> {
        for record in &records {
            if record.authors.is_empty() {
                return Err(Error::NoAuthors(record.id.clone()));
            }
        }
        let blocks = build_blocks(&records, thresholds)?;
        let record_index = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let block_index = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.key.clone(), i))
            .collect();
        Ok(Corpus {
            records,
            blocks,
            thresholds,
            record_index,
            block_index,
        })
    }

    /// Parses JSON Lines input: one raw citation per line, unknown fields
    /// ignored, optional fields absent when missing or blank.
    pub fn ingest_jsonl(input: &str, thresholds: (usize, usize)) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawCitation =
                serde_json::from_str(line).map_err(|e| Error::InvalidRecord {
                    line: lineno + 1,
                    message: e.to_string(),
                })?;
            let record = raw.normalize().map_err(|e| Error::InvalidRecord {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        Corpus::from_records(records, thresholds)
    }

    pub fn records(&self) -> &[CitationRecord] {
        &self.records
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn popularity_thresholds(&self) -> (usize, usize) {
        self.thresholds
    }

    pub fn record(&self, id: &str) -> Option<&CitationRecord> {
        self.record_index.get(id).map(|&i| &self.records[i])
    }

    pub fn block(&self, key: &str) -> Option<&Block> {
        self.block_index.get(key).map(|&i| &self.blocks[i])
    }

    /// Total number of author references across all records.
    pub fn reference_count(&self) -> usize {
        self.records.iter().map(|r| r.authors.len()).sum()
    }

    /// Resolves a reference id to its citation and author slot.
    pub fn author(&self, ref_id: &RefId) -> Result<(&CitationRecord, &Author)> {
        let record = self
            .record(&ref_id.citation)
            .ok_or_else(|| Error::UnknownReference(ref_id.clone()))?;
        let author = record
            .authors
            .get(ref_id.position as usize)
            .ok_or_else(|| Error::UnknownReference(ref_id.clone()))?;
        Ok((record, author))
    }

    /// Materializes the full [`AuthorReference`] for a reference id.
    pub fn reference(&self, ref_id: &RefId) -> Result<AuthorReference> {
        let (_, author) = self.author(ref_id)?;
        Ok(AuthorReference {
            ref_id: ref_id.clone(),
            name: author.name.clone(),
            block_key: block_key(&author.name),
        })
    }

    /// The block a reference belongs to.
    pub fn block_of(&self, ref_id: &RefId) -> Result<&Block> {
        let (_, author) = self.author(ref_id)?;
        let key = block_key(&author.name);
        self.block(&key)
            .ok_or_else(|| Error::UnknownReference(ref_id.clone()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = CorpusFile {
            format_version: CORPUS_FORMAT_VERSION,
            popularity_thresholds: self.thresholds,
            records: self.records.clone(),
        };
        std::fs::write(path, serde_json::to_string(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .unwrap_or(0);
        if version != CORPUS_FORMAT_VERSION {
            return Err(Error::FormatVersionUnsupported {
                found: version,
                expected: CORPUS_FORMAT_VERSION,
            });
        }
        let file: CorpusFile = serde_json::from_value(value)?;
        Corpus::from_records(file.records, file.popularity_thresholds)
    }
}

// ---------------------------------------------------------------------------
// Raw JSONL input
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RawAuthor {
    #[serde(default)]
    last: String,
    #[serde(default)]
    first: String,
    #[serde(default)]
    middle: String,
    #[serde(default)]
    suffix: String,
    #[serde(default)]
    affiliation: Option<String>,
    #[serde(default)]
    email: Option<String>,
}

#[derive(Deserialize)]
struct RawCitation {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    journal: Option<String>,
    authors: Vec<RawAuthor>,
    #[serde(default)]
    subjects: Vec<String>,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    year: Option<i32>,
}

fn non_blank(value: Option<String>) -> Option<String> {
    value.and_then(|s| {
        let t = s.trim();
        if t.is_empty() {
            None
        } else {
            Some(t.to_string())
        }
    })
}

impl RawCitation {
    fn normalize(self) -> Result<CitationRecord> {
        if self.authors.is_empty() {
            return Err(Error::NoAuthors(self.id));
        }
        let authors = self
            .authors
            .into_iter()
            .map(|a| {
                Ok(Author {
                    name: normalize_name(&a.last, &a.first, &a.middle, &a.suffix)?,
                    affiliation: non_blank(a.affiliation),
                    email: non_blank(a.email).map(|e| e.to_lowercase()),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        // subjects: lowercase, collapse whitespace, dedup preserving order
        let mut seen = HashSet::new();
        let mut subjects = Vec::new();
        for s in self.subjects {
            let norm = s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            if !norm.is_empty() && seen.insert(norm.clone()) {
                subjects.push(norm);
            }
        }

        Ok(CitationRecord {
            id: self.id,
            title: self.title,
            journal: non_blank(self.journal),
            authors,
            subjects,
            language: non_blank(self.language).map(|l| l.to_lowercase()),
            year: self.year,
        })
    }
}
