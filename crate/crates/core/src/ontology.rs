//! Immutable registry of concept/relation synsets and event frames, plus
//! dataset-category alignment, class-definition emission, and verbalizer
//! mapping.
//!
//! The registry is loaded once from two TSV files and never mutated; every
//! downstream module resolves lemmas, glosses, and frame roles through it.
//! A small bundled fixture (`fixtures/ontology/`) stands in for the full
//! external lexicons so the test suite runs offline.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use thiserror::Error;

/// Part of speech, encoded as the single letter used in synset id suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
}

impl Pos {
    pub fn letter(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adj => 's',
        }
    }

    fn from_str(s: &str) -> Option<Pos> {
        match s {
            "n" | "noun" => Some(Pos::Noun),
            "v" | "verb" => Some(Pos::Verb),
            "s" | "a" | "adj" => Some(Pos::Adj),
            _ => None,
        }
    }

    /// Lookup priority when a lemma matches senses of several parts of
    /// speech: nouns first, then verbs, then adjectives.
    fn rank(self) -> u8 {
        match self {
            Pos::Noun => 0,
            Pos::Verb => 1,
            Pos::Adj => 2,
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One synset row: a concept, relation, or attribute sense.
///
/// `lemma` is the canonical surface form used when emitting code;
/// `aliases` are additional lemmas that resolve to this synset during
/// alignment (the TSV lemma column is comma-joined, first entry canonical).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynsetEntry {
    pub id: String,
    pub lemma: String,
    pub aliases: Vec<String>,
    pub pos: Pos,
    pub parent_id: Option<String>,
    pub gloss: String,
    pub sense: u32,
}

/// One event frame with its ordered core roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameEntry {
    pub name: String,
    pub trigger_lemmas: Vec<String>,
    pub core_roles: Vec<String>,
    pub gloss: String,
}

impl FrameEntry {
    /// Case-insensitive lookup of a core role, returning its canonical
    /// spelling.
    pub fn canonical_role(&self, role: &str) -> Option<&str> {
        self.core_roles
            .iter()
            .find(|r| r.eq_ignore_ascii_case(role))
            .map(|r| r.as_str())
    }
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("{file}:{line}: malformed line: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("dangling parent ids: {0:?}")]
    DanglingParents(Vec<String>),
    #[error("parent cycle involving {0}")]
    ParentCycle(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no embedding coverage for label {0:?}; add a manual verbalizer entry")]
    NoEmbedding(String),
}

/// Immutable synset + frame registry. Safe to share across threads once
/// loaded.
#[derive(Debug)]
pub struct OntologyRegistry {
    synsets: IndexMap<String, SynsetEntry>,
    frames: IndexMap<String, FrameEntry>,
    // normalized lemma -> synset ids carrying it (file order)
    lemma_index: HashMap<String, Vec<String>>,
    // trigger lemma -> frame names carrying it (file order)
    trigger_index: HashMap<String, Vec<String>>,
}

impl OntologyRegistry {
    pub fn synset(&self, id: &str) -> Option<&SynsetEntry> {
        self.synsets.get(id)
    }

    pub fn frame(&self, name: &str) -> Option<&FrameEntry> {
        self.frames.get(name)
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn synsets(&self) -> impl Iterator<Item = &SynsetEntry> {
        self.synsets.values()
    }

    pub fn frames(&self) -> impl Iterator<Item = &FrameEntry> {
        self.frames.values()
    }

    /// Canonical lemma for a synset id, if registered.
    pub fn lemma_of(&self, id: &str) -> Option<&str> {
        self.synsets.get(id).map(|e| e.lemma.as_str())
    }

    /// All senses carrying `lemma` (normalized), best match first: nouns
    /// before verbs before adjectives, then ascending sense number.
    pub fn senses_of(&self, lemma: &str) -> Vec<&SynsetEntry> {
        let mut hits: Vec<&SynsetEntry> = self
            .lemma_index
            .get(lemma)
            .into_iter()
            .flatten()
            .filter_map(|id| self.synsets.get(id))
            .collect();
        hits.sort_by_key(|e| (e.pos.rank(), e.sense, e.id.clone()));
        hits
    }

    /// First-sense lookup restricted to one part of speech.
    pub fn lookup_lemma_pos(&self, lemma: &str, pos: Pos) -> Option<&SynsetEntry> {
        self.senses_of(lemma).into_iter().find(|e| e.pos == pos)
    }

    /// First-sense lookup across all parts of speech.
    pub fn lookup_lemma(&self, lemma: &str) -> Option<&SynsetEntry> {
        self.senses_of(lemma).into_iter().next()
    }

    /// Frames that list `trigger` among their trigger lemmas, file order.
    pub fn frames_for_trigger(&self, trigger: &str) -> Vec<&FrameEntry> {
        self.trigger_index
            .get(trigger)
            .into_iter()
            .flatten()
            .filter_map(|name| self.frames.get(name))
            .collect()
    }

    /// Resolve the frame a call like `trigger(role=..., ...)` instantiates:
    /// the first frame in file order that carries the trigger and whose
    /// core roles cover every supplied role name (case-insensitive).
    pub fn resolve_frame(&self, trigger: &str, roles: &[String]) -> Option<&FrameEntry> {
        self.frames_for_trigger(trigger).into_iter().find(|f| {
            roles
                .iter()
                .all(|r| f.core_roles.iter().any(|c| c.eq_ignore_ascii_case(r)))
        })
    }

    /// Order-insensitive structural hash over all entries. Pipelines assert
    /// it is unchanged after a run to pin down registry immutability.
    pub fn structural_hash(&self) -> u64 {
        let mut lines: Vec<String> = self
            .synsets
            .values()
            .map(|e| {
                format!(
                    "s\t{}\t{}\t{}\t{}\t{}\t{}",
                    e.id,
                    e.lemma,
                    e.aliases.join(","),
                    e.pos,
                    e.parent_id.as_deref().unwrap_or("-"),
                    e.gloss
                )
            })
            .chain(self.frames.values().map(|f| {
                format!(
                    "f\t{}\t{}\t{}\t{}",
                    f.name,
                    f.trigger_lemmas.join(","),
                    f.core_roles.join(","),
                    f.gloss
                )
            }))
            .collect();
        lines.sort();
        let mut h = 0xcbf2_9ce4_8422_2325_u64;
        for line in lines {
            for b in line.as_bytes() {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            h = h.rotate_left(7);
        }
        h
    }
}

fn read_file(path: &Path) -> Result<String, OntologyError> {
    fs::read_to_string(path).map_err(|source| OntologyError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_sense(id: &str, file: &str, line: usize) -> Result<(Pos, u32), OntologyError> {
    let mut parts = id.rsplitn(3, '.');
    let sense = parts.next().and_then(|s| s.parse::<u32>().ok());
    let pos = parts.next().and_then(Pos::from_str);
    let stem = parts.next();
    match (stem, pos, sense) {
        (Some(stem), Some(pos), Some(sense)) if !stem.is_empty() => Ok((pos, sense)),
        _ => Err(OntologyError::Malformed {
            file: file.to_string(),
            line,
            reason: format!("synset id {id:?} is not of the form lemma.pos.NN"),
        }),
    }
}

/// Load the registry from `synsets.tsv` and `frames.tsv`.
///
/// Synset rows: `id<TAB>lemma[,alias...]<TAB>pos<TAB>parent_id|-<TAB>gloss`.
/// Frame rows: `name<TAB>trigger,...<TAB>role,...<TAB>gloss`.
pub fn load_registry(
    synset_file: &Path,
    frame_file: &Path,
) -> Result<OntologyRegistry, OntologyError> {
    let syn_name = synset_file.display().to_string();
    let mut synsets: IndexMap<String, SynsetEntry> = IndexMap::new();
    for (idx, raw) in read_file(synset_file)?.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 5 {
            return Err(OntologyError::Malformed {
                file: syn_name.clone(),
                line,
                reason: format!("expected 5 tab-separated columns, got {}", cols.len()),
            });
        }
        let id = cols[0].trim().to_string();
        let mut lemmas = cols[1]
            .split(',')
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect::<Vec<_>>();
        if lemmas.is_empty() {
            return Err(OntologyError::Malformed {
                file: syn_name.clone(),
                line,
                reason: "empty lemma".to_string(),
            });
        }
        let lemma = lemmas.remove(0);
        let pos = Pos::from_str(cols[2].trim()).ok_or_else(|| OntologyError::Malformed {
            file: syn_name.clone(),
            line,
            reason: format!("unknown pos {:?}", cols[2]),
        })?;
        let (id_pos, sense) = parse_sense(&id, &syn_name, line)?;
        if id_pos != pos {
            return Err(OntologyError::Malformed {
                file: syn_name.clone(),
                line,
                reason: format!("pos column {} disagrees with id suffix of {id:?}", cols[2]),
            });
        }
        let parent_id = match cols[3].trim() {
            "-" | "" => None,
            p => Some(p.to_string()),
        };
        let entry = SynsetEntry {
            id: id.clone(),
            lemma,
            aliases: lemmas,
            pos,
            parent_id,
            gloss: cols[4].trim().to_string(),
            sense,
        };
        if synsets.insert(id.clone(), entry).is_some() {
            return Err(OntologyError::DuplicateId(id));
        }
    }

    // parent resolution + cycle check
    let dangling: Vec<String> = synsets
        .values()
        .filter_map(|e| e.parent_id.clone())
        .filter(|p| !synsets.contains_key(p))
        .collect();
    if !dangling.is_empty() {
        return Err(OntologyError::DanglingParents(dangling));
    }
    for entry in synsets.values() {
        let mut seen = vec![entry.id.clone()];
        let mut cur = entry.parent_id.clone();
        while let Some(p) = cur {
            if seen.contains(&p) {
                return Err(OntologyError::ParentCycle(entry.id.clone()));
            }
            seen.push(p.clone());
            cur = synsets.get(&p).and_then(|e| e.parent_id.clone());
        }
    }

    let frame_name = frame_file.display().to_string();
    let mut frames: IndexMap<String, FrameEntry> = IndexMap::new();
    for (idx, raw) in read_file(frame_file)?.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 4 {
            return Err(OntologyError::Malformed {
                file: frame_name.clone(),
                line,
                reason: format!("expected 4 tab-separated columns, got {}", cols.len()),
            });
        }
        let name = cols[0].trim().to_string();
        let triggers: Vec<String> = cols[1]
            .split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect();
        let roles: Vec<String> = cols[2]
            .split(',')
            .map(|r| r.trim().to_string())
            .filter(|r| !r.is_empty())
            .collect();
        if triggers.is_empty() || roles.is_empty() {
            return Err(OntologyError::Malformed {
                file: frame_name.clone(),
                line,
                reason: "frame needs at least one trigger and one role".to_string(),
            });
        }
        let mut dedup = roles.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() != roles.len() {
            return Err(OntologyError::Malformed {
                file: frame_name.clone(),
                line,
                reason: format!("duplicate core roles in frame {name}"),
            });
        }
        let entry = FrameEntry {
            name: name.clone(),
            trigger_lemmas: triggers,
            core_roles: roles,
            gloss: cols[3].trim().to_string(),
        };
        if frames.insert(name.clone(), entry).is_some() {
            return Err(OntologyError::DuplicateId(name));
        }
    }

    let mut lemma_index: HashMap<String, Vec<String>> = HashMap::new();
    for entry in synsets.values() {
        for lemma in std::iter::once(&entry.lemma).chain(entry.aliases.iter()) {
            lemma_index
                .entry(lemma.clone())
                .or_default()
                .push(entry.id.clone());
        }
    }
    let mut trigger_index: HashMap<String, Vec<String>> = HashMap::new();
    for frame in frames.values() {
        for t in &frame.trigger_lemmas {
            trigger_index
                .entry(t.clone())
                .or_default()
                .push(frame.name.clone());
        }
    }

    Ok(OntologyRegistry {
        synsets,
        frames,
        lemma_index,
        trigger_index,
    })
}

// ---------------------------------------------------------------------------
// category alignment

/// Accumulated category → synset decisions for one suite build.
#[derive(Debug, Default, Clone)]
pub struct AlignmentTable {
    pub mapping: IndexMap<String, String>,
    pub overrides: IndexMap<String, String>,
    pub unresolved: Vec<String>,
    // synset id -> first category mapped to it, to detect collisions
    reverse: HashMap<String, String>,
    // categories whose mapping came from an override (collision-exempt)
    from_override: Vec<String>,
}

impl AlignmentTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load `category<TAB>synset_id` override rows.
    pub fn with_overrides(path: &Path) -> Result<Self, OntologyError> {
        let mut table = Self::default();
        let name = path.display().to_string();
        for (idx, raw) in read_file(path)?.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 2 {
                return Err(OntologyError::Malformed {
                    file: name.clone(),
                    line: idx + 1,
                    reason: "expected `category<TAB>synset_id`".to_string(),
                });
            }
            table
                .overrides
                .insert(normalize_category(cols[0]), cols[1].trim().to_string());
        }
        Ok(table)
    }
}

/// Outcome of aligning one dataset category string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignOutcome {
    Resolved(String),
    Unresolved,
    /// The label resolved to a synset another category already claimed and
    /// no override arbitrates; a manual override entry is required.
    CollisionNeedsOverride {
        synset: String,
        existing_category: String,
    },
}

/// Normalization applied to every category before lookup: lowercase, trim,
/// spaces to underscores.
pub fn normalize_category(label: &str) -> String {
    label.trim().to_lowercase().replace(' ', "_")
}

fn record_resolution(
    table: &mut AlignmentTable,
    category: String,
    synset: String,
    via_override: bool,
) -> AlignOutcome {
    if let Some(existing) = table.reverse.get(&synset) {
        if existing != &category {
            let exempt = via_override
                || table.from_override.contains(existing)
                || table.overrides.contains_key(&category)
                || table.overrides.contains_key(existing);
            if !exempt {
                return AlignOutcome::CollisionNeedsOverride {
                    synset,
                    existing_category: existing.clone(),
                };
            }
        }
    }
    table.reverse.entry(synset.clone()).or_insert_with(|| category.clone());
    if via_override && !table.from_override.contains(&category) {
        table.from_override.push(category.clone());
    }
    table.mapping.insert(category, synset.clone());
    AlignOutcome::Resolved(synset)
}

/// Align a dataset category to a synset, restricted to one part of speech.
///
/// Lookup is exact on normalized lemmas; among multiple senses the lowest
/// sense number of the requested part of speech wins. Results are recorded
/// in `table`; repeating a resolved label is a no-op returning the same id.
pub fn align_category_pos(
    label: &str,
    pos: Option<Pos>,
    registry: &OntologyRegistry,
    table: &mut AlignmentTable,
) -> AlignOutcome {
    let category = normalize_category(label);
    if let Some(done) = table.mapping.get(&category) {
        return AlignOutcome::Resolved(done.clone());
    }
    if let Some(forced) = table.overrides.get(&category).cloned() {
        return record_resolution(table, category, forced, true);
    }
    let hit = match pos {
        Some(p) => registry.lookup_lemma_pos(&category, p),
        None => registry.lookup_lemma(&category),
    };
    match hit {
        Some(entry) => {
            let synset = entry.id.clone();
            record_resolution(table, category, synset, false)
        }
        None => {
            if !table.unresolved.contains(&category) {
                table.unresolved.push(category);
            }
            AlignOutcome::Unresolved
        }
    }
}

/// Align a dataset category to a synset with no part-of-speech hint.
pub fn align_category(
    label: &str,
    registry: &OntologyRegistry,
    table: &mut AlignmentTable,
) -> AlignOutcome {
    align_category_pos(label, None, registry, table)
}

// ---------------------------------------------------------------------------
// class-definition emission

/// Emit the class definition for a concept synset. The parent class is the
/// hypernym's lemma, or the base `concept` at the taxonomy root.
pub fn emit_concept_class(entry: &SynsetEntry, registry: &OntologyRegistry) -> String {
    let parent = entry
        .parent_id
        .as_deref()
        .and_then(|p| registry.lemma_of(p))
        .unwrap_or("concept");
    format!(
        "class {name}({parent}):\n    \"\"\"{gloss}\"\"\"\n    def __init__(self, location, attributes):\n        self.location = location\n        self.attributes = attributes\n",
        name = entry.lemma,
        gloss = entry.gloss,
    )
}

/// Emit the class definition for an event frame: lowercase frame name,
/// base class `event`, constructor parameters = lowercase core roles.
pub fn emit_frame_class(entry: &FrameEntry) -> String {
    let params: Vec<String> = entry
        .core_roles
        .iter()
        .map(|r| r.to_lowercase())
        .collect();
    let mut body = format!(
        "class {name}(event):\n    \"\"\"{gloss}\"\"\"\n    def __init__(self, {params}):\n",
        name = entry.name.to_lowercase(),
        gloss = entry.gloss,
        params = params.join(", "),
    );
    for p in &params {
        body.push_str(&format!("        self.{p} = {p}\n"));
    }
    body
}

/// Emit every class definition in registry order, concepts then frames.
pub fn emit_all_class_definitions(registry: &OntologyRegistry) -> Vec<String> {
    registry
        .synsets()
        .filter(|e| e.pos == Pos::Noun)
        .map(|e| emit_concept_class(e, registry))
        .chain(registry.frames().map(emit_frame_class))
        .collect()
}

// ---------------------------------------------------------------------------
// verbalizer mapping

/// Token embedding lookup used to pick verbalizers.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, token: &str, vector: Vec<f64>) {
        self.vectors.insert(token.to_string(), vector);
    }

    pub fn get(&self, token: &str) -> Option<&Vec<f64>> {
        self.vectors.get(token)
    }

    /// Vector for a label: its own entry, or the mean of the vectors of its
    /// `_`/whitespace-separated sub-tokens that have entries.
    fn label_vector(&self, label: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.vectors.get(label) {
            return Some(v.clone());
        }
        let parts: Vec<&Vec<f64>> = label
            .split(|c: char| c == '_' || c.is_whitespace())
            .filter_map(|p| self.vectors.get(p))
            .collect();
        let first = parts.first()?;
        let dim = first.len();
        let mut mean = vec![0.0; dim];
        for v in &parts {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= parts.len() as f64;
        }
        Some(mean)
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Pick the single vocabulary token standing for `label`.
///
/// A label already in the vocabulary maps to itself. Otherwise the vocab
/// token with maximal cosine similarity to the label's embedding wins;
/// ties break toward the earlier vocabulary index.
pub fn map_verbalizer(
    label: &str,
    vocab: &[String],
    embeddings: &EmbeddingTable,
) -> Result<String, OntologyError> {
    assert!(!vocab.is_empty(), "verbalizer vocabulary must be non-empty");
    if vocab.iter().any(|t| t == label) {
        return Ok(label.to_string());
    }
    let target = embeddings
        .label_vector(label)
        .ok_or_else(|| OntologyError::NoEmbedding(label.to_string()))?;
    let mut best: Option<(usize, f64)> = None;
    for (i, tok) in vocab.iter().enumerate() {
        let v = embeddings
            .get(tok)
            .unwrap_or_else(|| panic!("vocab token {tok:?} has no embedding"));
        let sim = cosine(&target, v);
        match best {
            Some((_, b)) if sim <= b => {}
            _ => best = Some((i, sim)),
        }
    }
    let (idx, _) = best.expect("non-empty vocab");
    Ok(vocab[idx].clone())
}

#[cfg(test)]
pub(crate) fn fixture_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[cfg(test)]
pub(crate) fn fixture_registry() -> OntologyRegistry {
    let dir = fixture_dir().join("ontology");
    load_registry(&dir.join("synsets.tsv"), &dir.join("frames.tsv")).expect("fixture ontology")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn loads_bundled_fixture_with_expected_counts() {
        let reg = fixture_registry();
        assert_eq!(reg.synset_count(), 238);
        assert_eq!(reg.frame_count(), 22);
        let horse = reg.synset("horse.n.01").unwrap();
        assert_eq!(horse.lemma, "horse");
        assert_eq!(horse.parent_id.as_deref(), Some("equine.n.01"));
    }

    #[test]
    fn mini_ontology_counts_from_small_files() {
        let dir = tempfile::tempdir().unwrap();
        let syn = dir.path().join("synsets.tsv");
        let mut f = std::fs::File::create(&syn).unwrap();
        for i in 1..=12 {
            writeln!(f, "thing{i}.n.01\tthing{i}\tn\t-\tgloss {i}").unwrap();
        }
        let frames = dir.path().join("frames.tsv");
        let mut f = std::fs::File::create(&frames).unwrap();
        for name in ["A", "B", "C"] {
            writeln!(f, "{name}\tdo\tRole1,Role2\tgloss").unwrap();
        }
        let reg = load_registry(&syn, &frames).unwrap();
        assert_eq!(reg.synset_count(), 12);
        assert_eq!(reg.frame_count(), 3);
    }

    #[test]
    fn empty_frame_file_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let syn = dir.path().join("synsets.tsv");
        std::fs::write(&syn, "a.n.01\ta\tn\t-\tg\n").unwrap();
        let frames = dir.path().join("frames.tsv");
        std::fs::write(&frames, "").unwrap();
        let reg = load_registry(&syn, &frames).unwrap();
        assert_eq!(reg.frame_count(), 0);
        assert_eq!(reg.synset_count(), 1);
    }

    #[test]
    fn dangling_parent_is_named_in_error() {
        let dir = tempfile::tempdir().unwrap();
        let syn = dir.path().join("synsets.tsv");
        std::fs::write(&syn, "a.n.01\ta\tn\tmissing.n.01\tg\n").unwrap();
        let frames = dir.path().join("frames.tsv");
        std::fs::write(&frames, "").unwrap();
        match load_registry(&syn, &frames) {
            Err(OntologyError::DanglingParents(ids)) => {
                assert_eq!(ids, vec!["missing.n.01".to_string()])
            }
            other => panic!("expected dangling-parent error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let syn = dir.path().join("synsets.tsv");
        std::fs::write(&syn, "a.n.01\ta\tn\t-\tg\nbroken line\n").unwrap();
        let frames = dir.path().join("frames.tsv");
        std::fs::write(&frames, "").unwrap();
        let err = load_registry(&syn, &frames).unwrap_err();
        assert!(err.to_string().contains(":2:"), "got {err}");
    }

    #[test]
    fn align_resolves_case_and_spaces() {
        let reg = fixture_registry();
        let mut table = AlignmentTable::new();
        assert_eq!(
            align_category("Horse", &reg, &mut table),
            AlignOutcome::Resolved("horse.n.01".to_string())
        );
        assert_eq!(
            align_category("Living Thing", &reg, &mut table),
            AlignOutcome::Resolved("living_thing.n.01".to_string())
        );
    }

    #[test]
    fn align_unknown_label_is_unresolved_and_idempotent() {
        let reg = fixture_registry();
        let mut table = AlignmentTable::new();
        assert_eq!(align_category("zxqv", &reg, &mut table), AlignOutcome::Unresolved);
        assert_eq!(align_category("zxqv", &reg, &mut table), AlignOutcome::Unresolved);
        assert_eq!(table.unresolved, vec!["zxqv".to_string()]);
    }

    #[test]
    fn align_is_idempotent_for_resolved_labels() {
        let reg = fixture_registry();
        let mut table = AlignmentTable::new();
        align_category("horse", &reg, &mut table);
        let size = table.mapping.len();
        let again = align_category("horse", &reg, &mut table);
        assert_eq!(again, AlignOutcome::Resolved("horse.n.01".to_string()));
        assert_eq!(table.mapping.len(), size);
    }

    #[test]
    fn alias_collision_requires_override() {
        // "man" is an alias lemma of person.n.01; mapping person first and
        // man second must trip the collision sentinel when no override rules.
        let reg = fixture_registry();
        let mut table = AlignmentTable::new();
        assert_eq!(
            align_category("man", &reg, &mut table),
            AlignOutcome::Resolved("person.n.01".to_string())
        );
        match align_category("person", &reg, &mut table) {
            AlignOutcome::CollisionNeedsOverride {
                synset,
                existing_category,
            } => {
                assert_eq!(synset, "person.n.01");
                assert_eq!(existing_category, "man");
            }
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn override_arbitrates_collision() {
        let reg = fixture_registry();
        let mut table = AlignmentTable::new();
        table
            .overrides
            .insert("guy".to_string(), "person.n.01".to_string());
        assert_eq!(
            align_category("guy", &reg, &mut table),
            AlignOutcome::Resolved("person.n.01".to_string())
        );
        // second category hitting the same synset is fine: one side is an override
        assert_eq!(
            align_category("person", &reg, &mut table),
            AlignOutcome::Resolved("person.n.01".to_string())
        );
    }

    #[test]
    fn multi_sense_lemma_takes_lowest_sense_of_preferred_pos() {
        let reg = fixture_registry();
        let mut table = AlignmentTable::new();
        // mouse.n.01 (animal) beats mouse.n.04 (device)
        assert_eq!(
            align_category("mouse", &reg, &mut table),
            AlignOutcome::Resolved("mouse.n.01".to_string())
        );
        // noun "orange" wins without a hint; adjective wins with one
        assert_eq!(
            align_category("orange", &reg, &mut table),
            AlignOutcome::Resolved("orange.n.01".to_string())
        );
        let mut table2 = AlignmentTable::new();
        assert_eq!(
            align_category_pos("orange", Some(Pos::Adj), &reg, &mut table2),
            AlignOutcome::Resolved("orange.s.02".to_string())
        );
    }

    #[test]
    fn concept_class_matches_golden() {
        let reg = fixture_registry();
        let horse = reg.synset("horse.n.01").unwrap();
        let golden =
            std::fs::read_to_string(fixture_dir().join("golden/classdef/class_horse.txt")).unwrap();
        assert_eq!(emit_concept_class(horse, &reg), golden);

        let entity = reg.synset("entity.n.01").unwrap();
        let golden =
            std::fs::read_to_string(fixture_dir().join("golden/classdef/class_entity.txt"))
                .unwrap();
        assert_eq!(emit_concept_class(entity, &reg), golden);
    }

    #[test]
    fn frame_class_matches_golden() {
        let reg = fixture_registry();
        let ingestion = reg.frame("Ingestion").unwrap();
        let golden =
            std::fs::read_to_string(fixture_dir().join("golden/classdef/class_ingestion.txt"))
                .unwrap();
        assert_eq!(emit_frame_class(ingestion), golden);
    }

    #[test]
    fn verbalizer_identity_and_tie_break() {
        let vocab: Vec<String> = ["horse", "walks", "grass"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut emb = EmbeddingTable::new();
        emb.insert("horse", vec![1.0, 0.0, 0.0]);
        emb.insert("walks", vec![0.0, 1.0, 0.0]);
        emb.insert("grass", vec![0.0, 0.0, 1.0]);
        // identity
        assert_eq!(map_verbalizer("horse", &vocab, &emb).unwrap(), "horse");
        // tie between all three for an orthogonal-ish label: earlier index wins
        emb.insert("mystery", vec![1.0, 1.0, 1.0]);
        assert_eq!(map_verbalizer("mystery", &vocab, &emb).unwrap(), "horse");
    }

    #[test]
    fn verbalizer_cosine_argmax_over_toy_table() {
        let vocab: Vec<String> = ["horse", "walks", "grass"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut emb = EmbeddingTable::new();
        emb.insert("horse", vec![1.0, 0.0, 0.0]);
        emb.insert("walks", vec![0.1, 0.9, 0.1]);
        emb.insert("grass", vec![0.0, 0.0, 1.0]);
        // walk_on decomposes to sub-tokens; only "walk" has a vector here
        emb.insert("walk", vec![0.2, 1.0, 0.0]);
        // cos(walk, walks) ≈ 0.974 beats cos(walk, horse) ≈ 0.196 and
        // cos(walk, grass) = 0
        assert_eq!(map_verbalizer("walk_on", &vocab, &emb).unwrap(), "walks");
    }

    #[test]
    fn verbalizer_without_coverage_errors() {
        let vocab = vec!["horse".to_string()];
        let mut emb = EmbeddingTable::new();
        emb.insert("horse", vec![1.0]);
        let err = map_verbalizer("zxqv", &vocab, &emb).unwrap_err();
        assert!(err.to_string().contains("manual verbalizer"));
    }

    proptest! {
        // scaling every embedding by a positive scalar never changes the pick
        #[test]
        fn verbalizer_is_scale_invariant(scale in 1e-3f64..1e3, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vocab: Vec<String> = (0..5).map(|i| format!("tok{i}")).collect();
            let mut base = EmbeddingTable::new();
            let mut scaled = EmbeddingTable::new();
            for tok in vocab.iter().chain(std::iter::once(&"label".to_string())) {
                let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                base.insert(tok, v.clone());
                scaled.insert(tok, v.iter().map(|x| x * scale).collect());
            }
            let a = map_verbalizer("label", &vocab, &base).unwrap();
            let b = map_verbalizer("label", &vocab, &scaled).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn registry_hash_is_stable_across_loads() {
        let a = fixture_registry();
        let b = fixture_registry();
        assert_eq!(a.structural_hash(), b.structural_hash());
    }
}
