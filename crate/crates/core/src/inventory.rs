//! Synset inventories: WordNet sense keys, synset identifiers and the
//! sense-key to synset map.
//!
//! Two input formats are supported. WordNet `index.sense` files carry one
//! `sense_key synset_offset sense_number tag_cnt` record per line; senses of
//! a synset are ordered by `sense_number`, ties by raw key. JSON inventories
//! are an array of `{"synset_id": "OFFSET-POS", "senses": [...]}` objects and
//! keep the sense order as written.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("malformed sense key {key:?}: {reason}")]
    MalformedSenseKey { key: String, reason: &'static str },
    #[error("malformed synset id {0:?}, expected OFFSET-POS with an 8-digit offset")]
    MalformedSynsetId(String),
    #[error("line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("malformed inventory document: {0}")]
    MalformedDocument(String),
    #[error("duplicate sense key {0}")]
    DuplicateSenseKey(String),
    #[error("synset {0} has no senses")]
    EmptySynset(SynsetId),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// WordNet synset type, the `ss_type` digit of a sense key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    AdjectiveSatellite,
}

impl Pos {
    pub fn from_ss_type(ss_type: u8) -> Option<Pos> {
        match ss_type {
            1 => Some(Pos::Noun),
            2 => Some(Pos::Verb),
            3 => Some(Pos::Adjective),
            4 => Some(Pos::Adverb),
            5 => Some(Pos::AdjectiveSatellite),
            _ => None,
        }
    }

    pub fn ss_type(self) -> u8 {
        match self {
            Pos::Noun => 1,
            Pos::Verb => 2,
            Pos::Adjective => 3,
            Pos::Adverb => 4,
            Pos::AdjectiveSatellite => 5,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adjective => 'a',
            Pos::Adverb => 'r',
            Pos::AdjectiveSatellite => 's',
        }
    }

    pub fn from_letter(c: char) -> Option<Pos> {
        match c {
            'n' => Some(Pos::Noun),
            'v' => Some(Pos::Verb),
            'a' => Some(Pos::Adjective),
            'r' => Some(Pos::Adverb),
            's' => Some(Pos::AdjectiveSatellite),
            _ => None,
        }
    }
}

/// A parsed WordNet sense key, `lemma%ss_type:lex_filenum:lex_id:head_word:head_id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SenseKey {
    pub lemma: String,
    pub ss_type: u8,
    pub lex_filenum: u8,
    pub lex_id: u8,
    pub head: Option<(String, u8)>,
    raw: String,
}

impl SenseKey {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn pos(&self) -> Pos {
        // ss_type is validated at parse time
        Pos::from_ss_type(self.ss_type).expect("validated ss_type")
    }

    /// Re-serializes the parsed fields.
    pub fn render(&self) -> String {
        let (head_word, head_id) = match &self.head {
            Some((w, id)) => (w.as_str(), format!("{id:02}")),
            None => ("", String::new()),
        };
        format!(
            "{}%{}:{:02}:{:02}:{}:{}",
            self.lemma, self.ss_type, self.lex_filenum, self.lex_id, head_word, head_id
        )
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for SenseKey {
    type Err = InventoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sense_key(s)
    }
}

fn two_digits(field: &str) -> Option<u8> {
    if field.len() == 2 && field.bytes().all(|b| b.is_ascii_digit()) {
        field.parse().ok()
    } else {
        None
    }
}

pub fn parse_sense_key(raw: &str) -> Result<SenseKey, InventoryError> {
    let bad = |reason| InventoryError::MalformedSenseKey {
        key: raw.to_string(),
        reason,
    };
    if raw.is_empty() {
        return Err(bad("empty key"));
    }
    if raw.chars().any(char::is_whitespace) {
        return Err(bad("contains whitespace"));
    }
    let (lemma, lex_sense) = match raw.split_once('%') {
        Some((l, rest)) if !rest.contains('%') => (l, rest),
        Some(_) => return Err(bad("more than one '%'")),
        None => return Err(bad("missing '%'")),
    };
    if lemma.is_empty() {
        return Err(bad("empty lemma"));
    }
    let fields: Vec<&str> = lex_sense.split(':').collect();
    if fields.len() != 5 {
        return Err(bad("expected ss_type:lex_filenum:lex_id:head_word:head_id"));
    }
    let ss_type = match fields[0] {
        f if f.len() == 1 && f.as_bytes()[0].is_ascii_digit() => f.as_bytes()[0] - b'0',
        _ => return Err(bad("non-numeric ss_type")),
    };
    let pos = Pos::from_ss_type(ss_type).ok_or_else(|| bad("ss_type outside 1-5"))?;
    let lex_filenum = two_digits(fields[1]).ok_or_else(|| bad("lex_filenum must be two digits"))?;
    let lex_id = two_digits(fields[2]).ok_or_else(|| bad("lex_id must be two digits"))?;
    let head = match (fields[3], fields[4]) {
        ("", "") => None,
        (word, id) => {
            let id = two_digits(id).ok_or_else(|| bad("head_id must be two digits"))?;
            if word.is_empty() {
                return Err(bad("head_id without head_word"));
            }
            Some((word.to_string(), id))
        }
    };
    match (pos, &head) {
        (Pos::AdjectiveSatellite, None) => return Err(bad("satellite key without head")),
        (Pos::AdjectiveSatellite, Some(_)) | (_, None) => {}
        (_, Some(_)) => return Err(bad("head only allowed for ss_type 5")),
    }
    Ok(SenseKey {
        lemma: lemma.to_string(),
        ss_type,
        lex_filenum,
        lex_id,
        head,
        raw: raw.to_string(),
    })
}

/// Synset identifier: 8-digit offset plus part of speech, written `OFFSET-POS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynsetId {
    offset: u32,
    pos: Pos,
}

impl SynsetId {
    pub fn new(offset: u32, pos: Pos) -> Result<SynsetId, InventoryError> {
        if offset > 99_999_999 {
            return Err(InventoryError::MalformedSynsetId(format!("{offset}-{}", pos.letter())));
        }
        Ok(SynsetId { offset, pos })
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn pos(&self) -> Pos {
        self.pos
    }

    fn parse_offset(s: &str) -> Option<u32> {
        if s.len() == 8 && s.bytes().all(|b| b.is_ascii_digit()) {
            s.parse().ok()
        } else {
            None
        }
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos.letter())
    }
}

impl FromStr for SynsetId {
    type Err = InventoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InventoryError::MalformedSynsetId(s.to_string());
        let (offset, pos) = s.split_once('-').ok_or_else(bad)?;
        let offset = SynsetId::parse_offset(offset).ok_or_else(bad)?;
        let mut letters = pos.chars();
        let pos = match (letters.next(), letters.next()) {
            (Some(c), None) => Pos::from_letter(c).ok_or_else(bad)?,
            _ => return Err(bad()),
        };
        Ok(SynsetId { offset, pos })
    }
}

impl Serialize for SynsetId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SynsetId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Position of a sense inside the inventory: its synset and its index there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SenseSlot {
    pub synset: SynsetId,
    pub index: usize,
}

/// Immutable map from synsets to their ordered senses, with the reverse
/// lookup from raw sense keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynsetInventory {
    synsets: BTreeMap<SynsetId, Vec<SenseKey>>,
    reverse: HashMap<String, SenseSlot>,
}

impl SynsetInventory {
    fn from_synsets(synsets: BTreeMap<SynsetId, Vec<SenseKey>>) -> Result<Self, InventoryError> {
        let mut reverse = HashMap::with_capacity(synsets.values().map(Vec::len).sum());
        for (&synset, senses) in &synsets {
            if senses.is_empty() {
                return Err(InventoryError::EmptySynset(synset));
            }
            for (index, key) in senses.iter().enumerate() {
                let slot = SenseSlot { synset, index };
                if reverse.insert(key.raw.clone(), slot).is_some() {
                    return Err(InventoryError::DuplicateSenseKey(key.raw.clone()));
                }
            }
        }
        Ok(SynsetInventory { synsets, reverse })
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn sense_count(&self) -> usize {
        self.reverse.len()
    }

    /// Synsets in canonical `(offset, pos)` order.
    pub fn iter(&self) -> impl Iterator<Item = (SynsetId, &[SenseKey])> + '_ {
        self.synsets.iter().map(|(id, s)| (*id, s.as_slice()))
    }

    pub fn contains(&self, id: SynsetId) -> bool {
        self.synsets.contains_key(&id)
    }

    pub fn senses_of(&self, id: SynsetId) -> Result<&[SenseKey], InventoryError> {
        self.synsets
            .get(&id)
            .map(Vec::as_slice)
            .ok_or(InventoryError::UnknownSynset(id))
    }

    pub fn synset_of(&self, raw_key: &str) -> Option<SynsetId> {
        self.reverse.get(raw_key).map(|slot| slot.synset)
    }

    pub fn slot_of(&self, raw_key: &str) -> Option<SenseSlot> {
        self.reverse.get(raw_key).copied()
    }

    /// SHA-256 over the canonical serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (id, senses) in &self.synsets {
            hasher.update(id.to_string().as_bytes());
            for key in senses {
                hasher.update(b"\t");
                hasher.update(key.raw.as_bytes());
            }
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<(), InventoryError> {
        let doc: Vec<JsonSynset> = self
            .synsets
            .iter()
            .map(|(id, senses)| JsonSynset {
                synset_id: id.to_string(),
                senses: senses.iter().map(|k| k.raw.clone()).collect(),
            })
            .collect();
        serde_json::to_writer(writer, &doc).map_err(|e| InventoryError::Io(e.into()))
    }
}

pub fn load_index_sense<R: BufRead>(reader: R) -> Result<SynsetInventory, InventoryError> {
    let mut staged: BTreeMap<SynsetId, Vec<(u32, SenseKey)>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| InventoryError::MalformedLine { line_no, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(malformed(format!("expected 4 fields, found {}", fields.len())));
        }
        let key = parse_sense_key(fields[0]).map_err(|e| malformed(e.to_string()))?;
        let offset = SynsetId::parse_offset(fields[1])
            .ok_or_else(|| malformed(format!("bad synset offset {:?}", fields[1])))?;
        let sense_number: u32 = fields[2]
            .parse()
            .map_err(|_| malformed(format!("bad sense number {:?}", fields[2])))?;
        fields[3]
            .parse::<u32>()
            .map_err(|_| malformed(format!("bad tag count {:?}", fields[3])))?;
        let id = SynsetId { offset, pos: key.pos() };
        staged.entry(id).or_default().push((sense_number, key));
    }
    let synsets = staged
        .into_iter()
        .map(|(id, mut senses)| {
            senses.sort_by(|(na, ka), (nb, kb)| na.cmp(nb).then_with(|| ka.raw.cmp(&kb.raw)));
            (id, senses.into_iter().map(|(_, k)| k).collect())
        })
        .collect();
    SynsetInventory::from_synsets(synsets)
}

#[derive(Serialize, Deserialize)]
struct JsonSynset {
    synset_id: String,
    senses: Vec<String>,
}

pub fn load_json_inventory<R: Read>(reader: R) -> Result<SynsetInventory, InventoryError> {
    let doc: Vec<JsonSynset> = serde_json::from_reader(reader)
        .map_err(|e| InventoryError::MalformedDocument(e.to_string()))?;
    let mut synsets = BTreeMap::new();
    for entry in doc {
        let id: SynsetId = entry
            .synset_id
            .parse()
            .map_err(|e: InventoryError| InventoryError::MalformedDocument(e.to_string()))?;
        let senses = entry
            .senses
            .iter()
            .map(|raw| {
                let key = parse_sense_key(raw)
                    .map_err(|e| InventoryError::MalformedDocument(e.to_string()))?;
                if key.pos() != id.pos {
                    return Err(InventoryError::MalformedDocument(format!(
                        "sense key {raw} has pos {} but synset {id} has pos {}",
                        key.pos().letter(),
                        id.pos.letter()
                    )));
                }
                Ok(key)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if synsets.insert(id, senses).is_some() {
            return Err(InventoryError::MalformedDocument(format!("duplicate synset {id}")));
        }
    }
    SynsetInventory::from_synsets(synsets)
}
