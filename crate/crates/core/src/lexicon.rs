//! Paradigm, noun and verb dictionaries.
//!
//! Each dictionary is a pipe-delimited text file, one record per line.
//! Set-valued fields are comma-separated, preposition/code pairs are written
//! `prep_code` (for example `of_person`). Lines starting with `#` are comments.
//!
//! ```text
//! paradigm.dic  cod_par|osn_form|paradigm|gram_cat|synt_char
//! noun.dic      cod_int|osn_form|gram_cat|maj_class|sem_cod|verb|scale|state|combin
//! verb.dic      cod_verb|inf|after_verb|sem_typ|scale|beg_state|end_state|subj|contr_at|contr_from|contr_to|contr_with[|meta]
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("{file}:{line}: malformed record: {reason}")]
    MalformedRecord {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("duplicate code `{0}`")]
    DuplicateCode(String),
    #[error("unknown semantic code `{0}`")]
    UnknownSemanticCode(String),
    #[error("unknown action type `{0}`")]
    UnknownActionType(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

macro_rules! closed_enum {
    ($(#[$meta:meta])* $name:ident, $err:ident, { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl FromStr for $name {
            type Err = LexiconError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(LexiconError::$err(other.to_string())),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

closed_enum!(
    /// Ontology tag carried by every noun sense.
    SemanticCode, UnknownSemanticCode, {
    Person => "person",
    Prof => "prof",
    Sibl => "sibl",
    Org => "org",
    Anim => "anim",
    Plant => "plant",
    Place => "place",
    Time => "time",
    Thing => "thing",
    Weapon => "weapon",
    Mach => "mach",
    Occup => "occup",
    Event => "event",
    State => "state",
    Prop => "prop",
    Body => "body",
    Natur => "natur",
    Mat => "mat",
    Env => "env",
    Psych => "psych",
    Mes => "mes",
    Act => "act",
    Abstr => "abstr",
    Scale => "scale",
    Cloth => "cloth",
    Food => "food",
    Quant => "quant",
});

closed_enum!(
    /// Semantic type of an action (verb sense).
    ActionType, UnknownActionType, {
    Process => "PROCESS",
    Propel => "PROPEL",
    Move => "MOVE",
    Ingest => "INGEST",
    Expel => "EXPEL",
    Grasp => "GRASP",
    Go => "GO",
    Transfer => "TRANSFER",
    Attend => "ATTEND",
    Message => "MESSAGE",
    Be => "BE",
    Change => "CHANGE",
    Create => "CREATE",
    Have => "HAVE",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GramCat {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Pronoun,
    Preposition,
    Conjunction,
    Article,
    Particle,
    Numeral,
}

impl GramCat {
    pub fn as_str(self) -> &'static str {
        match self {
            GramCat::Noun => "noun",
            GramCat::Verb => "verb",
            GramCat::Adjective => "adjective",
            GramCat::Adverb => "adverb",
            GramCat::Pronoun => "pronoun",
            GramCat::Preposition => "preposition",
            GramCat::Conjunction => "conjunction",
            GramCat::Article => "article",
            GramCat::Particle => "particle",
            GramCat::Numeral => "numeral",
        }
    }

    fn parse(s: &str) -> Option<GramCat> {
        Some(match s {
            "noun" => GramCat::Noun,
            "verb" => GramCat::Verb,
            "adjective" => GramCat::Adjective,
            "adverb" => GramCat::Adverb,
            "pronoun" => GramCat::Pronoun,
            "preposition" => GramCat::Preposition,
            "conjunction" => GramCat::Conjunction,
            "article" => GramCat::Article,
            "particle" => GramCat::Particle,
            "numeral" => GramCat::Numeral,
            _ => return None,
        })
    }
}

impl fmt::Display for GramCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParadigmEntry {
    pub cod_par: String,
    pub osn_form: String,
    pub paradigm: String,
    pub gram_cat: GramCat,
    /// Syntax tag: tense for verbs (`past`, `pres`, `base`, `ing`, `part`),
    /// `sg`/`pl`/`proper` for nouns, feature bundles for pronouns, the
    /// adverb class for adverbs, the value for numerals.
    pub synt_char: String,
}

/// A `(preposition, semantic code)` combination such as `of_person`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrepCode {
    pub prep: String,
    pub code: SemanticCode,
}

impl PrepCode {
    pub fn new(prep: &str, code: SemanticCode) -> Self {
        PrepCode {
            prep: prep.to_string(),
            code,
        }
    }
}

impl fmt::Display for PrepCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.prep, self.code)
    }
}

impl FromStr for PrepCode {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prep, code) = s
            .rsplit_once('_')
            .ok_or_else(|| LexiconError::UnknownSemanticCode(s.to_string()))?;
        Ok(PrepCode {
            prep: prep.to_string(),
            code: code.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounEntry {
    pub cod_int: String,
    pub osn_form: String,
    pub gram_cat: GramCat,
    pub maj_class: String,
    pub sem_cod: SemanticCode,
    pub verb: String,
    pub scale: String,
    pub state: Option<i32>,
    pub combin: Vec<PrepCode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Subject,
    At,
    From,
    To,
    With,
}

impl Slot {
    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Subject => "subject",
            Slot::At => "at",
            Slot::From => "from",
            Slot::To => "to",
            Slot::With => "with",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbEntry {
    pub cod_verb: String,
    pub inf: String,
    pub after_verb: String,
    pub sem_typ: ActionType,
    pub scale: String,
    pub beg_state: Option<i32>,
    pub end_state: Option<i32>,
    pub subj: BTreeSet<SemanticCode>,
    pub contr_at: BTreeSet<SemanticCode>,
    pub contr_from: Vec<PrepCode>,
    pub contr_to: Vec<PrepCode>,
    pub contr_with: BTreeSet<SemanticCode>,
    /// Extra `key=value` annotations (`mental=yes`, `gloss=...`).
    pub meta: Vec<(String, String)>,
}

impl VerbEntry {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn is_mental(&self) -> bool {
        self.meta("mental") == Some("yes")
    }
}

/// Whether `verb` admits a filler with semantic `code` in `slot`.
///
/// `prep` is only consulted for the `from` and `to` constructions, which list
/// admissible preposition/code pairs.
pub fn admissible(verb: &VerbEntry, slot: Slot, prep: Option<&str>, code: SemanticCode) -> bool {
    match slot {
        Slot::Subject => verb.subj.contains(&code),
        Slot::At => verb.contr_at.contains(&code),
        Slot::From => prep.is_some_and(|p| verb.contr_from.iter().any(|pc| pc.prep == p && pc.code == code)),
        Slot::To => prep.is_some_and(|p| verb.contr_to.iter().any(|pc| pc.prep == p && pc.code == code)),
        Slot::With => verb.contr_with.contains(&code),
    }
}

pub fn noun_admissible(noun: &NounEntry, prep: &str, code: SemanticCode) -> bool {
    noun.combin.iter().any(|pc| pc.prep == prep && pc.code == code)
}

/// The three dictionaries with their lookup indexes. Immutable after loading.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    paradigms: Vec<ParadigmEntry>,
    nouns: Vec<NounEntry>,
    verbs: Vec<VerbEntry>,
    by_surface: HashMap<String, Vec<usize>>,
    noun_by_base: HashMap<String, Vec<usize>>,
    verb_by_base: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    /// Loads `paradigm.dic`, `noun.dic` and `verb.dic` from a directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let dir = dir.as_ref();
        load_lexicon(
            dir.join("paradigm.dic"),
            dir.join("noun.dic"),
            dir.join("verb.dic"),
        )
    }

    pub fn from_sources(paradigm: &str, noun: &str, verb: &str) -> Result<Lexicon, LexiconError> {
        let paradigms = parse_records(paradigm, "paradigm.dic", 5, 5, parse_paradigm)?;
        let nouns = parse_records(noun, "noun.dic", 9, 9, parse_noun)?;
        let verbs = parse_records(verb, "verb.dic", 12, 13, parse_verb)?;
        Lexicon::from_entries(paradigms, nouns, verbs)
    }

    pub fn from_entries(
        paradigms: Vec<ParadigmEntry>,
        nouns: Vec<NounEntry>,
        verbs: Vec<VerbEntry>,
    ) -> Result<Lexicon, LexiconError> {
        check_unique(paradigms.iter().map(|p| &p.cod_par))?;
        check_unique(nouns.iter().map(|n| &n.cod_int))?;
        check_unique(verbs.iter().map(|v| &v.cod_verb))?;

        let mut lex = Lexicon {
            paradigms,
            nouns,
            verbs,
            ..Lexicon::default()
        };
        for (i, p) in lex.paradigms.iter().enumerate() {
            lex.by_surface.entry(p.paradigm.clone()).or_default().push(i);
        }
        for (i, n) in lex.nouns.iter().enumerate() {
            lex.noun_by_base.entry(n.osn_form.clone()).or_default().push(i);
        }
        for (i, v) in lex.verbs.iter().enumerate() {
            lex.verb_by_base.entry(v.inf.clone()).or_default().push(i);
        }
        Ok(lex)
    }

    pub fn paradigms(&self) -> &[ParadigmEntry] {
        &self.paradigms
    }

    pub fn nouns(&self) -> &[NounEntry] {
        &self.nouns
    }

    pub fn verbs(&self) -> &[VerbEntry] {
        &self.verbs
    }

    pub fn is_empty(&self) -> bool {
        self.paradigms.is_empty() && self.nouns.is_empty() && self.verbs.is_empty()
    }

    /// All paradigm rows whose surface form equals `form` (case-insensitive),
    /// in dictionary order.
    pub fn lookup_surface(&self, form: &str) -> Vec<&ParadigmEntry> {
        let key = form.to_lowercase();
        self.by_surface
            .get(&key)
            .map(|ix| ix.iter().map(|&i| &self.paradigms[i]).collect())
            .unwrap_or_default()
    }

    /// First paradigm row for `form` with the given category.
    pub fn surface_as(&self, form: &str, cat: GramCat) -> Option<&ParadigmEntry> {
        self.lookup_surface(form).into_iter().find(|p| p.gram_cat == cat)
    }

    pub fn has_category(&self, form: &str, cat: GramCat) -> bool {
        self.surface_as(form, cat).is_some()
    }

    /// Noun-dictionary rows for a base form, in file order.
    pub fn noun_senses(&self, base: &str) -> Vec<&NounEntry> {
        let key = base.to_lowercase();
        self.noun_by_base
            .get(&key)
            .map(|ix| ix.iter().map(|&i| &self.nouns[i]).collect())
            .unwrap_or_default()
    }

    pub fn noun(&self, base: &str) -> Option<&NounEntry> {
        self.noun_senses(base)
            .into_iter()
            .find(|n| n.gram_cat == GramCat::Noun)
    }

    pub fn adjective(&self, base: &str) -> Option<&NounEntry> {
        self.noun_senses(base)
            .into_iter()
            .find(|n| n.gram_cat == GramCat::Adjective)
    }

    /// Verb senses for an infinitive, in file order (the sense-priority order).
    pub fn verb_senses(&self, base: &str) -> Vec<&VerbEntry> {
        let key = base.to_lowercase();
        self.verb_by_base
            .get(&key)
            .map(|ix| ix.iter().map(|&i| &self.verbs[i]).collect())
            .unwrap_or_default()
    }

    /// Serializes the three dictionaries back to their file formats.
    pub fn to_sources(&self) -> (String, String, String) {
        let paradigm = self
            .paradigms
            .iter()
            .map(|p| {
                format!(
                    "{}|{}|{}|{}|{}\n",
                    p.cod_par, p.osn_form, p.paradigm, p.gram_cat, p.synt_char
                )
            })
            .collect();
        let noun = self
            .nouns
            .iter()
            .map(|n| {
                format!(
                    "{}|{}|{}|{}|{}|{}|{}|{}|{}\n",
                    n.cod_int,
                    n.osn_form,
                    n.gram_cat,
                    n.maj_class,
                    n.sem_cod,
                    n.verb,
                    n.scale,
                    opt_int(n.state),
                    join(&n.combin)
                )
            })
            .collect();
        let verb = self
            .verbs
            .iter()
            .map(|v| {
                let meta = v
                    .meta
                    .iter()
                    .map(|(k, val)| format!("{k}={val}"))
                    .collect::<Vec<_>>()
                    .join(",");
                format!(
                    "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}\n",
                    v.cod_verb,
                    v.inf,
                    v.after_verb,
                    v.sem_typ,
                    v.scale,
                    opt_int(v.beg_state),
                    opt_int(v.end_state),
                    join(&v.subj),
                    join(&v.contr_at),
                    join(&v.contr_from),
                    join(&v.contr_to),
                    join(&v.contr_with),
                    meta
                )
            })
            .collect();
        (paradigm, noun, verb)
    }
}

pub fn load_lexicon(
    paradigm_path: impl AsRef<Path>,
    noun_path: impl AsRef<Path>,
    verb_path: impl AsRef<Path>,
) -> Result<Lexicon, LexiconError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| LexiconError::Io {
            path: p.display().to_string(),
            reason: e.to_string(),
        })
    };
    Lexicon::from_sources(
        &read(paradigm_path.as_ref())?,
        &read(noun_path.as_ref())?,
        &read(verb_path.as_ref())?,
    )
}

fn opt_int(v: Option<i32>) -> String {
    v.map(|v| format!("{v:+}")).unwrap_or_default()
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn check_unique<'a>(codes: impl Iterator<Item = &'a String>) -> Result<(), LexiconError> {
    let mut seen = HashSet::new();
    for c in codes {
        if !seen.insert(c) {
            return Err(LexiconError::DuplicateCode(c.clone()));
        }
    }
    Ok(())
}

type RowParser<T> = fn(&[&str]) -> Result<T, RowError>;

enum RowError {
    Reason(String),
    Lexicon(LexiconError),
}

impl From<LexiconError> for RowError {
    fn from(e: LexiconError) -> Self {
        RowError::Lexicon(e)
    }
}

fn parse_records<T>(
    src: &str,
    file: &str,
    min_fields: usize,
    max_fields: usize,
    parse: RowParser<T>,
) -> Result<Vec<T>, LexiconError> {
    let mut out = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| LexiconError::MalformedRecord {
            file: file.to_string(),
            line: n + 1,
            reason,
        };
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() < min_fields || fields.len() > max_fields {
            return Err(malformed(format!(
                "expected {min_fields} fields, found {}",
                fields.len()
            )));
        }
        match parse(&fields) {
            Ok(v) => out.push(v),
            Err(RowError::Reason(r)) => return Err(malformed(r)),
            Err(RowError::Lexicon(e)) => return Err(e),
        }
    }
    Ok(out)
}

fn required(field: &str, name: &str) -> Result<String, RowError> {
    if field.is_empty() {
        Err(RowError::Reason(format!("empty {name}")))
    } else {
        Ok(field.to_lowercase())
    }
}

fn gram_cat(field: &str) -> Result<GramCat, RowError> {
    GramCat::parse(field).ok_or_else(|| RowError::Reason(format!("unknown gram_cat `{field}`")))
}

fn scale_value(field: &str, name: &str) -> Result<Option<i32>, RowError> {
    if field.is_empty() {
        return Ok(None);
    }
    let v: i32 = field
        .parse()
        .map_err(|_| RowError::Reason(format!("{name} `{field}` is not an integer")))?;
    if !(-100..=100).contains(&v) {
        return Err(RowError::Reason(format!("{name} {v} outside [-100, 100]")));
    }
    Ok(Some(v))
}

fn list(field: &str) -> impl Iterator<Item = &str> {
    field.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn code_set(field: &str) -> Result<BTreeSet<SemanticCode>, RowError> {
    list(field)
        .map(|s| s.parse::<SemanticCode>().map_err(RowError::from))
        .collect()
}

fn pair_list(field: &str) -> Result<Vec<PrepCode>, RowError> {
    list(field)
        .map(|s| s.parse::<PrepCode>().map_err(RowError::from))
        .collect()
}

fn parse_paradigm(f: &[&str]) -> Result<ParadigmEntry, RowError> {
    Ok(ParadigmEntry {
        cod_par: required(f[0], "cod_par")?,
        osn_form: required(f[1], "osn_form")?,
        paradigm: required(f[2], "paradigm")?,
        gram_cat: gram_cat(f[3])?,
        synt_char: f[4].to_string(),
    })
}

fn parse_noun(f: &[&str]) -> Result<NounEntry, RowError> {
    let gram_cat = gram_cat(f[2])?;
    if !matches!(gram_cat, GramCat::Noun | GramCat::Adjective) {
        return Err(RowError::Reason(format!(
            "noun dictionary row has gram_cat `{gram_cat}`"
        )));
    }
    Ok(NounEntry {
        cod_int: required(f[0], "cod_int")?,
        osn_form: required(f[1], "osn_form")?,
        gram_cat,
        maj_class: f[3].to_lowercase(),
        sem_cod: f[4].parse()?,
        verb: f[5].to_lowercase(),
        scale: f[6].to_string(),
        state: scale_value(f[7], "state")?,
        combin: pair_list(f[8])?,
    })
}

fn parse_verb(f: &[&str]) -> Result<VerbEntry, RowError> {
    let scale = f[4].to_string();
    let beg_state = scale_value(f[5], "beg_state")?;
    let end_state = scale_value(f[6], "end_state")?;
    let meta = match f.get(12) {
        Some(m) => list(m)
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| RowError::Reason(format!("meta `{kv}` is not key=value")))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    Ok(VerbEntry {
        cod_verb: required(f[0], "cod_verb")?,
        inf: required(f[1], "inf")?,
        after_verb: f[2].to_lowercase(),
        sem_typ: f[3].parse()?,
        scale,
        beg_state,
        end_state,
        subj: code_set(f[7])?,
        contr_at: code_set(f[8])?,
        contr_from: pair_list(f[9])?,
        contr_to: pair_list(f[10])?,
        contr_with: code_set(f[11])?,
        meta,
    })
}
