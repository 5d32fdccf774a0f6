//! Knowledge-base articles and the primitives analysis.
//!
//! An article starts with a `frame is ...` header. Noun articles list the
//! functions and parts of a concept, verb articles list defining actions
//! and motives, operation articles list staged alternatives. Articles
//! compile to Horn clauses and can also be stored as kb-flagged records.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::factbase::{FactError, FactStore};
use crate::inference::{Atom, HornClause, Term};
use crate::lexicon::{GramCat, Lexicon};
use crate::parser::{parse_article_header, tokenize, ArticleKind};
use crate::record::{Code, PredicateRecord, Role, Sort, Value};
use crate::semrep::{clause_sort, sort_for_code};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KbError {
    #[error("malformed article line: `{0}`")]
    MalformedArticleLine(String),
    #[error("cannot compile `{0}`: verb not in the lexicon")]
    UncompilableLine(String),
    #[error("`{0}` has no definition and is not primitive")]
    UndefinedWord(String),
    #[error("`{0}` is used in its own definition")]
    SelfLoop(String),
    #[error(transparent)]
    Store(#[from] FactError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub index: u32,
    pub action_phrase: String,
    /// Condition or tool; reserved, never filled by the ingester.
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Article {
    pub concept: String,
    pub kind: ArticleKind,
    pub genus: Option<String>,
    /// Predicates following the concept word (`examines a person`).
    pub functions: Vec<String>,
    pub structure: Vec<String>,
    pub definitions: Vec<String>,
    /// (action phrase, cause phrase)
    pub motives: Vec<(String, String)>,
    pub alternatives: Vec<Vec<Stage>>,
}

impl Article {
    fn empty(concept: String, kind: ArticleKind) -> Article {
        Article {
            concept,
            kind,
            genus: None,
            functions: Vec::new(),
            structure: Vec::new(),
            definitions: Vec::new(),
            motives: Vec::new(),
            alternatives: Vec::new(),
        }
    }

    /// Identifier used for this concept in compiled clauses.
    pub fn concept_id(&self, lexicon: &Lexicon) -> String {
        match self.kind {
            ArticleKind::Noun => self.concept.replace(' ', "_"),
            _ => analyze(&words(&self.concept), lexicon)
                .map(|p| p.id())
                .unwrap_or_else(|| self.concept.replace(' ', "_")),
        }
    }
}

fn words(line: &str) -> Vec<String> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .map(|w| w.trim_matches(|c: char| c == '.' || c == '?').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

const DETERMINERS: &[&str] = &["a", "an", "the", "this", "these", "his", "her", "its", "their", "some"];

fn strip_determiner(w: &[String]) -> &[String] {
    match w.first() {
        Some(d) if DETERMINERS.contains(&d.as_str()) => &w[1..],
        _ => w,
    }
}

/// Reads one article from its lines. Blank lines and `#` comments are
/// skipped.
pub fn ingest_article(lines: &[&str], lexicon: &Lexicon) -> Result<Article, KbError> {
    let mut body = lines.iter().map(|l| l.trim()).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let first = body.next().ok_or_else(|| KbError::MalformedArticleLine(String::new()))?;
    let header =
        parse_article_header(&tokenize(first)).map_err(|_| KbError::MalformedArticleLine(first.to_string()))?;
    let mut a = Article::empty(header.concept.clone(), header.kind);
    if a.kind == ArticleKind::Noun {
        a.genus = lexicon
            .noun(&a.concept)
            .map(|n| n.maj_class.clone())
            .filter(|g| *g != a.concept && lexicon.noun(g).is_some());
    }
    let mut alts: BTreeMap<u32, Vec<Stage>> = BTreeMap::new();
    for line in body {
        let malformed = || KbError::MalformedArticleLine(line.to_string());
        let w = words(line);
        match a.kind {
            ArticleKind::Noun => {
                let rest = strip_determiner(&w);
                let concept_len = a.concept.split(' ').count();
                let head: Vec<&str> = rest.iter().take(concept_len).map(String::as_str).collect();
                if head.join(" ") != a.concept || rest.len() <= concept_len {
                    return Err(malformed());
                }
                let pred = &rest[concept_len..];
                match pred {
                    [c, o, parts @ ..] if c == "consists" && o == "of" && !parts.is_empty() => {
                        a.structure.extend(parts.iter().filter(|p| *p != "and").cloned());
                    }
                    [is, art, genus, tail @ ..]
                        if is == "is" && (art == "a" || art == "an") && (tail.is_empty() || tail[0] == "which") =>
                    {
                        a.genus = Some(genus.clone());
                        if tail.len() > 1 {
                            a.functions.push(tail[1..].join(" "));
                        }
                    }
                    _ => a.functions.push(pred.join(" ")),
                }
            }
            ArticleKind::Verb => {
                let [to, rest @ ..] = w.as_slice() else {
                    return Err(malformed());
                };
                if to != "to" || rest.is_empty() {
                    return Err(malformed());
                }
                match rest.iter().position(|x| x == "as") {
                    Some(i) if i > 0 && i + 1 < rest.len() => {
                        a.motives.push((rest[..i].join(" "), rest[i + 1..].join(" ")));
                    }
                    Some(_) => return Err(malformed()),
                    None if a.motives.is_empty() => a.definitions.push(rest.join(" ")),
                    None => return Err(malformed()),
                }
            }
            ArticleKind::Operation => {
                let (tag, stage) = line.split_once(';').ok_or_else(malformed)?;
                let tw = words(tag);
                let n: u32 = match tw.as_slice() {
                    [alt, n] if alt == "alternative" => n.parse().map_err(|_| malformed())?,
                    _ => return Err(malformed()),
                };
                let sw = words(stage);
                let phrase = match sw.as_slice() {
                    [to, rest @ ..] if to == "to" && !rest.is_empty() => rest.join(" "),
                    _ => return Err(malformed()),
                };
                alts.entry(n).or_default().push(Stage {
                    index: n,
                    action_phrase: phrase,
                    annotation: None,
                });
            }
        }
    }
    a.alternatives = alts.into_values().collect();
    Ok(a)
}

/// Article lines that ingest back to an equal article.
pub fn render(a: &Article) -> Vec<String> {
    let mut out = Vec::new();
    match a.kind {
        ArticleKind::Noun => {
            out.push(format!("frame is a {}", a.concept));
            if let Some(g) = &a.genus {
                out.push(format!("a {} is a {g}", a.concept));
            }
            for f in &a.functions {
                out.push(format!("{} {f}", a.concept));
            }
            if !a.structure.is_empty() {
                out.push(format!("a {} consists of {}", a.concept, a.structure.join(", ")));
            }
        }
        ArticleKind::Verb => {
            out.push(format!("frame is to {}", a.concept));
            out.extend(a.definitions.iter().map(|d| format!("to {d}")));
            out.extend(a.motives.iter().map(|(act, cause)| format!("to {act} as {cause}")));
        }
        ArticleKind::Operation => {
            out.push(format!("frame is how to {}", a.concept));
            for alt in &a.alternatives {
                for s in alt {
                    out.push(format!("alternative {} ; to {}", s.index, s.action_phrase));
                }
            }
        }
    }
    out
}

/// Splits a KB file into article blocks (blank-line separated).
pub fn ingest_articles(text: &str, lexicon: &Lexicon) -> Result<Vec<Article>, KbError> {
    let mut articles = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    for line in text.lines().chain(std::iter::once("")) {
        let t = line.trim();
        if t.is_empty() {
            if block.iter().any(|l| !l.starts_with('#')) {
                articles.push(ingest_article(&block, lexicon)?);
            }
            block.clear();
        } else {
            block.push(t);
        }
    }
    Ok(articles)
}

/// A verb phrase reduced to verb, particle and the nouns that follow.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Phrase {
    verb: String,
    particle: Option<String>,
    passive: bool,
    nouns: Vec<String>,
}

impl Phrase {
    fn id(&self) -> String {
        let mut id = self.verb.clone();
        if let Some(p) = &self.particle {
            id.push('_');
            id.push_str(p);
        }
        if let Some(n) = self.nouns.first() {
            id.push('_');
            id.push_str(n);
        }
        id
    }
}

fn noun_base(w: &str, lexicon: &Lexicon) -> Option<String> {
    lexicon
        .surface_as(w, GramCat::Noun)
        .map(|p| p.osn_form.clone())
        .or_else(|| lexicon.noun(w).map(|n| n.osn_form.clone()))
}

fn verb_base(w: &str, lexicon: &Lexicon) -> Option<String> {
    lexicon.surface_as(w, GramCat::Verb).map(|p| p.osn_form.clone())
}

fn analyze(w: &[String], lexicon: &Lexicon) -> Option<Phrase> {
    let mut i = usize::from(w.first().is_some_and(|x| x == "to"));
    let mut passive = false;
    let verb = loop {
        let word = w.get(i)?;
        let base = verb_base(word, lexicon)?;
        if base == "be" && w.get(i + 1).and_then(|n| verb_base(n, lexicon)).is_some() {
            passive = true;
            i += 1;
            continue;
        }
        break base;
    };
    i += 1;
    let particle = w
        .get(i)
        .filter(|p| {
            lexicon.has_category(p, GramCat::Particle)
                && lexicon.verb_senses(&verb).iter().any(|v| v.after_verb == **p)
        })
        .cloned();
    if particle.is_some() {
        i += 1;
    }
    let nouns = w[i..]
        .iter()
        .take_while(|x| *x != "as")
        .filter_map(|x| noun_base(x, lexicon))
        .collect();
    Some(Phrase {
        verb,
        particle,
        passive,
        nouns,
    })
}

fn phrase_or_err(text: &str, lexicon: &Lexicon) -> Result<Phrase, KbError> {
    analyze(&words(text), lexicon)
        .filter(|p| !lexicon.verb_senses(&p.verb).is_empty())
        .ok_or_else(|| KbError::UncompilableLine(text.to_string()))
}

/// Cause phrases such as `a subject is criminal`, `this person outrages a
/// subject` or `this person is the enemy of a subject`.
fn cause_atom(text: &str, object: Option<&str>, lexicon: &Lexicon) -> Result<Atom, KbError> {
    let fail = || KbError::UncompilableLine(text.to_string());
    let w = words(text);
    let role = |n: &str| match n {
        "subject" => Term::var("S"),
        n if Some(n) == object => Term::var("O"),
        n => Term::sym(n),
    };
    let rest = strip_determiner(&w);
    let (first, rest) = rest.split_first().ok_or_else(fail)?;
    let first = role(&noun_base(first, lexicon).ok_or_else(fail)?);
    let (verb, rest) = rest.split_first().ok_or_else(fail)?;
    let verb = verb_base(verb, lexicon).ok_or_else(fail)?;
    let rest = strip_determiner(rest);
    if verb == "be" {
        let (pred, tail) = rest.split_first().ok_or_else(fail)?;
        match tail {
            [of, more @ ..] if of == "of" => {
                let other = strip_determiner(more).first().ok_or_else(fail)?;
                let other = role(&noun_base(other, lexicon).ok_or_else(fail)?);
                Ok(Atom::new("related", vec![first, Term::sym(pred), other]))
            }
            [] => Ok(Atom::new("isa", vec![first, Term::sym(pred)])),
            _ => Err(fail()),
        }
    } else {
        match rest.first() {
            Some(o) => {
                let o = role(&noun_base(o, lexicon).ok_or_else(fail)?);
                Ok(Atom::new("does", vec![first, Term::sym(&verb), o]))
            }
            None => Ok(Atom::new("acts", vec![first, Term::sym(&verb)])),
        }
    }
}

/// Horn clauses for one article.
pub fn compile_article(a: &Article, lexicon: &Lexicon) -> Result<Vec<HornClause>, KbError> {
    let mut out = Vec::new();
    let x = Term::var("X");
    let id = a.concept_id(lexicon);
    match a.kind {
        ArticleKind::Noun => {
            let member = Atom::new("isa", vec![x.clone(), Term::sym(&id)]);
            if let Some(g) = &a.genus {
                out.push(HornClause::rule(
                    Atom::new("isa", vec![x.clone(), Term::sym(g)]),
                    vec![member.clone()],
                ));
            }
            for f in &a.functions {
                let p = phrase_or_err(f, lexicon)?;
                let obj = p.nouns.first().map_or_else(|| Term::sym("none"), |n| Term::sym(n));
                let mut verb = p.verb.clone();
                if let Some(part) = &p.particle {
                    verb = format!("{verb}_{part}");
                }
                let pred = if p.passive { "can_be" } else { "can" };
                out.push(HornClause::rule(
                    Atom::new(pred, vec![x.clone(), Term::sym(&verb), obj]),
                    vec![member.clone()],
                ));
            }
            for part in &a.structure {
                let base = noun_base(part, lexicon).unwrap_or_else(|| part.clone());
                out.push(HornClause::fact(Atom::new("part_of", vec![Term::sym(&base), Term::sym(&id)])));
            }
        }
        ArticleKind::Verb => {
            let head = phrase_or_err(&a.concept, lexicon)?;
            let object = head.nouns.first().map(String::as_str);
            for d in &a.definitions {
                let p = phrase_or_err(d, lexicon)?;
                out.push(HornClause::fact(Atom::new("means", vec![Term::sym(&id), Term::sym(&p.id())])));
            }
            for (act, cause) in &a.motives {
                let p = phrase_or_err(act, lexicon)?;
                let body = cause_atom(cause, object, lexicon)?;
                out.push(HornClause::rule(
                    Atom::new(
                        "motive",
                        vec![Term::sym(&id), Term::sym(&p.id()), Term::var("S"), Term::var("O")],
                    ),
                    vec![body],
                ));
            }
        }
        ArticleKind::Operation => {
            for (alt_no, alt) in a.alternatives.iter().enumerate() {
                for (i, stage) in alt.iter().enumerate() {
                    let p = phrase_or_err(&stage.action_phrase, lexicon)?;
                    let alt_index = alt.first().map_or(alt_no as i64 + 1, |s| s.index.into());
                    out.push(HornClause::fact(Atom::new(
                        "step",
                        vec![
                            Term::sym(&id),
                            Term::int(alt_index),
                            Term::int(i as i64 + 1),
                            Term::sym(&p.id()),
                        ],
                    )));
                }
            }
        }
    }
    Ok(out)
}

fn kb_object(noun: &str, lexicon: &Lexicon) -> Option<PredicateRecord> {
    let entry = lexicon.noun(noun)?;
    let sort = sort_for_code(entry.sem_cod);
    let slot = match sort {
        Sort::Person => "prof",
        Sort::Organization => "typ_org",
        Sort::Thing | Sort::Machine | Sort::Property => "name",
        Sort::Animal => "typ_an",
        Sort::Nature => "typ_nat",
        Sort::Abstr => "concept",
        Sort::Place => "locat",
        Sort::Time => "holyday",
        _ => return None,
    };
    let mut rec = PredicateRecord::new(sort).with(slot, Value::text(&entry.osn_form));
    rec.kb = true;
    Some(rec)
}

fn kb_clause(p: &Phrase, subject: Option<Code>, object: Option<Code>, lexicon: &Lexicon) -> PredicateRecord {
    let sense = lexicon.verb_senses(&p.verb).first().copied().cloned();
    let sort = sense.as_ref().map_or(Sort::Action, clause_sort);
    let mut rec = PredicateRecord::new(sort).with("word", Value::text(p.id()));
    rec.kb = true;
    if let (Some(s), Sort::Action) = (&sense, sort) {
        rec.set("sem_typ_act", Value::text(s.sem_typ.as_str()));
    }
    if let (Some(c), Some(slot)) = (subject, sort.role_slot(Role::Subject)) {
        rec.set(slot, Value::Ref(c));
    }
    if let (Some(c), Some(slot)) = (object, sort.role_slot(Role::Object)) {
        rec.set(slot, Value::Ref(c));
    }
    rec
}

/// Stores the article as kb-flagged records and returns their codes. A kb
/// record identical to one already stored is reused, so reloading an
/// article into a saved store adds nothing.
pub fn store_article(a: &Article, lexicon: &Lexicon, store: &mut FactStore) -> Result<Vec<Code>, KbError> {
    let mut codes = Vec::new();
    let mut put = |store: &mut FactStore, rec: PredicateRecord| -> Result<Code, KbError> {
        let existing = store
            .records()
            .find(|r| r.kb && r.sort == rec.sort && r.values() == rec.values())
            .and_then(|r| r.code);
        let c = match existing {
            Some(c) => c,
            None => store.insert(rec)?,
        };
        codes.push(c);
        Ok(c)
    };
    match a.kind {
        ArticleKind::Noun => {
            let concept = match kb_object(&a.concept, lexicon) {
                Some(r) => Some(put(store, r)?),
                None => None,
            };
            for f in &a.functions {
                let p = phrase_or_err(f, lexicon)?;
                let obj = match p.nouns.first().and_then(|n| kb_object(n, lexicon)) {
                    Some(r) => Some(put(store, r)?),
                    None => None,
                };
                put(store, kb_clause(&p, concept, obj, lexicon))?;
            }
            for part in &a.structure {
                let base = noun_base(part, lexicon).unwrap_or_else(|| part.clone());
                let mut rel = PredicateRecord::new(Sort::Relation)
                    .with("typ_rel", Value::text("part_of"))
                    .with("first_obj", Value::text(&base))
                    .with("sec_obj", Value::text(&a.concept));
                if let Some(c) = concept {
                    rel.set("cod_sec", Value::Ref(c));
                }
                rel.kb = true;
                put(store, rel)?;
            }
        }
        ArticleKind::Verb => {
            let phrases: Vec<&str> = a
                .definitions
                .iter()
                .map(String::as_str)
                .chain(a.motives.iter().map(|(act, _)| act.as_str()))
                .collect();
            for text in phrases {
                let p = phrase_or_err(text, lexicon)?;
                put(store, kb_clause(&p, None, None, lexicon))?;
            }
        }
        ArticleKind::Operation => {
            for s in a.alternatives.iter().flatten() {
                let p = phrase_or_err(&s.action_phrase, lexicon)?;
                put(store, kb_clause(&p, None, None, lexicon))?;
            }
        }
    }
    Ok(codes)
}

/// Word → words used in its definition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefinitionGraph {
    defs: BTreeMap<String, BTreeSet<String>>,
}

impl DefinitionGraph {
    pub fn new() -> Self {
        DefinitionGraph::default()
    }

    pub fn define<I, S>(&mut self, word: &str, using: I) -> Result<(), KbError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = using.into_iter().map(Into::into).collect();
        if set.contains(word) {
            return Err(KbError::SelfLoop(word.to_string()));
        }
        self.defs.insert(word.to_string(), set);
        Ok(())
    }

    pub fn defs(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.defs
    }

    pub fn definition(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.defs.get(word)
    }

    /// Every defined word and every word used in a definition.
    pub fn words(&self) -> BTreeSet<String> {
        let mut all: BTreeSet<String> = self.defs.keys().cloned().collect();
        all.extend(self.defs.values().flatten().cloned());
        all
    }

    /// One `word: w1 w2 ...` line per definition; `#` starts a comment.
    pub fn parse(text: &str) -> Result<DefinitionGraph, KbError> {
        let mut g = DefinitionGraph::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (w, rest) = line
                .split_once(':')
                .ok_or_else(|| KbError::MalformedArticleLine(line.to_string()))?;
            g.define(w.trim(), rest.split_whitespace())?;
        }
        Ok(g)
    }
}

pub fn parse_word_set(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace())
        .map(str::to_string)
        .collect()
}

/// Iterated closure over bitmask-encoded definitions: `defs[i]` is the set
/// of words defining word `i`. Returns the reached set and the number of
/// non-empty layers added to `s0`.
pub fn closure_layers(defs: &[u64], s0: u64) -> (u64, usize) {
    let mut known = s0;
    let mut layers = 0;
    loop {
        let mut layer = 0u64;
        for (i, &d) in defs.iter().enumerate() {
            let bit = 1u64 << i;
            if known & bit == 0 && d & !known == 0 {
                layer |= bit;
            }
        }
        if layer == 0 {
            return (known, layers);
        }
        known |= layer;
        layers += 1;
    }
}

struct Indexed {
    words: Vec<String>,
    /// Definition of each word as word indices; `None` when undefined.
    defs: Vec<Option<Vec<usize>>>,
}

fn index(g: &DefinitionGraph, s0: &BTreeSet<String>) -> Indexed {
    let mut all = g.words();
    all.extend(s0.iter().cloned());
    let words: Vec<String> = all.into_iter().collect();
    let pos = |w: &str| words.binary_search_by(|x| x.as_str().cmp(w)).expect("indexed word");
    let defs = words
        .iter()
        .map(|w| g.defs.get(w).map(|d| d.iter().map(|u| pos(u)).collect()))
        .collect();
    Indexed { words, defs }
}

fn members(ix: &Indexed, set: &BTreeSet<String>) -> Vec<bool> {
    ix.words.iter().map(|w| set.contains(w)).collect()
}

/// Same closure as [`closure_layers`] over indexed words of any number.
fn closure(ix: &Indexed, s0: &[bool]) -> (Vec<bool>, usize) {
    let mut known = s0.to_vec();
    let mut layers = 0;
    loop {
        let layer: Vec<usize> = (0..known.len())
            .filter(|&i| !known[i] && ix.defs[i].as_ref().is_some_and(|d| d.iter().all(|&u| known[u])))
            .collect();
        if layer.is_empty() {
            return (known, layers);
        }
        for i in layer {
            known[i] = true;
        }
        layers += 1;
    }
}

/// Layer count when `s0` is a set of primitives for the graph's words,
/// `None` when the closure stops short.
pub fn primitive_layers(g: &DefinitionGraph, s0: &BTreeSet<String>) -> Result<Option<usize>, KbError> {
    let ix = index(g, s0);
    let base = members(&ix, s0);
    if let Some(i) = (0..ix.words.len()).find(|&i| !base[i] && ix.defs[i].is_none()) {
        return Err(KbError::UndefinedWord(ix.words[i].clone()));
    }
    let (reached, layers) = closure(&ix, &base);
    Ok(reached.iter().all(|&k| k).then_some(layers))
}

pub fn is_primitive_set(g: &DefinitionGraph, s0: &BTreeSet<String>) -> Result<bool, KbError> {
    primitive_layers(g, s0).map(|l| l.is_some())
}

/// Words to add to `s0` so that it becomes a set of primitives: every
/// undefined word outside `s0`, plus an irreducible choice of words that
/// break definition cycles the closure cannot enter.
pub fn minimal_primitive_extension(g: &DefinitionGraph, s0: &BTreeSet<String>) -> BTreeSet<String> {
    let ix = index(g, s0);
    let n = ix.words.len();
    let given = members(&ix, s0);
    let mut base: Vec<bool> = (0..n).map(|i| given[i] || ix.defs[i].is_none()).collect();
    let complete = |b: &[bool]| closure(&ix, b).0.iter().all(|&k| k);
    let mut added = Vec::new();
    for i in 0..n {
        let reached = closure(&ix, &base).0;
        if reached.iter().all(|&k| k) {
            break;
        }
        if !reached[i] {
            base[i] = true;
            added.push(i);
        }
    }
    for &i in added.iter().rev() {
        base[i] = false;
        if !complete(&base) {
            base[i] = true;
        }
    }
    (0..n).filter(|&i| base[i] && !given[i]).map(|i| ix.words[i].clone()).collect()
}
