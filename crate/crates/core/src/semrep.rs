//! Parse trees to typed-predicate records.
//!
//! Each clause yields one action, process, thought, message or event record
//! chosen by the selected verb sense. Noun groups yield object, place, time
//! and property records, reusing stored records when identification finds
//! one. Place and time carry over from sentence to sentence until a fragment
//! boundary or an explicit adverbial replaces them.

use thiserror::Error;

use crate::factbase::{FactError, FactStore};
use crate::inference::{Atom, HornClause, Term};
use crate::lexicon::{admissible, ActionType, GramCat, Lexicon, NounEntry, SemanticCode, Slot, VerbEntry};
use crate::parser::{
    head_code, Article, Clause, GrammaticalNumber, HeadKind, NounGroup, ParseTree, SentenceNode,
};
use crate::record::{Code, Family, PredicateRecord, Role, Sort, Value};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemError {
    #[error("nonsense: `{verb}` does not take {code} as {slot}")]
    NonsenseSentence {
        verb: String,
        slot: Slot,
        code: SemanticCode,
    },
    #[error("no antecedent for `{0}`")]
    UnresolvedPronoun(String),
    #[error("`{0}` is not in the noun dictionary")]
    UnknownNoun(String),
    #[error("`{0}` is not in the verb dictionary")]
    UnknownVerb(String),
    #[error("`{head}` does not combine with `{prep}` + {code}")]
    IncompatibleNounCombination {
        head: String,
        prep: String,
        code: SemanticCode,
    },
    #[error("unsupported construction: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Store(#[from] FactError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Male,
    Female,
    Neuter,
    /// A person whose sex is not known.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antecedent {
    pub code: Code,
    pub sort: Sort,
    pub sem: SemanticCode,
    pub gender: Gender,
    pub number: GrammaticalNumber,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiscourseContext {
    pub current_place: Option<Code>,
    pub current_time: Option<Code>,
    /// Most recent first.
    pub antecedents: Vec<Antecedent>,
}

impl DiscourseContext {
    pub fn new() -> Self {
        DiscourseContext::default()
    }

    /// A fragment boundary: place and time reset, antecedents persist.
    pub fn begin_fragment(&mut self) {
        self.current_place = None;
        self.current_time = None;
    }

    fn note(&mut self, a: Antecedent) {
        self.antecedents.retain(|b| b.code != a.code);
        self.antecedents.insert(0, a);
    }

    fn sem_of(&self, code: Code) -> Option<SemanticCode> {
        self.antecedents.iter().find(|a| a.code == code).map(|a| a.sem)
    }
}

/// Records created for one sentence, partitioned by family.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SemanticNet {
    pub psi: Vec<Code>,
    pub phi: Vec<Code>,
    pub gamma: Vec<Code>,
    pub delta: Vec<Code>,
    pub mu: Vec<Code>,
    pub rho: Vec<Code>,
}

impl SemanticNet {
    pub fn from_codes(store: &FactStore, codes: &[Code]) -> SemanticNet {
        let mut net = SemanticNet::default();
        for &c in codes {
            let Some(r) = store.get(c) else { continue };
            let set = match r.sort.family() {
                Family::Psi => &mut net.psi,
                Family::Phi => &mut net.phi,
                Family::Gamma => &mut net.gamma,
                Family::Delta => &mut net.delta,
                Family::Mu => &mut net.mu,
                Family::Rho => &mut net.rho,
            };
            set.push(c);
        }
        net
    }

    pub fn all(&self) -> Vec<Code> {
        let mut v: Vec<Code> = [&self.psi, &self.phi, &self.gamma, &self.delta, &self.mu, &self.rho]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.psi.len() + self.phi.len() + self.gamma.len() + self.delta.len() + self.mu.len() + self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The outcome of representing one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Represented {
    pub net: SemanticNet,
    /// Clause records (action, event, ...) in sentence order.
    pub clauses: Vec<Code>,
    /// Horn rules from universally quantified clauses.
    pub rules: Vec<HornClause>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PronounRef {
    Antecedent(Code),
    Universal,
    Existential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identification {
    Existing(Code),
    New,
}

pub fn sort_for_code(sem: SemanticCode) -> Sort {
    use SemanticCode::*;
    match sem {
        Person | Prof | Sibl => Sort::Person,
        Org => Sort::Organization,
        Thing | Weapon | Cloth | Food | Mat | Plant | Body => Sort::Thing,
        Mach => Sort::Machine,
        Anim => Sort::Animal,
        Natur | Env => Sort::Nature,
        Place => Sort::Place,
        Time => Sort::Time,
        Prop | Scale => Sort::Property,
        Abstr | Psych | Mes | Occup | Quant | Event | State | Act => Sort::Abstr,
    }
}

/// Record sort for a clause whose verb sense is `sense`.
pub fn clause_sort(sense: &VerbEntry) -> Sort {
    match sense.sem_typ {
        ActionType::Message => Sort::Message,
        ActionType::Create | ActionType::Attend if sense.is_mental() => Sort::Thought,
        ActionType::Process => Sort::Process,
        ActionType::Change | ActionType::Be => Sort::Event,
        _ => Sort::Action,
    }
}

/// Finds a stored record of the candidate's sort that agrees on every
/// identity field both specify. At least one such field other than `sex`
/// must be jointly specified. The most recent match wins.
pub fn identify_object(candidate: &PredicateRecord, store: &FactStore) -> Identification {
    let fields = candidate.sort.identity_fields();
    let mut best = None;
    for stored in store.of_sort(candidate.sort) {
        if stored.kb != candidate.kb {
            continue;
        }
        let mut joint = 0;
        let mut agree = true;
        for f in fields {
            let (a, b) = (candidate.value(f), stored.value(f));
            if a.is_absent() || b.is_absent() {
                continue;
            }
            if a != b {
                agree = false;
                break;
            }
            if *f != "sex" {
                joint += 1;
            }
        }
        if agree && joint > 0 {
            best = stored.code;
        }
    }
    best.map_or(Identification::New, Identification::Existing)
}

pub fn inherit_place_time(ctx: &DiscourseContext) -> (Option<Code>, Option<Code>) {
    (ctx.current_place, ctx.current_time)
}

pub fn semantic_char(conj: &str) -> Option<&'static str> {
    Some(match conj {
        "when" | "while" => "time",
        "because" => "cause",
        "if" => "condition",
        "where" => "place",
        "to" => "purpose",
        "by" => "method",
        _ => return None,
    })
}

pub fn link_clauses(main: Code, sub: Code, conj: &str, kinds: (Sort, Sort)) -> PredicateRecord {
    let mut link = PredicateRecord::new(Sort::Link)
        .with("base_str", Value::text(kinds.0.as_str()))
        .with("sub_str", Value::text(kinds.1.as_str()))
        .with("cod_base", Value::Ref(main))
        .with("cod_sub", Value::Ref(sub))
        .with("conj", Value::text(conj));
    if let Some(c) = semantic_char(conj) {
        link.set("sem_char", Value::text(c));
    }
    link
}

/// First sense (file order) whose control admits the subject and every
/// filled slot.
pub fn select_verb_sense<'l>(
    base: &str,
    particle: Option<&str>,
    subject: Option<SemanticCode>,
    slots: &[(Slot, Option<String>, SemanticCode)],
    lexicon: &'l Lexicon,
) -> Result<&'l VerbEntry, SemError> {
    let senses: Vec<&VerbEntry> = lexicon
        .verb_senses(base)
        .into_iter()
        .filter(|v| v.after_verb == particle.unwrap_or(""))
        .collect();
    if senses.is_empty() {
        let word = match particle {
            Some(p) => format!("{base} {p}"),
            None => base.to_string(),
        };
        return Err(SemError::UnknownVerb(word));
    }
    let subject_ok = |v: &VerbEntry| subject.is_none_or(|c| admissible(v, Slot::Subject, None, c));
    let first_failure = |v: &VerbEntry| {
        slots
            .iter()
            .find(|(slot, prep, code)| !admissible(v, *slot, prep.as_deref(), *code))
            .map(|(slot, _, code)| (*slot, *code))
    };
    if let Some(v) = senses.iter().find(|v| subject_ok(v) && first_failure(v).is_none()) {
        return Ok(v);
    }
    let (slot, code) = match senses.iter().find(|v| subject_ok(v)) {
        Some(v) => first_failure(v).expect("some slot failed"),
        None => (Slot::Subject, subject.expect("subject failed")),
    };
    Err(SemError::NonsenseSentence {
        verb: base.to_string(),
        slot,
        code,
    })
}

#[derive(Debug, Clone, Copy)]
struct Features {
    gender: Option<Gender>,
    plural: bool,
}

fn pronoun_features(synt_char: &str) -> Features {
    let parts: Vec<&str> = synt_char.split(',').collect();
    let gender = if parts.contains(&"m") {
        Some(Gender::Male)
    } else if parts.contains(&"f") {
        Some(Gender::Female)
    } else if parts.contains(&"n") {
        Some(Gender::Neuter)
    } else {
        None
    };
    Features {
        gender,
        plural: parts.contains(&"pl"),
    }
}

fn compatible(a: &Antecedent, f: Features) -> bool {
    let number_ok = f.plural == (a.number == GrammaticalNumber::Plural);
    let gender_ok = match f.gender {
        None => true,
        Some(Gender::Neuter) => a.gender == Gender::Neuter,
        Some(g) => a.gender == g || a.gender == Gender::Unknown,
    };
    number_ok && gender_ok
}

pub fn resolve_pronoun(word: &str, lexicon: &Lexicon, ctx: &DiscourseContext) -> Result<PronounRef, SemError> {
    let lower = word.to_lowercase();
    let entry = lexicon
        .surface_as(&lower, GramCat::Pronoun)
        .ok_or_else(|| SemError::UnresolvedPronoun(word.to_string()))?;
    match entry.synt_char.as_str() {
        "univ" => return Ok(PronounRef::Universal),
        "exist" => return Ok(PronounRef::Existential),
        _ => {}
    }
    // `her` is listed both as possessive and personal; features agree.
    let f = pronoun_features(&entry.synt_char);
    ctx.antecedents
        .iter()
        .find(|a| compatible(a, f))
        .map(|a| PronounRef::Antecedent(a.code))
        .ok_or_else(|| SemError::UnresolvedPronoun(word.to_string()))
}

const LOCATIVE: &[&str] = &["in", "at", "on", "near", "during", "under", "by"];

/// How a prepositional phrase of a clause is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Adjunct {
    Place,
    Time,
    Slot(Slot),
}

fn classify(prep: Option<&str>, code: SemanticCode) -> Adjunct {
    match prep {
        None => Adjunct::Slot(Slot::At),
        Some(p) if code == SemanticCode::Time && p != "from" && p != "to" => Adjunct::Time,
        Some(p) if code == SemanticCode::Place && LOCATIVE.contains(&p) => Adjunct::Place,
        Some("with") => Adjunct::Slot(Slot::With),
        Some("by") if code != SemanticCode::Place => Adjunct::Slot(Slot::With),
        Some("from") => Adjunct::Slot(Slot::From),
        Some(_) => Adjunct::Slot(Slot::To),
    }
}

fn sex_of(entry: &NounEntry) -> Option<&'static str> {
    match entry.maj_class.as_str() {
        "male" => Some("m"),
        "female" => Some("f"),
        _ => None,
    }
}

fn gender_of(rec: &PredicateRecord) -> Gender {
    match rec.sort {
        Sort::Person => match rec.value("sex").as_text() {
            Some("m") => Gender::Male,
            Some("f") => Gender::Female,
            _ => Gender::Unknown,
        },
        _ => Gender::Neuter,
    }
}

fn number_value(n: GrammaticalNumber) -> Value {
    Value::text(match n {
        GrammaticalNumber::Singular => "sg",
        GrammaticalNumber::Plural => "pl",
    })
}

/// Slot naming the head word of an object record, used to resolve definite
/// common nouns against earlier mentions.
fn head_slot(sort: Sort, sem: SemanticCode) -> Option<&'static str> {
    Some(match sort {
        Sort::Person if sem == SemanticCode::Prof => "prof",
        Sort::Organization => "typ_org",
        Sort::Thing | Sort::Machine | Sort::Property => "name",
        Sort::Animal => "typ_an",
        Sort::Nature => "typ_nat",
        Sort::Abstr => "concept",
        _ => return None,
    })
}

fn place_slot(entry: &NounEntry, proper: bool) -> (&'static str, Option<&'static str>) {
    match entry.maj_class.as_str() {
        "city" | "country" | "region" => ("ter_entity", proper.then_some("name_ter")),
        "building" => ("constr", proper.then_some("name_constr")),
        "room" => ("fin_locat", proper.then_some("name_room")),
        _ => ("locat", proper.then_some("name_loc")),
    }
}

struct Builder<'a> {
    lex: &'a Lexicon,
    store: FactStore,
    ctx: DiscourseContext,
    created: Vec<Code>,
    rules: Vec<HornClause>,
}

/// A represented noun group.
#[derive(Debug, Clone, Copy)]
struct Obj {
    code: Code,
    sem: SemanticCode,
}

impl<'a> Builder<'a> {
    fn insert(&mut self, rec: PredicateRecord) -> Result<Code, SemError> {
        let code = self.store.insert(rec)?;
        self.created.push(code);
        Ok(code)
    }

    /// Identification followed by merge or insertion.
    fn place_object(&mut self, rec: PredicateRecord, identify: bool) -> Result<Code, SemError> {
        if identify {
            if let Identification::Existing(c) = identify_object(&rec, &self.store) {
                match self.store.merge_absent(c, &rec) {
                    Ok(()) => return Ok(c),
                    Err(FactError::ConflictingIdentity { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
        self.insert(rec)
    }

    fn note_antecedent(&mut self, code: Code, sem: SemanticCode, number: GrammaticalNumber) {
        let rec = self.store.get(code).expect("just stored");
        if matches!(rec.sort, Sort::Place | Sort::Time) || rec.sort.is_clause() {
            return;
        }
        let a = Antecedent {
            code,
            sort: rec.sort,
            sem,
            gender: gender_of(rec),
            number,
        };
        self.ctx.note(a);
    }

    fn pronoun(&mut self, word: &str) -> Result<Obj, SemError> {
        match resolve_pronoun(word, self.lex, &self.ctx)? {
            PronounRef::Antecedent(code) => {
                let sem = self.ctx.sem_of(code).expect("antecedent");
                let a = self.ctx.antecedents.iter().find(|a| a.code == code).cloned().expect("antecedent");
                self.ctx.note(a);
                Ok(Obj { code, sem })
            }
            _ => Err(SemError::Unsupported(format!("quantifier `{word}` as a noun group head"))),
        }
    }

    /// Sense of the noun group's head, with the semantic code used for
    /// control checks.
    fn ng_code(&self, ng: &NounGroup) -> Result<SemanticCode, SemError> {
        match ng.head_kind {
            HeadKind::Pronoun => match resolve_pronoun(&ng.head, self.lex, &self.ctx)? {
                PronounRef::Antecedent(c) => Ok(self.ctx.sem_of(c).expect("antecedent")),
                _ => Err(SemError::Unsupported(format!("quantifier `{}`", ng.head))),
            },
            _ => head_code(self.lex, ng).ok_or_else(|| SemError::UnknownNoun(ng.head_base.clone())),
        }
    }

    fn owner_of(&mut self, ng: &NounGroup) -> Result<Option<Obj>, SemError> {
        if let Some(p) = &ng.possessor {
            return Ok(Some(self.noun_group(p)?));
        }
        if let Some(det) = &ng.determiner {
            if let Some(p) = self.lex.surface_as(det, GramCat::Pronoun) {
                if p.synt_char.starts_with("poss") {
                    return Ok(Some(self.pronoun(det)?));
                }
            }
        }
        Ok(None)
    }

    fn noun_group(&mut self, ng: &NounGroup) -> Result<Obj, SemError> {
        match ng.head_kind {
            HeadKind::Pronoun => self.pronoun(&ng.head),
            HeadKind::Numeral => {
                let n: i64 = ng
                    .head
                    .parse()
                    .map_err(|_| SemError::Unsupported(format!("numeral `{}`", ng.head)))?;
                let rec = PredicateRecord::new(Sort::Time).with("year", Value::Int(n));
                let code = self.place_object(rec, true)?;
                Ok(Obj {
                    code,
                    sem: SemanticCode::Time,
                })
            }
            HeadKind::Proper | HeadKind::Common => self.nominal(ng),
        }
    }

    fn nominal(&mut self, ng: &NounGroup) -> Result<Obj, SemError> {
        let entry = self
            .lex
            .noun(&ng.head_base)
            .ok_or_else(|| SemError::UnknownNoun(ng.head_base.clone()))?
            .clone();
        let sem = entry.sem_cod;
        let proper = ng.head_kind == HeadKind::Proper;
        let owner = self.owner_of(ng)?;

        if !entry.verb.is_empty() {
            return self.verbal_noun(ng, &entry, owner);
        }

        let sort = sort_for_code(sem);
        let mut rec = PredicateRecord::new(sort);
        let number = number_value(ng.number);
        let mut relations: Vec<(String, Obj)> = Vec::new();
        match sort {
            Sort::Person => {
                if proper {
                    let mut names: Vec<String> = ng
                        .attributes
                        .iter()
                        .filter(|a| self.lex.noun(&a.to_lowercase()).is_some())
                        .cloned()
                        .collect();
                    names.push(ng.head.clone());
                    if names.len() >= 2 {
                        rec.set("first_name", Value::text(&names[0]));
                        rec.set("second_name", Value::text(&names[names.len() - 1]));
                    } else if entry.maj_class == "surname" {
                        rec.set("second_name", Value::text(&names[0]));
                    } else {
                        rec.set("first_name", Value::text(&names[0]));
                    }
                    if let Some(first) = self.lex.noun(&names[0].to_lowercase()) {
                        if let Some(s) = sex_of(first) {
                            rec.set("sex", Value::text(s));
                        }
                    }
                } else {
                    if sem == SemanticCode::Prof {
                        rec.set("prof", Value::text(&entry.osn_form));
                    }
                    if let Some(s) = sex_of(&entry) {
                        rec.set("sex", Value::text(s));
                    }
                }
                rec.set("number", number);
                if sem == SemanticCode::Sibl {
                    if let Some(o) = owner {
                        relations.push(("familiar".into(), o));
                    }
                }
            }
            Sort::Organization => {
                if proper {
                    rec.set("name_org", Value::text(&ng.head));
                }
                rec.set("typ_org", Value::text(&entry.osn_form));
                rec.set("number", number);
            }
            Sort::Thing | Sort::Machine => {
                rec.set("name", Value::text(&entry.osn_form));
                rec.set("number", number);
                if sort == Sort::Thing {
                    rec.set("maj_class", Value::text(&entry.maj_class));
                }
                if let Some(o) = owner {
                    rec.set("cod_owner", Value::Ref(o.code));
                }
            }
            Sort::Animal => {
                rec.set("typ_an", Value::text(&entry.osn_form));
                rec.set("maj_class", Value::text(&entry.maj_class));
                rec.set("number", number);
                if proper {
                    rec.set("name", Value::text(&ng.head));
                }
                if let Some(o) = owner {
                    rec.set("cod_owner", Value::Ref(o.code));
                }
            }
            Sort::Nature => {
                rec.set("typ_nat", Value::text(&entry.osn_form));
                rec.set("number", number);
                if proper {
                    rec.set("name", Value::text(&ng.head));
                }
            }
            Sort::Place => {
                let (kind, name) = place_slot(&entry, proper);
                match name {
                    Some(name) => {
                        rec.set(kind, Value::text(&entry.maj_class));
                        rec.set(name, Value::text(&ng.head));
                    }
                    None => rec.set(kind, Value::text(&entry.osn_form)),
                }
            }
            Sort::Time => {
                let slot = match entry.maj_class.as_str() {
                    "day" => "day_week",
                    "season" => "season",
                    "month" => "month",
                    "part_day" => "part_day",
                    _ => "holyday",
                };
                rec.set(slot, Value::text(if proper { &ng.head } else { &entry.osn_form }));
            }
            Sort::Property => {
                rec.set("name", Value::text(&entry.osn_form));
                if !entry.scale.is_empty() {
                    rec.set("scale", Value::text(&entry.scale));
                }
                if let Some(s) = entry.state {
                    rec.set("state", Value::Int(s.into()));
                }
            }
            Sort::Abstr => {
                rec.set("concept", Value::text(&entry.osn_form));
                rec.set("domain", Value::text(&entry.maj_class));
                if let Some(o) = owner {
                    rec.set("cod_owner", Value::Ref(o.code));
                }
            }
            _ => unreachable!("object sorts only"),
        }

        let mut later: Vec<(String, NounGroup)> = Vec::new();
        for (prep, inner) in &ng.postmods {
            let inner_code = self.ng_code(inner)?;
            if !self.lex.noun_senses(&ng.head_base).iter().any(|n| crate::lexicon::noun_admissible(n, prep, inner_code)) {
                return Err(SemError::IncompatibleNounCombination {
                    head: ng.head_base.clone(),
                    prep: prep.clone(),
                    code: inner_code,
                });
            }
            let owner_like = matches!(
                inner_code,
                SemanticCode::Person | SemanticCode::Prof | SemanticCode::Sibl | SemanticCode::Org
            );
            if prep == "of" && owner_like && rec.sort.slot_index("cod_owner").is_some() {
                let o = self.noun_group(inner)?;
                rec.set("cod_owner", Value::Ref(o.code));
            } else if prep == "of" && sem == SemanticCode::Sibl {
                let o = self.noun_group(inner)?;
                relations.push(("familiar".into(), o));
            } else {
                later.push((prep.clone(), inner.clone()));
            }
        }

        let code = match ng.article {
            Article::Indefinite => self.insert(rec)?,
            _ if proper => self.place_object(rec, true)?,
            _ if matches!(sort, Sort::Place | Sort::Time) => self.place_object(rec, true)?,
            Article::Definite => self.definite(rec, sem)?,
            Article::None => self.place_object(rec, true)?,
        };
        self.note_antecedent(code, sem, ng.number);

        for attr in &ng.attributes {
            if let Some(adj) = self.lex.adjective(&attr.to_lowercase()) {
                let mut p = PredicateRecord::new(Sort::Property)
                    .with("name", Value::text(&adj.osn_form))
                    .with("cod_obj", Value::Ref(code));
                if !adj.scale.is_empty() {
                    p.set("scale", Value::text(&adj.scale));
                }
                if let Some(s) = adj.state {
                    p.set("state", Value::Int(s.into()));
                }
                self.insert(p)?;
            } else if let Some(n) = self.lex.surface_as(attr, GramCat::Numeral) {
                let value = ["one", "two", "three", "four", "five"]
                    .iter()
                    .position(|w| *w == n.osn_form)
                    .map(|i| i as i64 + 1);
                let mut num = PredicateRecord::new(Sort::Number)
                    .with("descr_word", Value::text(&n.osn_form))
                    .with("cod_obj", Value::Ref(code));
                if let Some(v) = value {
                    num.set("numb", Value::Int(v));
                }
                self.insert(num)?;
            }
        }

        for (typ, other) in relations {
            self.relation(&typ, &entry.osn_form, code, other)?;
        }
        for (prep, inner) in later {
            let o = self.noun_group(&inner)?;
            self.relation(&prep, &entry.osn_form, code, o)?;
        }
        Ok(Obj { code, sem })
    }

    fn relation(&mut self, typ: &str, first: &str, first_code: Code, other: Obj) -> Result<(), SemError> {
        let sec = self.head_word(other.code);
        let mut rel = PredicateRecord::new(Sort::Relation)
            .with("typ_rel", Value::text(typ))
            .with("first_obj", Value::text(first))
            .with("cod_first", Value::Ref(first_code))
            .with("cod_sec", Value::Ref(other.code));
        if let Some(s) = sec {
            rel.set("sec_obj", Value::text(s));
        }
        self.insert(rel)?;
        Ok(())
    }

    fn head_word(&self, code: Code) -> Option<String> {
        let r = self.store.get(code)?;
        ["first_name", "second_name", "prof", "name", "name_org", "typ_org", "typ_an", "typ_nat", "concept", "name_ter"]
            .iter()
            .find_map(|s| r.value(s).as_text().map(str::to_string))
    }

    /// A definite common noun refers to the most recent record with the same
    /// head word; failing that it is identified like any other object.
    fn definite(&mut self, rec: PredicateRecord, sem: SemanticCode) -> Result<Code, SemError> {
        if let Some(slot) = head_slot(rec.sort, sem) {
            let head = rec.value(slot).clone();
            let hit = self
                .ctx
                .antecedents
                .iter()
                .filter(|a| a.sort == rec.sort)
                .map(|a| a.code)
                .chain(self.store.of_sort(rec.sort).iter().rev().filter_map(|r| r.code))
                .find(|c| self.store.get(*c).is_some_and(|r| r.value(slot) == &head));
            if let Some(c) = hit {
                if self.store.merge_absent(c, &rec).is_ok() {
                    return Ok(c);
                }
            }
        }
        self.place_object(rec, true)
    }

    fn verbal_noun(&mut self, ng: &NounGroup, entry: &NounEntry, owner: Option<Obj>) -> Result<Obj, SemError> {
        let sense = self
            .lex
            .verb_senses(&entry.verb)
            .first()
            .copied()
            .ok_or_else(|| SemError::UnknownVerb(entry.verb.clone()))?
            .clone();
        let sort = clause_sort(&sense);
        let mut rec = PredicateRecord::new(sort).with("word", Value::text(&entry.verb));
        if sort == Sort::Action {
            rec.set("sem_typ_act", Value::text(sense.sem_typ.as_str()));
        }
        if let Some(o) = owner {
            if let Some(slot) = sort.role_slot(Role::Subject) {
                rec.set(slot, Value::Ref(o.code));
            }
        }
        for (prep, inner) in &ng.postmods {
            let o = self.noun_group(inner)?;
            if prep == "of" {
                if let Some(slot) = sort.role_slot(Role::Object) {
                    rec.set(slot, Value::Ref(o.code));
                }
            }
        }
        let code = self.insert(rec)?;
        Ok(Obj {
            code,
            sem: entry.sem_cod,
        })
    }

    fn clause_record(&mut self, clause: &Clause) -> Result<(Code, Sort), SemError> {
        let quantifier = clause
            .subject
            .determiner
            .as_deref()
            .and_then(|d| self.lex.surface_as(d, GramCat::Pronoun))
            .map(|p| p.synt_char.clone());
        if quantifier.as_deref() == Some("univ") {
            return Err(SemError::Unsupported("universal clause".into()));
        }
        let existential = quantifier.as_deref() == Some("exist");

        // Fronted adverbials (`In Paris Peter worked.`) act like clause adjuncts.
        let mut pps: Vec<(Option<String>, &NounGroup)> =
            clause.fronted.iter().map(|(p, ng)| (Some(p.clone()), ng)).collect();
        pps.extend(clause.objects.iter().map(|(p, ng)| (p.clone(), ng)));

        let subject_code = self.ng_code(&clause.subject)?;
        let mut slots = Vec::new();
        let mut kinds = Vec::new();
        for (prep, ng) in &pps {
            let code = self.ng_code(ng)?;
            let kind = classify(prep.as_deref(), code);
            if let Adjunct::Slot(s) = kind {
                slots.push((s, prep.clone(), code));
            }
            kinds.push(kind);
        }
        let sense = select_verb_sense(
            &clause.verb.head,
            clause.verb.particle.as_deref(),
            Some(subject_code),
            &slots,
            self.lex,
        )?
        .clone();
        let sort = clause_sort(&sense);

        let subject = self.noun_group(&clause.subject)?;
        let mut rec = PredicateRecord::new(sort);
        let (sort_slot, neg_slot, char_slot) = sort.clause_flags().expect("clause sort");
        rec.set(sort_slot, Value::text(if existential { "possible" } else { "real" }));
        rec.set(neg_slot, Value::text(if clause.verb.negated { "yes" } else { "no" }));
        if let Some(tense_slot) = sort.slot_index("tense").map(|_| "tense") {
            rec.set(tense_slot, Value::text(clause.verb.tense.as_str()));
        }
        rec.set(char_slot, Value::text(clause.verb.aspect.as_str()));
        if let Some(a) = &clause.verb.adverb {
            rec.set("adverb", Value::text(a));
        }
        let word = match &clause.verb.particle {
            Some(p) => format!("{}_{p}", sense.inf),
            None => sense.inf.clone(),
        };
        rec.set("word", Value::text(&word));
        if sort == Sort::Action {
            rec.set("sem_typ_act", Value::text(sense.sem_typ.as_str()));
        }
        if !sense.scale.is_empty() && rec.sort.slot_index("scale").is_some() {
            rec.set("scale", Value::text(&sense.scale));
            if let Some(e) = sense.end_state {
                rec.set("res_state", Value::Int(e.into()));
            }
            if let (Some(b), true) = (sense.beg_state, sort == Sort::Event) {
                rec.set("beg_state", Value::Int(b.into()));
            }
        }
        rec.set(sort.role_slot(Role::Subject).expect("subject slot"), Value::Ref(subject.code));

        let mut place = None;
        let mut time = None;
        for ((prep, ng), kind) in pps.iter().zip(kinds) {
            let obj = self.noun_group(ng)?;
            let role = match kind {
                Adjunct::Place => {
                    place = Some(obj.code);
                    continue;
                }
                Adjunct::Time => {
                    time = Some(obj.code);
                    continue;
                }
                Adjunct::Slot(Slot::At) if sort == Sort::Message && sort_for_code(obj.sem) == Sort::Person => Role::To,
                Adjunct::Slot(Slot::At) => Role::Object,
                Adjunct::Slot(Slot::To) if sort == Sort::Message && prep.as_deref() == Some("about") => Role::Object,
                Adjunct::Slot(Slot::To) => Role::To,
                Adjunct::Slot(Slot::From) => Role::From,
                Adjunct::Slot(Slot::With) => Role::Way,
                Adjunct::Slot(Slot::Subject) => unreachable!("subjects are not adjuncts"),
            };
            let slot = sort
                .role_slot(role)
                .filter(|s| rec.value(s).is_absent())
                .or_else(|| sort.role_slot(Role::Object).filter(|s| rec.value(s).is_absent()));
            if let Some(slot) = slot {
                rec.set(slot, Value::Ref(obj.code));
            }
        }

        if place.is_some() {
            self.ctx.current_place = place;
        }
        if time.is_some() {
            self.ctx.current_time = time;
        }
        let (ctx_place, ctx_time) = inherit_place_time(&self.ctx);
        if let (Some(p), Some(slot)) = (ctx_place, sort.role_slot(Role::Place)) {
            rec.set(slot, Value::Ref(p));
        }
        if let (Some(t), Some(slot)) = (ctx_time, sort.role_slot(Role::Time)) {
            rec.set(slot, Value::Ref(t));
        }
        let code = self.insert(rec)?;
        Ok((code, sort))
    }

    /// `Every criminal has a gun.` becomes rules over the quantified concept.
    fn universal(&mut self, clause: &Clause) -> Result<(), SemError> {
        let concept = clause.subject.head_base.clone();
        if self.lex.noun(&concept).is_none() {
            return Err(SemError::UnknownNoun(concept));
        }
        let x = Term::var("X");
        let body = vec![Atom::new("isa", vec![x.clone(), Term::sym(&concept)])];
        let verb = clause.verb.head.clone();
        let object = clause.objects.iter().find(|(p, _)| p.is_none()).map(|(_, ng)| ng);
        match object {
            Some(ng) if verb == "be" => {
                self.rules.push(HornClause::rule(
                    Atom::new("isa", vec![x.clone(), Term::sym(&ng.head_base)]),
                    body,
                ));
            }
            Some(ng) if ng.article == Article::Indefinite || ng.head_kind == HeadKind::Common => {
                let sk = Term::compound(&format!("sk_{verb}_{}", ng.head_base), vec![x.clone()]);
                self.rules.push(HornClause::rule(
                    Atom::new("does", vec![x.clone(), Term::sym(&verb), sk.clone()]),
                    body.clone(),
                ));
                self.rules
                    .push(HornClause::rule(Atom::new("isa", vec![sk, Term::sym(&ng.head_base)]), body));
            }
            Some(ng) => {
                let o = self.noun_group(ng)?;
                self.rules.push(HornClause::rule(
                    Atom::new("does", vec![x.clone(), Term::sym(&verb), Term::code(o.code)]),
                    body,
                ));
            }
            None => self.rules.push(HornClause::rule(
                Atom::new("acts", vec![x.clone(), Term::sym(&verb)]),
                body,
            )),
        }
        Ok(())
    }

    fn is_universal(&self, clause: &Clause) -> bool {
        clause
            .subject
            .determiner
            .as_deref()
            .and_then(|d| self.lex.surface_as(d, GramCat::Pronoun))
            .is_some_and(|p| p.synt_char == "univ")
    }

    fn node(&mut self, node: &SentenceNode, clauses: &mut Vec<Code>) -> Result<Option<(Code, Sort)>, SemError> {
        match node {
            SentenceNode::Setting(pps) => {
                self.ctx.begin_fragment();
                for (_, ng) in pps {
                    let obj = self.noun_group(ng)?;
                    match self.store.get(obj.code).map(|r| r.sort) {
                        Some(Sort::Place) => self.ctx.current_place = Some(obj.code),
                        Some(Sort::Time) => self.ctx.current_time = Some(obj.code),
                        _ => {
                            return Err(SemError::Unsupported(format!(
                                "`{}` is neither a place nor a time",
                                ng.head
                            )))
                        }
                    }
                }
                Ok(None)
            }
            SentenceNode::Simple(clause) if self.is_universal(clause) => {
                self.universal(clause)?;
                Ok(None)
            }
            SentenceNode::Simple(clause) => {
                let (code, sort) = self.clause_record(clause)?;
                clauses.push(code);
                Ok(Some((code, sort)))
            }
            SentenceNode::Compound { parts, conjunctions } => {
                let mut first = None;
                for (i, part) in parts.iter().enumerate() {
                    let done = self.node(part, clauses)?;
                    match (first, done) {
                        (None, d) => first = d,
                        (Some((main, ms)), Some((sub, ss))) => {
                            let conj = &conjunctions[i - 1];
                            self.insert(link_clauses(main, sub, conj, (ms, ss)))?;
                        }
                        _ => {}
                    }
                }
                Ok(first)
            }
            SentenceNode::Complex { main, subordinate } => {
                let head = self.node(main, clauses)?;
                for (conj, sub) in subordinate {
                    let done = self.node(sub, clauses)?;
                    if let (Some((m, ms)), Some((s, ss))) = (head, done) {
                        if conj == "because" && ms.role_slot(Role::Cause).is_some() {
                            let patch = PredicateRecord::new(ms).with(
                                ms.role_slot(Role::Cause).expect("cause slot"),
                                Value::Ref(s),
                            );
                            // A clause already carrying a cause keeps it.
                            let _ = self.store.merge_absent(m, &patch);
                        }
                        self.insert(link_clauses(m, s, conj, (ms, ss)))?;
                    }
                }
                Ok(head)
            }
        }
    }
}

/// Represents one parsed sentence. On error neither the store nor the
/// context is changed.
pub fn represent(
    tree: &ParseTree,
    ctx: &mut DiscourseContext,
    lexicon: &Lexicon,
    store: &mut FactStore,
) -> Result<Represented, SemError> {
    let mut b = Builder {
        lex: lexicon,
        store: store.clone(),
        ctx: ctx.clone(),
        created: Vec::new(),
        rules: Vec::new(),
    };
    let mut clauses = Vec::new();
    b.node(&tree.root, &mut clauses)?;
    let net = SemanticNet::from_codes(&b.store, &b.created);
    *store = b.store;
    *ctx = b.ctx;
    Ok(Represented {
        net,
        clauses,
        rules: b.rules,
    })
}

/// Represents a single noun group and returns the code of its record.
pub fn represent_noun_group(
    ng: &NounGroup,
    ctx: &mut DiscourseContext,
    lexicon: &Lexicon,
    store: &mut FactStore,
) -> Result<Code, SemError> {
    let mut b = Builder {
        lex: lexicon,
        store: store.clone(),
        ctx: ctx.clone(),
        created: Vec::new(),
        rules: Vec::new(),
    };
    let obj = b.noun_group(ng)?;
    *store = b.store;
    *ctx = b.ctx;
    Ok(obj.code)
}

/// Splits text into fragments (blank-line separated) of sentences, each
/// ending with `.` or `?`. Lines starting with `#` are comments.
pub fn split_fragments(text: &str) -> Vec<Vec<String>> {
    let mut fragments = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut pending = String::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            if !pending.trim().is_empty() {
                current.push(pending.trim().to_string());
                pending.clear();
            }
            if !current.is_empty() {
                fragments.push(std::mem::take(&mut current));
            }
            continue;
        }
        for c in trimmed.chars() {
            pending.push(c);
            if c == '.' || c == '?' {
                current.push(pending.trim().to_string());
                pending.clear();
            }
        }
        pending.push(' ');
    }
    if !pending.trim().is_empty() {
        current.push(pending.trim().to_string());
    }
    if !current.is_empty() {
        fragments.push(current);
    }
    fragments
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_sentence, tokenize};
    use crate::testutil::fixture_lexicon;

    struct Env {
        lex: Lexicon,
        store: FactStore,
        ctx: DiscourseContext,
    }

    impl Env {
        fn new() -> Env {
            Env {
                lex: fixture_lexicon(),
                store: FactStore::new(),
                ctx: DiscourseContext::new(),
            }
        }

        fn say(&mut self, s: &str) -> Result<Represented, SemError> {
            let tree = parse_sentence(&tokenize(s), &self.lex).unwrap();
            represent(&tree, &mut self.ctx, &self.lex, &mut self.store)
        }

        fn rec(&self, c: Code) -> &PredicateRecord {
            self.store.get(c).unwrap()
        }
    }

    #[test]
    fn shooting_with_a_pistol() {
        let mut e = Env::new();
        let r = e.say("Peter shot John with a pistol.").unwrap();
        assert_eq!(r.clauses.len(), 1);
        let act = e.rec(r.clauses[0]).clone();
        assert_eq!(act.sort, Sort::Action);
        assert_eq!(act.value("sem_typ_act"), &Value::text("PROPEL"));
        assert_eq!(act.value("word"), &Value::text("shoot"));
        assert_eq!(act.value("tense"), &Value::text("past"));
        assert_eq!(act.value("scale"), &Value::text("HEALTH"));
        assert_eq!(act.value("res_state"), &Value::Int(-100));
        let sub = e.rec(act.value("cod_sub").as_ref_code().unwrap());
        assert_eq!(sub.value("first_name"), &Value::text("Peter"));
        let obj = e.rec(act.value("cod_obj").as_ref_code().unwrap());
        assert_eq!(obj.value("first_name"), &Value::text("John"));
        let way = e.rec(act.value("cod_way").as_ref_code().unwrap());
        assert_eq!((way.sort, way.value("name")), (Sort::Thing, &Value::text("pistol")));
        assert_eq!(r.net.psi.len(), 3);
        assert_eq!(r.net.phi, vec![r.clauses[0]]);
    }

    #[test]
    fn exactly_one_shoot_sense_fits() {
        let lex = fixture_lexicon();
        let fits: Vec<_> = lex
            .verb_senses("shoot")
            .into_iter()
            .filter(|v| {
                admissible(v, Slot::Subject, None, SemanticCode::Person)
                    && admissible(v, Slot::At, None, SemanticCode::Person)
                    && admissible(v, Slot::With, Some("with"), SemanticCode::Weapon)
            })
            .collect();
        assert_eq!(fits.len(), 1);
    }

    #[test]
    fn work_sense_disambiguation_and_nonsense() {
        let lex = fixture_lexicon();
        let slots = [(Slot::With, Some("with".to_string()), SemanticCode::Abstr)];
        let v = select_verb_sense("work", None, Some(SemanticCode::Person), &slots, &lex).unwrap();
        assert!(v.contr_with.contains(&SemanticCode::Abstr));
        assert_eq!(v.meta("gloss"), Some("work with a topic"));

        let slots = [(Slot::At, None, SemanticCode::Abstr)];
        assert_eq!(
            select_verb_sense("play", None, Some(SemanticCode::Person), &slots, &lex),
            Err(SemError::NonsenseSentence {
                verb: "play".into(),
                slot: Slot::At,
                code: SemanticCode::Abstr
            })
        );
        let mut e = Env::new();
        assert!(matches!(e.say("A man plays physic."), Err(SemError::NonsenseSentence { .. })));
        assert!(e.store.is_empty());
    }

    #[test]
    fn magnetic_field() {
        let mut e = Env::new();
        let r = e.say("A man works with magnetic field.").unwrap();
        let act = e.rec(r.clauses[0]).clone();
        let field = act.value("cod_way").as_ref_code().unwrap();
        assert_eq!(e.rec(field).sort, Sort::Abstr);
        let prop = e
            .store
            .of_sort(Sort::Property)
            .into_iter()
            .find(|p| p.value("cod_obj") == &Value::Ref(field))
            .unwrap();
        assert_eq!(prop.value("name"), &Value::text("magnetic"));
    }

    #[test]
    fn intransitive_leaves_object_absent() {
        let mut e = Env::new();
        let r = e.say("Peter sleeps.").unwrap();
        let act = e.rec(r.clauses[0]);
        assert_eq!(act.sort, Sort::Action);
        assert!(act.value("cod_obj").is_absent());
    }

    #[test]
    fn owner_from_of_phrase() {
        let mut e = Env::new();
        let r = e.say("Peter took the book of John.").unwrap();
        let act = e.rec(r.clauses[0]).clone();
        let book = e.rec(act.value("cod_obj").as_ref_code().unwrap());
        let owner = e.rec(book.value("cod_owner").as_ref_code().unwrap());
        assert_eq!(owner.value("first_name"), &Value::text("John"));
    }

    #[test]
    fn coherence_and_identification() {
        let mut e = Env::new();
        e.say("In London in 1900.").unwrap();
        let a = e.say("Peter worked.").unwrap();
        let b = e.say("Peter shot John.").unwrap();
        let (x, y) = (e.rec(a.clauses[0]).clone(), e.rec(b.clauses[0]).clone());
        assert!(!x.value("cod_loc").is_absent());
        assert_eq!(x.value("cod_loc"), y.value("cod_loc"));
        assert_eq!(x.value("cod_time"), y.value("cod_time"));
        assert_eq!(x.value("cod_sub"), y.value("cod_sub"));
        assert_eq!(e.store.of_sort(Sort::Person).len(), 2);

        e.say("Mary worked in Paris.").unwrap();
        let paris = e.ctx.current_place.unwrap();
        assert_eq!(e.rec(paris).value("name_ter"), &Value::text("Paris"));
        let again = e.say("In London in 1900.").unwrap();
        assert!(again.net.is_empty());
    }

    #[test]
    fn distinct_surnames_are_distinct_people() {
        let mut e = Env::new();
        e.say("Peter Smith worked.").unwrap();
        e.say("Peter Jones worked.").unwrap();
        e.say("Peter worked.").unwrap();
        assert_eq!(e.store.of_sort(Sort::Person).len(), 2);
    }

    #[test]
    fn pronouns() {
        let mut e = Env::new();
        assert!(matches!(e.say("He worked."), Err(SemError::UnresolvedPronoun(_))));
        e.say("Peter worked.").unwrap();
        let r = e.say("He slept.").unwrap();
        let peter = e.store.of_sort(Sort::Person)[0].code.unwrap();
        assert_eq!(e.rec(r.clauses[0]).value("cod_sub"), &Value::Ref(peter));
        assert!(matches!(e.say("She worked."), Err(SemError::UnresolvedPronoun(_))));
        assert_eq!(resolve_pronoun("every", &e.lex, &e.ctx), Ok(PronounRef::Universal));
        assert_eq!(resolve_pronoun("some", &e.lex, &e.ctx), Ok(PronounRef::Existential));
        let r = e.say("He took his gun.").unwrap();
        let gun = e.rec(e.rec(r.clauses[0]).value("cod_obj").as_ref_code().unwrap());
        assert_eq!(gun.value("cod_owner"), &Value::Ref(peter));
    }

    #[test]
    fn links_and_causes() {
        let mut e = Env::new();
        let r = e.say("Peter shot John because John robbed a bank.").unwrap();
        let (main, sub) = (r.clauses[0], r.clauses[1]);
        assert_eq!(e.rec(main).value("cod_cause"), &Value::Ref(sub));
        let link = e.store.of_sort(Sort::Link)[0].clone();
        assert_eq!(link.value("sem_char"), &Value::text("cause"));
        assert_eq!(link.value("cod_base"), &Value::Ref(main));

        let r = e.say("Peter came to London and John left.").unwrap();
        assert_eq!(r.clauses.len(), 2);
        let and = e.store.of_sort(Sort::Link)[1].clone();
        assert_eq!(and.value("conj"), &Value::text("and"));
        assert!(and.value("sem_char").is_absent());

        let l = link_clauses(Code(1), Code(2), "when", (Sort::Action, Sort::Event));
        assert_eq!(l.value("sem_char"), &Value::text("time"));
    }

    #[test]
    fn clause_routing() {
        let mut e = Env::new();
        let sort_of = |e: &mut Env, s: &str| {
            let r = e.say(s).unwrap();
            e.rec(r.clauses[0]).sort
        };
        assert_eq!(sort_of(&mut e, "Mary told John about the book."), Sort::Message);
        assert_eq!(sort_of(&mut e, "Mary read the book."), Sort::Thought);
        assert_eq!(sort_of(&mut e, "John died."), Sort::Event);
        assert_eq!(sort_of(&mut e, "The book burned."), Sort::Process);
        assert_eq!(sort_of(&mut e, "Mary wrote a book."), Sort::Action);
    }

    #[test]
    fn quantifiers() {
        let mut e = Env::new();
        let r = e.say("Every criminal has a gun.").unwrap();
        assert!(r.net.is_empty());
        let rules: Vec<String> = r.rules.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            rules,
            [
                "does(X, have, sk_have_gun(X)) :- isa(X, criminal).",
                "isa(sk_have_gun(X), gun) :- isa(X, criminal)."
            ]
        );
        let r = e.say("Some man robbed the bank.").unwrap();
        assert_eq!(e.rec(r.clauses[0]).value("sort_act"), &Value::text("possible"));
    }

    #[test]
    fn fragments() {
        let f = split_fragments("In London. Peter worked.\n\n# note\nJohn left.\nMary\nslept.");
        assert_eq!(f, vec![vec!["In London.", "Peter worked."], vec!["John left.", "Mary slept."]]);
    }

    #[test]
    fn partition_and_integrity() {
        let mut e = Env::new();
        let r = e.say("Peter's brother came in.").unwrap();
        let all = r.net.all();
        assert_eq!(all.len(), r.net.len());
        assert!(e.store.check_integrity().is_ok());
        assert!(r.net.mu.iter().any(|c| e.rec(*c).value("typ_rel") == &Value::text("familiar")));
    }
}
