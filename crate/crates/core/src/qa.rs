//! Question answering and the command session.
//!
//! Wh-questions are matched directly against clause records. Yes/no
//! questions are turned into goals and proved over the compiled facts, a
//! fixed set of bridge clauses, the knowledge base and rules from
//! universally quantified sentences.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::factbase::{FactError, FactStore};
use crate::inference::{compile_facts, evaluate, parse_clauses, Atom, HornClause, Program, Term, Truth};
use crate::kbase::{
    compile_article, ingest_articles, minimal_primitive_extension, parse_word_set, primitive_layers, store_article,
    DefinitionGraph,
};
use crate::lexicon::{GramCat, Lexicon};
use crate::parser::{parse_question_tokens, parse_sentence, tokenize, HeadKind, NounGroup, QuestionTree};
use crate::record::{Code, PredicateRecord, Role, Sort, Value};
use crate::semrep::{represent, sort_for_code, split_fragments, DiscourseContext};

pub const DEFAULT_DEPTH: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QaError {
    #[error("unsupported question form: {0}")]
    UnsupportedQuestionForm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Focus {
    Who,
    What,
    Where,
    When,
    Why,
    How,
}

impl Focus {
    fn from_word(w: &str) -> Option<Focus> {
        Some(match w {
            "who" | "whom" => Focus::Who,
            "what" => Focus::What,
            "where" => Focus::Where,
            "when" => Focus::When,
            "why" => Focus::Why,
            "how" => Focus::How,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuestionKind {
    SimpleWh,
    YesNo,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub kind: QuestionKind,
    pub focus: Option<Focus>,
    pub tree: QuestionTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Entities(Vec<(Code, String)>),
    Yes { trace: Vec<String> },
    No,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Entities(es) => {
                let names: Vec<&str> = es.iter().map(|(_, n)| n.as_str()).collect();
                f.write_str(&names.join(", "))
            }
            Answer::Yes { .. } => f.write_str("yes"),
            Answer::No => f.write_str("no"),
            Answer::Unknown => f.write_str("unknown"),
        }
    }
}

pub fn parse_question(text: &str, lexicon: &Lexicon) -> Result<Question, QaError> {
    let unsupported = || QaError::UnsupportedQuestionForm(text.trim().to_string());
    if !text.trim_end().ends_with('?') {
        return Err(unsupported());
    }
    let tree = parse_question_tokens(&tokenize(text), lexicon).map_err(|_| unsupported())?;
    let focus = match &tree.wh {
        Some(w) => Some(Focus::from_word(w).ok_or_else(unsupported)?),
        None => None,
    };
    let kind = if focus.is_some() {
        QuestionKind::SimpleWh
    } else {
        QuestionKind::YesNo
    };
    if kind == QuestionKind::YesNo && (tree.aux.is_none() || tree.subject.is_none()) {
        return Err(unsupported());
    }
    Ok(Question { kind, focus, tree })
}

fn text_values(rec: &PredicateRecord) -> impl Iterator<Item = &str> {
    rec.present().filter_map(|(_, v)| v.as_text())
}

fn is_proper(rec: &PredicateRecord) -> bool {
    [
        "first_name",
        "second_name",
        "name_org",
        "name_ter",
        "name_loc",
        "name_constr",
        "name_room",
        "year",
        "day_week",
    ]
    .iter()
    .any(|s| !rec.value(s).is_absent())
        || (rec.sort == Sort::Animal && !rec.value("name").is_absent())
}

/// Human-readable name of a stored record.
pub fn render_entity(store: &FactStore, code: Code) -> String {
    let Some(rec) = store.get(code) else {
        return code.to_string();
    };
    let text = |s: &str| rec.value(s).as_text().map(str::to_string);
    let joined = |slots: &[&str]| {
        let parts: Vec<String> = slots.iter().filter_map(|s| text(s)).collect();
        (!parts.is_empty()).then(|| parts.join(" "))
    };
    let name = match rec.sort {
        Sort::Person => joined(&["first_name", "second_name"]).or_else(|| text("prof")),
        Sort::Organization => text("name_org").or_else(|| text("typ_org")),
        Sort::Thing | Sort::Machine | Sort::Property => text("name"),
        Sort::Animal => text("name").or_else(|| text("typ_an")),
        Sort::Nature => text("name").or_else(|| text("typ_nat")),
        Sort::Abstr => text("concept"),
        Sort::Place => ["name_ter", "name_loc", "name_constr", "name_room", "constr", "locat", "fin_locat", "ter_entity"]
            .iter()
            .find_map(|s| text(s)),
        Sort::Time => match rec.value("year") {
            Value::Int(y) => Some(y.to_string()),
            _ => ["day_week", "part_day", "season", "month", "holyday"].iter().find_map(|s| text(s)),
        },
        _ => None,
    };
    name.unwrap_or_else(|| code.to_string())
}

fn verb_form(lexicon: &Lexicon, base: &str, synt: &str) -> String {
    lexicon
        .paradigms()
        .iter()
        .find(|p| p.gram_cat == GramCat::Verb && p.osn_form == base && p.synt_char == synt)
        .map(|p| p.paradigm.clone())
        .unwrap_or_else(|| base.to_string())
}

/// `John robbed the bank` for a clause record.
pub fn render_clause(store: &FactStore, lexicon: &Lexicon, code: Code) -> String {
    let Some(rec) = store.get(code) else {
        return code.to_string();
    };
    let phrase = |c: Code| {
        let name = render_entity(store, c);
        match store.get(c) {
            Some(r) if !is_proper(r) && !name.starts_with('#') => format!("the {name}"),
            _ => name,
        }
    };
    let mut parts = Vec::new();
    if let Some(s) = rec.sort.role_slot(Role::Subject).and_then(|s| rec.value(s).as_ref_code()) {
        parts.push(phrase(s));
    }
    let word = rec.value("word").as_text().unwrap_or("do");
    let (base, particle) = match word.split_once('_') {
        Some((b, p)) => (b, Some(p)),
        None => (word, None),
    };
    let past = rec.value("tense").as_text() != Some("present");
    let mut verb = if past {
        verb_form(lexicon, base, "past")
    } else {
        base.to_string()
    };
    if rec.value(rec.sort.clause_flags().map_or("neg_act", |f| f.1)).as_text() == Some("yes") {
        verb = format!("did not {base}");
    }
    parts.push(verb);
    if let Some(p) = particle {
        parts.push(p.to_string());
    }
    if let Some(o) = rec.sort.role_slot(Role::Object).and_then(|s| rec.value(s).as_ref_code()) {
        parts.push(phrase(o));
    }
    parts.join(" ")
}

/// Stored records a question noun group can denote.
fn candidates(ng: &NounGroup, store: &FactStore, lexicon: &Lexicon) -> BTreeSet<Code> {
    let mut out = BTreeSet::new();
    match ng.head_kind {
        HeadKind::Numeral => {
            if let Ok(y) = ng.head.parse::<i64>() {
                out.extend(
                    store
                        .of_sort(Sort::Time)
                        .into_iter()
                        .filter(|r| r.value("year") == &Value::Int(y))
                        .filter_map(|r| r.code),
                );
            }
        }
        HeadKind::Pronoun => {}
        HeadKind::Proper | HeadKind::Common => {
            let Some(entry) = lexicon.noun(&ng.head_base) else {
                return out;
            };
            let sort = sort_for_code(entry.sem_cod);
            let names: Vec<String> = if ng.head_kind == HeadKind::Proper {
                ng.attributes
                    .iter()
                    .chain(std::iter::once(&ng.head))
                    .map(|s| s.to_lowercase())
                    .collect()
            } else {
                vec![entry.osn_form.clone()]
            };
            let sex = match (ng.head_kind, entry.maj_class.as_str()) {
                (HeadKind::Common, "male") => Some("m"),
                (HeadKind::Common, "female") => Some("f"),
                _ => None,
            };
            for rec in store.of_sort(sort) {
                if rec.kb {
                    continue;
                }
                let vals: Vec<String> = text_values(rec).map(str::to_lowercase).collect();
                let ok = match sex {
                    Some(s) => rec.value("sex").as_text() == Some(s),
                    None => names.iter().all(|n| vals.contains(n)),
                };
                if ok {
                    out.extend(rec.code);
                }
            }
        }
    }
    out
}

fn word_matches(rec: &PredicateRecord, q: &QuestionTree) -> bool {
    let want = match &q.verb.particle {
        Some(p) => format!("{}_{p}", q.verb.head),
        None => q.verb.head.clone(),
    };
    rec.value("word").as_text() == Some(want.as_str())
}

fn negated(rec: &PredicateRecord) -> bool {
    rec.sort
        .clause_flags()
        .is_some_and(|(_, neg, _)| rec.value(neg).as_text() == Some("yes"))
}

fn place_like(store: &FactStore, c: Code) -> bool {
    store.get(c).is_some_and(|r| r.sort == Sort::Place)
}

/// Codes filling the focus of `q` in clause record `rec`.
fn focus_fillers(rec: &PredicateRecord, q: &Question, store: &FactStore) -> Vec<Code> {
    let sort = rec.sort;
    let get = |role: Role| sort.role_slot(role).and_then(|s| rec.value(s).as_ref_code());
    let subject_hole = q.tree.subject.is_none();
    match q.focus.expect("wh question") {
        Focus::Who | Focus::What if subject_hole => get(Role::Subject).into_iter().collect(),
        Focus::Who if sort == Sort::Message => get(Role::To).or_else(|| get(Role::Object)).into_iter().collect(),
        Focus::Who | Focus::What => get(Role::Object).into_iter().collect(),
        Focus::Where => get(Role::To)
            .filter(|c| place_like(store, *c))
            .or_else(|| get(Role::Place))
            .into_iter()
            .collect(),
        Focus::When => get(Role::Time).into_iter().collect(),
        Focus::How => get(Role::Way).into_iter().collect(),
        Focus::Why => {
            let mut out: Vec<Code> = get(Role::Cause).into_iter().collect();
            for link in store.of_sort(Sort::Link) {
                if link.value("cod_base") == &Value::Ref(rec.code.expect("stored"))
                    && link.value("sem_char").as_text() == Some("cause")
                {
                    out.extend(link.value("cod_sub").as_ref_code());
                }
            }
            out
        }
    }
}

pub fn answer_simple(q: &Question, store: &FactStore, lexicon: &Lexicon) -> Answer {
    let subject = q.tree.subject.as_ref().map(|ng| candidates(ng, store, lexicon));
    let objects: Vec<BTreeSet<Code>> = q.tree.objects.iter().map(|(_, ng)| candidates(ng, store, lexicon)).collect();
    let mut found: Vec<Code> = Vec::new();
    for rec in store.records() {
        if !rec.sort.is_clause() || rec.kb || negated(rec) || !word_matches(rec, &q.tree) {
            continue;
        }
        let subject_slot = rec.sort.role_slot(Role::Subject).expect("clause subject");
        if let Some(c) = &subject {
            if !rec.value(subject_slot).as_ref_code().is_some_and(|s| c.contains(&s)) {
                continue;
            }
        }
        let refs: Vec<Code> = rec
            .present()
            .filter(|(s, _)| *s != subject_slot)
            .filter_map(|(_, v)| v.as_ref_code())
            .collect();
        if !objects.iter().all(|c| refs.iter().any(|r| c.contains(r))) {
            continue;
        }
        for c in focus_fillers(rec, q, store) {
            if !found.contains(&c) {
                found.push(c);
            }
        }
    }
    if found.is_empty() {
        return Answer::Unknown;
    }
    Answer::Entities(
        found
            .into_iter()
            .map(|c| {
                let text = match store.get(c) {
                    Some(r) if r.sort.is_clause() => render_clause(store, lexicon, c),
                    _ => render_entity(store, c),
                };
                (c, text)
            })
            .collect(),
    )
}

/// Clauses connecting compiled record atoms to the question vocabulary.
pub const BRIDGE: &str = "\
kind(X, person) :- person(X).
kind(X, N) :- person(X), prof(X, N).
kind(X, N) :- organization(X), typ_org(X, N).
kind(X, N) :- thing(X), name(X, N).
kind(X, N) :- machine(X), name(X, N).
kind(X, N) :- animal(X), typ_an(X, N).
kind(X, N) :- nature(X), typ_nat(X, N).
kind(X, N) :- abstr(X), concept(X, N).
isa(X, N) :- kind(X, N).
isa(S, N) :- event(E), word(E, be), neg_evt(E, no), cod_sub(E, S), cod_obj(E, O), kind(O, N).
named(X, N) :- first_name(X, N).
named(X, N) :- second_name(X, N).
named(X, N) :- name_org(X, N).
named(X, N) :- name_ter(X, N).
named(X, N) :- name(X, N).
does(S, V, O) :- action(A), word(A, V), neg_act(A, no), cod_sub(A, S), cod_obj(A, O).
does(S, V, O) :- thought(A), word(A, V), neg_th(A, no), cod_sub(A, S), cod_obj(A, O).
does(S, V, O) :- message(A), word(A, V), neg_ms(A, no), cod_sub(A, S), theme(A, O).
does(S, V, O) :- message(A), word(A, V), neg_ms(A, no), cod_sub(A, S), cod_adr(A, O).
acts(S, V) :- action(A), word(A, V), neg_act(A, no), cod_sub(A, S).
acts(S, V) :- event(A), word(A, V), neg_evt(A, no), cod_sub(A, S).
has(S, O) :- does(S, have, O).
";

pub fn bridge_clauses() -> Vec<HornClause> {
    parse_clauses(BRIDGE).expect("bridge clauses parse")
}

fn sym(s: &str) -> Term {
    Term::sym(&s.to_lowercase())
}

/// Goal atoms constraining `var` to the entity a noun group names.
fn entity_goals(ng: &NounGroup, var: &Term) -> Vec<Atom> {
    match ng.head_kind {
        HeadKind::Proper => ng
            .attributes
            .iter()
            .chain(std::iter::once(&ng.head))
            .map(|n| Atom::new("named", vec![var.clone(), sym(n)]))
            .collect(),
        HeadKind::Numeral => vec![Atom::new("year", vec![var.clone(), Term::sym(&ng.head)])],
        _ => vec![Atom::new("isa", vec![var.clone(), sym(&ng.head_base)])],
    }
}

/// Goals for a yes/no question.
pub fn question_goals(q: &Question) -> Result<Vec<Atom>, QaError> {
    let t = &q.tree;
    let unsupported = || QaError::UnsupportedQuestionForm(format!("{t:?}"));
    let subject = t.subject.as_ref().ok_or_else(unsupported)?;
    let s = Term::var("S");
    let o = Term::var("O");
    let mut goals = entity_goals(subject, &s);
    let direct = t.objects.iter().find(|(p, _)| p.is_none()).map(|(_, ng)| ng);
    let verb = match &t.verb.particle {
        Some(p) => format!("{}_{p}", t.verb.head),
        None => t.verb.head.clone(),
    };
    if t.aux.as_deref() == Some("can") {
        let obj = direct.map_or_else(|| Term::sym("none"), |ng| sym(&ng.head_base));
        goals.push(Atom::new("can", vec![s, Term::sym(&verb), obj]));
        return Ok(goals);
    }
    match (verb.as_str(), direct) {
        ("be", Some(ng)) => goals.push(Atom::new("isa", vec![s, sym(&ng.head_base)])),
        ("be", None) => return Err(unsupported()),
        ("have", Some(ng)) => {
            goals.push(Atom::new("has", vec![s, o.clone()]));
            goals.extend(entity_goals(ng, &o));
        }
        (_, Some(ng)) => {
            goals.push(Atom::new("does", vec![s, Term::sym(&verb), o.clone()]));
            goals.extend(entity_goals(ng, &o));
        }
        (_, None) => goals.push(Atom::new("acts", vec![s, Term::sym(&verb)])),
    }
    Ok(goals)
}

/// Facts, bridge clauses and `kb` in one program.
pub fn build_program(store: &FactStore, kb: &[HornClause]) -> Program {
    let mut p = Program::from_clauses(bridge_clauses());
    p.extend(kb.iter().cloned());
    for atom in compile_facts(store) {
        p.add_fact(atom);
    }
    p
}

pub fn answer_logical(q: &Question, program: &Program, depth_limit: usize) -> Result<Answer, QaError> {
    let goals = question_goals(q)?;
    let (truth, sols) = evaluate(&goals, program, depth_limit.max(1)).expect("positive depth");
    Ok(match truth {
        Truth::True => {
            let proof = &sols.answers[0].proofs;
            let mut used: Vec<usize> = proof.iter().flat_map(|p| p.clauses_used()).collect();
            used.sort_unstable();
            used.dedup();
            let trace = used.iter().map(|&i| program.clauses()[i].to_string()).collect();
            Answer::Yes { trace }
        }
        Truth::False => Answer::No,
        Truth::Unknown => Answer::Unknown,
    })
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Store(#[from] FactError),
    #[error("{0}")]
    Rules(String),
}

/// Output of one command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub quit: bool,
    /// The input could not be parsed or represented.
    pub input_error: bool,
}

impl Outcome {
    fn line(s: impl Into<String>) -> Outcome {
        Outcome {
            lines: vec![s.into()],
            ..Outcome::default()
        }
    }

    fn input_error(s: impl Into<String>) -> Outcome {
        Outcome {
            lines: vec![s.into()],
            input_error: true,
            quit: false,
        }
    }
}

/// Engine state behind the command interface.
pub struct Session {
    pub lexicon: Lexicon,
    pub store: FactStore,
    pub ctx: DiscourseContext,
    /// Compiled knowledge-base clauses.
    pub kb: Vec<HornClause>,
    /// Rules from universally quantified sentences.
    pub rules: Vec<HornClause>,
    pub depth: usize,
    pub trace: bool,
    facts_path: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, SessionError> {
    std::fs::read_to_string(path).map_err(|e| SessionError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn rules_path(facts: &Path) -> PathBuf {
    let mut s = facts.as_os_str().to_owned();
    s.push(".rules");
    PathBuf::from(s)
}

impl Session {
    pub fn new(lexicon: Lexicon) -> Session {
        Session {
            lexicon,
            store: FactStore::new(),
            ctx: DiscourseContext::new(),
            kb: Vec::new(),
            rules: Vec::new(),
            depth: DEFAULT_DEPTH,
            trace: false,
            facts_path: None,
        }
    }

    /// Binds the session to a facts file, loading it (and its rules file)
    /// when present.
    pub fn open_facts(&mut self, path: impl Into<PathBuf>) -> Result<(), SessionError> {
        let path = path.into();
        if path.exists() {
            self.store = FactStore::load(&path)?;
            let rp = rules_path(&path);
            if rp.exists() {
                self.rules = parse_clauses(&read(&rp)?).map_err(|e| SessionError::Rules(e.to_string()))?;
            }
        }
        self.facts_path = Some(path);
        Ok(())
    }

    /// Loads every `*.kb` file of a directory in name order.
    pub fn load_kb_dir(&mut self, dir: &Path) -> Result<Vec<String>, SessionError> {
        let entries = std::fs::read_dir(dir).map_err(|e| SessionError::Io {
            path: dir.display().to_string(),
            reason: e.to_string(),
        })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "kb"))
            .collect();
        files.sort();
        let mut lines = Vec::new();
        for f in files {
            lines.extend(self.kb_file(&f).lines);
        }
        Ok(lines)
    }

    pub fn program(&self) -> Program {
        let mut kb = self.kb.clone();
        kb.extend(self.rules.iter().cloned());
        build_program(&self.store, &kb)
    }

    /// Represents every sentence of a text; a blank line starts a new
    /// fragment.
    pub fn ingest_text(&mut self, text: &str) -> Outcome {
        let mut out = Outcome::default();
        let before = self.store.len();
        let mut count = 0;
        for fragment in split_fragments(text) {
            self.ctx.begin_fragment();
            for sentence in fragment {
                match self.ingest_sentence(&sentence) {
                    Ok(()) => count += 1,
                    Err(msg) => {
                        out.lines.push(format!("error: {sentence} {msg}"));
                        out.input_error = true;
                    }
                }
            }
        }
        out.lines.push(format!(
            "ingested {count} sentences, {} records",
            self.store.len() - before
        ));
        out
    }

    fn ingest_sentence(&mut self, sentence: &str) -> Result<(), String> {
        let tree = parse_sentence(&tokenize(sentence), &self.lexicon).map_err(|e| format!("({e})"))?;
        let r = represent(&tree, &mut self.ctx, &self.lexicon, &mut self.store).map_err(|e| format!("({e})"))?;
        for rule in r.rules {
            if !self.rules.contains(&rule) {
                self.rules.push(rule);
            }
        }
        Ok(())
    }

    pub fn ask(&self, text: &str) -> Outcome {
        let q = match parse_question(text, &self.lexicon) {
            Ok(q) => q,
            Err(e) => return Outcome::input_error(format!("error: {e}")),
        };
        let answer = match q.kind {
            QuestionKind::SimpleWh => answer_simple(&q, &self.store, &self.lexicon),
            QuestionKind::YesNo => match answer_logical(&q, &self.program(), self.depth) {
                Ok(a) => a,
                Err(e) => return Outcome::input_error(format!("error: {e}")),
            },
        };
        let mut out = Outcome::line(answer.to_string());
        if let (true, Answer::Yes { trace }) = (self.trace, &answer) {
            out.lines.extend(trace.iter().map(|c| format!("  by {c}")));
        }
        out
    }

    pub fn kb_text(&mut self, text: &str) -> Outcome {
        let articles = match ingest_articles(text, &self.lexicon) {
            Ok(a) => a,
            Err(e) => return Outcome::input_error(format!("error: {e}")),
        };
        let mut clauses = Vec::new();
        let mut work = self.store.clone();
        for a in &articles {
            match compile_article(a, &self.lexicon)
                .and_then(|c| store_article(a, &self.lexicon, &mut work).map(|_| c))
            {
                Ok(c) => clauses.extend(c),
                Err(e) => return Outcome::input_error(format!("error: {e}")),
            }
        }
        self.store = work;
        let n = clauses.len();
        self.kb.extend(clauses);
        Outcome::line(format!("loaded {} articles, {n} clauses", articles.len()))
    }

    fn kb_file(&mut self, path: &Path) -> Outcome {
        match read(path) {
            Ok(text) => self.kb_text(&text),
            Err(e) => Outcome::input_error(format!("error: {e}")),
        }
    }

    pub fn primitives(&self, defs: &str, s0: &str) -> Outcome {
        let g = match DefinitionGraph::parse(defs) {
            Ok(g) => g,
            Err(e) => return Outcome::input_error(format!("error: {e}")),
        };
        let s0 = parse_word_set(s0);
        match primitive_layers(&g, &s0) {
            Ok(Some(n)) => Outcome::line(format!("yes: layers {n}")),
            Ok(None) | Err(_) => {
                let missing: Vec<String> = minimal_primitive_extension(&g, &s0).into_iter().collect();
                Outcome::line(format!("no: add {}", missing.join(" ")))
            }
        }
    }

    pub fn dump(&self) -> Outcome {
        Outcome {
            lines: self.store.dump().lines().map(str::to_string).collect(),
            ..Outcome::default()
        }
    }

    pub fn save(&self) -> Result<Outcome, SessionError> {
        let Some(path) = &self.facts_path else {
            return Ok(Outcome::line("error: no facts file"));
        };
        self.store.save(path)?;
        let rules: String = self.rules.iter().map(|r| format!("{r}\n")).collect();
        std::fs::write(rules_path(path), rules).map_err(|e| SessionError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(Outcome::line(format!("saved {} records", self.store.len())))
    }

    /// Runs one command line. Lines without a leading `:` are questions
    /// when they end with `?` and sentences otherwise.
    pub fn execute(&mut self, line: &str) -> Outcome {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Outcome::default();
        }
        let (cmd, arg) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let arg = arg.trim();
        let file = |p: &str| read(Path::new(p));
        match cmd {
            ":ingest" => match file(arg) {
                Ok(text) => self.ingest_text(&text),
                Err(e) => Outcome::input_error(format!("error: {e}")),
            },
            ":ask" => self.ask(arg),
            ":dump" => self.dump(),
            ":kb" => self.kb_file(Path::new(arg)),
            ":primitives" => {
                let parts: Vec<&str> = arg.split_whitespace().collect();
                let [d, s] = parts.as_slice() else {
                    return Outcome::input_error("error: usage :primitives <defs> <s0>");
                };
                match (file(d), file(s)) {
                    (Ok(d), Ok(s)) => self.primitives(&d, &s),
                    (Err(e), _) | (_, Err(e)) => Outcome::input_error(format!("error: {e}")),
                }
            }
            ":save" => self.save().unwrap_or_else(|e| Outcome::line(format!("error: {e}"))),
            ":quit" => Outcome {
                quit: true,
                ..Outcome::default()
            },
            c if c.starts_with(':') => Outcome::input_error(format!("error: unknown command {c}")),
            _ if line.ends_with('?') => self.ask(line),
            _ => self.ingest_text(line),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::fixture_lexicon;

    fn session(text: &str) -> Session {
        let mut s = Session::new(fixture_lexicon());
        let out = s.ingest_text(text);
        assert!(!out.input_error, "{:?}", out.lines);
        s
    }

    fn ask(s: &Session, q: &str) -> String {
        s.ask(q).lines.join("\n")
    }

    #[test]
    fn bridge_uses_real_slots() {
        let clauses = bridge_clauses();
        let heads: BTreeSet<&str> = clauses.iter().map(|c| c.head.pred.as_str()).collect();
        for atom in clauses.iter().flat_map(|c| &c.body) {
            let p = atom.pred.as_str();
            let known = heads.contains(p)
                || (atom.arity() == 1 && Sort::ALL.iter().any(|s| s.as_str() == p))
                || (atom.arity() == 2 && Sort::ALL.iter().any(|s| s.slot_index(p).is_some()));
            assert!(known, "{p}/{} is neither a sort nor a slot", atom.arity());
        }
    }

    #[test]
    fn question_forms() {
        let lex = fixture_lexicon();
        let q = parse_question("Who shot John?", &lex).unwrap();
        assert_eq!((q.kind, q.focus), (QuestionKind::SimpleWh, Some(Focus::Who)));
        assert!(q.tree.subject.is_none());
        let q = parse_question("Does John have a weapon?", &lex).unwrap();
        assert_eq!(q.kind, QuestionKind::YesNo);
        assert_eq!(
            question_goals(&q).unwrap().iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            ["named(S, john)", "has(S, O)", "isa(O, weapon)"]
        );
        assert!(matches!(parse_question("Why?", &lex), Err(QaError::UnsupportedQuestionForm(_))));
        assert!(parse_question("Peter shot John.", &lex).is_err());
    }

    #[test]
    fn simple_answers() {
        let s = session("In London in 1900.\nPeter Smith shot John with a pistol because John robbed a bank.");
        assert_eq!(ask(&s, "Who shot John?"), "Peter Smith");
        assert_eq!(ask(&s, "Whom did Peter shoot?"), "John");
        assert_eq!(ask(&s, "Where did Peter shoot John?"), "London");
        assert_eq!(ask(&s, "When did Peter shoot John?"), "1900");
        assert_eq!(ask(&s, "How did Peter shoot John?"), "pistol");
        assert_eq!(ask(&s, "Why did Peter shoot John?"), "John robbed the bank");
        assert_eq!(ask(&s, "Who saw Mary?"), "unknown");
    }

    #[test]
    fn unknown_before_ingest() {
        let s = Session::new(fixture_lexicon());
        assert_eq!(ask(&s, "Who shot John?"), "unknown");
    }

    #[test]
    fn pistol_needs_the_kb() {
        let mut s = session("John has a pistol.");
        assert_eq!(ask(&s, "Does John have a weapon?"), "no");
        s.kb_text("frame is a pistol\na pistol is a weapon which is kept in hand\n");
        s.trace = true;
        let out = ask(&s, "Does John have a weapon?");
        assert!(out.starts_with("yes"));
        assert!(out.contains("isa(X, weapon) :- isa(X, pistol)."));
        s.depth = 1;
        s.trace = false;
        assert_eq!(ask(&s, "Does John have a weapon?"), "unknown");
    }

    #[test]
    fn be_links_and_capabilities() {
        let mut s = session("Ann Brown is a doctor.");
        s.kb_text("frame is a doctor\ndoctor examines a person\n");
        assert_eq!(ask(&s, "Is Ann Brown a doctor?"), "yes");
        assert_eq!(ask(&s, "Is Ann Brown a person?"), "yes");
        assert_eq!(ask(&s, "Can Ann Brown examine a person?"), "yes");
        assert_eq!(ask(&s, "Can Ann Brown prescribe a medicine?"), "no");
    }

    #[test]
    fn universal_rules() {
        let mut s = session("Every criminal has a gun.\nTom is a criminal.");
        s.kb_text("frame is a gun\n");
        assert_eq!(ask(&s, "Does Tom have a gun?"), "yes");
        assert_eq!(ask(&s, "Does Tom have a weapon?"), "yes");
        assert_eq!(ask(&s, "Does Mary have a gun?"), "no");
    }

    #[test]
    fn commands() {
        let mut s = Session::new(fixture_lexicon());
        assert_eq!(s.execute(":ask Who shot John?").lines, ["unknown"]);
        assert!(s.execute(":bogus").input_error);
        assert!(s.execute(":quit").quit);
        let out = s.execute("Peter worked.");
        assert_eq!(out.lines, ["ingested 1 sentences, 2 records"]);
        assert_eq!(s.execute(":dump").lines.len(), 2);
        assert_eq!(s.primitives("b: a\nc: b\n", "a").lines, ["yes: layers 2"]);
        assert_eq!(s.primitives("b: a\nc: b\n", "").lines, ["no: add a"]);
        assert!(s.execute("Peter plays physic.").input_error);
    }

    #[test]
    fn save_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("facts.net");
        let mut s = session("Every criminal has a gun.\nPeter worked.");
        s.facts_path = Some(path.clone());
        s.save().unwrap();
        let mut t = Session::new(fixture_lexicon());
        t.open_facts(&path).unwrap();
        assert_eq!(t.store.dump(), s.store.dump());
        assert_eq!(t.rules, s.rules);
    }
}
