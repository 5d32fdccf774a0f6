//! Controlled-English understanding engine.
//!
//! Sentences are parsed against a table-driven lexicon, turned into a net of
//! typed predicate records, stored in a fact base and queried through a small
//! Horn-clause resolution engine together with a frame knowledge base.

pub mod factbase;
pub mod inference;
pub mod kbase;
pub mod lexicon;
pub mod parser;
pub mod qa;
pub mod record;
pub mod semrep;

pub use lexicon::{
    admissible, load_lexicon, noun_admissible, ActionType, GramCat, Lexicon, LexiconError,
    NounEntry, ParadigmEntry, PrepCode, SemanticCode, Slot, VerbEntry,
};
pub use parser::{
    parse_article_header, parse_sentence, tokenize, ArticleHeader, ArticleKind, NounGroup,
    ParseError, ParseTree, SentenceNode, Token, TokenKind, VerbGroup,
};
pub use record::{Code, Family, PredicateRecord, Role, Sort, Value};
pub use factbase::{FactError, FactStore};
pub use inference::{
    compile_facts, evaluate, evaluate_ground, parse_atom, parse_clauses, parse_program, solve, unify, Atom,
    HornClause, InferenceError, Program, ProofNode, Solutions, Substitution, Term, Truth,
};
pub use kbase::{
    compile_article, ingest_article, ingest_articles, is_primitive_set, minimal_primitive_extension, render,
    Article, DefinitionGraph, KbError, Stage,
};
pub use qa::{answer_logical, answer_simple, parse_question, Answer, Focus, Question, QuestionKind, Session};
pub use semrep::{
    identify_object, represent, represent_noun_group, resolve_pronoun, select_verb_sense, DiscourseContext,
    Identification, Represented, SemError, SemanticNet,
};
