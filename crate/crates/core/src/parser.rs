//! Tokenizer and recursive-descent parser for controlled English.
//!
//! The grammar is documented in `docs/grammar.bnf`. Prepositional phrases
//! attach to the verb unless the head noun licenses the combination in its
//! `combin` list and no verb sense does.

use std::fmt;

use thiserror::Error;

use crate::lexicon::{GramCat, Lexicon, ParadigmEntry, SemanticCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    /// Character offset into the source text.
    pub position: usize,
}

impl Token {
    fn lower(&self) -> String {
        self.surface.to_lowercase()
    }

    fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.surface == p
    }

    fn is_terminator(&self) -> bool {
        self.is_punct(".") || self.is_punct("?")
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_'
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let surface: String = chars[start..i].iter().collect();
            let kind = if surface.chars().all(|c| c.is_ascii_digit()) {
                TokenKind::Number
            } else {
                TokenKind::Word
            };
            tokens.push(Token {
                surface,
                kind,
                position: start,
            });
        } else if c == '\''
            && matches!(chars.get(i + 1), Some('s' | 'S'))
            && !chars.get(i + 2).copied().is_some_and(is_word_char)
            && i > 0
            && is_word_char(chars[i - 1])
        {
            tokens.push(Token {
                surface: chars[i..i + 2].iter().collect(),
                kind: TokenKind::Word,
                position: i,
            });
            i += 2;
        } else {
            tokens.push(Token {
                surface: c.to_string(),
                kind: TokenKind::Punctuation,
                position: i,
            });
            i += 1;
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown word `{surface}` at {position}")]
    UnknownWord { surface: String, position: usize },
    #[error("syntax error at {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("not an article header (expected `frame is ...`)")]
    NotAnArticleHeader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Article {
    Definite,
    Indefinite,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrammaticalNumber {
    Singular,
    Plural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    Common,
    Proper,
    Pronoun,
    Numeral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounGroup {
    pub article: Article,
    /// Surface of the article, quantifier or possessive/demonstrative pronoun.
    pub determiner: Option<String>,
    /// `Peter's` in `Peter's gun`.
    pub possessor: Option<Box<NounGroup>>,
    pub attributes: Vec<String>,
    pub head: String,
    pub head_base: String,
    pub head_kind: HeadKind,
    pub number: GrammaticalNumber,
    pub postmods: Vec<(String, NounGroup)>,
}

impl NounGroup {
    pub fn head_lower(&self) -> String {
        self.head.to_lowercase()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tense {
    Past,
    Present,
    Future,
}

impl Tense {
    pub fn as_str(self) -> &'static str {
        match self {
            Tense::Past => "past",
            Tense::Present => "present",
            Tense::Future => "future",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aspect {
    Complete,
    Incomplete,
}

impl Aspect {
    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Complete => "complete",
            Aspect::Incomplete => "incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbGroup {
    pub aux: Option<String>,
    pub negated: bool,
    pub tense: Tense,
    pub aspect: Aspect,
    pub adverb: Option<String>,
    /// The adverb closes the clause instead of preceding the verb.
    pub adverb_final: bool,
    pub head: String,
    pub form: String,
    pub particle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub fronted: Vec<(String, NounGroup)>,
    pub subject: NounGroup,
    pub verb: VerbGroup,
    pub objects: Vec<(Option<String>, NounGroup)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SentenceNode {
    Simple(Clause),
    Compound {
        parts: Vec<SentenceNode>,
        conjunctions: Vec<String>,
    },
    Complex {
        main: Box<SentenceNode>,
        subordinate: Vec<(String, SentenceNode)>,
    },
    /// Place/time adverbials without a verb (`In London in 1900.`).
    Setting(Vec<(String, NounGroup)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub root: SentenceNode,
    pub terminator: String,
}

pub const COORDINATORS: &[&str] = &["and", "but", "or"];
pub const SUBORDINATORS: &[&str] = &["when", "because", "if", "that", "while"];
const DO_AUX: &[&str] = &["do", "does", "did"];
const BE_AUX: &[&str] = &["am", "is", "are", "was", "were"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArticleKind {
    Noun,
    Verb,
    Operation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleHeader {
    pub concept: String,
    pub kind: ArticleKind,
}

pub fn parse_article_header(tokens: &[Token]) -> Result<ArticleHeader, ParseError> {
    let words: Vec<String> = tokens
        .iter()
        .filter(|t| !t.is_terminator())
        .map(Token::lower)
        .collect();
    if words.len() < 3 || words[0] != "frame" || words[1] != "is" {
        return Err(ParseError::NotAnArticleHeader);
    }
    let rest = &words[2..];
    let (kind, concept) = match rest {
        [how, to, tail @ ..] if how == "how" && to == "to" && !tail.is_empty() => {
            (ArticleKind::Operation, tail)
        }
        [to, tail @ ..] if to == "to" && !tail.is_empty() => (ArticleKind::Verb, tail),
        [art, tail @ ..] if matches!(art.as_str(), "a" | "an" | "the") && !tail.is_empty() => {
            (ArticleKind::Noun, tail)
        }
        tail => (ArticleKind::Noun, tail),
    };
    Ok(ArticleHeader {
        concept: concept.join(" "),
        kind,
    })
}

pub fn parse_sentence(tokens: &[Token], lexicon: &Lexicon) -> Result<ParseTree, ParseError> {
    let mut p = Parser::new(tokens, lexicon)?;
    let root = if p.peek_cat(GramCat::Preposition) && p.is_setting() {
        let pps = p.fronted_pps()?;
        SentenceNode::Setting(pps)
    } else {
        p.clause_sequence()?
    };
    let terminator = p.expect_terminator()?;
    Ok(ParseTree { root, terminator })
}

/// A question split into its wh-word, fronted auxiliary and clause body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionTree {
    pub wh: Option<String>,
    pub aux: Option<String>,
    /// `None` when the wh-word itself is the subject (`Who shot John?`).
    pub subject: Option<NounGroup>,
    pub verb: VerbGroup,
    pub objects: Vec<(Option<String>, NounGroup)>,
}

pub const WH_WORDS: &[&str] = &["who", "whom", "what", "where", "when", "why", "how"];

pub fn parse_question_tokens(
    tokens: &[Token],
    lexicon: &Lexicon,
) -> Result<QuestionTree, ParseError> {
    let mut p = Parser::new(tokens, lexicon)?;
    let wh = match p.peek_lower() {
        Some(w) if WH_WORDS.contains(&w.as_str()) => {
            p.pos += 1;
            Some(w)
        }
        _ => None,
    };
    let fronted_aux = match p.peek_lower() {
        Some(w)
            if (DO_AUX.contains(&w.as_str()) || BE_AUX.contains(&w.as_str()) || w == "can")
                && (wh.is_none() || p.starts_noun_group_at(p.pos + 1)) =>
        {
            p.pos += 1;
            Some(w)
        }
        _ => None,
    };
    let (subject, verb) = match fronted_aux.clone() {
        Some(aux) => {
            let subject = p.noun_group(None)?;
            let is_be = BE_AUX.contains(&aux.as_str());
            let verb = if is_be && !p.peek_verb_form() {
                // Copular question: `Is Peter a doctor?`
                let entry = p.lex.surface_as(&aux, GramCat::Verb).cloned();
                VerbGroup {
                    aux: None,
                    negated: false,
                    tense: entry.as_ref().map(tense_of).unwrap_or(Tense::Present),
                    aspect: Aspect::Complete,
                    adverb: None,
                    adverb_final: false,
                    head: entry.map(|e| e.osn_form).unwrap_or_else(|| "be".into()),
                    form: aux.clone(),
                    particle: None,
                }
            } else {
                let mut vg = p.verb_group()?;
                vg.tense = match aux.as_str() {
                    "did" | "was" | "were" => Tense::Past,
                    _ => Tense::Present,
                };
                vg.aux = Some(aux.clone());
                vg
            };
            (Some(subject), verb)
        }
        None if wh.is_some() => (None, p.verb_group()?),
        None => {
            return Err(ParseError::SyntaxError {
                position: p.position(),
                expected: "wh-word or auxiliary".into(),
            })
        }
    };
    let objects = p.objects(&verb)?;
    let mut verb = verb;
    p.final_adverb(&mut verb);
    p.expect_terminator()?;
    Ok(QuestionTree {
        wh,
        aux: fronted_aux,
        subject,
        verb,
        objects,
    })
}

fn tense_of(entry: &ParadigmEntry) -> Tense {
    match entry.synt_char.as_str() {
        "past" => Tense::Past,
        _ => Tense::Present,
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    lex: &'a Lexicon,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token], lex: &'a Lexicon) -> Result<Self, ParseError> {
        for t in tokens {
            if t.kind == TokenKind::Word && t.surface != "'s" && lex.lookup_surface(&t.surface).is_empty()
            {
                return Err(ParseError::UnknownWord {
                    surface: t.surface.clone(),
                    position: t.position,
                });
            }
        }
        Ok(Parser { tokens, lex, pos: 0 })
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.position)
            .or_else(|| self.tokens.last().map(|t| t.position + t.surface.chars().count()))
            .unwrap_or(0)
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError {
            position: self.position(),
            expected: expected.to_string(),
        })
    }

    fn tok(&self, i: usize) -> Option<&'a Token> {
        self.tokens.get(i)
    }

    fn peek(&self) -> Option<&'a Token> {
        self.tok(self.pos)
    }

    fn peek_lower(&self) -> Option<String> {
        self.peek().filter(|t| t.kind != TokenKind::Punctuation).map(Token::lower)
    }

    fn cat_at(&self, i: usize, cat: GramCat) -> Option<&'a ParadigmEntry> {
        let t = self.tok(i)?;
        if t.kind != TokenKind::Word {
            return None;
        }
        self.lex.surface_as(&t.surface, cat)
    }

    fn peek_cat(&self, cat: GramCat) -> bool {
        self.cat_at(self.pos, cat).is_some()
    }

    fn at_clause_end(&self, i: usize) -> bool {
        match self.tok(i) {
            None => true,
            Some(t) if t.kind == TokenKind::Punctuation => true,
            Some(t) => {
                let w = t.lower();
                COORDINATORS.contains(&w.as_str()) || SUBORDINATORS.contains(&w.as_str())
            }
        }
    }

    fn expect_terminator(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(t) if t.is_terminator() && self.pos + 1 == self.tokens.len() => {
                self.pos += 1;
                Ok(t.surface.clone())
            }
            _ => self.err("end of sentence"),
        }
    }

    /// A sentence made only of prepositional phrases.
    fn is_setting(&self) -> bool {
        let mut i = self.pos;
        while let Some(t) = self.tok(i) {
            if t.is_terminator() {
                return true;
            }
            if self.cat_at(i, GramCat::Verb).is_some()
                && self.cat_at(i, GramCat::Noun).is_none()
                && self.cat_at(i, GramCat::Adjective).is_none()
            {
                return false;
            }
            i += 1;
        }
        true
    }

    fn fronted_pps(&mut self) -> Result<Vec<(String, NounGroup)>, ParseError> {
        let mut pps = Vec::new();
        while self.peek_cat(GramCat::Preposition) {
            let prep = self.peek_lower().unwrap_or_default();
            self.pos += 1;
            let ng = self.noun_group(None)?;
            pps.push((prep, ng));
            if self.peek().is_some_and(|t| t.is_punct(",")) {
                self.pos += 1;
            }
        }
        Ok(pps)
    }

    fn skip_comma_before_conj(&mut self) {
        if self.peek().is_some_and(|t| t.is_punct(",")) {
            if let Some(next) = self.tok(self.pos + 1) {
                let w = next.lower();
                if COORDINATORS.contains(&w.as_str()) || SUBORDINATORS.contains(&w.as_str()) {
                    self.pos += 1;
                }
            }
        }
    }

    fn clause_sequence(&mut self) -> Result<SentenceNode, ParseError> {
        let mut parts = vec![self.complex()?];
        let mut conjunctions = Vec::new();
        loop {
            self.skip_comma_before_conj();
            match self.peek_lower() {
                Some(w) if COORDINATORS.contains(&w.as_str()) => {
                    self.pos += 1;
                    conjunctions.push(w);
                    parts.push(self.complex()?);
                }
                _ => break,
            }
        }
        if parts.len() == 1 {
            Ok(parts.pop().expect("one part"))
        } else {
            Ok(SentenceNode::Compound {
                parts,
                conjunctions,
            })
        }
    }

    fn complex(&mut self) -> Result<SentenceNode, ParseError> {
        let main = SentenceNode::Simple(self.simple()?);
        let mut subordinate = Vec::new();
        loop {
            self.skip_comma_before_conj();
            match self.peek_lower() {
                Some(w) if SUBORDINATORS.contains(&w.as_str()) => {
                    self.pos += 1;
                    subordinate.push((w, SentenceNode::Simple(self.simple()?)));
                }
                _ => break,
            }
        }
        if subordinate.is_empty() {
            Ok(main)
        } else {
            Ok(SentenceNode::Complex {
                main: Box::new(main),
                subordinate,
            })
        }
    }

    fn simple(&mut self) -> Result<Clause, ParseError> {
        let fronted = self.fronted_pps()?;
        if !self.starts_noun_group_at(self.pos) {
            return self.err("noun group");
        }
        let subject = self.noun_group(None)?;
        let mut verb = self.verb_group()?;
        let objects = self.objects(&verb)?;
        self.final_adverb(&mut verb);
        Ok(Clause {
            fronted,
            subject,
            verb,
            objects,
        })
    }

    fn final_adverb(&mut self, verb: &mut VerbGroup) {
        if verb.adverb.is_none() && self.peek_cat(GramCat::Adverb) && self.at_clause_end(self.pos + 1) {
            verb.adverb = self.peek_lower();
            verb.adverb_final = true;
            self.pos += 1;
        }
    }

    fn objects(&mut self, verb: &VerbGroup) -> Result<Vec<(Option<String>, NounGroup)>, ParseError> {
        let mut objects = Vec::new();
        loop {
            if self.at_clause_end(self.pos) {
                break;
            }
            if self.peek_cat(GramCat::Adverb) && self.at_clause_end(self.pos + 1) {
                break;
            }
            if self.peek_cat(GramCat::Preposition) {
                let prep = self.peek_lower().unwrap_or_default();
                self.pos += 1;
                let ng = self.noun_group(Some(verb))?;
                objects.push((Some(prep), ng));
            } else if self.starts_noun_group_at(self.pos) {
                let ng = self.noun_group(Some(verb))?;
                objects.push((None, ng));
            } else {
                return self.err("noun group, prepositional phrase or end of clause");
            }
        }
        Ok(objects)
    }

    fn is_aux_followed_by_verb(&self, i: usize, aux_set: &[&str]) -> bool {
        let Some(t) = self.tok(i) else { return false };
        if !aux_set.contains(&t.lower().as_str()) {
            return false;
        }
        let mut j = i + 1;
        if self.tok(j).is_some_and(|t| t.lower() == "not") {
            j += 1;
        }
        if self.cat_at(j, GramCat::Adverb).is_some() {
            j += 1;
        }
        self.cat_at(j, GramCat::Verb).is_some()
    }

    fn peek_verb_form(&self) -> bool {
        let mut j = self.pos;
        if self.tok(j).is_some_and(|t| t.lower() == "not") {
            j += 1;
        }
        self.cat_at(j, GramCat::Verb).is_some()
    }

    fn verb_group(&mut self) -> Result<VerbGroup, ParseError> {
        let mut aux = None;
        let mut tense = None;
        let mut aspect = Aspect::Complete;
        let mut negated = false;
        if let Some(w) = self.peek_lower() {
            if w == "will" && self.cat_at(self.pos + 1, GramCat::Verb).is_some()
                || w == "will" && self.tok(self.pos + 1).is_some_and(|t| t.lower() == "not")
            {
                aux = Some(w);
                tense = Some(Tense::Future);
                self.pos += 1;
            } else if self.is_aux_followed_by_verb(self.pos, DO_AUX) {
                tense = Some(if w == "did" { Tense::Past } else { Tense::Present });
                aux = Some(w);
                self.pos += 1;
            } else if self.is_aux_followed_by_verb(self.pos, BE_AUX) {
                let j = self.pos + 1 + usize::from(self.tok(self.pos + 1).is_some_and(|t| t.lower() == "not"));
                let progressive = self
                    .cat_at(j, GramCat::Verb)
                    .is_some_and(|e| e.synt_char == "ing");
                if progressive {
                    tense = Some(if matches!(w.as_str(), "was" | "were") {
                        Tense::Past
                    } else {
                        Tense::Present
                    });
                    aspect = Aspect::Incomplete;
                    aux = Some(w);
                    self.pos += 1;
                }
            }
        }
        if aux.is_some() && self.peek_lower().as_deref() == Some("not") {
            negated = true;
            self.pos += 1;
        }
        let mut adverb = None;
        if self.peek_cat(GramCat::Adverb) && self.cat_at(self.pos + 1, GramCat::Verb).is_some() {
            adverb = self.peek_lower();
            self.pos += 1;
        }
        let Some(entry) = self.cat_at(self.pos, GramCat::Verb) else {
            return self.err("verb");
        };
        let form = self.tokens[self.pos].lower();
        self.pos += 1;
        let tense = tense.unwrap_or_else(|| tense_of(entry));
        // `is not`, `was not` with a copular main verb
        if aux.is_none() && entry.osn_form == "be" && self.peek_lower().as_deref() == Some("not") {
            negated = true;
            self.pos += 1;
        }
        let head = entry.osn_form.clone();
        let mut particle = None;
        if let Some(p) = self.cat_at(self.pos, GramCat::Particle) {
            let word = p.paradigm.clone();
            let takes = self
                .lex
                .verb_senses(&head)
                .iter()
                .any(|v| v.after_verb == word);
            if takes && !self.starts_noun_group_at(self.pos + 1) {
                particle = Some(word);
                self.pos += 1;
            }
        }
        Ok(VerbGroup {
            aux,
            negated,
            tense,
            aspect,
            adverb,
            adverb_final: false,
            head,
            form,
            particle,
        })
    }

    fn determiner_pronoun(&self, i: usize) -> Option<&'a ParadigmEntry> {
        let p = self.cat_at(i, GramCat::Pronoun)?;
        let f = &p.synt_char;
        let is_det = f.starts_with("poss") || f.starts_with("dem") || f == "univ" || f == "exist";
        (is_det && self.starts_noun_body_at(i + 1)).then_some(p)
    }

    fn starts_noun_body_at(&self, i: usize) -> bool {
        let Some(t) = self.tok(i) else { return false };
        if t.kind == TokenKind::Number {
            return true;
        }
        self.cat_at(i, GramCat::Noun).is_some()
            || self.cat_at(i, GramCat::Adjective).is_some()
            || self.cat_at(i, GramCat::Numeral).is_some()
    }

    fn starts_noun_group_at(&self, i: usize) -> bool {
        self.cat_at(i, GramCat::Article).is_some()
            || self.cat_at(i, GramCat::Pronoun).is_some()
            || self.starts_noun_body_at(i)
    }

    fn noun_group(&mut self, verb: Option<&VerbGroup>) -> Result<NounGroup, ParseError> {
        let mut ng = self.simple_noun_group()?;
        while self.peek().is_some_and(|t| t.surface == "'s") {
            self.pos += 1;
            let mut owned = self.simple_noun_group()?;
            owned.possessor = Some(Box::new(ng));
            ng = owned;
        }
        if ng.head_kind != HeadKind::Pronoun {
            self.postmods(&mut ng, verb)?;
        }
        Ok(ng)
    }

    fn postmods(&mut self, ng: &mut NounGroup, verb: Option<&VerbGroup>) -> Result<(), ParseError> {
        while let Some(prep) = self.cat_at(self.pos, GramCat::Preposition) {
            let prep = prep.paradigm.clone();
            let save = self.pos;
            self.pos += 1;
            if !self.starts_noun_group_at(self.pos) {
                self.pos = save;
                break;
            }
            // Peek at the inner head without consuming.
            let inner_start = self.pos;
            let inner = self.simple_noun_group()?;
            self.pos = inner_start;
            if !self.attaches_to_noun(ng, &prep, &inner, verb) {
                self.pos = save;
                break;
            }
            let inner = self.noun_group(verb)?;
            ng.postmods.push((prep, inner));
        }
        Ok(())
    }

    fn attaches_to_noun(
        &self,
        ng: &NounGroup,
        prep: &str,
        inner: &NounGroup,
        verb: Option<&VerbGroup>,
    ) -> bool {
        let Some(code) = head_code(self.lex, inner) else {
            return false;
        };
        let noun_ok = self
            .lex
            .noun_senses(&ng.head_base)
            .iter()
            .any(|n| crate::lexicon::noun_admissible(n, prep, code));
        noun_ok && !verb.is_some_and(|v| verb_licenses(self.lex, &v.head, prep, code))
    }

    fn simple_noun_group(&mut self) -> Result<NounGroup, ParseError> {
        let mut article = Article::None;
        let mut determiner = None;
        if let Some(a) = self.cat_at(self.pos, GramCat::Article) {
            article = if a.synt_char == "def" {
                Article::Definite
            } else {
                Article::Indefinite
            };
            determiner = Some(self.tokens[self.pos].surface.clone());
            self.pos += 1;
        } else if let Some(p) = self.determiner_pronoun(self.pos) {
            if p.synt_char.starts_with("poss") || p.synt_char.starts_with("dem") {
                article = Article::Definite;
            }
            determiner = Some(self.tokens[self.pos].surface.clone());
            self.pos += 1;
        } else if let Some(p) = self.cat_at(self.pos, GramCat::Pronoun) {
            let surface = self.tokens[self.pos].surface.clone();
            self.pos += 1;
            let number = if p.synt_char.contains("pl") {
                GrammaticalNumber::Plural
            } else {
                GrammaticalNumber::Singular
            };
            return Ok(NounGroup {
                article,
                determiner,
                possessor: None,
                attributes: Vec::new(),
                head: surface,
                head_base: p.osn_form.clone(),
                head_kind: HeadKind::Pronoun,
                number,
                postmods: Vec::new(),
            });
        }

        let mut attributes = Vec::new();
        loop {
            let Some(t) = self.peek() else {
                return self.err("noun");
            };
            if t.kind == TokenKind::Number {
                if self.starts_noun_body_at(self.pos + 1) && self.tok(self.pos + 1).is_some_and(|n| n.kind != TokenKind::Number) {
                    attributes.push(t.surface.clone());
                    self.pos += 1;
                    continue;
                }
                self.pos += 1;
                return Ok(NounGroup {
                    article,
                    determiner,
                    possessor: None,
                    attributes,
                    head: t.surface.clone(),
                    head_base: t.surface.clone(),
                    head_kind: HeadKind::Numeral,
                    number: GrammaticalNumber::Singular,
                    postmods: Vec::new(),
                });
            }
            let noun = self.cat_at(self.pos, GramCat::Noun);
            let more_follows = self.starts_noun_body_at(self.pos + 1);
            let is_modifier = self.cat_at(self.pos, GramCat::Adjective).is_some()
                || self.cat_at(self.pos, GramCat::Numeral).is_some();
            let proper_chain = noun.is_some_and(|n| n.synt_char == "proper")
                && self
                    .cat_at(self.pos + 1, GramCat::Noun)
                    .is_some_and(|n| n.synt_char == "proper");
            if (is_modifier && more_follows) || proper_chain {
                attributes.push(t.surface.clone());
                self.pos += 1;
                continue;
            }
            let Some(noun) = noun else {
                return self.err("noun");
            };
            self.pos += 1;
            let (head_kind, number) = match noun.synt_char.as_str() {
                "proper" => (HeadKind::Proper, GrammaticalNumber::Singular),
                "pl" => (HeadKind::Common, GrammaticalNumber::Plural),
                _ => (HeadKind::Common, GrammaticalNumber::Singular),
            };
            return Ok(NounGroup {
                article,
                determiner,
                possessor: None,
                attributes,
                head: t.surface.clone(),
                head_base: noun.osn_form.clone(),
                head_kind,
                number,
                postmods: Vec::new(),
            });
        }
    }
}

/// Semantic code of a noun group's head, when the head is a dictionary noun.
pub fn head_code(lex: &Lexicon, ng: &NounGroup) -> Option<SemanticCode> {
    match ng.head_kind {
        HeadKind::Numeral => Some(SemanticCode::Time),
        HeadKind::Pronoun => None,
        _ => lex.noun(&ng.head_base).map(|n| n.sem_cod),
    }
}

/// Whether some sense of the verb takes a `prep`-phrase with the given code,
/// including place and time adverbials.
pub fn verb_licenses(lex: &Lexicon, verb: &str, prep: &str, code: SemanticCode) -> bool {
    if prep == "of" {
        return false;
    }
    if matches!(code, SemanticCode::Place | SemanticCode::Time) {
        return true;
    }
    lex.verb_senses(verb).iter().any(|v| {
        (matches!(prep, "with" | "by") && v.contr_with.contains(&code))
            || v.contr_from.iter().any(|pc| pc.prep == prep && pc.code == code)
            || v.contr_to.iter().any(|pc| pc.prep == prep && pc.code == code)
    })
}

impl fmt::Display for NounGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut words: Vec<String> = Vec::new();
        if let Some(p) = &self.possessor {
            words.push(format!("{p}'s"));
        }
        if let Some(d) = &self.determiner {
            words.push(d.clone());
        }
        words.extend(self.attributes.iter().cloned());
        words.push(self.head.clone());
        for (prep, ng) in &self.postmods {
            words.push(format!("{prep} {ng}"));
        }
        f.write_str(&words.join(" "))
    }
}

impl fmt::Display for VerbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut words: Vec<&str> = Vec::new();
        if let Some(a) = &self.aux {
            words.push(a);
        }
        let not_after_main = self.aux.is_none() && self.negated;
        if self.negated && !not_after_main {
            words.push("not");
        }
        if let (Some(a), false) = (&self.adverb, self.adverb_final) {
            words.push(a);
        }
        words.push(&self.form);
        if not_after_main {
            words.push("not");
        }
        if let Some(p) = &self.particle {
            words.push(p);
        }
        f.write_str(&words.join(" "))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (prep, ng) in &self.fronted {
            write!(f, "{prep} {ng} ")?;
        }
        write!(f, "{} {}", self.subject, self.verb)?;
        for (prep, ng) in &self.objects {
            match prep {
                Some(p) => write!(f, " {p} {ng}")?,
                None => write!(f, " {ng}")?,
            }
        }
        if let (Some(a), true) = (&self.verb.adverb, self.verb.adverb_final) {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for SentenceNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceNode::Simple(c) => write!(f, "{c}"),
            SentenceNode::Compound {
                parts,
                conjunctions,
            } => {
                write!(f, "{}", parts[0])?;
                for (conj, part) in conjunctions.iter().zip(&parts[1..]) {
                    write!(f, " {conj} {part}")?;
                }
                Ok(())
            }
            SentenceNode::Complex { main, subordinate } => {
                write!(f, "{main}")?;
                for (conj, part) in subordinate {
                    write!(f, " {conj} {part}")?;
                }
                Ok(())
            }
            SentenceNode::Setting(pps) => {
                let parts: Vec<String> = pps.iter().map(|(p, ng)| format!("{p} {ng}")).collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self.root.to_string();
        let mut chars = body.chars();
        let first: String = chars.next().map(|c| c.to_uppercase().collect()).unwrap_or_default();
        write!(f, "{first}{}{}", chars.as_str(), self.terminator)
    }
}

impl NounGroup {
    /// `(ng det attr... head[:base] [kind] (pp prep ng)...)`, with the
    /// possessor as `(poss ng)` after the determiner.
    pub fn bracketed(&self) -> String {
        let mut parts = vec!["ng".to_string()];
        if let Some(d) = &self.determiner {
            parts.push(d.to_lowercase());
        }
        if let Some(p) = &self.possessor {
            parts.push(format!("(poss {})", p.bracketed()));
        }
        parts.extend(self.attributes.iter().cloned());
        if self.head.eq_ignore_ascii_case(&self.head_base) {
            parts.push(self.head.clone());
        } else {
            parts.push(format!("{}:{}", self.head, self.head_base));
        }
        match (self.head_kind, self.number) {
            (HeadKind::Common, GrammaticalNumber::Singular) => {}
            (HeadKind::Common, GrammaticalNumber::Plural) => parts.push("pl".into()),
            (HeadKind::Proper, _) => parts.push("proper".into()),
            (HeadKind::Pronoun, _) => parts.push("pron".into()),
            (HeadKind::Numeral, _) => parts.push("num".into()),
        }
        for (prep, ng) in &self.postmods {
            parts.push(format!("(pp {prep} {})", ng.bracketed()));
        }
        format!("({})", parts.join(" "))
    }
}

impl VerbGroup {
    /// `(vg [aux] [not] [adverb] head tense [incomplete] [particle])`.
    pub fn bracketed(&self) -> String {
        let mut parts = vec!["vg".to_string()];
        parts.extend(self.aux.iter().cloned());
        if self.negated {
            parts.push("not".into());
        }
        parts.extend(self.adverb.iter().cloned());
        parts.push(self.head.clone());
        parts.push(self.tense.as_str().into());
        if self.aspect == Aspect::Incomplete {
            parts.push(self.aspect.as_str().into());
        }
        parts.extend(self.particle.iter().map(|p| format!("+{p}")));
        format!("({})", parts.join(" "))
    }
}

fn pp_or_ng(prep: Option<&str>, ng: &NounGroup) -> String {
    match prep {
        Some(p) => format!("(pp {p} {})", ng.bracketed()),
        None => ng.bracketed(),
    }
}

impl SentenceNode {
    pub fn bracketed(&self) -> String {
        match self {
            SentenceNode::Simple(c) => {
                let mut parts = vec!["clause".to_string()];
                parts.extend(c.fronted.iter().map(|(p, ng)| pp_or_ng(Some(p), ng)));
                parts.push(c.subject.bracketed());
                parts.push(c.verb.bracketed());
                parts.extend(c.objects.iter().map(|(p, ng)| pp_or_ng(p.as_deref(), ng)));
                format!("({})", parts.join(" "))
            }
            SentenceNode::Compound { parts, conjunctions } => {
                let mut out = format!("(coord {}", parts[0].bracketed());
                for (conj, part) in conjunctions.iter().zip(&parts[1..]) {
                    out.push_str(&format!(" {conj} {}", part.bracketed()));
                }
                out + ")"
            }
            SentenceNode::Complex { main, subordinate } => {
                let mut out = format!("(complex {}", main.bracketed());
                for (conj, part) in subordinate {
                    out.push_str(&format!(" ({conj} {})", part.bracketed()));
                }
                out + ")"
            }
            SentenceNode::Setting(pps) => {
                let parts: Vec<String> = pps.iter().map(|(p, ng)| pp_or_ng(Some(p), ng)).collect();
                format!("(setting {})", parts.join(" "))
            }
        }
    }
}

impl ParseTree {
    /// One-line structural rendering used by the grammar corpus.
    pub fn bracketed(&self) -> String {
        format!("(s {} {})", self.root.bracketed(), self.terminator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::fixture_lexicon;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    fn parse(text: &str) -> ParseTree {
        parse_sentence(&tokenize(text), &fixture_lexicon()).unwrap()
    }

    fn simple(tree: &ParseTree) -> &Clause {
        match &tree.root {
            SentenceNode::Simple(c) => c,
            other => panic!("not simple: {other:?}"),
        }
    }

    #[test]
    fn tokenizer_cases() {
        assert_eq!(surfaces("A man works."), ["A", "man", "works", "."]);
        assert!(tokenize("").is_empty());
        assert_eq!(surfaces("Peter's gun"), ["Peter", "'s", "gun"]);
        let toks = tokenize("In 1900, Peter?");
        assert_eq!(toks[1].kind, TokenKind::Number);
        assert_eq!(toks[2].kind, TokenKind::Punctuation);
        assert_eq!(toks[3].position, 9);
        assert_eq!(surfaces("'tis"), ["'", "tis"]);
    }

    #[test]
    fn works_with_magnetic_field() {
        let t = parse("A man works with magnetic field.");
        let c = simple(&t);
        assert_eq!(c.subject.head_base, "man");
        assert_eq!(c.subject.article, Article::Indefinite);
        assert_eq!(c.verb.head, "work");
        assert_eq!(c.verb.tense, Tense::Present);
        assert_eq!(c.objects.len(), 1);
        let (prep, ng) = &c.objects[0];
        assert_eq!(prep.as_deref(), Some("with"));
        assert_eq!(ng.head_base, "field");
        assert_eq!(ng.attributes, ["magnetic"]);
    }

    #[test]
    fn peter_shot_john() {
        let t = parse("Peter shot John.");
        let expected = Clause {
            fronted: vec![],
            subject: NounGroup {
                article: Article::None,
                determiner: None,
                possessor: None,
                attributes: vec![],
                head: "Peter".into(),
                head_base: "peter".into(),
                head_kind: HeadKind::Proper,
                number: GrammaticalNumber::Singular,
                postmods: vec![],
            },
            verb: VerbGroup {
                aux: None,
                negated: false,
                tense: Tense::Past,
                aspect: Aspect::Complete,
                adverb: None,
                adverb_final: false,
                head: "shoot".into(),
                form: "shot".into(),
                particle: None,
            },
            objects: vec![(
                None,
                NounGroup {
                    article: Article::None,
                    determiner: None,
                    possessor: None,
                    attributes: vec![],
                    head: "John".into(),
                    head_base: "john".into(),
                    head_kind: HeadKind::Proper,
                    number: GrammaticalNumber::Singular,
                    postmods: vec![],
                },
            )],
        };
        assert_eq!(simple(&t), &expected);
    }

    #[test]
    fn nonsense_still_parses() {
        let t = parse("A man plays physic.");
        assert_eq!(simple(&t).objects[0].1.head_base, "physic");
    }

    #[test]
    fn of_phrase_attaches_to_licensing_noun() {
        let t = parse("Peter took the book of John.");
        let c = simple(&t);
        assert_eq!(c.objects.len(), 1);
        assert_eq!(c.objects[0].1.postmods[0].0, "of");
        // `in London` is not a combination `book` admits
        let t = parse("Peter took the book in London.");
        assert_eq!(simple(&t).objects.len(), 2);
    }

    #[test]
    fn verb_control_wins_over_noun_combination() {
        // `book` admits on_thing, but `put` takes on_thing in its TO construction
        let t = parse("Peter put the book on the table.");
        let c = simple(&t);
        assert_eq!(c.objects.len(), 2);
        assert_eq!(c.objects[1].0.as_deref(), Some("on"));
    }

    #[test]
    fn compound_and_complex() {
        let t = parse("Peter shot John because John robbed a bank.");
        match &t.root {
            SentenceNode::Complex { subordinate, .. } => assert_eq!(subordinate[0].0, "because"),
            other => panic!("{other:?}"),
        }
        let t = parse("Peter came to London and John left.");
        match &t.root {
            SentenceNode::Compound {
                parts,
                conjunctions,
            } => {
                assert_eq!(parts.len(), 2);
                assert_eq!(conjunctions, &["and"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn setting_sentence() {
        let t = parse("In London in 1900.");
        match &t.root {
            SentenceNode::Setting(pps) => {
                assert_eq!(pps.len(), 2);
                assert_eq!(pps[1].1.head_kind, HeadKind::Numeral);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn auxiliaries_and_negation() {
        let c = parse("Peter will shoot John.");
        assert_eq!(simple(&c).verb.tense, Tense::Future);
        let c = parse("Peter did not shoot John.");
        let v = &simple(&c).verb;
        assert!(v.negated);
        assert_eq!(v.tense, Tense::Past);
        let c = parse("Peter was working in London.");
        let v = &simple(&c).verb;
        assert_eq!((v.tense, v.aspect), (Tense::Past, Aspect::Incomplete));
        assert_eq!(v.head, "work");
    }

    #[test]
    fn possessives_and_particles() {
        let c = parse("Peter's brother came in.");
        let c = simple(&c);
        assert_eq!(c.subject.possessor.as_ref().unwrap().head_base, "peter");
        assert_eq!(c.verb.particle.as_deref(), Some("in"));
        let c = parse("He took his gun.");
        let c = simple(&c);
        assert_eq!(c.subject.head_kind, HeadKind::Pronoun);
        assert_eq!(c.objects[0].1.determiner.as_deref(), Some("his"));
    }

    #[test]
    fn errors() {
        let lex = fixture_lexicon();
        assert_eq!(
            parse_sentence(&tokenize("Peter xyzzy John."), &lex).unwrap_err(),
            ParseError::UnknownWord {
                surface: "xyzzy".into(),
                position: 6
            }
        );
        assert!(matches!(
            parse_sentence(&tokenize("Peter John."), &lex).unwrap_err(),
            ParseError::SyntaxError { .. }
        ));
        assert!(matches!(
            parse_sentence(&tokenize("Peter shot John"), &lex).unwrap_err(),
            ParseError::SyntaxError { .. }
        ));
    }

    #[test]
    fn article_headers() {
        let h = |s: &str| parse_article_header(&tokenize(s));
        assert_eq!(
            h("frame is a doctor").unwrap(),
            ArticleHeader {
                concept: "doctor".into(),
                kind: ArticleKind::Noun
            }
        );
        assert_eq!(
            h("frame is to go on").unwrap(),
            ArticleHeader {
                concept: "go on".into(),
                kind: ArticleKind::Verb
            }
        );
        assert_eq!(
            h("frame is how to rob an organization").unwrap(),
            ArticleHeader {
                concept: "rob an organization".into(),
                kind: ArticleKind::Operation
            }
        );
        assert_eq!(h("a doctor is here"), Err(ParseError::NotAnArticleHeader));
    }

    #[test]
    fn questions() {
        let lex = fixture_lexicon();
        let q = parse_question_tokens(&tokenize("Who shot John?"), &lex).unwrap();
        assert_eq!(q.wh.as_deref(), Some("who"));
        assert!(q.subject.is_none());
        assert_eq!(q.verb.head, "shoot");
        let q = parse_question_tokens(&tokenize("Where did Peter shoot John?"), &lex).unwrap();
        assert_eq!(q.subject.unwrap().head_base, "peter");
        assert_eq!(q.verb.tense, Tense::Past);
        let q = parse_question_tokens(&tokenize("Is Peter a doctor?"), &lex).unwrap();
        assert_eq!(q.verb.head, "be");
        assert_eq!(q.objects[0].1.head_base, "doctor");
        let q = parse_question_tokens(&tokenize("Does John have a weapon?"), &lex).unwrap();
        assert_eq!(q.aux.as_deref(), Some("does"));
        assert_eq!(q.verb.head, "have");
    }
}
