//! Terms, Horn clauses, unification and depth-limited SLD resolution.
//!
//! A goal at depth `d` may only be resolved when `d < depth_limit`; the goals
//! of the clause body it resolves with sit at depth `d + 1`. Answers for a goal
//! under a given remaining budget are tabled by goal variant, so repeated
//! subgoals are solved once per budget rather than once per branch. The
//! answer set is exactly the one plain depth-first SLD search with the same
//! cutoff would enumerate, deduplicated, in clause order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::factbase::FactStore;
use crate::record::{Code, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    Sym(String),
    Int(i64),
    Code(Code),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Const),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn sym(name: &str) -> Term {
        Term::Const(Const::Sym(name.to_string()))
    }

    pub fn int(i: i64) -> Term {
        Term::Const(Const::Int(i))
    }

    pub fn code(c: Code) -> Term {
        Term::Const(Const::Code(c))
    }

    pub fn compound(f: &str, args: Vec<Term>) -> Term {
        Term::Compound(f.to_string(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Compound(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Const(_) => self.clone(),
            Term::Compound(n, args) => Term::Compound(n.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: pred.to_string(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    fn map_vars(&self, f: &mut impl FnMut(&str) -> Term) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| a.map_vars(f)).collect(),
        }
    }

    pub fn apply(&self, s: &Substitution) -> Atom {
        self.map_vars(&mut |v| s.resolve(&Term::Var(v.to_string())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HornClause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl HornClause {
    pub fn fact(head: Atom) -> HornClause {
        HornClause { head, body: Vec::new() }
    }

    pub fn rule(head: Atom, body: Vec<Atom>) -> HornClause {
        HornClause { head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    fn rename(&self, suffix: usize) -> HornClause {
        let mut f = |v: &str| Term::Var(format!("{v}#{suffix}"));
        HornClause {
            head: self.head.map_vars(&mut f),
            body: self.body.iter().map(|b| b.map_vars(&mut f)).collect(),
        }
    }
}

/// Variable bindings. Values returned by [`unify`] are fully resolved, so the
/// substitution is idempotent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn bindings(&self) -> &BTreeMap<String, Term> {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Applies the bindings until no bound variable remains.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| self.resolve(a)).collect()),
            other => other.clone(),
        }
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        self.resolve(t)
    }

    fn occurs(&self, v: &str, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(w) => w == v,
            Term::Const(_) => false,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    fn unify_terms(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => true,
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if self.occurs(x, t) {
                    return false;
                }
                self.bindings.insert(x.clone(), t.clone());
                true
            }
            (Term::Const(c), Term::Const(d)) => c == d,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.unify_terms(x, y))
            }
            _ => false,
        }
    }

    fn unify_atoms(&mut self, a: &Atom, b: &Atom) -> bool {
        a.pred == b.pred
            && a.args.len() == b.args.len()
            && a.args.iter().zip(&b.args).all(|(x, y)| self.unify_terms(x, y))
    }

    fn resolved(&self) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .keys()
                .map(|k| (k.clone(), self.resolve(&Term::Var(k.clone()))))
                .collect(),
        }
    }

    /// Bindings for `vars` only, fully resolved.
    pub fn restrict(&self, vars: &[String]) -> Substitution {
        Substitution {
            bindings: vars
                .iter()
                .filter(|v| self.bindings.contains_key(*v))
                .map(|v| (v.clone(), self.resolve(&Term::Var(v.clone()))))
                .collect(),
        }
    }
}

/// Most general unifier of two atoms, with occurs check.
pub fn unify(a: &Atom, b: &Atom) -> Option<Substitution> {
    let mut s = Substitution::new();
    s.unify_atoms(a, b).then(|| s.resolved())
}

pub fn unify_terms(a: &Term, b: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    s.unify_terms(a, b).then(|| s.resolved())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error("depth limit must be at least 1")]
    InvalidDepth,
    #[error("clause text line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, Default)]
struct PredIndex {
    all: Vec<usize>,
    by_first: HashMap<Const, Vec<usize>>,
    first_open: Vec<usize>,
}

/// An ordered clause list plus ground facts, indexed by predicate.
///
/// Predicates are identified by name and arity.
#[derive(Debug, Clone, Default)]
pub struct Program {
    clauses: Vec<HornClause>,
    index: HashMap<(String, usize), PredIndex>,
    facts: HashSet<Atom>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = HornClause>) -> Self {
        let mut p = Program::new();
        p.extend(clauses);
        p
    }

    pub fn add(&mut self, clause: HornClause) {
        if clause.is_fact() && clause.head.is_ground() && !self.facts.insert(clause.head.clone()) {
            return;
        }
        let i = self.clauses.len();
        let entry = self
            .index
            .entry((clause.head.pred.clone(), clause.head.arity()))
            .or_default();
        entry.all.push(i);
        match clause.head.args.first() {
            Some(Term::Const(c)) => entry.by_first.entry(c.clone()).or_default().push(i),
            _ => entry.first_open.push(i),
        }
        self.clauses.push(clause);
    }

    pub fn add_fact(&mut self, atom: Atom) {
        self.add(HornClause::fact(atom));
    }

    pub fn extend(&mut self, clauses: impl IntoIterator<Item = HornClause>) {
        clauses.into_iter().for_each(|c| self.add(c));
    }

    pub fn clauses(&self) -> &[HornClause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Ground facts (𝔅).
    pub fn facts(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }

    /// Predicate symbols with their arities.
    pub fn predicates(&self) -> BTreeSet<(String, usize)> {
        self.index.keys().cloned().collect()
    }

    /// Function symbols with their arities.
    pub fn functors(&self) -> BTreeSet<(String, usize)> {
        fn walk(t: &Term, out: &mut BTreeSet<(String, usize)>) {
            if let Term::Compound(f, args) = t {
                out.insert((f.clone(), args.len()));
                args.iter().for_each(|a| walk(a, out));
            }
        }
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            for a in std::iter::once(&c.head).chain(&c.body) {
                a.args.iter().for_each(|t| walk(t, &mut out));
            }
        }
        out
    }

    fn candidates(&self, goal: &Atom) -> Vec<usize> {
        let Some(ix) = self.index.get(&(goal.pred.clone(), goal.arity())) else {
            return Vec::new();
        };
        match goal.args.first() {
            Some(Term::Const(c)) => {
                let exact = ix.by_first.get(c).map(Vec::as_slice).unwrap_or(&[]);
                let mut merged = Vec::with_capacity(exact.len() + ix.first_open.len());
                let (mut i, mut j) = (0, 0);
                while i < exact.len() || j < ix.first_open.len() {
                    if j == ix.first_open.len() || (i < exact.len() && exact[i] < ix.first_open[j]) {
                        merged.push(exact[i]);
                        i += 1;
                    } else {
                        merged.push(ix.first_open[j]);
                        j += 1;
                    }
                }
                merged
            }
            _ => ix.all.clone(),
        }
    }
}

/// One resolution step: the goal instance, the program clause used and the
/// proofs of the clause body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub atom: Atom,
    pub clause: usize,
    pub children: Vec<Rc<ProofNode>>,
    ground: bool,
}

impl ProofNode {
    fn new(atom: Atom, clause: usize, children: Vec<Rc<ProofNode>>) -> Rc<ProofNode> {
        let ground = atom.is_ground() && children.iter().all(|c| c.ground);
        Rc::new(ProofNode {
            atom,
            clause,
            children,
            ground,
        })
    }

    fn map_vars(self: &Rc<Self>, f: &mut impl FnMut(&str) -> Term) -> Rc<ProofNode> {
        if self.ground {
            return Rc::clone(self);
        }
        let children = self.children.iter().map(|c| c.map_vars(f)).collect();
        ProofNode::new(self.atom.map_vars(f), self.clause, children)
    }

    /// Clause indices used, in post-order (leaves first).
    pub fn clauses_used(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for c in &self.children {
            out.extend(c.clauses_used());
        }
        out.push(self.clause);
        out
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(|c| c.height()).max().unwrap_or(0)
    }

    /// Re-derives every node from its clause: some instance of the clause
    /// has this node's atom as head and the children's atoms as body.
    pub fn replay(&self, program: &Program) -> bool {
        let Some(clause) = program.clauses().get(self.clause) else {
            return false;
        };
        if clause.body.len() != self.children.len() {
            return false;
        }
        let mut s = Substitution::new();
        let clause = clause.rename(usize::MAX);
        let frozen = |a: &Atom| a.map_vars(&mut |v| Term::sym(&format!("\u{0}{v}")));
        let matches = s.unify_atoms(&clause.head, &frozen(&self.atom))
            && clause
                .body
                .iter()
                .zip(&self.children)
                .all(|(b, c)| s.unify_atoms(b, &frozen(&c.atom)));
        matches && self.children.iter().all(|c| c.replay(program))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Bindings of the goal variables.
    pub subst: Substitution,
    /// One proof per goal, in goal order.
    pub proofs: Vec<Rc<ProofNode>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solutions {
    pub answers: Vec<Solution>,
    /// Some branch was cut off by the depth limit with goals still open.
    pub depth_limit_reached: bool,
}

#[derive(Debug)]
struct Table {
    answers: Vec<(Atom, Rc<ProofNode>)>,
    cut: bool,
}

struct Solver<'p> {
    program: &'p Program,
    memo: HashMap<(Atom, usize), Rc<Table>>,
    fresh: usize,
}

/// Renames variables to `?0`, `?1`, ... in order of first occurrence.
fn canonical(atom: &Atom) -> (Atom, Vec<String>) {
    let vars = atom.vars();
    let canon = atom.map_vars(&mut |v| {
        let i = vars.iter().position(|w| w == v).expect("collected");
        Term::Var(format!("?{i}"))
    });
    (canon, vars)
}

impl<'p> Solver<'p> {
    fn next_fresh(&mut self) -> usize {
        self.fresh += 1;
        self.fresh
    }

    fn goal(&mut self, atom: &Atom, budget: usize) -> Rc<Table> {
        let (canon, _) = canonical(atom);
        let key = (canon, budget);
        if let Some(t) = self.memo.get(&key) {
            return Rc::clone(t);
        }
        let canon = &key.0;
        let mut answers = Vec::new();
        let mut seen = HashSet::new();
        let mut cut = false;
        for ci in self.program.candidates(canon) {
            let suffix = self.next_fresh();
            let clause = self.program.clauses[ci].rename(suffix);
            let mut s = Substitution::new();
            if !s.unify_atoms(canon, &clause.head) {
                continue;
            }
            if budget == 0 {
                cut = true;
                break;
            }
            let mut found = Vec::new();
            cut |= self.conj(&clause.body, budget - 1, s, Vec::new(), &mut found);
            for (s, proofs) in found {
                let instance = canon.apply(&s);
                let (answer, vars) = canonical(&instance);
                if !seen.insert(answer.clone()) {
                    continue;
                }
                let node = ProofNode::new(instance, ci, proofs);
                let node = node.map_vars(&mut |v| match vars.iter().position(|w| w == v) {
                    Some(i) => Term::Var(format!("?{i}")),
                    None => Term::Var(v.to_string()),
                });
                answers.push((answer, node));
            }
        }
        let table = Rc::new(Table { answers, cut });
        self.memo.insert(key, Rc::clone(&table));
        table
    }

    /// Solves `goals` left to right; returns whether any branch was cut.
    fn conj(
        &mut self,
        goals: &[Atom],
        budget: usize,
        s: Substitution,
        proofs: Vec<Rc<ProofNode>>,
        out: &mut Vec<(Substitution, Vec<Rc<ProofNode>>)>,
    ) -> bool {
        let Some((first, rest)) = goals.split_first() else {
            let proofs = proofs
                .iter()
                .map(|p| p.map_vars(&mut |v| s.resolve(&Term::Var(v.to_string()))))
                .collect();
            out.push((s, proofs));
            return false;
        };
        let goal = first.apply(&s);
        let table = self.goal(&goal, budget);
        let mut cut = table.cut;
        for (answer, proof) in &table.answers {
            let (answer, proof) = if answer.is_ground() {
                (answer.clone(), Rc::clone(proof))
            } else {
                let suffix = self.next_fresh();
                let mut f = |v: &str| {
                    if v.starts_with('?') {
                        Term::Var(format!("{v}#{suffix}"))
                    } else {
                        Term::Var(v.to_string())
                    }
                };
                (answer.map_vars(&mut f), proof.map_vars(&mut f))
            };
            let mut s2 = s.clone();
            if !s2.unify_atoms(&goal, &answer) {
                continue;
            }
            let mut proofs2 = proofs.clone();
            proofs2.push(proof);
            cut |= self.conj(rest, budget, s2, proofs2, out);
        }
        cut
    }
}

/// Depth-limited SLD resolution over `program`; answers are restricted to
/// the goal variables and deduplicated.
pub fn solve(goals: &[Atom], program: &Program, depth_limit: usize) -> Result<Solutions, InferenceError> {
    if depth_limit == 0 {
        return Err(InferenceError::InvalidDepth);
    }
    let mut vars = Vec::new();
    for g in goals {
        for v in g.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    let mut solver = Solver {
        program,
        memo: HashMap::new(),
        fresh: 0,
    };
    let mut found = Vec::new();
    let cut = solver.conj(goals, depth_limit, Substitution::new(), Vec::new(), &mut found);
    let mut seen = HashSet::new();
    let mut answers = Vec::new();
    for (s, proofs) in found {
        let subst = s.restrict(&vars);
        let key: Vec<Atom> = goals.iter().map(|g| g.apply(&subst)).collect();
        if seen.insert(key) {
            answers.push(Solution { subst, proofs });
        }
    }
    Ok(Solutions {
        answers,
        depth_limit_reached: cut,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        })
    }
}

/// Three-valued reading of a conjunction of goals over a program.
pub fn evaluate(goals: &[Atom], program: &Program, depth_limit: usize) -> Result<(Truth, Solutions), InferenceError> {
    let sols = solve(goals, program, depth_limit)?;
    let truth = if !sols.answers.is_empty() {
        Truth::True
    } else if sols.depth_limit_reached {
        Truth::Unknown
    } else {
        Truth::False
    };
    Ok((truth, sols))
}

/// Truth of a ground atom over the stored facts and the knowledge-base
/// clauses. Unknown predicates are false; a depth cutoff is unknown.
pub fn evaluate_ground(
    atom: &Atom,
    store: &FactStore,
    kb: &Program,
    depth_limit: usize,
) -> Result<Truth, InferenceError> {
    let mut program = kb.clone();
    for a in compile_facts(store) {
        program.add_fact(a);
    }
    Ok(evaluate(std::slice::from_ref(atom), &program, depth_limit)?.0)
}

fn value_term(v: &Value) -> Option<Term> {
    match v {
        Value::Absent => None,
        Value::Text(s) => Some(Term::sym(&s.to_lowercase())),
        Value::Int(i) => Some(Term::int(*i)),
        Value::Ref(c) => Some(Term::code(*c)),
    }
}

/// One `sort(code)` atom per record plus one `slot(code, value)` atom per
/// present slot. Text values are lowercased.
pub fn compile_facts(store: &FactStore) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    for rec in store.records() {
        let code = Term::code(rec.code.expect("stored records carry codes"));
        let sort = if rec.kb {
            format!("t{}", rec.sort)
        } else {
            rec.sort.to_string()
        };
        out.insert(Atom::new(&sort, vec![code.clone()]));
        for (slot, v) in rec.present() {
            if let Some(t) = value_term(v) {
                out.insert(Atom::new(slot, vec![code.clone(), t]));
            }
        }
    }
    out
}

fn is_plain_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !looks_like_code(s)
}

fn looks_like_code(s: &str) -> bool {
    s.len() > 1 && s.starts_with('c') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Sym(s) if is_plain_symbol(s) => f.write_str(s),
            Const::Sym(s) => write!(f, "'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
            Const::Int(i) => write!(f, "{i}"),
            Const::Code(c) => write!(f, "c{}", c.0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
            Term::Compound(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

struct ClauseLexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Quoted(String),
    Punct(&'static str),
}

impl<'a> ClauseLexer<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, InferenceError> {
        Err(InferenceError::Syntax {
            line: self.line,
            reason: reason.into(),
        })
    }

    fn skip_space(&mut self) {
        while let Some(&c) = self.chars.get(self.pos) {
            if c == '%' {
                while self.chars.get(self.pos).is_some_and(|&c| c != '\n') {
                    self.pos += 1;
                }
            } else if c.is_whitespace() {
                if c == '\n' {
                    self.line += 1;
                }
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<Tok>, InferenceError> {
        self.skip_space();
        let Some(&c) = self.chars.get(self.pos) else {
            return Ok(None);
        };
        let word = |lx: &mut Self| {
            let start = lx.pos;
            while lx.chars.get(lx.pos).is_some_and(|c| c.is_alphanumeric() || *c == '_') {
                lx.pos += 1;
            }
            lx.chars[start..lx.pos].iter().collect::<String>()
        };
        let tok = if c.is_ascii_digit() || (c == '-' && self.chars.get(self.pos + 1).is_some_and(char::is_ascii_digit)) {
            let start = self.pos;
            self.pos += 1;
            while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
                self.pos += 1;
            }
            let s: String = self.chars[start..self.pos].iter().collect();
            match s.parse() {
                Ok(i) => Tok::Int(i),
                Err(_) => return self.err(format!("bad integer `{s}`")),
            }
        } else if c.is_uppercase() || c == '_' {
            Tok::Var(word(self))
        } else if c.is_alphabetic() {
            Tok::Ident(word(self))
        } else if c == '\'' {
            self.pos += 1;
            let mut s = String::new();
            loop {
                match self.chars.get(self.pos) {
                    None => return self.err("unterminated quoted symbol"),
                    Some('\'') => {
                        self.pos += 1;
                        break;
                    }
                    Some('\\') => {
                        match self.chars.get(self.pos + 1) {
                            Some(&e) => s.push(e),
                            None => return self.err("dangling escape"),
                        }
                        self.pos += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        self.pos += 1;
                    }
                }
            }
            Tok::Quoted(s)
        } else if c == ':' && self.chars.get(self.pos + 1) == Some(&'-') {
            self.pos += 2;
            Tok::Punct(":-")
        } else {
            self.pos += 1;
            match c {
                '(' => Tok::Punct("("),
                ')' => Tok::Punct(")"),
                ',' => Tok::Punct(","),
                '.' => Tok::Punct("."),
                _ => return self.err(format!("unexpected character `{c}`")),
            }
        };
        Ok(Some(tok))
    }
}

struct ClauseParser<'a> {
    lx: ClauseLexer<'a>,
    peeked: Option<Tok>,
}

impl<'a> ClauseParser<'a> {
    fn peek(&mut self) -> Result<Option<&Tok>, InferenceError> {
        if self.peeked.is_none() {
            self.peeked = self.lx.next()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn bump(&mut self) -> Result<Option<Tok>, InferenceError> {
        self.peek()?;
        Ok(self.peeked.take())
    }

    fn expect(&mut self, p: &str) -> Result<(), InferenceError> {
        match self.bump()? {
            Some(Tok::Punct(q)) if q == p => Ok(()),
            other => self.lx.err(format!("expected `{p}`, found {other:?}")),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, InferenceError> {
        let mut args = Vec::new();
        if self.peek()? == Some(&Tok::Punct("(")) {
            self.bump()?;
            loop {
                args.push(self.term()?);
                match self.bump()? {
                    Some(Tok::Punct(",")) => continue,
                    Some(Tok::Punct(")")) => break,
                    other => return self.lx.err(format!("expected `,` or `)`, found {other:?}")),
                }
            }
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, InferenceError> {
        match self.bump()? {
            Some(Tok::Var(v)) => Ok(Term::Var(v)),
            Some(Tok::Int(i)) => Ok(Term::int(i)),
            Some(Tok::Quoted(s)) => Ok(Term::Const(Const::Sym(s))),
            Some(Tok::Ident(name)) => {
                let args = self.args()?;
                if !args.is_empty() {
                    Ok(Term::Compound(name, args))
                } else if looks_like_code(&name) {
                    Ok(Term::code(Code(name[1..].parse().expect("digits"))))
                } else {
                    Ok(Term::Const(Const::Sym(name)))
                }
            }
            other => self.lx.err(format!("expected a term, found {other:?}")),
        }
    }

    fn atom(&mut self) -> Result<Atom, InferenceError> {
        match self.bump()? {
            Some(Tok::Ident(pred)) => Ok(Atom {
                pred,
                args: self.args()?,
            }),
            other => self.lx.err(format!("expected a predicate, found {other:?}")),
        }
    }

    fn clause(&mut self) -> Result<HornClause, InferenceError> {
        let head = self.atom()?;
        let mut body = Vec::new();
        if self.peek()? == Some(&Tok::Punct(":-")) {
            self.bump()?;
            loop {
                body.push(self.atom()?);
                if self.peek()? == Some(&Tok::Punct(",")) {
                    self.bump()?;
                } else {
                    break;
                }
            }
        }
        self.expect(".")?;
        Ok(HornClause { head, body })
    }
}

/// Parses `head :- b1, b2.` and `fact.` clauses; `%` starts a comment.
pub fn parse_clauses(text: &str) -> Result<Vec<HornClause>, InferenceError> {
    let mut p = ClauseParser {
        lx: ClauseLexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            _src: text,
        },
        peeked: None,
    };
    let mut out = Vec::new();
    while p.peek()?.is_some() {
        out.push(p.clause()?);
    }
    Ok(out)
}

pub fn parse_program(text: &str) -> Result<Program, InferenceError> {
    Ok(Program::from_clauses(parse_clauses(text)?))
}

pub fn parse_atom(text: &str) -> Result<Atom, InferenceError> {
    let clauses = parse_clauses(&format!("{}.", text.trim().trim_end_matches('.')))?;
    match clauses.as_slice() {
        [c] if c.is_fact() => Ok(c.head.clone()),
        _ => Err(InferenceError::Syntax {
            line: 1,
            reason: "expected a single atom".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{PredicateRecord, Sort};

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    #[test]
    fn unify_examples() {
        let s = unify(&atom("p(X)"), &atom("p(a)")).unwrap();
        assert_eq!(s.get("X"), Some(&Term::sym("a")));
        assert!(unify(&atom("p(X)"), &atom("p(f(X))")).is_none());
        assert!(unify(&atom("p(X, X)"), &atom("p(a, b)")).is_none());
        let s = unify(&atom("p(X, f(Y))"), &atom("p(Y, f(a))")).unwrap();
        assert_eq!(s.get("X"), Some(&Term::sym("a")));
        assert_eq!(s.get("Y"), Some(&Term::sym("a")));
    }

    #[test]
    fn unifier_is_idempotent() {
        let a = atom("p(X, Y, g(Z))");
        let b = atom("p(Y, Z, W)");
        let s = unify(&a, &b).unwrap();
        for t in s.bindings().values() {
            assert_eq!(&s.resolve(t), t);
        }
        assert_eq!(a.apply(&s), b.apply(&s));
    }

    #[test]
    fn one_step_resolution() {
        let p = parse_program("q(a).\np(X) :- q(X).").unwrap();
        let sols = solve(&[atom("p(Y)")], &p, 64).unwrap();
        assert_eq!(sols.answers.len(), 1);
        assert_eq!(sols.answers[0].subst.get("Y"), Some(&Term::sym("a")));
        assert!(sols.answers[0].proofs[0].replay(&p));

        let none = solve(&[atom("p(b)")], &p, 64).unwrap();
        assert!(none.answers.is_empty());
        assert!(!none.depth_limit_reached);
    }

    #[test]
    fn depth_cutoff_is_flagged() {
        let p = parse_program("q(a).\np(X) :- q(X).").unwrap();
        let (t, _) = evaluate(&[atom("p(a)")], &p, 1).unwrap();
        assert_eq!(t, Truth::Unknown);
        let (t, _) = evaluate(&[atom("p(a)")], &p, 2).unwrap();
        assert_eq!(t, Truth::True);
        assert_eq!(solve(&[atom("p(a)")], &p, 0), Err(InferenceError::InvalidDepth));
    }

    #[test]
    fn left_recursion_terminates() {
        let p = parse_program(
            "path(X, Y) :- path(X, Z), edge(Z, Y).\npath(X, Y) :- edge(X, Y).\nedge(a, b).\nedge(b, c).\nedge(c, a).",
        )
        .unwrap();
        let sols = solve(&[atom("path(a, Y)")], &p, 20).unwrap();
        let ys: BTreeSet<String> = sols.answers.iter().map(|s| s.subst.get("Y").unwrap().to_string()).collect();
        assert_eq!(ys, ["a", "b", "c"].into_iter().map(String::from).collect());
        assert!(sols.depth_limit_reached);
        for s in &sols.answers {
            assert!(s.proofs[0].replay(&p));
        }
    }

    #[test]
    fn compound_answers_and_proofs() {
        let p = parse_program("nat(z).\nnat(s(X)) :- nat(X).").unwrap();
        let sols = solve(&[atom("nat(N)")], &p, 3).unwrap();
        let ns: Vec<String> = sols.answers.iter().map(|s| s.subst.get("N").unwrap().to_string()).collect();
        assert_eq!(ns, ["z", "s(z)", "s(s(z))"]);
        assert!(sols.depth_limit_reached);
        for s in &sols.answers {
            assert!(s.proofs[0].replay(&p));
        }
        let p = parse_program("likes(X, X).\nfriend(A, B) :- likes(A, B), likes(B, A).").unwrap();
        let sols = solve(&[atom("friend(P, Q)")], &p, 4).unwrap();
        assert_eq!(sols.answers.len(), 1);
        let s = &sols.answers[0].subst;
        assert_eq!(s.get("P"), s.get("Q"));
        assert!(sols.answers[0].proofs[0].replay(&p));
    }

    #[test]
    fn unknown_predicate_is_false() {
        let store = FactStore::new();
        assert_eq!(evaluate_ground(&atom("foo(a)"), &store, &Program::new(), 8).unwrap(), Truth::False);
    }

    #[test]
    fn compile_facts_examples() {
        let mut store = FactStore::new();
        assert!(compile_facts(&store).is_empty());
        let p = store
            .insert(PredicateRecord::new(Sort::Person).with("first_name", Value::text("Peter")))
            .unwrap();
        let atoms = compile_facts(&store);
        let want: BTreeSet<Atom> = [atom("person(c0)"), atom("first_name(c0, peter)")].into_iter().collect();
        assert_eq!(atoms, want);
        for _ in 0..4 {
            store.insert(PredicateRecord::new(Sort::Thing)).unwrap();
        }
        store
            .insert(PredicateRecord::new(Sort::Action).with("cod_sub", Value::Ref(p)))
            .unwrap();
        assert!(compile_facts(&store).contains(&atom("cod_sub(c5, c0)")));
    }

    #[test]
    fn clause_text_round_trips() {
        let text = "% comment\nisa(X, weapon) :- isa(X, pistol).\nname(c3, 'Peter Smith').\nage(c1, -4).\np.";
        let clauses = parse_clauses(text).unwrap();
        assert_eq!(clauses.len(), 4);
        let printed: Vec<String> = clauses.iter().map(|c| c.to_string()).collect();
        assert_eq!(printed[0], "isa(X, weapon) :- isa(X, pistol).");
        assert_eq!(printed[1], "name(c3, 'Peter Smith').");
        let again = parse_clauses(&printed.join("\n")).unwrap();
        assert_eq!(again, clauses);
        assert!(parse_clauses("p(X :- q.").is_err());
        assert!(parse_clauses("p(X)").is_err());
    }
}
