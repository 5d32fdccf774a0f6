//! Reference implementations used to cross-check the engine. None of them
//! calls into the code under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use semnet_core::{Atom, HornClause, Term};

pub const CONSTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 3] = ["X", "Y", "Z"];

/// Datalog argument: variable index or constant index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arg {
    V(usize),
    C(usize),
}

#[derive(Debug, Clone)]
pub struct DAtom {
    pub pred: usize,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone)]
pub struct DClause {
    pub head: DAtom,
    pub body: Vec<DAtom>,
}

#[derive(Debug, Clone)]
pub struct DProgram {
    pub arity: Vec<usize>,
    pub consts: usize,
    pub clauses: Vec<DClause>,
}

pub type Ground = (usize, Vec<usize>);

/// Random range-restricted program: ≤ 8 predicates, ≤ 12 clauses,
/// ≤ 3 constants, arity ≤ 2.
pub fn random_program(rng: &mut impl Rng) -> DProgram {
    let preds = rng.gen_range(1..=8);
    let consts = rng.gen_range(1..=3);
    let arity: Vec<usize> = (0..preds).map(|_| rng.gen_range(0..=2)).collect();
    let n = rng.gen_range(1..=12);
    let mut clauses = Vec::new();
    for _ in 0..n {
        let head_pred = rng.gen_range(0..preds);
        if rng.gen_bool(0.4) {
            let args = (0..arity[head_pred]).map(|_| Arg::C(rng.gen_range(0..consts))).collect();
            clauses.push(DClause {
                head: DAtom { pred: head_pred, args },
                body: Vec::new(),
            });
            continue;
        }
        let mut body = Vec::new();
        let mut used = BTreeSet::new();
        for _ in 0..rng.gen_range(1..=3) {
            let p = rng.gen_range(0..preds);
            let args = (0..arity[p])
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        Arg::C(rng.gen_range(0..consts))
                    } else {
                        let v = rng.gen_range(0..VARS.len());
                        used.insert(v);
                        Arg::V(v)
                    }
                })
                .collect();
            body.push(DAtom { pred: p, args });
        }
        let used: Vec<usize> = used.into_iter().collect();
        let args = (0..arity[head_pred])
            .map(|_| {
                if !used.is_empty() && rng.gen_bool(0.8) {
                    Arg::V(used[rng.gen_range(0..used.len())])
                } else {
                    Arg::C(rng.gen_range(0..consts))
                }
            })
            .collect();
        clauses.push(DClause {
            head: DAtom { pred: head_pred, args },
            body,
        });
    }
    DProgram { arity, consts, clauses }
}

fn ground(a: &DAtom, env: &[usize]) -> Ground {
    let args = a
        .args
        .iter()
        .map(|x| match *x {
            Arg::V(v) => env[v],
            Arg::C(c) => c,
        })
        .collect();
    (a.pred, args)
}

/// Naive bottom-up evaluation: apply every clause under every variable
/// assignment until nothing new appears.
pub fn fixpoint(p: &DProgram) -> BTreeSet<Ground> {
    let mut facts = BTreeSet::new();
    let assignments = p.consts.pow(VARS.len() as u32);
    loop {
        let mut grew = false;
        for c in &p.clauses {
            for k in 0..assignments {
                let env: Vec<usize> = (0..VARS.len())
                    .map(|i| (k / p.consts.pow(i as u32)) % p.consts)
                    .collect();
                if c.body.iter().all(|b| facts.contains(&ground(b, &env))) {
                    grew |= facts.insert(ground(&c.head, &env));
                }
            }
        }
        if !grew {
            return facts;
        }
    }
}

fn term(a: &Arg) -> Term {
    match *a {
        Arg::V(v) => Term::var(VARS[v]),
        Arg::C(c) => Term::sym(CONSTS[c]),
    }
}

pub fn pred_name(p: usize) -> String {
    format!("p{p}")
}

pub fn to_atom(a: &DAtom) -> Atom {
    Atom::new(&pred_name(a.pred), a.args.iter().map(term).collect())
}

pub fn to_clauses(p: &DProgram) -> Vec<HornClause> {
    p.clauses
        .iter()
        .map(|c| HornClause::rule(to_atom(&c.head), c.body.iter().map(to_atom).collect()))
        .collect()
}

/// Ground atom of the engine's answer, if it is one of ours.
pub fn from_atom(a: &Atom) -> Option<Ground> {
    let pred = a.pred.strip_prefix('p')?.parse().ok()?;
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Const(_) => CONSTS.iter().position(|c| Term::sym(c) == *t),
            _ => None,
        })
        .collect::<Option<Vec<usize>>>()?;
    Some((pred, args))
}

/// Terms over the unary functor `f`, constants `a`, `b` and variables
/// `X`, `Y`, `Z`, `W`.
pub fn random_unary_term(rng: &mut impl Rng, max_depth: usize) -> Term {
    let depth = rng.gen_range(0..=max_depth);
    let mut t = if rng.gen_bool(0.6) {
        Term::var(["X", "Y", "Z", "W"][rng.gen_range(0..4)])
    } else {
        Term::sym(["a", "b"][rng.gen_range(0..2)])
    };
    for _ in 0..depth {
        t = Term::compound("f", vec![t]);
    }
    t
}

/// Terms with a binary functor as well, for the structural properties.
pub fn random_term(rng: &mut impl Rng, depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.35) {
        return if rng.gen_bool(0.6) {
            Term::var(["X", "Y", "Z", "W"][rng.gen_range(0..4)])
        } else {
            Term::sym(["a", "b"][rng.gen_range(0..2)])
        };
    }
    if rng.gen_bool(0.5) {
        Term::compound("f", vec![random_term(rng, depth - 1)])
    } else {
        Term::compound("g", vec![random_term(rng, depth - 1), random_term(rng, depth - 1)])
    }
}

pub fn term_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Const(_) => {}
        Term::Compound(_, args) => args.iter().for_each(|a| term_vars(a, out)),
    }
}

pub fn atom_vars(a: &Atom) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    a.args.iter().for_each(|t| term_vars(t, &mut s));
    s
}

/// Replaces variables by the terms `lookup` gives; unknown variables stay.
pub fn substitute(t: &Term, lookup: &dyn Fn(&str) -> Option<Term>) -> Term {
    match t {
        Term::Var(v) => lookup(v).unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::Compound(f, args) => Term::compound(f, args.iter().map(|a| substitute(a, lookup)).collect()),
    }
}

pub fn substitute_atom(a: &Atom, lookup: &dyn Fn(&str) -> Option<Term>) -> Atom {
    Atom::new(&a.pred, a.args.iter().map(|t| substitute(t, lookup)).collect())
}

/// `f^i(c)` for i ≤ depth and c ∈ {a, b}.
pub fn unary_universe(depth: usize) -> Vec<Term> {
    let mut out = Vec::new();
    for c in ["a", "b"] {
        let mut t = Term::sym(c);
        for _ in 0..=depth {
            out.push(t.clone());
            t = Term::compound("f", vec![t]);
        }
    }
    out
}

/// Every assignment of `vars` to universe terms, in lexicographic order.
pub fn assignments<'u>(vars: &[String], universe: &'u [Term]) -> impl Iterator<Item = Vec<&'u Term>> + 'u {
    let n = vars.len();
    let size = universe.len();
    let total = size.pow(n as u32);
    (0..total).map(move |mut k| {
        (0..n)
            .map(|_| {
                let t = &universe[k % size];
                k /= size;
                t
            })
            .collect()
    })
}

/// Whether two atoms are equal up to a consistent renaming of variables.
pub fn variants(a: &Atom, b: &Atom) -> bool {
    fn walk(x: &Term, y: &Term, fw: &mut Vec<(String, String)>) -> bool {
        match (x, y) {
            (Term::Var(u), Term::Var(v)) => match fw.iter().find(|(p, q)| p == u || q == v) {
                Some((p, q)) => p == u && q == v,
                None => {
                    fw.push((u.clone(), v.clone()));
                    true
                }
            },
            (Term::Const(p), Term::Const(q)) => p == q,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| walk(x, y, fw))
            }
            _ => false,
        }
    }
    let mut fw = Vec::new();
    a.pred == b.pred && a.args.len() == b.args.len() && a.args.iter().zip(&b.args).all(|(x, y)| walk(x, y, &mut fw))
}

/// Definition 1 by search: look for an ordered partition S1, ..., Sn of
/// the non-primitive words where each layer is defined by the union of
/// the earlier ones. `defs[i] == u64::MAX` marks an undefined word.
pub fn partition_exists(defs: &[u64], s0: u64) -> bool {
    let n = defs.len();
    let full = (1u64 << n) - 1;
    let mut dead = vec![false; 1 << n];
    fn search(known: u64, full: u64, defs: &[u64], dead: &mut [bool]) -> bool {
        if known == full {
            return true;
        }
        if dead[known as usize] {
            return false;
        }
        let mut avail = 0u64;
        for (i, &d) in defs.iter().enumerate() {
            if known & (1 << i) == 0 && d != u64::MAX && d & !known == 0 {
                avail |= 1 << i;
            }
        }
        // every non-empty subset of the admissible words is a candidate layer
        let mut layer = avail;
        while layer != 0 {
            if search(known | layer, full, defs, dead) {
                return true;
            }
            layer = (layer - 1) & avail;
        }
        dead[known as usize] = true;
        false
    }
    search(s0 & full, full, defs, &mut dead)
}

/// All (defs, s0) cases on `n` words: each word is primitive or defined by
/// a subset of the other words.
pub fn for_each_labelled(n: usize, f: &mut dyn FnMut(&[u64], u64)) {
    let mut defs = vec![0u64; n];
    fn rec(i: usize, n: usize, defs: &mut Vec<u64>, s0: u64, f: &mut dyn FnMut(&[u64], u64)) {
        if i == n {
            f(defs, s0);
            return;
        }
        defs[i] = 0;
        rec(i + 1, n, defs, s0 | 1 << i, f);
        let others = ((1u64 << n) - 1) & !(1 << i);
        let mut sub = others;
        loop {
            defs[i] = sub;
            rec(i + 1, n, defs, s0, f);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        defs[i] = 0;
    }
    rec(0, n, &mut defs, 0, f);
}

/// One case per relabelling class and more: words are ordered by the key
/// (primitive, or size of the definition), so every case on `n` words is
/// a relabelling of some enumerated case.
pub fn for_each_sorted(n: usize, f: &mut dyn FnMut(&[u64], u64)) {
    let mut defs = vec![0u64; n];
    fn rec(i: usize, min_key: usize, n: usize, defs: &mut Vec<u64>, s0: u64, f: &mut dyn FnMut(&[u64], u64)) {
        if i == n {
            f(defs, s0);
            return;
        }
        for key in min_key..=n {
            if key == 0 {
                defs[i] = 0;
                rec(i + 1, key, n, defs, s0 | 1 << i, f);
                continue;
            }
            let others = ((1u64 << n) - 1) & !(1 << i);
            let mut sub = others;
            loop {
                if sub.count_ones() as usize == key - 1 {
                    defs[i] = sub;
                    rec(i + 1, key, n, defs, s0, f);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & others;
            }
        }
        defs[i] = 0;
    }
    rec(0, 0, n, &mut defs, 0, f);
}
