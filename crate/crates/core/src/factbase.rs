//! Code-indexed store of ground predicate records.
//!
//! Codes are assigned from a counter on insertion and never reused. The store
//! persists as a header line followed by one dump-net line per record.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::record::{parse_record_line, Code, PredicateRecord, RecordError, Sort, Value};

const HEADER: &str = "semnet-facts v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactError {
    #[error("reference to unknown record {0}")]
    DanglingReference(Code),
    #[error("sort {sort} has no slot `{slot}`")]
    UnknownSlot { sort: Sort, slot: String },
    #[error("corrupt store at line {line}: {reason}")]
    CorruptStore { line: usize, reason: String },
    #[error("record {code} already holds a different `{slot}`")]
    ConflictingIdentity { code: Code, slot: String },
    #[error("no record {0}")]
    UnknownCode(Code),
    #[error("record already carries code {0}")]
    CodeAssigned(Code),
    #[error("sort mismatch: record {code} is a {stored}, not a {given}")]
    SortMismatch { code: Code, stored: Sort, given: Sort },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("cannot access {path}: {reason}")]
    Io { path: String, reason: String },
}

type IdentKey = (Sort, &'static str, Value);

#[derive(Debug, Clone, Default)]
pub struct FactStore {
    records: BTreeMap<Code, PredicateRecord>,
    next_code: u64,
    by_sort: HashMap<Sort, BTreeSet<Code>>,
    by_ident: HashMap<IdentKey, BTreeSet<Code>>,
}

impl FactStore {
    pub fn new() -> Self {
        FactStore::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn next_code(&self) -> Code {
        Code(self.next_code)
    }

    pub fn get(&self, code: Code) -> Option<&PredicateRecord> {
        self.records.get(&code)
    }

    /// All records in code order.
    pub fn records(&self) -> impl Iterator<Item = &PredicateRecord> {
        self.records.values()
    }

    pub fn of_sort(&self, sort: Sort) -> Vec<&PredicateRecord> {
        self.by_sort
            .get(&sort)
            .map(|codes| codes.iter().map(|c| &self.records[c]).collect())
            .unwrap_or_default()
    }

    fn check_refs(&self, rec: &PredicateRecord) -> Result<(), FactError> {
        for r in rec.references() {
            if !self.records.contains_key(&r) {
                return Err(FactError::DanglingReference(r));
            }
        }
        Ok(())
    }

    fn index(&mut self, rec: &PredicateRecord, code: Code) {
        self.by_sort.entry(rec.sort).or_default().insert(code);
        for field in rec.sort.identity_fields() {
            let v = rec.value(field);
            if !v.is_absent() {
                self.by_ident
                    .entry((rec.sort, field, v.clone()))
                    .or_default()
                    .insert(code);
            }
        }
    }

    pub fn insert(&mut self, mut rec: PredicateRecord) -> Result<Code, FactError> {
        if let Some(c) = rec.code {
            return Err(FactError::CodeAssigned(c));
        }
        rec.validate()?;
        self.check_refs(&rec)?;
        let code = Code(self.next_code);
        self.next_code += 1;
        rec.code = Some(code);
        self.index(&rec, code);
        self.records.insert(code, rec);
        Ok(code)
    }

    /// Copies every slot the candidate specifies into the stored record where
    /// the stored slot is absent. Fails without changing anything if a
    /// specified slot differs from a present stored value.
    pub fn merge_absent(&mut self, code: Code, candidate: &PredicateRecord) -> Result<(), FactError> {
        let stored = self.records.get(&code).ok_or(FactError::UnknownCode(code))?;
        if stored.sort != candidate.sort {
            return Err(FactError::SortMismatch {
                code,
                stored: stored.sort,
                given: candidate.sort,
            });
        }
        let mut fill = Vec::new();
        for (slot, v) in candidate.present() {
            match stored.value(slot) {
                Value::Absent => fill.push((slot, v.clone())),
                existing if existing == v => {}
                _ => {
                    return Err(FactError::ConflictingIdentity {
                        code,
                        slot: slot.to_string(),
                    })
                }
            }
        }
        for (_, v) in &fill {
            if let Some(r) = v.as_ref_code() {
                if !self.records.contains_key(&r) {
                    return Err(FactError::DanglingReference(r));
                }
            }
        }
        let mut updated = stored.clone();
        for (slot, v) in fill {
            updated.try_set(slot, v)?;
        }
        updated.validate()?;
        self.index(&updated, code);
        self.records.insert(code, updated);
        Ok(())
    }

    /// Records of `sort` matching every `(slot, value)` constraint. A stored
    /// ABSENT never matches.
    pub fn query(&self, sort: Sort, constraints: &[(&str, Value)]) -> Result<Vec<&PredicateRecord>, FactError> {
        for (slot, _) in constraints {
            if sort.slot_index(slot).is_none() {
                return Err(FactError::UnknownSlot {
                    sort,
                    slot: slot.to_string(),
                });
            }
        }
        if constraints.iter().any(|(_, v)| v.is_absent()) {
            return Ok(Vec::new());
        }
        let indexed = constraints
            .iter()
            .find(|(slot, _)| sort.identity_fields().contains(slot));
        let candidates: Vec<Code> = match indexed {
            Some((slot, v)) => {
                let field = sort
                    .identity_fields()
                    .iter()
                    .find(|f| *f == slot)
                    .copied()
                    .expect("identity field");
                self.by_ident
                    .get(&(sort, field, v.clone()))
                    .map(|s| s.iter().copied().collect())
                    .unwrap_or_default()
            }
            None => self
                .by_sort
                .get(&sort)
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default(),
        };
        Ok(candidates
            .into_iter()
            .map(|c| &self.records[&c])
            .filter(|r| constraints.iter().all(|(slot, v)| r.value(slot) == v))
            .collect())
    }

    /// Every non-ABSENT reference resolves.
    pub fn check_integrity(&self) -> Result<(), FactError> {
        self.records.values().try_for_each(|r| self.check_refs(r))
    }

    /// The dump-net text: one record per line in code order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in self.records.values() {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        format!(
            "{HEADER} next_code={} count={}\n{}",
            self.next_code,
            self.records.len(),
            self.dump()
        )
    }

    pub fn from_text(text: &str) -> Result<FactStore, FactError> {
        let corrupt = |line: usize, reason: String| FactError::CorruptStore { line, reason };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| corrupt(1, "missing header".into()))?;
        let rest = header
            .strip_prefix(HEADER)
            .ok_or_else(|| corrupt(1, format!("expected `{HEADER}` header")))?;
        let mut next_code = None;
        let mut count = None;
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("next_code", v)) => next_code = v.parse::<u64>().ok(),
                Some(("count", v)) => count = v.parse::<usize>().ok(),
                _ => return Err(corrupt(1, format!("unexpected header field `{field}`"))),
            }
        }
        let (Some(next_code), Some(count)) = (next_code, count) else {
            return Err(corrupt(1, "header lacks next_code or count".into()));
        };

        let mut store = FactStore::new();
        let mut last_line = 1;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            last_line = lineno;
            if line.is_empty() {
                continue;
            }
            let rec = parse_record_line(line).map_err(|e| corrupt(lineno, e))?;
            let code = rec.code.expect("parsed records carry a code");
            if code.0 >= next_code {
                return Err(corrupt(lineno, format!("code {code} not below next_code")));
            }
            if store.records.contains_key(&code) {
                return Err(corrupt(lineno, format!("duplicate code {code}")));
            }
            rec.validate().map_err(|e| corrupt(lineno, e.to_string()))?;
            store.index(&rec, code);
            store.records.insert(code, rec);
        }
        if store.records.len() != count {
            return Err(corrupt(
                last_line,
                format!("expected {count} records, found {}", store.records.len()),
            ));
        }
        store.next_code = next_code;
        if let Err(FactError::DanglingReference(c)) = store.check_integrity() {
            return Err(corrupt(last_line, format!("dangling reference {c}")));
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FactError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| FactError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FactStore, FactError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| FactError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        FactStore::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn person(first: &str) -> PredicateRecord {
        PredicateRecord::new(Sort::Person).with("first_name", Value::text(first))
    }

    #[test]
    fn first_insert_gets_code_zero() {
        let mut s = FactStore::new();
        assert_eq!(s.insert(person("Peter")).unwrap(), Code(0));
        assert_eq!(s.len(), 1);
        assert_eq!(s.next_code(), Code(1));
    }

    #[test]
    fn dangling_reference_rejected() {
        let mut s = FactStore::new();
        for n in ["a", "b", "c"] {
            s.insert(person(n)).unwrap();
        }
        let act = PredicateRecord::new(Sort::Action).with("cod_sub", Value::Ref(Code(99)));
        assert_eq!(s.insert(act), Err(FactError::DanglingReference(Code(99))));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn thousand_inserts_recount() {
        let mut s = FactStore::new();
        let mut codes = BTreeSet::new();
        for i in 0..1000 {
            let rec = match i % 3 {
                0 => person(&format!("p{i}")),
                1 => PredicateRecord::new(Sort::Thing).with("name", Value::text("gun")),
                _ => PredicateRecord::new(Sort::Time).with("year", Value::Int(1900 + i)),
            };
            codes.insert(s.insert(rec).unwrap());
        }
        assert_eq!(codes.len(), 1000);
        for sort in [Sort::Person, Sort::Thing, Sort::Time] {
            let scan = s.records().filter(|r| r.sort == sort).count();
            assert_eq!(s.query(sort, &[]).unwrap().len(), scan);
        }
        assert_eq!(s.query(Sort::Thing, &[("name", Value::text("gun"))]).unwrap().len(), 333);
    }

    #[test]
    fn query_rules() {
        let mut s = FactStore::new();
        s.insert(person("Peter")).unwrap();
        s.insert(person("Peter").with("second_name", Value::text("Smith"))).unwrap();
        s.insert(person("John")).unwrap();
        assert_eq!(s.query(Sort::Person, &[("first_name", Value::text("Peter"))]).unwrap().len(), 2);
        assert_eq!(s.query(Sort::Person, &[("second_name", Value::Absent)]).unwrap().len(), 0);
        assert_eq!(s.query(Sort::Action, &[]).unwrap().len(), 0);
        assert!(matches!(
            s.query(Sort::Person, &[("colour", Value::text("red"))]),
            Err(FactError::UnknownSlot { .. })
        ));
    }

    #[test]
    fn merge_fills_absent_only() {
        let mut s = FactStore::new();
        let c = s.insert(person("Peter")).unwrap();
        let cand = person("Peter").with("second_name", Value::text("Smith"));
        s.merge_absent(c, &cand).unwrap();
        assert_eq!(s.get(c).unwrap().value("second_name"), &Value::text("Smith"));
        let clash = person("Paul");
        assert!(matches!(s.merge_absent(c, &clash), Err(FactError::ConflictingIdentity { .. })));
        assert_eq!(s.get(c).unwrap().value("first_name"), &Value::text("Peter"));
        assert_eq!(
            s.query(Sort::Person, &[("second_name", Value::text("Smith"))]).unwrap().len(),
            1
        );
    }

    #[test]
    fn round_trips() {
        let empty = FactStore::new();
        let back = FactStore::from_text(&empty.to_text()).unwrap();
        assert!(back.is_empty());

        let mut s = FactStore::new();
        let p = s.insert(person("Peter")).unwrap();
        let g = s
            .insert(PredicateRecord::new(Sort::Thing).with("name", Value::text("gun")).with("cod_owner", Value::Ref(p)))
            .unwrap();
        s.insert(PredicateRecord::new(Sort::Action).with("cod_sub", Value::Ref(p)).with("cod_obj", Value::Ref(g)))
            .unwrap();
        let back = FactStore::from_text(&s.to_text()).unwrap();
        assert_eq!(back.dump(), s.dump());
        assert_eq!(back.next_code(), s.next_code());
    }

    #[test]
    fn save_and_load_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("facts.net");
        let mut s = FactStore::new();
        s.insert(person("Mary")).unwrap();
        s.save(&path).unwrap();
        assert_eq!(FactStore::load(&path).unwrap().dump(), s.dump());
        assert!(matches!(FactStore::load(dir.path().join("missing")), Err(FactError::Io { .. })));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let mut s = FactStore::new();
        for n in ["a", "b", "c"] {
            s.insert(person(n)).unwrap();
        }
        let text = s.to_text();
        let cut: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(FactStore::from_text(&cut), Err(FactError::CorruptStore { .. })));
        let half = &text[..text.len() - 5];
        assert!(matches!(FactStore::from_text(half), Err(FactError::CorruptStore { .. })));
        assert!(matches!(FactStore::from_text(""), Err(FactError::CorruptStore { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn query_equals_scan(
            ops in prop::collection::vec((0usize..3, 0usize..4, 0usize..3), 1..200),
            q in (0usize..3, 0usize..4),
        ) {
            let names = ["peter", "john", "mary", "ann"];
            let sorts = [Sort::Person, Sort::Thing, Sort::Organization];
            let slot = |s: Sort| match s {
                Sort::Person => "first_name",
                Sort::Thing => "name",
                _ => "name_org",
            };
            let mut store = FactStore::new();
            for (si, ni, extra) in ops {
                let sort = sorts[si];
                let mut r = PredicateRecord::new(sort).with(slot(sort), Value::text(names[ni]));
                if extra == 0 && sort == Sort::Thing {
                    r.set("color", Value::text("red"));
                }
                store.insert(r).unwrap();
            }
            let sort = sorts[q.0];
            let mut cons = vec![(slot(sort), Value::text(names[q.1]))];
            if sort == Sort::Thing {
                cons.push(("color", Value::text("red")));
            }
            let got: Vec<Code> = store.query(sort, &cons).unwrap().iter().map(|r| r.code.unwrap()).collect();
            let want: Vec<Code> = store
                .records()
                .filter(|r| r.sort == sort && cons.iter().all(|(s, v)| r.value(s) == v))
                .map(|r| r.code.unwrap())
                .collect();
            prop_assert_eq!(got, want);
        }
    }
}
