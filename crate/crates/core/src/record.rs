//! Typed predicate records: the nodes of the semantic net.
//!
//! Every sort has a fixed slot schema. The record's own code is held apart
//! from the slots; every other `cod_*` slot (and `theme`) references another
//! record by [`Code`] or is [`Value::Absent`].

use std::fmt;
use std::str::FromStr;

/// Identifier of a stored record. Assigned by the fact store, never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code(pub u64);

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Person,
    Organization,
    Thing,
    Machine,
    Animal,
    Nature,
    Place,
    Time,
    Property,
    Cause,
    Relation,
    Link,
    Abstr,
    Number,
    Action,
    Process,
    Thought,
    Message,
    Event,
}

/// The six families of the semantic representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Physical objects.
    Psi,
    /// Actions and processes.
    Phi,
    /// Events and states.
    Gamma,
    /// Categories: place, time, property.
    Delta,
    /// Sense relations.
    Mu,
    /// Abstract objects.
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Text,
    Int,
    Ref,
}

use SlotKind::{Int, Ref, Text};

const PERSON: &[(&str, SlotKind)] = &[
    ("sex", Text),
    ("age", Int),
    ("number", Text),
    ("first_name", Text),
    ("second_name", Text),
    ("cod_pl_birth", Ref),
    ("cod_dt_birth", Ref),
    ("nath", Text),
    ("lang", Text),
    ("face", Text),
    ("nose", Text),
    ("eyes", Text),
    ("hair", Text),
    ("stature", Text),
    ("prof", Text),
];
const ORGANIZATION: &[(&str, SlotKind)] = &[
    ("name_org", Text),
    ("typ_org", Text),
    ("number", Text),
    ("cod_loc_org", Ref),
    ("director", Text),
];
const THING: &[(&str, SlotKind)] = &[
    ("name", Text),
    ("maj_class", Text),
    ("number", Text),
    ("weight", Text),
    ("color", Text),
    ("length", Text),
    ("height", Text),
    ("thickness", Text),
    ("cod_owner", Ref),
];
const MACHINE: &[(&str, SlotKind)] = &[
    ("name", Text),
    ("function", Text),
    ("number", Text),
    ("typ_eng", Text),
    ("color", Text),
    ("trademark", Text),
    ("name_prod", Text),
    ("cod_owner", Ref),
];
const ANIMAL: &[(&str, SlotKind)] = &[
    ("typ_an", Text),
    ("number", Text),
    ("maj_class", Text),
    ("weight", Text),
    ("name", Text),
    ("color", Text),
    ("cod_owner", Ref),
];
const NATURE: &[(&str, SlotKind)] = &[
    ("typ_nat", Text),
    ("number", Text),
    ("name", Text),
    ("charact", Text),
];
const PLACE: &[(&str, SlotKind)] = &[
    ("country", Text),
    ("typ_reg", Text),
    ("name_reg", Text),
    ("ter_entity", Text),
    ("name_ter", Text),
    ("locat", Text),
    ("name_loc", Text),
    ("constr", Text),
    ("name_constr", Text),
    ("add_inf_constr", Text),
    ("fin_locat", Text),
    ("name_room", Text),
];
const TIME: &[(&str, SlotKind)] = &[
    ("year", Int),
    ("season", Text),
    ("month", Text),
    ("numb_mon", Int),
    ("day_week", Text),
    ("holyday", Text),
    ("part_day", Text),
    ("hours", Int),
    ("minutes", Int),
];
const PROPERTY: &[(&str, SlotKind)] = &[
    ("name", Text),
    ("scale", Text),
    ("state", Int),
    ("cod_obj", Ref),
];
const CAUSE: &[(&str, SlotKind)] = &[
    ("typ_cs", Text),
    ("typ_sit", Text),
    ("cod_cause", Ref),
    ("cod_res", Ref),
];
const RELATION: &[(&str, SlotKind)] = &[
    ("typ_rel", Text),
    ("emot_estim", Text),
    ("first_obj", Text),
    ("sec_obj", Text),
    ("cod_first", Ref),
    ("cod_sec", Ref),
];
const LINK: &[(&str, SlotKind)] = &[
    ("base_str", Text),
    ("sub_str", Text),
    ("cod_base", Ref),
    ("cod_sub", Ref),
    ("conj", Text),
    ("sem_char", Text),
];
const ABSTR: &[(&str, SlotKind)] = &[
    ("concept", Text),
    ("domain", Text),
    ("ad_prop", Text),
    ("cod_owner", Ref),
];
const NUMBER: &[(&str, SlotKind)] = &[
    ("descr_word", Text),
    ("numb", Int),
    ("cod_obj", Ref),
];
const ACTION: &[(&str, SlotKind)] = &[
    ("sem_typ_act", Text),
    ("sort_act", Text),
    ("neg_act", Text),
    ("tense", Text),
    ("char_act", Text),
    ("adverb", Text),
    ("word", Text),
    ("cod_sub", Ref),
    ("cod_obj", Ref),
    ("cod_from_obj", Ref),
    ("cod_to_obj", Ref),
    ("scale", Text),
    ("res_state", Int),
    ("cod_time", Ref),
    ("cod_loc", Ref),
    ("cod_way", Ref),
    ("cod_purp", Ref),
    ("cod_cause", Ref),
];
const PROCESS: &[(&str, SlotKind)] = &[
    ("sort_pr", Text),
    ("typ_pr", Text),
    ("neg_pr", Text),
    ("tense", Text),
    ("char_pr", Text),
    ("adverb", Text),
    ("word", Text),
    ("cod_sub", Ref),
    ("cod_obj", Ref),
    ("cod_start_pr", Ref),
    ("cod_end_pr", Ref),
    ("cod_start_loc", Ref),
    ("cod_end_loc", Ref),
    ("cod_way", Ref),
    ("cod_purp", Ref),
    ("cod_res", Ref),
];
const THOUGHT: &[(&str, SlotKind)] = &[
    ("sort_th", Text),
    ("neg_th", Text),
    ("tense", Text),
    ("char_th", Text),
    ("adverb", Text),
    ("word", Text),
    ("cod_sub", Ref),
    ("cod_obj", Ref),
    ("cod_time", Ref),
    ("cod_loc", Ref),
    ("cod_purp", Ref),
];
const MESSAGE: &[(&str, SlotKind)] = &[
    ("sort_ms", Text),
    ("neg_ms", Text),
    ("tense", Text),
    ("char_ms", Text),
    ("adverb", Text),
    ("word", Text),
    ("cod_sub", Ref),
    ("cod_adr", Ref),
    ("theme", Ref),
    ("cod_time", Ref),
    ("cod_loc", Ref),
    ("cod_purp", Ref),
    ("cod_way", Ref),
    ("cod_cause", Ref),
];
const EVENT: &[(&str, SlotKind)] = &[
    ("sort_evt", Text),
    ("neg_evt", Text),
    ("tense", Text),
    ("char_evt", Text),
    ("adverb", Text),
    ("word", Text),
    ("cod_sub", Ref),
    ("cod_obj", Ref),
    ("scale", Text),
    ("beg_state", Int),
    ("res_state", Int),
    ("cod_time", Ref),
    ("cod_loc", Ref),
    ("cod_cause", Ref),
];

/// Semantic roles a clause record can carry, mapped to per-sort slot names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Subject,
    Object,
    From,
    To,
    Time,
    Place,
    Way,
    Purpose,
    Cause,
}

impl Sort {
    pub const ALL: [Sort; 19] = [
        Sort::Person,
        Sort::Organization,
        Sort::Thing,
        Sort::Machine,
        Sort::Animal,
        Sort::Nature,
        Sort::Place,
        Sort::Time,
        Sort::Property,
        Sort::Cause,
        Sort::Relation,
        Sort::Link,
        Sort::Abstr,
        Sort::Number,
        Sort::Action,
        Sort::Process,
        Sort::Thought,
        Sort::Message,
        Sort::Event,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Sort::Person => "person",
            Sort::Organization => "organization",
            Sort::Thing => "thing",
            Sort::Machine => "machine",
            Sort::Animal => "animal",
            Sort::Nature => "nature",
            Sort::Place => "place",
            Sort::Time => "time",
            Sort::Property => "property",
            Sort::Cause => "cause",
            Sort::Relation => "relation",
            Sort::Link => "link",
            Sort::Abstr => "abstr",
            Sort::Number => "number",
            Sort::Action => "action",
            Sort::Process => "process",
            Sort::Thought => "thought",
            Sort::Message => "message",
            Sort::Event => "event",
        }
    }

    /// Name of the record's own code field (`cod_pers`, `cod_act`, ...).
    pub fn code_field(self) -> &'static str {
        match self {
            Sort::Person => "cod_pers",
            Sort::Organization => "cod_org",
            Sort::Thing => "cod_th",
            Sort::Machine => "cod_mach",
            Sort::Animal => "cod_an",
            Sort::Nature => "cod_nat",
            Sort::Place => "cod_pl",
            Sort::Time => "cod_tm",
            Sort::Property => "cod_prop",
            Sort::Cause => "cod_cs",
            Sort::Relation => "cod_rel",
            Sort::Link => "cod_link",
            Sort::Abstr => "cod_ab",
            Sort::Number => "cod_numb",
            Sort::Action => "cod_act",
            Sort::Process => "cod_pr",
            Sort::Thought => "cod_th",
            Sort::Message => "cod_ms",
            Sort::Event => "cod_evt",
        }
    }

    pub fn schema(self) -> &'static [(&'static str, SlotKind)] {
        match self {
            Sort::Person => PERSON,
            Sort::Organization => ORGANIZATION,
            Sort::Thing => THING,
            Sort::Machine => MACHINE,
            Sort::Animal => ANIMAL,
            Sort::Nature => NATURE,
            Sort::Place => PLACE,
            Sort::Time => TIME,
            Sort::Property => PROPERTY,
            Sort::Cause => CAUSE,
            Sort::Relation => RELATION,
            Sort::Link => LINK,
            Sort::Abstr => ABSTR,
            Sort::Number => NUMBER,
            Sort::Action => ACTION,
            Sort::Process => PROCESS,
            Sort::Thought => THOUGHT,
            Sort::Message => MESSAGE,
            Sort::Event => EVENT,
        }
    }

    pub fn slot_index(self, slot: &str) -> Option<usize> {
        self.schema().iter().position(|(name, _)| *name == slot)
    }

    pub fn family(self) -> Family {
        match self {
            Sort::Person
            | Sort::Organization
            | Sort::Thing
            | Sort::Machine
            | Sort::Animal
            | Sort::Nature => Family::Psi,
            Sort::Action | Sort::Process | Sort::Thought | Sort::Message => Family::Phi,
            Sort::Event => Family::Gamma,
            Sort::Place | Sort::Time | Sort::Property => Family::Delta,
            Sort::Cause | Sort::Relation | Sort::Link => Family::Mu,
            Sort::Abstr | Sort::Number => Family::Rho,
        }
    }

    pub fn is_clause(self) -> bool {
        matches!(self.family(), Family::Phi | Family::Gamma)
    }

    /// Fields whose agreement identifies an object of this sort.
    pub fn identity_fields(self) -> &'static [&'static str] {
        match self {
            Sort::Person => &["first_name", "second_name", "sex"],
            Sort::Organization => &["name_org"],
            Sort::Thing | Sort::Machine | Sort::Animal => &["name", "cod_owner"],
            Sort::Place => &[
                "country",
                "typ_reg",
                "name_reg",
                "ter_entity",
                "name_ter",
                "locat",
                "name_loc",
                "constr",
                "name_constr",
                "add_inf_constr",
                "fin_locat",
                "name_room",
            ],
            Sort::Time => &[
                "year",
                "season",
                "month",
                "numb_mon",
                "day_week",
                "holyday",
                "part_day",
                "hours",
                "minutes",
            ],
            _ => &[],
        }
    }

    /// The `sort_*` / `neg_*` / `char_*` slots of a clause sort.
    pub fn clause_flags(self) -> Option<(&'static str, &'static str, &'static str)> {
        Some(match self {
            Sort::Action => ("sort_act", "neg_act", "char_act"),
            Sort::Process => ("sort_pr", "neg_pr", "char_pr"),
            Sort::Thought => ("sort_th", "neg_th", "char_th"),
            Sort::Message => ("sort_ms", "neg_ms", "char_ms"),
            Sort::Event => ("sort_evt", "neg_evt", "char_evt"),
            _ => return None,
        })
    }

    /// Slot holding a semantic role for clause sorts.
    pub fn role_slot(self, role: Role) -> Option<&'static str> {
        use Role::*;
        let slot = match (self, role) {
            (_, Subject) => "cod_sub",
            (Sort::Message, Object) => "theme",
            (Sort::Message, To) => "cod_adr",
            (_, Object) => "cod_obj",
            (Sort::Action, From) => "cod_from_obj",
            (Sort::Action, To) => "cod_to_obj",
            (Sort::Process, To) => "cod_end_loc",
            (Sort::Process, Time) => "cod_start_pr",
            (Sort::Process, Place) => "cod_start_loc",
            (_, Time) => "cod_time",
            (_, Place) => "cod_loc",
            (_, Way) => "cod_way",
            (_, Purpose) => "cod_purp",
            (Sort::Process, Cause) => return None,
            (_, Cause) => "cod_cause",
            _ => return None,
        };
        self.slot_index(slot).map(|_| slot)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sort {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sort::ALL
            .iter()
            .copied()
            .find(|sort| sort.as_str() == s)
            .ok_or_else(|| format!("unknown sort `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Absent,
    Text(String),
    Int(i64),
    Ref(Code),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Value::Absent)
    }

    pub fn as_ref_code(&self) -> Option<Code> {
        match self {
            Value::Ref(c) => Some(*c),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    fn fits(&self, kind: SlotKind) -> bool {
        matches!(
            (self, kind),
            (Value::Absent, _)
                | (Value::Text(_), SlotKind::Text)
                | (Value::Int(_), SlotKind::Int)
                | (Value::Ref(_), SlotKind::Ref)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordError {
    UnknownSlot { sort: Sort, slot: String },
    WrongKind { sort: Sort, slot: String },
    InvalidValue { slot: String, value: String },
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordError::UnknownSlot { sort, slot } => write!(f, "sort {sort} has no slot `{slot}`"),
            RecordError::WrongKind { sort, slot } => {
                write!(f, "value has the wrong kind for {sort}.{slot}")
            }
            RecordError::InvalidValue { slot, value } => {
                write!(f, "`{value}` is not a valid value for {slot}")
            }
        }
    }
}

impl std::error::Error for RecordError {}

/// One node of the semantic net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateRecord {
    pub sort: Sort,
    /// Knowledge-base predicate (`tperson`, `taction`, ...) rather than a fact.
    pub kb: bool,
    /// Assigned on insertion into a fact store.
    pub code: Option<Code>,
    values: Vec<Value>,
}

impl PredicateRecord {
    pub fn new(sort: Sort) -> Self {
        PredicateRecord {
            sort,
            kb: false,
            code: None,
            values: vec![Value::Absent; sort.schema().len()],
        }
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, slot: &str) -> Option<&Value> {
        self.sort.slot_index(slot).map(|i| &self.values[i])
    }

    /// Slot value, with unknown slots reading as absent.
    pub fn value(&self, slot: &str) -> &Value {
        self.get(slot).unwrap_or(&Value::Absent)
    }

    pub fn try_set(&mut self, slot: &str, value: Value) -> Result<(), RecordError> {
        let i = self.sort.slot_index(slot).ok_or_else(|| RecordError::UnknownSlot {
            sort: self.sort,
            slot: slot.to_string(),
        })?;
        if !value.fits(self.sort.schema()[i].1) {
            return Err(RecordError::WrongKind {
                sort: self.sort,
                slot: slot.to_string(),
            });
        }
        self.values[i] = value;
        Ok(())
    }

    /// Sets a slot named by engine code; the slot must exist in the schema.
    pub fn set(&mut self, slot: &str, value: Value) {
        if let Err(e) = self.try_set(slot, value) {
            panic!("{e}");
        }
    }

    pub fn with(mut self, slot: &str, value: Value) -> Self {
        self.set(slot, value);
        self
    }

    /// `(slot, value)` pairs that are not absent, in schema order.
    pub fn present(&self) -> impl Iterator<Item = (&'static str, &Value)> {
        self.sort
            .schema()
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| !v.is_absent())
            .map(|((name, _), v)| (*name, v))
    }

    pub fn references(&self) -> impl Iterator<Item = Code> + '_ {
        self.values.iter().filter_map(Value::as_ref_code)
    }

    /// Enumerated slots hold one of their admitted values.
    pub fn validate(&self) -> Result<(), RecordError> {
        for (slot, value) in self.present() {
            let allowed: &[&str] = if slot.starts_with("sort_") {
                &["real", "possible", "necessary"]
            } else if slot == "tense" {
                &["past", "present", "future"]
            } else if slot.starts_with("char_") {
                &["complete", "incomplete"]
            } else if slot.starts_with("neg_") {
                &["yes", "no"]
            } else {
                continue;
            };
            let ok = value.as_text().is_some_and(|t| allowed.contains(&t));
            if !ok {
                return Err(RecordError::InvalidValue {
                    slot: slot.to_string(),
                    value: format_value(value),
                });
            }
        }
        Ok(())
    }
}

fn is_bare(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ' ' | '\''))
        && !s.ends_with(' ')
}

pub(crate) fn format_value(v: &Value) -> String {
    match v {
        Value::Absent => "ABSENT".to_string(),
        Value::Int(i) => i.to_string(),
        Value::Ref(c) => c.to_string(),
        Value::Text(s) if is_bare(s) && s != "ABSENT" => s.clone(),
        Value::Text(s) => {
            let mut out = String::from("\"");
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
    }
}

/// `sort#code{slot=value,...}`, absent slots omitted, schema order.
impl fmt::Display for PredicateRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kb {
            f.write_str("t")?;
        }
        write!(f, "{}", self.sort)?;
        match self.code {
            Some(c) => write!(f, "{c}")?,
            None => f.write_str("#?")?,
        }
        f.write_str("{")?;
        for (i, (slot, v)) in self.present().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{slot}={}", format_value(v))?;
        }
        f.write_str("}")
    }
}

/// Parses one dump-net line back into a record.
pub fn parse_record_line(line: &str) -> Result<PredicateRecord, String> {
    let (head, body) = line
        .split_once('{')
        .ok_or_else(|| "missing `{`".to_string())?;
    let body = body
        .strip_suffix('}')
        .ok_or_else(|| "missing closing `}`".to_string())?;
    let (sort_name, code) = head
        .split_once('#')
        .ok_or_else(|| "missing `#code`".to_string())?;
    let (kb, sort_name) = match sort_name.parse::<Sort>() {
        Ok(s) => (false, s),
        Err(e) => match sort_name.strip_prefix('t').map(str::parse::<Sort>) {
            Some(Ok(s)) => (true, s),
            _ => return Err(e),
        },
    };
    let code: u64 = code.parse().map_err(|_| format!("bad code `{code}`"))?;
    let mut rec = PredicateRecord::new(sort_name);
    rec.kb = kb;
    rec.code = Some(Code(code));

    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let start = i;
        while i < chars.len() && chars[i] != '=' {
            i += 1;
        }
        if i == chars.len() {
            return Err("slot without `=`".into());
        }
        let slot: String = chars[start..i].iter().collect();
        i += 1;
        let value = if chars.get(i) == Some(&'"') {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        match chars.get(i + 1) {
                            Some('n') => s.push('\n'),
                            Some(&c) => s.push(c),
                            None => return Err("dangling escape".into()),
                        }
                        i += 2;
                    }
                    Some(&c) => {
                        s.push(c);
                        i += 1;
                    }
                }
            }
            Value::Text(s)
        } else {
            let start = i;
            while i < chars.len() && chars[i] != ',' {
                i += 1;
            }
            let raw: String = chars[start..i].iter().collect();
            if let Some(c) = raw.strip_prefix('#') {
                Value::Ref(Code(c.parse().map_err(|_| format!("bad reference `{raw}`"))?))
            } else if raw.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+') {
                Value::Int(raw.parse().map_err(|_| format!("bad integer `{raw}`"))?)
            } else if raw.is_empty() {
                return Err(format!("empty value for `{slot}`"));
            } else {
                Value::Text(raw)
            }
        };
        rec.try_set(&slot, value).map_err(|e| e.to_string())?;
        match chars.get(i) {
            None => {}
            Some(',') => i += 1,
            Some(c) => return Err(format!("unexpected `{c}`")),
        }
    }
    Ok(rec)
}
