//! Per-dialect knowledge: the core feature matrix, flag tables, and
//! built-in/library predicate catalogs, loaded from profile files.
//!
//! A profile file has a `dialect:` header and three sections:
//!
//! ```text
//! [features]    key: value (optional qualifier)
//! [flags]       name: ground-term
//! [predicates]  name/arity origin ["divergence note"]
//! ```
//!
//! Origins are `builtin`, `library(Name)`, or `emulation(Dialect)` for
//! predicates supplied by a dialect-emulation layer. Catalogs are
//! necessarily incomplete; absence of an indicator means "not known to
//! be available", and downstream policy decides how loudly to say so.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::reader::{parse_term_text, Indicator, OperatorTable, ReadOptions, Term};

/// Identifier of one dialect: lowercase, unique within a catalog set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DialectId(String);

impl DialectId {
    pub fn new(name: &str) -> Result<DialectId, DialectError> {
        if name.is_empty()
            || !name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        {
            return Err(DialectError::BadDialectName(name.to_string()));
        }
        Ok(DialectId(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DialectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One cell of the feature matrix: a short enumerated value plus an
/// optional qualifier carrying a caveat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureValue {
    pub value: String,
    pub qualifier: Option<String>,
}

impl FeatureValue {
    pub fn plain(value: &str) -> FeatureValue {
        FeatureValue {
            value: value.to_string(),
            qualifier: None,
        }
    }

    pub fn with_qualifier(value: &str, qualifier: &str) -> FeatureValue {
        FeatureValue {
            value: value.to_string(),
            qualifier: Some(qualifier.to_string()),
        }
    }

    pub fn is_yes(&self) -> bool {
        self.value == "yes"
    }

    pub fn is_no(&self) -> bool {
        self.value == "no"
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{} ({})", self.value, q),
            None => f.write_str(&self.value),
        }
    }
}

/// Where a catalogued predicate comes from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PredOrigin {
    Builtin,
    Library(String),
    Emulation(String),
}

impl fmt::Display for PredOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredOrigin::Builtin => f.write_str("builtin"),
            PredOrigin::Library(l) => write!(f, "library({l})"),
            PredOrigin::Emulation(d) => write!(f, "emulation({d})"),
        }
    }
}

/// One dialect's feature row-set, flag table, and predicate catalog.
#[derive(Debug, Clone)]
pub struct DialectProfile {
    pub id: DialectId,
    features: BTreeMap<String, FeatureValue>,
    feature_order: Vec<String>,
    flags: BTreeMap<String, Term>,
    predicates: BTreeMap<Indicator, BTreeSet<PredOrigin>>,
    divergences: BTreeMap<Indicator, String>,
}

impl DialectProfile {
    pub fn feature(&self, key: &str) -> Option<&FeatureValue> {
        self.features.get(key)
    }

    pub fn flag(&self, name: &str) -> Option<&Term> {
        self.flags.get(name)
    }

    pub fn flags(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.flags.iter()
    }

    pub fn has_predicate(&self, pi: &Indicator) -> bool {
        self.predicates.contains_key(pi)
    }

    pub fn origins(&self, pi: &Indicator) -> Option<&BTreeSet<PredOrigin>> {
        self.predicates.get(pi)
    }

    pub fn is_builtin(&self, pi: &Indicator) -> bool {
        self.predicates
            .get(pi)
            .is_some_and(|o| o.contains(&PredOrigin::Builtin))
    }

    pub fn divergence_note(&self, pi: &Indicator) -> Option<&str> {
        self.divergences.get(pi).map(|s| s.as_str())
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Indicator, &BTreeSet<PredOrigin>)> {
        self.predicates.iter()
    }
}

/// Value sets for the shipped feature keys. Keys outside this list are
/// user extensions and accept any value.
static KNOWN_VALUE_SETS: &[(&str, &[&str])] = &[
    ("iso", &["yes", "no"]),
    ("module_2", &["yes", "no"]),
    ("module_3", &["yes", "no"]),
    ("use_module_2", &["yes", "no"]),
    ("use_module_3", &["yes", "no"]),
    ("operators_and_modules", &["local", "global", "both"]),
    ("export_builtin", &["yes", "no"]),
    ("redefine_builtin", &["yes", "no"]),
    ("term_expansion", &["yes", "no"]),
    ("goal_expansion", &["yes", "no"]),
    ("compilation_model", &["file", "direct"]),
    ("directives", &["special", "goal"]),
    ("attributed_variables", &["yes", "no"]),
    ("coroutining", &["yes", "no"]),
    ("global_variables", &["yes", "no"]),
    ("tabling", &["yes", "no"]),
    ("threads", &["yes", "no"]),
    ("unicode", &["yes", "no"]),
    ("set_unknown_flag", &["yes", "no", "fail", "error", "ignore"]),
    ("get_unknown_flag", &["yes", "no", "fail", "error", "ignore"]),
    ("provide_unknown_option", &["error", "ignore", "fail", "warning"]),
];

#[derive(Debug, Error)]
pub enum DialectError {
    #[error("unknown dialect: {0}")]
    UnknownDialect(String),
    #[error("unknown feature key: {0}")]
    UnknownFeature(String),
    #[error("dialect {dialect} is missing feature key `{key}`")]
    MissingFeature { dialect: String, key: String },
    #[error("duplicate dialect: {0}")]
    DuplicateDialect(String),
    #[error("invalid dialect name: {0:?}")]
    BadDialectName(String),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("catalog error: {0}")]
    Io(String),
}

/// The loaded set of dialect profiles plus the declared feature keys in
/// their canonical display order.
#[derive(Debug, Clone, Default)]
pub struct DialectStore {
    profiles: Vec<DialectProfile>,
    key_order: Vec<String>,
}

impl DialectStore {
    /// The four profiles shipped with the toolkit.
    pub fn shipped() -> DialectStore {
        let sources = [
            ("ciao.profile", include_str!("../catalogs/ciao.profile")),
            ("sicstus.profile", include_str!("../catalogs/sicstus.profile")),
            ("swi.profile", include_str!("../catalogs/swi.profile")),
            ("yap.profile", include_str!("../catalogs/yap.profile")),
        ];
        let mut profiles = Vec::new();
        for (name, text) in sources {
            profiles.push(parse_profile(text, name).expect("shipped profile parses"));
        }
        build_store(profiles).expect("shipped profiles are total")
    }

    pub fn from_profiles(profiles: Vec<DialectProfile>) -> Result<DialectStore, DialectError> {
        build_store(profiles)
    }

    pub fn profiles(&self) -> &[DialectProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Feature keys in declared (first-appearance) order.
    pub fn feature_keys(&self) -> &[String] {
        &self.key_order
    }

    pub fn get(&self, dialect: &str) -> Result<&DialectProfile, DialectError> {
        self.profiles
            .iter()
            .find(|p| p.id.as_str() == dialect)
            .ok_or_else(|| DialectError::UnknownDialect(dialect.to_string()))
    }

    /// The feature matrix cell for (dialect, key).
    pub fn feature(&self, dialect: &str, key: &str) -> Result<&FeatureValue, DialectError> {
        let p = self.get(dialect)?;
        if !self.key_order.iter().any(|k| k == key) {
            return Err(DialectError::UnknownFeature(key.to_string()));
        }
        p.feature(key)
            .ok_or_else(|| DialectError::MissingFeature {
                dialect: dialect.to_string(),
                key: key.to_string(),
            })
    }

    pub fn has_predicate(&self, dialect: &str, pi: &Indicator) -> Result<bool, DialectError> {
        Ok(self.get(dialect)?.has_predicate(pi))
    }

    /// Exactly the keys where the two dialects differ, sorted by key.
    pub fn diff_dialects(
        &self,
        a: &str,
        b: &str,
    ) -> Result<Vec<(String, FeatureValue, FeatureValue)>, DialectError> {
        let pa = self.get(a)?;
        let pb = self.get(b)?;
        let mut keys: Vec<&String> = self.key_order.iter().collect();
        keys.sort();
        let mut out = Vec::new();
        for key in keys {
            let (va, vb) = match (pa.feature(key), pb.feature(key)) {
                (Some(va), Some(vb)) => (va, vb),
                _ => continue,
            };
            if va != vb {
                out.push((key.clone(), va.clone(), vb.clone()));
            }
        }
        Ok(out)
    }
}

fn build_store(profiles: Vec<DialectProfile>) -> Result<DialectStore, DialectError> {
    let mut seen = BTreeSet::new();
    for p in &profiles {
        if !seen.insert(p.id.clone()) {
            return Err(DialectError::DuplicateDialect(p.id.to_string()));
        }
    }

    // Declared keys: union over profiles, first-appearance order.
    let mut key_order: Vec<String> = Vec::new();
    for p in &profiles {
        for k in &p.feature_order {
            if !key_order.contains(k) {
                key_order.push(k.clone());
            }
        }
    }

    // Totality: every declared key resolves for every dialect.
    for p in &profiles {
        for k in &key_order {
            if p.feature(k).is_none() {
                return Err(DialectError::MissingFeature {
                    dialect: p.id.to_string(),
                    key: k.clone(),
                });
            }
        }
    }

    Ok(DialectStore {
        profiles,
        key_order,
    })
}

/// Loads every `*.profile` file in a directory (sorted by file name).
pub fn load_profiles(catalog_dir: &Path) -> Result<DialectStore, DialectError> {
    let mut paths: Vec<_> = std::fs::read_dir(catalog_dir)
        .map_err(|e| DialectError::Io(format!("{}: {e}", catalog_dir.display())))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "profile"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(DialectError::Io(format!(
            "no .profile files in {}",
            catalog_dir.display()
        )));
    }
    let mut profiles = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| DialectError::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        profiles.push(parse_profile(&text, &name)?);
    }
    build_store(profiles)
}

#[derive(PartialEq)]
enum Section {
    None,
    Features,
    Flags,
    Predicates,
}

/// Parses one profile file.
pub fn parse_profile(text: &str, file: &str) -> Result<DialectProfile, DialectError> {
    let err = |line: usize, message: String| DialectError::Parse {
        file: file.to_string(),
        line,
        message,
    };

    let mut id: Option<DialectId> = None;
    let mut section = Section::None;
    let mut features = BTreeMap::new();
    let mut feature_order = Vec::new();
    let mut flags = BTreeMap::new();
    let mut predicates: BTreeMap<Indicator, BTreeSet<PredOrigin>> = BTreeMap::new();
    let mut divergences = BTreeMap::new();

    let table = OperatorTable::default_table();
    let opts = ReadOptions::default();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[features]" => {
                section = Section::Features;
                continue;
            }
            "[flags]" => {
                section = Section::Flags;
                continue;
            }
            "[predicates]" => {
                section = Section::Predicates;
                continue;
            }
            _ => {}
        }
        if line.starts_with('[') {
            return Err(err(lineno, format!("unknown section {line}")));
        }

        if section == Section::None {
            let Some(rest) = line.strip_prefix("dialect:") else {
                return Err(err(lineno, "expected `dialect: <name>`".to_string()));
            };
            id = Some(DialectId::new(rest.trim())?);
            continue;
        }

        match section {
            Section::Features => {
                let (key, rest) = line
                    .split_once(':')
                    .ok_or_else(|| err(lineno, "expected `key: value`".to_string()))?;
                let key = key.trim().to_string();
                let (value, qualifier) = split_value_qualifier(rest.trim());
                if value.is_empty() {
                    return Err(err(lineno, format!("feature `{key}` has no value")));
                }
                if let Some((_, allowed)) =
                    KNOWN_VALUE_SETS.iter().find(|(k, _)| *k == key)
                {
                    if !allowed.contains(&value.as_str()) {
                        return Err(err(
                            lineno,
                            format!("feature `{key}` value `{value}` not in {allowed:?}"),
                        ));
                    }
                }
                if features
                    .insert(key.clone(), FeatureValue { value, qualifier })
                    .is_some()
                {
                    return Err(err(lineno, format!("feature `{key}` repeated")));
                }
                feature_order.push(key);
            }
            Section::Flags => {
                let (name, rest) = line
                    .split_once(':')
                    .ok_or_else(|| err(lineno, "expected `flag: value`".to_string()))?;
                let value = parse_term_text(rest.trim(), &table, &opts, file)
                    .map_err(|e| err(lineno, format!("bad flag value: {e}")))?;
                if !value.is_ground() {
                    return Err(err(lineno, "flag values must be ground".to_string()));
                }
                flags.insert(name.trim().to_string(), value);
            }
            Section::Predicates => {
                let (pi, origin, note) = parse_predicate_line(line)
                    .ok_or_else(|| err(lineno, format!("bad predicate entry: {line}")))?;
                let origins = predicates.entry(pi.clone()).or_default();
                if !origins.insert(origin) {
                    return Err(err(lineno, format!("duplicate (indicator, origin): {pi}")));
                }
                if let Some(n) = note {
                    divergences.insert(pi, n);
                }
            }
            Section::None => unreachable!(),
        }
    }

    let id = id.ok_or_else(|| err(0, "missing `dialect:` header".to_string()))?;
    let dialect_flag = Term::atom(id.as_str());
    match flags.get("dialect") {
        Some(t) if *t == dialect_flag => {}
        _ => {
            return Err(err(
                0,
                format!("flag table must map `dialect` to `{id}`"),
            ));
        }
    }

    Ok(DialectProfile {
        id,
        features,
        feature_order,
        flags,
        predicates,
        divergences,
    })
}

/// Splits `value (qualifier)`; the qualifier may itself contain parens.
fn split_value_qualifier(s: &str) -> (String, Option<String>) {
    if s.ends_with(')') {
        if let Some(open) = s.find(" (") {
            let value = s[..open].trim().to_string();
            let qualifier = s[open + 2..s.len() - 1].to_string();
            return (value, Some(qualifier));
        }
    }
    (s.to_string(), None)
}

/// Parses `indicator origin ["note"]`; the indicator name may be quoted.
fn parse_predicate_line(line: &str) -> Option<(Indicator, PredOrigin, Option<String>)> {
    let (head, note) = match line.find('"') {
        Some(q) => {
            let note = line[q..].trim();
            let note = note.strip_prefix('"')?.strip_suffix('"')?;
            (line[..q].trim(), Some(note.to_string()))
        }
        None => (line.trim(), None),
    };
    let (ind_text, origin_text) = head.split_once(char::is_whitespace)?;
    let (raw_name, arity) = ind_text.rsplit_once('/')?;
    let name = if raw_name.len() >= 2 && raw_name.starts_with('\'') && raw_name.ends_with('\'') {
        raw_name[1..raw_name.len() - 1].replace("''", "'")
    } else {
        raw_name.to_string()
    };
    if name.is_empty() {
        return None;
    }
    let pi = Indicator::new(name, arity.parse().ok()?);

    let origin_text = origin_text.trim();
    let origin = if origin_text == "builtin" {
        PredOrigin::Builtin
    } else if let Some(inner) = origin_text
        .strip_prefix("library(")
        .and_then(|s| s.strip_suffix(')'))
    {
        PredOrigin::Library(inner.to_string())
    } else if let Some(inner) = origin_text
        .strip_prefix("emulation(")
        .and_then(|s| s.strip_suffix(')'))
    {
        PredOrigin::Emulation(inner.to_string())
    } else {
        return None;
    };
    Some((pi, origin, note))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_profiles_load() {
        let store = DialectStore::shipped();
        assert_eq!(store.len(), 4);
        let ids: Vec<&str> = store.profiles().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["ciao", "sicstus", "swi", "yap"]);
    }

    #[test]
    fn feature_lookups_match_the_matrix() {
        let store = DialectStore::shipped();
        assert!(store.feature("sicstus", "threads").unwrap().is_no());
        assert!(store.feature("yap", "tabling").unwrap().is_yes());
        assert_eq!(
            store.feature("ciao", "provide_unknown_option").unwrap().value,
            "error"
        );
        assert!(matches!(
            store.feature("ciao", "unknown_option_policy"),
            Err(DialectError::UnknownFeature(_))
        ));
        assert!(matches!(
            store.feature("gprolog", "threads"),
            Err(DialectError::UnknownDialect(_))
        ));
    }

    #[test]
    fn predicate_catalog_lookups() {
        let store = DialectStore::shipped();
        let nb_setarg = Indicator::new("nb_setarg", 3);
        assert!(store.has_predicate("swi", &nb_setarg).unwrap());
        assert!(!store.has_predicate("sicstus", &nb_setarg).unwrap());
        assert!(store.has_predicate("swi", &Indicator::new("member", 2)).unwrap());
        // YAP provides it via SWI emulation.
        assert!(store.has_predicate("yap", &nb_setarg).unwrap());
        assert!(store
            .get("yap")
            .unwrap()
            .origins(&nb_setarg)
            .unwrap()
            .contains(&PredOrigin::Emulation("swi".into())));
    }

    #[test]
    fn diff_examples() {
        let store = DialectStore::shipped();
        assert!(store.diff_dialects("swi", "swi").unwrap().is_empty());

        let d = store.diff_dialects("swi", "sicstus").unwrap();
        let threads = d.iter().find(|(k, _, _)| k == "threads").unwrap();
        assert_eq!(threads.1.value, "yes");
        assert_eq!(threads.2.value, "no");

        // Both yes: excluded from the diff.
        let d = store.diff_dialects("ciao", "yap").unwrap();
        assert!(!d.iter().any(|(k, _, _)| k == "tabling"));

        // Symmetry with swapped values.
        let ab = store.diff_dialects("swi", "ciao").unwrap();
        let ba = store.diff_dialects("ciao", "swi").unwrap();
        assert_eq!(ab.len(), ba.len());
        for ((k1, a1, b1), (k2, a2, b2)) in ab.iter().zip(ba.iter()) {
            assert_eq!(k1, k2);
            assert_eq!(a1, b2);
            assert_eq!(b1, a2);
        }
    }

    #[test]
    fn totality_over_declared_keys() {
        let store = DialectStore::shipped();
        for p in store.profiles() {
            for key in store.feature_keys() {
                assert!(
                    store.feature(p.id.as_str(), key).is_ok(),
                    "{} missing {key}",
                    p.id
                );
            }
        }
    }

    #[test]
    fn extension_dialect_joins_the_store() {
        let store = DialectStore::shipped();
        let mut text = String::from("dialect: gprolog\n\n[features]\n");
        for key in store.feature_keys() {
            let v = if key == "operators_and_modules" {
                "global"
            } else if key == "compilation_model" {
                "direct"
            } else if key == "directives" {
                "goal"
            } else if key == "library_license" {
                "LGPL"
            } else if key.ends_with("unknown_flag") {
                "error"
            } else if key == "provide_unknown_option" {
                "error"
            } else {
                "no"
            };
            text.push_str(&format!("{key}: {v}\n"));
        }
        text.push_str("\n[flags]\ndialect: gprolog\n\n[predicates]\ntrue/0 builtin\n");
        let extra = parse_profile(&text, "gprolog.profile").unwrap();
        let mut profiles = store.profiles().to_vec();
        profiles.push(extra);
        let bigger = DialectStore::from_profiles(profiles).unwrap();
        assert_eq!(bigger.len(), 5);
        assert!(bigger.feature("gprolog", "threads").unwrap().is_no());
    }

    #[test]
    fn missing_feature_is_rejected() {
        let text = "dialect: tiny\n\n[features]\niso: yes\n\n[flags]\ndialect: tiny\n\n[predicates]\ntrue/0 builtin\n";
        let tiny = parse_profile(text, "tiny.profile").unwrap();
        let mut profiles = DialectStore::shipped().profiles().to_vec();
        profiles.push(tiny);
        assert!(matches!(
            DialectStore::from_profiles(profiles),
            Err(DialectError::MissingFeature { .. })
        ));
    }

    #[test]
    fn duplicate_dialect_is_rejected() {
        let mut profiles = DialectStore::shipped().profiles().to_vec();
        profiles.push(profiles[0].clone());
        assert!(matches!(
            DialectStore::from_profiles(profiles),
            Err(DialectError::DuplicateDialect(_))
        ));
    }

    #[test]
    fn value_set_validation() {
        let text = "dialect: bad\n\n[features]\ntabling: maybe\n\n[flags]\ndialect: bad\n\n[predicates]\n";
        assert!(matches!(
            parse_profile(text, "bad.profile"),
            Err(DialectError::Parse { .. })
        ));
    }

    #[test]
    fn flags_are_ground_terms() {
        let store = DialectStore::shipped();
        for p in store.profiles() {
            let d = p.flag("dialect").expect("dialect flag required");
            assert_eq!(d, &Term::atom(p.id.as_str()));
            for (_, v) in p.flags() {
                assert!(v.is_ground());
            }
        }
    }

    #[test]
    fn divergence_notes() {
        let store = DialectStore::shipped();
        for d in ["ciao", "sicstus", "swi", "yap"] {
            assert!(store
                .get(d)
                .unwrap()
                .divergence_note(&Indicator::new("delete", 3))
                .is_some());
        }
    }

    #[test]
    fn quoted_indicators_parse() {
        let (pi, origin, _) = parse_predicate_line("','/2 builtin").unwrap();
        assert_eq!(pi, Indicator::new(",", 2));
        assert_eq!(origin, PredOrigin::Builtin);
        let (pi, _, note) =
            parse_predicate_line("delete/3 library(lists) \"semantics differ\"").unwrap();
        assert_eq!(pi, Indicator::new("delete", 3));
        assert_eq!(note.as_deref(), Some("semantics differ"));
    }
}
