//! Operator definitions and the table that drives parsing and writing.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::term::{Term, TermKind};

/// The seven ISO operator specifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpType {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

impl OpType {
    pub fn parse(s: &str) -> Option<OpType> {
        Some(match s {
            "xfx" => OpType::Xfx,
            "xfy" => OpType::Xfy,
            "yfx" => OpType::Yfx,
            "fy" => OpType::Fy,
            "fx" => OpType::Fx,
            "xf" => OpType::Xf,
            "yf" => OpType::Yf,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OpType::Xfx => "xfx",
            OpType::Xfy => "xfy",
            OpType::Yfx => "yfx",
            OpType::Fy => "fy",
            OpType::Fx => "fx",
            OpType::Xf => "xf",
            OpType::Yf => "yf",
        }
    }

    pub fn fixity(self) -> Fixity {
        match self {
            OpType::Xfx | OpType::Xfy | OpType::Yfx => Fixity::Infix,
            OpType::Fy | OpType::Fx => Fixity::Prefix,
            OpType::Xf | OpType::Yf => Fixity::Postfix,
        }
    }
}

impl fmt::Display for OpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three fixity classes; a name holds at most one definition per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixity {
    Prefix,
    Infix,
    Postfix,
}

/// One operator definition: priority in `[1,1200]`, specifier, name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorDef {
    pub priority: u32,
    pub op_type: OpType,
    pub name: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct OpEntry {
    prefix: Option<(u32, OpType)>,
    infix: Option<(u32, OpType)>,
    postfix: Option<(u32, OpType)>,
}

impl OpEntry {
    fn slot(&self, fixity: Fixity) -> &Option<(u32, OpType)> {
        match fixity {
            Fixity::Prefix => &self.prefix,
            Fixity::Infix => &self.infix,
            Fixity::Postfix => &self.postfix,
        }
    }

    fn slot_mut(&mut self, fixity: Fixity) -> &mut Option<(u32, OpType)> {
        match fixity {
            Fixity::Prefix => &mut self.prefix,
            Fixity::Infix => &mut self.infix,
            Fixity::Postfix => &mut self.postfix,
        }
    }

    fn is_empty(&self) -> bool {
        self.prefix.is_none() && self.infix.is_none() && self.postfix.is_none()
    }
}

/// Maps `(name, fixity-class)` to a definition. Lookup is deterministic;
/// updates return new tables rather than mutating shared state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorTable {
    map: HashMap<String, OpEntry>,
}

static ISO_DEFAULTS: &[(u32, OpType, &str)] = &[
    (1200, OpType::Xfx, ":-"),
    (1200, OpType::Xfx, "-->"),
    (1200, OpType::Fx, ":-"),
    (1200, OpType::Fx, "?-"),
    // The Edinburgh declaration operators. Not in 13211-1, but common to
    // all four target systems and required to read ordinary sources
    // (`:- meta_predicate p(0, -).` and friends).
    (1150, OpType::Fx, "dynamic"),
    (1150, OpType::Fx, "discontiguous"),
    (1150, OpType::Fx, "multifile"),
    (1150, OpType::Fx, "meta_predicate"),
    (1150, OpType::Fx, "module_transparent"),
    (1150, OpType::Fx, "public"),
    (1150, OpType::Fx, "initialization"),
    (1100, OpType::Xfy, ";"),
    (1050, OpType::Xfy, "->"),
    (1000, OpType::Xfy, ","),
    (900, OpType::Fy, "\\+"),
    (700, OpType::Xfx, "="),
    (700, OpType::Xfx, "\\="),
    (700, OpType::Xfx, "=="),
    (700, OpType::Xfx, "\\=="),
    (700, OpType::Xfx, "@<"),
    (700, OpType::Xfx, "@>"),
    (700, OpType::Xfx, "@=<"),
    (700, OpType::Xfx, "@>="),
    (700, OpType::Xfx, "=.."),
    (700, OpType::Xfx, "is"),
    (700, OpType::Xfx, "=:="),
    (700, OpType::Xfx, "=\\="),
    (700, OpType::Xfx, "<"),
    (700, OpType::Xfx, ">"),
    (700, OpType::Xfx, "=<"),
    (700, OpType::Xfx, ">="),
    (500, OpType::Yfx, "+"),
    (500, OpType::Yfx, "-"),
    (500, OpType::Yfx, "/\\"),
    (500, OpType::Yfx, "\\/"),
    (500, OpType::Yfx, "xor"),
    (400, OpType::Yfx, "*"),
    (400, OpType::Yfx, "/"),
    (400, OpType::Yfx, "//"),
    (400, OpType::Yfx, "rem"),
    (400, OpType::Yfx, "mod"),
    (400, OpType::Yfx, "div"),
    (400, OpType::Yfx, "<<"),
    (400, OpType::Yfx, ">>"),
    (200, OpType::Xfx, "**"),
    (200, OpType::Xfy, "^"),
    // Module qualifier, Quintus lineage.
    (200, OpType::Xfy, ":"),
    (200, OpType::Fy, "-"),
    (200, OpType::Fy, "+"),
    (200, OpType::Fy, "\\"),
];

impl OperatorTable {
    /// A table with no operators at all.
    pub fn empty() -> OperatorTable {
        OperatorTable::default()
    }

    /// The standard startup table: the ISO 13211-1 operator set plus the
    /// Edinburgh declaration prefixes shared by the target dialects.
    pub fn default_table() -> OperatorTable {
        let mut t = OperatorTable::empty();
        for &(p, ty, name) in ISO_DEFAULTS {
            t.insert(p, ty, name).expect("default table is valid");
        }
        t
    }

    pub fn lookup(&self, name: &str, fixity: Fixity) -> Option<(u32, OpType)> {
        *self.map.get(name)?.slot(fixity)
    }

    pub fn prefix(&self, name: &str) -> Option<(u32, OpType)> {
        self.lookup(name, Fixity::Prefix)
    }

    pub fn infix(&self, name: &str) -> Option<(u32, OpType)> {
        self.lookup(name, Fixity::Infix)
    }

    pub fn postfix(&self, name: &str) -> Option<(u32, OpType)> {
        self.lookup(name, Fixity::Postfix)
    }

    /// True if the name has a definition in any fixity class.
    pub fn is_operator(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    /// Highest priority among the name's definitions, if any.
    pub fn max_priority(&self, name: &str) -> Option<u32> {
        let e = self.map.get(name)?;
        [e.prefix, e.infix, e.postfix]
            .iter()
            .filter_map(|s| s.map(|(p, _)| p))
            .max()
    }

    /// Adds (or, with priority 0, removes) a definition in place.
    /// User-facing paths go through validation first; `,` is reserved.
    fn insert(&mut self, priority: u32, op_type: OpType, name: &str) -> Result<(), OpError> {
        if priority > 1200 {
            return Err(OpError::BadPriority(priority));
        }
        if name.is_empty() || name == "|" || name == "[]" || name == "{}" {
            return Err(OpError::BadName(name.to_string()));
        }
        let fixity = op_type.fixity();
        if priority == 0 {
            if let Some(e) = self.map.get_mut(name) {
                *e.slot_mut(fixity) = None;
                if e.is_empty() {
                    self.map.remove(name);
                }
            }
            return Ok(());
        }
        let entry = self.map.entry(name.to_string()).or_default();
        *entry.slot_mut(fixity) = Some((priority, op_type));
        Ok(())
    }

    /// Returns a new table with the definition applied; the receiver is
    /// untouched.
    pub fn with_op(&self, priority: u32, op_type: OpType, name: &str) -> Result<OperatorTable, OpError> {
        if name == "," {
            return Err(OpError::BadName(name.to_string()));
        }
        let mut next = self.clone();
        next.insert(priority, op_type, name)?;
        Ok(next)
    }

    /// All definitions, sorted by (priority desc, name, specifier) for
    /// stable display.
    pub fn definitions(&self) -> Vec<OperatorDef> {
        let mut defs = Vec::new();
        for (name, entry) in &self.map {
            for slot in [entry.prefix, entry.infix, entry.postfix] {
                if let Some((priority, op_type)) = slot {
                    defs.push(OperatorDef {
                        priority,
                        op_type,
                        name: name.clone(),
                    });
                }
            }
        }
        defs.sort_by(|a, b| {
            b.priority
                .cmp(&a.priority)
                .then_with(|| a.name.cmp(&b.name))
                .then_with(|| a.op_type.as_str().cmp(b.op_type.as_str()))
        });
        defs
    }
}

/// Errors from applying an `op/3` directive.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("operator priority {0} outside [0,1200]")]
    BadPriority(u32),
    #[error("invalid operator specifier: {0}")]
    BadType(String),
    #[error("invalid operator name: {0:?}")]
    BadName(String),
}

/// Applies an `op(Priority, Type, Name)` goal to a table, returning the
/// updated table. `Name` may be an atom, a module-qualified atom (the
/// qualifier is ignored), or a list of either. Priority 0 removes the
/// definition for the name's fixity class.
pub fn apply_op_directive(table: &OperatorTable, d: &Term) -> Result<OperatorTable, OpError> {
    let args = d
        .match_compound("op", 3)
        .ok_or_else(|| OpError::BadName(format!("{:?}", d.functor_arity())))?;

    let priority = match &args[0].kind {
        TermKind::Int(i) => u32::try_from(i).map_err(|_| OpError::BadPriority(u32::MAX))?,
        _ => return Err(OpError::BadPriority(u32::MAX)),
    };
    let op_type = args[1]
        .as_atom()
        .and_then(OpType::parse)
        .ok_or_else(|| OpError::BadType(format!("{:?}", args[1].kind)))?;

    let mut names = Vec::new();
    collect_op_names(&args[2], &mut names)?;

    let mut next = table.clone();
    for name in names {
        if name == "," {
            return Err(OpError::BadName(name));
        }
        next.insert(priority, op_type, &name)?;
    }
    Ok(next)
}

fn collect_op_names(t: &Term, out: &mut Vec<String>) -> Result<(), OpError> {
    match &t.kind {
        TermKind::Atom(n) if n != "[]" => {
            out.push(n.clone());
            Ok(())
        }
        TermKind::Atom(_) => Ok(()), // [] terminates a name list
        TermKind::Compound(f, args) if f == "." && args.len() == 2 => {
            collect_op_names(&args[0], out)?;
            collect_op_names(&args[1], out)
        }
        // Module-qualified name: scope qualifiers are not modelled in the
        // table, the bare name is registered.
        TermKind::Compound(f, args) if f == ":" && args.len() == 2 => {
            collect_op_names(&args[1], out)
        }
        _ => Err(OpError::BadName(format!("{:?}", t.kind))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_has_core_operators() {
        let t = OperatorTable::default_table();
        assert_eq!(t.infix(":-"), Some((1200, OpType::Xfx)));
        assert_eq!(t.prefix(":-"), Some((1200, OpType::Fx)));
        assert_eq!(t.infix(","), Some((1000, OpType::Xfy)));
        assert_eq!(t.prefix("\\+"), Some((900, OpType::Fy)));
        assert_eq!(t.infix(":"), Some((200, OpType::Xfy)));
        assert_eq!(t.prefix("meta_predicate"), Some((1150, OpType::Fx)));
    }

    #[test]
    fn with_op_adds_and_removes() {
        let t = OperatorTable::default_table();
        let d = Term::compound(
            "op",
            vec![Term::int(700), Term::atom("xfx"), Term::atom("===")],
        );
        let t2 = apply_op_directive(&t, &d).unwrap();
        assert_eq!(t2.infix("==="), Some((700, OpType::Xfx)));
        assert!(!t.is_operator("==="));

        let rm = Term::compound(
            "op",
            vec![Term::int(0), Term::atom("xfx"), Term::atom("===")],
        );
        let t3 = apply_op_directive(&t2, &rm).unwrap();
        assert!(!t3.is_operator("==="));
    }

    #[test]
    fn op_directive_validation() {
        let t = OperatorTable::default_table();
        let bad_pri = Term::compound(
            "op",
            vec![Term::int(1300), Term::atom("xfx"), Term::atom("a")],
        );
        assert!(matches!(
            apply_op_directive(&t, &bad_pri),
            Err(OpError::BadPriority(1300))
        ));
        let bad_ty = Term::compound(
            "op",
            vec![Term::int(700), Term::atom("zfz"), Term::atom("a")],
        );
        assert!(matches!(
            apply_op_directive(&t, &bad_ty),
            Err(OpError::BadType(_))
        ));
        let bad_name = Term::compound(
            "op",
            vec![Term::int(700), Term::atom("xfx"), Term::atom(",")],
        );
        assert!(matches!(
            apply_op_directive(&t, &bad_name),
            Err(OpError::BadName(_))
        ));
    }

    #[test]
    fn name_lists_and_qualified_names() {
        let t = OperatorTable::default_table();
        let d = Term::compound(
            "op",
            vec![
                Term::int(600),
                Term::atom("xfy"),
                Term::list(vec![
                    Term::atom("aaa"),
                    Term::compound(":", vec![Term::atom("user"), Term::atom("bbb")]),
                ]),
            ],
        );
        let t2 = apply_op_directive(&t, &d).unwrap();
        assert_eq!(t2.infix("aaa"), Some((600, OpType::Xfy)));
        assert_eq!(t2.infix("bbb"), Some((600, OpType::Xfy)));
    }
}
