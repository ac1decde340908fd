//! Static evaluation of the restricted goal language admitted inside
//! `:- if(Goal)`, with three-valued results.
//!
//! The evaluable subset is closed: `true`, `fail`/`false`, conjunction,
//! disjunction, negation, `current_prolog_flag/2`,
//! `current_predicate/1` (with a `Name/Arity` argument),
//! `prolog_load_context/2`, and `catch/3` as the feature-probe idiom.
//! A `catch/3` probe succeeds iff the guarded goal's principal predicate
//! indicator is in the dialect catalog; otherwise its recovery goal is
//! evaluated. Everything else evaluates to `unknown`, which the unknown
//! policy turns into an error or a warned `false`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dialects::{DialectError, DialectStore};
use crate::reader::{write_term, OperatorTable, Term, TermKind};

/// Three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriBool {
    True,
    False,
    Unknown,
}

impl TriBool {
    pub fn from_bool(b: bool) -> TriBool {
        if b {
            TriBool::True
        } else {
            TriBool::False
        }
    }

    /// Kleene conjunction.
    pub fn and(self, other: TriBool) -> TriBool {
        match (self, other) {
            (TriBool::False, _) | (_, TriBool::False) => TriBool::False,
            (TriBool::True, TriBool::True) => TriBool::True,
            _ => TriBool::Unknown,
        }
    }

    /// Kleene disjunction.
    pub fn or(self, other: TriBool) -> TriBool {
        match (self, other) {
            (TriBool::True, _) | (_, TriBool::True) => TriBool::True,
            (TriBool::False, TriBool::False) => TriBool::False,
            _ => TriBool::Unknown,
        }
    }

    /// Kleene negation: swaps true/false, fixes unknown.
    pub fn not(self) -> TriBool {
        match self {
            TriBool::True => TriBool::False,
            TriBool::False => TriBool::True,
            TriBool::Unknown => TriBool::Unknown,
        }
    }
}

impl fmt::Display for TriBool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriBool::True => "true",
            TriBool::False => "false",
            TriBool::Unknown => "unknown",
        })
    }
}

/// What to do when a condition evaluates to `unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    Error,
    #[default]
    AssumeFalseWarn,
}

/// Everything `evaluate` needs: the target dialect, the profile store,
/// the load-context key/value map (always contains `dialect`), and the
/// unknown policy.
#[derive(Debug, Clone)]
pub struct EvalContext<'a> {
    pub dialect: String,
    pub profiles: &'a DialectStore,
    pub load_context: BTreeMap<String, Term>,
    pub unknown_policy: UnknownPolicy,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        dialect: &str,
        profiles: &'a DialectStore,
        unknown_policy: UnknownPolicy,
    ) -> Result<EvalContext<'a>, DialectError> {
        profiles.get(dialect)?;
        let mut load_context = BTreeMap::new();
        load_context.insert("dialect".to_string(), Term::atom(dialect));
        Ok(EvalContext {
            dialect: dialect.to_string(),
            profiles,
            load_context,
            unknown_policy,
        })
    }

    pub fn set_load_context(&mut self, key: &str, value: Term) {
        self.load_context.insert(key.to_string(), value);
    }
}

#[derive(Debug, Clone, Error)]
pub enum CondError {
    #[error("condition contains variables outside accepted probe shapes: {0}")]
    NonGroundCondition(String),
    #[error("condition evaluated to unknown under policy `error`: {0}")]
    PolicyError(String),
}

/// One node of an evaluation trace, mirroring the recursion.
#[derive(Debug, Clone)]
pub struct EvalTrace {
    pub goal: Term,
    pub result: TriBool,
    pub note: Option<String>,
    pub children: Vec<EvalTrace>,
}

impl EvalTrace {
    fn leaf(goal: &Term, result: TriBool, note: Option<String>) -> EvalTrace {
        EvalTrace {
            goal: goal.clone(),
            result,
            note,
            children: Vec::new(),
        }
    }

    fn node(goal: &Term, result: TriBool, children: Vec<EvalTrace>) -> EvalTrace {
        EvalTrace {
            goal: goal.clone(),
            result,
            note: None,
            children,
        }
    }

    /// Indented rendering for diagnostics.
    pub fn render(&self, table: &OperatorTable) -> String {
        let mut out = String::new();
        self.render_into(table, 0, &mut out);
        out
    }

    fn render_into(&self, table: &OperatorTable, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&write_term(&self.goal, table, true));
        out.push_str(&format!(" -> {}", self.result));
        if let Some(n) = &self.note {
            out.push_str(&format!("  [{n}]"));
        }
        out.push('\n');
        for c in &self.children {
            c.render_into(table, depth + 1, out);
        }
    }
}

fn show(g: &Term) -> String {
    write_term(g, &OperatorTable::default_table(), true)
}

/// Rejects variables anywhere except a `catch/3` catcher.
fn check_probe_shape(g: &Term) -> Result<(), CondError> {
    match &g.kind {
        TermKind::Var(_) => Err(CondError::NonGroundCondition(show(g))),
        TermKind::Compound(f, args) => match (f.as_str(), args.len()) {
            (",", 2) | (";", 2) | ("\\+", 1) => {
                args.iter().try_for_each(check_probe_shape)
            }
            ("catch", 3) => {
                check_probe_shape(&args[0])?;
                check_probe_shape(&args[2])
            }
            _ => {
                if g.is_ground() {
                    Ok(())
                } else {
                    Err(CondError::NonGroundCondition(show(g)))
                }
            }
        },
        _ => Ok(()),
    }
}

fn eval_rec(g: &Term, ctx: &EvalContext) -> EvalTrace {
    match &g.kind {
        TermKind::Atom(a) if a == "true" => EvalTrace::leaf(g, TriBool::True, None),
        TermKind::Atom(a) if a == "fail" || a == "false" => {
            EvalTrace::leaf(g, TriBool::False, None)
        }
        TermKind::Compound(f, args) => match (f.as_str(), args.len()) {
            (",", 2) => {
                let l = eval_rec(&args[0], ctx);
                let r = eval_rec(&args[1], ctx);
                EvalTrace::node(g, l.result.and(r.result), vec![l, r])
            }
            (";", 2) => {
                let l = eval_rec(&args[0], ctx);
                let r = eval_rec(&args[1], ctx);
                EvalTrace::node(g, l.result.or(r.result), vec![l, r])
            }
            ("\\+", 1) => {
                let inner = eval_rec(&args[0], ctx);
                EvalTrace::node(g, inner.result.not(), vec![inner])
            }
            ("current_prolog_flag", 2) => {
                let profile = ctx
                    .profiles
                    .get(&ctx.dialect)
                    .expect("context dialect validated");
                let Some(flag) = args[0].as_atom() else {
                    return EvalTrace::leaf(
                        g,
                        TriBool::Unknown,
                        Some("flag name is not an atom".to_string()),
                    );
                };
                match profile.flag(flag) {
                    None => EvalTrace::leaf(
                        g,
                        TriBool::Unknown,
                        Some(format!("flag `{flag}` not in the {} flag table", ctx.dialect)),
                    ),
                    Some(v) if *v == args[1] => EvalTrace::leaf(g, TriBool::True, None),
                    Some(v) => EvalTrace::leaf(
                        g,
                        TriBool::False,
                        Some(format!("flag `{flag}` = {}", show(v))),
                    ),
                }
            }
            ("current_predicate", 1) => match args[0].as_indicator() {
                Some(pi) => {
                    let present = ctx
                        .profiles
                        .has_predicate(&ctx.dialect, &pi)
                        .expect("context dialect validated");
                    EvalTrace::leaf(
                        g,
                        TriBool::from_bool(present),
                        Some(format!(
                            "catalog lookup {pi} in {}: {}",
                            ctx.dialect,
                            if present { "present" } else { "absent" }
                        )),
                    )
                }
                None => EvalTrace::leaf(
                    g,
                    TriBool::Unknown,
                    Some("argument is not a Name/Arity indicator".to_string()),
                ),
            },
            ("prolog_load_context", 2) => {
                let Some(key) = args[0].as_atom() else {
                    return EvalTrace::leaf(
                        g,
                        TriBool::Unknown,
                        Some("load-context key is not an atom".to_string()),
                    );
                };
                match ctx.load_context.get(key) {
                    None => EvalTrace::leaf(
                        g,
                        TriBool::Unknown,
                        Some(format!("load-context key `{key}` unset")),
                    ),
                    Some(v) if *v == args[1] => EvalTrace::leaf(g, TriBool::True, None),
                    Some(v) => EvalTrace::leaf(
                        g,
                        TriBool::False,
                        Some(format!("load-context `{key}` = {}", show(v))),
                    ),
                }
            }
            ("catch", 3) => {
                let probe = &args[0];
                match probe.functor_arity() {
                    Some((name, arity)) => {
                        let pi = crate::reader::Indicator::new(name, arity);
                        let present = ctx
                            .profiles
                            .has_predicate(&ctx.dialect, &pi)
                            .expect("context dialect validated");
                        if present {
                            EvalTrace::leaf(
                                g,
                                TriBool::True,
                                Some(format!("probe approximated by catalog membership {pi}")),
                            )
                        } else {
                            let recovery = eval_rec(&args[2], ctx);
                            let result = recovery.result;
                            let mut t = EvalTrace::node(g, result, vec![recovery]);
                            t.note = Some(format!(
                                "probe {pi} absent from the {} catalog; recovery goal decides",
                                ctx.dialect
                            ));
                            t
                        }
                    }
                    None => EvalTrace::leaf(
                        g,
                        TriBool::Unknown,
                        Some("probe goal is not callable".to_string()),
                    ),
                }
            }
            _ => EvalTrace::leaf(
                g,
                TriBool::Unknown,
                Some("goal outside the evaluable subset".to_string()),
            ),
        },
        _ => EvalTrace::leaf(
            g,
            TriBool::Unknown,
            Some("goal outside the evaluable subset".to_string()),
        ),
    }
}

/// Pure three-valued evaluation; `unknown` is returned as-is (no policy).
pub fn evaluate_tri(g: &Term, ctx: &EvalContext) -> Result<TriBool, CondError> {
    check_probe_shape(g)?;
    Ok(eval_rec(g, ctx).result)
}

/// Policy-applying evaluation: `unknown` becomes an error under
/// [`UnknownPolicy::Error`], or `false` plus a warning message under
/// [`UnknownPolicy::AssumeFalseWarn`].
pub fn evaluate(g: &Term, ctx: &EvalContext) -> Result<(TriBool, Vec<String>), CondError> {
    check_probe_shape(g)?;
    match eval_rec(g, ctx).result {
        TriBool::Unknown => match ctx.unknown_policy {
            UnknownPolicy::Error => Err(CondError::PolicyError(show(g))),
            UnknownPolicy::AssumeFalseWarn => Ok((
                TriBool::False,
                vec![format!(
                    "condition `{}` is unknown for dialect {}; assuming false",
                    show(g),
                    ctx.dialect
                )],
            )),
        },
        v => Ok((v, Vec::new())),
    }
}

/// A full evaluation trace for diagnostics, mirroring the recursion of
/// [`evaluate`]; the unknown policy is reflected at the root.
pub fn explain(g: &Term, ctx: &EvalContext) -> Result<EvalTrace, CondError> {
    check_probe_shape(g)?;
    let trace = eval_rec(g, ctx);
    if trace.result == TriBool::Unknown {
        match ctx.unknown_policy {
            UnknownPolicy::Error => return Err(CondError::PolicyError(show(g))),
            UnknownPolicy::AssumeFalseWarn => {
                return Ok(EvalTrace {
                    goal: g.clone(),
                    result: TriBool::False,
                    note: Some("warning: unknown condition assumed false".to_string()),
                    children: vec![trace],
                });
            }
        }
    }
    Ok(trace)
}
