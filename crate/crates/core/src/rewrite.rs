//! Dialect-conditional term/goal rewriting.
//!
//! Rules carry a pattern with pattern variables, structural guards, an
//! optional dialect guard (the rule fires only when the declared dialect
//! matches), and one or more template terms. Term rules fire once at the
//! clause level; goal rules apply recursively through clause-body
//! control constructs. A fuel bound turns rewrite loops into errors.
//!
//! Rule files are plain text, one rule per stanza:
//!
//! ```text
//! rule op_qualify goal dialect=sicstus
//! match: op(Pri, Ass, Name)
//! where: nonvar(Name), \+ qualified(Name)
//! emit: op(Pri, Ass, user:Name)
//! ```
//!
//! `emit:` may list several terms separated by top-level `;` tokens; a
//! genuine disjunction template must be parenthesised. A stanza header
//! may end with `off` to ship a rule disabled.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::reader::{
    parse_term_text, tokenize, Indicator, OperatorTable, ReadOptions, SourcePos, Term, TermKind,
    TokenKind,
};

/// Rewrites applied per clause (`term`) or per body goal (`goal`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Term,
    Goal,
}

#[derive(Debug, Clone)]
pub struct RewriteRule {
    pub id: String,
    pub kind: RuleKind,
    pub dialect_guard: Option<String>,
    pub pattern: Term,
    pub guards: Vec<Term>,
    pub template: Vec<Term>,
    pub enabled: bool,
}

/// Rewrite budget per clause; exceeding it is reported as a rule loop.
const REWRITE_FUEL: usize = 128;

#[derive(Debug, Clone, Error)]
pub enum RewriteError {
    #[error("rewrite loop: rule `{rule}` keeps firing on `{goal}`")]
    RuleLoop { rule: String, goal: String },
    #[error("{file}:{line}: {message}")]
    Syntax {
        file: String,
        line: usize,
        message: String,
    },
    #[error("unsupported guard: {0}")]
    BadGuard(String),
    #[error("block spec {spec} does not match clause head {head}")]
    ArityMismatch { spec: Indicator, head: Indicator },
    #[error("block spec row for {0} has no `-` position")]
    NoMinus(Indicator),
    #[error("malformed block spec: {0}")]
    BadSpec(String),
}

// ---------------------------------------------------------------------
// Matching and instantiation
// ---------------------------------------------------------------------

type Bindings = BTreeMap<String, Term>;

/// Matches a pattern against a subject term. Pattern variables bind any
/// subterm (consistently for repeated variables); everything else must
/// agree structurally. Subject variables only match pattern variables.
fn match_term(pattern: &Term, subject: &Term, bindings: &mut Bindings) -> bool {
    match (&pattern.kind, &subject.kind) {
        (TermKind::Var(x), _) => match bindings.get(x) {
            Some(bound) => bound == subject,
            None => {
                bindings.insert(x.clone(), subject.clone());
                true
            }
        },
        (TermKind::Compound(f, ps), TermKind::Compound(g, ss)) => {
            f == g
                && ps.len() == ss.len()
                && ps
                    .iter()
                    .zip(ss.iter())
                    .all(|(p, s)| match_term(p, s, bindings))
        }
        (p, s) => p == s,
    }
}

/// Replaces pattern variables by their bindings; unbound variables stay.
fn substitute(t: &Term, bindings: &Bindings) -> Term {
    match &t.kind {
        TermKind::Var(x) => bindings.get(x).cloned().unwrap_or_else(|| t.clone()),
        TermKind::Compound(f, args) => {
            let mut out = Term::compound(
                f.clone(),
                args.iter().map(|a| substitute(a, bindings)).collect(),
            );
            out.pos = t.pos.clone();
            out
        }
        _ => t.clone(),
    }
}

fn collect_vars(t: &Term, out: &mut Vec<String>) {
    match &t.kind {
        TermKind::Var(x) => {
            if !out.contains(x) {
                out.push(x.clone());
            }
        }
        TermKind::Compound(_, args) => args.iter().for_each(|a| collect_vars(a, out)),
        _ => {}
    }
}

/// Guard evaluation over bound pattern variables. The guard vocabulary
/// is closed: `var`, `nonvar`, `atom`, `atomic`, `number`, `integer`,
/// `float`, `compound`, `callable`, `ground`, `is_list`,
/// `qualified` (the term is `_:_`), and `\+` over any of these.
fn eval_guard(g: &Term, bindings: &Bindings) -> Result<bool, RewriteError> {
    if let Some(args) = g.match_compound("\\+", 1) {
        return Ok(!eval_guard(&args[0], bindings)?);
    }
    if let Some(args) = g.match_compound(",", 2) {
        return Ok(eval_guard(&args[0], bindings)? && eval_guard(&args[1], bindings)?);
    }
    let (name, arity) = g
        .functor_arity()
        .ok_or_else(|| RewriteError::BadGuard(format!("{:?}", g.kind)))?;
    if arity != 1 {
        return Err(RewriteError::BadGuard(format!("{name}/{arity}")));
    }
    let subject = substitute(&g.args()[0], bindings);
    let v = match name {
        "var" => subject.is_var(),
        "nonvar" => !subject.is_var(),
        "atom" => subject.as_atom().is_some(),
        "atomic" => matches!(
            subject.kind,
            TermKind::Atom(_) | TermKind::Int(_) | TermKind::Float(_) | TermKind::Str(_)
        ),
        "number" => matches!(subject.kind, TermKind::Int(_) | TermKind::Float(_)),
        "integer" => matches!(subject.kind, TermKind::Int(_)),
        "float" => matches!(subject.kind, TermKind::Float(_)),
        "compound" => matches!(subject.kind, TermKind::Compound(_, _)),
        "callable" => subject.is_callable(),
        "ground" => subject.is_ground(),
        "is_list" => {
            let (_, tail) = subject.list_items();
            tail.is_atom("[]")
        }
        "qualified" => subject.match_compound(":", 2).is_some(),
        other => return Err(RewriteError::BadGuard(format!("{other}/1"))),
    };
    Ok(v)
}

fn rule_applies(
    rule: &RewriteRule,
    subject: &Term,
    declared_dialect: Option<&str>,
) -> Result<Option<Bindings>, RewriteError> {
    if !rule.enabled {
        return Ok(None);
    }
    if let Some(d) = &rule.dialect_guard {
        if declared_dialect != Some(d.as_str()) {
            return Ok(None);
        }
    }
    let mut bindings = Bindings::new();
    if !match_term(&rule.pattern, subject, &mut bindings) {
        return Ok(None);
    }
    for guard in &rule.guards {
        if !eval_guard(guard, &bindings)? {
            return Ok(None);
        }
    }
    Ok(Some(bindings))
}

fn instantiate(rule: &RewriteRule, bindings: &Bindings, pos: Option<&SourcePos>) -> Vec<Term> {
    rule.template
        .iter()
        .map(|t| {
            let mut out = substitute(t, bindings);
            if let Some(p) = pos {
                out.pos = Some(p.clone());
            }
            out
        })
        .collect()
}

fn conjoin(mut terms: Vec<Term>) -> Term {
    let last = terms.pop().expect("non-empty template");
    terms
        .into_iter()
        .rev()
        .fold(last, |acc, t| Term::compound(",", vec![t, acc]))
}

// ---------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------

/// Which rule (if any) rewrote the term; surfaced as provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub terms: Vec<Term>,
    pub rule_ids: Vec<String>,
}

/// Applies a rule set to one clause-level term. Term rules fire once
/// (first match wins); goal rules then rewrite body goals recursively
/// through `,`/`;`/`->`/`\+` and the first argument of `call/N`.
/// Non-matching terms come back unchanged as a singleton.
pub fn apply_rules(
    t: &Term,
    declared_dialect: Option<&str>,
    rules: &[RewriteRule],
) -> Result<Applied, RewriteError> {
    let mut rule_ids = Vec::new();

    // Clause-level term rules: first match fires once.
    let mut terms = vec![t.clone()];
    for rule in rules.iter().filter(|r| r.kind == RuleKind::Term) {
        if let Some(b) = rule_applies(rule, t, declared_dialect)? {
            terms = instantiate(rule, &b, t.pos.as_ref());
            rule_ids.push(rule.id.clone());
            break;
        }
    }

    // Goal rules over clause bodies and directive bodies.
    let goal_rules: Vec<&RewriteRule> =
        rules.iter().filter(|r| r.kind == RuleKind::Goal).collect();
    if !goal_rules.is_empty() {
        let mut rewritten = Vec::with_capacity(terms.len());
        for term in &terms {
            let mut fuel = REWRITE_FUEL;
            rewritten.push(rewrite_clause_goals(
                term,
                declared_dialect,
                &goal_rules,
                &mut fuel,
                &mut rule_ids,
            )?);
        }
        terms = rewritten;
    }

    Ok(Applied { terms, rule_ids })
}

fn rewrite_clause_goals(
    t: &Term,
    dialect: Option<&str>,
    rules: &[&RewriteRule],
    fuel: &mut usize,
    fired: &mut Vec<String>,
) -> Result<Term, RewriteError> {
    if let Some(args) = t.match_compound(":-", 2) {
        let body = rewrite_goal(&args[1], dialect, rules, fuel, fired)?;
        let mut out = Term::compound(":-", vec![args[0].clone(), body]);
        out.pos = t.pos.clone();
        return Ok(out);
    }
    if let Some(args) = t.match_compound(":-", 1) {
        let body = rewrite_goal(&args[0], dialect, rules, fuel, fired)?;
        let mut out = Term::compound(":-", vec![body]);
        out.pos = t.pos.clone();
        return Ok(out);
    }
    Ok(t.clone())
}

fn is_control(t: &Term) -> bool {
    matches!(
        t.functor_arity(),
        Some((",", 2)) | Some((";", 2)) | Some(("->", 2)) | Some(("\\+", 1))
    ) || matches!(t.functor_arity(), Some(("call", n)) if n >= 1)
}

fn rewrite_control(
    t: &Term,
    dialect: Option<&str>,
    rules: &[&RewriteRule],
    fuel: &mut usize,
    fired: &mut Vec<String>,
) -> Result<Term, RewriteError> {
    let (f, args) = match &t.kind {
        TermKind::Compound(f, args) => (f.clone(), args),
        _ => unreachable!("control terms are compounds"),
    };
    let mut out_args = Vec::with_capacity(args.len());
    if f == "call" {
        out_args.push(rewrite_goal(&args[0], dialect, rules, fuel, fired)?);
        out_args.extend(args[1..].iter().cloned());
    } else {
        for a in args {
            out_args.push(rewrite_goal(a, dialect, rules, fuel, fired)?);
        }
    }
    let mut out = Term::compound(f, out_args);
    out.pos = t.pos.clone();
    Ok(out)
}

fn rewrite_goal(
    g: &Term,
    dialect: Option<&str>,
    rules: &[&RewriteRule],
    fuel: &mut usize,
    fired: &mut Vec<String>,
) -> Result<Term, RewriteError> {
    if is_control(g) {
        return rewrite_control(g, dialect, rules, fuel, fired);
    }
    let mut cur = g.clone();
    loop {
        let mut matched = None;
        for rule in rules {
            if let Some(b) = rule_applies(rule, &cur, dialect)? {
                matched = Some((*rule, b));
                break;
            }
        }
        let Some((rule, bindings)) = matched else {
            return Ok(cur);
        };
        if *fuel == 0 {
            return Err(RewriteError::RuleLoop {
                rule: rule.id.clone(),
                goal: crate::reader::write_term(&cur, &OperatorTable::default_table(), true),
            });
        }
        *fuel -= 1;
        fired.push(rule.id.clone());
        cur = conjoin(instantiate(rule, &bindings, cur.pos.as_ref()));
        if is_control(&cur) {
            return rewrite_control(&cur, dialect, rules, fuel, fired);
        }
    }
}

// ---------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub rule_id: String,
    pub message: String,
}

/// Unification with occurs check, both sides binding; used to detect
/// rules whose template still matches their own pattern.
fn unify(a: &Term, b: &Term, subst: &mut Bindings) -> bool {
    let a = resolve(a, subst);
    let b = resolve(b, subst);
    match (&a.kind, &b.kind) {
        (TermKind::Var(x), TermKind::Var(y)) if x == y => true,
        (TermKind::Var(x), _) => bind(x, &b, subst),
        (_, TermKind::Var(y)) => bind(y, &a, subst),
        (TermKind::Compound(f, xs), TermKind::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, subst))
        }
        (x, y) => x == y,
    }
}

fn resolve(t: &Term, subst: &Bindings) -> Term {
    let mut cur = t.clone();
    while let TermKind::Var(x) = &cur.kind {
        match subst.get(x) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

fn occurs(x: &str, t: &Term, subst: &Bindings) -> bool {
    let t = resolve(t, subst);
    match &t.kind {
        TermKind::Var(y) => x == y,
        TermKind::Compound(_, args) => args.iter().any(|a| occurs(x, a, subst)),
        _ => false,
    }
}

fn bind(x: &str, t: &Term, subst: &mut Bindings) -> bool {
    if occurs(x, t, subst) {
        return false;
    }
    subst.insert(x.to_string(), t.clone());
    true
}

/// Reports unbound template variables, duplicate ids, and self-looping
/// rules (the pattern unifies with a template term).
pub fn validate_rules(rules: &[RewriteRule]) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let mut seen = BTreeMap::new();
    for rule in rules {
        if let Some(prev) = seen.insert(rule.id.clone(), ()) {
            let _ = prev;
            issues.push(ValidationIssue {
                rule_id: rule.id.clone(),
                message: "duplicate id".to_string(),
            });
        }
        let mut pattern_vars = Vec::new();
        collect_vars(&rule.pattern, &mut pattern_vars);
        for t in &rule.template {
            let mut tvars = Vec::new();
            collect_vars(t, &mut tvars);
            for v in tvars {
                if !pattern_vars.contains(&v) {
                    issues.push(ValidationIssue {
                        rule_id: rule.id.clone(),
                        message: format!("unbound template variable {v}"),
                    });
                }
            }
        }
        for t in &rule.template {
            // Rename template vars apart so `f(X) -> f(X)` still unifies.
            let renamed = rename_apart(t);
            let mut subst = Bindings::new();
            if unify(&rule.pattern, &renamed, &mut subst) && rule.guards.is_empty() {
                issues.push(ValidationIssue {
                    rule_id: rule.id.clone(),
                    message: "self-loop: template matches the rule's own pattern".to_string(),
                });
                break;
            }
        }
    }
    issues
}

fn rename_apart(t: &Term) -> Term {
    match &t.kind {
        TermKind::Var(x) => Term::var(format!("{x}__renamed")),
        TermKind::Compound(f, args) => {
            Term::compound(f.clone(), args.iter().map(rename_apart).collect())
        }
        _ => t.clone(),
    }
}

// ---------------------------------------------------------------------
// Block directives
// ---------------------------------------------------------------------

/// One argument position of a block row: `-` or `?`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockArg {
    Minus,
    Question,
}

/// Instantiation rows for one predicate, from a `:- block` directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub predicate: Indicator,
    pub rows: Vec<Vec<BlockArg>>,
}

/// Suffix for the renamed implementation clauses of a blocked predicate.
pub const BLOCK_SUFFIX: &str = "__blocked__";

/// Parses the specs of a `:- block(Specs)` directive (the argument is a
/// `,`-chain of head patterns over `-`/`?`), grouping rows by predicate.
pub fn parse_block_specs(d: &Term) -> Result<Vec<BlockSpec>, RewriteError> {
    let body = d
        .match_compound(":-", 1)
        .map(|args| &args[0])
        .unwrap_or(d);
    let spec_term = body
        .match_compound("block", 1)
        .map(|args| &args[0])
        .ok_or_else(|| RewriteError::BadSpec("expected block(Specs)".to_string()))?;

    let mut flat = Vec::new();
    flatten_conj(spec_term, &mut flat);

    let mut specs: Vec<BlockSpec> = Vec::new();
    for s in flat {
        let (name, arity) = match &s.kind {
            TermKind::Compound(f, args) => (f.clone(), args.len()),
            _ => {
                return Err(RewriteError::BadSpec(format!(
                    "block spec must be a compound head pattern, got {:?}",
                    s.kind
                )));
            }
        };
        let pi = Indicator::new(name, arity);
        let mut row = Vec::with_capacity(arity);
        for a in s.args() {
            match a.as_atom() {
                Some("-") => row.push(BlockArg::Minus),
                Some("?") => row.push(BlockArg::Question),
                _ => {
                    return Err(RewriteError::BadSpec(format!(
                        "block argument must be - or ? in {pi}"
                    )));
                }
            }
        }
        if !row.iter().any(|a| *a == BlockArg::Minus) {
            return Err(RewriteError::NoMinus(pi));
        }
        match specs.iter_mut().find(|b| b.predicate == pi) {
            Some(b) => b.rows.push(row),
            None => specs.push(BlockSpec {
                predicate: pi,
                rows: vec![row],
            }),
        }
    }
    Ok(specs)
}

fn flatten_conj<'t>(t: &'t Term, out: &mut Vec<&'t Term>) {
    if let Some(args) = t.match_compound(",", 2) {
        flatten_conj(&args[0], out);
        flatten_conj(&args[1], out);
    } else {
        out.push(t);
    }
}

fn wrapper_var(i: usize) -> Term {
    // A, B, ..., Z, V26, V27, ...
    if i < 26 {
        Term::var(((b'A' + i as u8) as char).to_string())
    } else {
        Term::var(format!("V{i}"))
    }
}

/// The `when/2` condition equivalent to the block rows: a conjunction
/// over rows of the disjunction of `nonvar(Vi)` for each `-` position.
pub fn block_condition(spec: &BlockSpec, vars: &[Term]) -> Term {
    let rows: Vec<Term> = spec
        .rows
        .iter()
        .map(|row| {
            let disj: Vec<Term> = row
                .iter()
                .enumerate()
                .filter(|(_, a)| **a == BlockArg::Minus)
                .map(|(i, _)| Term::compound("nonvar", vec![vars[i].clone()]))
                .collect();
            join_with(disj, ";")
        })
        .collect();
    join_with(rows, ",")
}

fn join_with(mut terms: Vec<Term>, op: &str) -> Term {
    let last = terms.pop().expect("at least one term");
    terms
        .into_iter()
        .rev()
        .fold(last, |acc, t| Term::compound(op, vec![t, acc]))
}

fn clause_head(t: &Term) -> &Term {
    match t.match_compound(":-", 2) {
        Some(args) => &args[0],
        None => t,
    }
}

fn with_head(t: &Term, head: Term) -> Term {
    match t.match_compound(":-", 2) {
        Some(args) => {
            let mut out = Term::compound(":-", vec![head, args[1].clone()]);
            out.pos = t.pos.clone();
            out
        }
        None => head,
    }
}

/// Compiles a `:- block` directive and the clauses of the blocked
/// predicates: each clause head `p(A1..An)` is renamed to
/// `p__blocked__/n` and one wrapper clause per predicate delays through
/// `when/2` until the instantiation pattern is reached.
pub fn compile_block_directive(d: &Term, clauses: &[Term]) -> Result<Vec<Term>, RewriteError> {
    let specs = parse_block_specs(d)?;
    let mut out = Vec::new();

    for spec in &specs {
        let vars: Vec<Term> = (0..spec.predicate.arity).map(wrapper_var).collect();
        let cond = block_condition(spec, &vars);
        let blocked_name = format!("{}{}", spec.predicate.name, BLOCK_SUFFIX);
        let head = Term::compound(spec.predicate.name.clone(), vars.clone());
        let inner = Term::compound(blocked_name, vars.clone());
        let wrapper = Term::compound(
            ":-",
            vec![head, Term::compound("when", vec![cond, inner])],
        );
        out.push(wrapper);
    }

    for clause in clauses {
        let head = clause_head(clause);
        let (name, arity) = head.functor_arity().ok_or_else(|| {
            RewriteError::BadSpec("blocked clause head is not callable".to_string())
        })?;
        let head_pi = Indicator::new(name, arity);
        let spec = specs
            .iter()
            .find(|s| s.predicate.name == head_pi.name)
            .ok_or_else(|| RewriteError::BadSpec(format!("clause {head_pi} not in block spec")))?;
        if spec.predicate.arity != head_pi.arity {
            return Err(RewriteError::ArityMismatch {
                spec: spec.predicate.clone(),
                head: head_pi,
            });
        }
        let new_name = format!("{}{}", head_pi.name, BLOCK_SUFFIX);
        let new_head = if head_pi.arity == 0 {
            Term::atom(new_name)
        } else {
            let mut h = Term::compound(new_name, head.args().to_vec());
            h.pos = head.pos.clone();
            h
        };
        out.push(with_head(clause, new_head));
    }

    Ok(out)
}

// ---------------------------------------------------------------------
// Rule files
// ---------------------------------------------------------------------

/// Parses a rule file. Terms use the default operator table; syntax
/// errors carry the file name and stanza line.
pub fn parse_rules(text: &str, file: &str) -> Result<Vec<RewriteRule>, RewriteError> {
    let err = |line: usize, message: String| RewriteError::Syntax {
        file: file.to_string(),
        line,
        message,
    };
    let table = OperatorTable::default_table();
    let opts = ReadOptions::default();

    let mut rules: Vec<RewriteRule> = Vec::new();
    let mut current: Option<(usize, RewriteRule)> = None;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        if let Some(rest) = line.strip_prefix("rule ") {
            if let Some((start, rule)) = current.take() {
                rules.push(finish_rule(rule, start, file)?);
            }
            let mut words = rest.split_whitespace();
            let id = words
                .next()
                .ok_or_else(|| err(lineno, "rule needs an id".to_string()))?
                .to_string();
            let mut kind = None;
            let mut dialect_guard = None;
            let mut enabled = true;
            for w in words {
                match w {
                    "term" => kind = Some(RuleKind::Term),
                    "goal" => kind = Some(RuleKind::Goal),
                    "off" => enabled = false,
                    w if w.starts_with("dialect=") => {
                        dialect_guard = Some(w["dialect=".len()..].to_string());
                    }
                    w => return Err(err(lineno, format!("unknown rule attribute `{w}`"))),
                }
            }
            current = Some((
                lineno,
                RewriteRule {
                    id,
                    kind: kind
                        .ok_or_else(|| err(lineno, "rule kind (term|goal) required".to_string()))?,
                    dialect_guard,
                    pattern: Term::atom("$unset"),
                    guards: Vec::new(),
                    template: Vec::new(),
                    enabled,
                },
            ));
            continue;
        }

        let Some((_, rule)) = current.as_mut() else {
            return Err(err(lineno, "content outside a rule stanza".to_string()));
        };

        if let Some(rest) = line.strip_prefix("match:") {
            rule.pattern = parse_term_text(rest.trim(), &table, &opts, file)
                .map_err(|e| err(lineno, format!("bad match term: {e}")))?;
        } else if let Some(rest) = line.strip_prefix("where:") {
            let g = parse_term_text(rest.trim(), &table, &opts, file)
                .map_err(|e| err(lineno, format!("bad guard: {e}")))?;
            let mut flat = Vec::new();
            flatten_conj(&g, &mut flat);
            rule.guards.extend(flat.into_iter().cloned());
        } else if let Some(rest) = line.strip_prefix("emit:") {
            for seg in split_top_level_semi(rest.trim(), file)
                .map_err(|m| err(lineno, m))?
            {
                let t = parse_term_text(&seg, &table, &opts, file)
                    .map_err(|e| err(lineno, format!("bad emit term: {e}")))?;
                rule.template.push(t);
            }
        } else {
            return Err(err(lineno, format!("unrecognised line: {line}")));
        }
    }

    if let Some((start, rule)) = current.take() {
        rules.push(finish_rule(rule, start, file)?);
    }
    Ok(rules)
}

fn finish_rule(rule: RewriteRule, start: usize, file: &str) -> Result<RewriteRule, RewriteError> {
    if rule.pattern.is_atom("$unset") {
        return Err(RewriteError::Syntax {
            file: file.to_string(),
            line: start,
            message: format!("rule `{}` has no match: line", rule.id),
        });
    }
    if rule.template.is_empty() {
        return Err(RewriteError::Syntax {
            file: file.to_string(),
            line: start,
            message: format!("rule `{}` has no emit: line", rule.id),
        });
    }
    Ok(rule)
}

/// Splits rule-file `emit:` text at top-level `;` tokens (outside any
/// brackets); a disjunction template needs parentheses. The input is a
/// single line, so token columns index straight into it.
fn split_top_level_semi(text: &str, origin: &str) -> Result<Vec<String>, String> {
    let tokens =
        tokenize(text, &SourcePos::start(origin)).map_err(|e| format!("lexical error: {e}"))?;
    let chars: Vec<char> = text.chars().collect();
    let mut depth: i32 = 0;
    let mut segments = Vec::new();
    let mut start = 0usize;
    for t in &tokens {
        match &t.kind {
            TokenKind::Open | TokenKind::OpenList | TokenKind::OpenCurly => depth += 1,
            TokenKind::Close | TokenKind::CloseList | TokenKind::CloseCurly => depth -= 1,
            TokenKind::Name(n) if n == ";" && depth == 0 => {
                let cut = (t.pos.column - 1) as usize;
                segments.push(chars[start..cut].iter().collect::<String>());
                start = cut + 1;
            }
            _ => {}
        }
    }
    segments.push(chars[start..].iter().collect::<String>());
    if segments.iter().any(|s| s.trim().is_empty()) {
        return Err("empty emit segment".to_string());
    }
    Ok(segments)
}

/// The rewrite rules shipped with the toolkit, keyed by the Alpino
/// case-study transformations.
pub fn shipped_rules() -> Vec<RewriteRule> {
    parse_rules(
        include_str!("../rules/sicstus.rules"),
        "sicstus.rules",
    )
    .expect("shipped rules parse")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::{parse_term_text, ReadOptions};

    fn term(s: &str) -> Term {
        // `block` is an operator in SICStus sources; declare it so test
        // snippets read naturally.
        let table = OperatorTable::default_table()
            .with_op(1150, crate::reader::OpType::Fx, "block")
            .unwrap();
        parse_term_text(s, &table, &ReadOptions::default(), "rw").unwrap()
    }

    fn shipped_enabled() -> Vec<RewriteRule> {
        shipped_rules()
    }

    #[test]
    fn op_qualification_cases() {
        let rules = shipped_enabled();
        // Unqualified + sicstus: rewrites to user:Name.
        let d = term(":- op(700, xfx, ===)");
        let out = apply_rules(&d, Some("sicstus"), &rules).unwrap();
        assert_eq!(out.terms, vec![term(":- op(700, xfx, user:(===))")]);
        assert_eq!(out.rule_ids, vec!["op_qualify".to_string()]);

        // Already qualified: untouched.
        let d = term(":- op(700, xfx, m:(===))");
        let out = apply_rules(&d, Some("sicstus"), &rules).unwrap();
        assert_eq!(out.terms, vec![d.clone()]);
        assert!(out.rule_ids.is_empty());

        // Variable name: untouched.
        let d = term(":- op(700, xfx, N)");
        let out = apply_rules(&d, Some("sicstus"), &rules).unwrap();
        assert_eq!(out.terms, vec![d.clone()]);

        // Same three cases without the sicstus dialect: all untouched.
        for s in [
            ":- op(700, xfx, ===)",
            ":- op(700, xfx, m:(===))",
            ":- op(700, xfx, N)",
        ] {
            let d = term(s);
            let out = apply_rules(&d, None, &rules).unwrap();
            assert_eq!(out.terms, vec![d.clone()]);
            let out = apply_rules(&d, Some("swi"), &rules).unwrap();
            assert_eq!(out.terms, vec![d]);
        }
    }

    #[test]
    fn qualified_call_remapping() {
        let rules = shipped_enabled();
        let clause = term("p(N, L, E) :- lists:nth(N, L, E), q(E)");
        let out = apply_rules(&clause, Some("sicstus"), &rules).unwrap();
        assert_eq!(
            out.terms,
            vec![term("p(N, L, E) :- sicstus_lists:nth(N, L, E), q(E)")]
        );
    }

    #[test]
    fn assert_to_clp_assert_is_shipped_disabled() {
        let rules = shipped_enabled();
        let clause = term("p(X) :- dif(X, 3), assert(not_3(X))");
        let out = apply_rules(&clause, Some("sicstus"), &rules).unwrap();
        assert_eq!(out.terms, vec![clause.clone()], "disabled rule must not fire");

        let mut enabled: Vec<RewriteRule> = shipped_enabled();
        for r in &mut enabled {
            if r.id == "assert_clp" {
                r.enabled = true;
            }
        }
        let out = apply_rules(&clause, Some("sicstus"), &enabled).unwrap();
        assert_eq!(
            out.terms,
            vec![term("p(X) :- dif(X, 3), clp_assert(not_3(X))")]
        );
    }

    #[test]
    fn empty_rule_set_is_identity() {
        for s in ["a", "f(X) :- g(X)", ":- op(1, xfx, zz)", "[1,2|T]"] {
            let t = term(s);
            let out = apply_rules(&t, Some("sicstus"), &[]).unwrap();
            assert_eq!(out.terms, vec![t]);
        }
    }

    #[test]
    fn goal_rules_traverse_control_constructs() {
        let rules = parse_rules(
            "rule r goal\nmatch: old(X)\nemit: new(X)\n",
            "t.rules",
        )
        .unwrap();
        let clause = term("p :- (old(1), q ; \\+ old(2) -> call(old(3), z) ; r)");
        let out = apply_rules(&clause, None, &rules).unwrap();
        assert_eq!(
            out.terms,
            vec![term("p :- (new(1), q ; \\+ new(2) -> call(new(3), z) ; r)")]
        );
    }

    #[test]
    fn multi_term_emit_in_goal_position_becomes_conjunction() {
        let rules = parse_rules(
            "rule split goal\nmatch: both(X)\nemit: left(X); right(X)\n",
            "t.rules",
        )
        .unwrap();
        let clause = term("p :- both(7)");
        let out = apply_rules(&clause, None, &rules).unwrap();
        assert_eq!(out.terms, vec![term("p :- left(7), right(7)")]);
    }

    #[test]
    fn term_rule_fires_once_first_match_wins() {
        let rules = parse_rules(
            "rule one term\nmatch: f(X)\nemit: g(X)\n\nrule two term\nmatch: f(X)\nemit: h(X)\n",
            "t.rules",
        )
        .unwrap();
        let out = apply_rules(&term("f(1)"), None, &rules).unwrap();
        assert_eq!(out.terms, vec![term("g(1)")]);
        assert_eq!(out.rule_ids, vec!["one".to_string()]);
    }

    #[test]
    fn rule_loops_are_fuel_bounded() {
        let rules = parse_rules(
            "rule grow goal\nmatch: f(X)\nemit: f(g(X))\n",
            "t.rules",
        )
        .unwrap();
        let clause = term("p :- f(1)");
        let err = apply_rules(&clause, None, &rules).unwrap_err();
        assert!(matches!(err, RewriteError::RuleLoop { .. }));
    }

    #[test]
    fn nonlinear_patterns_require_equal_subterms() {
        let rules = parse_rules(
            "rule pair goal\nmatch: eq(X, X)\nemit: same(X)\n",
            "t.rules",
        )
        .unwrap();
        let hit = apply_rules(&term("p :- eq(a, a)"), None, &rules).unwrap();
        assert_eq!(hit.terms, vec![term("p :- same(a)")]);
        let miss = apply_rules(&term("p :- eq(a, b)"), None, &rules).unwrap();
        assert_eq!(miss.terms, vec![term("p :- eq(a, b)")]);
    }

    #[test]
    fn validation_findings() {
        let rules = parse_rules(
            concat!(
                "rule unbound term\nmatch: f(X)\nemit: g(Y)\n\n",
                "rule op_qualify term\nmatch: a\nemit: b\n\n",
                "rule op_qualify term\nmatch: c\nemit: d\n\n",
                "rule looping term\nmatch: f(X)\nemit: f(X)\n",
            ),
            "t.rules",
        )
        .unwrap();
        let issues = validate_rules(&rules);
        assert!(issues
            .iter()
            .any(|i| i.rule_id == "unbound" && i.message.contains("unbound template variable")));
        assert!(issues
            .iter()
            .any(|i| i.rule_id == "op_qualify" && i.message.contains("duplicate id")));
        assert!(issues
            .iter()
            .any(|i| i.rule_id == "looping" && i.message.contains("self-loop")));
    }

    #[test]
    fn shipped_rules_validate_cleanly() {
        assert!(validate_rules(&shipped_rules()).is_empty());
    }

    #[test]
    fn guard_soundness() {
        // A sicstus-guarded rule never fires under other dialects.
        let rules = shipped_enabled();
        let d = term(":- op(700, xfx, ===)");
        for dialect in [None, Some("swi"), Some("yap"), Some("ciao"), Some("x")] {
            let out = apply_rules(&d, dialect, &rules).unwrap();
            assert_eq!(out.terms, vec![d.clone()], "dialect {dialect:?}");
        }
    }

    #[test]
    fn block_single_row() {
        let d = term(":- block p(-, ?)");
        let clauses = vec![term("p(a, b)")];
        let out = compile_block_directive(&d, &clauses).unwrap();
        assert_eq!(
            out,
            vec![
                term("p(A, B) :- when(nonvar(A), p__blocked__(A, B))"),
                term("p__blocked__(a, b)"),
            ]
        );
    }

    #[test]
    fn block_multi_row_condition() {
        let d = term(":- block merge(-, ?, -), merge(?, -, -)");
        let specs = parse_block_specs(&d).unwrap();
        assert_eq!(specs.len(), 1);
        let vars = vec![Term::var("A"), Term::var("B"), Term::var("C")];
        let cond = block_condition(&specs[0], &vars);
        assert_eq!(
            cond,
            term("(nonvar(A) ; nonvar(C)), (nonvar(B) ; nonvar(C))")
        );
    }

    #[test]
    fn block_errors() {
        let d = term(":- block p(?, ?)");
        assert!(matches!(
            parse_block_specs(&d),
            Err(RewriteError::NoMinus(_))
        ));

        let d = term(":- block p(-, ?)");
        let err = compile_block_directive(&d, &[term("p(a, b, c)")]).unwrap_err();
        assert!(matches!(err, RewriteError::ArityMismatch { .. }));
    }

    #[test]
    fn block_clause_bodies_are_preserved() {
        let d = term(":- block p(-)");
        let out =
            compile_block_directive(&d, &[term("p(X) :- q(X), r(X)")]).unwrap();
        assert_eq!(
            out,
            vec![
                term("p(A) :- when(nonvar(A), p__blocked__(A))"),
                term("p__blocked__(X) :- q(X), r(X)"),
            ]
        );
    }
}
