//! Clause-stream processing: conditional compilation, `expects_dialect`
//! effects, operator directives, dialect library resolution, block
//! compilation, and rewrite-rule invocation, emitting a per-dialect
//! expanded program.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::condeval::{self, CondError, EvalContext, TriBool, UnknownPolicy};
use crate::dialects::DialectStore;
use crate::reader::{
    apply_op_directive, write_clause, ClauseStream, DoubleQuotes, LexError, OpType, OperatorTable,
    ReadError, ReadOptions, SourcePos, Term,
};
use crate::rewrite::{
    self, BlockSpec, RewriteError, RewriteRule, BLOCK_SUFFIX,
};

/// Operators a dialect's sources take for granted; seeded into the
/// table when `expects_dialect` activates that dialect. The profile
/// format carries features, flags, and predicates, so this small
/// operator seed lives here.
static DIALECT_OPERATORS: &[(&str, u32, OpType, &str)] =
    &[("sicstus", 1150, OpType::Fx, "block")];

/// How one emitted term came to be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Kept,
    Rewritten(String),
    Synthesized(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagLevel {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub level: DiagLevel,
    pub pos: Option<SourcePos>,
    pub message: String,
}

/// A library reference seen during expansion and how it resolved.
#[derive(Debug, Clone)]
pub struct Dependency {
    pub spec: String,
    pub resolved: Option<PathBuf>,
    pub pos: Option<SourcePos>,
}

#[derive(Debug, Clone)]
pub struct ExpandedEntry {
    pub term: Term,
    pub pos: SourcePos,
    pub provenance: Provenance,
    /// Operator table in force when the term was emitted; rendering a
    /// term under a later table could mis-print across op removals.
    pub table: Arc<OperatorTable>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExpandStats {
    pub parsed: usize,
    pub dropped: usize,
    pub consumed_directives: usize,
    pub emitted_input_terms: usize,
    pub synthesized_terms: usize,
}

/// The expansion result: emitted terms with provenance, diagnostics,
/// recorded dependencies, and bookkeeping counts.
#[derive(Debug, Clone, Default)]
pub struct ExpandedProgram {
    pub entries: Vec<ExpandedEntry>,
    pub diagnostics: Vec<Diagnostic>,
    pub dependencies: Vec<Dependency>,
    pub stats: ExpandStats,
    /// Table after the last directive; lets a session export operators
    /// across file boundaries when that behaviour is wanted.
    pub final_table: OperatorTable,
}

impl Default for ExpandedEntry {
    fn default() -> Self {
        ExpandedEntry {
            term: Term::atom("true"),
            pos: SourcePos::start("?"),
            provenance: Provenance::Kept,
            table: Arc::new(OperatorTable::default_table()),
        }
    }
}

impl ExpandedProgram {
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.entries.iter().map(|e| &e.term)
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.level == DiagLevel::Error)
    }

    /// Renders the program, one clause per line. With
    /// `provenance_comments`, rewritten and synthesized terms carry a
    /// marker comment.
    pub fn render(&self, provenance_comments: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            if provenance_comments {
                match &e.provenance {
                    Provenance::Kept => {}
                    Provenance::Rewritten(id) => {
                        out.push_str(&format!("% portolog: rewritten({id})\n"));
                    }
                    Provenance::Synthesized(id) => {
                        out.push_str(&format!("% portolog: synthesized({id})\n"));
                    }
                }
            }
            out.push_str(&write_clause(&e.term, &e.table, true));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum PreprocError {
    #[error("{what} at {pos}")]
    UnbalancedConditional { pos: SourcePos, what: String },
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("lexical error: {0}")]
    Lex(#[from] LexError),
    #[error(transparent)]
    Cond(#[from] CondError),
    #[error("unknown dialect in expects_dialect: {dialect} at {pos}")]
    UnknownDialectInExpects { dialect: String, pos: SourcePos },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("{0}")]
    Io(String),
}

/// Conditional-selection state of one `if` frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameState {
    /// The current branch is active.
    Selected,
    /// No branch taken yet; an `elif`/`else` may still select one.
    Selecting,
    /// A branch was already taken (or the frame sits in a dead region).
    SkippedAfterSelected,
}

#[derive(Debug, Clone)]
pub struct DirectiveFrame {
    state: FrameState,
    saw_else: bool,
    origin: SourcePos,
}

/// Per-file expansion state: target dialect, the declared dialect if
/// `expects_dialect` was seen, the operator table, the library search
/// path, the conditional stack, and the condition-evaluation context.
pub struct LoadContext<'a> {
    pub target: String,
    pub declared_dialect: Option<String>,
    pub table: OperatorTable,
    pub library_path: Vec<PathBuf>,
    pub source_dir: Option<PathBuf>,
    cond_stack: Vec<DirectiveFrame>,
    pub eval_ctx: EvalContext<'a>,
    /// Block specs currently in force; clause heads matching one are
    /// renamed to their `__blocked__` implementation functor.
    pending_blocks: Vec<BlockSpec>,
}

impl<'a> LoadContext<'a> {
    pub fn new(
        target: &str,
        profiles: &'a DialectStore,
        config: &ExpandConfig,
    ) -> Result<LoadContext<'a>, PreprocError> {
        let eval_ctx = EvalContext::new(target, profiles, config.unknown_policy)
            .map_err(|e| PreprocError::Io(e.to_string()))?;
        Ok(LoadContext {
            target: target.to_string(),
            declared_dialect: None,
            table: config.base_table.clone(),
            library_path: vec![config.library_root.clone()],
            source_dir: config.source_dir.clone(),
            cond_stack: Vec::new(),
            eval_ctx,
            pending_blocks: Vec::new(),
        })
    }

    /// True when no enclosing conditional frame skips this region.
    pub fn active(&self) -> bool {
        self.cond_stack.iter().all(|f| f.state == FrameState::Selected)
    }

    fn parents_active(&self) -> bool {
        self.cond_stack[..self.cond_stack.len().saturating_sub(1)]
            .iter()
            .all(|f| f.state == FrameState::Selected)
    }

    pub fn conditional_depth(&self) -> usize {
        self.cond_stack.len()
    }
}

/// Expansion knobs; one per run, shared across files.
#[derive(Debug, Clone)]
pub struct ExpandConfig {
    pub unknown_policy: UnknownPolicy,
    pub library_root: PathBuf,
    pub base_table: OperatorTable,
    pub read_opts: ReadOptions,
    pub source_dir: Option<PathBuf>,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        ExpandConfig {
            unknown_policy: UnknownPolicy::default(),
            library_root: PathBuf::from("."),
            base_table: OperatorTable::default_table(),
            read_opts: ReadOptions::default(),
            source_dir: None,
        }
    }
}

/// What became of a directive handed to [`handle_directive`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DirectiveOutcome {
    /// Not a directive at all; process as an ordinary clause.
    NotDirective,
    /// Consumed by the preprocessor (conditionals, block directives).
    Consumed,
    /// To be emitted (possibly after rewriting).
    Emit,
}

/// Resolution result of a library or file spec; not-found is a value,
/// the linter reports it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LibraryResolution {
    Found(PathBuf),
    NotFound,
}

/// Resolves `library(Name)` or a plain file atom along the context's
/// search path; the first existing file wins, so a prepended
/// `dialect/<D>` directory shadows base libraries.
pub fn resolve_library(spec: &Term, ctx: &LoadContext) -> LibraryResolution {
    fn spec_rel_path(t: &Term) -> Option<PathBuf> {
        if let Some(a) = t.as_atom() {
            return Some(PathBuf::from(a));
        }
        // Nested specs like dialect/sicstus/lists.
        if let Some(args) = t.match_compound("/", 2) {
            let mut p = spec_rel_path(&args[0])?;
            p.push(spec_rel_path(&args[1])?);
            return Some(p);
        }
        None
    }

    let (rel, roots): (PathBuf, Vec<&PathBuf>) =
        if let Some(args) = spec.match_compound("library", 1) {
            match spec_rel_path(&args[0]) {
                Some(p) => (p, ctx.library_path.iter().collect()),
                None => return LibraryResolution::NotFound,
            }
        } else if let Some(a) = spec.as_atom() {
            let roots = ctx
                .source_dir
                .iter()
                .chain(ctx.library_path.iter())
                .collect();
            (PathBuf::from(a), roots)
        } else {
            return LibraryResolution::NotFound;
        };

    for root in roots {
        for candidate in [root.join(&rel), root.join(&rel).with_extension("pl")] {
            if candidate.is_file() {
                return LibraryResolution::Found(candidate);
            }
        }
    }
    LibraryResolution::NotFound
}

struct Expander<'a> {
    ctx: LoadContext<'a>,
    rules: &'a [RewriteRule],
    out: ExpandedProgram,
    table_snapshot: Arc<OperatorTable>,
    pending_double_quotes: Option<DoubleQuotes>,
}

impl<'a> Expander<'a> {
    fn diag(&mut self, level: DiagLevel, pos: Option<SourcePos>, message: String) {
        self.out.diagnostics.push(Diagnostic { level, pos, message });
    }

    fn snapshot_table(&mut self) {
        self.table_snapshot = Arc::new(self.ctx.table.clone());
    }

    fn emit(&mut self, term: Term, pos: SourcePos, provenance: Provenance) {
        self.out.entries.push(ExpandedEntry {
            term,
            pos,
            provenance,
            table: self.table_snapshot.clone(),
        });
    }

    /// Conditional directives; returns true when the term was one.
    fn handle_conditional(
        &mut self,
        body: &Term,
        pos: &SourcePos,
    ) -> Result<bool, PreprocError> {
        let unbalanced = |what: &str, pos: &SourcePos| PreprocError::UnbalancedConditional {
            pos: pos.clone(),
            what: what.to_string(),
        };

        if let Some(args) = body.match_compound("if", 1) {
            let state = if !self.ctx.active() {
                FrameState::SkippedAfterSelected
            } else {
                match self.eval_condition(&args[0], pos)? {
                    TriBool::True => FrameState::Selected,
                    _ => FrameState::Selecting,
                }
            };
            self.ctx.cond_stack.push(DirectiveFrame {
                state,
                saw_else: false,
                origin: pos.clone(),
            });
            return Ok(true);
        }

        if let Some(args) = body.match_compound("elif", 1) {
            let parents_active = self.ctx.parents_active();
            let next = {
                let Some(frame) = self.ctx.cond_stack.last() else {
                    return Err(unbalanced("elif without a matching if", pos));
                };
                if frame.saw_else {
                    return Err(unbalanced("elif after else", pos));
                }
                match frame.state {
                    FrameState::Selected => FrameState::SkippedAfterSelected,
                    FrameState::SkippedAfterSelected => FrameState::SkippedAfterSelected,
                    FrameState::Selecting => {
                        if parents_active && self.eval_condition(&args[0], pos)? == TriBool::True
                        {
                            FrameState::Selected
                        } else {
                            FrameState::Selecting
                        }
                    }
                }
            };
            self.ctx.cond_stack.last_mut().unwrap().state = next;
            return Ok(true);
        }

        if body.is_atom("else") {
            let Some(frame) = self.ctx.cond_stack.last_mut() else {
                return Err(unbalanced("else without a matching if", pos));
            };
            if frame.saw_else {
                return Err(unbalanced("else after else", pos));
            }
            frame.saw_else = true;
            frame.state = match frame.state {
                FrameState::Selected => FrameState::SkippedAfterSelected,
                FrameState::Selecting => FrameState::Selected,
                FrameState::SkippedAfterSelected => FrameState::SkippedAfterSelected,
            };
            return Ok(true);
        }

        if body.is_atom("endif") {
            if self.ctx.cond_stack.pop().is_none() {
                return Err(unbalanced("endif without a matching if", pos));
            }
            return Ok(true);
        }

        Ok(false)
    }

    fn eval_condition(&mut self, goal: &Term, pos: &SourcePos) -> Result<TriBool, PreprocError> {
        let (value, warnings) = condeval::evaluate(goal, &self.ctx.eval_ctx)?;
        for w in warnings {
            self.diag(DiagLevel::Warning, Some(pos.clone()), w);
        }
        Ok(value)
    }

    fn record_dependency(&mut self, spec: &Term, pos: &SourcePos) {
        let resolved = match resolve_library(spec, &self.ctx) {
            LibraryResolution::Found(p) => Some(p),
            LibraryResolution::NotFound => None,
        };
        self.out.dependencies.push(Dependency {
            spec: write_clause(spec, &self.ctx.table, true)
                .trim_end_matches('.')
                .trim()
                .to_string(),
            resolved,
            pos: Some(pos.clone()),
        });
    }

    fn handle_expects_dialect(
        &mut self,
        dialect_term: &Term,
        pos: &SourcePos,
    ) -> Result<(), PreprocError> {
        let Some(name) = dialect_term.as_atom() else {
            return Err(PreprocError::UnknownDialectInExpects {
                dialect: format!("{:?}", dialect_term.kind),
                pos: pos.clone(),
            });
        };
        if self.ctx.eval_ctx.profiles.get(name).is_err() {
            return Err(PreprocError::UnknownDialectInExpects {
                dialect: name.to_string(),
                pos: pos.clone(),
            });
        }
        self.ctx.declared_dialect = Some(name.to_string());
        self.ctx
            .eval_ctx
            .set_load_context("dialect", Term::atom(name));

        // Push the dialect library directory before the current path.
        let dialect_dir = self.ctx.library_path[self.ctx.library_path.len() - 1]
            .join("dialect")
            .join(name);
        let dialect_dir = self.ctx.library_path[0]
            .parent()
            .map(|_| dialect_dir.clone())
            .unwrap_or(dialect_dir);
        self.ctx.library_path.insert(0, dialect_dir);

        // Seed the dialect's assumed operators.
        for &(d, p, ty, opname) in DIALECT_OPERATORS {
            if d == name {
                match self.ctx.table.with_op(p, ty, opname) {
                    Ok(t) => self.ctx.table = t,
                    Err(e) => self.diag(
                        DiagLevel::Warning,
                        Some(pos.clone()),
                        format!("could not seed dialect operator {opname}: {e}"),
                    ),
                }
            }
        }
        self.snapshot_table();

        // The emulation library is a dependency of the expanded program.
        let lib = Term::compound(
            "library",
            vec![Term::compound(
                "/",
                vec![Term::atom("dialect"), Term::atom(name)],
            )],
        );
        self.record_dependency(&lib, pos);
        Ok(())
    }

    /// Handles a directive body. Conditionals are processed even inside
    /// skipped regions (they track nesting); anything else in a skipped
    /// region is ignored by the caller.
    fn handle_directive(
        &mut self,
        body: &Term,
        pos: &SourcePos,
    ) -> Result<DirectiveOutcome, PreprocError> {
        if self.handle_conditional(body, pos)? {
            return Ok(DirectiveOutcome::Consumed);
        }
        if !self.ctx.active() {
            // Non-conditional directives inside skipped regions are inert.
            return Ok(DirectiveOutcome::Consumed);
        }

        if let Some(args) = body.match_compound("expects_dialect", 1) {
            self.handle_expects_dialect(&args[0], pos)?;
            return Ok(DirectiveOutcome::Emit);
        }

        if body.match_compound("op", 3).is_some() {
            match apply_op_directive(&self.ctx.table, body) {
                Ok(t) => {
                    self.ctx.table = t;
                    self.snapshot_table();
                }
                Err(e) => {
                    self.diag(
                        DiagLevel::Error,
                        Some(pos.clone()),
                        format!("invalid op directive: {e}"),
                    );
                }
            }
            return Ok(DirectiveOutcome::Emit);
        }

        if let Some(args) = body.match_compound("set_prolog_flag", 2) {
            if args[0].is_atom("double_quotes") {
                return Ok(match args[1].as_atom() {
                    Some("codes") => {
                        self.set_double_quotes(DoubleQuotes::Codes);
                        DirectiveOutcome::Emit
                    }
                    Some("chars") => {
                        self.set_double_quotes(DoubleQuotes::Chars);
                        DirectiveOutcome::Emit
                    }
                    Some("atom") => {
                        self.set_double_quotes(DoubleQuotes::Atom);
                        DirectiveOutcome::Emit
                    }
                    Some("string") => {
                        self.set_double_quotes(DoubleQuotes::Str);
                        DirectiveOutcome::Emit
                    }
                    _ => {
                        self.diag(
                            DiagLevel::Warning,
                            Some(pos.clone()),
                            "unrecognised double_quotes value".to_string(),
                        );
                        DirectiveOutcome::Emit
                    }
                });
            }
            return Ok(DirectiveOutcome::Emit);
        }

        for (f, n, spec_at) in [
            ("use_module", 1, 0),
            ("use_module", 2, 0),
            ("use_module", 3, 0),
            ("ensure_loaded", 1, 0),
            ("include", 1, 0),
        ] {
            if let Some(args) = body.match_compound(f, n) {
                self.record_dependency(&args[spec_at], pos);
                return Ok(DirectiveOutcome::Emit);
            }
        }

        if body.match_compound("block", 1).is_some() {
            // Native hosts keep the directive; others get when/2
            // wrappers synthesized at this point.
            let host_has_block = self
                .ctx
                .eval_ctx
                .profiles
                .has_predicate(&self.ctx.target, &crate::reader::Indicator::new("block", 1))
                .unwrap_or(false);
            if host_has_block {
                return Ok(DirectiveOutcome::Emit);
            }
            match rewrite::parse_block_specs(body) {
                Ok(specs) => {
                    for spec in &specs {
                        let vars: Vec<Term> =
                            (0..spec.predicate.arity).map(block_var).collect();
                        let cond = rewrite::block_condition(spec, &vars);
                        let head =
                            Term::compound(spec.predicate.name.clone(), vars.clone());
                        let inner = Term::compound(
                            format!("{}{}", spec.predicate.name, BLOCK_SUFFIX),
                            vars,
                        );
                        let wrapper = Term::compound(
                            ":-",
                            vec![head, Term::compound("when", vec![cond, inner])],
                        );
                        self.emit(
                            wrapper,
                            pos.clone(),
                            Provenance::Synthesized("block_when".to_string()),
                        );
                        self.out.stats.synthesized_terms += 1;
                    }
                    self.ctx.pending_blocks.extend(specs);
                }
                Err(e) => {
                    self.diag(
                        DiagLevel::Error,
                        Some(pos.clone()),
                        format!("invalid block directive: {e}"),
                    );
                }
            }
            return Ok(DirectiveOutcome::Consumed);
        }

        Ok(DirectiveOutcome::Emit)
    }

    fn set_double_quotes(&mut self, mode: DoubleQuotes) {
        self.pending_double_quotes = Some(mode);
    }

    fn rewrite_and_emit(&mut self, t: &Term, pos: &SourcePos) -> Result<(), PreprocError> {
        let declared = self.ctx.declared_dialect.clone();
        let applied = rewrite::apply_rules(t, declared.as_deref(), self.rules)?;
        let provenance = if applied.rule_ids.is_empty() {
            Provenance::Kept
        } else {
            Provenance::Rewritten(applied.rule_ids.join("+"))
        };
        self.out.stats.emitted_input_terms += 1;
        for term in applied.terms {
            let p = term.pos.clone().unwrap_or_else(|| pos.clone());
            self.emit(term, p, provenance.clone());
        }
        Ok(())
    }

    /// Renames the head of a clause whose predicate is under a block
    /// spec. Returns None when the clause is not affected.
    fn blocked_rename(&mut self, t: &Term, pos: &SourcePos) -> Option<Term> {
        let head = match t.match_compound(":-", 2) {
            Some(args) => &args[0],
            None => t,
        };
        let (name, arity) = head.functor_arity()?;
        let spec = self
            .ctx
            .pending_blocks
            .iter()
            .find(|s| s.predicate.name == name)?;
        if spec.predicate.arity != arity {
            self.diag(
                DiagLevel::Error,
                Some(pos.clone()),
                format!(
                    "block spec {} does not match clause head {name}/{arity}",
                    spec.predicate
                ),
            );
            return None;
        }
        let new_name = format!("{name}{BLOCK_SUFFIX}");
        let new_head = if arity == 0 {
            Term::atom(new_name)
        } else {
            let mut h = Term::compound(new_name, head.args().to_vec());
            h.pos = head.pos.clone();
            h
        };
        Some(match t.match_compound(":-", 2) {
            Some(args) => {
                let mut c = Term::compound(":-", vec![new_head, args[1].clone()]);
                c.pos = t.pos.clone();
                c
            }
            None => new_head,
        })
    }
}

fn block_var(i: usize) -> Term {
    if i < 26 {
        Term::var(((b'A' + i as u8) as char).to_string())
    } else {
        Term::var(format!("V{i}"))
    }
}

/// Expands one source text for a target dialect.
pub fn expand_source<'a>(
    source: &str,
    file_label: &str,
    target: &str,
    profiles: &'a DialectStore,
    rules: &[RewriteRule],
    config: &ExpandConfig,
) -> Result<ExpandedProgram, PreprocError> {
    let mut ctx = LoadContext::new(target, profiles, config)?;
    ctx.eval_ctx
        .set_load_context("file", Term::atom(file_label));

    let mut stream = ClauseStream::new(
        source,
        &SourcePos::start(file_label),
        config.read_opts.clone(),
    )?;

    let table_snapshot = Arc::new(ctx.table.clone());
    let mut ex = Expander {
        ctx,
        rules,
        out: ExpandedProgram::default(),
        table_snapshot,
        pending_double_quotes: None,
    };

    loop {
        if let Some(mode) = ex.pending_double_quotes.take() {
            stream.set_double_quotes(mode);
        }
        let next_pos = stream.next_pos();
        let Some(result) = stream.next_clause(&ex.ctx.table) else {
            break;
        };
        let term = match result {
            Ok(t) => t,
            Err(e) => {
                if ex.ctx.active() {
                    return Err(PreprocError::Read(e));
                }
                // Parse errors inside skipped regions are warnings;
                // other systems' syntax may legitimately live there.
                ex.diag(
                    DiagLevel::Warning,
                    e.pos.clone().or(next_pos),
                    format!("parse error in skipped region: {e}"),
                );
                if !stream.skip_clause() {
                    break;
                }
                continue;
            }
        };
        ex.out.stats.parsed += 1;
        let pos = term
            .pos
            .clone()
            .unwrap_or_else(|| SourcePos::start(file_label));

        if let Some(args) = term.match_compound(":-", 1) {
            let body = args[0].clone();
            match ex.handle_directive(&body, &pos)? {
                DirectiveOutcome::Consumed => {
                    ex.out.stats.consumed_directives += 1;
                    continue;
                }
                DirectiveOutcome::Emit => {
                    ex.rewrite_and_emit(&term, &pos)?;
                    continue;
                }
                DirectiveOutcome::NotDirective => unreachable!(),
            }
        }

        if !ex.ctx.active() {
            ex.out.stats.dropped += 1;
            continue;
        }

        if let Some(renamed) = ex.blocked_rename(&term, &pos) {
            ex.out.stats.emitted_input_terms += 1;
            ex.emit(renamed, pos, Provenance::Rewritten("block_when".to_string()));
            continue;
        }

        ex.rewrite_and_emit(&term, &pos)?;
    }

    if let Some(frame) = ex.ctx.cond_stack.last() {
        return Err(PreprocError::UnbalancedConditional {
            pos: frame.origin.clone(),
            what: "if without a matching endif".to_string(),
        });
    }

    ex.out.final_table = ex.ctx.table.clone();
    Ok(ex.out)
}

/// Reads and expands one file.
pub fn expand_program(
    file: &Path,
    target: &str,
    profiles: &DialectStore,
    rules: &[RewriteRule],
    config: &ExpandConfig,
) -> Result<ExpandedProgram, PreprocError> {
    let source = std::fs::read_to_string(file)
        .map_err(|e| PreprocError::Io(format!("{}: {e}", file.display())))?;
    let mut cfg = config.clone();
    if cfg.source_dir.is_none() {
        cfg.source_dir = file.parent().map(|p| p.to_path_buf());
    }
    expand_source(
        &source,
        &file.display().to_string(),
        target,
        profiles,
        rules,
        &cfg,
    )
}
