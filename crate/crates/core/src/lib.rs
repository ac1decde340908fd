//! Portability toolkit for Edinburgh-family Prolog sources.
//!
//! The pipeline reads ISO-core Prolog under a dynamic operator table,
//! evaluates `:- if(Goal)` conditional-compilation directives against
//! per-dialect feature catalogs, applies dialect-conditional rewrite
//! rules, and lints programs for constructs that are absent or divergent
//! in a target dialect.

pub mod condeval;
pub mod dialects;
pub mod preprocessor;
pub mod reader;
pub mod rewrite;

pub use reader::{
    apply_op_directive, parse_program, read_term, tokenize, write_clause, write_term, ClauseStream,
    DoubleQuotes, Indicator, OpType, OperatorDef, OperatorTable, ReadOptions, SourcePos, Term,
    TermKind, VarPolicy,
};

pub use dialects::{
    load_profiles, DialectError, DialectId, DialectProfile, DialectStore, FeatureValue, PredOrigin,
};
pub use condeval::{evaluate, evaluate_tri, explain, EvalContext, EvalTrace, TriBool, UnknownPolicy};
pub use rewrite::{
    apply_rules, compile_block_directive, parse_rules, shipped_rules, validate_rules, BlockArg,
    BlockSpec, RewriteError, RewriteRule, RuleKind, ValidationIssue,
};
pub use preprocessor::{
    expand_program, expand_source, resolve_library, Dependency, DiagLevel, Diagnostic,
    DirectiveOutcome, ExpandConfig, ExpandStats, ExpandedEntry, ExpandedProgram, LibraryResolution,
    LoadContext, PreprocError, Provenance,
};
