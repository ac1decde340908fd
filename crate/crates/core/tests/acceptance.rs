//! Acceptance suite. Each test exercises one release criterion and
//! prints a `criterion N ... PASS` line (run with `--nocapture` to see
//! them).

mod common;

use portolog_core::reader::{read_term, tokenize, write_clause, DoubleQuotes, ReadOptions};
use portolog_core::{SourcePos, Term};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Criterion 5: >= 1000 randomly generated terms (depth <= 6) survive
/// write -> read structurally intact under 3 distinct operator tables;
/// the writer emits `term(a,b)` with no space after argument commas.
#[test]
fn criterion_5_reader_roundtrip() {
    let opts = ReadOptions {
        double_quotes: DoubleQuotes::Str,
        ..Default::default()
    };
    let cases = std::env::var("PORTOLOG_TEST_CASES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(400);
    for (name, table) in common::test_tables() {
        let mut runner = TestRunner::new(Config {
            cases,
            ..Config::default()
        });
        let table_ref = &table;
        let opts_ref = &opts;
        runner
            .run(&common::arb_term(), move |t| {
                let text = write_clause(&t, table_ref, true);
                let tokens = tokenize(&text, &SourcePos::start("rt"))
                    .map_err(|e| TestCaseError::fail(format!("lex {e}: {text}")))?;
                let back = read_term(&tokens, table_ref, opts_ref)
                    .map_err(|e| TestCaseError::fail(format!("read {e}: {text}")))?;
                prop_assert_eq!(&back, &t, "wrote: {}", text);
                Ok(())
            })
            .unwrap_or_else(|e| panic!("roundtrip failed under {name} table: {e}"));
    }

    let spaced = write_clause(
        &Term::compound("term", vec![Term::atom("a"), Term::atom("b")]),
        &portolog_core::OperatorTable::default_table(),
        true,
    );
    assert_eq!(spaced, "term(a,b).");
    println!("criterion 5 reader roundtrip (3 tables x 400 cases): PASS");
}
