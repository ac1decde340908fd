//! Shared test helpers: random term generation and operator tables.

use portolog_core::{OpType, OperatorTable, Term};
use proptest::prelude::*;

/// Atom names covering quoting, solo chars, and operator collisions.
pub fn atom_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("a".to_string()),
        Just("foo".to_string()),
        Just("bar_baz".to_string()),
        Just("hello world".to_string()),
        Just("it's".to_string()),
        Just("a\nb".to_string()),
        Just(String::new()),
        Just("[]".to_string()),
        Just("{}".to_string()),
        Just(".".to_string()),
        Just("!".to_string()),
        Just(";".to_string()),
        Just(",".to_string()),
        Just("|".to_string()),
        Just("%".to_string()),
        Just("0abc".to_string()),
        Just("-".to_string()),
        Just("+".to_string()),
        Just(":-".to_string()),
        Just("=..".to_string()),
        Just("mod".to_string()),
        Just("is".to_string()),
        Just("\\+".to_string()),
        Just("##".to_string()),
        "[a-z][a-z0-9_]{0,6}",
    ]
}

pub fn var_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("X".to_string()),
        Just("Y".to_string()),
        Just("Abc".to_string()),
        Just("_foo".to_string()),
        Just("_".to_string()),
        "[A-Z][a-zA-Z0-9_]{0,6}",
    ]
}

pub fn functor_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("f".to_string()),
        Just("g".to_string()),
        Just("sp ace".to_string()),
        Just("-".to_string()),
        Just("+".to_string()),
        Just("=".to_string()),
        Just(",".to_string()),
        Just(".".to_string()),
        Just("{}".to_string()),
        Just("[]".to_string()),
        Just(":-".to_string()),
        Just(":".to_string()),
        Just("===".to_string()),
        Just("block".to_string()),
        Just("pp".to_string()),
        "[a-z][a-z0-9_]{0,6}",
    ]
}

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        atom_name().prop_map(Term::atom),
        var_name().prop_map(Term::var),
        any::<i64>().prop_map(Term::int),
        Just(Term::int(
            "123456789012345678901234567890123456789".parse::<num_bigint::BigInt>().unwrap()
        )),
        Just(Term::int(
            "-98765432109876543210987654321".parse::<num_bigint::BigInt>().unwrap()
        )),
        any::<f64>()
            .prop_filter("finite floats only", |f| f.is_finite())
            .prop_map(Term::float),
        Just(Term::float(0.0)),
        Just(Term::float(-2.5)),
        Just(Term::float(1e300)),
        "[ -~]{0,8}".prop_map(Term::string),
        Just(Term::string("line\nbreak \"q\" \\ done")),
    ]
}

/// Random terms, depth <= 6, arity <= 5.
pub fn arb_term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(6, 64, 5, |inner| {
        (functor_name(), prop::collection::vec(inner, 1..=5))
            .prop_map(|(f, args)| Term::compound(f, args))
    })
}

/// The three operator tables the roundtrip property runs under.
pub fn test_tables() -> Vec<(&'static str, OperatorTable)> {
    let default = OperatorTable::default_table();
    let extended = default
        .with_op(700, OpType::Xfx, "===")
        .unwrap()
        .with_op(1150, OpType::Fx, "block")
        .unwrap()
        .with_op(300, OpType::Xf, "pp")
        .unwrap()
        .with_op(200, OpType::Fy, "##")
        .unwrap();
    // A table with standard entries removed: forces functional notation.
    let reduced = default
        .with_op(0, OpType::Yfx, "+")
        .unwrap()
        .with_op(0, OpType::Fy, "+")
        .unwrap()
        .with_op(0, OpType::Xfx, "=")
        .unwrap()
        .with_op(0, OpType::Xfy, ":")
        .unwrap();
    vec![
        ("default", default),
        ("extended", extended),
        ("reduced", reduced),
    ]
}
