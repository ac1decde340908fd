//! Canonical term writer.
//!
//! Output re-reads to the same term under the same operator table.
//! Argument-separating commas carry no trailing space (`term(a,b)`);
//! spaces appear only where two adjacent tokens would otherwise fuse.

use super::ops::{OpType, OperatorTable};
use super::term::{Term, TermKind};
use super::token::{is_alnum_char, is_graphic_char};

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    /// Operand context with a maximum priority. Operator atoms must be
    /// bracketed here unless the max is 1201 (bracket interior).
    Operand(u32),
    /// Argument or list-item context: max 999; a lone operator atom is
    /// allowed bare (the ISO `arg` rule).
    Arg,
}

impl Ctx {
    fn op_max(self) -> u32 {
        match self {
            Ctx::Operand(m) => m,
            Ctx::Arg => 999,
        }
    }

    fn atom_max(self) -> u32 {
        match self {
            Ctx::Operand(m) => m,
            Ctx::Arg => 1201,
        }
    }
}

struct Writer<'a> {
    table: &'a OperatorTable,
    quoted: bool,
    out: String,
}

fn need_sep(a: char, b: char) -> bool {
    (is_alnum_char(a) && is_alnum_char(b))
        || (is_graphic_char(a) && is_graphic_char(b))
        || (a == '\'' && b == '\'')
        || (a == '"' && b == '"')
        || (a.is_ascii_digit() && (b == '\'' || b == '"'))
}

impl<'a> Writer<'a> {
    fn push_tok(&mut self, s: &str) {
        if let (Some(last), Some(first)) = (self.out.chars().last(), s.chars().next()) {
            if need_sep(last, first) {
                self.out.push(' ');
            }
        }
        self.out.push_str(s);
    }

    fn push_raw(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn atom_text(&self, name: &str, as_functor: bool) -> String {
        if self.quoted && needs_quotes(name, as_functor) {
            quote_atom(name)
        } else {
            name.to_string()
        }
    }

    fn term(&mut self, t: &Term, ctx: Ctx) {
        match &t.kind {
            TermKind::Int(i) => self.push_tok(&i.to_string()),
            TermKind::Float(f) => self.push_tok(&format_float(*f)),
            TermKind::Var(v) => self.push_tok(v),
            TermKind::Str(s) => {
                if self.quoted {
                    self.push_tok(&quote_string(s));
                } else {
                    self.push_tok(s);
                }
            }
            TermKind::Atom(name) => {
                if self.table.is_operator(name) && ctx.atom_max() < 1201 {
                    self.push_raw("(");
                    let text = self.atom_text(name, false);
                    self.push_tok(&text);
                    self.push_raw(")");
                } else {
                    let text = self.atom_text(name, false);
                    self.push_tok(&text);
                }
            }
            TermKind::Compound(f, args) => self.compound(f, args, ctx),
        }
    }

    fn compound(&mut self, f: &str, args: &[Term], ctx: Ctx) {
        if f == "." && args.len() == 2 {
            self.list(&args[0], &args[1]);
            return;
        }
        if f == "{}" && args.len() == 1 {
            self.push_raw("{");
            self.term(&args[0], Ctx::Operand(1201));
            self.push_raw("}");
            return;
        }
        if args.len() == 2 {
            if let Some((p, ty)) = self.table.infix(f) {
                self.infix(f, p, ty, args, ctx);
                return;
            }
        }
        if args.len() == 1 {
            if let Some((p, ty)) = self.table.prefix(f) {
                self.prefix(f, p, ty, &args[0], ctx);
                return;
            }
            if let Some((p, ty)) = self.table.postfix(f) {
                self.postfix(f, p, ty, &args[0], ctx);
                return;
            }
        }
        self.functional(f, args);
    }

    fn infix(&mut self, f: &str, p: u32, ty: OpType, args: &[Term], ctx: Ctx) {
        let (lmax, rmax) = match ty {
            OpType::Xfx => (p - 1, p - 1),
            OpType::Xfy => (p - 1, p),
            OpType::Yfx => (p, p - 1),
            _ => unreachable!(),
        };
        let bracket = p > ctx.op_max();
        if bracket {
            self.push_raw("(");
        }
        self.term(&args[0], Ctx::Operand(lmax));
        if f == "," {
            self.push_raw(",");
        } else {
            let text = self.atom_text(f, false);
            self.push_tok(&text);
        }
        self.term(&args[1], Ctx::Operand(rmax));
        if bracket {
            self.push_raw(")");
        }
    }

    fn prefix(&mut self, f: &str, p: u32, ty: OpType, arg: &Term, ctx: Ctx) {
        let argmax = if ty == OpType::Fy { p } else { p - 1 };
        let bracket = p > ctx.op_max();
        if bracket {
            self.push_raw("(");
        }
        let text = self.atom_text(f, false);
        self.push_tok(&text);
        // Render the operand apart: if it comes out parenthesised, an
        // adjacent paren would turn the operator into a functor
        // (functional notation parses its interior as an arglist), and
        // `-` followed by a leading digit would fuse into a negative
        // number literal.
        let mut sub = Writer {
            table: self.table,
            quoted: self.quoted,
            out: String::new(),
        };
        sub.term(arg, Ctx::Operand(argmax));
        let first = sub.out.chars().next();
        if first == Some('(') || (f == "-" && first.is_some_and(|c| c.is_ascii_digit())) {
            self.push_raw(" ");
            self.push_raw(&sub.out);
        } else {
            self.push_tok(&sub.out);
        }
        if bracket {
            self.push_raw(")");
        }
    }

    fn postfix(&mut self, f: &str, p: u32, ty: OpType, arg: &Term, ctx: Ctx) {
        let lmax = match ty {
            OpType::Yf => p,
            _ => p - 1,
        };
        let bracket = p > ctx.op_max();
        if bracket {
            self.push_raw("(");
        }
        self.term(arg, Ctx::Operand(lmax));
        let text = self.atom_text(f, false);
        self.push_tok(&text);
        if bracket {
            self.push_raw(")");
        }
    }

    fn functional(&mut self, f: &str, args: &[Term]) {
        let text = self.atom_text(f, true);
        self.push_tok(&text);
        self.push_raw("(");
        for (i, arg) in args.iter().enumerate() {
            if i > 0 {
                self.push_raw(",");
            }
            self.term(arg, Ctx::Arg);
        }
        self.push_raw(")");
    }

    fn list(&mut self, head: &Term, tail: &Term) {
        self.push_raw("[");
        self.term(head, Ctx::Arg);
        let mut cur = tail;
        loop {
            match &cur.kind {
                TermKind::Compound(f, args) if f == "." && args.len() == 2 => {
                    self.push_raw(",");
                    self.term(&args[0], Ctx::Arg);
                    cur = &args[1];
                }
                TermKind::Atom(a) if a == "[]" => break,
                _ => {
                    self.push_raw("|");
                    self.term(cur, Ctx::Arg);
                    break;
                }
            }
        }
        self.push_raw("]");
    }
}

/// True when the atom cannot be written bare.
fn needs_quotes(name: &str, as_functor: bool) -> bool {
    if name.is_empty() || name == "." {
        return true;
    }
    if name == "[]" || name == "{}" {
        // As a functor the bracket pair would not re-read as a name.
        return as_functor;
    }
    if name == "!" || name == ";" {
        return false;
    }
    let mut chars = name.chars();
    let first = chars.next().unwrap();
    if first.is_alphabetic() && !first.is_uppercase() {
        return !name.chars().all(is_alnum_char);
    }
    !name.chars().all(is_graphic_char)
}

fn escape_into(out: &mut String, c: char, quote: char) {
    match c {
        '\\' => out.push_str("\\\\"),
        '\x07' => out.push_str("\\a"),
        '\x08' => out.push_str("\\b"),
        '\x0c' => out.push_str("\\f"),
        '\n' => out.push_str("\\n"),
        '\r' => out.push_str("\\r"),
        '\t' => out.push_str("\\t"),
        '\x0b' => out.push_str("\\v"),
        c if c == quote => {
            out.push('\\');
            out.push(c);
        }
        c if (c as u32) < 0x20 || c == '\x7f' => {
            out.push_str(&format!("\\x{:x}\\", c as u32));
        }
        c => out.push(c),
    }
}

fn quote_atom(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 2);
    out.push('\'');
    for c in name.chars() {
        escape_into(&mut out, c, '\'');
    }
    out.push('\'');
    out
}

fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        escape_into(&mut out, c, '"');
    }
    out.push('"');
    out
}

/// Formats a float so it re-reads to the same value and satisfies ISO
/// float syntax (a fraction part is always present).
fn format_float(f: f64) -> String {
    if f.is_nan() {
        return "nan".to_string();
    }
    if f.is_infinite() {
        return if f < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    let mut s = format!("{f:?}");
    if let Some(epos) = s.find(['e', 'E']) {
        if !s[..epos].contains('.') {
            s.insert_str(epos, ".0");
        }
    } else if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

/// Writes a term using operator notation under the given table.
pub fn write_term(t: &Term, table: &OperatorTable, quoted: bool) -> String {
    let mut w = Writer {
        table,
        quoted,
        out: String::new(),
    };
    w.term(t, Ctx::Operand(1200));
    w.out
}

/// Writes a full clause: the term followed by its end dot (separated by
/// a space only when token rules require it).
pub fn write_clause(t: &Term, table: &OperatorTable, quoted: bool) -> String {
    let mut w = Writer {
        table,
        quoted,
        out: String::new(),
    };
    w.term(t, Ctx::Operand(1200));
    w.push_tok(".");
    w.out
}

#[cfg(test)]
mod tests {
    use super::super::parse::{read_term, ReadOptions};
    use super::super::term::SourcePos;
    use super::super::token::tokenize;
    use super::*;

    fn dt() -> OperatorTable {
        OperatorTable::default_table()
    }

    fn reread(text: &str, table: &OperatorTable) -> Term {
        let tokens = tokenize(text, &SourcePos::start("w")).unwrap();
        read_term(&tokens, table, &ReadOptions::default()).unwrap()
    }

    #[test]
    fn no_space_after_argument_comma() {
        let t = Term::compound("term", vec![Term::atom("a"), Term::atom("b")]);
        assert_eq!(write_term(&t, &dt(), true), "term(a,b)");
    }

    #[test]
    fn quoting() {
        assert_eq!(
            write_term(&Term::atom("hello world"), &dt(), true),
            "'hello world'"
        );
        assert_eq!(write_term(&Term::atom("hello world"), &dt(), false), "hello world");
        assert_eq!(write_term(&Term::atom("abc"), &dt(), true), "abc");
        // Graphic atoms stay unquoted; operator atoms are bracketed in
        // operand position.
        assert_eq!(write_term(&Term::atom("##"), &dt(), true), "##");
        assert_eq!(write_term(&Term::atom("=.."), &dt(), true), "(=..)");
        assert_eq!(write_term(&Term::atom("[]"), &dt(), true), "[]");
        assert_eq!(write_term(&Term::atom("it's"), &dt(), true), "'it\\'s'");
    }

    #[test]
    fn operator_notation() {
        let t = Term::compound(
            ":-",
            vec![
                Term::atom("a"),
                Term::compound(",", vec![Term::atom("b"), Term::atom("c")]),
            ],
        );
        let out = write_clause(&t, &dt(), true);
        assert_eq!(out, "a:-b,c.");
        assert_eq!(reread(&out, &dt()), t);
    }

    #[test]
    fn priority_bracketing() {
        // , (1000) inside an argument list needs brackets.
        let inner = Term::compound(",", vec![Term::atom("a"), Term::atom("b")]);
        let t = Term::compound("f", vec![inner]);
        let out = write_term(&t, &dt(), true);
        assert_eq!(out, "f((a,b))");

        // xfx needs brackets for a nested equal-priority operand.
        let e = Term::compound(
            "=",
            vec![
                Term::compound("=", vec![Term::atom("a"), Term::atom("b")]),
                Term::atom("c"),
            ],
        );
        let out = write_clause(&e, &dt(), true);
        assert_eq!(reread(&out, &dt()), e);
        assert!(out.starts_with('('));
    }

    #[test]
    fn operator_atom_as_operand_is_bracketed() {
        let t = Term::compound("=", vec![Term::atom("-"), Term::int(1)]);
        let out = write_clause(&t, &dt(), true);
        assert_eq!(reread(&out, &dt()), t);

        // ... but stays bare as a plain argument.
        let a = Term::compound("p", vec![Term::int(0), Term::atom("-")]);
        assert_eq!(write_term(&a, &dt(), true), "p(0,-)");
        assert_eq!(reread(&write_clause(&a, &dt(), true), &dt()), a);
    }

    #[test]
    fn negative_numbers() {
        let neg = Term::int(-5);
        assert_eq!(write_term(&neg, &dt(), true), "-5");
        assert_eq!(reread("-5.", &dt()), neg);

        // -(5) is a different term and must not collapse to -5.
        let app = Term::compound("-", vec![Term::int(5)]);
        let out = write_clause(&app, &dt(), true);
        assert_eq!(reread(&out, &dt()), app);

        // 1 - -5 keeps the tokens apart.
        let t = Term::compound("-", vec![Term::int(1), Term::int(-5)]);
        let out = write_clause(&t, &dt(), true);
        assert_eq!(reread(&out, &dt()), t);
    }

    #[test]
    fn graphic_token_separation() {
        let t = Term::compound("-", vec![Term::compound("-", vec![Term::atom("a")])]);
        let out = write_clause(&t, &dt(), true);
        assert_eq!(reread(&out, &dt()), t);
        assert!(out.contains("- -") || out.contains("-(-"));
    }

    #[test]
    fn alphabetic_operator_separation() {
        let t = Term::compound("is", vec![Term::var("X"), Term::int(3)]);
        assert_eq!(write_term(&t, &dt(), true), "X is 3");
    }

    #[test]
    fn lists() {
        let t = Term::list(vec![Term::int(1), Term::int(2)]);
        assert_eq!(write_term(&t, &dt(), true), "[1,2]");
        let p = Term::partial_list(vec![Term::atom("a")], Term::var("T"));
        assert_eq!(write_term(&p, &dt(), true), "[a|T]");
    }

    #[test]
    fn strings_and_floats() {
        assert_eq!(write_term(&Term::string("ab"), &dt(), true), "\"ab\"");
        assert_eq!(write_term(&Term::float(3.14), &dt(), true), "3.14");
        assert_eq!(write_term(&Term::float(1.0), &dt(), true), "1.0");
        let big = write_term(&Term::float(1e300), &dt(), true);
        assert_eq!(big.parse::<f64>().unwrap(), 1e300);
        assert!(big.contains('.'));
    }

    #[test]
    fn curly_terms() {
        let t = Term::compound("{}", vec![Term::atom("x")]);
        assert_eq!(write_term(&t, &dt(), true), "{x}");
        assert_eq!(reread("{x}.", &dt()), t);
    }
}
