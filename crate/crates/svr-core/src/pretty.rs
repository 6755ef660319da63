//! Printers producing the concrete notation used throughout: `λx t`,
//! `μα t`, `t ∗ π`, `[t]π`, `v.π`, `C[v]`, `{l = v; …}`. The surface
//! parser reads the same notation back (with ASCII fallbacks).

use crate::syntax::{Process, Stack, Term, Value};
use std::fmt;

/// Precedence levels for terms: atoms bind tightest, application next,
/// binders (λ/μ) extend as far right as possible.
fn value_atom(v: &Value) -> bool {
    matches!(
        v,
        Value::Var(_) | Value::Ctor(..) | Value::Record(_) | Value::Scissors
    )
}

fn term_atom(t: &Term) -> bool {
    match t {
        Term::Val(v) => value_atom(v),
        Term::TermVar(_) | Term::Proj(..) => true,
        _ => false,
    }
}

pub fn value_string(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v).unwrap();
    s
}

pub fn term_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t).unwrap();
    s
}

pub fn stack_string(st: &Stack) -> String {
    let mut s = String::new();
    write_stack(&mut s, st).unwrap();
    s
}

pub fn process_string(p: &Process) -> String {
    let mut s = String::new();
    write_process(&mut s, p).unwrap();
    s
}

fn write_value(f: &mut impl fmt::Write, v: &Value) -> fmt::Result {
    match v {
        Value::Var(x) => write!(f, "{x}"),
        Value::Lam(x, t) => {
            write!(f, "λ{x} ")?;
            write_term(f, t)
        }
        Value::Ctor(c, v) => {
            if v.is_unit() {
                write!(f, "{c}[]")
            } else {
                write!(f, "{c}[")?;
                write_value(f, v)?;
                write!(f, "]")
            }
        }
        Value::Record(fs) => {
            write!(f, "{{")?;
            for (i, (l, v)) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, "; ")?;
                }
                write!(f, "{l} = ")?;
                write_value(f, v)?;
            }
            write!(f, "}}")
        }
        Value::Scissors => write!(f, "✂"),
        Value::UnitProbe(v) => {
            write!(f, "unit(")?;
            write_value(f, v)?;
            write!(f, ")")
        }
    }
}

fn write_value_atomic(f: &mut impl fmt::Write, v: &Value) -> fmt::Result {
    if value_atom(v) {
        write_value(f, v)
    } else {
        write!(f, "(")?;
        write_value(f, v)?;
        write!(f, ")")
    }
}

fn write_term_atomic(f: &mut impl fmt::Write, t: &Term) -> fmt::Result {
    if term_atom(t) {
        write_term(f, t)
    } else {
        write!(f, "(")?;
        write_term(f, t)?;
        write!(f, ")")
    }
}

fn write_term(f: &mut impl fmt::Write, t: &Term) -> fmt::Result {
    match t {
        Term::Val(v) => write_value(f, v),
        Term::TermVar(a) => write!(f, "{a}"),
        Term::App(t, u) => {
            // application is left-associative; the left side may itself be
            // an application without parentheses
            match &**t {
                Term::App(..) => write_term(f, t)?,
                _ => write_term_atomic(f, t)?,
            }
            write!(f, " ")?;
            write_term_atomic(f, u)
        }
        Term::Mu(a, t) => {
            write!(f, "μ{a} ")?;
            write_term(f, t)
        }
        Term::Proc(p) => {
            write!(f, "(")?;
            write_process(f, p)?;
            write!(f, ")")
        }
        Term::Proj(v, l) => {
            write_value_atomic(f, v)?;
            write!(f, ".{l}")
        }
        Term::Case(v, bs) => {
            write!(f, "case ")?;
            write_value_atomic(f, v)?;
            write!(f, " {{")?;
            for (i, (c, (x, body))) in bs.iter().enumerate() {
                if i > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{c}[{x}] → ")?;
                write_term(f, body)?;
            }
            write!(f, "}}")
        }
        Term::Delta(v, w) => {
            write!(f, "δ(")?;
            write_value(f, v)?;
            write!(f, ", ")?;
            write_value(f, w)?;
            write!(f, ")")
        }
    }
}

fn write_stack(f: &mut impl fmt::Write, s: &Stack) -> fmt::Result {
    match s {
        Stack::Var(a) => write!(f, "{a}"),
        Stack::Push(v, s) => {
            write_value_atomic(f, v)?;
            write!(f, ".")?;
            write_stack(f, s)
        }
        Stack::Frame(t, s) => {
            write!(f, "[")?;
            write_term(f, t)?;
            write!(f, "]")?;
            write_stack(f, s)
        }
    }
}

fn write_process(f: &mut impl fmt::Write, p: &Process) -> fmt::Result {
    write_term(f, &p.term)?;
    write!(f, " ∗ ")?;
    write_stack(f, &p.stack)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_value(f, self)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stack(f, self)
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_process(f, self)
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::*;
    use std::collections::BTreeMap;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn prints_calculus_notation() {
        let id = Term::lam("x", Term::var("x"));
        assert_eq!(id.to_string(), "λx x");

        let app = Term::app(id.clone(), Term::Val(Value::unit()));
        assert_eq!(app.to_string(), "(λx x) {}");

        let p = Process::new(app, Stack::Var(n("α")));
        assert_eq!(p.to_string(), "(λx x) {} ∗ α");

        let frame = Stack::Frame(Box::new(id), Box::new(Stack::Var(n("α"))));
        assert_eq!(frame.to_string(), "[λx x]α");

        let push = Stack::Push(
            Box::new(Value::Lam(n("x"), Box::new(Term::var("x")))),
            Box::new(Stack::Var(n("α"))),
        );
        assert_eq!(push.to_string(), "(λx x).α");
    }

    #[test]
    fn prints_ctor_record_case() {
        let z = Value::Ctor(n("Z"), Box::new(Value::unit()));
        assert_eq!(z.to_string(), "Z[]");
        let s = Value::Ctor(n("S"), Box::new(z.clone()));
        assert_eq!(s.to_string(), "S[Z[]]");

        let mut fs = BTreeMap::new();
        fs.insert(n("l1"), Value::unit());
        fs.insert(n("l2"), z.clone());
        assert_eq!(Value::Record(fs).to_string(), "{l1 = {}; l2 = Z[]}");

        let mut bs = BTreeMap::new();
        bs.insert(n("Z"), (n("x"), Term::var("x")));
        let case = Term::Case(Box::new(z), bs);
        assert_eq!(case.to_string(), "case Z[] {Z[x] → x}");
    }

    #[test]
    fn application_associativity() {
        let t = Term::app(
            Term::app(Term::var("f"), Term::var("x")),
            Term::var("y"),
        );
        assert_eq!(t.to_string(), "f x y");
        let u = Term::app(
            Term::var("f"),
            Term::app(Term::var("x"), Term::var("y")),
        );
        assert_eq!(u.to_string(), "f (x y)");
    }
}
