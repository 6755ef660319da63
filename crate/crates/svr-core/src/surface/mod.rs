//! The surface language: an ML-flavoured notation for the core calculus
//! with type definitions, (recursive) value definitions, equivalence
//! assertions and goal checks. One module per `.svr` file; declarations
//! are processed top to bottom.

mod desugar;
mod lexer;
mod parser;

pub use desugar::{
    desugar_expr_in_scope, desugar_formula_snippet, elaborate_module, link_definition, DeclKind,
    DeclOutcome, DeclStatus, Module,
};
pub use lexer::{lex, line_col, Span};
pub use parser::{parse, parse_expr_snippet, parse_formula_snippet};

use crate::syntax::Name;
use serde::Serialize;

/// Parsed expressions. Identifier resolution happens at desugaring.
#[derive(Clone, Debug)]
pub enum SExpr {
    Var(Name, Span),
    Lam(Vec<Name>, Box<SExpr>),
    App(Box<SExpr>, Box<SExpr>),
    Mu(Name, Box<SExpr>),
    /// `e * a`
    Restart(Box<SExpr>, Name, Span),
    /// `C[e]` / `C[]`
    Ctor(Name, Option<Box<SExpr>>),
    Record(Vec<(Name, SExpr)>),
    Proj(Box<SExpr>, Name),
    Match(Box<SExpr>, Vec<(Name, Option<Name>, SExpr)>),
    LetIn(Name, Box<SExpr>, Box<SExpr>),
    Scissors,
    /// `e{u}`
    WitnessTerm(Box<SExpr>, Box<SExpr>),
    /// `e{X := (a₁, …, B)}`
    WitnessPred(Box<SExpr>, Name, Vec<Name>, Box<SFormula>),
    /// `rewrite t == u in e`
    Rewrite(Box<SExpr>, Box<SExpr>, Box<SExpr>),
}

/// Parsed formulas.
#[derive(Clone, Debug)]
pub enum SFormula {
    /// Bare identifier: a named type (lowercase) or a predicate variable
    /// (uppercase), possibly applied to term arguments.
    Atom(Name, Vec<SExpr>, Span),
    Arrow(Box<SFormula>, Box<SFormula>),
    ForallTerm(Name, Box<SFormula>),
    ExistsTerm(Name, Box<SFormula>),
    ForallPred(Name, usize, Box<SFormula>),
    ExistsPred(Name, usize, Box<SFormula>),
    Pi(Name, Box<SFormula>, Box<SFormula>),
    RecordTy(Vec<(Name, SFormula)>),
    VariantTy(Vec<(Name, Option<SFormula>)>),
    Member(Box<SExpr>, Box<SFormula>),
    Restrict(Box<SFormula>, Box<SExpr>, Box<SExpr>),
    Equation(Box<SExpr>, Box<SExpr>),
    Inequation(Box<SExpr>, Box<SExpr>),
    Bot,
    Top,
}

/// One parameter of a `let`: name and optional annotation.
#[derive(Clone, Debug)]
pub struct Param {
    pub name: Name,
    pub annot: Option<SFormula>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum Decl {
    Type { name: Name, def: SFormula, span: Span },
    Let {
        name: Name,
        params: Vec<Param>,
        result: Option<SFormula>,
        body: SExpr,
        recursive: bool,
        span: Span,
    },
    Assert { lhs: SExpr, rhs: SExpr, expect_equiv: bool, span: Span },
    CheckGoal { name: Name, formula: SFormula, span: Span },
}

#[derive(Clone, Debug)]
pub struct SourceModule {
    pub decls: Vec<Decl>,
}

/// Severity of a diagnostic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A message anchored to a source span.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(src: &str, span: Span, message: impl Into<String>) -> Diagnostic {
        let (line, column) = line_col(src, span.start);
        Diagnostic {
            severity: Severity::Error,
            line,
            column,
            start: span.start,
            end: span.end,
            message: message.into(),
        }
    }

    pub fn render(&self) -> String {
        format!("{}:{}: {}", self.line, self.column, self.message)
    }
}
