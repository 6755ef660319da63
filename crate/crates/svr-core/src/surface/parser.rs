//! Recursive-descent parser with token-index backtracking. Recovers at
//! declaration boundaries: on error it reports a diagnostic and skips to
//! the next `type`/`let`/`assert`/`check`.

use crate::surface::lexer::{lex, Span, Tok, Token};
use crate::surface::{Decl, Diagnostic, Param, SExpr, SFormula, SourceModule};
use crate::syntax::Name;

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

/// Nesting bound; deeper input gets a diagnostic instead of a stack
/// overflow.
const MAX_DEPTH: usize = 400;

type PResult<T> = Result<T, Diagnostic>;

/// Parse a standalone expression (the `--lhs`/`--rhs` snippets of the
/// equivalence query).
pub fn parse_expr_snippet(src: &str) -> Result<SExpr, Diagnostic> {
    let toks = lex(src).map_err(|e| Diagnostic::error(src, e.span, e.message))?;
    let mut p = Parser { src, toks, pos: 0, depth: 0 };
    let e = p.expr()?;
    if !p.at_end() {
        return Err(p.err_here("trailing input after the expression".into()));
    }
    Ok(e)
}

/// Parse a standalone formula.
pub fn parse_formula_snippet(src: &str) -> Result<SFormula, Diagnostic> {
    let toks = lex(src).map_err(|e| Diagnostic::error(src, e.span, e.message))?;
    let mut p = Parser { src, toks, pos: 0, depth: 0 };
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.err_here("trailing input after the formula".into()));
    }
    Ok(f)
}

pub fn parse(src: &str) -> (SourceModule, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let toks = match lex(src) {
        Ok(t) => t,
        Err(e) => {
            diagnostics.push(Diagnostic::error(src, e.span, e.message));
            return (SourceModule { decls: Vec::new() }, diagnostics);
        }
    };
    let mut p = Parser { src, toks, pos: 0, depth: 0 };
    let mut decls = Vec::new();
    while !p.at_end() {
        match p.decl() {
            Ok(d) => decls.push(d),
            Err(diag) => {
                diagnostics.push(diag);
                p.recover();
            }
        }
    }
    (SourceModule { decls }, diagnostics)
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|t| t.span)
            .unwrap_or(Span { start: self.src.len(), end: self.src.len() })
    }

    fn prev_span(&self) -> Span {
        self.toks
            .get(self.pos.saturating_sub(1))
            .map(|t| t.span)
            .unwrap_or(Span { start: 0, end: 0 })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.err_here(format!(
                "expected {tok}, found {}",
                self.peek().map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            )))
        }
    }

    fn err_here(&self, message: String) -> Diagnostic {
        Diagnostic::error(self.src, self.span(), message)
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Name::new(s))
            }
            other => Err(self.err_here(format!(
                "expected an identifier, found {}",
                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            ))),
        }
    }

    /// Skip to the next declaration keyword.
    fn recover(&mut self) {
        self.pos += 1;
        while let Some(t) = self.peek() {
            if matches!(t, Tok::KwType | Tok::KwLet | Tok::KwAssert | Tok::KwCheck) {
                return;
            }
            self.pos += 1;
        }
    }

    // ------------------------------------------------------------------
    // Declarations.

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        match self.peek() {
            Some(Tok::KwType) => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Equals)?;
                let def = self.type_def()?;
                Ok(Decl::Type { name, def, span: start.join(self.prev_span()) })
            }
            Some(Tok::KwLet) => {
                self.pos += 1;
                let recursive = self.eat(&Tok::KwRec);
                let name = self.ident()?;
                let (params, result) = self.params_and_result()?;
                self.expect(Tok::Equals)?;
                let body = self.expr()?;
                Ok(Decl::Let {
                    name,
                    params,
                    result,
                    body,
                    recursive,
                    span: start.join(self.prev_span()),
                })
            }
            Some(Tok::KwAssert) => {
                self.pos += 1;
                let lhs = self.expr_app()?;
                let expect_equiv = match self.bump() {
                    Some(Tok::EquivOp) => true,
                    Some(Tok::InequivOp) => false,
                    _ => return Err(self.err_here("expected `==` or `!=`".into())),
                };
                let rhs = self.expr_app()?;
                Ok(Decl::Assert { lhs, rhs, expect_equiv, span: start.join(self.prev_span()) })
            }
            Some(Tok::KwCheck) => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let formula = self.formula()?;
                Ok(Decl::CheckGoal { name, formula, span: start.join(self.prev_span()) })
            }
            other => Err(self.err_here(format!(
                "expected a declaration, found {}",
                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            ))),
        }
    }

    /// A type definition: a variant arm list when it looks like one,
    /// otherwise a formula alias.
    fn type_def(&mut self) -> PResult<SFormula> {
        let looks_variant = matches!(self.peek(), Some(Tok::Ident(s)) if s.chars().next().is_some_and(|c| c.is_uppercase()))
            && self.peek_at(1) == Some(&Tok::LBracket);
        if looks_variant {
            let mut arms = Vec::new();
            loop {
                let ctor = self.ident()?;
                self.expect(Tok::LBracket)?;
                let payload = if self.peek() == Some(&Tok::RBracket) {
                    None
                } else {
                    Some(self.formula()?)
                };
                self.expect(Tok::RBracket)?;
                arms.push((ctor, payload));
                if !self.eat(&Tok::Pipe) {
                    break;
                }
            }
            Ok(SFormula::VariantTy(arms))
        } else {
            self.formula()
        }
    }

    /// Parameters followed by an optional result annotation. `f x:t : R`
    /// keeps `x:t` as an annotated parameter and `R` as the result; when
    /// an unparenthesized annotation is followed by `=`, it is
    /// reinterpreted as the result annotation.
    fn params_and_result(&mut self) -> PResult<(Vec<Param>, Option<SFormula>)> {
        let mut params = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Ident(_)) => {
                    let start = self.span();
                    let name = self.ident()?;
                    if self.peek() == Some(&Tok::Colon) {
                        let save = self.pos;
                        self.pos += 1;
                        match self.formula_atom() {
                            Ok(annot) if self.peek() != Some(&Tok::Equals) => {
                                params.push(Param {
                                    name,
                                    annot: Some(annot),
                                    span: start.join(self.prev_span()),
                                });
                            }
                            _ => {
                                // `name : F =` — the colon starts the result
                                self.pos = save;
                                params.push(Param { name, annot: None, span: start });
                                break;
                            }
                        }
                    } else {
                        params.push(Param { name, annot: None, span: start });
                    }
                }
                Some(Tok::LParen)
                    if matches!(self.peek_at(1), Some(Tok::Ident(_)))
                        && self.peek_at(2) == Some(&Tok::Colon) =>
                {
                    let start = self.span();
                    self.pos += 1;
                    let name = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let annot = self.formula()?;
                    self.expect(Tok::RParen)?;
                    params.push(Param {
                        name,
                        annot: Some(annot),
                        span: start.join(self.prev_span()),
                    });
                }
                _ => break,
            }
        }
        let result = if self.eat(&Tok::Colon) { Some(self.formula()?) } else { None };
        Ok((params, result))
    }

    // ------------------------------------------------------------------
    // Expressions.

    pub(crate) fn expr(&mut self) -> PResult<SExpr> {
        self.depth += 1;
        let r = self.expr_inner();
        self.depth -= 1;
        r
    }

    fn expr_inner(&mut self) -> PResult<SExpr> {
        if self.depth > MAX_DEPTH {
            return Err(self.err_here("expression nesting too deep".into()));
        }
        match self.peek() {
            Some(Tok::KwFun) => {
                self.pos += 1;
                let first = self.ident()?;
                let after_first = self.pos;
                let mut names = vec![first];
                while matches!(self.peek(), Some(Tok::Ident(_))) {
                    names.push(self.ident()?);
                }
                if self.eat(&Tok::Arrow) {
                    let body = self.expr()?;
                    return Ok(SExpr::Lam(names, Box::new(body)));
                }
                // printer form `λx t`: one binder, no arrow
                self.pos = after_first;
                names.truncate(1);
                let body = self.expr()?;
                Ok(SExpr::Lam(names, Box::new(body)))
            }
            Some(Tok::KwMu) => {
                self.pos += 1;
                let a = self.ident()?;
                self.eat(&Tok::Arrow);
                let body = self.expr()?;
                Ok(SExpr::Mu(a, Box::new(body)))
            }
            Some(Tok::KwLet) => {
                self.pos += 1;
                let x = self.ident()?;
                self.expect(Tok::Equals)?;
                let rhs = self.expr()?;
                self.expect(Tok::KwIn)?;
                let body = self.expr()?;
                Ok(SExpr::LetIn(x, Box::new(rhs), Box::new(body)))
            }
            Some(Tok::KwMatch) => {
                self.pos += 1;
                let scrut = self.expr_app()?;
                self.expect(Tok::KwWith)?;
                let mut branches = Vec::new();
                self.eat(&Tok::Pipe);
                loop {
                    let ctor = self.ident()?;
                    self.expect(Tok::LBracket)?;
                    let binder = if self.peek() == Some(&Tok::RBracket) || self.eat(&Tok::Underscore) {
                        None
                    } else {
                        Some(self.ident()?)
                    };
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::Arrow)?;
                    let body = self.expr()?;
                    branches.push((ctor, binder, body));
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                }
                Ok(SExpr::Match(Box::new(scrut), branches))
            }
            Some(Tok::KwRewrite) => {
                self.pos += 1;
                let lhs = self.expr_app()?;
                self.expect(Tok::EquivOp)?;
                let rhs = self.expr_app()?;
                self.expect(Tok::KwIn)?;
                let body = self.expr()?;
                Ok(SExpr::Rewrite(Box::new(lhs), Box::new(rhs), Box::new(body)))
            }
            _ => {
                let e = self.expr_app()?;
                if self.peek() == Some(&Tok::Star) {
                    let star_span = self.span();
                    self.pos += 1;
                    let a = self.ident()?;
                    return Ok(SExpr::Restart(Box::new(e), a, star_span));
                }
                Ok(e)
            }
        }
    }

    /// Application chains with postfix projection and witnesses.
    fn expr_app(&mut self) -> PResult<SExpr> {
        let mut head = self.expr_postfix()?;
        loop {
            let starts_atom = matches!(
                self.peek(),
                Some(Tok::Ident(_))
                    | Some(Tok::LParen)
                    | Some(Tok::Scissors)
                    | Some(Tok::KwFun)
            ) || (self.peek() == Some(&Tok::LBrace) && !self.brace_adjacent());
            if !starts_atom {
                return Ok(head);
            }
            // `fun` as an argument must be parenthesized; stop before it
            if self.peek() == Some(&Tok::KwFun) {
                return Ok(head);
            }
            let arg = self.expr_postfix()?;
            head = SExpr::App(Box::new(head), Box::new(arg));
        }
    }

    /// Whether the `{` at the cursor directly touches the previous token
    /// (witness annotation) rather than starting a record literal.
    fn brace_adjacent(&self) -> bool {
        if self.pos == 0 {
            return false;
        }
        let prev = self.toks[self.pos - 1].span.end;
        self.span().start == prev
    }

    fn expr_postfix(&mut self) -> PResult<SExpr> {
        let mut e = self.expr_atom()?;
        loop {
            if self.eat(&Tok::Dot) {
                let l = self.ident()?;
                e = SExpr::Proj(Box::new(e), l);
                continue;
            }
            if self.peek() == Some(&Tok::LBrace) && self.brace_adjacent() {
                self.pos += 1;
                // predicate witness: `{X := …}`
                if matches!(self.peek(), Some(Tok::Ident(s)) if s.chars().next().is_some_and(|c| c.is_uppercase()))
                    && self.peek_at(1) == Some(&Tok::ColonEq)
                {
                    let x = self.ident()?;
                    self.expect(Tok::ColonEq)?;
                    let (params, body) = if self.eat(&Tok::LParen) {
                        let mut params = Vec::new();
                        while matches!(self.peek(), Some(Tok::Ident(_)))
                            && self.peek_at(1) == Some(&Tok::Comma)
                        {
                            params.push(self.ident()?);
                            self.expect(Tok::Comma)?;
                        }
                        let body = self.formula()?;
                        self.expect(Tok::RParen)?;
                        (params, body)
                    } else {
                        (Vec::new(), self.formula()?)
                    };
                    self.expect(Tok::RBrace)?;
                    e = SExpr::WitnessPred(Box::new(e), x, params, Box::new(body));
                } else {
                    let u = self.expr()?;
                    self.expect(Tok::RBrace)?;
                    e = SExpr::WitnessTerm(Box::new(e), Box::new(u));
                }
                continue;
            }
            return Ok(e);
        }
    }

    fn expr_atom(&mut self) -> PResult<SExpr> {
        let span = self.span();
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let name = Name::new(&s);
                // constructor literal C[…]
                if s.chars().next().is_some_and(|c| c.is_uppercase())
                    && self.peek() == Some(&Tok::LBracket)
                {
                    self.pos += 1;
                    if self.eat(&Tok::RBracket) {
                        return Ok(SExpr::Ctor(name, None));
                    }
                    let payload = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    return Ok(SExpr::Ctor(name, Some(Box::new(payload))));
                }
                Ok(SExpr::Var(name, span))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                if self.eat(&Tok::RBrace) {
                    return Ok(SExpr::Record(Vec::new()));
                }
                let mut fields = Vec::new();
                loop {
                    let l = self.ident()?;
                    self.expect(Tok::Equals)?;
                    let v = self.expr()?;
                    fields.push((l, v));
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(SExpr::Record(fields))
            }
            Some(Tok::Scissors) => {
                self.pos += 1;
                Ok(SExpr::Scissors)
            }
            Some(Tok::KwCase) => {
                // printer form: case v {C[x] → t | …}
                self.pos += 1;
                let scrut = self.expr_postfix()?;
                self.expect(Tok::LBrace)?;
                let mut branches = Vec::new();
                loop {
                    let ctor = self.ident()?;
                    self.expect(Tok::LBracket)?;
                    let binder = if self.peek() == Some(&Tok::RBracket) {
                        None
                    } else {
                        Some(self.ident()?)
                    };
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::Arrow)?;
                    let body = self.expr()?;
                    branches.push((ctor, binder, body));
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(SExpr::Match(Box::new(scrut), branches))
            }
            Some(Tok::KwFun) | Some(Tok::KwMu) | Some(Tok::KwMatch) | Some(Tok::KwLet)
            | Some(Tok::KwRewrite) => self.expr(),
            other => Err(self.err_here(format!(
                "expected an expression, found {}",
                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            ))),
        }
    }

    // ------------------------------------------------------------------
    // Formulas.

    pub(crate) fn formula(&mut self) -> PResult<SFormula> {
        self.depth += 1;
        let r = self.formula_inner();
        self.depth -= 1;
        r
    }

    fn formula_inner(&mut self) -> PResult<SFormula> {
        if self.depth > MAX_DEPTH {
            return Err(self.err_here("formula nesting too deep".into()));
        }
        match self.peek() {
            Some(Tok::KwForall) | Some(Tok::KwExists) => {
                let forall = self.peek() == Some(&Tok::KwForall);
                self.pos += 1;
                let name = self.ident()?;
                // optional arity: `forall X/2 A` (uppercase only)
                let uppercase = name.as_str().chars().next().is_some_and(|c| c.is_uppercase());
                let mut arity = 0usize;
                if uppercase && self.peek() == Some(&Tok::Ident("".into())) {
                    // unreachable; arity uses `/` which the lexer rejects
                }
                if uppercase && self.eat(&Tok::Colon) {
                    let n = self.ident()?;
                    arity = n.as_str().parse().map_err(|_| {
                        self.err_here("expected an arity after `:`".into())
                    })?;
                }
                let body = self.formula()?;
                Ok(match (forall, uppercase) {
                    (true, true) => SFormula::ForallPred(name, arity, Box::new(body)),
                    (true, false) => SFormula::ForallTerm(name, Box::new(body)),
                    (false, true) => SFormula::ExistsPred(name, arity, Box::new(body)),
                    (false, false) => SFormula::ExistsTerm(name, Box::new(body)),
                })
            }
            Some(Tok::KwPi) => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let dom = self.formula_atom()?;
                let cod = self.formula()?;
                Ok(SFormula::Pi(name, Box::new(dom), Box::new(cod)))
            }
            _ => self.formula_restrict(),
        }
    }

    fn formula_restrict(&mut self) -> PResult<SFormula> {
        let mut f = self.formula_arrow()?;
        while matches!(self.peek(), Some(Tok::Pipe) | Some(Tok::RestrictOp)) {
            self.pos += 1;
            let lhs = self.expr_app()?;
            self.expect(Tok::EquivOp)?;
            let rhs = self.expr_app()?;
            f = SFormula::Restrict(Box::new(f), Box::new(lhs), Box::new(rhs));
        }
        Ok(f)
    }

    fn formula_arrow(&mut self) -> PResult<SFormula> {
        let lhs = self.formula_member()?;
        if self.eat(&Tok::FatArrow) {
            let rhs = self.formula_arrow()?;
            return Ok(SFormula::Arrow(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    /// Equations, inequations and membership read a leading term with
    /// backtracking: `t == u`, `t != u`, `t ∈ A`.
    fn formula_member(&mut self) -> PResult<SFormula> {
        let save = self.pos;
        if let Ok(t) = self.expr_app() {
            match self.peek() {
                Some(Tok::EquivOp) => {
                    self.pos += 1;
                    let u = self.expr_app()?;
                    return Ok(SFormula::Equation(Box::new(t), Box::new(u)));
                }
                Some(Tok::InequivOp) => {
                    self.pos += 1;
                    let u = self.expr_app()?;
                    return Ok(SFormula::Inequation(Box::new(t), Box::new(u)));
                }
                Some(Tok::MemberOp) | Some(Tok::KwIn) => {
                    self.pos += 1;
                    let a = self.formula_atom()?;
                    return Ok(SFormula::Member(Box::new(t), Box::new(a)));
                }
                _ => {}
            }
        }
        self.pos = save;
        self.formula_atom()
    }

    fn formula_atom(&mut self) -> PResult<SFormula> {
        let span = self.span();
        match self.peek().cloned() {
            Some(Tok::KwBot) => {
                self.pos += 1;
                Ok(SFormula::Bot)
            }
            Some(Tok::KwTop) => {
                self.pos += 1;
                Ok(SFormula::Top)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::LBrace) => {
                self.pos += 1;
                if self.eat(&Tok::RBrace) {
                    return Ok(SFormula::RecordTy(Vec::new()));
                }
                let mut fields = Vec::new();
                loop {
                    let l = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let f = self.formula()?;
                    fields.push((l, f));
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(SFormula::RecordTy(fields))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let mut arms = Vec::new();
                loop {
                    let ctor = self.ident()?;
                    self.expect(Tok::LBracket)?;
                    let payload = if self.peek() == Some(&Tok::RBracket) {
                        None
                    } else {
                        Some(self.formula()?)
                    };
                    self.expect(Tok::RBracket)?;
                    arms.push((ctor, payload));
                    if !self.eat(&Tok::Pipe) {
                        break;
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(SFormula::VariantTy(arms))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let name = Name::new(&s);
                let uppercase = s.chars().next().is_some_and(|c| c.is_uppercase());
                if uppercase && self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    loop {
                        args.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                    return Ok(SFormula::Atom(name, args, span));
                }
                Ok(SFormula::Atom(name, Vec::new(), span))
            }
            other => Err(self.err_here(format!(
                "expected a formula, found {}",
                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            ))),
        }
    }
}
