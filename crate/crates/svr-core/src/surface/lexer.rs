//! Tokenizer for the surface language. Unicode operators and their ASCII
//! fallbacks produce the same tokens: `→`/`->`, `⇒`/`=>`, `≡`/`==`,
//! `≢`/`!=`, `∗`/`*`, `✂`/`%%`, `μ`/`mu`, `∀`/`forall`, `∃`/`exists`,
//! `Π`/`Pi`, `∈`/`in`, `↾`/`|` (in formulas), `⊥`/`bot`, `⊤`/`top`.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    KwType,
    KwLet,
    KwRec,
    KwIn,
    KwMatch,
    KwWith,
    KwCase,
    KwFun,
    KwMu,
    KwAssert,
    KwCheck,
    KwRewrite,
    KwForall,
    KwExists,
    KwPi,
    KwBot,
    KwTop,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Colon,
    ColonEq,
    Dot,
    Comma,
    Pipe,
    Equals,
    Star,
    Arrow,      // -> / →
    FatArrow,   // => / ⇒
    EquivOp,    // == / ≡
    InequivOp,  // != / ≢
    MemberOp,   // ∈ (`in` doubles as the keyword)
    RestrictOp, // ↾
    Scissors,   // %% / ✂
    Underscore,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::KwType => "`type`",
            Tok::KwLet => "`let`",
            Tok::KwRec => "`rec`",
            Tok::KwIn => "`in`",
            Tok::KwMatch => "`match`",
            Tok::KwCase => "`case`",
            Tok::KwWith => "`with`",
            Tok::KwFun => "`fun`",
            Tok::KwMu => "`mu`",
            Tok::KwAssert => "`assert`",
            Tok::KwCheck => "`check`",
            Tok::KwRewrite => "`rewrite`",
            Tok::KwForall => "`forall`",
            Tok::KwExists => "`exists`",
            Tok::KwPi => "`Pi`",
            Tok::KwBot => "`bot`",
            Tok::KwTop => "`top`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::ColonEq => "`:=`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::Pipe => "`|`",
            Tok::Equals => "`=`",
            Tok::Star => "`*`",
            Tok::Arrow => "`->`",
            Tok::FatArrow => "`=>`",
            Tok::EquivOp => "`==`",
            Tok::InequivOp => "`!=`",
            Tok::MemberOp => "`∈`",
            Tok::RestrictOp => "`↾`",
            Tok::Scissors => "`✂`",
            Tok::Underscore => "`_`",
        };
        f.write_str(s)
    }
}

/// Byte span within the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "type" => Tok::KwType,
        "let" => Tok::KwLet,
        "rec" => Tok::KwRec,
        "in" => Tok::KwIn,
        "match" => Tok::KwMatch,
        "case" => Tok::KwCase,
        "with" => Tok::KwWith,
        "fun" => Tok::KwFun,
        "mu" => Tok::KwMu,
        "assert" => Tok::KwAssert,
        "check" => Tok::KwCheck,
        "rewrite" => Tok::KwRewrite,
        "forall" => Tok::KwForall,
        "exists" => Tok::KwExists,
        "Pi" => Tok::KwPi,
        "bot" => Tok::KwBot,
        "top" => Tok::KwTop,
        "_" => Tok::Underscore,
        _ => return None,
    })
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().unwrap();
        let clen = c.len_utf8();
        // whitespace
        if c.is_whitespace() {
            i += clen;
            continue;
        }
        // line comments: `--` and `//`
        if rest.starts_with("--") || rest.starts_with("//") {
            while i < src.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let mut push1 = |tok: Tok, len: usize| {
            out.push(Token { tok, span: Span { start, end: start + len } });
        };
        // multi-char ASCII operators first
        if rest.starts_with("->") {
            push1(Tok::Arrow, 2);
            i += 2;
            continue;
        }
        if rest.starts_with("=>") {
            push1(Tok::FatArrow, 2);
            i += 2;
            continue;
        }
        if rest.starts_with("==") {
            push1(Tok::EquivOp, 2);
            i += 2;
            continue;
        }
        if rest.starts_with("!=") {
            push1(Tok::InequivOp, 2);
            i += 2;
            continue;
        }
        if rest.starts_with("%%") {
            push1(Tok::Scissors, 2);
            i += 2;
            continue;
        }
        if rest.starts_with(":=") {
            push1(Tok::ColonEq, 2);
            i += 2;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '|' => Some(Tok::Pipe),
            '=' => Some(Tok::Equals),
            '*' | '∗' => Some(Tok::Star),
            '→' => Some(Tok::Arrow),
            '⇒' => Some(Tok::FatArrow),
            '≡' => Some(Tok::EquivOp),
            '≢' => Some(Tok::InequivOp),
            '∈' => Some(Tok::MemberOp),
            '↾' => Some(Tok::RestrictOp),
            '✂' => Some(Tok::Scissors),
            '∀' => Some(Tok::KwForall),
            '∃' => Some(Tok::KwExists),
            'Π' => Some(Tok::KwPi),
            '⊥' => Some(Tok::KwBot),
            '⊤' => Some(Tok::KwTop),
            'μ' => Some(Tok::KwMu),
            'λ' => Some(Tok::KwFun),
            _ => None,
        };
        if let Some(tok) = single {
            push1(tok, clen);
            i += clen;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < src.len() {
                let cj = src[j..].chars().next().unwrap();
                if cj.is_ascii_alphanumeric() || cj == '_' || cj == '\'' {
                    j += cj.len_utf8();
                } else {
                    break;
                }
            }
            let word = &src[i..j];
            // primed identifiers come from the fresh-name supply; keep
            // the supply ahead of anything read back
            if let Some(pos) = word.rfind('\'') {
                if let Ok(n) = word[pos + 1..].parse::<u64>() {
                    crate::syntax::reserve_fresh_above(n);
                }
            }
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
            out.push(Token { tok, span: Span { start: i, end: j } });
            i = j;
            continue;
        }
        return Err(LexError {
            span: Span { start: i, end: i + clen },
            message: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

/// Line/column (1-based) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= offset {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}
