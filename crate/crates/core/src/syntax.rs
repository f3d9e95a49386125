//! Tokenizer shared by every surface grammar (`.tbox`, `.map`, `.sys`,
//! `.prop`, bracketed queries and instance literals).

use std::fmt;

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `?name`, stored without the question mark.
    Var(String),
    Str(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Semi,
    Pipe,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Arrow,
    Bang,
    Underscore,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`?{s}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Underscore => f.write_str("`_`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let simple = match (c, next) {
            ('-', Some('>')) => Some((Tok::Arrow, 2)),
            ('!', Some('=')) => Some((Tok::Ne, 2)),
            ('<', Some('=')) => Some((Tok::Le, 2)),
            ('>', Some('=')) => Some((Tok::Ge, 2)),
            ('(', _) => Some((Tok::LParen, 1)),
            (')', _) => Some((Tok::RParen, 1)),
            ('[', _) => Some((Tok::LBracket, 1)),
            (']', _) => Some((Tok::RBracket, 1)),
            ('{', _) => Some((Tok::LBrace, 1)),
            ('}', _) => Some((Tok::RBrace, 1)),
            (',', _) => Some((Tok::Comma, 1)),
            ('.', _) => Some((Tok::Dot, 1)),
            (':', _) => Some((Tok::Colon, 1)),
            (';', _) => Some((Tok::Semi, 1)),
            ('|', _) => Some((Tok::Pipe, 1)),
            ('=', _) => Some((Tok::Eq, 1)),
            ('<', _) => Some((Tok::Lt, 1)),
            ('>', _) => Some((Tok::Gt, 1)),
            ('!', _) => Some((Tok::Bang, 1)),
            _ => None,
        };
        if let Some((tok, n)) = simple {
            for _ in 0..n {
                bump!();
            }
            out.push(Token { tok, pos });
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::new(pos, "unterminated string literal"));
                }
                match chars[i] {
                    '"' => {
                        bump!();
                        break;
                    }
                    '\\' => {
                        bump!();
                        let esc = *chars
                            .get(i)
                            .ok_or_else(|| ParseError::new(pos, "unterminated string literal"))?;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        bump!();
                    }
                    ch => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), pos });
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && next.is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            bump!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let lit: String = chars[start..i].iter().collect();
            let v = lit
                .parse::<i64>()
                .map_err(|_| ParseError::new(pos, format!("integer literal `{lit}` out of range")))?;
            out.push(Token { tok: Tok::Int(v), pos });
            continue;
        }
        if c == '?' {
            bump!();
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                bump!();
            }
            if start == i {
                return Err(ParseError::new(pos, "expected variable name after `?`"));
            }
            out.push(Token { tok: Tok::Var(chars[start..i].iter().collect()), pos });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && (is_ident_char(chars[i]) || chars[i] == '-' && continues_ident(&chars, i)) {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if word == "_" { Tok::Underscore } else { Tok::Ident(word) };
            out.push(Token { tok, pos });
            continue;
        }
        return Err(ParseError::new(pos, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

// `role-disjoint` is a single identifier, but `a->b` and `x-1` are not.
fn continues_ident(chars: &[char], i: usize) -> bool {
    chars.get(i + 1).is_some_and(|c| c.is_alphabetic())
}

/// Recursive-descent cursor over a token vector.
pub struct Cursor {
    toks: Vec<Token>,
    at: usize,
    fresh: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor { toks: tokenize(text)?, at: 0, fresh: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.at + k).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(w) => {
                self.next();
                Ok(w)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn var(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.next();
                Ok(v)
            }
            _ => Err(self.unexpected("variable")),
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(self.pos(), format!("expected {wanted}, found {}", self.peek()))
    }

    /// Counter for parser-generated names (anonymous `_` variables).
    pub fn fresh_index(&mut self) -> usize {
        self.fresh += 1;
        self.fresh - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_with_positions() {
        let toks = tokenize("exists(inv(contains)) <= A # c\nrole-disjoint(P, Q)").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("exists".into()));
        assert!(toks.iter().any(|t| t.tok == Tok::Le));
        let rd = toks.iter().find(|t| t.tok == Tok::Ident("role-disjoint".into())).unwrap();
        assert_eq!(rd.pos, Pos { line: 2, col: 1 });
    }

    #[test]
    fn arrows_and_negative_ints() {
        let toks: Vec<Tok> = tokenize("?x->-3 != \"a\\\"b\"").unwrap().into_iter().map(|t| t.tok).collect();
        assert_eq!(
            toks,
            vec![Tok::Var("x".into()), Tok::Arrow, Tok::Int(-3), Tok::Ne, Tok::Str("a\"b".into()), Tok::Eof]
        );
    }

    #[test]
    fn unterminated_string_is_error() {
        let err = tokenize("R(\"abc").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 3 });
    }
}
