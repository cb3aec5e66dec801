//! Tokenizer for the policy language.
//!
//! Identifiers are `[A-Za-z][A-Za-z0-9_]*`, integers are `[0-9]+`, `#` starts
//! a line comment, whitespace is insignificant. The structural words
//! (`policy`, `fin`, `bind`, `as`, `all`, `done`, `authorize`) are reserved;
//! the loop markers `i` and `t` stay ordinary identifiers and are matched by
//! spelling where the grammar requires them.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(u64),
    Keyword(Keyword),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Eq,
    DotDot,
    Plus,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Policy,
    Fin,
    Bind,
    As,
    All,
    Done,
    Authorize,
}

impl Keyword {
    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Policy => "policy",
            Keyword::Fin => "fin",
            Keyword::Bind => "bind",
            Keyword::As => "as",
            Keyword::All => "all",
            Keyword::Done => "done",
            Keyword::Authorize => "authorize",
        }
    }

    fn from_word(word: &str) -> Option<Keyword> {
        Some(match word {
            "policy" => Keyword::Policy,
            "fin" => Keyword::Fin,
            "bind" => Keyword::Bind,
            "as" => Keyword::As,
            "all" => Keyword::All,
            "done" => Keyword::Done,
            "authorize" => Keyword::Authorize,
            _ => return None,
        })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Int(n) => write!(f, "integer `{n}`"),
            Token::Keyword(k) => write!(f, "`{}`", k.as_str()),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::LBrace => f.write_str("`{`"),
            Token::RBrace => f.write_str("`}`"),
            Token::Comma => f.write_str("`,`"),
            Token::Semi => f.write_str("`;`"),
            Token::Colon => f.write_str("`:`"),
            Token::Eq => f.write_str("`=`"),
            Token::DotDot => f.write_str("`..`"),
            Token::Plus => f.write_str("`+`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub pos: Pos,
}

/// Parse error with source position and what was expected there.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("{pos}: expected {expected}, found {found}")]
pub struct ParseError {
    pub pos: Pos,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, expected: impl Into<String>, found: impl fmt::Display) -> Self {
        ParseError {
            pos,
            expected: expected.into(),
            found: found.to_string(),
        }
    }
}

pub(crate) struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.at];
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn skip_trivia(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.bump();
            } else if b == b'#' {
                while let Some(b) = self.peek() {
                    self.bump();
                    if b == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(b) = self.peek() else {
                out.push(Spanned {
                    token: Token::Eof,
                    pos,
                });
                return Ok(out);
            };
            let token = match b {
                b'(' => {
                    self.bump();
                    Token::LParen
                }
                b')' => {
                    self.bump();
                    Token::RParen
                }
                b'{' => {
                    self.bump();
                    Token::LBrace
                }
                b'}' => {
                    self.bump();
                    Token::RBrace
                }
                b',' => {
                    self.bump();
                    Token::Comma
                }
                b';' => {
                    self.bump();
                    Token::Semi
                }
                b':' => {
                    self.bump();
                    Token::Colon
                }
                b'=' => {
                    self.bump();
                    Token::Eq
                }
                b'+' => {
                    self.bump();
                    Token::Plus
                }
                b'.' => {
                    self.bump();
                    if self.peek() == Some(b'.') {
                        self.bump();
                        Token::DotDot
                    } else {
                        return Err(ParseError::new(pos, "`..`", "`.`"));
                    }
                }
                b'0'..=b'9' => {
                    let start = self.at;
                    while matches!(self.peek(), Some(b'0'..=b'9')) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.at]).unwrap();
                    let n: u64 = text.parse().map_err(|_| {
                        ParseError::new(pos, "an integer that fits in 64 bits", text)
                    })?;
                    Token::Int(n)
                }
                b'A'..=b'Z' | b'a'..=b'z' => {
                    let start = self.at;
                    while matches!(
                        self.peek(),
                        Some(b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'_')
                    ) {
                        self.bump();
                    }
                    let word = std::str::from_utf8(&self.src[start..self.at]).unwrap();
                    match Keyword::from_word(word) {
                        Some(kw) => Token::Keyword(kw),
                        None => Token::Ident(word.to_string()),
                    }
                }
                other => {
                    let found = if other.is_ascii_graphic() {
                        format!("`{}`", other as char)
                    } else {
                        format!("byte 0x{other:02x}")
                    };
                    return Err(ParseError::new(pos, "a token", found));
                }
            };
            out.push(Spanned { token, pos });
        }
    }
}
