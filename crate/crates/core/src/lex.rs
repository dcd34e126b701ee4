//! Tokenizer shared by the query-file and TQL-Lite parsers.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
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
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub pos: Pos,
    pub message: &'static str,
}

const PUNCT: &[char] = &['(', ')', '{', '}', '[', ']', ',', ';', '.', '='];

pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let mut pos = Pos { line: 1, col: 1 };

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                pos.line += 1;
                pos.col = 1;
            } else if c.is_some() {
                pos.col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            bump!();
        } else if c == '/' {
            bump!();
            if chars.peek() != Some(&'/') {
                return Err(LexError {
                    pos: start,
                    message: "unexpected `/`",
                });
            }
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
        } else if c.is_alphabetic() || c == '_' || c == '$' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '$' {
                    ident.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(ident),
                pos: start,
            });
        } else if c.is_ascii_digit() || c == '-' {
            let mut digits = String::new();
            if c == '-' {
                digits.push('-');
                bump!();
            }
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let value = digits.parse::<i64>().map_err(|_| LexError {
                pos: start,
                message: "invalid integer literal",
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                pos: start,
            });
        } else if c == '"' {
            bump!();
            let mut text = String::new();
            loop {
                match bump!() {
                    None | Some('\n') => {
                        return Err(LexError {
                            pos: start,
                            message: "unterminated string literal",
                        })
                    }
                    Some('"') => break,
                    Some('\\') => match bump!() {
                        Some('"') => text.push('"'),
                        Some('\\') => text.push('\\'),
                        Some('n') => text.push('\n'),
                        Some('t') => text.push('\t'),
                        _ => {
                            return Err(LexError {
                                pos: start,
                                message: "invalid escape in string literal",
                            })
                        }
                    },
                    Some(c) => text.push(c),
                }
            }
            out.push(Token {
                tok: Tok::Str(text),
                pos: start,
            });
        } else if PUNCT.contains(&c) {
            bump!();
            out.push(Token {
                tok: Tok::Punct(c),
                pos: start,
            });
        } else {
            return Err(LexError {
                pos: start,
                message: "unexpected character",
            });
        }
    }
    Ok(out)
}

/// Writes `s` as a double-quoted literal the tokenizer reads back verbatim.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Cursor over a token list with positioned lookahead.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    index: usize,
    end: Pos,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<Token>, source: &str) -> Self {
        let line = source.lines().count().max(1) as u32;
        let col = source.lines().last().map_or(0, |l| l.chars().count()) as u32 + 1;
        Cursor {
            tokens,
            index: 0,
            end: Pos { line, col },
        }
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index)
    }

    pub(crate) fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.index + offset)
    }

    pub(crate) fn pos(&self) -> Pos {
        self.peek().map_or(self.end, |t| t.pos)
    }

    pub(crate) fn is_done(&self) -> bool {
        self.index >= self.tokens.len()
    }

    pub(crate) fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.index).cloned();
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    pub(crate) fn at_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    pub(crate) fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == word)
    }

    pub(crate) fn eat_punct(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.index += 1;
            true
        } else {
            false
        }
    }
}
