//! Tokenizer shared by the expression grammar and the document format.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// `>`
    Gt,
    /// `*`
    Star,
    /// `->`
    Arrow,
    /// `;`
    Semi,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Eq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Eq => f.write_str("`=`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    /// Byte offset of the token in the input.
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub pos: usize,
    pub found: char,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, LexError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            // comment runs to end of line
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let pos = i;
        let tok = match c {
            '>' => Tok::Gt,
            '*' => Tok::Star,
            ';' => Tok::Semi,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i + 1 < bytes.len()
                    && ((bytes[i + 1] as char).is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let found = text[i..].chars().next().unwrap_or(c);
                return Err(LexError { pos, found });
            }
        };
        out.push(Spanned { tok, pos });
        i += 1;
    }
    Ok(out)
}

/// Cursor over a token slice with end-of-input position tracking.
pub(crate) struct Cursor<'a> {
    toks: &'a [Spanned],
    idx: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Spanned], end: usize) -> Self {
        Cursor { toks, idx: 0, end }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    pub fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |s| s.pos)
    }

    pub fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.idx).map(|s| &s.tok);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    /// Index of the next token.
    pub fn index(&self) -> usize {
        self.idx
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }
}
