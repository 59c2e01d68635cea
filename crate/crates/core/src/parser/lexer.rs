//! Tokenizer for the Turtle subset shared by graph and arrangement-spec files.

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    PrefixDirective,
    Iri(String),
    PName { prefix: String, local: String },
    A,
    Var(String),
    Str(String),
    Number(String),
    IntervalOpen,
    CloseBracket,
    Dot,
    Semicolon,
    Comma,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self {
            Token::PrefixDirective => "`@prefix`".into(),
            Token::Iri(i) => format!("IRI <{i}>"),
            Token::PName { prefix, local } => format!("name `{prefix}:{local}`"),
            Token::A => "`a`".into(),
            Token::Var(v) => format!("variable `?{v}`"),
            Token::Str(_) => "string literal".into(),
            Token::Number(n) => format!("number `{n}`"),
            Token::IntervalOpen => "`@[`".into(),
            Token::CloseBracket => "`]`".into(),
            Token::Dot => "`.`".into(),
            Token::Semicolon => "`;`".into(),
            Token::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub token: Token,
    pub line: usize,
    pub column: usize,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

fn is_prefix_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn is_local_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut cur = Cursor::new(src);
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let push = |out: &mut Vec<Spanned>, token| out.push(Spanned { token, line, column });
        match c {
            c if c.is_whitespace() => {
                cur.bump();
            }
            '#' => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            '@' => {
                cur.bump();
                if cur.peek() == Some('[') {
                    cur.bump();
                    push(&mut out, Token::IntervalOpen);
                    continue;
                }
                let mut word = String::new();
                while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphabetic()) {
                    word.push(c);
                    cur.bump();
                }
                if word != "prefix" {
                    return Err(cur.error(line, column, format!("unknown directive `@{word}`")));
                }
                push(&mut out, Token::PrefixDirective);
            }
            '<' => {
                cur.bump();
                let mut iri = String::new();
                loop {
                    match cur.peek() {
                        Some('>') => {
                            cur.bump();
                            break;
                        }
                        Some(c) if c.is_whitespace() || c == '<' => {
                            return Err(cur.error(cur.line, cur.column, "unterminated IRI"));
                        }
                        Some(c) => {
                            iri.push(c);
                            cur.bump();
                        }
                        None => return Err(cur.error(line, column, "unterminated IRI")),
                    }
                }
                push(&mut out, Token::Iri(iri));
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    let (l, col) = (cur.line, cur.column);
                    match cur.bump() {
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('r') => s.push('\r'),
                            Some('t') => s.push('\t'),
                            _ => return Err(cur.error(l, col, "invalid escape sequence")),
                        },
                        Some('\n') | None => return Err(cur.error(line, column, "unterminated string")),
                        Some(c) => s.push(c),
                    }
                }
                push(&mut out, Token::Str(s));
            }
            '?' => {
                cur.bump();
                let mut name = String::new();
                while let Some(c) = cur.peek().filter(|c| is_local_start(*c)) {
                    name.push(c);
                    cur.bump();
                }
                if name.is_empty() {
                    return Err(cur.error(line, column, "empty variable name"));
                }
                push(&mut out, Token::Var(name));
            }
            '.' if !cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => {
                cur.bump();
                push(&mut out, Token::Dot);
            }
            ';' => {
                cur.bump();
                push(&mut out, Token::Semicolon);
            }
            ',' => {
                cur.bump();
                push(&mut out, Token::Comma);
            }
            ']' => {
                cur.bump();
                push(&mut out, Token::CloseBracket);
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                let text = lex_number(&mut cur).ok_or_else(|| cur.error(line, column, "malformed number"))?;
                push(&mut out, Token::Number(text));
            }
            c if c.is_ascii_alphabetic() || c == ':' => {
                let mut prefix = String::new();
                while let Some(c) = cur.peek().filter(|c| is_prefix_char(*c)) {
                    prefix.push(c);
                    cur.bump();
                }
                if cur.peek() != Some(':') {
                    if prefix == "a" {
                        push(&mut out, Token::A);
                        continue;
                    }
                    return Err(cur.error(line, column, format!("expected `:` after `{prefix}`")));
                }
                cur.bump();
                // empty locals are legal only in `@prefix` lines; the parser checks
                let mut local = String::new();
                if cur.peek().is_some_and(is_local_start) {
                    while let Some(c) = cur.peek().filter(|c| is_local_char(*c)) {
                        local.push(c);
                        cur.bump();
                    }
                }
                // a trailing `.` terminates the statement, it is not part of the name
                while local.ends_with('.') {
                    local.pop();
                    cur.pos -= 1;
                    cur.column -= 1;
                }
                push(&mut out, Token::PName { prefix, local });
            }
            other => {
                return Err(cur.error(line, column, format!("unexpected character `{}`", other.escape_debug())));
            }
        }
    }
    Ok(out)
}

/// `[+-]? digits? ('.' digits)? ([eE] [+-]? digits)? ('/' digits)?`
fn lex_number(cur: &mut Cursor) -> Option<String> {
    let mut text = String::new();
    if let Some(c) = cur.peek().filter(|c| *c == '-' || *c == '+') {
        text.push(c);
        cur.bump();
    }
    let mut digits = 0;
    while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
        text.push(c);
        cur.bump();
        digits += 1;
    }
    if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        text.push('.');
        cur.bump();
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            text.push(c);
            cur.bump();
            digits += 1;
        }
    }
    if digits == 0 {
        return None;
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let sign = cur.peek_at(1).filter(|c| *c == '-' || *c == '+');
        let first_digit = if sign.is_some() { cur.peek_at(2) } else { cur.peek_at(1) };
        if first_digit.is_some_and(|c| c.is_ascii_digit()) {
            text.push(cur.bump()?);
            if sign.is_some() {
                text.push(cur.bump()?);
            }
            while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
                text.push(c);
                cur.bump();
            }
        }
    }
    if cur.peek() == Some('/') {
        text.push('/');
        cur.bump();
        let mut denom_digits = 0;
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            text.push(c);
            cur.bump();
            denom_digits += 1;
        }
        if denom_digits == 0 {
            return None;
        }
    }
    Some(text)
}
