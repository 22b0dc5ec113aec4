//! Lexical building blocks shared by the Turtle* and SPARQL* parsers.
//!
//! Both grammars use the same terminals for IRIs, prefixed names, blank node
//! labels, string/numeric literals and language tags, so they are read here
//! through a [`Cursor`] that tracks line/column positions.

use crate::vocab::xsd;
use std::fmt;

/// A position inside a parsed document.
///
/// `line` and `column` are 1-based and count characters, `offset` is a byte
/// offset into the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourcePosition {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl SourcePosition {
    pub const START: SourcePosition = SourcePosition {
        line: 1,
        column: 1,
        offset: 0,
    };
}

impl Default for SourcePosition {
    fn default() -> Self {
        Self::START
    }
}

impl fmt::Display for SourcePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A lexical error: what went wrong and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub position: SourcePosition,
    pub message: String,
}

pub(crate) type LexResult<T> = Result<T, LexError>;

pub(crate) fn is_pn_chars_base(c: char) -> bool {
    matches!(c,
        'A'..='Z'
        | 'a'..='z'
        | '\u{00C0}'..='\u{00D6}'
        | '\u{00D8}'..='\u{00F6}'
        | '\u{00F8}'..='\u{02FF}'
        | '\u{0370}'..='\u{037D}'
        | '\u{037F}'..='\u{1FFF}'
        | '\u{200C}'..='\u{200D}'
        | '\u{2070}'..='\u{218F}'
        | '\u{2C00}'..='\u{2FEF}'
        | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}'
        | '\u{FDF0}'..='\u{FFFD}'
        | '\u{10000}'..='\u{EFFFF}')
}

pub(crate) fn is_pn_chars_u(c: char) -> bool {
    c == '_' || is_pn_chars_base(c)
}

pub(crate) fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c == '\u{00B7}'
        || ('\u{0300}'..='\u{036F}').contains(&c)
        || ('\u{203F}'..='\u{2040}').contains(&c)
}

fn is_varname_continue(c: char) -> bool {
    is_pn_chars_u(c)
        || c.is_ascii_digit()
        || c == '\u{00B7}'
        || ('\u{0300}'..='\u{036F}').contains(&c)
        || ('\u{203F}'..='\u{2040}').contains(&c)
}

/// Checks a string against the `BLANK_NODE_LABEL` production (without `_:`).
pub(crate) fn is_blank_node_label(label: &str) -> bool {
    let mut chars = label.chars();
    match chars.next() {
        Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {}
        _ => return false,
    }
    if label.ends_with('.') {
        return false;
    }
    chars.all(|c| is_pn_chars(c) || c == '.')
}

/// Checks a string against the SPARQL `VARNAME` production.
pub(crate) fn is_varname(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => chars.all(is_varname_continue),
        _ => false,
    }
}

/// Checks whether `local` can be written as the local part of a prefixed
/// name without any escaping.
pub(crate) fn is_plain_pn_local(local: &str) -> bool {
    if local.is_empty() {
        return true;
    }
    let mut chars = local.chars();
    let first = chars.next().unwrap();
    if !(is_pn_chars_u(first) || first == ':' || first.is_ascii_digit()) {
        return false;
    }
    !local.ends_with('.') && chars.all(|c| is_pn_chars(c) || c == '.' || c == ':')
}

/// Characters that may never appear in an `IRIREF`.
pub(crate) fn is_forbidden_in_iri(c: char) -> bool {
    matches!(
        c,
        '\u{0}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'
    )
}

pub(crate) fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

pub(crate) fn is_decimal_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            int.bytes().all(|b| b.is_ascii_digit())
                && !frac.is_empty()
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

pub(crate) fn is_double_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let Some(idx) = body.find(['e', 'E']) else {
        return false;
    };
    let (mantissa, exponent) = (&body[..idx], &body[idx + 1..]);
    let mantissa_ok = match mantissa.split_once('.') {
        Some((int, frac)) => {
            (!int.is_empty() || !frac.is_empty())
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => !mantissa.is_empty() && mantissa.bytes().all(|b| b.is_ascii_digit()),
    };
    mantissa_ok && is_integer_lexical(exponent)
}

/// Escapes a string for use between double quotes in Turtle, N-Triples or SPARQL.
pub(crate) fn escape_string(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if c.is_control() => {
                use fmt::Write;
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// A character cursor with line/column bookkeeping.
#[derive(Debug, Clone)]
pub(crate) struct Cursor<'a> {
    input: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(input: &'a str) -> Self {
        Self {
            input,
            offset: 0,
            line: 1,
            column: 1,
        }
    }

    pub fn position(&self) -> SourcePosition {
        SourcePosition {
            line: self.line,
            column: self.column,
            offset: self.offset,
        }
    }

    pub fn rest(&self) -> &'a str {
        &self.input[self.offset..]
    }

    pub fn is_eof(&self) -> bool {
        self.offset >= self.input.len()
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    /// Case-insensitive keyword check that also requires a word boundary.
    pub fn at_keyword(&self, keyword: &str) -> bool {
        let rest = self.rest();
        if rest.len() < keyword.len() || !rest.is_char_boundary(keyword.len()) {
            return false;
        }
        if !rest[..keyword.len()].eq_ignore_ascii_case(keyword) {
            return false;
        }
        !rest[keyword.len()..]
            .chars()
            .next()
            .is_some_and(|c| is_pn_chars(c) || c == ':')
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    pub fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        if self.starts_with(s) {
            self.bump_n(s.chars().count());
            true
        } else {
            false
        }
    }

    pub fn error<T>(&self, message: impl Into<String>) -> LexResult<T> {
        Err(self.error_at(self.position(), message))
    }

    pub fn error_at(&self, position: SourcePosition, message: impl Into<String>) -> LexError {
        LexError {
            position,
            message: message.into(),
        }
    }

    pub fn expect(&mut self, c: char) -> LexResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected '{c}', found {}", self.describe_next()))
        }
    }

    pub fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".to_owned(),
            Some(c) => format!("'{}'", c.escape_debug()),
        }
    }

    /// Skips whitespace and `#` comments.
    pub fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads an `IRIREF` including the angle brackets and returns its
    /// unescaped content.
    pub fn read_iriref(&mut self) -> LexResult<String> {
        let start = self.position();
        self.expect('<')?;
        let mut value = String::new();
        loop {
            let here = self.position();
            match self.bump() {
                None => return Err(self.error_at(start, "unterminated IRI")),
                Some('>') => return Ok(value),
                Some('\\') => {
                    let c = self.read_uchar(here)?;
                    if is_forbidden_in_iri(c) {
                        return Err(self
                            .error_at(here, format!("character {c:?} is not allowed in an IRI")));
                    }
                    value.push(c);
                }
                Some(c) if is_forbidden_in_iri(c) => {
                    return Err(
                        self.error_at(here, format!("character {c:?} is not allowed in an IRI"))
                    );
                }
                Some(c) => value.push(c),
            }
        }
    }

    /// Reads the remainder of a `\u`/`\U` escape after the backslash.
    fn read_uchar(&mut self, at: SourcePosition) -> LexResult<char> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error_at(at, "invalid escape sequence")),
        };
        let mut code = 0u32;
        for _ in 0..len {
            let digit = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error_at(at, "invalid unicode escape"))?;
            code = code * 16 + digit;
        }
        char::from_u32(code).ok_or_else(|| self.error_at(at, "escape is not a valid code point"))
    }

    /// Reads `PN_PREFIX? ':' PN_LOCAL?` and returns prefix and unescaped local part.
    pub fn read_pname(&mut self) -> LexResult<(String, String)> {
        let mut prefix = String::new();
        if let Some(c) = self.peek() {
            if is_pn_chars_base(c) {
                prefix.push(c);
                self.bump();
                self.read_dotted_run(&mut prefix, is_pn_chars);
            }
        }
        if !self.eat(':') {
            return self.error(format!(
                "expected ':' in prefixed name, found {}",
                self.describe_next()
            ));
        }
        let local = self.read_pn_local()?;
        Ok((prefix, local))
    }

    /// Reads characters matching `allowed`, also accepting inner '.' as long
    /// as the name does not end with one.
    fn read_dotted_run(&mut self, out: &mut String, allowed: fn(char) -> bool) {
        loop {
            match self.peek() {
                Some(c) if allowed(c) => {
                    out.push(c);
                    self.bump();
                }
                Some('.') => {
                    let mut n = 0;
                    while self.peek_nth(n) == Some('.') {
                        n += 1;
                    }
                    match self.peek_nth(n) {
                        Some(c) if allowed(c) => {
                            for _ in 0..n {
                                out.push('.');
                            }
                            self.bump_n(n);
                        }
                        _ => return,
                    }
                }
                _ => return,
            }
        }
    }

    fn read_pn_local(&mut self) -> LexResult<String> {
        let mut local = String::new();
        let mut first = true;
        loop {
            let here = self.position();
            match self.peek() {
                Some('%') => {
                    let (a, b) = (self.peek_nth(1), self.peek_nth(2));
                    if !(a.is_some_and(|c| c.is_ascii_hexdigit())
                        && b.is_some_and(|c| c.is_ascii_hexdigit()))
                    {
                        return Err(self.error_at(here, "invalid percent encoding in local name"));
                    }
                    local.push('%');
                    local.push(a.unwrap());
                    local.push(b.unwrap());
                    self.bump_n(3);
                }
                Some('\\') => {
                    let escaped = self.peek_nth(1);
                    match escaped {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => {
                            local.push(c);
                            self.bump_n(2);
                        }
                        _ => return Err(self.error_at(here, "invalid escape in local name")),
                    }
                }
                Some(c)
                    if (first && (is_pn_chars_u(c) || c.is_ascii_digit() || c == ':'))
                        || (!first && (is_pn_chars(c) || c == ':')) =>
                {
                    local.push(c);
                    self.bump();
                }
                Some('.') if !first => {
                    let mut n = 0;
                    while self.peek_nth(n) == Some('.') {
                        n += 1;
                    }
                    match self.peek_nth(n) {
                        Some(c) if is_pn_chars(c) || c == ':' || c == '%' || c == '\\' => {
                            for _ in 0..n {
                                local.push('.');
                            }
                            self.bump_n(n);
                        }
                        _ => return Ok(local),
                    }
                }
                _ => return Ok(local),
            }
            first = false;
        }
    }

    /// Reads a blank node label; the cursor must be on `_:`.
    pub fn read_blank_node_label(&mut self) -> LexResult<String> {
        if !self.eat_str("_:") {
            return self.error("expected '_:'");
        }
        let mut label = String::new();
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
                label.push(c);
                self.bump();
            }
            _ => return self.error("invalid blank node label"),
        }
        self.read_dotted_run(&mut label, is_pn_chars);
        Ok(label)
    }

    /// Reads any of the four quoted string forms and returns its unescaped value.
    pub fn read_string(&mut self) -> LexResult<String> {
        let start = self.position();
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return self.error("expected a string literal"),
        };
        let long = self.peek_nth(1) == Some(quote) && self.peek_nth(2) == Some(quote);
        self.bump_n(if long { 3 } else { 1 });
        let mut value = String::new();
        loop {
            let here = self.position();
            match self.peek() {
                None => return Err(self.error_at(start, "unterminated string literal")),
                Some(c) if c == quote => {
                    if !long {
                        self.bump();
                        return Ok(value);
                    }
                    if self.peek_nth(1) == Some(quote) && self.peek_nth(2) == Some(quote) {
                        // A long string may end with up to two extra quote chars.
                        while self.peek_nth(3) == Some(quote) {
                            value.push(quote);
                            self.bump();
                        }
                        self.bump_n(3);
                        return Ok(value);
                    }
                    value.push(c);
                    self.bump();
                }
                Some('\\') => {
                    self.bump();
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            value.push(self.read_uchar(here)?);
                            continue;
                        }
                        _ => return Err(self.error_at(here, "invalid escape sequence in string")),
                    };
                    self.bump();
                    value.push(c);
                }
                Some(c @ ('\n' | '\r')) if !long => {
                    let _ = c;
                    return Err(self.error_at(here, "line break in single-line string literal"));
                }
                Some(c) => {
                    value.push(c);
                    self.bump();
                }
            }
        }
    }

    /// Reads a language tag after `@`, returning it lowercased.
    pub fn read_langtag(&mut self) -> LexResult<String> {
        let start = self.position();
        let mut tag = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphabetic()) {
            tag.push(c);
            self.bump();
        }
        if tag.is_empty() {
            return Err(self.error_at(start, "empty language tag"));
        }
        while self.peek() == Some('-')
            && self.peek_nth(1).is_some_and(|c| c.is_ascii_alphanumeric())
        {
            tag.push('-');
            self.bump();
            while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric()) {
                tag.push(c);
                self.bump();
            }
        }
        Ok(tag.to_ascii_lowercase())
    }

    /// Whether the cursor is at the start of a numeric literal.
    pub fn at_number(&self) -> bool {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => true,
            Some('+' | '-') => match self.peek_nth(1) {
                Some(c) if c.is_ascii_digit() => true,
                Some('.') => self.peek_nth(2).is_some_and(|c| c.is_ascii_digit()),
                _ => false,
            },
            Some('.') => self.peek_nth(1).is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        }
    }

    /// Reads `INTEGER | DECIMAL | DOUBLE`, returning the lexical form and datatype IRI.
    pub fn read_number(&mut self) -> LexResult<(String, &'static str)> {
        let mut lexical = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            lexical.push(sign);
            self.bump();
        }
        let mut datatype = xsd::INTEGER;
        self.read_digits(&mut lexical);
        if self.peek() == Some('.') && self.peek_nth(1).is_some_and(|c| c.is_ascii_digit()) {
            datatype = xsd::DECIMAL;
            lexical.push('.');
            self.bump();
            self.read_digits(&mut lexical);
        } else if self.peek() == Some('.')
            && matches!(self.peek_nth(1), Some('e' | 'E'))
            && !lexical.trim_start_matches(['+', '-']).is_empty()
        {
            // "1.e5" is a valid double
            lexical.push('.');
            self.bump();
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            let mut n = 1;
            if matches!(self.peek_nth(1), Some('+' | '-')) {
                n = 2;
            }
            if self.peek_nth(n).is_some_and(|c| c.is_ascii_digit()) {
                datatype = xsd::DOUBLE;
                lexical.push(e);
                self.bump();
                if n == 2 {
                    lexical.push(self.bump().unwrap());
                }
                self.read_digits(&mut lexical);
            }
        }
        if lexical.trim_start_matches(['+', '-']).is_empty() {
            return self.error("invalid numeric literal");
        }
        Ok((lexical, datatype))
    }

    fn read_digits(&mut self, out: &mut String) {
        while let Some(c) = self.peek().filter(|c| c.is_ascii_digit()) {
            out.push(c);
            self.bump();
        }
    }

    /// Reads a variable after its `?`/`$` sigil.
    pub fn read_variable(&mut self) -> LexResult<String> {
        let start = self.position();
        if !(self.eat('?') || self.eat('$')) {
            return self.error("expected a variable");
        }
        let mut name = String::new();
        while let Some(c) = self.peek() {
            let ok = if name.is_empty() {
                is_pn_chars_u(c) || c.is_ascii_digit()
            } else {
                is_varname_continue(c)
            };
            if !ok {
                break;
            }
            name.push(c);
            self.bump();
        }
        if name.is_empty() {
            return Err(self.error_at(start, "empty variable name"));
        }
        Ok(name)
    }
}
