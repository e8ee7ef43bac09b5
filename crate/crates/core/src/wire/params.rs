//! `auth-param` lists: `name=value` pairs separated by commas, where a value
//! is a token or a quoted string.

use crate::error::WireError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RawValue {
    Token(String),
    Quoted(String),
}

impl RawValue {
    pub(crate) fn as_str(&self) -> &str {
        match self {
            RawValue::Token(s) | RawValue::Quoted(s) => s,
        }
    }
}

pub(crate) fn is_tchar(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b"!#$%&'*+-.^_`|~".contains(&b)
}

pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(is_tchar)
}

fn is_ows(b: u8) -> bool {
    b == b' ' || b == b'\t'
}

pub(crate) struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Cursor { text, pos: 0 }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    pub(crate) fn skip_ows(&mut self) -> usize {
        let start = self.pos;
        while self.peek().is_some_and(is_ows) {
            self.pos += 1;
        }
        self.pos - start
    }

    pub(crate) fn token(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.peek().is_some_and(is_tchar) {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.text[start..self.pos])
    }

    pub(crate) fn lookahead_is(&self, b: u8) -> bool {
        let mut i = self.pos;
        let bytes = self.text.as_bytes();
        while i < bytes.len() && is_ows(bytes[i]) {
            i += 1;
        }
        bytes.get(i) == Some(&b)
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn quoted(&mut self) -> Result<String, WireError> {
        let open = self.pos;
        debug_assert_eq!(self.peek(), Some(b'"'));
        self.pos += 1;
        let mut out = String::new();
        let mut run_start = self.pos;
        loop {
            let Some(b) = self.peek() else {
                return Err(WireError::MalformedQuoting(open));
            };
            match b {
                b'"' => {
                    out.push_str(&self.text[run_start..self.pos]);
                    self.pos += 1;
                    return Ok(out);
                }
                b'\\' => {
                    out.push_str(&self.text[run_start..self.pos]);
                    self.pos += 1;
                    match self.peek() {
                        Some(c) if c == b'\t' || (0x20..0x7f).contains(&c) => {
                            out.push(c as char);
                            self.pos += 1;
                        }
                        // escaped non-ASCII: copy the whole character
                        Some(c) if c >= 0x80 => {
                            let ch = self.text[self.pos..].chars().next().expect("char boundary");
                            out.push(ch);
                            self.pos += ch.len_utf8();
                        }
                        _ => return Err(WireError::MalformedQuoting(self.pos)),
                    }
                    run_start = self.pos;
                }
                b'\t' | 0x20..=0x7e | 0x80..=0xff => self.pos += 1,
                _ => return Err(WireError::MalformedQuoting(self.pos)),
            }
        }
    }
}

/// Parses `name=value` pairs until the end of input. Names are lowercased;
/// a repeated name is an error.
pub(crate) fn parse_params(cur: &mut Cursor<'_>) -> Result<Vec<(String, RawValue)>, WireError> {
    let mut params: Vec<(String, RawValue)> = Vec::new();
    loop {
        cur.skip_ows();
        let name = cur
            .token()
            .ok_or(WireError::MalformedSyntax(cur.pos()))?
            .to_ascii_lowercase();
        cur.skip_ows();
        if !cur.eat(b'=') {
            return Err(WireError::MalformedSyntax(cur.pos()));
        }
        cur.skip_ows();
        let value = match cur.peek() {
            Some(b'"') => RawValue::Quoted(cur.quoted()?),
            _ => RawValue::Token(
                cur.token()
                    .ok_or(WireError::MalformedSyntax(cur.pos()))?
                    .to_owned(),
            ),
        };
        if params.iter().any(|(n, _)| *n == name) {
            return Err(WireError::DuplicateParameter(name));
        }
        params.push((name, value));
        cur.skip_ows();
        if cur.at_end() {
            return Ok(params);
        }
        if !cur.eat(b',') {
            return Err(WireError::MalformedSyntax(cur.pos()));
        }
    }
}

/// Renders a quoted string, escaping `"` and `\`. Control characters other
/// than HTAB cannot be represented.
pub(crate) fn quote(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' | '\\' => {
                out.push('\\');
                out.push(ch);
            }
            '\t' => out.push(ch),
            c if c.is_control() => return None,
            c => out.push(c),
        }
    }
    out.push('"');
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<(String, RawValue)>, WireError> {
        parse_params(&mut Cursor::new(s))
    }

    #[test]
    fn tokens_and_quoted_values() {
        let p = parse(r#"a=1, B="x, y",c = tok"#).unwrap();
        assert_eq!(
            p,
            vec![
                ("a".into(), RawValue::Token("1".into())),
                ("b".into(), RawValue::Quoted("x, y".into())),
                ("c".into(), RawValue::Token("tok".into())),
            ]
        );
    }

    #[test]
    fn escapes() {
        let p = parse(r#"a="q\"uo\\te""#).unwrap();
        assert_eq!(p[0].1.as_str(), r#"q"uo\te"#);
        assert_eq!(quote(r#"q"uo\te"#).unwrap(), r#""q\"uo\\te""#);
    }

    #[test]
    fn non_ascii_in_quotes() {
        let p = parse("realm=\"Prot\u{e9}g\u{e9}\"").unwrap();
        assert_eq!(p[0].1.as_str(), "Prot\u{e9}g\u{e9}");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse(r#"a="open"#), Err(WireError::MalformedQuoting(_))));
        assert!(matches!(parse("a=1,,b=2"), Err(WireError::MalformedSyntax(_))));
        assert!(matches!(parse("a=1,"), Err(WireError::MalformedSyntax(_))));
        assert!(matches!(parse("a"), Err(WireError::MalformedSyntax(_))));
        assert!(matches!(parse("a=1 b=2"), Err(WireError::MalformedSyntax(_))));
        assert_eq!(parse("a=1, A=2"), Err(WireError::DuplicateParameter("a".into())));
        assert!(matches!(parse("a=\"x\u{1}\""), Err(WireError::MalformedQuoting(_))));
        assert!(quote("line\nbreak").is_none());
    }
}
