use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    /// An identifier, possibly carrying an `@` annotation suffix.
    Ident(String),
    Num(u64),
    Colon,
    Arrow,
    LParen,
    RParen,
    Eq,
    Comma,
    And,
    Or,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Num(n) => format!("`{}`", n),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Comma => "`,`".into(),
            Tok::And => "`/\\`".into(),
            Tok::Or => "`\\/`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// One physical line with its tokens; `line` is 1-based.
#[derive(Debug, Clone)]
pub(crate) struct Line {
    pub line: usize,
    pub toks: Vec<Spanned>,
    /// Column just past the last character, for end-of-line diagnostics.
    pub end_col: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Section {
    pub name: String,
    pub line: usize,
    pub lines: Vec<Line>,
}

/// Splits the text into `keyword:` sections. A header is a line starting in
/// column 1 with one of `keywords` immediately followed by `:`; the rest of the
/// header line belongs to the section.
pub(crate) fn sections(text: &str, keywords: &[&str]) -> Result<(Vec<Section>, usize), ParseError> {
    let mut out: Vec<Section> = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last = line_no;
        let content = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        let header = keywords.iter().find(|k| {
            content.starts_with(*k) && content[k.len()..].starts_with(':')
        });
        let (body, offset) = match header {
            Some(k) => {
                if out.iter().any(|s| s.name == *k) {
                    return Err(ParseError::new(line_no, 1, format!("section `{}:` appears twice", k)));
                }
                out.push(Section {
                    name: k.to_string(),
                    line: line_no,
                    lines: Vec::new(),
                });
                (&content[k.len() + 1..], k.len() + 1)
            }
            None => (content, 0),
        };
        let toks = tokenize(body, line_no, offset)?;
        if toks.is_empty() {
            continue;
        }
        let Some(sec) = out.last_mut() else {
            return Err(ParseError::new(
                line_no,
                toks[0].col,
                format!("expected a section header ({})", keywords.iter().map(|k| format!("`{}:`", k)).collect::<Vec<_>>().join(", ")),
            ));
        };
        sec.lines.push(Line {
            line: line_no,
            toks,
            end_col: raw.chars().count() + 1,
        });
    }
    Ok((out, last + 1))
}

fn tokenize(s: &str, line: usize, offset: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, col });
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match two.as_str() {
            "->" => {
                push(&mut out, Tok::Arrow);
                i += 2;
                continue;
            }
            "/\\" => {
                push(&mut out, Tok::And);
                i += 2;
                continue;
            }
            "\\/" => {
                push(&mut out, Tok::Or);
                i += 2;
                continue;
            }
            _ => {}
        }
        match c {
            ':' => push(&mut out, Tok::Colon),
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            '=' => push(&mut out, Tok::Eq),
            ',' => push(&mut out, Tok::Comma),
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let n = digits
                    .parse()
                    .map_err(|_| ParseError::new(line, col, format!("number `{}` out of range", digits)))?;
                push(&mut out, Tok::Num(n));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '@' {
                    i = annotation_end(&chars, i + 1)
                        .ok_or_else(|| ParseError::new(line, offset + i + 1, "malformed `@` annotation"))?;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                continue;
            }
            other => return Err(ParseError::new(line, col, format!("unexpected character `{}`", other))),
        }
        i += 1;
    }
    Ok(out)
}

/// End of an annotation starting at `i`: `{...}->name` or `<...>`.
fn annotation_end(chars: &[char], mut i: usize) -> Option<usize> {
    match chars.get(i)? {
        '{' => {
            let mut depth = 0;
            loop {
                match chars.get(i)? {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    c if c.is_whitespace() => return None,
                    _ => {}
                }
                i += 1;
            }
            i += 1;
            if chars.get(i) != Some(&'-') || chars.get(i + 1) != Some(&'>') {
                return None;
            }
            i += 2;
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            (i > start).then_some(i)
        }
        '<' => {
            i += 1;
            let mut depth = 1;
            while depth > 0 {
                match chars.get(i)? {
                    '-' if chars.get(i + 1) == Some(&'>') => i += 1,
                    '<' => depth += 1,
                    '>' => depth -= 1,
                    c if c.is_whitespace() => return None,
                    _ => {}
                }
                i += 1;
            }
            Some(i)
        }
        _ => None,
    }
}

/// Cursor over the tokens of one line.
pub(crate) struct Cursor<'a> {
    line: &'a Line,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(line: &'a Line) -> Cursor<'a> {
        Cursor { line, pos: 0 }
    }

    pub(crate) fn peek(&self) -> Option<&'a Tok> {
        self.line.toks.get(self.pos).map(|s| &s.tok)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.line.toks.len()
    }

    /// Position of the next token, or end of line.
    pub(crate) fn here(&self) -> (usize, usize) {
        match self.line.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => (self.line.line, self.line.end_col),
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, message)
    }

    pub(crate) fn next(&mut self) -> Option<&'a Spanned> {
        let t = self.line.toks.get(self.pos);
        self.pos += t.is_some() as usize;
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<(&'a str, usize, usize), ParseError> {
        match self.line.toks.get(self.pos) {
            Some(Spanned { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s.as_str(), *line, *col))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub(crate) fn num(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(*n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {}, found {}", wanted, t.describe())),
            None => self.error(format!("expected {}, found end of line", wanted)),
        }
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of line"))
        }
    }
}
