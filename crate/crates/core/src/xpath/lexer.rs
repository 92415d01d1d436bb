use super::XPathError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    DotDot,
    At,
    Comma,
    ColonColon,
    Slash,
    SlashSlash,
    Pipe,
    Plus,
    Minus,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Star,
    Literal(String),
    Number(f64),
    Variable(String),
    /// NCName, QName or `prefix:*`. Whether it is an operator, axis,
    /// function or name test depends on the parser's position.
    Name(String),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || (c as u32) > 0x7f
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-' || c == '.' || c == '\u{b7}'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, XPathError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let offset = |i: usize| chars.get(i).map_or(text.len(), |&(o, _)| o);
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let mut out = Vec::new();
    let mut i = 0;
    while let Some(c) = at(i) {
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |a: char, b: char| c == a && at(i + 1) == Some(b);
        let tok = if two('/', '/') {
            i += 2;
            Tok::SlashSlash
        } else if two(':', ':') {
            i += 2;
            Tok::ColonColon
        } else if two('!', '=') {
            i += 2;
            Tok::Neq
        } else if two('<', '=') {
            i += 2;
            Tok::Le
        } else if two('>', '=') {
            i += 2;
            Tok::Ge
        } else if two('.', '.') {
            i += 2;
            Tok::DotDot
        } else if c == '.' && at(i + 1).is_some_and(|d| d.is_ascii_digit()) || c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(d) = at(i).filter(|d| d.is_ascii_digit()) {
                s.push(d);
                i += 1;
            }
            if at(i) == Some('.') {
                s.push('.');
                i += 1;
                while let Some(d) = at(i).filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    i += 1;
                }
            }
            Tok::Number(
                s.parse()
                    .map_err(|_| XPathError::syntax("malformed number", offset(start)))?,
            )
        } else if c == '"' || c == '\'' {
            i += 1;
            let mut s = String::new();
            loop {
                match at(i) {
                    None => return Err(XPathError::syntax("unterminated string literal", offset(start))),
                    Some(q) if q == c => {
                        i += 1;
                        break;
                    }
                    Some(q) => {
                        s.push(q);
                        i += 1;
                    }
                }
            }
            Tok::Literal(s)
        } else if c == '$' {
            i += 1;
            let name = qname(&chars, &mut i)
                .ok_or_else(|| XPathError::syntax("expected a variable name after `$`", offset(start)))?;
            Tok::Variable(name)
        } else if is_name_start(c) {
            Tok::Name(qname(&chars, &mut i).expect("starts with a name character"))
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '.' => Tok::Dot,
                '@' => Tok::At,
                ',' => Tok::Comma,
                '/' => Tok::Slash,
                '|' => Tok::Pipe,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '*' => Tok::Star,
                other => {
                    return Err(XPathError::syntax(
                        &format!("unexpected character `{other}`"),
                        offset(start),
                    ))
                }
            }
        };
        out.push(Token {
            tok,
            start: offset(start),
            end: offset(i),
        });
    }
    Ok(out)
}

/// Reads `ncname`, `ncname:ncname` or `ncname:*` starting at `i`.
fn qname(chars: &[(usize, char)], i: &mut usize) -> Option<String> {
    let at = |k: usize| chars.get(k).map(|&(_, c)| c);
    if !at(*i).is_some_and(is_name_start) {
        return None;
    }
    let mut s = String::new();
    while let Some(c) = at(*i).filter(|&c| is_name_char(c)) {
        s.push(c);
        *i += 1;
    }
    if at(*i) == Some(':') && at(*i + 1) != Some(':') {
        match at(*i + 1) {
            Some('*') => {
                s.push_str(":*");
                *i += 2;
            }
            Some(c) if is_name_start(c) => {
                s.push(':');
                *i += 1;
                while let Some(c) = at(*i).filter(|&c| is_name_char(c)) {
                    s.push(c);
                    *i += 1;
                }
            }
            _ => {}
        }
    }
    Some(s)
}
