use crate::diag::{codes, Diagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

const SYMBOLS: [&str; 19] = [
    "->", "=>", ":=", "!=", "<=", ">=", "{", "}", ",", ":", ";", ".", "=", "<", ">", "+", "-", "(",
    ")",
];

/// Normalize `\r\n` and lone `\r` to `\n`.
pub fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let span = |len: usize| SourceSpan::new(start.0, start.1, len);
        if c == '\n' {
            out.push(Token {
                tok: Tok::Newline,
                span: span(1),
            });
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[s..i].iter().collect();
            col += i - s;
            out.push(Token {
                tok: Tok::Ident(word),
                span: span(i - s),
            });
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[s..i].iter().collect();
            col += i - s;
            let value = digits.parse::<i64>().map_err(|_| {
                Diagnostic::error(
                    codes::SYNTAX,
                    format!("integer literal `{digits}` out of range"),
                )
                .at(span(i - s))
            })?;
            out.push(Token {
                tok: Tok::Int(value),
                span: span(i - s),
            });
            continue;
        }
        if c == '"' {
            let s = i;
            i += 1;
            let mut value = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(Diagnostic::error(
                            codes::SYNTAX,
                            "unterminated string literal",
                        )
                        .at(span(1)));
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc =
                            match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                _ => {
                                    return Err(Diagnostic::error(
                                        codes::SYNTAX,
                                        "invalid escape in string literal",
                                    )
                                    .at(SourceSpan::new(line, col + (i - s), 1)));
                                }
                            };
                        value.push(esc);
                        i += 2;
                    }
                    Some(&ch) => {
                        value.push(ch);
                        i += 1;
                    }
                }
            }
            col += i - s;
            out.push(Token {
                tok: Tok::Str(value),
                span: span(i - s),
            });
            continue;
        }
        let sym = SYMBOLS.iter().find(|sym| {
            sym.chars()
                .enumerate()
                .all(|(k, sc)| chars.get(i + k) == Some(&sc))
        });
        match sym {
            Some(sym) => {
                let n = sym.chars().count();
                out.push(Token {
                    tok: Tok::Sym(sym),
                    span: span(n),
                });
                i += n;
                col += n;
            }
            None => {
                return Err(Diagnostic::error(
                    codes::SYNTAX,
                    format!("unexpected character `{c}`"),
                )
                .at(span(1)));
            }
        }
    }
    // Eof points at the last character of the input, or 1:1 when empty.
    let eof_span = if chars.is_empty() {
        SourceSpan::new(1, 1, 1)
    } else if chars.last() == Some(&'\n') {
        SourceSpan::new(line - 1, last_line_len(&chars) + 1, 1)
    } else {
        SourceSpan::new(line, (col - 1).max(1), 1)
    };
    out.push(Token {
        tok: Tok::Eof,
        span: eof_span,
    });
    Ok(out)
}

fn last_line_len(chars: &[char]) -> usize {
    let body = &chars[..chars.len() - 1];
    match body.iter().rposition(|&c| c == '\n') {
        Some(p) => body.len() - p - 1,
        None => body.len(),
    }
}
