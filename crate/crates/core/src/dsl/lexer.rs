use num_bigint::BigInt;

use super::DslError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Contents of a `_[...]` jet suffix.
    Jet(String),
    /// Contents of a free-standing `[...]` multi-index.
    Bracket(String),
    Number(BigInt),
    Sym(char),
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Jet(s) => format!("jet suffix `_[{s}]`"),
            Tok::Bracket(s) => format!("multi-index `[{s}]`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, message: String| DslError::Syntax {
        line,
        col,
        message,
        expected: Vec::new(),
    };

    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        match c {
            '\n' => {
                out.push(Token {
                    tok: Tok::Newline,
                    line,
                    col,
                });
                i += 1;
                line += 1;
                col = 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            c if c.is_ascii_digit() => {
                let s = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[s..i].iter().collect();
                col += i - s;
                out.push(Token {
                    tok: Tok::Number(text.parse().unwrap()),
                    line: start.0,
                    col: start.1,
                });
            }
            c if c.is_alphabetic() => {
                let s = i;
                while i < chars.len() {
                    let ch = chars[i];
                    let jet_start = ch == '_' && chars.get(i + 1) == Some(&'[');
                    if jet_start || !(ch.is_alphanumeric() || ch == '_' || ch == '.') {
                        break;
                    }
                    i += 1;
                }
                let text: String = chars[s..i].iter().collect();
                col += i - s;
                if text.ends_with('.') {
                    return Err(syntax(start.0, start.1, format!("identifier `{text}` ends with `.`")));
                }
                out.push(Token {
                    tok: Tok::Ident(text),
                    line: start.0,
                    col: start.1,
                });
                if i < chars.len() && chars[i] == '_' {
                    let jet_pos = (line, col);
                    let (content, used) = bracket_content(&chars[i + 1..])
                        .ok_or_else(|| syntax(jet_pos.0, jet_pos.1, "unterminated jet suffix".into()))?;
                    i += 1 + used;
                    col += 1 + used;
                    out.push(Token {
                        tok: Tok::Jet(content),
                        line: jet_pos.0,
                        col: jet_pos.1,
                    });
                }
            }
            '[' => {
                let (content, used) =
                    bracket_content(&chars[i..]).ok_or_else(|| syntax(line, col, "unterminated `[`".into()))?;
                i += used;
                col += used;
                out.push(Token {
                    tok: Tok::Bracket(content),
                    line: start.0,
                    col: start.1,
                });
            }
            '=' | '+' | '-' | '*' | '^' | '/' | '(' | ')' | '{' | '}' | ',' | ';' => {
                out.push(Token {
                    tok: Tok::Sym(c),
                    line,
                    col,
                });
                i += 1;
                col += 1;
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// `chars` starts at `[`; returns the inner text and the number of chars
/// consumed including both brackets. Brackets may not span lines.
fn bracket_content(chars: &[char]) -> Option<(String, usize)> {
    debug_assert_eq!(chars.first(), Some(&'['));
    let end = chars.iter().position(|&c| c == ']' || c == '\n')?;
    if chars[end] != ']' {
        return None;
    }
    Some((chars[1..end].iter().collect(), end + 1))
}
