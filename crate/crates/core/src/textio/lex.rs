//! Tokenizer for the document format.

use super::TextError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// `@facts`, `@rules`, ... — the payload is the word after `@`.
    Section(String),
    /// Identifier or digit string; classification happens in the parser.
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Pipe,
    Arrow,
    Question,
    Turnstile,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Section(s) => format!("@{s}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Colon => "':'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Question => "'?'".into(),
            Tok::Turnstile => "':-'".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

fn syntax(pos: Pos, msg: impl Into<String>) -> TextError {
    TextError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn lex(input: &str) -> Result<Vec<(Tok, Pos)>, TextError> {
    let mut out = Vec::new();
    let mut chars = input.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' | ')' | ',' | '.' | '|' | '?' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '|' => Tok::Pipe,
                    _ => Tok::Question,
                };
                out.push((tok, pos));
            }
            ':' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'-') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Turnstile, pos));
                } else {
                    out.push((Tok::Colon, pos));
                }
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Arrow, pos));
                } else {
                    return Err(syntax(pos, "expected '->'"));
                }
            }
            '@' => {
                chars.next();
                col += 1;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    col += 1;
                }
                if word.is_empty() {
                    return Err(syntax(pos, "expected section name after '@'"));
                }
                out.push((Tok::Section(word), pos));
            }
            c if c.is_ascii_alphanumeric() => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    col += 1;
                }
                // Digit strings are constants; a digit-initial word with
                // letters in it is in no lexical class.
                if word.starts_with(|c: char| c.is_ascii_digit())
                    && !word.chars().all(|c| c.is_ascii_digit())
                {
                    return Err(syntax(pos, format!("malformed token '{word}'")));
                }
                out.push((Tok::Ident(word), pos));
            }
            other => {
                return Err(syntax(pos, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(input: &str) -> Vec<Tok> {
        lex(input).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn tokenizes_a_rule_line() {
        assert_eq!(
            toks("r: v(X) -> g(X) | r(X)."),
            vec![
                Tok::Ident("r".into()),
                Tok::Colon,
                Tok::Ident("v".into()),
                Tok::LParen,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::Arrow,
                Tok::Ident("g".into()),
                Tok::LParen,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::Pipe,
                Tok::Ident("r".into()),
                Tok::LParen,
                Tok::Ident("X".into()),
                Tok::RParen,
                Tok::Dot,
            ]
        );
    }

    #[test]
    fn distinguishes_colon_and_turnstile() {
        assert_eq!(
            toks("q: ? :- t(U)."),
            vec![
                Tok::Ident("q".into()),
                Tok::Colon,
                Tok::Question,
                Tok::Turnstile,
                Tok::Ident("t".into()),
                Tok::LParen,
                Tok::Ident("U".into()),
                Tok::RParen,
                Tok::Dot,
            ]
        );
    }

    #[test]
    fn comments_and_crlf_are_skipped() {
        let input = "% header\r\n@facts % trailing\r\np(a).\r\n";
        assert_eq!(
            toks(input),
            vec![
                Tok::Section("facts".into()),
                Tok::Ident("p".into()),
                Tok::LParen,
                Tok::Ident("a".into()),
                Tok::RParen,
                Tok::Dot,
            ]
        );
    }

    #[test]
    fn positions_are_line_and_column() {
        let toks = lex("@facts\n  p(a).").unwrap();
        let (_, pos) = &toks[1]; // 'p'
        assert_eq!((pos.line, pos.col), (2, 3));
    }

    #[test]
    fn rejects_stray_characters_and_malformed_tokens() {
        assert!(matches!(lex("p(a) & q(b)"), Err(TextError::Syntax { col: 6, .. })));
        assert!(matches!(lex("p(3abc)"), Err(TextError::Syntax { .. })));
        assert!(matches!(lex("a - b"), Err(TextError::Syntax { .. })));
        // Pure digit strings are fine.
        assert_eq!(toks("p(42)").len(), 4);
    }
}
