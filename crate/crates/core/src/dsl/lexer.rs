use super::{ErrorCategory, ParseError};
use crate::hilbert::{c64, C64};

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Tok {
    Word(String),
    /// Real literal, kept as text so the parser can read it as int or float.
    Number(String),
    Complex(C64),
    Eq,
    LParen,
    RParen,
    Comma,
    Colon,
    Arrow,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("'{w}'"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Complex(_) => "complex literal".into(),
            Tok::Eq => "'='".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Arrow => "'->'".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(super) struct Token {
    pub tok: Tok,
    pub column: usize,
}

/// Tokens of one line; `#` starts a comment.
pub(super) fn lex_line(line_no: usize, line: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let err =
        |col: usize, msg: String| ParseError::new(line_no, col + 1, ErrorCategory::Lexical, msg);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '=' => Some(Tok::Eq),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                column: start + 1,
            });
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Token {
                tok: Tok::Arrow,
                column: start + 1,
            });
            i += 2;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                column: start + 1,
            });
            continue;
        }
        if c.is_ascii_digit()
            || c == '.'
            || ((c == '+' || c == '-') && starts_number(&chars, i + 1))
        {
            let re_text = scan_number(&chars, &mut i, true)
                .ok_or_else(|| err(start, "malformed number".into()))?;
            let tok = if i < chars.len()
                && (chars[i] == '+' || chars[i] == '-')
                && starts_number(&chars, i + 1)
            {
                let im_start = i;
                let im_text = scan_number(&chars, &mut i, true)
                    .ok_or_else(|| err(im_start, "malformed imaginary part".into()))?;
                if chars.get(i) != Some(&'i') {
                    return Err(err(i, "complex literal must end in 'i'".into()));
                }
                i += 1;
                let re: f64 = re_text
                    .parse()
                    .map_err(|_| err(start, "malformed number".into()))?;
                let im: f64 = im_text
                    .parse()
                    .map_err(|_| err(im_start, "malformed number".into()))?;
                Tok::Complex(c64(re, im))
            } else {
                Tok::Number(re_text)
            };
            if i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
            {
                return Err(err(i, format!("unexpected '{}' after number", chars[i])));
            }
            out.push(Token {
                tok,
                column: start + 1,
            });
            continue;
        }
        return Err(err(start, format!("unexpected character {c:?}")));
    }
    Ok(out)
}

fn starts_number(chars: &[char], i: usize) -> bool {
    match chars.get(i) {
        Some(c) if c.is_ascii_digit() => true,
        Some('.') => chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// `[+-]? digits? (. digits)? ([eE] [+-]? digits)?` with at least one mantissa digit.
fn scan_number(chars: &[char], i: &mut usize, signed: bool) -> Option<String> {
    let start = *i;
    if signed && *i < chars.len() && (chars[*i] == '+' || chars[*i] == '-') {
        *i += 1;
    }
    let digits = |i: &mut usize| {
        let s = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - s
    };
    let mut mantissa = digits(i);
    if *i < chars.len() && chars[*i] == '.' {
        *i += 1;
        mantissa += digits(i);
    }
    if mantissa == 0 {
        return None;
    }
    if *i < chars.len() && (chars[*i] == 'e' || chars[*i] == 'E') {
        let mut j = *i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if chars.get(j).is_some_and(|c| c.is_ascii_digit()) {
            *i = j;
            digits(i);
        }
    }
    Some(chars[start..*i].iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex_line(1, s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn words_and_symbols() {
        assert_eq!(
            toks("source l=1 # comment"),
            vec![
                Tok::Word("source".into()),
                Tok::Word("l".into()),
                Tok::Eq,
                Tok::Number("1".into())
            ]
        );
        assert_eq!(toks("e -> a b")[1], Tok::Arrow);
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("-1.5e-3"), vec![Tok::Number("-1.5e-3".into())]);
        assert_eq!(toks("+1"), vec![Tok::Number("+1".into())]);
        assert_eq!(toks("0.6+0.8i"), vec![Tok::Complex(c64(0.6, 0.8))]);
        assert_eq!(toks("-0-1e-2i"), vec![Tok::Complex(c64(-0.0, -0.01))]);
        assert_eq!(toks("1e5-2i"), vec![Tok::Complex(c64(1e5, -2.0))]);
    }

    #[test]
    fn lexical_errors() {
        let e = lex_line(3, "element $").unwrap_err();
        assert_eq!(
            (e.line, e.column, e.category),
            (3, 9, ErrorCategory::Lexical)
        );
        assert!(lex_line(1, "0.6+0.8").is_err());
        assert!(lex_line(1, "12abc").is_err());
        assert!(lex_line(1, "1.2.3").is_err());
        assert!(lex_line(1, "é").is_err());
    }
}
