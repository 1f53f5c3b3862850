use super::FormulaError;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Number(f64),
    Str(String),
    Ident(String),
    Cluster(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    End,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Number(n) => format!("number {n}"),
            Tok::Str(_) => "string".into(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Cluster(s) => format!("`@{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

/// Token with its byte offset in the source.
pub(crate) type Spanned = (Tok, usize);

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, FormulaError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b':' => Tok::Colon,
            b'!' => Tok::Bang,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'=' => Tok::Eq,
            b'"' => {
                let (text, end) = lex_string(src, i)?;
                out.push((Tok::Str(text), start));
                i = end;
                continue;
            }
            b'@' => {
                let len = bytes[i + 1..]
                    .iter()
                    .take_while(|b| is_ident_char(**b))
                    .count();
                if len == 0 || !is_ident_start(bytes[i + 1]) {
                    return Err(FormulaError::syntax(i + 1, "cluster label"));
                }
                out.push((Tok::Cluster(src[i + 1..i + 1 + len].to_string()), start));
                i += 1 + len;
                continue;
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let end = scan_number(bytes, i);
                let value: f64 = src[i..end]
                    .parse()
                    .map_err(|_| FormulaError::syntax(i, "number"))?;
                out.push((Tok::Number(value), start));
                i = end;
                continue;
            }
            c if is_ident_start(c) => {
                let len = bytes[i..].iter().take_while(|b| is_ident_char(**b)).count();
                out.push((Tok::Ident(src[i..i + len].to_string()), start));
                i += len;
                continue;
            }
            _ => return Err(FormulaError::syntax(i, "expression")),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// Strings are double-quoted; an embedded quote is written twice.
fn lex_string(src: &str, open: usize) -> Result<(String, usize), FormulaError> {
    let bytes = src.as_bytes();
    let mut text = String::new();
    let mut i = open + 1;
    let mut chunk = i;
    loop {
        match bytes.get(i) {
            None => return Err(FormulaError::syntax(src.len(), "closing `\"`")),
            Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                text.push_str(&src[chunk..=i]);
                i += 2;
                chunk = i;
            }
            Some(b'"') => {
                text.push_str(&src[chunk..i]);
                return Ok((text, i + 1));
            }
            Some(_) => i += 1,
        }
    }
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_mixed_tokens() {
        let toks: Vec<Tok> = tokenize("=SUM(@costs, 1.5e2)*\"a\"\"b\"")
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Eq,
                Tok::Ident("SUM".into()),
                Tok::LParen,
                Tok::Cluster("costs".into()),
                Tok::Comma,
                Tok::Number(150.0),
                Tok::RParen,
                Tok::Star,
                Tok::Str("a\"b".into()),
                Tok::End,
            ]
        );
    }

    #[test]
    fn unterminated_string() {
        assert!(matches!(
            tokenize("=\"abc"),
            Err(FormulaError::Syntax { .. })
        ));
    }
}
