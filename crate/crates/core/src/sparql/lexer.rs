use serde::{Deserialize, Serialize};

use super::SparqlError;
use crate::model::{is_name_char, is_name_start, is_numeral, is_reserved_word, scan_quoted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    Variable,
    Literal,
    Sign,
    Punct,
    /// Zero-width end-of-input marker, always last.
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
    /// Byte offset into the tokenized text.
    pub offset: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text exactly as written.
    pub text: String,
    pub position: Position,
}

impl Token {
    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text.eq_ignore_ascii_case(kw)
    }

    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.offset..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn position(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
            offset: self.offset,
        }
    }

    fn advance(&mut self, bytes: usize) -> &'a str {
        let taken = &self.src[self.offset..self.offset + bytes];
        for c in taken.chars() {
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        self.offset += bytes;
        taken
    }
}

const TWO_CHAR_SIGNS: &[&str] = &["&&", "||", "!=", "<=", ">="];

/// Splits query text into tokens. Keywords are matched case-insensitively;
/// the token text keeps the original spelling.
pub fn tokenize(text: &str) -> Result<Vec<Token>, SparqlError> {
    let mut cur = Cursor {
        src: text,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    if text.trim().is_empty() {
        return Err(SparqlError::Lex {
            message: "empty query".into(),
            position: cur.position(),
        });
    }
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.advance(c.len_utf8());
            continue;
        }
        if c == '#' {
            let len = cur.rest().find('\n').unwrap_or(cur.rest().len());
            cur.advance(len);
            continue;
        }
        let position = cur.position();
        let rest = cur.rest();
        let (kind, len) = if c == '"' {
            let (_, used) = scan_quoted(rest).map_err(|message| SparqlError::Lex { message, position })?;
            (TokenKind::Literal, used)
        } else if c == '?' || c == '$' {
            let len = 1 + rest[1..]
                .find(|ch: char| !(ch.is_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len() - 1);
            if len == 1 {
                return Err(SparqlError::Lex {
                    message: "variable name expected".into(),
                    position,
                });
            }
            (TokenKind::Variable, len)
        } else if c == '<' && iri_len(rest).is_some() {
            (TokenKind::Identifier, iri_len(rest).unwrap())
        } else if c.is_ascii_digit() || ((c == '-' || c == '+') && starts_number(&rest[1..])) {
            let len = number_len(rest);
            let next = rest[len..].chars().next();
            if next.is_some_and(|n| is_name_start(n) || n.is_ascii_digit()) {
                return Err(SparqlError::Lex {
                    message: format!("malformed number near {:?}", &rest[..len + 1]),
                    position,
                });
            }
            (TokenKind::Literal, len)
        } else if is_name_start(c) {
            let mut len = rest.find(|ch: char| !is_name_char(ch)).unwrap_or(rest.len());
            while rest[..len].ends_with('.') {
                len -= 1;
            }
            let word = &rest[..len];
            let kind = if is_reserved_word(word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            (kind, len)
        } else if TWO_CHAR_SIGNS.iter().any(|s| rest.starts_with(s)) {
            (TokenKind::Sign, 2)
        } else if matches!(c, '=' | '<' | '>' | '!' | '|' | '/' | '^' | '+' | '-') {
            (TokenKind::Sign, 1)
        } else if matches!(c, '.' | '{' | '}' | '(' | ')' | ',' | ';' | '*') {
            (TokenKind::Punct, 1)
        } else {
            return Err(SparqlError::Lex {
                message: format!("illegal character {c:?}"),
                position,
            });
        };
        let text = cur.advance(len).to_string();
        tokens.push(Token { kind, text, position });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        position: cur.position(),
    });
    Ok(tokens)
}

fn iri_len(s: &str) -> Option<usize> {
    let body = &s[1..];
    let end = body
        .find(|c: char| c == '>' || c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))?;
    (body[end..].starts_with('>')).then_some(end + 2)
}

fn starts_number(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_digit())
}

fn number_len(s: &str) -> usize {
    // longest prefix that is a numeral
    let candidates = s.char_indices().map(|(i, c)| i + c.len_utf8()).take_while(|&end| {
        s[..end]
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
    });
    candidates.filter(|&end| is_numeral(&s[..end])).last().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn unii_query_token_count() {
        let toks = tokenize("SELECT ?unii WHERE { CISPLATIN UNII ?unii . }").unwrap();
        assert_eq!(toks.len(), 10);
        assert!(toks[0].is_keyword("SELECT"));
        assert_eq!(toks[9].kind, TokenKind::Eof);
    }

    #[test]
    fn filter_fragment() {
        use TokenKind::*;
        assert_eq!(
            kinds("FILTER(?id > 300)"),
            vec![Keyword, Punct, Variable, Sign, Literal, Punct, Eof]
        );
        let toks = tokenize("FILTER(?id > 300)").unwrap();
        assert_eq!(toks[3].text, ">");
        assert_eq!(toks[4].text, "300");
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let toks = tokenize("select ?x Where { ?x p ?y } limit 5").unwrap();
        assert!(toks[0].is_keyword("SELECT"));
        assert_eq!(toks[0].text, "select");
        assert!(toks[2].is_keyword("WHERE"));
        assert!(toks[8].is_keyword("LIMIT"));
    }

    #[test]
    fn empty_and_unterminated() {
        assert!(matches!(tokenize(""), Err(SparqlError::Lex { .. })));
        assert!(matches!(tokenize("   "), Err(SparqlError::Lex { .. })));
        let err = tokenize("SELECT ?x WHERE { ?x p \"abc }").unwrap_err();
        match err {
            SparqlError::Lex { position, .. } => assert_eq!(position.column, 24),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            tokenize("SELECT ?x WHERE { ?x p @ }"),
            Err(SparqlError::Lex { .. })
        ));
        // the two-character text `""` is a well-formed empty literal
        assert_eq!(kinds("\"\""), vec![TokenKind::Literal, TokenKind::Eof]);
    }

    #[test]
    fn signs_and_iris() {
        use TokenKind::*;
        assert_eq!(
            kinds("?a <= 3 && ?b != \"x\" || !(?c < ?d)"),
            vec![
                Variable, Sign, Literal, Sign, Variable, Sign, Literal, Sign, Sign, Punct, Variable, Sign, Variable,
                Punct, Eof
            ]
        );
        let toks = tokenize("<http://ex.org/a> ?x <y>").unwrap();
        assert_eq!(toks[0].kind, Identifier);
        assert_eq!(toks[0].text, "<http://ex.org/a>");
        assert_eq!(toks[2].kind, Identifier);
    }

    #[test]
    fn trailing_dot_is_punct() {
        let toks = tokenize("CISPLATIN UNII ?u.").unwrap();
        assert_eq!(toks[2].text, "?u");
        assert_eq!(toks[3].text, ".");
        let toks = tokenize("?x p Table_1326.").unwrap();
        assert_eq!(toks[2].text, "Table_1326");
        assert_eq!(toks[3].text, ".");
        let toks = tokenize("?x p 2.5 .").unwrap();
        assert_eq!(toks[2].text, "2.5");
    }

    #[test]
    fn texts_with_whitespace_reproduce_input() {
        let src = "SELECT ?y\nWHERE {\n  ?x  UNII  \"Q20Q\" .\n  ?x FDA_Code ?z . FILTER(?z >= -3) }\nLIMIT 2";
        let toks = tokenize(src).unwrap();
        let mut rebuilt = String::new();
        for t in &toks {
            rebuilt.push_str(&src[rebuilt.len()..t.position.offset]);
            rebuilt.push_str(&t.text);
        }
        assert_eq!(rebuilt, src);
    }
}
