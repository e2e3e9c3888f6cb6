use std::borrow::Cow;
use std::collections::HashMap;

use super::ast::*;
use super::lexer::{tokenize, Position, Token, TokenKind};
use super::SparqlError;
use crate::model::{is_name_char, is_name_start, scan_quoted, term_parse, Term};

/// Tokenizes and parses query text, expanding PREFIX declarations first.
pub fn parse_query(text: &str) -> Result<QueryAst, SparqlError> {
    let expanded = expand_prefixes(text)?;
    let tokens = tokenize(&expanded)?;
    parse(&tokens)
}

pub fn parse(tokens: &[Token]) -> Result<QueryAst, SparqlError> {
    if tokens.last().map(|t| t.kind) != Some(TokenKind::Eof) {
        return Err(SparqlError::Parse {
            expected: "token stream ending in end-of-input".into(),
            found: "unterminated token stream".into(),
            position: tokens.last().map(|t| t.position).unwrap_or(Position {
                line: 1,
                column: 1,
                offset: 0,
            }),
        });
    }
    let mut p = Parser { tokens, pos: 0 };
    let ast = p.query()?;
    validate(&ast, tokens)?;
    Ok(ast)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "DISTINCT",
    "REDUCED",
    "UNION",
    "GROUP",
    "HAVING",
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "GRAPH",
    "MINUS",
    "BIND",
    "VALUES",
    "SERVICE",
    "FROM",
    "NAMED",
    "BASE",
];

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &'t Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> &'t Token {
        let t = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> SparqlError {
        let tok = self.peek();
        if tok.kind == TokenKind::Keyword && UNSUPPORTED_KEYWORDS.iter().any(|k| tok.text.eq_ignore_ascii_case(k)) {
            return self.unsupported(&tok.text.to_ascii_uppercase());
        }
        SparqlError::Parse {
            expected: expected.to_string(),
            found: describe(tok),
            position: tok.position,
        }
    }

    fn unsupported(&self, feature: &str) -> SparqlError {
        SparqlError::Unsupported {
            feature: feature.to_string(),
            position: self.peek().position,
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek().is_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SparqlError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(kw))
        }
    }

    fn at(&self, kind: TokenKind, text: &str) -> bool {
        self.peek().is(kind, text)
    }

    fn eat(&mut self, kind: TokenKind, text: &str) -> bool {
        if self.at(kind, text) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, text: &str) -> Result<(), SparqlError> {
        if self.eat(kind, text) {
            Ok(())
        } else {
            Err(self.error(&format!("'{text}'")))
        }
    }

    fn query(&mut self) -> Result<QueryAst, SparqlError> {
        self.expect_keyword("SELECT")?;
        let projection = if self.eat(TokenKind::Punct, "*") {
            Projection::All
        } else {
            let mut vars = Vec::new();
            while self.peek().kind == TokenKind::Variable {
                vars.push(var_name(self.bump()));
            }
            if vars.is_empty() {
                return Err(self.error("projection variable or '*'"));
            }
            Projection::Vars(vars)
        };
        self.eat_keyword("WHERE");
        let mut ast = QueryAst {
            projection,
            patterns: Vec::new(),
            optional_blocks: Vec::new(),
            filter: None,
            modifiers: ModifierSet::default(),
        };
        self.group(&mut ast)?;
        self.modifiers(&mut ast.modifiers)?;
        if self.peek().kind != TokenKind::Eof {
            return Err(self.error("end of query"));
        }
        ast.modifiers.has_filter = ast.filter.is_some();
        Ok(ast)
    }

    fn group(&mut self, ast: &mut QueryAst) -> Result<(), SparqlError> {
        let open = self.peek().position;
        self.expect(TokenKind::Punct, "{")?;
        loop {
            let tok = self.peek();
            if self.eat(TokenKind::Punct, "}") {
                break;
            } else if self.eat(TokenKind::Punct, ".") {
                continue;
            } else if tok.is_keyword("OPTIONAL") {
                self.bump();
                let block_pos = self.peek().position;
                let block = self.optional_block()?;
                if block.is_empty() {
                    return Err(SparqlError::Parse {
                        expected: "at least one triple pattern".into(),
                        found: "empty OPTIONAL block".into(),
                        position: block_pos,
                    });
                }
                ast.optional_blocks.push(block);
            } else if tok.is_keyword("FILTER") {
                if ast.filter.is_some() {
                    return Err(self.unsupported("multiple FILTER clauses"));
                }
                self.bump();
                ast.filter = Some(self.unary()?);
            } else if tok.is(TokenKind::Punct, "{") {
                return Err(self.unsupported("nested group pattern"));
            } else if tok.kind == TokenKind::Eof {
                return Err(self.error("'}'"));
            } else {
                self.triples_same_subject(&mut ast.patterns)?;
            }
        }
        if ast.patterns.is_empty() && ast.optional_blocks.is_empty() {
            return Err(SparqlError::Parse {
                expected: "at least one triple pattern".into(),
                found: "empty pattern block".into(),
                position: open,
            });
        }
        Ok(())
    }

    fn optional_block(&mut self) -> Result<Vec<TriplePattern>, SparqlError> {
        self.expect(TokenKind::Punct, "{")?;
        let mut out = Vec::new();
        loop {
            let tok = self.peek();
            if self.eat(TokenKind::Punct, "}") {
                return Ok(out);
            } else if self.eat(TokenKind::Punct, ".") {
                continue;
            } else if tok.is_keyword("OPTIONAL") {
                return Err(self.unsupported("nested OPTIONAL"));
            } else if tok.is_keyword("FILTER") {
                return Err(self.unsupported("FILTER inside OPTIONAL"));
            } else if tok.is(TokenKind::Punct, "{") {
                return Err(self.unsupported("nested group pattern"));
            } else if tok.kind == TokenKind::Eof {
                return Err(self.error("'}'"));
            } else {
                self.triples_same_subject(&mut out)?;
            }
        }
    }

    /// `s p o (, o)* (; p o (, o)*)* .?`
    fn triples_same_subject(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), SparqlError> {
        let subject = self.node("subject")?;
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.node("object")?;
                out.push(TriplePattern::new(subject.clone(), predicate.clone(), object));
                if !self.eat(TokenKind::Punct, ",") {
                    break;
                }
            }
            if !self.eat(TokenKind::Punct, ";") {
                break;
            }
            // trailing ';' before '.' or '}'
            if self.at(TokenKind::Punct, ".") || self.at(TokenKind::Punct, "}") {
                break;
            }
        }
        self.eat(TokenKind::Punct, ".");
        Ok(())
    }

    fn predicate(&mut self) -> Result<Term, SparqlError> {
        let tok = self.peek();
        if tok.kind == TokenKind::Sign && matches!(tok.text.as_str(), "^" | "!") {
            return Err(self.unsupported("property path"));
        }
        if tok.is(TokenKind::Punct, "(") {
            return Err(self.unsupported("property path"));
        }
        let term = self.node("predicate")?;
        let next = self.peek();
        if (next.kind == TokenKind::Sign && matches!(next.text.as_str(), "/" | "|" | "+"))
            || next.is(TokenKind::Punct, "*")
        {
            return Err(self.unsupported("property path"));
        }
        if matches!(term, Term::Text(_) | Term::Number(_)) {
            return Err(SparqlError::Parse {
                expected: "predicate name or variable".into(),
                found: describe(tok),
                position: tok.position,
            });
        }
        Ok(term)
    }

    fn node(&mut self, what: &str) -> Result<Term, SparqlError> {
        let tok = self.peek();
        match tok.kind {
            TokenKind::Variable | TokenKind::Identifier | TokenKind::Literal => {
                self.bump();
                token_term(tok)
            }
            _ => Err(self.error(what)),
        }
    }

    fn modifiers(&mut self, m: &mut ModifierSet) -> Result<(), SparqlError> {
        loop {
            let tok = self.peek();
            if tok.is_keyword("ORDER") {
                if m.order_by.is_some() {
                    return Err(self.error("end of query"));
                }
                self.bump();
                self.expect_keyword("BY")?;
                m.order_by = Some(self.order_key()?);
                let next = self.peek();
                if next.kind == TokenKind::Variable || next.is_keyword("ASC") || next.is_keyword("DESC") {
                    return Err(self.unsupported("ORDER BY with multiple keys"));
                }
            } else if tok.is_keyword("LIMIT") && m.limit.is_none() {
                self.bump();
                m.limit = Some(self.count()?);
            } else if tok.is_keyword("OFFSET") && m.offset.is_none() {
                self.bump();
                m.offset = Some(self.count()?);
            } else {
                return Ok(());
            }
        }
    }

    fn order_key(&mut self) -> Result<OrderKey, SparqlError> {
        let direction = if self.eat_keyword("ASC") {
            Some(Direction::Asc)
        } else if self.eat_keyword("DESC") {
            Some(Direction::Desc)
        } else {
            None
        };
        if direction.is_some() {
            self.expect(TokenKind::Punct, "(")?;
        }
        let tok = self.peek();
        if tok.kind != TokenKind::Variable {
            return Err(self.error("ORDER BY variable"));
        }
        self.bump();
        if direction.is_some() {
            self.expect(TokenKind::Punct, ")")?;
        }
        Ok(OrderKey {
            variable: var_name(tok),
            direction: direction.unwrap_or(Direction::Asc),
        })
    }

    fn count(&mut self) -> Result<u64, SparqlError> {
        let tok = self.peek();
        let n = (tok.kind == TokenKind::Literal)
            .then(|| tok.text.parse::<u64>().ok())
            .flatten()
            .ok_or_else(|| self.error("non-negative integer"))?;
        self.bump();
        Ok(n)
    }

    fn or_expr(&mut self) -> Result<FilterExpr, SparqlError> {
        let mut lhs = self.and_expr()?;
        while self.eat(TokenKind::Sign, "||") {
            let rhs = self.and_expr()?;
            lhs = FilterExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<FilterExpr, SparqlError> {
        let mut lhs = self.unary()?;
        while self.eat(TokenKind::Sign, "&&") {
            let rhs = self.unary()?;
            lhs = FilterExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<FilterExpr, SparqlError> {
        if self.eat(TokenKind::Sign, "!") {
            return Ok(FilterExpr::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<FilterExpr, SparqlError> {
        if self.eat(TokenKind::Punct, "(") {
            let e = self.or_expr()?;
            self.expect(TokenKind::Punct, ")")?;
            return Ok(e);
        }
        if self.peek().is_keyword("NOT") && self.peek_at(1).is_keyword("EXISTS") {
            self.bump();
            self.bump();
            return Ok(FilterExpr::NotExists(self.exists_arg()?));
        }
        if self.eat_keyword("EXISTS") {
            return Ok(FilterExpr::Exists(self.exists_arg()?));
        }
        let lhs = self.operand()?;
        let tok = self.peek();
        let op = (tok.kind == TokenKind::Sign)
            .then(|| CmpOp::from_symbol(&tok.text))
            .flatten()
            .ok_or_else(|| self.error("comparison operator"))?;
        self.bump();
        let rhs = self.operand()?;
        Ok(FilterExpr::cmp(op, lhs, rhs))
    }

    fn exists_arg(&mut self) -> Result<Term, SparqlError> {
        if self.at(TokenKind::Punct, "{") {
            return Err(self.unsupported("EXISTS with a graph pattern"));
        }
        self.expect(TokenKind::Punct, "(")?;
        let t = self.operand()?;
        self.expect(TokenKind::Punct, ")")?;
        Ok(t)
    }

    fn operand(&mut self) -> Result<Term, SparqlError> {
        let tok = self.peek();
        match tok.kind {
            TokenKind::Variable | TokenKind::Literal | TokenKind::Identifier => {
                self.bump();
                token_term(tok)
            }
            _ => Err(self.error("variable or literal")),
        }
    }
}

fn var_name(tok: &Token) -> String {
    tok.text[1..].to_string()
}

fn token_term(tok: &Token) -> Result<Term, SparqlError> {
    if tok.kind == TokenKind::Variable {
        return Ok(Term::Variable(var_name(tok)));
    }
    term_parse(&tok.text).map_err(|e| SparqlError::Parse {
        expected: "term".into(),
        found: e.to_string(),
        position: tok.position,
    })
}

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::Eof => "end of input".into(),
        _ => format!("'{}'", tok.text),
    }
}

fn validate(ast: &QueryAst, tokens: &[Token]) -> Result<(), SparqlError> {
    if let Projection::Vars(vars) = &ast.projection {
        let known = ast.all_variables();
        for v in vars {
            if !known.contains(v) {
                let position = tokens
                    .iter()
                    .find(|t| t.kind == TokenKind::Variable && t.text[1..] == *v)
                    .map(|t| t.position)
                    .unwrap_or(tokens[0].position);
                return Err(SparqlError::Parse {
                    expected: format!("?{v} to occur in the query body"),
                    found: format!("projected variable ?{v}"),
                    position,
                });
            }
        }
    }
    Ok(())
}

/// Replaces `PREFIX p: <iri>` declarations and rewrites `p:local` names to
/// `<iri local>` before tokenization. String literals, IRIs and comments
/// are copied through untouched.
pub fn expand_prefixes(src: &str) -> Result<Cow<'_, str>, SparqlError> {
    if !src.to_ascii_uppercase().contains("PREFIX") {
        return Ok(Cow::Borrowed(src));
    }
    let mut prefixes: HashMap<String, String> = HashMap::new();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    let bad = |message: &str, at: usize| SparqlError::Parse {
        expected: "PREFIX name: <iri>".into(),
        found: message.to_string(),
        position: position_of(src, at),
    };
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().unwrap();
        let len = if c == '"' {
            scan_quoted(rest).map(|(_, n)| n).unwrap_or(rest.len())
        } else if c == '#' {
            rest.find('\n').unwrap_or(rest.len())
        } else if c == '<' {
            rest.find(|ch: char| ch == '>' || ch.is_whitespace())
                .filter(|&e| rest[e..].starts_with('>'))
                .map_or(1, |e| e + 1)
        } else if c == '?' || c == '$' {
            1 + rest[1..]
                .find(|ch: char| !(ch.is_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len() - 1)
        } else if is_name_start(c) {
            let mut n = rest.find(|ch: char| !is_name_char(ch)).unwrap_or(rest.len());
            while rest[..n].ends_with('.') {
                n -= 1;
            }
            let word = &rest[..n];
            if word.eq_ignore_ascii_case("PREFIX") {
                let decl = &rest[n..];
                let after_ws = decl.trim_start();
                let name_len = after_ws.find(char::is_whitespace).unwrap_or(after_ws.len());
                let pname = &after_ws[..name_len];
                let pfx = pname
                    .strip_suffix(':')
                    .filter(|p| p.chars().all(|ch| ch.is_alphanumeric() || ch == '_' || ch == '-'))
                    .ok_or_else(|| bad(&format!("prefix name {pname:?}"), i))?;
                let iri_part = after_ws[name_len..].trim_start();
                let end = iri_part
                    .strip_prefix('<')
                    .and_then(|s| s.find('>'))
                    .ok_or_else(|| bad("missing <iri>", i))?;
                prefixes.insert(pfx.to_string(), iri_part[1..end + 1].to_string());
                let consumed = src.len() - i - iri_part.len() + end + 2;
                out.push(' ');
                i += consumed;
                continue;
            }
            match word.split_once(':') {
                Some((pfx, local)) if prefixes.contains_key(pfx) => {
                    out.push('<');
                    out.push_str(&prefixes[pfx]);
                    out.push_str(local);
                    out.push('>');
                    i += n;
                    continue;
                }
                _ => n,
            }
        } else {
            c.len_utf8()
        };
        out.push_str(&src[i..i + len]);
        i += len;
    }
    Ok(Cow::Owned(out))
}

fn position_of(src: &str, offset: usize) -> Position {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Position { line, column, offset }
}
