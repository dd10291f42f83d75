//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= integer | '-' integer | '(' '-'? integer ')'
//! primary := number | rational | variable | constant | call | '(' expr ')'
//! call    := name '(' expr (',' expr)* ')'
//! rational:= integer '/' integer      (no whitespace, not followed by '^')
//! ```
//!
//! Columns in errors are 1-based character positions.

use super::{Expr, ExprError, Func, Node, Number, MAX_VARS};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    column: usize,
    end: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let literal: String = chars[start..i].iter().collect();
            if literal.matches('.').count() > 1 {
                return Err(ExprError::Parse {
                    column,
                    message: format!("malformed number `{literal}`"),
                });
            }
            tokens.push(Token {
                tok: Tok::Number(literal),
                column,
                end: i + 1,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
                end: i + 1,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            other => {
                return Err(ExprError::Parse {
                    column,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        tokens.push(Token {
            tok,
            column,
            end: column + 1,
        });
        i += 1;
    }
    Ok(tokens)
}

fn variable_index(name: &str) -> Option<usize> {
    match name {
        "x" | "t" => Some(0),
        "y" => Some(1),
        "p" => Some(2),
        "q" => Some(3),
        "z" => Some(4),
        _ => {
            let digits = name.strip_prefix('x')?;
            let k: usize = digits.parse().ok()?;
            (1..=MAX_VARS).contains(&k).then(|| k - 1)
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    input_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn end_column(&self) -> usize {
        self.input_len + 1
    }

    fn error_here(&self, message: impl Into<String>) -> ExprError {
        let column = self.peek().map_or(self.end_column(), |t| t.column);
        ExprError::Parse {
            column,
            message: message.into(),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    lhs = Expr::new(Node::Add(lhs, rhs));
                }
                Some(Tok::Minus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    lhs = Expr::new(Node::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::new(Node::Mul(lhs, rhs));
                }
                Some(Tok::Slash) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::new(Node::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Minus)) {
            self.advance();
            let inner = self.parse_unary()?;
            return Ok(Expr::new(Node::Neg(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ExprError> {
        let base = self.parse_primary()?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Caret)) {
            self.advance();
            let n = self.parse_exponent()?;
            return Ok(Expr::new(Node::Pow(base, n)));
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<i32, ExprError> {
        let parenthesized = matches!(self.peek().map(|t| &t.tok), Some(Tok::LParen));
        let open_column = self.peek().map(|t| t.column);
        if parenthesized {
            self.advance();
        }
        let negative = matches!(self.peek().map(|t| &t.tok), Some(Tok::Minus));
        if negative {
            self.advance();
        }
        let value = match self.peek().cloned() {
            Some(Token {
                tok: Tok::Number(text),
                column,
                ..
            }) => {
                self.advance();
                text.parse::<i32>().map_err(|_| ExprError::Parse {
                    column,
                    message: format!("exponent `{text}` is not an integer"),
                })?
            }
            _ => return Err(self.error_here("expected an integer exponent")),
        };
        if parenthesized {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::RParen) => {
                    self.advance();
                }
                Some(_) => return Err(self.error_here("expected `)` after exponent")),
                None => {
                    return Err(ExprError::Parse {
                        column: open_column.unwrap_or(self.end_column()),
                        message: "unclosed parenthesis".into(),
                    })
                }
            }
        }
        Ok(if negative { -value } else { value })
    }

    fn parse_number(&mut self, text: &str, column: usize, end: usize) -> Result<Expr, ExprError> {
        let value = Number::from_decimal(text).ok_or_else(|| ExprError::Parse {
            column,
            message: format!("malformed number `{text}`"),
        })?;
        // Adjacent `p/q` of two integer literals is a rational literal unless the
        // denominator is itself the base of a power.
        if let (Some(numer), Some(slash), Some(den), after) =
            (value.as_integer(), self.peek(), self.peek_at(1), self.peek_at(2))
        {
            if !text.contains('.')
                && slash.tok == Tok::Slash
                && slash.column == end
                && den.column == slash.end
                && !matches!(after.map(|t| &t.tok), Some(Tok::Caret))
            {
                if let Tok::Number(den_text) = &den.tok {
                    if let Ok(d) = den_text.parse::<i64>() {
                        if d != 0 {
                            self.advance();
                            self.advance();
                            return Ok(Expr::num(Number::ratio(numer, d)));
                        }
                    }
                }
            }
        }
        Ok(Expr::num(value))
    }

    fn parse_primary(&mut self) -> Result<Expr, ExprError> {
        let Some(token) = self.advance() else {
            return Err(ExprError::Parse {
                column: self.end_column(),
                message: "unexpected end of input".into(),
            });
        };
        match token.tok {
            Tok::Number(text) => self.parse_number(&text, token.column, token.end),
            Tok::Ident(name) => {
                if matches!(self.peek().map(|t| &t.tok), Some(Tok::LParen)) {
                    return self.parse_call(&name, token.column);
                }
                if name == "pi" {
                    return Ok(Expr::num(std::f64::consts::PI));
                }
                match variable_index(&name) {
                    Some(k) => Ok(Expr::var(k)),
                    None => Err(ExprError::Parse {
                        column: token.column,
                        message: format!("unknown variable `{name}`"),
                    }),
                }
            }
            Tok::LParen => {
                let inner = self.parse_expr()?;
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::RParen) => {
                        self.advance();
                        Ok(inner)
                    }
                    Some(_) => Err(self.error_here("expected `)`")),
                    None => Err(ExprError::Parse {
                        column: token.column,
                        message: "unclosed parenthesis".into(),
                    }),
                }
            }
            other => Err(ExprError::Parse {
                column: token.column,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn parse_call(&mut self, name: &str, name_column: usize) -> Result<Expr, ExprError> {
        let open = self.advance().expect("caller checked for `(`");
        let Some(func) = Func::from_name(name) else {
            return Err(ExprError::Parse {
                column: name_column,
                message: format!("unknown function `{name}`"),
            });
        };
        let unclosed = || ExprError::Parse {
            column: open.column,
            message: format!("unclosed call to `{name}`"),
        };
        if self.peek().is_none() {
            return Err(unclosed());
        }
        let mut args = Vec::new();
        if !matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen)) {
            loop {
                args.push(self.parse_expr().map_err(|e| match e {
                    ExprError::Parse { column, .. } if column == self.end_column() => unclosed(),
                    other => other,
                })?);
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.advance();
                        if self.peek().is_none() {
                            return Err(unclosed());
                        }
                    }
                    Some(Tok::RParen) => break,
                    Some(_) => return Err(self.error_here("expected `,` or `)` in argument list")),
                    None => return Err(unclosed()),
                }
            }
        }
        self.advance();
        if args.len() != func.arity() {
            return Err(ExprError::Arity {
                function: name.to_string(),
                expected: func.arity(),
                found: args.len(),
                column: name_column,
            });
        }
        let arg = args.pop().expect("arity is one");
        Ok(Expr::new(Node::Call(func, arg)))
    }
}

/// Parses `text` into an expression tree, preserving its literal structure.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        input_len: text.chars().count(),
    };
    if parser.peek().is_none() {
        return Err(ExprError::Parse {
            column: 1,
            message: "empty expression".into(),
        });
    }
    let expr = parser.parse_expr()?;
    if parser.peek().is_some() {
        return Err(parser.error_here("unexpected trailing input"));
    }
    Ok(expr)
}
