use super::{Op, ScoreExpr, Terminal};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("arity error at byte {offset}: `{op}` takes 2 arguments, found {found}")]
    Arity {
        offset: usize,
        op: &'static str,
        found: usize,
    },
    #[error("unknown symbol `{symbol}` at byte {offset}")]
    UnknownSymbol { offset: usize, symbol: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Option<(usize, Tok<'a>)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        match bytes.get(start)? {
            b'(' => {
                self.pos += 1;
                Some((start, Tok::Open))
            }
            b')' => {
                self.pos += 1;
                Some((start, Tok::Close))
            }
            _ => {
                while self.pos < bytes.len()
                    && !bytes[self.pos].is_ascii_whitespace()
                    && bytes[self.pos] != b'('
                    && bytes[self.pos] != b')'
                {
                    self.pos += 1;
                }
                Some((start, Tok::Atom(&self.src[start..self.pos])))
            }
        }
    }

    fn peek(&mut self) -> Option<(usize, Tok<'a>)> {
        let saved = self.pos;
        let t = self.next();
        self.pos = saved;
        t
    }
}

/// Parses one prefix s-expression such as `(sub lb (mul bigM depth))`.
pub fn parse(text: &str) -> Result<ScoreExpr, ParseError> {
    let mut lx = Lexer { src: text, pos: 0 };
    let expr = parse_expr(&mut lx)?;
    if let Some((offset, _)) = lx.next() {
        return Err(ParseError::Syntax {
            offset,
            message: "trailing input after expression".into(),
        });
    }
    Ok(expr)
}

/// Parses the contents of a `.ssx` file: one expression, with optional
/// lines starting with `#` treated as comments.
pub fn parse_ssx(text: &str) -> Result<ScoreExpr, ParseError> {
    // Blank out comment lines so byte offsets still refer to the input.
    let mut cleaned = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        if line.trim_start().starts_with('#') {
            cleaned.extend(line.chars().map(|c| if c == '\n' { '\n' } else { ' ' }));
        } else {
            cleaned.push_str(line);
        }
    }
    parse(&cleaned)
}

fn parse_expr(lx: &mut Lexer<'_>) -> Result<ScoreExpr, ParseError> {
    let end = lx.src.len();
    match lx.next() {
        None => Err(ParseError::Syntax {
            offset: end,
            message: "unexpected end of input".into(),
        }),
        Some((offset, Tok::Close)) => Err(ParseError::Syntax {
            offset,
            message: "unexpected `)`".into(),
        }),
        Some((offset, Tok::Atom(sym))) => match Terminal::from_symbol(sym) {
            Some(t) => Ok(ScoreExpr::Leaf(t)),
            None if Op::from_symbol(sym).is_some() => Err(ParseError::Syntax {
                offset,
                message: format!("operator `{sym}` must be applied inside parentheses"),
            }),
            None => Err(ParseError::UnknownSymbol {
                offset,
                symbol: sym.to_string(),
            }),
        },
        Some((open, Tok::Open)) => {
            let op = match lx.next() {
                Some((offset, Tok::Atom(sym))) => match Op::from_symbol(sym) {
                    Some(op) => op,
                    None if Terminal::from_symbol(sym).is_some() => {
                        return Err(ParseError::Syntax {
                            offset,
                            message: format!("expected an operator, found terminal `{sym}`"),
                        })
                    }
                    None => {
                        return Err(ParseError::UnknownSymbol {
                            offset,
                            symbol: sym.to_string(),
                        })
                    }
                },
                Some((offset, _)) => {
                    return Err(ParseError::Syntax {
                        offset,
                        message: "expected an operator after `(`".into(),
                    })
                }
                None => {
                    return Err(ParseError::Syntax {
                        offset: end,
                        message: "unexpected end of input".into(),
                    })
                }
            };
            let mut args = Vec::with_capacity(2);
            loop {
                match lx.peek() {
                    Some((_, Tok::Close)) => {
                        lx.next();
                        break;
                    }
                    None => {
                        return Err(ParseError::Syntax {
                            offset: end,
                            message: format!("unclosed `(` opened at byte {open}"),
                        })
                    }
                    Some(_) => args.push(parse_expr(lx)?),
                }
            }
            if args.len() != 2 {
                return Err(ParseError::Arity {
                    offset: open,
                    op: op.symbol(),
                    found: args.len(),
                });
            }
            let rhs = args.pop().unwrap();
            let lhs = args.pop().unwrap();
            Ok(ScoreExpr::node(op, lhs, rhs))
        }
    }
}
