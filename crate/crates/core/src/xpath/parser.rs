use crate::axes::Axis;

use super::ast::{BinOp, Expr, ExprKind, NodeTest, Span, Step};
use super::lexer::{tokenize, Tok, Token};
use super::XPathError;

pub fn parse_expr(text: &str) -> Result<Expr, XPathError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        len: text.len(),
    };
    if p.tokens.is_empty() {
        return Err(XPathError::syntax("empty expression", 0));
    }
    let e = p.expr()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(XPathError::syntax(
            &format!("unexpected {}", describe(&t.tok)),
            t.start,
        ));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

const NODE_TYPES: [&str; 4] = ["comment", "text", "processing-instruction", "node"];

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("`{n}`"),
        Tok::Literal(s) => format!("literal {s:?}"),
        Tok::Number(n) => format!("number {n}"),
        Tok::Variable(v) => format!("`${v}`"),
        other => {
            let s = match other {
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::LBracket => "[",
                Tok::RBracket => "]",
                Tok::Dot => ".",
                Tok::DotDot => "..",
                Tok::At => "@",
                Tok::Comma => ",",
                Tok::ColonColon => "::",
                Tok::Slash => "/",
                Tok::SlashSlash => "//",
                Tok::Pipe => "|",
                Tok::Plus => "+",
                Tok::Minus => "-",
                Tok::Eq => "=",
                Tok::Neq => "!=",
                Tok::Lt => "<",
                Tok::Le => "<=",
                Tok::Gt => ">",
                Tok::Ge => ">=",
                Tok::Star => "*",
                _ => unreachable!(),
            };
            format!("`{s}`")
        }
    }
}

fn dos_step() -> Step {
    Step::new(Axis::DescendantOrSelf, NodeTest::Node)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + n).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.start)
    }

    fn last_end(&self) -> usize {
        self.pos.checked_sub(1).map_or(0, |i| self.tokens[i].end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), XPathError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, expected: &str) -> XPathError {
        match self.tokens.get(self.pos) {
            Some(t) => XPathError::syntax(
                &format!("expected {expected}, found {}", describe(&t.tok)),
                t.start,
            ),
            None => XPathError::syntax(&format!("expected {expected}, found end of expression"), self.len),
        }
    }

    fn span_from(&self, start: usize) -> Span {
        start..self.last_end()
    }

    fn expr(&mut self) -> Result<Expr, XPathError> {
        self.binary(1)
    }

    fn operator(&self, level: u8) -> Option<BinOp> {
        let op = match self.peek()? {
            Tok::Name(n) if n == "or" => BinOp::Or,
            Tok::Name(n) if n == "and" => BinOp::And,
            Tok::Eq => BinOp::Eq,
            Tok::Neq => BinOp::Neq,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Name(n) if n == "div" => BinOp::Div,
            Tok::Name(n) if n == "mod" => BinOp::Mod,
            _ => return None,
        };
        (op.precedence() == level).then_some(op)
    }

    /// Left-associative binary levels 1 (`or`) through 6 (multiplicative).
    fn binary(&mut self, level: u8) -> Result<Expr, XPathError> {
        if level > 6 {
            return self.unary();
        }
        let start = self.offset();
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.operator(level) {
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::new(
                ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                self.span_from(start),
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, XPathError> {
        let start = self.offset();
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), self.span_from(start)));
        }
        self.union()
    }

    fn union(&mut self) -> Result<Expr, XPathError> {
        let start = self.offset();
        let mut lhs = self.path_expr()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.path_expr()?;
            lhs = Expr::new(
                ExprKind::Union(Box::new(lhs), Box::new(rhs)),
                self.span_from(start),
            );
        }
        Ok(lhs)
    }

    fn starts_filter(&self) -> bool {
        match self.peek() {
            Some(Tok::Variable(_) | Tok::LParen | Tok::Literal(_) | Tok::Number(_)) => true,
            Some(Tok::Name(n)) => self.peek_at(1) == Some(&Tok::LParen) && !NODE_TYPES.contains(&n.as_str()),
            _ => false,
        }
    }

    fn path_expr(&mut self) -> Result<Expr, XPathError> {
        let start = self.offset();
        if !self.starts_filter() {
            return self.location_path();
        }
        let primary = self.primary()?;
        let mut predicates = Vec::new();
        while self.peek() == Some(&Tok::LBracket) {
            predicates.push(self.predicate()?);
        }
        let base = if predicates.is_empty() {
            primary
        } else if let ExprKind::Filter {
            primary: inner,
            predicates: first,
        } = primary.kind
        {
            // `((e)[p])[q]` is `(e)[p][q]`
            let mut all = first;
            all.extend(predicates);
            Expr::new(
                ExprKind::Filter {
                    primary: inner,
                    predicates: all,
                },
                self.span_from(start),
            )
        } else {
            Expr::new(
                ExprKind::Filter {
                    primary: Box::new(primary),
                    predicates,
                },
                self.span_from(start),
            )
        };
        let mut steps = Vec::new();
        if self.eat(&Tok::Slash) {
        } else if self.eat(&Tok::SlashSlash) {
            steps.push(dos_step());
        } else {
            return Ok(base);
        }
        self.relative_steps(&mut steps)?;
        Ok(Expr::new(
            ExprKind::PathFrom {
                base: Box::new(base),
                steps,
            },
            self.span_from(start),
        ))
    }

    fn starts_step(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Name(_) | Tok::Star | Tok::At | Tok::Dot | Tok::DotDot)
        )
    }

    fn location_path(&mut self) -> Result<Expr, XPathError> {
        let start = self.offset();
        let mut steps = Vec::new();
        let absolute = if self.eat(&Tok::Slash) {
            if self.starts_step() {
                self.relative_steps(&mut steps)?;
            }
            true
        } else if self.eat(&Tok::SlashSlash) {
            steps.push(dos_step());
            self.relative_steps(&mut steps)?;
            true
        } else {
            self.relative_steps(&mut steps)?;
            false
        };
        Ok(Expr::new(
            ExprKind::Path { absolute, steps },
            self.span_from(start),
        ))
    }

    fn relative_steps(&mut self, steps: &mut Vec<Step>) -> Result<(), XPathError> {
        steps.push(self.step()?);
        loop {
            if self.eat(&Tok::Slash) {
            } else if self.eat(&Tok::SlashSlash) {
                steps.push(dos_step());
            } else {
                return Ok(());
            }
            steps.push(self.step()?);
        }
    }

    fn step(&mut self) -> Result<Step, XPathError> {
        if self.eat(&Tok::Dot) {
            return Ok(Step::new(Axis::SelfAxis, NodeTest::Node));
        }
        if self.eat(&Tok::DotDot) {
            return Ok(Step::new(Axis::Parent, NodeTest::Node));
        }
        let axis = if self.eat(&Tok::At) {
            Axis::Attribute
        } else if let (Some(Tok::Name(n)), Some(Tok::ColonColon)) = (self.peek(), self.peek_at(1)) {
            let at = self.offset();
            let axis = if n == "namespace" {
                return Err(XPathError::NamespaceAxis { position: at });
            } else {
                n.parse::<Axis>().map_err(|m| XPathError::syntax(&m, at))?
            };
            self.pos += 2;
            axis
        } else {
            Axis::Child
        };
        let test = self.node_test()?;
        let mut predicates = Vec::new();
        while self.peek() == Some(&Tok::LBracket) {
            predicates.push(self.predicate()?);
        }
        Ok(Step {
            axis,
            test,
            predicates,
        })
    }

    fn node_test(&mut self) -> Result<NodeTest, XPathError> {
        match self.peek().cloned() {
            Some(Tok::Star) => {
                self.pos += 1;
                Ok(NodeTest::Wildcard)
            }
            Some(Tok::Name(n))
                if self.peek_at(1) == Some(&Tok::LParen) && NODE_TYPES.contains(&n.as_str()) =>
            {
                self.pos += 2;
                let test = match n.as_str() {
                    "comment" => NodeTest::Comment,
                    "text" => NodeTest::Text,
                    "node" => NodeTest::Node,
                    _ => match self.peek().cloned() {
                        Some(Tok::Literal(s)) => {
                            self.pos += 1;
                            NodeTest::ProcessingInstruction(Some(s))
                        }
                        _ => NodeTest::ProcessingInstruction(None),
                    },
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(test)
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(NodeTest::Name(n))
            }
            _ => Err(self.unexpected("a node test")),
        }
    }

    fn predicate(&mut self) -> Result<Expr, XPathError> {
        self.expect(Tok::LBracket, "`[`")?;
        let e = self.expr()?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, XPathError> {
        let start = self.offset();
        let kind = match self.peek().cloned() {
            Some(Tok::Variable(v)) => {
                self.pos += 1;
                ExprKind::Variable(v)
            }
            Some(Tok::Literal(s)) => {
                self.pos += 1;
                ExprKind::Literal(s)
            }
            Some(Tok::Number(n)) => {
                self.pos += 1;
                ExprKind::Number(n)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let mut e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                e.span = self.span_from(start);
                return Ok(e);
            }
            Some(Tok::Name(name)) => {
                self.pos += 2;
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        args.push(self.expr()?);
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(Tok::Comma, "`,` or `)`")?;
                    }
                }
                ExprKind::Call { name, args }
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr::new(kind, self.span_from(start)))
    }
}
