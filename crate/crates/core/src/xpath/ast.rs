//! Full XPath 1.0 expression tree.
//!
//! Abbreviations are expanded during parsing, so `a//b` is stored as three
//! steps and `..` as `parent::node()`. Display prints the expanded syntax
//! with the minimum parentheses needed to re-parse to the same tree.

use std::fmt;
use std::ops::Range;

use crate::axes::Axis;

pub type Span = Range<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeTest {
    /// A name test; QName prefixes are kept verbatim (`svg:rect`, `svg:*`).
    Name(String),
    Wildcard,
    Node,
    Text,
    Comment,
    ProcessingInstruction(Option<String>),
}

impl fmt::Display for NodeTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeTest::Name(n) => f.write_str(n),
            NodeTest::Wildcard => f.write_str("*"),
            NodeTest::Node => f.write_str("node()"),
            NodeTest::Text => f.write_str("text()"),
            NodeTest::Comment => f.write_str("comment()"),
            NodeTest::ProcessingInstruction(None) => f.write_str("processing-instruction()"),
            NodeTest::ProcessingInstruction(Some(t)) => {
                write!(f, "processing-instruction({})", Literal(t))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Neq => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

pub(crate) const PREC_UNARY: u8 = 7;
pub(crate) const PREC_UNION: u8 = 8;
pub(crate) const PREC_PATH: u8 = 9;
pub(crate) const PREC_PRIMARY: u8 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    pub predicates: Vec<Expr>,
}

impl Step {
    pub fn new(axis: Axis, test: NodeTest) -> Self {
        Step {
            axis,
            test,
            predicates: Vec::new(),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.axis, self.test)?;
        for p in &self.predicates {
            write!(f, "[{p}]")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    /// A location path; an absolute path may have no steps (`/`).
    Path {
        absolute: bool,
        steps: Vec<Step>,
    },
    Filter {
        primary: Box<Expr>,
        predicates: Vec<Expr>,
    },
    /// `base/steps`, where `base` is a filter expression.
    PathFrom {
        base: Box<Expr>,
        steps: Vec<Step>,
    },
    Literal(String),
    Number(f64),
    Variable(String),
    Call {
        name: String,
        args: Vec<Expr>,
    },
}

/// An expression with the byte range it was parsed from. Equality ignores
/// spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub(crate) fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(op, ..) => op.precedence(),
            ExprKind::Neg(_) => PREC_UNARY,
            ExprKind::Union(..) => PREC_UNION,
            ExprKind::Path { .. } | ExprKind::PathFrom { .. } => PREC_PATH,
            ExprKind::Filter { .. }
            | ExprKind::Literal(_)
            | ExprKind::Number(_)
            | ExprKind::Variable(_)
            | ExprKind::Call { .. } => PREC_PRIMARY,
        }
    }

    /// Renders the expression, parenthesized if it binds looser than `min`.
    pub fn to_string_at(&self, min: u8) -> String {
        // a bare `/` would swallow a following name or `*` as its step
        let lone_root = matches!(&self.kind, ExprKind::Path { absolute: true, steps } if steps.is_empty());
        if self.precedence() < min || (lone_root && min > 0) {
            format!("({self})")
        } else {
            self.to_string()
        }
    }
}

pub(crate) fn write_steps(f: &mut fmt::Formatter<'_>, absolute: bool, steps: &[Step]) -> fmt::Result {
    if absolute {
        f.write_str("/")?;
    }
    for (i, s) in steps.iter().enumerate() {
        if i > 0 {
            f.write_str("/")?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Binary(op, l, r) => {
                let p = op.precedence();
                write!(
                    f,
                    "{} {} {}",
                    l.to_string_at(p),
                    op.symbol(),
                    r.to_string_at(p + 1)
                )
            }
            ExprKind::Neg(e) => write!(f, "-{}", e.to_string_at(PREC_UNARY)),
            ExprKind::Union(l, r) => write!(
                f,
                "{} | {}",
                l.to_string_at(PREC_UNION),
                r.to_string_at(PREC_UNION + 1)
            ),
            ExprKind::Path { absolute, steps } => write_steps(f, *absolute, steps),
            ExprKind::Filter { primary, predicates } => {
                f.write_str(&primary.to_string_at(PREC_PRIMARY))?;
                for p in predicates {
                    write!(f, "[{p}]")?;
                }
                Ok(())
            }
            ExprKind::PathFrom { base, steps } => {
                write!(f, "{}/", base.to_string_at(PREC_PRIMARY))?;
                write_steps(f, false, steps)
            }
            ExprKind::Literal(s) => write!(f, "{}", Literal(s)),
            ExprKind::Number(n) => write!(f, "{n}"),
            ExprKind::Variable(v) => write!(f, "${v}"),
            ExprKind::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A string literal, quoted with whichever quote it does not contain.
pub(crate) struct Literal<'a>(pub &'a str);

impl fmt::Display for Literal<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.contains('"') {
            write!(f, "'{}'", self.0)
        } else {
            write!(f, "\"{}\"", self.0)
        }
    }
}
