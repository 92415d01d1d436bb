//! XPath 1.0 parsing and the node-set fragment used by the analysis.
//!
//! [`parse_expr`] accepts the whole XPath 1.0 expression grammar. [`XPathExpr`]
//! is the view of such an expression that the abstract interpreter works on:
//! location paths, unions, filters, `id()` calls and the `and`/`or` structure
//! of predicates. Everything else is kept as [`Opaque`] text.

pub mod ast;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::axes::Axis;

use ast::{BinOp, Expr, ExprKind, NodeTest, Span, PREC_PATH, PREC_PRIMARY, PREC_UNION};

pub use parser::parse_expr;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum XPathError {
    #[error("{message} at offset {position}")]
    Syntax { message: String, position: usize },
    #[error("the namespace axis is not supported (offset {position})")]
    NamespaceAxis { position: usize },
}

impl XPathError {
    pub(crate) fn syntax(message: &str, position: usize) -> Self {
        XPathError::Syntax {
            message: message.to_string(),
            position,
        }
    }
}

/// A subexpression outside the analyzed fragment.
#[derive(Clone, Debug)]
pub struct Opaque {
    /// The source text.
    pub raw: String,
    /// Expanded syntax, parenthesized for the position it occupies.
    pub expanded: String,
    pub span: Span,
}

impl PartialEq for Opaque {
    fn eq(&self, other: &Self) -> bool {
        self.expanded == other.expanded
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    pub predicates: Vec<Predicate>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predicate {
    Expr(XPathExpr),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Opaque(Opaque),
}

#[derive(Clone, Debug, PartialEq)]
pub enum XPathExpr {
    AbsolutePath(Vec<Step>),
    RelativePath(Vec<Step>),
    Union(Box<XPathExpr>, Box<XPathExpr>),
    Filter {
        base: Box<XPathExpr>,
        predicates: Vec<Predicate>,
    },
    /// A filter expression followed by location steps, such as `id("x")/a`.
    PathFrom {
        base: Box<XPathExpr>,
        steps: Vec<Step>,
    },
    /// `id(...)`; the arguments are never analyzed.
    FunctionCall {
        name: String,
        args: Vec<Expr>,
    },
    Opaque(Opaque),
}

pub fn parse_xpath(text: &str) -> Result<XPathExpr, XPathError> {
    let e = parse_expr(text)?;
    Ok(XPathExpr::from_expr(&e, text))
}

impl XPathExpr {
    /// Classifies a parsed expression; `source` is the text it was parsed
    /// from, used for the raw text of opaque parts.
    pub fn from_expr(e: &Expr, source: &str) -> XPathExpr {
        Converter { source }.expr(e, 0)
    }

    fn precedence(&self) -> u8 {
        match self {
            XPathExpr::Union(..) => PREC_UNION,
            XPathExpr::AbsolutePath(_) | XPathExpr::RelativePath(_) | XPathExpr::PathFrom { .. } => PREC_PATH,
            _ => PREC_PRIMARY,
        }
    }

    fn to_string_at(&self, min: u8) -> String {
        let lone_root = matches!(self, XPathExpr::AbsolutePath(s) if s.is_empty());
        if !matches!(self, XPathExpr::Opaque(_)) && (self.precedence() < min || (lone_root && min > 0)) {
            format!("({self})")
        } else {
            self.to_string()
        }
    }

    /// First opaque part in source order, if any.
    pub fn first_opaque(&self) -> Option<&Opaque> {
        match self {
            XPathExpr::Opaque(o) => Some(o),
            XPathExpr::Union(l, r) => l.first_opaque().or_else(|| r.first_opaque()),
            XPathExpr::Filter { base, .. } | XPathExpr::PathFrom { base, .. } => base.first_opaque(),
            _ => None,
        }
    }
}

struct Converter<'a> {
    source: &'a str,
}

impl Converter<'_> {
    fn opaque(&self, e: &Expr, ctx: u8) -> Opaque {
        Opaque {
            raw: self.source.get(e.span.clone()).unwrap_or_default().to_string(),
            expanded: e.to_string_at(ctx),
            span: e.span.clone(),
        }
    }

    fn steps(&self, steps: &[ast::Step]) -> Vec<Step> {
        steps
            .iter()
            .map(|s| Step {
                axis: s.axis,
                test: s.test.clone(),
                predicates: s.predicates.iter().map(|p| self.predicate(p, 0)).collect(),
            })
            .collect()
    }

    fn expr(&self, e: &Expr, ctx: u8) -> XPathExpr {
        match &e.kind {
            ExprKind::Path {
                absolute: true,
                steps,
            } => XPathExpr::AbsolutePath(self.steps(steps)),
            ExprKind::Path {
                absolute: false,
                steps,
            } => XPathExpr::RelativePath(self.steps(steps)),
            ExprKind::Union(l, r) => XPathExpr::Union(
                Box::new(self.expr(l, PREC_UNION)),
                Box::new(self.expr(r, PREC_UNION + 1)),
            ),
            ExprKind::Filter { primary, predicates } => XPathExpr::Filter {
                base: Box::new(self.expr(primary, PREC_PRIMARY)),
                predicates: predicates.iter().map(|p| self.predicate(p, 0)).collect(),
            },
            ExprKind::PathFrom { base, steps } => XPathExpr::PathFrom {
                base: Box::new(self.expr(base, PREC_PRIMARY)),
                steps: self.steps(steps),
            },
            ExprKind::Call { name, args } if name == "id" && args.len() == 1 => XPathExpr::FunctionCall {
                name: name.clone(),
                args: args.clone(),
            },
            _ => XPathExpr::Opaque(self.opaque(e, ctx)),
        }
    }

    fn predicate(&self, e: &Expr, ctx: u8) -> Predicate {
        match &e.kind {
            ExprKind::Binary(BinOp::Or, l, r) => {
                Predicate::Or(Box::new(self.predicate(l, 1)), Box::new(self.predicate(r, 2)))
            }
            ExprKind::Binary(BinOp::And, l, r) => {
                Predicate::And(Box::new(self.predicate(l, 2)), Box::new(self.predicate(r, 3)))
            }
            _ => match self.expr(e, ctx) {
                XPathExpr::Opaque(o) => Predicate::Opaque(o),
                x => Predicate::Expr(x),
            },
        }
    }
}

impl Predicate {
    fn to_string_at(&self, min: u8) -> String {
        let (s, prec) = match self {
            Predicate::Or(l, r) => (format!("{} or {}", l.to_string_at(1), r.to_string_at(2)), 1),
            Predicate::And(l, r) => (format!("{} and {}", l.to_string_at(2), r.to_string_at(3)), 2),
            Predicate::Expr(x) => return x.to_string_at(min),
            Predicate::Opaque(o) => return o.expanded.clone(),
        };
        if prec < min {
            format!("({s})")
        } else {
            s
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_at(0))
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

fn fragment_steps(f: &mut fmt::Formatter<'_>, absolute: bool, steps: &[Step]) -> fmt::Result {
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

impl fmt::Display for XPathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XPathExpr::AbsolutePath(steps) => fragment_steps(f, true, steps),
            XPathExpr::RelativePath(steps) => fragment_steps(f, false, steps),
            XPathExpr::Union(l, r) => write!(
                f,
                "{} | {}",
                l.to_string_at(PREC_UNION),
                r.to_string_at(PREC_UNION + 1)
            ),
            XPathExpr::Filter { base, predicates } => {
                f.write_str(&base.to_string_at(PREC_PRIMARY))?;
                for p in predicates {
                    write!(f, "[{p}]")?;
                }
                Ok(())
            }
            XPathExpr::PathFrom { base, steps } => {
                write!(f, "{}/", base.to_string_at(PREC_PRIMARY))?;
                fragment_steps(f, false, steps)
            }
            XPathExpr::FunctionCall { name, args } => {
                let e = Expr::new(
                    ExprKind::Call {
                        name: name.clone(),
                        args: args.clone(),
                    },
                    0..0,
                );
                write!(f, "{e}")
            }
            XPathExpr::Opaque(o) => f.write_str(&o.expanded),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steps_of(x: &XPathExpr) -> &[Step] {
        match x {
            XPathExpr::RelativePath(s) | XPathExpr::AbsolutePath(s) => s,
            other => panic!("not a path: {other:?}"),
        }
    }

    #[test]
    fn child_steps() {
        let x = parse_xpath("p/ol").unwrap();
        assert_eq!(x.to_string(), "child::p/child::ol");
        let s = steps_of(&x);
        assert_eq!(s.len(), 2);
        assert_eq!(
            (s[0].axis, &s[0].test),
            (Axis::Child, &NodeTest::Name("p".into()))
        );
    }

    #[test]
    fn double_slash_expands() {
        let x = parse_xpath("p//ol").unwrap();
        let s = steps_of(&x);
        assert_eq!(s.len(), 3);
        assert_eq!((s[1].axis, &s[1].test), (Axis::DescendantOrSelf, &NodeTest::Node));
        assert_eq!(x.to_string(), "child::p/descendant-or-self::node()/child::ol");
    }

    #[test]
    fn abbreviations() {
        for (src, want) in [
            (".", "self::node()"),
            ("..", "parent::node()"),
            ("@id", "attribute::id"),
            ("@*", "attribute::*"),
            ("/", "/"),
            ("//a", "/descendant-or-self::node()/child::a"),
            ("text()", "child::text()"),
            (
                "processing-instruction('x')",
                "child::processing-instruction(\"x\")",
            ),
            ("a | /b", "child::a | /child::b"),
            ("id('x')/a", "id(\"x\")/child::a"),
            ("(a | b)[c]", "(child::a | child::b)[child::c]"),
            ("(a)[1]", "(child::a)[1]"),
        ] {
            assert_eq!(parse_xpath(src).unwrap().to_string(), want, "{src}");
        }
    }

    #[test]
    fn opaque_predicate_keeps_source() {
        let x = parse_xpath("e[not(f)]").unwrap();
        let s = steps_of(&x);
        match &s[0].predicates[..] {
            [Predicate::Opaque(o)] => {
                assert_eq!(o.raw, "not(f)");
                assert_eq!(o.expanded, "not(child::f)");
                assert_eq!(o.span, 2..8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn logical_predicates() {
        let x = parse_xpath("a[b and (c or d = 1)]").unwrap();
        match &steps_of(&x)[0].predicates[0] {
            Predicate::And(l, r) => {
                assert!(matches!(**l, Predicate::Expr(_)));
                match &**r {
                    Predicate::Or(c, d) => {
                        assert!(matches!(**c, Predicate::Expr(_)));
                        assert!(matches!(**d, Predicate::Opaque(_)));
                    }
                    other => panic!("{other:?}"),
                }
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(x.to_string(), "child::a[child::b and (child::c or child::d = 1)]");
    }

    #[test]
    fn top_level_non_node_sets_are_opaque() {
        for src in ["1 + 2", "count(a)", "$v", "'s'", "a = b", "-a", "not(a)"] {
            assert!(matches!(parse_xpath(src).unwrap(), XPathExpr::Opaque(_)), "{src}");
        }
    }

    #[test]
    fn operator_names_by_position() {
        let e = parse_expr("and and or * or").unwrap();
        assert_eq!(e.to_string(), "child::and and child::or * child::or");
        let e = parse_expr("div div div").unwrap();
        assert_eq!(e.to_string(), "child::div div child::div");
        assert_eq!(parse_expr("*/*").unwrap().to_string(), "child::*/child::*");
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_xpath("namespace::x").unwrap_err(),
            XPathError::NamespaceAxis { position: 0 }
        );
        for bad in ["", "a[", "a/", "child::", "sideways::a", "a b", "f(a,", "()", "@"] {
            assert!(parse_xpath(bad).is_err(), "{bad}");
        }
        match parse_xpath("a/[b]").unwrap_err() {
            XPathError::Syntax { position, .. } => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
    }
}
