//! Reference evaluation of XPath 1.0 over type-only documents.
//!
//! Nodes carry no string values, so comparisons that need them are
//! rejected rather than guessed. `id()` selects every element that carries
//! an ID-typed attribute, since some attribute value makes each of them a
//! match.

use thiserror::Error;

use crate::axes::Axis;
use crate::dtd::Dtd;
use crate::relalg::{NodeKind, NodeType};
use crate::xpath::ast::{BinOp, Expr, ExprKind, NodeTest, Step};

use super::document::Document;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("not supported by the reference evaluator: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    /// Node indices in document order, without duplicates.
    Nodes(Vec<usize>),
    Bool(bool),
    Number(f64),
    Str(String),
}

impl Value {
    fn boolean(&self) -> bool {
        match self {
            Value::Nodes(n) => !n.is_empty(),
            Value::Bool(b) => *b,
            Value::Number(n) => *n != 0.0 && !n.is_nan(),
            Value::Str(s) => !s.is_empty(),
        }
    }

    fn number(&self) -> Result<f64, EvalError> {
        match self {
            Value::Nodes(_) => Err(unsupported("conversion of a node-set to a number")),
            Value::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
            Value::Number(n) => Ok(*n),
            Value::Str(s) => Ok(s.trim().parse().unwrap_or(f64::NAN)),
        }
    }

    fn string(&self) -> Result<String, EvalError> {
        match self {
            Value::Nodes(_) => Err(unsupported("string value of a node-set")),
            Value::Bool(b) => Ok(b.to_string()),
            Value::Number(n) => Ok(if n.fract() == 0.0 && n.is_finite() {
                format!("{}", *n as i64)
            } else {
                n.to_string()
            }),
            Value::Str(s) => Ok(s.clone()),
        }
    }
}

fn unsupported(what: &str) -> EvalError {
    EvalError::Unsupported(what.to_string())
}

#[derive(Clone, Copy)]
struct Ctx {
    node: usize,
    pos: usize,
    size: usize,
}

/// Nodes on `axis` from `n`, nearest first for reverse axes.
pub fn axis_nodes(doc: &Document, axis: Axis, n: usize) -> Vec<usize> {
    let node = &doc.nodes[n];
    let not_attr = |&i: &usize| !doc.is_attribute(i);
    let ancestors = || {
        let mut out = Vec::new();
        let mut cur = node.parent;
        while let Some(p) = cur {
            out.push(p);
            cur = doc.nodes[p].parent;
        }
        out
    };
    let siblings = || match node.parent {
        Some(p) if !doc.is_attribute(n) => doc.nodes[p].children.clone(),
        _ => Vec::new(),
    };
    match axis {
        Axis::Child => node.children.clone(),
        Axis::Descendant => (n + 1..=node.end).filter(not_attr).collect(),
        Axis::Parent => node.parent.into_iter().collect(),
        Axis::Ancestor => ancestors(),
        Axis::FollowingSibling => siblings().into_iter().filter(|&s| s > n).collect(),
        Axis::PrecedingSibling => siblings().into_iter().filter(|&s| s < n).rev().collect(),
        Axis::Following => (node.end + 1..doc.len()).filter(not_attr).collect(),
        Axis::Preceding => {
            let anc = ancestors();
            (0..n)
                .rev()
                .filter(not_attr)
                .filter(|i| !anc.contains(i))
                .collect()
        }
        Axis::Attribute => node.attributes.clone(),
        Axis::SelfAxis => vec![n],
        Axis::DescendantOrSelf => std::iter::once(n)
            .chain((n + 1..=node.end).filter(not_attr))
            .collect(),
        Axis::AncestorOrSelf => std::iter::once(n).chain(ancestors()).collect(),
    }
}

pub fn matches_test(ty: &NodeType, test: &NodeTest, axis: Axis) -> bool {
    let principal = if axis == Axis::Attribute {
        NodeKind::Attribute
    } else {
        NodeKind::Element
    };
    match test {
        NodeTest::Node => true,
        NodeTest::Text => *ty == NodeType::Text,
        NodeTest::Comment => *ty == NodeType::Comment,
        NodeTest::ProcessingInstruction(_) => *ty == NodeType::ProcessingInstruction,
        NodeTest::Wildcard => ty.kind() == principal,
        NodeTest::Name(n) => ty.kind() == principal && ty.name() == Some(n.as_str()),
    }
}

pub struct Evaluator<'a> {
    doc: &'a Document,
    id_elements: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(doc: &'a Document, dtd: &Dtd) -> Self {
        let id_elements = (0..doc.len())
            .filter(|&i| {
                let Some(name) = doc.ty(i).name().filter(|_| doc.ty(i).is_element()) else {
                    return false;
                };
                doc.nodes[i].attributes.iter().any(|&a| {
                    let attr = doc.ty(a).name().unwrap_or_default();
                    dtd.attributes_of(name).any(|d| d.attribute == attr && d.is_id())
                })
            })
            .collect();
        Evaluator { doc, id_elements }
    }

    /// The node-set `expr` selects from `context`.
    pub fn select(&self, expr: &Expr, context: usize) -> Result<Vec<usize>, EvalError> {
        match self.eval(
            expr,
            Ctx {
                node: context,
                pos: 1,
                size: 1,
            },
        )? {
            Value::Nodes(n) => Ok(n),
            _ => Err(unsupported("expression does not evaluate to a node-set")),
        }
    }

    pub fn value(&self, expr: &Expr, context: usize) -> Result<Value, EvalError> {
        self.eval(
            expr,
            Ctx {
                node: context,
                pos: 1,
                size: 1,
            },
        )
    }

    fn nodes(&self, expr: &Expr, ctx: Ctx) -> Result<Vec<usize>, EvalError> {
        match self.eval(expr, ctx)? {
            Value::Nodes(n) => Ok(n),
            _ => Err(unsupported(&format!("`{expr}` is not a node-set"))),
        }
    }

    fn eval(&self, expr: &Expr, ctx: Ctx) -> Result<Value, EvalError> {
        match &expr.kind {
            ExprKind::Binary(BinOp::Or, l, r) => Ok(Value::Bool(
                self.eval(l, ctx)?.boolean() || self.eval(r, ctx)?.boolean(),
            )),
            ExprKind::Binary(BinOp::And, l, r) => Ok(Value::Bool(
                self.eval(l, ctx)?.boolean() && self.eval(r, ctx)?.boolean(),
            )),
            ExprKind::Binary(op, l, r) => {
                let l = self.eval(l, ctx)?;
                let r = self.eval(r, ctx)?;
                match op {
                    BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        compare(*op, &l, &r).map(Value::Bool)
                    }
                    _ => {
                        let (a, b) = (l.number()?, r.number()?);
                        Ok(Value::Number(match op {
                            BinOp::Add => a + b,
                            BinOp::Sub => a - b,
                            BinOp::Mul => a * b,
                            BinOp::Div => a / b,
                            _ => a % b,
                        }))
                    }
                }
            }
            ExprKind::Neg(e) => Ok(Value::Number(-self.eval(e, ctx)?.number()?)),
            ExprKind::Union(l, r) => {
                let mut n = self.nodes(l, ctx)?;
                n.extend(self.nodes(r, ctx)?);
                n.sort_unstable();
                n.dedup();
                Ok(Value::Nodes(n))
            }
            ExprKind::Path { absolute, steps } => {
                let start = if *absolute { Document::ROOT } else { ctx.node };
                self.steps(vec![start], steps).map(Value::Nodes)
            }
            ExprKind::Filter { primary, predicates } => {
                let mut n = self.nodes(primary, ctx)?;
                for p in predicates {
                    n = self.apply_predicate(&n, p)?;
                }
                Ok(Value::Nodes(n))
            }
            ExprKind::PathFrom { base, steps } => {
                let n = self.nodes(base, ctx)?;
                self.steps(n, steps).map(Value::Nodes)
            }
            ExprKind::Literal(s) => Ok(Value::Str(s.clone())),
            ExprKind::Number(n) => Ok(Value::Number(*n)),
            ExprKind::Variable(v) => Err(unsupported(&format!("variable `${v}`"))),
            ExprKind::Call { name, args } => self.call(name, args, ctx),
        }
    }

    fn call(&self, name: &str, args: &[Expr], ctx: Ctx) -> Result<Value, EvalError> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(unsupported(&format!("`{name}` with {} arguments", args.len())))
            }
        };
        match name {
            "position" => arity(0).map(|_| Value::Number(ctx.pos as f64)),
            "last" => arity(0).map(|_| Value::Number(ctx.size as f64)),
            "true" => arity(0).map(|_| Value::Bool(true)),
            "false" => arity(0).map(|_| Value::Bool(false)),
            "count" => {
                arity(1)?;
                Ok(Value::Number(self.nodes(&args[0], ctx)?.len() as f64))
            }
            "not" => {
                arity(1)?;
                Ok(Value::Bool(!self.eval(&args[0], ctx)?.boolean()))
            }
            "boolean" => {
                arity(1)?;
                Ok(Value::Bool(self.eval(&args[0], ctx)?.boolean()))
            }
            "number" => {
                arity(1)?;
                Ok(Value::Number(self.eval(&args[0], ctx)?.number()?))
            }
            "name" | "local-name" => {
                let node = match args {
                    [] => Some(ctx.node),
                    [a] => self.nodes(a, ctx)?.first().copied(),
                    _ => return Err(unsupported(&format!("`{name}` with {} arguments", args.len()))),
                };
                let n = node.and_then(|n| self.doc.ty(n).name()).unwrap_or_default();
                let n = if name == "local-name" {
                    n.rsplit(':').next().unwrap_or(n)
                } else {
                    n
                };
                Ok(Value::Str(n.to_string()))
            }
            "id" => {
                arity(1)?;
                Ok(Value::Nodes(self.id_elements.clone()))
            }
            other => Err(unsupported(&format!("function `{other}()`"))),
        }
    }

    fn steps(&self, mut current: Vec<usize>, steps: &[Step]) -> Result<Vec<usize>, EvalError> {
        for step in steps {
            let mut next = Vec::new();
            for &n in &current {
                let mut selected: Vec<usize> = axis_nodes(self.doc, step.axis, n)
                    .into_iter()
                    .filter(|&m| matches_test(self.doc.ty(m), &step.test, step.axis))
                    .collect();
                for p in &step.predicates {
                    selected = self.apply_predicate(&selected, p)?;
                }
                next.extend(selected);
            }
            next.sort_unstable();
            next.dedup();
            current = next;
        }
        Ok(current)
    }

    /// Keeps the nodes of `list` (in the order positions count) at which
    /// `pred` holds.
    fn apply_predicate(&self, list: &[usize], pred: &Expr) -> Result<Vec<usize>, EvalError> {
        let size = list.len();
        let mut out = Vec::new();
        for (i, &n) in list.iter().enumerate() {
            let ctx = Ctx {
                node: n,
                pos: i + 1,
                size,
            };
            let keep = match self.eval(pred, ctx)? {
                Value::Number(k) => k == (i + 1) as f64,
                v => v.boolean(),
            };
            if keep {
                out.push(n);
            }
        }
        Ok(out)
    }
}

fn compare(op: BinOp, l: &Value, r: &Value) -> Result<bool, EvalError> {
    let (l, r) = match (l, r) {
        (Value::Nodes(n), Value::Bool(b)) => (Value::Bool(!n.is_empty()), Value::Bool(*b)),
        (Value::Bool(b), Value::Nodes(n)) => (Value::Bool(*b), Value::Bool(!n.is_empty())),
        (Value::Nodes(_), _) | (_, Value::Nodes(_)) => {
            return Err(unsupported("comparison involving node string values"))
        }
        _ => (l.clone(), r.clone()),
    };
    Ok(match op {
        BinOp::Eq | BinOp::Neq => {
            let eq = match (&l, &r) {
                (Value::Bool(_), _) | (_, Value::Bool(_)) => l.boolean() == r.boolean(),
                (Value::Number(_), _) | (_, Value::Number(_)) => l.number()? == r.number()?,
                _ => l.string()? == r.string()?,
            };
            eq == (op == BinOp::Eq)
        }
        BinOp::Lt => l.number()? < r.number()?,
        BinOp::Le => l.number()? <= r.number()?,
        BinOp::Gt => l.number()? > r.number()?,
        _ => l.number()? >= r.number()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::document::DocNode;
    use crate::xpath::parse_expr;

    fn doc() -> (Document, Dtd) {
        let dtd = Dtd::parse(
            "<!ELEMENT a (b, c)*> <!ELEMENT b EMPTY> <!ELEMENT c (#PCDATA)>
             <!ATTLIST b id ID #IMPLIED>",
        )
        .unwrap();
        // #root(a(b[@id], c(#text), b, c))
        let tree = DocNode::root(vec![DocNode::element(
            "a",
            vec![],
            vec![
                DocNode::element("b", vec!["id".into()], vec![]),
                DocNode::element("c", vec![], vec![DocNode::leaf(NodeType::Text)]),
                DocNode::element("b", vec![], vec![]),
                DocNode::element("c", vec![], vec![]),
            ],
        )]);
        (Document::new(tree), dtd)
    }

    fn sel(x: &str, ctx: usize) -> Vec<usize> {
        let (d, dtd) = doc();
        Evaluator::new(&d, &dtd)
            .select(&parse_expr(x).unwrap(), ctx)
            .unwrap()
    }

    // indices: 0 root, 1 a, 2 b, 3 @id, 4 c, 5 text, 6 b, 7 c

    #[test]
    fn basic_axes() {
        assert_eq!(sel("self::node()", 4), [4]);
        assert_eq!(sel("child::b", 1), [2, 6]);
        assert_eq!(sel("following-sibling::c", 2), [4, 7]);
        assert_eq!(sel("following::node()", 3), [4, 5, 6, 7]);
        assert_eq!(sel("preceding::node()", 6), [2, 4, 5]);
        assert_eq!(sel("ancestor::*", 5), [1, 4]);
        assert_eq!(sel("..", 3), [2]);
        assert_eq!(sel("//text()", 7), [5]);
        assert_eq!(sel("/", 5), [0]);
    }

    #[test]
    fn positions_follow_axis_direction() {
        assert_eq!(sel("preceding-sibling::*[1]", 7), [6]);
        assert_eq!(sel("ancestor-or-self::node()[last()]", 5), [0]);
        assert_eq!(sel("(preceding-sibling::*)[1]", 7), [2]);
        assert_eq!(sel("b[position() = 2]", 1), [6]);
        assert_eq!(sel("*[not(node())]", 1), [2, 6, 7]);
        assert_eq!(sel("*[count(node()) > 0 or @id]", 1), [2, 4]);
    }

    #[test]
    fn id_and_unions() {
        assert_eq!(sel("id('x')", 0), [2]);
        assert_eq!(sel("c | b", 1), [2, 4, 6, 7]);
        assert_eq!(sel("id('x')/following-sibling::*[2]", 0), [6]);
    }

    #[test]
    fn unsupported_is_explicit() {
        let (d, dtd) = doc();
        let ev = Evaluator::new(&d, &dtd);
        for x in ["b = 'x'", "$v", "concat('a', 'b')", "1 + 2"] {
            let r = ev.select(&parse_expr(x).unwrap(), 1);
            assert!(matches!(r, Err(EvalError::Unsupported(_))), "{x}");
        }
        assert_eq!(
            ev.value(&parse_expr("1 + 2 * 3").unwrap(), 1),
            Ok(Value::Number(7.0))
        );
        assert_eq!(
            ev.value(&parse_expr("'1' = 1").unwrap(), 1),
            Ok(Value::Bool(true))
        );
    }
}
