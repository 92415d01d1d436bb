//! Abstract interpretation of XPath expressions as node-type relations.
//!
//! The relation computed for an expression contains the pair of types of
//! every (context node, selected node) pair in every valid document. It may
//! contain more.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::axes::{Axis, AxisError, AxisOptions, AxisSet};
use crate::dtd::Dtd;
use crate::relalg::{NodeType, Relation, RelationError, TypeSet, TypeUniverse, UniverseExt};
use crate::xpath::ast::NodeTest;
use crate::xpath::{Predicate, Step, XPathExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractResult {
    Defined(Relation),
    /// The expression lies outside the interpreted fragment.
    Undefined(String),
}

impl AbstractResult {
    pub fn relation(&self) -> Option<&Relation> {
        match self {
            AbstractResult::Defined(r) => Some(r),
            AbstractResult::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, AbstractResult::Defined(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    /// No valid document has a node selected from the given contexts.
    EmptyBound,
    /// Some node type may be selected; not a proof of satisfiability.
    NonEmptyBound,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::EmptyBound => "empty",
            Verdict::NonEmptyBound => "nonempty",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Classifies a result with respect to the context types.
pub fn satisfiable(result: &AbstractResult, context: &TypeSet) -> Result<Verdict, RelationError> {
    match result {
        AbstractResult::Undefined(_) => Ok(Verdict::Unknown),
        AbstractResult::Defined(r) => {
            if context.universe() != r.universe() && **context.universe() != **r.universe() {
                return Err(RelationError::UniverseMismatch);
            }
            Ok(if r.image(context).is_empty() {
                Verdict::EmptyBound
            } else {
                Verdict::NonEmptyBound
            })
        }
    }
}

/// The relation a node test denotes on a given axis.
pub fn test_relation(
    test: &NodeTest,
    axis: Axis,
    universe: &Arc<TypeUniverse>,
    warnings: &mut Vec<String>,
) -> Relation {
    let single = |i: usize| {
        let mut s = universe.empty_set();
        s.insert_index(i);
        Relation::identity_over(&s)
    };
    match test {
        NodeTest::Node => Relation::identity(universe),
        NodeTest::Text => single(TypeUniverse::TEXT),
        NodeTest::Comment => single(TypeUniverse::COMMENT),
        NodeTest::ProcessingInstruction(_) => single(TypeUniverse::PI),
        NodeTest::Wildcard if axis == Axis::Attribute => Relation::identity_over(&universe.attributes()),
        NodeTest::Wildcard => Relation::identity_over(&universe.elements()),
        NodeTest::Name(n) => {
            let t = if axis == Axis::Attribute {
                NodeType::attribute(n.as_str())
            } else {
                NodeType::element(n.as_str())
            };
            match universe.index_of(&t) {
                Some(i) => single(i),
                None => {
                    let kind = if axis == Axis::Attribute {
                        "attribute"
                    } else {
                        "element"
                    };
                    let w = format!("name test `{n}` matches no {kind} declared in the DTD");
                    if !warnings.contains(&w) {
                        warnings.push(w);
                    }
                    Relation::empty(universe)
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Interpretation {
    pub result: AbstractResult,
    pub warnings: Vec<String>,
}

/// Interprets `expr` over prebuilt axes.
pub fn interpret(expr: &XPathExpr, axes: &AxisSet, dtd: &Dtd) -> Interpretation {
    let mut cx = Context {
        axes,
        id_elements: id_element_types(dtd, &axes.universe),
        warnings: Vec::new(),
    };
    let result = match cx.expr(expr) {
        Ok(r) => AbstractResult::Defined(r),
        Err(reason) => AbstractResult::Undefined(reason),
    };
    Interpretation {
        result,
        warnings: cx.warnings,
    }
}

fn id_element_types(dtd: &Dtd, universe: &Arc<TypeUniverse>) -> TypeSet {
    let mut s = universe.empty_set();
    for e in dtd.id_elements() {
        if let Some(i) = universe.index_of(&NodeType::element(e)) {
            s.insert_index(i);
        }
    }
    s
}

struct Context<'a> {
    axes: &'a AxisSet,
    id_elements: TypeSet,
    warnings: Vec<String>,
}

impl Context<'_> {
    fn universe(&self) -> &Arc<TypeUniverse> {
        &self.axes.universe
    }

    fn expr(&mut self, expr: &XPathExpr) -> Result<Relation, String> {
        match expr {
            XPathExpr::AbsolutePath(steps) => {
                let all = self.universe().all();
                let mut root = self.universe().empty_set();
                root.insert_index(TypeUniverse::ROOT);
                self.steps(Relation::product(&all, &root), steps)
            }
            XPathExpr::RelativePath(steps) => self.steps(Relation::identity(self.universe()), steps),
            XPathExpr::Union(l, r) => {
                let l = self.expr(l)?;
                Ok(l.union(&self.expr(r)?))
            }
            XPathExpr::Filter { base, predicates } => {
                let e = self.expr(base)?;
                Ok(self.filter(e, predicates))
            }
            XPathExpr::PathFrom { base, steps } => {
                let e = self.expr(base)?;
                self.steps(e, steps)
            }
            XPathExpr::FunctionCall { name, .. } if name == "id" => {
                Ok(Relation::product(&self.universe().all(), &self.id_elements))
            }
            XPathExpr::FunctionCall { name, .. } => Err(format!("function `{name}` is not analyzed")),
            XPathExpr::Opaque(o) => Err(format!(
                "`{}` at offset {} is not a node-set expression the analysis covers",
                o.raw, o.span.start
            )),
        }
    }

    fn steps(&mut self, mut e: Relation, steps: &[Step]) -> Result<Relation, String> {
        for step in steps {
            e = self.step(&e, step);
        }
        Ok(e)
    }

    fn step(&mut self, e: &Relation, step: &Step) -> Relation {
        let t = test_relation(&step.test, step.axis, &self.axes.universe, &mut self.warnings);
        let e = e.compose(self.axes.get(step.axis)).compose(&t);
        self.filter(e, &step.predicates)
    }

    fn filter(&mut self, mut e: Relation, predicates: &[Predicate]) -> Relation {
        for p in predicates {
            if let Some(d) = self.predicate_domain(p) {
                e = e.compose(&Relation::identity_over(&d));
            }
        }
        e
    }

    /// Types at which the predicate can hold; `None` if it is not interpretable.
    fn predicate_domain(&mut self, p: &Predicate) -> Option<TypeSet> {
        match p {
            Predicate::Expr(x) => self.expr(x).ok().map(|f| f.domain()),
            Predicate::And(l, r) => {
                let l = self.predicate_domain(l);
                let r = self.predicate_domain(r);
                Some(l?.intersect(&r?))
            }
            Predicate::Or(l, r) => {
                let l = self.predicate_domain(l);
                let r = self.predicate_domain(r);
                Some(l?.union(&r?))
            }
            Predicate::Opaque(_) => None,
        }
    }

    fn image_after_step(
        &mut self,
        s: &TypeSet,
        step: &Step,
        report: &mut Vec<String>,
        path: &str,
    ) -> TypeSet {
        let t = test_relation(&step.test, step.axis, &self.axes.universe, &mut self.warnings);
        let mut s = self.axes.get(step.axis).compose(&t).image(s);
        for p in &step.predicates {
            if let Some(d) = self.predicate_domain(p) {
                let kept = s.intersect(&d);
                if !s.is_empty() && kept.is_empty() {
                    report.push(format!("{path}: predicate [{p}] of step `{step}` never holds"));
                }
                s = kept;
            }
        }
        s
    }

    fn prune(&mut self, expr: &XPathExpr, context: &TypeSet, report: &mut Vec<String>) -> Option<TypeSet> {
        match expr {
            XPathExpr::AbsolutePath(steps) | XPathExpr::RelativePath(steps) => {
                let mut s = if matches!(expr, XPathExpr::AbsolutePath(_)) {
                    let mut root = self.universe().empty_set();
                    root.insert_index(TypeUniverse::ROOT);
                    root
                } else {
                    context.clone()
                };
                let path = expr.to_string();
                self.prune_steps(&mut s, steps, report, &path);
                Some(s)
            }
            XPathExpr::PathFrom { base, steps } => {
                let mut s = self.prune(base, context, report)?;
                let path = expr.to_string();
                self.prune_steps(&mut s, steps, report, &path);
                Some(s)
            }
            XPathExpr::Union(l, r) => {
                let l = self.prune(l, context, report);
                let r = self.prune(r, context, report);
                Some(l?.union(&r?))
            }
            XPathExpr::Filter { base, predicates } => {
                let mut s = self.prune(base, context, report)?;
                for p in predicates {
                    if let Some(d) = self.predicate_domain(p) {
                        s = s.intersect(&d);
                    }
                }
                Some(s)
            }
            XPathExpr::FunctionCall { .. } => self.expr(expr).ok().map(|r| r.image(context)),
            XPathExpr::Opaque(_) => None,
        }
    }

    fn prune_steps(&mut self, s: &mut TypeSet, steps: &[Step], report: &mut Vec<String>, path: &str) {
        for (i, step) in steps.iter().enumerate() {
            if s.is_empty() {
                return;
            }
            *s = self.image_after_step(s, step, report, path);
            if s.is_empty() {
                report.push(format!(
                    "{path}: nothing is reachable after step {} `{step}`; the traversal below can be pruned",
                    i + 1
                ));
            }
        }
    }
}

/// A DTD with its axis relations, ready to interpret expressions.
#[derive(Clone, Debug)]
pub struct Analyzer {
    pub dtd: Dtd,
    pub axes: AxisSet,
}

impl Analyzer {
    pub fn new(dtd: Dtd, options: &AxisOptions) -> Result<Analyzer, AxisError> {
        let axes = AxisSet::build(&dtd, options)?;
        Ok(Analyzer { dtd, axes })
    }

    pub fn universe(&self) -> &Arc<TypeUniverse> {
        &self.axes.universe
    }

    pub fn interpret(&self, expr: &XPathExpr) -> Interpretation {
        interpret(expr, &self.axes, &self.dtd)
    }

    /// Steps and predicates that select nothing from `context`.
    pub fn prune_report(&self, expr: &XPathExpr, context: &TypeSet) -> Vec<String> {
        let mut cx = Context {
            axes: &self.axes,
            id_elements: id_element_types(&self.dtd, &self.axes.universe),
            warnings: Vec::new(),
        };
        let mut report = Vec::new();
        cx.prune(expr, context, &mut report);
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xpath::parse_xpath;

    fn analyzer(dtd: &str) -> Analyzer {
        let dtd = Dtd::parse(dtd).unwrap().with_root_constraint(["r"]).unwrap();
        Analyzer::new(dtd, &AxisOptions::default()).unwrap()
    }

    fn rel(a: &Analyzer, x: &str) -> Relation {
        match a.interpret(&parse_xpath(x).unwrap()).result {
            AbstractResult::Defined(r) => r,
            AbstractResult::Undefined(why) => panic!("{x}: {why}"),
        }
    }

    const SMALL: &str = "<!ELEMENT r (a, b*)> <!ELEMENT a (#PCDATA | b)*> <!ELEMENT b EMPTY>
                         <!ATTLIST a id ID #IMPLIED> <!ATTLIST b x CDATA #IMPLIED>";

    #[test]
    fn self_node_is_identity() {
        let a = analyzer(SMALL);
        assert_eq!(rel(&a, "self::node()"), Relation::identity(a.universe()));
    }

    #[test]
    fn node_tests() {
        let a = analyzer(SMALL);
        let u = a.universe();
        let mut w = Vec::new();
        assert_eq!(
            test_relation(&NodeTest::Node, Axis::Child, u, &mut w),
            Relation::identity(u)
        );
        assert_eq!(
            test_relation(&NodeTest::Name("x".into()), Axis::Attribute, u, &mut w).to_string(),
            "{(@x,@x)}"
        );
        assert!(w.is_empty());
        assert!(test_relation(&NodeTest::Name("zzz".into()), Axis::Child, u, &mut w).is_empty());
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn unknown_name_warns_once() {
        let a = analyzer(SMALL);
        let i = a.interpret(&parse_xpath("zzz | zzz/zzz").unwrap());
        assert_eq!(i.warnings.len(), 1);
        assert!(i.result.relation().unwrap().is_empty());
    }

    #[test]
    fn child_path() {
        let a = analyzer(SMALL);
        assert_eq!(rel(&a, "a/b").to_string(), "{(r,b)}");
        let abs = rel(&a, "/r/a");
        assert_eq!(abs.len(), a.universe().len());
        assert_eq!(abs.range().to_string(), "{a}");
    }

    #[test]
    fn union_and_undefined() {
        let a = analyzer(SMALL);
        assert_eq!(rel(&a, "a | b"), rel(&a, "a").union(&rel(&a, "b")));
        let i = a.interpret(&parse_xpath("a | $v").unwrap());
        assert!(matches!(i.result, AbstractResult::Undefined(ref s) if s.contains("$v")));
    }

    #[test]
    fn filters() {
        let a = analyzer(SMALL);
        assert_eq!(rel(&a, "*[b]").to_string(), "{(#root,r),(r,a)}");
        assert_eq!(rel(&a, "*[not(b)]"), rel(&a, "*"));
        assert_eq!(rel(&a, "*[b and @id]"), rel(&a, "*[b][@id]"));
        assert_eq!(rel(&a, "*[b or text()]").to_string(), "{(#root,r),(r,a)}");
        assert_eq!(rel(&a, "*[text()]").to_string(), "{(r,a)}");
        assert_eq!(rel(&a, "*[b and 1]"), rel(&a, "*"));
        assert_eq!(rel(&a, "(a | b)[@x]"), rel(&a, "b"));
    }

    #[test]
    fn id_function() {
        let a = analyzer(SMALL);
        let r = rel(&a, "id('k')");
        assert_eq!(r.range().to_string(), "{a}");
        assert_eq!(r.domain(), a.universe().all());
        assert_eq!(rel(&a, "id('k')/b").range().to_string(), "{b}");
    }

    #[test]
    fn verdicts() {
        let a = analyzer(SMALL);
        let u = a.universe();
        let root = u.singleton(&NodeType::Root).unwrap();
        let r = a.interpret(&parse_xpath("b/a").unwrap()).result;
        assert_eq!(satisfiable(&r, &u.all()).unwrap(), Verdict::EmptyBound);
        let r = a.interpret(&parse_xpath("//b").unwrap()).result;
        assert_eq!(satisfiable(&r, &root).unwrap(), Verdict::NonEmptyBound);
        let r = a.interpret(&parse_xpath("count(b)").unwrap()).result;
        assert_eq!(satisfiable(&r, &root).unwrap(), Verdict::Unknown);
    }

    #[test]
    fn prune_report_names_empty_step() {
        let a = analyzer(SMALL);
        let u = a.universe();
        let report = a.prune_report(&parse_xpath("/r/b/a").unwrap(), &u.all());
        assert_eq!(report.len(), 1);
        assert!(report[0].contains("step 3"), "{report:?}");
        let report = a.prune_report(&parse_xpath("/r/b[text()]").unwrap(), &u.all());
        assert!(report[0].contains("never holds"), "{report:?}");
        assert!(a.prune_report(&parse_xpath("//b").unwrap(), &u.all()).is_empty());
    }
}
