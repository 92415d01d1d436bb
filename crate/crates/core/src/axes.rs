//! Axis relations over node types.
//!
//! Child, attribute and following-sibling are built from the DTD; the other
//! nine axes are derived from those three by relation algebra.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::dtd::{ContentModel, Dtd, ElementContent, ElementDecl};
use crate::relalg::{Relation, TypeSet, TypeUniverse, UniverseExt};

pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Child,
    Descendant,
    Parent,
    Ancestor,
    FollowingSibling,
    PrecedingSibling,
    Following,
    Preceding,
    Attribute,
    SelfAxis,
    DescendantOrSelf,
    AncestorOrSelf,
}

impl Axis {
    pub const ALL: [Axis; 12] = [
        Axis::Child,
        Axis::Descendant,
        Axis::Parent,
        Axis::Ancestor,
        Axis::FollowingSibling,
        Axis::PrecedingSibling,
        Axis::Following,
        Axis::Preceding,
        Axis::Attribute,
        Axis::SelfAxis,
        Axis::DescendantOrSelf,
        Axis::AncestorOrSelf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Child => "child",
            Axis::Descendant => "descendant",
            Axis::Parent => "parent",
            Axis::Ancestor => "ancestor",
            Axis::FollowingSibling => "following-sibling",
            Axis::PrecedingSibling => "preceding-sibling",
            Axis::Following => "following",
            Axis::Preceding => "preceding",
            Axis::Attribute => "attribute",
            Axis::SelfAxis => "self",
            Axis::DescendantOrSelf => "descendant-or-self",
            Axis::AncestorOrSelf => "ancestor-or-self",
        }
    }

    /// Reverse axes count positions backwards from the context node.
    pub fn is_reverse(self) -> bool {
        matches!(
            self,
            Axis::Parent | Axis::Ancestor | Axis::AncestorOrSelf | Axis::Preceding | Axis::PrecedingSibling
        )
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axis `{s}`"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AxisError {
    #[error("content model of `{element}` needs more than {limit} rule applications")]
    BudgetExceeded { element: String, limit: usize },
    #[error("content model refers to `{0}`, which is not an element type of the universe")]
    UnknownElement(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisOptions {
    /// Lets comments and processing instructions sit next to text nodes in
    /// the following-sibling relation. Off by default: the sibling sets `E_e`
    /// then contain element types only, so `(τ, γ)` style pairs are absent.
    pub text_comment_siblings: bool,
    /// Adds `@⁻¹∘c∘D` to the following axis so that an attribute is followed
    /// by the content of its owner element, as in XPath document order.
    pub attribute_following: bool,
    /// Limit on next-proper-sibling rule applications per content model.
    pub budget: usize,
}

impl Default for AxisOptions {
    fn default() -> Self {
        AxisOptions {
            text_comment_siblings: false,
            attribute_following: true,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Upper-bound relations for the twelve supported axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisSet {
    pub universe: Arc<TypeUniverse>,
    pub child: Relation,
    pub attribute: Relation,
    pub following_sibling: Relation,
    pub parent: Relation,
    pub self_: Relation,
    pub preceding_sibling: Relation,
    pub descendant: Relation,
    pub ancestor: Relation,
    pub descendant_or_self: Relation,
    pub ancestor_or_self: Relation,
    pub following: Relation,
    pub preceding: Relation,
}

impl AxisSet {
    pub fn build(dtd: &Dtd, options: &AxisOptions) -> Result<AxisSet, AxisError> {
        let universe = dtd.universe();
        let c = build_child(dtd, &universe);
        let at = build_attribute(dtd, &universe);
        let f = build_following_sibling(dtd, &universe, options)?;
        Ok(Self::derive_with(c, at, f, options.attribute_following))
    }

    /// The derived axes by their plain definitions, without the attribute
    /// term in `following`.
    pub fn derive(c: Relation, at: Relation, f: Relation) -> AxisSet {
        Self::derive_with(c, at, f, false)
    }

    pub fn derive_with(c: Relation, at: Relation, f: Relation, attribute_following: bool) -> AxisSet {
        let universe = c.universe().clone();
        let p = c.union(&at).inverse();
        let r = f.inverse();
        let d = c.transitive_closure();
        let a = p.transitive_closure();
        let dd = c.reflexive_transitive_closure();
        let aa = p.reflexive_transitive_closure();
        let mut following = aa.compose(&f).compose(&dd);
        if attribute_following {
            following = following.union(&at.inverse().compose(&c).compose(&dd));
        }
        let preceding = aa.compose(&r).compose(&dd);
        AxisSet {
            self_: Relation::identity(&universe),
            universe,
            child: c,
            attribute: at,
            following_sibling: f,
            parent: p,
            preceding_sibling: r,
            descendant: d,
            ancestor: a,
            descendant_or_self: dd,
            ancestor_or_self: aa,
            following,
            preceding,
        }
    }

    pub fn get(&self, axis: Axis) -> &Relation {
        match axis {
            Axis::Child => &self.child,
            Axis::Descendant => &self.descendant,
            Axis::Parent => &self.parent,
            Axis::Ancestor => &self.ancestor,
            Axis::FollowingSibling => &self.following_sibling,
            Axis::PrecedingSibling => &self.preceding_sibling,
            Axis::Following => &self.following,
            Axis::Preceding => &self.preceding,
            Axis::Attribute => &self.attribute,
            Axis::SelfAxis => &self.self_,
            Axis::DescendantOrSelf => &self.descendant_or_self,
            Axis::AncestorOrSelf => &self.ancestor_or_self,
        }
    }
}

fn comments_and_pis(universe: &Arc<TypeUniverse>) -> TypeSet {
    let mut z = universe.empty_set();
    z.insert_index(TypeUniverse::COMMENT);
    z.insert_index(TypeUniverse::PI);
    z
}

fn element_index(universe: &TypeUniverse, name: &str) -> Result<usize, AxisError> {
    universe
        .index_of(&crate::relalg::NodeType::element(name))
        .ok_or_else(|| AxisError::UnknownElement(name.to_string()))
}

pub fn build_child(dtd: &Dtd, universe: &Arc<TypeUniverse>) -> Relation {
    let z = comments_and_pis(universe);
    let elems = universe.elements();
    let mut c = Relation::empty(universe);

    let mut top = z.clone();
    for name in dtd.root_elements() {
        top.insert_index(element_index(universe, name).expect("declared element"));
    }
    let mut root = universe.empty_set();
    root.insert_index(TypeUniverse::ROOT);
    c = c.union(&Relation::product(&root, &top));
    c = c.union(&Relation::product(&elems, &z));

    for decl in dtd.elements.values() {
        let e = element_index(universe, &decl.name).expect("declared element");
        match &decl.content {
            ElementContent::Any => {
                for j in elems.indices().chain([TypeUniverse::TEXT]) {
                    c.insert_index(e, j);
                }
            }
            ElementContent::Mixed(_) | ElementContent::Regular(_) => {
                if decl.is_mixed() {
                    c.insert_index(e, TypeUniverse::TEXT);
                }
                for name in decl.child_names() {
                    c.insert_index(e, element_index(universe, name).expect("finalized DTD"));
                }
            }
        }
    }
    c
}

pub fn build_attribute(dtd: &Dtd, universe: &Arc<TypeUniverse>) -> Relation {
    let mut at = Relation::empty(universe);
    for a in &dtd.attrs {
        at.insert(
            &crate::relalg::NodeType::element(a.element.as_str()),
            &crate::relalg::NodeType::attribute(a.attribute.as_str()),
        )
        .expect("attribute types are in the universe");
    }
    at
}

/// Next-proper-sibling pairs of a content model together with the set of
/// types that can end a word of its language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NextProper {
    pub pairs: Relation,
    pub last: TypeSet,
}

struct Rules<'a> {
    universe: &'a Arc<TypeUniverse>,
    pairs: Relation,
    steps: usize,
    budget: usize,
}

impl Rules<'_> {
    fn tick(&mut self) -> Result<(), AxisError> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(AxisError::BudgetExceeded {
                element: String::new(),
                limit: self.budget,
            })
        } else {
            Ok(())
        }
    }

    /// Adds the pairs of `c` preceded by `p` and returns its final types.
    fn m(&mut self, c: &ContentModel, p: TypeSet) -> Result<TypeSet, AxisError> {
        self.tick()?;
        match c {
            ContentModel::Empty => Ok(p),
            ContentModel::Element(name) => {
                let e = element_index(self.universe, name)?;
                for i in p.indices() {
                    self.pairs.insert_index(i, e);
                }
                let mut q = self.universe.empty_set();
                q.insert_index(e);
                Ok(q)
            }
            ContentModel::Seq(items) => items.iter().try_fold(p, |q, item| self.m(item, q)),
            ContentModel::Choice(items) => {
                let mut q = self.universe.empty_set();
                for item in items {
                    q = q.union(&self.m(item, p.clone())?);
                }
                Ok(q)
            }
            // c? is (c | ())
            ContentModel::Opt(inner) => Ok(self.m(inner, p.clone())?.union(&p)),
            // c* is (c+)?
            ContentModel::Star(inner) => Ok(self.plus(inner, p.clone())?.union(&p)),
            ContentModel::Plus(inner) => self.plus(inner, p),
        }
    }

    // c+ is rewritten to (c, c?)
    fn plus(&mut self, c: &ContentModel, p: TypeSet) -> Result<TypeSet, AxisError> {
        self.tick()?;
        let first = self.m(c, p)?;
        Ok(self.m(c, first.clone())?.union(&first))
    }
}

pub fn next_proper_model(
    model: &ContentModel,
    universe: &Arc<TypeUniverse>,
    budget: usize,
) -> Result<NextProper, AxisError> {
    let mut rules = Rules {
        universe,
        pairs: Relation::empty(universe),
        steps: 0,
        budget,
    };
    let last = rules.m(model, universe.empty_set())?;
    Ok(NextProper {
        pairs: rules.pairs,
        last,
    })
}

/// Pairs of child types that can be adjacent inside an `e` element,
/// ignoring comments and processing instructions.
pub fn next_proper_sibling(
    decl: &ElementDecl,
    universe: &Arc<TypeUniverse>,
    budget: usize,
) -> Result<Relation, AxisError> {
    let with_text = |mut m: TypeSet| {
        m.insert_index(TypeUniverse::TEXT);
        let mut r = Relation::product(&m, &m);
        r.remove_index(TypeUniverse::TEXT, TypeUniverse::TEXT);
        r
    };
    match &decl.content {
        ElementContent::Regular(model) => next_proper_model(model, universe, budget)
            .map(|np| np.pairs)
            .map_err(|e| match e {
                AxisError::BudgetExceeded { limit, .. } => AxisError::BudgetExceeded {
                    element: decl.name.clone(),
                    limit,
                },
                other => other,
            }),
        ElementContent::Mixed(names) => {
            let mut m = universe.empty_set();
            for n in names {
                m.insert_index(element_index(universe, n)?);
            }
            Ok(with_text(m))
        }
        ElementContent::Any => Ok(with_text(universe.elements())),
    }
}

pub fn build_following_sibling(
    dtd: &Dtd,
    universe: &Arc<TypeUniverse>,
    options: &AxisOptions,
) -> Result<Relation, AxisError> {
    let z = comments_and_pis(universe);
    let elems = universe.elements();
    let zz = Relation::product(&z, &z);
    let mut f = Relation::product(&elems, &z).symmetric_closure().union(&zz);

    let mut text = universe.empty_set();
    text.insert_index(TypeUniverse::TEXT);
    for decl in dtd.elements.values() {
        let n = next_proper_sibling(decl, universe, options.budget)?;
        f = f.union(&n.transitive_closure());
        let occurring = n.domain().union(&n.range());
        let mut sided = occurring.intersect(&elems);
        if options.text_comment_siblings && (decl.is_mixed() || decl.content == ElementContent::Any) {
            sided = sided.union(&text);
            f.insert_index(TypeUniverse::TEXT, TypeUniverse::TEXT);
        }
        f = f.union(&Relation::product(&sided, &z).symmetric_closure());
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relalg::NodeType;

    fn el(n: &str) -> NodeType {
        NodeType::element(n)
    }

    fn np(model: &str, names: &[&str]) -> NextProper {
        let u = TypeUniverse::new(names.iter().map(|n| el(n)));
        next_proper_model(&ContentModel::parse(model).unwrap(), &u, DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn sequence_rule() {
        let r = np("(a, b)", &["a", "b"]);
        assert_eq!(r.pairs.to_string(), "{(a,b)}");
        assert_eq!(r.last.to_string(), "{b}");
    }

    #[test]
    fn iterators() {
        assert_eq!(np("(a+)", &["a"]).pairs.to_string(), "{(a,a)}");
        assert_eq!(
            np("(a | b)*", &["a", "b"]).pairs.to_string(),
            "{(a,a),(a,b),(b,a),(b,b)}"
        );
        let r = np("(a?, b*)", &["a", "b"]);
        assert_eq!(r.pairs.to_string(), "{(a,b),(b,b)}");
        assert_eq!(r.last.to_string(), "{a,b}");
    }

    #[test]
    fn empty_group_passes_predecessors() {
        let r = np("(a, (), b)", &["a", "b"]);
        assert_eq!(r.pairs.to_string(), "{(a,b)}");
    }

    #[test]
    fn mixed_content() {
        let dtd = Dtd::parse("<!ELEMENT e (#PCDATA | a)*> <!ELEMENT a EMPTY>").unwrap();
        let u = dtd.universe();
        let n = next_proper_sibling(dtd.element("e").unwrap(), &u, DEFAULT_BUDGET).unwrap();
        assert_eq!(n.to_string(), "{(#text,a),(a,#text),(a,a)}");
    }

    #[test]
    fn budget_is_enforced() {
        let dtd = Dtd::parse("<!ELEMENT e ((((a+)+)+)+)+> <!ELEMENT a EMPTY>").unwrap();
        let u = dtd.universe();
        let err = next_proper_sibling(dtd.element("e").unwrap(), &u, 40).unwrap_err();
        assert_eq!(
            err,
            AxisError::BudgetExceeded {
                element: "e".into(),
                limit: 40
            }
        );
        assert!(next_proper_sibling(dtd.element("e").unwrap(), &u, DEFAULT_BUDGET).is_ok());
    }

    #[test]
    fn child_of_empty_dtd() {
        let dtd = Dtd::parse("").unwrap();
        let u = dtd.universe();
        assert_eq!(
            build_child(&dtd, &u).to_string(),
            "{(#root,#comment),(#root,#pi)}"
        );
    }

    #[test]
    fn child_rules() {
        let dtd = Dtd::parse("<!ELEMENT e (#PCDATA)>").unwrap();
        let u = dtd.universe();
        let c = build_child(&dtd, &u);
        for (a, b) in [
            (NodeType::Root, el("e")),
            (el("e"), NodeType::Text),
            (el("e"), NodeType::Comment),
            (el("e"), NodeType::ProcessingInstruction),
        ] {
            assert!(c.contains(&a, &b), "({a},{b})");
        }
    }

    #[test]
    fn root_constraint_limits_root_children() {
        let dtd = Dtd::parse("<!ELEMENT r (a)> <!ELEMENT a EMPTY>")
            .unwrap()
            .with_root_constraint(["r"])
            .unwrap();
        let u = dtd.universe();
        let c = build_child(&dtd, &u);
        assert!(c.contains(&NodeType::Root, &el("r")));
        assert!(!c.contains(&NodeType::Root, &el("a")));
    }

    #[test]
    fn attribute_relation() {
        let dtd = Dtd::parse("<!ELEMENT e EMPTY> <!ATTLIST e x CDATA #IMPLIED>").unwrap();
        let u = dtd.universe();
        assert_eq!(build_attribute(&dtd, &u).to_string(), "{(e,@x)}");
        let dtd = Dtd::parse("<!ELEMENT e EMPTY>").unwrap();
        assert!(build_attribute(&dtd, &dtd.universe()).is_empty());
    }

    #[test]
    fn following_sibling_of_empty_dtd() {
        let dtd = Dtd::parse("").unwrap();
        let u = dtd.universe();
        let f = build_following_sibling(&dtd, &u, &AxisOptions::default()).unwrap();
        assert_eq!(
            f.to_string(),
            "{(#comment,#comment),(#comment,#pi),(#pi,#comment),(#pi,#pi)}"
        );
    }

    #[test]
    fn following_sibling_is_not_closed_across_parents() {
        let dtd = Dtd::parse(
            "<!ELEMENT r (a, b)> <!ELEMENT s (b, c)>
             <!ELEMENT a EMPTY> <!ELEMENT b EMPTY> <!ELEMENT c EMPTY>",
        )
        .unwrap()
        .with_root_constraint(["r", "s"])
        .unwrap();
        let u = dtd.universe();
        let f = build_following_sibling(&dtd, &u, &AxisOptions::default()).unwrap();
        assert!(f.contains(&el("a"), &el("b")));
        assert!(f.contains(&el("b"), &el("c")));
        assert!(!f.contains(&el("a"), &el("c")));
        assert!(!f.contains(&el("b"), &el("a")));
    }

    #[test]
    fn text_comment_option() {
        let dtd = Dtd::parse("<!ELEMENT e (#PCDATA)>").unwrap();
        let u = dtd.universe();
        let lit = build_following_sibling(&dtd, &u, &AxisOptions::default()).unwrap();
        assert!(!lit.contains(&NodeType::Text, &NodeType::Comment));
        let opts = AxisOptions {
            text_comment_siblings: true,
            ..AxisOptions::default()
        };
        let ext = build_following_sibling(&dtd, &u, &opts).unwrap();
        assert!(ext.contains(&NodeType::Text, &NodeType::Comment));
        assert!(ext.contains(&NodeType::Comment, &NodeType::Text));
        assert!(ext.contains(&NodeType::Text, &NodeType::Text));
    }

    #[test]
    fn derived_axes() {
        let dtd =
            Dtd::parse("<!ELEMENT a (b)> <!ELEMENT b (c)> <!ELEMENT c EMPTY> <!ATTLIST b x CDATA #IMPLIED>")
                .unwrap();
        let axes = AxisSet::build(&dtd, &AxisOptions::default()).unwrap();
        let u = &axes.universe;
        assert_eq!(axes.self_, Relation::identity(u));
        let below_a = axes.descendant.image(&u.singleton(&el("a")).unwrap());
        for t in [
            el("b"),
            el("c"),
            NodeType::Comment,
            NodeType::ProcessingInstruction,
        ] {
            assert!(below_a.contains(&t));
        }
        let above_x = axes
            .ancestor
            .image(&u.singleton(&NodeType::attribute("x")).unwrap());
        for t in [el("b"), el("a"), NodeType::Root] {
            assert!(above_x.contains(&t));
        }
        assert!(axes.following.contains(&NodeType::attribute("x"), &el("c")));
        let literal = AxisSet::derive(
            axes.child.clone(),
            axes.attribute.clone(),
            axes.following_sibling.clone(),
        );
        assert!(!literal.following.contains(&NodeType::attribute("x"), &el("c")));
    }

    #[test]
    fn following_matches_composition() {
        let dtd = Dtd::parse("<!ELEMENT r (x, y)> <!ELEMENT x EMPTY> <!ELEMENT y EMPTY>").unwrap();
        let axes = AxisSet::build(&dtd, &AxisOptions::default()).unwrap();
        let composed = axes
            .ancestor_or_self
            .compose(&axes.following_sibling.compose(&axes.descendant_or_self));
        assert_eq!(axes.following, composed);
        assert!(axes.following.contains(&el("x"), &el("y")));
    }

    #[test]
    fn axis_names_round_trip() {
        for a in Axis::ALL {
            assert_eq!(a.name().parse::<Axis>().unwrap(), a);
        }
        assert!("namespace".parse::<Axis>().is_err());
    }
}
