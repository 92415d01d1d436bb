//! Finite binary relations over an interned universe of node types.
//!
//! A [`TypeUniverse`] fixes the finite set of node types induced by one DTD
//! and numbers them densely. [`Relation`] and [`TypeSet`] are bit matrices and
//! bit vectors indexed by that numbering, so every operation the analysis
//! needs (composition, closures, images) is a handful of word-wise loops.
//!
//! Composition is diagrammatic throughout: `r.compose(&s)` relates `x` to `z`
//! when `r` relates `x` to some `y` and `s` relates that `y` to `z`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// The kind of a document node, as seen by XPath.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Root,
    Comment,
    ProcessingInstruction,
    Text,
    Element,
    Attribute,
}

/// A node type: one of the four generic types, or a named element or
/// attribute type declared by a DTD.
///
/// Attribute `@a` and element `a` are distinct types.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeType {
    Root,
    Comment,
    ProcessingInstruction,
    Text,
    Element(String),
    Attribute(String),
}

impl NodeType {
    pub fn element(name: impl Into<String>) -> Self {
        NodeType::Element(name.into())
    }

    pub fn attribute(name: impl Into<String>) -> Self {
        NodeType::Attribute(name.into())
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            NodeType::Root => NodeKind::Root,
            NodeType::Comment => NodeKind::Comment,
            NodeType::ProcessingInstruction => NodeKind::ProcessingInstruction,
            NodeType::Text => NodeKind::Text,
            NodeType::Element(_) => NodeKind::Element,
            NodeType::Attribute(_) => NodeKind::Attribute,
        }
    }

    /// The element or attribute name; `None` for generic types.
    pub fn name(&self) -> Option<&str> {
        match self {
            NodeType::Element(n) | NodeType::Attribute(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_element(&self) -> bool {
        matches!(self, NodeType::Element(_))
    }

    pub fn is_attribute(&self) -> bool {
        matches!(self, NodeType::Attribute(_))
    }

    /// Parses the rendering produced by `Display`: `#root`, `#comment`,
    /// `#pi`, `#text`, `@name` or a bare element name.
    pub fn parse_display(s: &str) -> Option<NodeType> {
        let s = s.trim();
        match s {
            "#root" => Some(NodeType::Root),
            "#comment" => Some(NodeType::Comment),
            "#pi" => Some(NodeType::ProcessingInstruction),
            "#text" => Some(NodeType::Text),
            _ => {
                if let Some(rest) = s.strip_prefix('@') {
                    (!rest.is_empty()).then(|| NodeType::Attribute(rest.to_string()))
                } else if s.is_empty() || s.starts_with('#') {
                    None
                } else {
                    Some(NodeType::Element(s.to_string()))
                }
            }
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeType::Root => f.write_str("#root"),
            NodeType::Comment => f.write_str("#comment"),
            NodeType::ProcessingInstruction => f.write_str("#pi"),
            NodeType::Text => f.write_str("#text"),
            NodeType::Element(n) => f.write_str(n),
            NodeType::Attribute(n) => write!(f, "@{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("operands range over different type universes")]
    UniverseMismatch,
    #[error("node type `{0}` is not a member of the type universe")]
    NotMember(NodeType),
}

/// Ordered finite set of node types with a dense index.
///
/// Indices 0..4 always hold the generic types in the order root, comment,
/// processing instruction, text.
#[derive(Debug)]
pub struct TypeUniverse {
    members: Vec<NodeType>,
    index: HashMap<NodeType, usize>,
}

impl PartialEq for TypeUniverse {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for TypeUniverse {}

impl TypeUniverse {
    pub const ROOT: usize = 0;
    pub const COMMENT: usize = 1;
    pub const PI: usize = 2;
    pub const TEXT: usize = 3;

    /// Builds a universe from the generic types plus `types`. Duplicates and
    /// repeated generic types are dropped; first occurrence fixes the order.
    pub fn new(types: impl IntoIterator<Item = NodeType>) -> Arc<Self> {
        let mut universe = TypeUniverse {
            members: Vec::new(),
            index: HashMap::new(),
        };
        let generic = [
            NodeType::Root,
            NodeType::Comment,
            NodeType::ProcessingInstruction,
            NodeType::Text,
        ];
        for t in generic.into_iter().chain(types) {
            if !universe.index.contains_key(&t) {
                universe.index.insert(t.clone(), universe.members.len());
                universe.members.push(t);
            }
        }
        Arc::new(universe)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[NodeType] {
        &self.members
    }

    pub fn get(&self, index: usize) -> &NodeType {
        &self.members[index]
    }

    pub fn index_of(&self, t: &NodeType) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn contains(&self, t: &NodeType) -> bool {
        self.index.contains_key(t)
    }

    /// Looks up a type by its display rendering (`#text`, `@id`, `p`).
    pub fn lookup(&self, rendered: &str) -> Option<&NodeType> {
        let t = NodeType::parse_display(rendered)?;
        self.index_of(&t).map(|i| &self.members[i])
    }

    pub fn element_names(&self) -> impl Iterator<Item = &str> {
        self.members.iter().filter_map(|t| match t {
            NodeType::Element(n) => Some(n.as_str()),
            _ => None,
        })
    }

    fn words(&self) -> usize {
        self.members.len().div_ceil(64)
    }
}

/// Convenience constructors for type sets over a shared universe.
pub trait UniverseExt {
    fn empty_set(&self) -> TypeSet;
    fn all(&self) -> TypeSet;
    fn elements(&self) -> TypeSet;
    fn attributes(&self) -> TypeSet;
    fn set_of<'a, I>(&self, types: I) -> Result<TypeSet, RelationError>
    where
        I: IntoIterator<Item = &'a NodeType>;
    fn singleton(&self, t: &NodeType) -> Result<TypeSet, RelationError>;
}

impl UniverseExt for Arc<TypeUniverse> {
    fn empty_set(&self) -> TypeSet {
        TypeSet::empty(self)
    }

    fn all(&self) -> TypeSet {
        let mut s = TypeSet::empty(self);
        for i in 0..self.len() {
            s.insert_index(i);
        }
        s
    }

    fn elements(&self) -> TypeSet {
        TypeSet::filter(self, NodeType::is_element)
    }

    fn attributes(&self) -> TypeSet {
        TypeSet::filter(self, NodeType::is_attribute)
    }

    fn set_of<'a, I>(&self, types: I) -> Result<TypeSet, RelationError>
    where
        I: IntoIterator<Item = &'a NodeType>,
    {
        let mut s = TypeSet::empty(self);
        for t in types {
            s.insert(t)?;
        }
        Ok(s)
    }

    fn singleton(&self, t: &NodeType) -> Result<TypeSet, RelationError> {
        self.set_of([t])
    }
}

fn same_universe(a: &Arc<TypeUniverse>, b: &Arc<TypeUniverse>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[inline]
fn bit(words: &[u64], i: usize) -> bool {
    words[i / 64] >> (i % 64) & 1 == 1
}

#[inline]
fn set_bit(words: &mut [u64], i: usize) {
    words[i / 64] |= 1 << (i % 64);
}

fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + b)
        })
    })
}

/// A set of node types drawn from one universe.
#[derive(Clone)]
pub struct TypeSet {
    universe: Arc<TypeUniverse>,
    bits: Vec<u64>,
}

impl TypeSet {
    pub fn empty(universe: &Arc<TypeUniverse>) -> Self {
        TypeSet {
            universe: Arc::clone(universe),
            bits: vec![0; universe.words()],
        }
    }

    fn filter(universe: &Arc<TypeUniverse>, keep: impl Fn(&NodeType) -> bool) -> Self {
        let mut s = TypeSet::empty(universe);
        for (i, t) in universe.members().iter().enumerate() {
            if keep(t) {
                s.insert_index(i);
            }
        }
        s
    }

    pub fn universe(&self) -> &Arc<TypeUniverse> {
        &self.universe
    }

    pub fn insert(&mut self, t: &NodeType) -> Result<(), RelationError> {
        let i = self
            .universe
            .index_of(t)
            .ok_or_else(|| RelationError::NotMember(t.clone()))?;
        self.insert_index(i);
        Ok(())
    }

    pub fn insert_index(&mut self, i: usize) {
        set_bit(&mut self.bits, i);
    }

    pub fn contains(&self, t: &NodeType) -> bool {
        self.universe.index_of(t).is_some_and(|i| self.contains_index(i))
    }

    pub fn contains_index(&self, i: usize) -> bool {
        bit(&self.bits, i)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        ones(&self.bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodeType> + '_ {
        self.indices().map(|i| self.universe.get(i))
    }

    fn zip_with(&self, other: &TypeSet, op: impl Fn(u64, u64) -> u64) -> TypeSet {
        assert!(
            same_universe(&self.universe, &other.universe),
            "type sets range over different universes"
        );
        TypeSet {
            universe: Arc::clone(&self.universe),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &TypeSet) -> TypeSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &TypeSet) -> TypeSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &TypeSet) -> TypeSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &TypeSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & !b == 0)
    }

    /// Members rendered and sorted by their display name.
    pub fn sorted_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.iter().map(|t| t.to_string()).collect();
        names.sort();
        names
    }
}

impl PartialEq for TypeSet {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.bits == other.bits
    }
}

impl Eq for TypeSet {}

impl fmt::Debug for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.sorted_names().join(","))
    }
}

/// A binary relation on the node types of one universe, stored as a dense
/// bit matrix (row = first component).
#[derive(Clone)]
pub struct Relation {
    universe: Arc<TypeUniverse>,
    stride: usize,
    bits: Vec<u64>,
}

impl Relation {
    pub fn empty(universe: &Arc<TypeUniverse>) -> Self {
        let stride = universe.words();
        Relation {
            universe: Arc::clone(universe),
            stride,
            bits: vec![0; stride * universe.len()],
        }
    }

    /// `I_T`, the identity over the whole universe.
    pub fn identity(universe: &Arc<TypeUniverse>) -> Self {
        let mut r = Relation::empty(universe);
        for i in 0..universe.len() {
            r.insert_index(i, i);
        }
        r
    }

    /// `{(t, t) | t ∈ set}`.
    pub fn identity_over(set: &TypeSet) -> Self {
        let mut r = Relation::empty(set.universe());
        for i in set.indices() {
            r.insert_index(i, i);
        }
        r
    }

    /// Cartesian product `left × right`.
    pub fn product(left: &TypeSet, right: &TypeSet) -> Self {
        assert!(
            same_universe(left.universe(), right.universe()),
            "type sets range over different universes"
        );
        let mut r = Relation::empty(left.universe());
        for i in left.indices() {
            r.row_mut(i).copy_from_slice(&right.bits);
        }
        r
    }

    pub fn from_pairs<'a, I>(universe: &Arc<TypeUniverse>, pairs: I) -> Result<Self, RelationError>
    where
        I: IntoIterator<Item = (&'a NodeType, &'a NodeType)>,
    {
        let mut r = Relation::empty(universe);
        for (a, b) in pairs {
            r.insert(a, b)?;
        }
        Ok(r)
    }

    pub fn universe(&self) -> &Arc<TypeUniverse> {
        &self.universe
    }

    pub fn insert(&mut self, a: &NodeType, b: &NodeType) -> Result<(), RelationError> {
        let i = self
            .universe
            .index_of(a)
            .ok_or_else(|| RelationError::NotMember(a.clone()))?;
        let j = self
            .universe
            .index_of(b)
            .ok_or_else(|| RelationError::NotMember(b.clone()))?;
        self.insert_index(i, j);
        Ok(())
    }

    pub fn insert_index(&mut self, i: usize, j: usize) {
        set_bit(self.row_mut(i), j);
    }

    pub fn remove_index(&mut self, i: usize, j: usize) {
        self.row_mut(i)[j / 64] &= !(1 << (j % 64));
    }

    pub fn contains(&self, a: &NodeType, b: &NodeType) -> bool {
        match (self.universe.index_of(a), self.universe.index_of(b)) {
            (Some(i), Some(j)) => self.contains_index(i, j),
            _ => false,
        }
    }

    pub fn contains_index(&self, i: usize, j: usize) -> bool {
        bit(self.row(i), j)
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.stride..(i + 1) * self.stride]
    }

    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.bits[i * self.stride..(i + 1) * self.stride]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn index_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.universe.len()).flat_map(move |i| ones(self.row(i)).map(move |j| (i, j)))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&NodeType, &NodeType)> + '_ {
        self.index_pairs()
            .map(|(i, j)| (self.universe.get(i), self.universe.get(j)))
    }

    /// Pairs rendered with display names, sorted lexicographically.
    pub fn sorted_pairs(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = self
            .pairs()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        v.sort();
        v
    }

    fn check(&self, other: &Relation) -> Result<(), RelationError> {
        if same_universe(&self.universe, &other.universe) {
            Ok(())
        } else {
            Err(RelationError::UniverseMismatch)
        }
    }

    /// Diagrammatic composition `self ; other`.
    pub fn try_compose(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check(other)?;
        let mut out = Relation::empty(&self.universe);
        for i in 0..self.universe.len() {
            for k in ones(self.row(i)).collect::<Vec<_>>() {
                let src = other.row(k);
                for (d, s) in out.row_mut(i).iter_mut().zip(src) {
                    *d |= *s;
                }
            }
        }
        Ok(out)
    }

    fn try_zip(&self, other: &Relation, op: impl Fn(u64, u64) -> u64) -> Result<Relation, RelationError> {
        self.check(other)?;
        Ok(Relation {
            universe: Arc::clone(&self.universe),
            stride: self.stride,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn try_union(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.try_zip(other, |a, b| a | b)
    }

    pub fn try_intersect(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.try_zip(other, |a, b| a & b)
    }

    pub fn try_difference(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.try_zip(other, |a, b| a & !b)
    }

    /// Panics if the universes differ; see [`Relation::try_compose`].
    pub fn compose(&self, other: &Relation) -> Relation {
        self.try_compose(other).expect("compose")
    }

    pub fn union(&self, other: &Relation) -> Relation {
        self.try_union(other).expect("union")
    }

    pub fn intersect(&self, other: &Relation) -> Relation {
        self.try_intersect(other).expect("intersect")
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        self.try_difference(other).expect("difference")
    }

    pub fn inverse(&self) -> Relation {
        let mut out = Relation::empty(&self.universe);
        for (i, j) in self.index_pairs() {
            out.insert_index(j, i);
        }
        out
    }

    /// `r⁺`, by Warshall's algorithm on rows.
    pub fn transitive_closure(&self) -> Relation {
        let mut out = self.clone();
        let n = self.universe.len();
        let mut pivot = vec![0u64; self.stride];
        for k in 0..n {
            pivot.copy_from_slice(out.row(k));
            for i in 0..n {
                if out.contains_index(i, k) {
                    for (d, s) in out.row_mut(i).iter_mut().zip(&pivot) {
                        *d |= *s;
                    }
                }
            }
        }
        out
    }

    /// `r* = r⁺ ∪ I_T`.
    pub fn reflexive_transitive_closure(&self) -> Relation {
        self.transitive_closure()
            .union(&Relation::identity(&self.universe))
    }

    /// `r ∪ r⁻¹`.
    pub fn symmetric_closure(&self) -> Relation {
        self.union(&self.inverse())
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.check(other).is_ok() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & !b == 0)
    }

    pub fn domain(&self) -> TypeSet {
        let mut s = TypeSet::empty(&self.universe);
        for i in 0..self.universe.len() {
            if self.row(i).iter().any(|&w| w != 0) {
                s.insert_index(i);
            }
        }
        s
    }

    pub fn range(&self) -> TypeSet {
        let mut s = TypeSet::empty(&self.universe);
        for i in 0..self.universe.len() {
            for (d, r) in s.bits.iter_mut().zip(self.row(i)) {
                *d |= *r;
            }
        }
        s
    }

    /// The image `{y | ∃x ∈ set: (x, y) ∈ self}`.
    pub fn image(&self, set: &TypeSet) -> TypeSet {
        assert!(
            same_universe(&self.universe, set.universe()),
            "relation and set range over different universes"
        );
        let mut s = TypeSet::empty(&self.universe);
        for i in set.indices() {
            for (d, r) in s.bits.iter_mut().zip(self.row(i)) {
                *d |= *r;
            }
        }
        s
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.bits == other.bits
    }
}

impl Eq for Relation {}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `{(a,b),(c,d)}` with pairs sorted by rendered names.
impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (a, b)) in self.sorted_pairs().iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "({a},{b})")?;
        }
        f.write_str("}")
    }
}

/// Orders node types by their rendered name, the order used for output.
pub fn display_order(a: &NodeType, b: &NodeType) -> Ordering {
    a.to_string().cmp(&b.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Arc<TypeUniverse> {
        TypeUniverse::new(["a", "b", "c", "d", "x", "y"].map(NodeType::element))
    }

    fn rel(u: &Arc<TypeUniverse>, pairs: &[(&str, &str)]) -> Relation {
        let mut r = Relation::empty(u);
        for (a, b) in pairs {
            r.insert(&u.lookup(a).unwrap().clone(), &u.lookup(b).unwrap().clone())
                .unwrap();
        }
        r
    }

    fn set(u: &Arc<TypeUniverse>, names: &[&str]) -> TypeSet {
        u.set_of(names.iter().map(|n| u.lookup(n).unwrap())).unwrap()
    }

    #[test]
    fn universe_always_has_generic_types() {
        let u = TypeUniverse::new([]);
        assert_eq!(u.len(), 4);
        assert_eq!(u.get(TypeUniverse::ROOT), &NodeType::Root);
        assert_eq!(u.get(TypeUniverse::COMMENT), &NodeType::Comment);
        assert_eq!(u.get(TypeUniverse::PI), &NodeType::ProcessingInstruction);
        assert_eq!(u.get(TypeUniverse::TEXT), &NodeType::Text);

        let u = TypeUniverse::new([NodeType::Text, NodeType::element("a"), NodeType::element("a")]);
        assert_eq!(u.len(), 5);
    }

    #[test]
    fn attribute_and_element_of_same_name_are_distinct() {
        let u = TypeUniverse::new([NodeType::element("a"), NodeType::attribute("a")]);
        assert_eq!(u.len(), 6);
        assert_ne!(u.lookup("a"), u.lookup("@a"));
    }

    #[test]
    fn display_roundtrip() {
        for s in ["#root", "#comment", "#pi", "#text", "p", "@id"] {
            assert_eq!(NodeType::parse_display(s).unwrap().to_string(), s);
        }
        assert_eq!(NodeType::parse_display("#bogus"), None);
        assert_eq!(NodeType::parse_display("@"), None);
    }

    #[test]
    fn compose_identity_and_chain() {
        let u = abc();
        let r = rel(&u, &[("a", "b"), ("c", "d")]);
        assert_eq!(Relation::identity(&u).compose(&r), r);
        let chain = rel(&u, &[("a", "b")]).compose(&rel(&u, &[("b", "c"), ("b", "d")]));
        assert_eq!(chain, rel(&u, &[("a", "c"), ("a", "d")]));
    }

    #[test]
    fn union_intersect_inverse() {
        let u = abc();
        let r = rel(&u, &[("a", "b"), ("x", "y")]);
        assert_eq!(r.union(&Relation::empty(&u)), r);
        assert_eq!(r.inverse().inverse(), r);
        let i = rel(&u, &[("a", "b"), ("a", "c")]).intersect(&rel(&u, &[("a", "c"), ("b", "c")]));
        assert_eq!(i, rel(&u, &[("a", "c")]));
    }

    #[test]
    fn closures() {
        let u = abc();
        let r = rel(&u, &[("a", "b"), ("b", "c")]);
        assert_eq!(
            r.transitive_closure(),
            rel(&u, &[("a", "b"), ("b", "c"), ("a", "c")])
        );
        assert_eq!(
            Relation::empty(&u).reflexive_transitive_closure(),
            Relation::identity(&u)
        );
    }

    #[test]
    fn symmetric_closure_cases() {
        let u = abc();
        assert_eq!(
            rel(&u, &[("a", "b")]).symmetric_closure(),
            rel(&u, &[("a", "b"), ("b", "a")])
        );
        assert_eq!(Relation::identity(&u).symmetric_closure(), Relation::identity(&u));
        let ez = Relation::product(&set(&u, &["x"]), &set(&u, &["#comment", "#pi"]));
        assert_eq!(
            ez.symmetric_closure(),
            rel(
                &u,
                &[("x", "#comment"), ("x", "#pi"), ("#comment", "x"), ("#pi", "x")]
            )
        );
    }

    #[test]
    fn identity_over_and_product() {
        let u = abc();
        assert!(Relation::identity_over(&u.empty_set()).is_empty());
        assert_eq!(
            Relation::product(&set(&u, &["#root"]), &set(&u, &["#comment", "#pi"])),
            rel(&u, &[("#root", "#comment"), ("#root", "#pi")])
        );
        let t = set(&u, &["#text"]);
        assert_eq!(
            Relation::identity_over(&t).compose(&Relation::product(&t, &t)),
            rel(&u, &[("#text", "#text")])
        );
        assert!(matches!(
            u.singleton(&NodeType::element("zzz")),
            Err(RelationError::NotMember(_))
        ));
    }

    #[test]
    fn domain_and_image() {
        let u = abc();
        assert!(Relation::empty(&u).domain().is_empty());
        let r = rel(&u, &[("a", "b"), ("a", "c"), ("x", "y")]);
        assert_eq!(r.image(&set(&u, &["a"])), set(&u, &["b", "c"]));
        assert_eq!(r.domain(), set(&u, &["a", "x"]));
        assert_eq!(r.range(), set(&u, &["b", "c", "y"]));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let u1 = abc();
        let u2 = TypeUniverse::new([NodeType::element("q")]);
        let r = Relation::identity(&u1);
        let s = Relation::identity(&u2);
        assert_eq!(r.try_compose(&s), Err(RelationError::UniverseMismatch));
        assert_eq!(r.try_union(&s), Err(RelationError::UniverseMismatch));
        assert_eq!(r.try_intersect(&s), Err(RelationError::UniverseMismatch));
        // structurally equal universes are interchangeable
        let u3 = abc();
        assert!(r.try_compose(&Relation::identity(&u3)).is_ok());
    }

    #[test]
    fn display_is_sorted() {
        let u = abc();
        let r = rel(&u, &[("x", "a"), ("a", "#text"), ("a", "b")]);
        assert_eq!(r.to_string(), "{(a,#text),(a,b),(x,a)}");
        assert_eq!(Relation::empty(&u).to_string(), "{}");
    }

    #[test]
    fn wide_universe_crosses_word_boundaries() {
        let u = TypeUniverse::new((0..150).map(|i| NodeType::element(format!("e{i}"))));
        let mut r = Relation::empty(&u);
        for i in 4..u.len() - 1 {
            r.insert_index(i, i + 1);
        }
        let tc = r.transitive_closure();
        assert!(tc.contains_index(4, u.len() - 1));
        assert_eq!(tc.len(), (u.len() - 4) * (u.len() - 5) / 2);
    }
}
