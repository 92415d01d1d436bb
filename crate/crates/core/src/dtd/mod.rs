//! DTD declarations and the node-type universe they induce.

mod parser;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::relalg::{NodeType, TypeUniverse};

pub use parser::{parse_dtd, parse_dtd_file, ParseOptions};

/// A regular-expression content model over element names.
///
/// `Seq` and `Choice` built through [`ContentModel::seq`] and
/// [`ContentModel::choice`] never have a single child; unary groups collapse
/// to their child.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ContentModel {
    /// `()`, the language containing only the empty word.
    Empty,
    Element(String),
    Seq(Vec<ContentModel>),
    Choice(Vec<ContentModel>),
    Opt(Box<ContentModel>),
    Star(Box<ContentModel>),
    Plus(Box<ContentModel>),
}

impl ContentModel {
    pub fn element(name: impl Into<String>) -> Self {
        ContentModel::Element(name.into())
    }

    pub fn seq(mut items: Vec<ContentModel>) -> Self {
        match items.len() {
            0 => ContentModel::Empty,
            1 => items.pop().unwrap(),
            _ => ContentModel::Seq(items),
        }
    }

    pub fn choice(mut items: Vec<ContentModel>) -> Self {
        match items.len() {
            0 => ContentModel::Empty,
            1 => items.pop().unwrap(),
            _ => ContentModel::Choice(items),
        }
    }

    pub fn opt(self) -> Self {
        ContentModel::Opt(Box::new(self))
    }

    pub fn star(self) -> Self {
        ContentModel::Star(Box::new(self))
    }

    pub fn plus(self) -> Self {
        ContentModel::Plus(Box::new(self))
    }

    /// Parses a content particle such as `(a, (b | c)*)` or `a+`.
    pub fn parse(text: &str) -> Result<Self, DtdError> {
        parser::parse_content_model(text)
    }

    /// Every element name referenced anywhere in the model.
    pub fn element_names(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ContentModel::Empty => {}
            ContentModel::Element(n) => {
                out.insert(n);
            }
            ContentModel::Seq(v) | ContentModel::Choice(v) => {
                v.iter().for_each(|c| c.collect_names(out));
            }
            ContentModel::Opt(c) | ContentModel::Star(c) | ContentModel::Plus(c) => c.collect_names(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ContentModel::Empty | ContentModel::Element(_) => 1,
            ContentModel::Seq(v) | ContentModel::Choice(v) => {
                1 + v.iter().map(ContentModel::depth).max().unwrap_or(0)
            }
            ContentModel::Opt(c) | ContentModel::Star(c) | ContentModel::Plus(c) => 1 + c.depth(),
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentModel::Opt(_) | ContentModel::Star(_) | ContentModel::Plus(_) => {
                write!(f, "({self})")
            }
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for ContentModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentModel::Empty => f.write_str("()"),
            ContentModel::Element(n) => f.write_str(n),
            ContentModel::Seq(v) | ContentModel::Choice(v) => {
                let sep = if matches!(self, ContentModel::Seq(_)) {
                    ", "
                } else {
                    " | "
                };
                f.write_str("(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
            ContentModel::Opt(c) => {
                c.fmt_operand(f)?;
                f.write_str("?")
            }
            ContentModel::Star(c) => {
                c.fmt_operand(f)?;
                f.write_str("*")
            }
            ContentModel::Plus(c) => {
                c.fmt_operand(f)?;
                f.write_str("+")
            }
        }
    }
}

/// What an `<!ELEMENT>` declaration allows as children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementContent {
    /// Element content; `EMPTY` is `Regular(ContentModel::Empty)`.
    Regular(ContentModel),
    /// `(#PCDATA | e1 | ... | en)*`; the names are unique, in declaration order.
    Mixed(Vec<String>),
    Any,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementDecl {
    pub name: String,
    pub content: ElementContent,
    /// Added for a name referenced in a content model but never declared.
    pub synthetic: bool,
}

impl ElementDecl {
    pub fn is_mixed(&self) -> bool {
        matches!(self.content, ElementContent::Mixed(_))
    }

    /// Names of the element types that may appear as children.
    pub fn child_names(&self) -> BTreeSet<&str> {
        match &self.content {
            ElementContent::Regular(m) => m.element_names(),
            ElementContent::Mixed(names) => names.iter().map(String::as_str).collect(),
            ElementContent::Any => BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttrDecl {
    pub element: String,
    pub attribute: String,
    /// `CDATA`, `ID`, `IDREF`, `NMTOKEN`, `(a|b)`, `NOTATION (x|y)`, ...
    pub value_type: String,
    /// `#REQUIRED`, `#IMPLIED`, `#FIXED "v"` or `"v"`.
    pub default: String,
}

impl AttrDecl {
    pub fn is_required(&self) -> bool {
        self.default == "#REQUIRED"
    }

    pub fn is_id(&self) -> bool {
        self.value_type == "ID"
    }
}

#[derive(Debug, Error)]
pub enum DtdError {
    #[error("{message} at line {line}, column {column}{}", in_entity(.entity))]
    Syntax {
        message: String,
        line: usize,
        column: usize,
        entity: Option<String>,
    },
    #[error("undefined parameter entity `%{name};` at line {line}, column {column}")]
    UndefinedEntity {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("parameter entity `%{name};` references itself")]
    RecursiveEntity { name: String },
    #[error("element `{name}` declared more than once (line {line})")]
    DuplicateElement { name: String, line: usize },
    #[error("cannot read external entity `{name}` from {}: {source}", path.display())]
    ExternalEntity {
        name: String,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid root constraint: {0}")]
    RootConstraint(String),
}

fn in_entity(entity: &Option<String>) -> String {
    entity
        .as_ref()
        .map(|e| format!(" (in entity %{e};)"))
        .unwrap_or_default()
}

/// Parsed declarations of one DTD.
#[derive(Clone, Debug)]
pub struct Dtd {
    pub elements: IndexMap<String, ElementDecl>,
    pub attrs: Vec<AttrDecl>,
    /// Admissible document elements; `None` admits every declared element.
    pub root_constraint: Option<BTreeSet<String>>,
    pub warnings: Vec<String>,
}

impl Dtd {
    pub fn parse(text: &str) -> Result<Dtd, DtdError> {
        parse_dtd(text, &ParseOptions::default())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Dtd, DtdError> {
        parse_dtd_file(path.as_ref())
    }

    /// Restricts the document element to `names`, which must be a nonempty
    /// subset of the declared elements.
    pub fn with_root_constraint<I, S>(mut self, names: I) -> Result<Dtd, DtdError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(DtdError::RootConstraint("empty set of root elements".into()));
        }
        if let Some(bad) = names.iter().find(|n| !self.elements.contains_key(*n)) {
            return Err(DtdError::RootConstraint(format!(
                "`{bad}` is not a declared element"
            )));
        }
        self.root_constraint = Some(names);
        Ok(self)
    }

    pub fn element(&self, name: &str) -> Option<&ElementDecl> {
        self.elements.get(name)
    }

    pub fn attributes_of<'a>(&'a self, element: &'a str) -> impl Iterator<Item = &'a AttrDecl> + 'a {
        self.attrs.iter().filter(move |a| a.element == element)
    }

    /// Elements that may be the document element.
    pub fn root_elements(&self) -> Vec<&str> {
        match &self.root_constraint {
            Some(names) => self
                .elements
                .keys()
                .filter(|n| names.contains(*n))
                .map(String::as_str)
                .collect(),
            None => self.elements.keys().map(String::as_str).collect(),
        }
    }

    /// Elements with a declared attribute of value type `ID`.
    pub fn id_elements(&self) -> BTreeSet<&str> {
        self.attrs
            .iter()
            .filter(|a| a.is_id())
            .map(|a| a.element.as_str())
            .collect()
    }

    /// `{ρ, γ, π, τ}` ∪ one element type per declared element ∪ one attribute
    /// type per distinct declared attribute name.
    pub fn universe(&self) -> Arc<TypeUniverse> {
        let elements = self.elements.keys().map(|n| NodeType::element(n.as_str()));
        let mut seen = HashSet::new();
        let attrs = self
            .attrs
            .iter()
            .filter(|a| seen.insert(a.attribute.as_str()))
            .map(|a| NodeType::attribute(a.attribute.as_str()));
        TypeUniverse::new(elements.chain(attrs))
    }

    /// Resolves references to undeclared elements and duplicate attribute
    /// declarations once all declarations have been read.
    fn finalize(&mut self) {
        let mut missing: Vec<String> = Vec::new();
        for decl in self.elements.values() {
            for name in decl.child_names() {
                if !self.elements.contains_key(name) && !missing.iter().any(|m| m == name) {
                    missing.push(name.to_string());
                }
            }
            if decl.content == ElementContent::Any {
                self.warnings.push(format!(
                    "element `{}` has ANY content; it is related to every element, text, comment and PI type",
                    decl.name
                ));
            }
        }
        for name in missing {
            self.warnings.push(format!(
                "element `{name}` is referenced but not declared; treating it as EMPTY"
            ));
            self.elements.insert(
                name.clone(),
                ElementDecl {
                    name,
                    content: ElementContent::Regular(ContentModel::Empty),
                    synthetic: true,
                },
            );
        }

        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(self.attrs.len());
        for a in std::mem::take(&mut self.attrs) {
            if !self.elements.contains_key(&a.element) {
                self.warnings.push(format!(
                    "attribute `{}` declared for undeclared element `{}` is ignored",
                    a.attribute, a.element
                ));
            } else if !seen.insert((a.element.clone(), a.attribute.clone())) {
                self.warnings.push(format!(
                    "attribute `{}` of `{}` declared again; the first declaration wins",
                    a.attribute, a.element
                ));
            } else {
                kept.push(a);
            }
        }
        self.attrs = kept;
    }
}
