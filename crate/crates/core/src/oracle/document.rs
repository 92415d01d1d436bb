use std::fmt;

use serde::Serialize;

use crate::relalg::NodeType;

/// A document tree carrying node types only; no text or attribute values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DocNode {
    pub ty: NodeType,
    pub children: Vec<DocNode>,
    /// Attribute names, sorted; elements only.
    pub attributes: Vec<String>,
}

impl DocNode {
    pub fn leaf(ty: NodeType) -> Self {
        DocNode {
            ty,
            children: Vec::new(),
            attributes: Vec::new(),
        }
    }

    pub fn element(name: &str, attributes: Vec<String>, children: Vec<DocNode>) -> Self {
        DocNode {
            ty: NodeType::element(name),
            children,
            attributes,
        }
    }

    pub fn root(children: Vec<DocNode>) -> Self {
        DocNode {
            ty: NodeType::Root,
            children,
            attributes: Vec::new(),
        }
    }

    /// Number of nodes, attributes included.
    pub fn size(&self) -> usize {
        1 + self.attributes.len() + self.children.iter().map(DocNode::size).sum::<usize>()
    }
}

/// Compact rendering such as `#root(a[@id](#text, b))`.
impl fmt::Display for DocNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ty)?;
        if !self.attributes.is_empty() {
            let attrs: Vec<String> = self.attributes.iter().map(|a| format!("@{a}")).collect();
            write!(f, "[{}]", attrs.join(" "))?;
        }
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Node {
    #[serde(serialize_with = "as_display")]
    pub ty: NodeType,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub attributes: Vec<usize>,
    /// Last index inside this node's subtree.
    pub end: usize,
}

fn as_display<S: serde::Serializer>(t: &NodeType, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(t)
}

/// A document flattened into document order: each element is followed by
/// its attributes, then by its children.
#[derive(Clone, Debug)]
pub struct Document {
    pub nodes: Vec<Node>,
    pub tree: DocNode,
}

impl Document {
    pub fn new(tree: DocNode) -> Self {
        let mut nodes = Vec::with_capacity(tree.size());
        flatten(&tree, None, &mut nodes);
        Document { nodes, tree }
    }

    pub const ROOT: usize = 0;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ty(&self, n: usize) -> &NodeType {
        &self.nodes[n].ty
    }

    pub fn is_attribute(&self, n: usize) -> bool {
        self.nodes[n].ty.is_attribute()
    }

    /// Slash-separated location of node `n`, e.g. `/a[1]/b[2]/@id`.
    pub fn path(&self, n: usize) -> String {
        let mut parts = Vec::new();
        let mut cur = n;
        while let Some(p) = self.nodes[cur].parent {
            let part = if self.is_attribute(cur) {
                self.nodes[cur].ty.to_string()
            } else {
                let pos = self.nodes[p].children.iter().position(|&c| c == cur).unwrap_or(0) + 1;
                format!("{}[{pos}]", self.nodes[cur].ty)
            };
            parts.push(part);
            cur = p;
        }
        parts.reverse();
        format!("/{}", parts.join("/"))
    }
}

fn flatten(node: &DocNode, parent: Option<usize>, out: &mut Vec<Node>) -> usize {
    let me = out.len();
    out.push(Node {
        ty: node.ty.clone(),
        parent,
        children: Vec::new(),
        attributes: Vec::new(),
        end: me,
    });
    for a in &node.attributes {
        let i = out.len();
        out.push(Node {
            ty: NodeType::attribute(a.as_str()),
            parent: Some(me),
            children: Vec::new(),
            attributes: Vec::new(),
            end: i,
        });
        out[me].attributes.push(i);
    }
    for c in &node.children {
        let i = flatten(c, Some(me), out);
        out[me].children.push(i);
    }
    out[me].end = out.len() - 1;
    me
}
