use std::collections::HashMap;

use regex::Regex;

use crate::dtd::{ContentModel, Dtd, ElementContent};
use crate::relalg::NodeType;

use super::document::DocNode;

/// Checks a document against the DTD by matching each element's child
/// sequence with a regular expression compiled from its content model.
pub struct Validator<'a> {
    dtd: &'a Dtd,
    symbols: HashMap<&'a str, char>,
    patterns: HashMap<&'a str, Regex>,
}

impl<'a> Validator<'a> {
    pub fn new(dtd: &'a Dtd) -> Self {
        // one private-use code point per element name
        let symbols: HashMap<&str, char> = dtd
            .elements
            .keys()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.as_str(),
                    char::from_u32(0xE000 + i as u32).expect("private use"),
                )
            })
            .collect();
        let mut patterns = HashMap::new();
        for (name, decl) in &dtd.elements {
            if let ElementContent::Regular(m) = &decl.content {
                let re = format!("^(?:{})$", pattern(m, &symbols));
                patterns.insert(name.as_str(), Regex::new(&re).expect("content model pattern"));
            }
        }
        Validator {
            dtd,
            symbols,
            patterns,
        }
    }

    pub fn validate(&self, doc: &DocNode) -> Result<(), String> {
        if doc.ty != NodeType::Root || !doc.attributes.is_empty() {
            return Err("document node must be a root without attributes".into());
        }
        let mut elements = doc.children.iter().filter(|c| c.ty.is_element());
        let top = elements.next().ok_or("no document element")?;
        if elements.next().is_some() {
            return Err("more than one document element".into());
        }
        let name = top.ty.name().unwrap_or_default();
        if !self.dtd.root_elements().contains(&name) {
            return Err(format!("`{name}` may not be the document element"));
        }
        for c in &doc.children {
            if !matches!(
                c.ty,
                NodeType::Element(_) | NodeType::Comment | NodeType::ProcessingInstruction
            ) {
                return Err(format!("{} under the root", c.ty));
            }
        }
        self.element(top)
    }

    fn element(&self, e: &DocNode) -> Result<(), String> {
        let name = e.ty.name().ok_or("element expected")?;
        let decl = self
            .dtd
            .element(name)
            .ok_or_else(|| format!("undeclared element `{name}`"))?;
        let declared: Vec<_> = self.dtd.attributes_of(name).collect();
        for a in &e.attributes {
            if !declared.iter().any(|d| &d.attribute == a) {
                return Err(format!("undeclared attribute `{a}` on `{name}`"));
            }
        }
        for d in declared.iter().filter(|d| d.is_required()) {
            if !e.attributes.contains(&d.attribute) {
                return Err(format!("`{name}` lacks required attribute `{}`", d.attribute));
            }
        }
        if e.children
            .windows(2)
            .any(|w| w[0].ty == NodeType::Text && w[1].ty == NodeType::Text)
        {
            return Err(format!("adjacent text nodes in `{name}`"));
        }
        let has_text = e.children.iter().any(|c| c.ty == NodeType::Text);
        let element_names = e
            .children
            .iter()
            .filter(|c| c.ty.is_element())
            .filter_map(|c| c.ty.name());
        match &decl.content {
            ElementContent::Regular(ContentModel::Empty) if !e.children.is_empty() => {
                return Err(format!("EMPTY element `{name}` has children"));
            }
            ElementContent::Regular(_) => {
                if has_text {
                    return Err(format!("text in element content of `{name}`"));
                }
                let word: String = element_names
                    .map(|n| {
                        self.symbols
                            .get(n)
                            .copied()
                            .ok_or_else(|| format!("undeclared element `{n}`"))
                    })
                    .collect::<Result<_, _>>()?;
                if !self.patterns[name].is_match(&word) {
                    return Err(format!("children of `{name}` do not match its content model"));
                }
            }
            ElementContent::Mixed(names) => {
                for n in element_names {
                    if !names.iter().any(|m| m == n) {
                        return Err(format!("`{n}` not allowed in mixed content of `{name}`"));
                    }
                }
            }
            ElementContent::Any => {}
        }
        for c in &e.children {
            match &c.ty {
                NodeType::Element(_) => self.element(c)?,
                NodeType::Text | NodeType::Comment | NodeType::ProcessingInstruction => {
                    if !c.children.is_empty() || !c.attributes.is_empty() {
                        return Err(format!("{} node with children", c.ty));
                    }
                }
                other => return Err(format!("{other} as a child of `{name}`")),
            }
        }
        Ok(())
    }
}

fn pattern(m: &ContentModel, symbols: &HashMap<&str, char>) -> String {
    match m {
        ContentModel::Empty => String::new(),
        ContentModel::Element(n) => regex::escape(&symbols[n.as_str()].to_string()),
        ContentModel::Seq(items) => items
            .iter()
            .map(|i| format!("(?:{})", pattern(i, symbols)))
            .collect(),
        ContentModel::Choice(items) => {
            let alts: Vec<String> = items.iter().map(|i| pattern(i, symbols)).collect();
            format!("(?:{})", alts.join("|"))
        }
        ContentModel::Opt(c) => format!("(?:{})?", pattern(c, symbols)),
        ContentModel::Star(c) => format!("(?:{})*", pattern(c, symbols)),
        ContentModel::Plus(c) => format!("(?:{})+", pattern(c, symbols)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(n: &str, children: Vec<DocNode>) -> DocNode {
        DocNode::element(n, vec![], children)
    }

    #[test]
    fn accepts_and_rejects() {
        let dtd = Dtd::parse(
            "<!ELEMENT r (a, b*)> <!ELEMENT a (#PCDATA | b)*> <!ELEMENT b EMPTY>
             <!ATTLIST b k CDATA #REQUIRED>",
        )
        .unwrap()
        .with_root_constraint(["r"])
        .unwrap();
        let v = Validator::new(&dtd);
        let b = || DocNode::element("b", vec!["k".into()], vec![]);
        let text = || DocNode::leaf(NodeType::Text);
        let ok = DocNode::root(vec![el("r", vec![el("a", vec![text(), b(), text()]), b()])]);
        assert_eq!(v.validate(&ok), Ok(()));
        let bad = [
            DocNode::root(vec![el("r", vec![b()])]),
            DocNode::root(vec![el("r", vec![el("a", vec![text(), text()])])]),
            DocNode::root(vec![el("r", vec![el("a", vec![]), el("b", vec![])])]),
            DocNode::root(vec![el("a", vec![])]),
            DocNode::root(vec![el("r", vec![el("a", vec![]), text()])]),
        ];
        for d in bad {
            assert!(v.validate(&d).is_err(), "{d}");
        }
    }
}
