use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;

use crate::dtd::{ContentModel, Dtd, ElementContent};
use crate::relalg::NodeType;

use super::document::DocNode;

/// Where comments and processing instructions are placed among siblings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Interleave {
    None,
    /// At most one comment or PI in every gap between siblings.
    All,
    /// As `All`, except among the children of a node that has a text child.
    AwayFromText,
}

#[derive(Clone, Debug)]
pub struct EnumConfig {
    /// Bound on the number of nodes, counting the root and attributes.
    pub max_nodes: usize,
    pub interleave: Interleave,
    /// Enumeration stops, flagged as truncated, after this many documents.
    pub max_documents: usize,
}

impl EnumConfig {
    pub fn new(max_nodes: usize, interleave: Interleave) -> Self {
        EnumConfig {
            max_nodes,
            interleave,
            max_documents: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub documents: Vec<DocNode>,
    /// Set when `max_documents` cut the enumeration short.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Sym {
    Elem(String),
    Text,
}

/// Every valid document with at most `config.max_nodes` nodes.
pub fn enumerate_documents(dtd: &Dtd, config: &EnumConfig) -> Enumeration {
    let mut g = Generator {
        dtd,
        config,
        trees: HashMap::new(),
        truncated: false,
    };
    let mut documents = Vec::new();
    let roots: Vec<String> = dtd.root_elements().into_iter().map(String::from).collect();
    for total in 2..=config.max_nodes {
        for r in &roots {
            let word = [Sym::Elem(r.clone())];
            let gaps = config.interleave != Interleave::None;
            let mut out = Vec::new();
            g.forests(&word, 0, gaps, total - 1, &mut Vec::new(), &mut out);
            for children in out {
                if documents.len() >= config.max_documents {
                    g.truncated = true;
                    break;
                }
                documents.push(DocNode::root(children));
            }
        }
    }
    Enumeration {
        documents,
        truncated: g.truncated,
    }
}

struct Generator<'a> {
    dtd: &'a Dtd,
    config: &'a EnumConfig,
    trees: HashMap<(String, usize), Rc<Vec<DocNode>>>,
    truncated: bool,
}

impl Generator<'_> {
    /// All `name` elements with exactly `size` nodes.
    fn trees(&mut self, name: &str, size: usize) -> Rc<Vec<DocNode>> {
        let key = (name.to_string(), size);
        if let Some(t) = self.trees.get(&key) {
            return t.clone();
        }
        let mut out = Vec::new();
        let decls: Vec<(String, bool)> = self
            .dtd
            .attributes_of(name)
            .map(|a| (a.attribute.clone(), a.is_required()))
            .collect();
        let optional: Vec<&String> = decls.iter().filter(|(_, r)| !r).map(|(n, _)| n).collect();
        for mask in 0u32..(1 << optional.len()) {
            let mut attrs: Vec<String> = decls.iter().filter(|(_, r)| *r).map(|(n, _)| n.clone()).collect();
            attrs.extend(
                optional
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, n)| (*n).clone()),
            );
            attrs.sort();
            let Some(content_size) = size.checked_sub(1 + attrs.len()) else {
                continue;
            };
            for children in self.content(name, content_size) {
                if out.len() >= self.config.max_documents {
                    self.truncated = true;
                    break;
                }
                out.push(DocNode::element(name, attrs.clone(), children));
            }
        }
        let out = Rc::new(out);
        self.trees.insert(key, out.clone());
        out
    }

    /// Child sequences of a `name` element with exactly `size` nodes.
    fn content(&mut self, name: &str, size: usize) -> Vec<Vec<DocNode>> {
        let content = &self.dtd.element(name).expect("declared").content;
        if *content == ElementContent::Regular(ContentModel::Empty) {
            return if size == 0 { vec![vec![]] } else { vec![] };
        }
        // text, comment, text is the only way two text nodes are siblings
        let split_text = self.config.interleave == Interleave::All;
        let words: Vec<Vec<Sym>> = match content {
            ElementContent::Regular(m) => words(m, size)
                .into_iter()
                .map(|w| w.into_iter().map(Sym::Elem).collect())
                .collect(),
            ElementContent::Mixed(names) => mixed_words(names, size, split_text),
            ElementContent::Any => {
                let names: Vec<String> = self.dtd.elements.keys().cloned().collect();
                mixed_words(&names, size, split_text)
            }
        };
        let mut out = Vec::new();
        for w in words {
            let gaps = match self.config.interleave {
                Interleave::None => false,
                Interleave::All => true,
                Interleave::AwayFromText => !w.contains(&Sym::Text),
            };
            self.forests(&w, 0, gaps, size, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Extends `current` with the gap before `word[idx]` and the rest of the
    /// word, using exactly `budget` more nodes.
    fn forests(
        &mut self,
        word: &[Sym],
        idx: usize,
        gaps: bool,
        budget: usize,
        current: &mut Vec<DocNode>,
        out: &mut Vec<Vec<DocNode>>,
    ) {
        let fillers: &[Option<NodeType>] = if gaps {
            &[
                None,
                Some(NodeType::Comment),
                Some(NodeType::ProcessingInstruction),
            ]
        } else {
            &[None]
        };
        let between_texts = idx > 0 && word.get(idx - 1..=idx) == Some(&[Sym::Text, Sym::Text][..]);
        for filler in fillers {
            if filler.is_none() && between_texts {
                continue;
            }
            let mut budget = budget;
            if let Some(t) = filler {
                if budget == 0 {
                    continue;
                }
                budget -= 1;
                current.push(DocNode::leaf(t.clone()));
            }
            self.symbol(word, idx, gaps, budget, current, out);
            if filler.is_some() {
                current.pop();
            }
        }
    }

    fn symbol(
        &mut self,
        word: &[Sym],
        idx: usize,
        gaps: bool,
        budget: usize,
        current: &mut Vec<DocNode>,
        out: &mut Vec<Vec<DocNode>>,
    ) {
        if out.len() >= self.config.max_documents {
            self.truncated = true;
            return;
        }
        if idx == word.len() {
            if budget == 0 {
                out.push(current.clone());
            }
            return;
        }
        let rest = word.len() - idx - 1;
        if budget < 1 + rest {
            return;
        }
        match &word[idx] {
            Sym::Text => {
                current.push(DocNode::leaf(NodeType::Text));
                self.forests(word, idx + 1, gaps, budget - 1, current, out);
                current.pop();
            }
            Sym::Elem(name) => {
                for size in 1..=budget - rest {
                    let trees = self.trees(name, size);
                    for t in trees.iter() {
                        current.push(t.clone());
                        self.forests(word, idx + 1, gaps, budget - size, current, out);
                        current.pop();
                    }
                }
            }
        }
    }
}

/// Words of the content language with at most `max` symbols.
pub fn words(model: &ContentModel, max: usize) -> BTreeSet<Vec<String>> {
    let concat = |a: &BTreeSet<Vec<String>>, b: &BTreeSet<Vec<String>>| {
        let mut out = BTreeSet::new();
        for u in a {
            for v in b {
                if u.len() + v.len() <= max {
                    out.insert(u.iter().chain(v).cloned().collect::<Vec<_>>());
                }
            }
        }
        out
    };
    let star = |c: &ContentModel| {
        let base = words(c, max);
        let mut all: BTreeSet<Vec<String>> = [vec![]].into();
        let mut frontier = all.clone();
        loop {
            let next: BTreeSet<_> = concat(&frontier, &base).difference(&all).cloned().collect();
            if next.is_empty() {
                return all;
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
    };
    match model {
        ContentModel::Empty => [vec![]].into(),
        ContentModel::Element(n) if max >= 1 => [vec![n.clone()]].into(),
        ContentModel::Element(_) => BTreeSet::new(),
        ContentModel::Seq(items) => items
            .iter()
            .fold([vec![]].into(), |acc, item| concat(&acc, &words(item, max))),
        ContentModel::Choice(items) => items.iter().flat_map(|i| words(i, max)).collect(),
        ContentModel::Opt(c) => {
            let mut w = words(c, max);
            w.insert(vec![]);
            w
        }
        ContentModel::Star(c) => star(c),
        ContentModel::Plus(c) => concat(&words(c, max), &star(c)),
    }
}

/// Sequences over text and `names`. Two text symbols may only be adjacent
/// when `split_text` is set; a comment or PI then goes between them.
fn mixed_words(names: &[String], max: usize, split_text: bool) -> Vec<Vec<Sym>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            if split_text || w.last() != Some(&Sym::Text) {
                let mut t = w.clone();
                t.push(Sym::Text);
                next.push(t);
            }
            for n in names {
                let mut t = w.clone();
                t.push(Sym::Elem(n.clone()));
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(dtd: &str, roots: &[&str], max: usize) -> usize {
        let dtd = Dtd::parse(dtd)
            .unwrap()
            .with_root_constraint(roots.iter().copied())
            .unwrap();
        enumerate_documents(&dtd, &EnumConfig::new(max, Interleave::None))
            .documents
            .len()
    }

    #[test]
    fn small_counts() {
        assert_eq!(count("<!ELEMENT a EMPTY>", &["a"], 2), 1);
        assert_eq!(count("<!ELEMENT a (b?)> <!ELEMENT b EMPTY>", &["a"], 3), 2);
        assert_eq!(count("<!ELEMENT a (b*)> <!ELEMENT b EMPTY>", &["a"], 4), 3);
    }

    #[test]
    fn attributes_and_comments() {
        let dtd = Dtd::parse("<!ELEMENT a EMPTY> <!ATTLIST a x CDATA #IMPLIED y CDATA #REQUIRED>")
            .unwrap()
            .with_root_constraint(["a"])
            .unwrap();
        let docs = enumerate_documents(&dtd, &EnumConfig::new(4, Interleave::None)).documents;
        let shown: Vec<String> = docs.iter().map(|d| d.to_string()).collect();
        assert_eq!(shown, ["#root(a[@y])", "#root(a[@x @y])"]);
        let docs = enumerate_documents(&dtd, &EnumConfig::new(4, Interleave::All)).documents;
        // EMPTY elements take no comments; the root takes one before or after
        assert_eq!(docs.len(), 1 + 1 + 4);
    }

    #[test]
    fn truncation_is_flagged() {
        let dtd = Dtd::parse("<!ELEMENT a (a*)>").unwrap();
        let mut cfg = EnumConfig::new(8, Interleave::All);
        cfg.max_documents = 10;
        let e = enumerate_documents(&dtd, &cfg);
        assert!(e.truncated);
        assert_eq!(e.documents.len(), 10);
    }

    #[test]
    fn mixed_has_no_adjacent_text() {
        let w = mixed_words(&["b".to_string()], 3, false);
        assert!(w
            .iter()
            .all(|w| w.windows(2).all(|p| p != [Sym::Text, Sym::Text])));
        assert!(w.contains(&vec![Sym::Text, Sym::Elem("b".into()), Sym::Text]));
    }

    #[test]
    fn text_is_split_by_comments() {
        let dtd = Dtd::parse("<!ELEMENT a (#PCDATA)>")
            .unwrap()
            .with_root_constraint(["a"])
            .unwrap();
        let docs = enumerate_documents(&dtd, &EnumConfig::new(5, Interleave::All)).documents;
        let shown: Vec<String> = docs.iter().map(|d| d.to_string()).collect();
        assert!(shown.contains(&"#root(a(#text, #comment, #text))".to_string()));
        assert!(!shown.iter().any(|d| d.contains("#text, #text")));
        let docs = enumerate_documents(&dtd, &EnumConfig::new(5, Interleave::AwayFromText)).documents;
        assert!(docs.iter().all(|d| !d.to_string().contains("#text, #comment")));
    }

    #[test]
    fn bounded_words() {
        let m = ContentModel::parse("(a, b*)").unwrap();
        let w: Vec<String> = words(&m, 3).into_iter().map(|w| w.concat()).collect();
        assert_eq!(w, ["a", "ab", "abb"]);
    }
}
