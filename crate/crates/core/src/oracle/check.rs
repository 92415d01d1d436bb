use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::absint::{AbstractResult, Analyzer};
use crate::relalg::{NodeType, Relation};
use crate::xpath::ast::Expr;
use crate::xpath::{parse_expr, XPathError, XPathExpr};

use super::document::{DocNode, Document};
use super::eval::{EvalError, Evaluator};
use super::validate::Validator;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("`{0}`: {1}")]
    Parse(String, XPathError),
    #[error("`{0}` is not interpretable: {1}")]
    Undefined(String, String),
    #[error("`{0}`: {1}")]
    Eval(String, EvalError),
    #[error("enumerated document {0} is invalid: {1}")]
    Invalid(String, String),
    #[error("document {0} has a node type outside the universe")]
    ForeignType(String),
}

/// A concretely selected node whose type pair the analysis missed.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub expression: String,
    pub document: String,
    pub context: String,
    pub context_type: String,
    pub selected: String,
    pub selected_type: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Coverage {
    pub expression: String,
    pub expanded: String,
    /// Pairs in the computed relation.
    pub pairs: usize,
    /// Pairs observed on some enumerated document.
    pub witnessed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub documents: usize,
    pub evaluations: usize,
    /// Total number of missed (context, selected) node pairs.
    pub violations: usize,
    /// The first few violations in detail.
    pub counterexamples: Vec<Counterexample>,
    pub coverage: Vec<Coverage>,
}

impl CompletenessReport {
    pub fn witnessed_fraction(&self) -> f64 {
        let (w, p) = self
            .coverage
            .iter()
            .fold((0, 0), |(w, p), c| (w + c.witnessed, p + c.pairs));
        if p == 0 {
            1.0
        } else {
            w as f64 / p as f64
        }
    }
}

const MAX_REPORTED: usize = 50;

struct Entry {
    source: String,
    ast: Expr,
    relation: Relation,
}

#[derive(Default)]
struct Partial {
    evaluations: usize,
    violations: usize,
    counterexamples: Vec<Counterexample>,
    witnessed: Vec<HashSet<(usize, usize)>>,
}

/// Evaluates every pool expression from every node of every document and
/// reports selected nodes whose type pair is missing from the computed
/// relation. Documents are validated first; the work is split across threads.
pub fn check_completeness(
    analyzer: &Analyzer,
    pool: &[&str],
    documents: &[DocNode],
) -> Result<CompletenessReport, CheckError> {
    let mut entries = Vec::new();
    for &source in pool {
        let ast = parse_expr(source).map_err(|e| CheckError::Parse(source.into(), e))?;
        let xp = XPathExpr::from_expr(&ast, source);
        let relation = match analyzer.interpret(&xp).result {
            AbstractResult::Defined(r) => r,
            AbstractResult::Undefined(why) => return Err(CheckError::Undefined(source.into(), why)),
        };
        entries.push(Entry {
            source: source.to_string(),
            ast,
            relation,
        });
    }
    let validator = Validator::new(&analyzer.dtd);
    for d in documents {
        validator
            .validate(d)
            .map_err(|e| CheckError::Invalid(d.to_string(), e))?;
    }

    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(16);
    let chunk = documents.len().div_ceil(workers).max(1);
    let partials: Vec<Result<Partial, CheckError>> = thread::scope(|s| {
        let handles: Vec<_> = documents
            .chunks(chunk)
            .map(|docs| s.spawn(|| check_shard(analyzer, &entries, docs)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut total = Partial {
        witnessed: vec![HashSet::new(); entries.len()],
        ..Partial::default()
    };
    for p in partials {
        let p = p?;
        total.evaluations += p.evaluations;
        total.violations += p.violations;
        for c in p.counterexamples {
            if total.counterexamples.len() < MAX_REPORTED {
                total.counterexamples.push(c);
            }
        }
        for (t, w) in total.witnessed.iter_mut().zip(p.witnessed) {
            t.extend(w);
        }
    }
    let coverage = entries
        .iter()
        .zip(&total.witnessed)
        .map(|(e, w)| Coverage {
            expression: e.source.clone(),
            expanded: e.ast.to_string(),
            pairs: e.relation.len(),
            witnessed: w.len(),
        })
        .collect();
    Ok(CompletenessReport {
        documents: documents.len(),
        evaluations: total.evaluations,
        violations: total.violations,
        counterexamples: total.counterexamples,
        coverage,
    })
}

fn check_shard(analyzer: &Analyzer, entries: &[Entry], docs: &[DocNode]) -> Result<Partial, CheckError> {
    let universe = analyzer.universe();
    let mut out = Partial {
        witnessed: vec![HashSet::new(); entries.len()],
        ..Partial::default()
    };
    for tree in docs {
        let doc = Document::new(tree.clone());
        let types: Vec<usize> = doc
            .nodes
            .iter()
            .map(|n| universe.index_of(&n.ty))
            .collect::<Option<_>>()
            .ok_or_else(|| CheckError::ForeignType(tree.to_string()))?;
        let ev = Evaluator::new(&doc, &analyzer.dtd);
        for (k, e) in entries.iter().enumerate() {
            for ctx in 0..doc.len() {
                out.evaluations += 1;
                let selected = ev
                    .select(&e.ast, ctx)
                    .map_err(|err| CheckError::Eval(e.source.clone(), err))?;
                for n in selected {
                    let pair = (types[ctx], types[n]);
                    if e.relation.contains_index(pair.0, pair.1) {
                        out.witnessed[k].insert(pair);
                        continue;
                    }
                    out.violations += 1;
                    if out.counterexamples.len() < MAX_REPORTED {
                        out.counterexamples.push(Counterexample {
                            expression: e.source.clone(),
                            document: tree.to_string(),
                            context: doc.path(ctx),
                            context_type: doc.ty(ctx).to_string(),
                            selected: doc.path(n),
                            selected_type: doc.ty(n).to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Adjacent child pairs seen under each element type, ignoring comments and
/// processing instructions between them.
pub fn observed_next_siblings(documents: &[DocNode]) -> BTreeMap<String, BTreeSet<(String, String)>> {
    fn walk(n: &DocNode, out: &mut BTreeMap<String, BTreeSet<(String, String)>>) {
        if let Some(name) = n.ty.name().filter(|_| n.ty.is_element()) {
            let kids: Vec<&NodeType> = n
                .children
                .iter()
                .map(|c| &c.ty)
                .filter(|t| !matches!(t, NodeType::Comment | NodeType::ProcessingInstruction))
                .collect();
            let entry = out.entry(name.to_string()).or_default();
            for w in kids.windows(2) {
                entry.insert((w[0].to_string(), w[1].to_string()));
            }
        }
        for c in &n.children {
            walk(c, out);
        }
    }
    let mut out = BTreeMap::new();
    for d in documents {
        walk(d, &mut out);
    }
    out
}
