//! Reader for the external-subset DTD syntax.
//!
//! Parameter entities are expanded textually: a reference in declaration
//! context pushes the replacement text (padded with one space on each side)
//! onto a stack of input frames, and the declaration grammar reads through
//! the stack transparently. References inside entity-value literals are
//! expanded eagerly when the entity is declared.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use super::{AttrDecl, ContentModel, Dtd, DtdError, ElementContent, ElementDecl};

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Directory against which external parameter entities resolve. `None`
    /// resolves against the working directory.
    pub base_dir: Option<PathBuf>,
}

pub fn parse_dtd(text: &str, options: &ParseOptions) -> Result<Dtd> {
    let mut parser = Parser::new(text, options.base_dir.clone());
    parser.markup_decls(false)?;
    let mut dtd = Dtd {
        elements: parser.elements,
        attrs: parser.attrs,
        root_constraint: None,
        warnings: parser.warnings,
    };
    dtd.finalize();
    Ok(dtd)
}

pub fn parse_dtd_file(path: &Path) -> Result<Dtd> {
    let text = std::fs::read_to_string(path).map_err(|source| DtdError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base_dir = path.parent().map(Path::to_path_buf);
    parse_dtd(&text, &ParseOptions { base_dir })
}

pub(super) fn parse_content_model(text: &str) -> Result<ContentModel> {
    let mut parser = Parser::new(text, None);
    let model = parser.particle()?;
    parser.skip_ws()?;
    if parser.peek().is_some() {
        return Err(parser.error("trailing input after content model"));
    }
    Ok(model)
}

struct Frame {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    entity: Option<String>,
    base_dir: Option<PathBuf>,
}

impl Frame {
    fn new(text: &str, entity: Option<String>, base_dir: Option<PathBuf>) -> Self {
        Frame {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            entity,
            base_dir,
        }
    }

    fn exhausted(&self) -> bool {
        self.pos >= self.chars.len()
    }
}

enum EntityDef {
    Internal(String),
    External {
        system: String,
        base_dir: Option<PathBuf>,
    },
}

const ATTRIBUTE_TYPES: [&str; 9] = [
    "CDATA", "ID", "IDREF", "IDREFS", "ENTITY", "ENTITIES", "NMTOKEN", "NMTOKENS", "NOTATION",
];

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == ':' || (c as u32) > 0x7f
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-' || c == '.' || c == '\u{b7}'
}

struct Parser {
    frames: Vec<Frame>,
    entities: HashMap<String, EntityDef>,
    elements: IndexMap<String, ElementDecl>,
    attrs: Vec<AttrDecl>,
    warnings: Vec<String>,
    warned_notation: bool,
}

type Result<T> = std::result::Result<T, DtdError>;

impl Parser {
    fn new(text: &str, base_dir: Option<PathBuf>) -> Self {
        Parser {
            frames: vec![Frame::new(text, None, base_dir)],
            entities: HashMap::new(),
            elements: IndexMap::new(),
            attrs: Vec::new(),
            warnings: Vec::new(),
            warned_notation: false,
        }
    }

    fn top(&self) -> &Frame {
        self.frames.last().expect("input stack is never empty")
    }

    fn pop_exhausted(&mut self) {
        while self.frames.len() > 1 && self.top().exhausted() {
            self.frames.pop();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.pop_exhausted();
        self.peek_raw()
    }

    /// Next character of the innermost frame, without leaving it.
    fn peek_raw(&self) -> Option<char> {
        let f = self.top();
        f.chars.get(f.pos).copied()
    }

    fn peek_nth_raw(&self, n: usize) -> Option<char> {
        let f = self.top();
        f.chars.get(f.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        self.pop_exhausted();
        self.bump_raw()
    }

    fn bump_raw(&mut self) -> Option<char> {
        let f = self.frames.last_mut().expect("input stack is never empty");
        let c = f.chars.get(f.pos).copied()?;
        f.pos += 1;
        if c == '\n' {
            f.line += 1;
            f.column = 1;
        } else {
            f.column += 1;
        }
        Some(c)
    }

    fn looking_at(&mut self, s: &str) -> bool {
        self.pop_exhausted();
        let f = self.top();
        s.chars()
            .enumerate()
            .all(|(k, c)| f.chars.get(f.pos + k) == Some(&c))
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.looking_at(s) {
            for _ in s.chars() {
                self.bump_raw();
            }
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            let found = match self.peek() {
                Some(c) => format!("`{c}`"),
                None => "end of input".to_string(),
            };
            Err(self.error(&format!("expected `{s}`, found {found}")))
        }
    }

    fn error(&self, message: &str) -> DtdError {
        let f = self.top();
        DtdError::Syntax {
            message: message.to_string(),
            line: f.line,
            column: f.column,
            entity: f.entity.clone(),
        }
    }

    /// Skips whitespace and expands parameter-entity references.
    fn skip_ws(&mut self) -> Result<()> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump_raw();
                }
                Some('%') if self.peek_nth_raw(1).is_some_and(is_name_start) => {
                    self.pe_reference()?;
                }
                _ => return Ok(()),
            }
        }
    }

    fn name(&mut self) -> Result<String> {
        match self.peek() {
            Some(c) if is_name_start(c) => {}
            Some(c) => return Err(self.error(&format!("expected a name, found `{c}`"))),
            None => return Err(self.error("expected a name, found end of input")),
        }
        let mut s = String::new();
        while let Some(c) = self.peek_raw().filter(|&c| is_name_char(c)) {
            s.push(c);
            self.bump_raw();
        }
        Ok(s)
    }

    fn nmtoken(&mut self) -> Result<String> {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| is_name_char(c)) {
            s.push(c);
            self.bump_raw();
        }
        if s.is_empty() {
            return Err(self.error("expected a name token"));
        }
        Ok(s)
    }

    fn pe_reference(&mut self) -> Result<()> {
        let (line, column) = (self.top().line, self.top().column);
        self.bump_raw(); // '%'
        let name = self.name()?;
        if !self.eat(";") {
            return Err(self.error(&format!("parameter entity reference `%{name}` lacks `;`")));
        }
        if self
            .frames
            .iter()
            .any(|f| f.entity.as_deref() == Some(name.as_str()))
        {
            return Err(DtdError::RecursiveEntity { name });
        }
        let (text, base_dir) = self.entity_text(&name, line, column)?;
        let padded = format!(" {text} ");
        self.frames.push(Frame::new(&padded, Some(name), base_dir));
        Ok(())
    }

    fn entity_text(&self, name: &str, line: usize, column: usize) -> Result<(String, Option<PathBuf>)> {
        match self.entities.get(name) {
            None => Err(DtdError::UndefinedEntity {
                name: name.to_string(),
                line,
                column,
            }),
            Some(EntityDef::Internal(text)) => Ok((text.clone(), self.top().base_dir.clone())),
            Some(EntityDef::External { system, base_dir }) => {
                let path = match base_dir {
                    Some(dir) => dir.join(system),
                    None => PathBuf::from(system),
                };
                let text = std::fs::read_to_string(&path).map_err(|source| DtdError::ExternalEntity {
                    name: name.to_string(),
                    path: path.clone(),
                    source,
                })?;
                Ok((
                    strip_text_decl(&text).to_string(),
                    path.parent().map(Path::to_path_buf),
                ))
            }
        }
    }

    /// Reads declarations until end of input, or until `]]>` when inside an
    /// INCLUDE section.
    fn markup_decls(&mut self, in_section: bool) -> Result<()> {
        loop {
            self.skip_ws()?;
            if self.peek().is_none() {
                if in_section {
                    return Err(self.error("unterminated conditional section"));
                }
                return Ok(());
            }
            if self.eat("<!--") {
                self.skip_until("-->", "comment")?;
            } else if self.eat("<?") {
                self.skip_until("?>", "processing instruction")?;
            } else if self.eat("<![") {
                self.conditional_section()?;
            } else if in_section && self.eat("]]>") {
                return Ok(());
            } else if self.eat("<!ELEMENT") {
                self.element_decl()?;
            } else if self.eat("<!ATTLIST") {
                self.attlist_decl()?;
            } else if self.eat("<!ENTITY") {
                self.entity_decl()?;
            } else if self.eat("<!NOTATION") {
                self.skip_declaration()?;
                if !self.warned_notation {
                    self.warnings
                        .push("NOTATION declarations are skipped".to_string());
                    self.warned_notation = true;
                }
            } else {
                return Err(self.error("expected a markup declaration"));
            }
        }
    }

    fn skip_until(&mut self, end: &str, what: &str) -> Result<()> {
        loop {
            if self.eat(end) {
                return Ok(());
            }
            if self.bump().is_none() {
                return Err(self.error(&format!("unterminated {what}")));
            }
        }
    }

    fn skip_declaration(&mut self) -> Result<()> {
        loop {
            match self.bump() {
                Some('>') => return Ok(()),
                Some(q @ ('"' | '\'')) => {
                    while self.bump() != Some(q) {
                        if self.peek().is_none() {
                            return Err(self.error("unterminated literal"));
                        }
                    }
                }
                Some(_) => {}
                None => return Err(self.error("unterminated declaration")),
            }
        }
    }

    fn conditional_section(&mut self) -> Result<()> {
        self.skip_ws()?;
        let keyword = self.name()?;
        self.skip_ws()?;
        self.expect("[")?;
        match keyword.as_str() {
            "INCLUDE" => self.markup_decls(true),
            "IGNORE" => {
                let mut depth = 1;
                while depth > 0 {
                    if self.eat("<![") {
                        depth += 1;
                    } else if self.eat("]]>") {
                        depth -= 1;
                    } else if self.bump().is_none() {
                        return Err(self.error("unterminated IGNORE section"));
                    }
                }
                Ok(())
            }
            other => Err(self.error(&format!(
                "conditional section keyword must be INCLUDE or IGNORE, found `{other}`"
            ))),
        }
    }

    fn element_decl(&mut self) -> Result<()> {
        self.skip_ws()?;
        let line = self.top().line;
        let name = self.name()?;
        self.skip_ws()?;
        let content = if self.eat("(") {
            self.group_content()?
        } else {
            match self.name()?.as_str() {
                "EMPTY" => ElementContent::Regular(ContentModel::Empty),
                "ANY" => ElementContent::Any,
                other => {
                    return Err(self.error(&format!(
                        "expected EMPTY, ANY or a content group, found `{other}`"
                    )))
                }
            }
        };
        self.skip_ws()?;
        self.expect(">")?;
        if self.elements.contains_key(&name) {
            return Err(DtdError::DuplicateElement { name, line });
        }
        self.elements.insert(
            name.clone(),
            ElementDecl {
                name,
                content,
                synthetic: false,
            },
        );
        Ok(())
    }

    /// After the opening parenthesis of a content specification.
    fn group_content(&mut self) -> Result<ElementContent> {
        self.skip_ws()?;
        if !self.eat("#PCDATA") {
            return self.group_rest().map(ElementContent::Regular);
        }
        let mut names: Vec<String> = Vec::new();
        loop {
            self.skip_ws()?;
            if self.eat(")") {
                let starred = self.eat("*");
                if !starred && !names.is_empty() {
                    return Err(self.error("mixed content listing element names must end with `)*`"));
                }
                return Ok(ElementContent::Mixed(names));
            }
            self.expect("|")?;
            self.skip_ws()?;
            let n = self.name()?;
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }

    /// Content particles up to and including the closing parenthesis and
    /// its occurrence indicator.
    fn group_rest(&mut self) -> Result<ContentModel> {
        self.skip_ws()?;
        if self.eat(")") {
            return Ok(self.occurrence(ContentModel::Empty));
        }
        let mut items = vec![self.particle()?];
        let mut separator: Option<char> = None;
        loop {
            self.skip_ws()?;
            match self.bump() {
                Some(')') => break,
                Some(c @ ('|' | ',')) => {
                    if separator.is_some_and(|s| s != c) {
                        return Err(self.error("cannot mix `,` and `|` in one group"));
                    }
                    separator = Some(c);
                    items.push(self.particle()?);
                }
                Some(c) => return Err(self.error(&format!("unexpected `{c}` in content model"))),
                None => return Err(self.error("unterminated content model")),
            }
        }
        let group = if separator == Some('|') {
            ContentModel::choice(items)
        } else {
            ContentModel::seq(items)
        };
        Ok(self.occurrence(group))
    }

    fn particle(&mut self) -> Result<ContentModel> {
        self.skip_ws()?;
        if self.eat("(") {
            self.group_rest()
        } else {
            let n = self.name()?;
            Ok(self.occurrence(ContentModel::Element(n)))
        }
    }

    fn occurrence(&mut self, m: ContentModel) -> ContentModel {
        match self.peek_raw() {
            Some('?') => {
                self.bump_raw();
                m.opt()
            }
            Some('*') => {
                self.bump_raw();
                m.star()
            }
            Some('+') => {
                self.bump_raw();
                m.plus()
            }
            _ => m,
        }
    }

    fn attlist_decl(&mut self) -> Result<()> {
        self.skip_ws()?;
        let element = self.name()?;
        loop {
            self.skip_ws()?;
            if self.eat(">") {
                return Ok(());
            }
            let attribute = self.name()?;
            self.skip_ws()?;
            let value_type = if self.eat("(") {
                self.enumeration()?
            } else {
                let kw = self.name()?;
                if !ATTRIBUTE_TYPES.contains(&kw.as_str()) {
                    return Err(self.error(&format!("unknown attribute type `{kw}`")));
                }
                if kw == "NOTATION" {
                    self.skip_ws()?;
                    self.expect("(")?;
                    format!("NOTATION {}", self.enumeration()?)
                } else {
                    kw
                }
            };
            self.skip_ws()?;
            let default = if self.eat("#REQUIRED") {
                "#REQUIRED".to_string()
            } else if self.eat("#IMPLIED") {
                "#IMPLIED".to_string()
            } else if self.eat("#FIXED") {
                self.skip_ws()?;
                format!("#FIXED \"{}\"", self.literal(false)?)
            } else {
                format!("\"{}\"", self.literal(false)?)
            };
            self.attrs.push(AttrDecl {
                element: element.clone(),
                attribute,
                value_type,
                default,
            });
        }
    }

    /// After `(`; returns the normalized `(a|b|c)`.
    fn enumeration(&mut self) -> Result<String> {
        let mut tokens = Vec::new();
        loop {
            self.skip_ws()?;
            tokens.push(self.nmtoken()?);
            self.skip_ws()?;
            if self.eat(")") {
                return Ok(format!("({})", tokens.join("|")));
            }
            self.expect("|")?;
        }
    }

    fn entity_decl(&mut self) -> Result<()> {
        self.skip_ws()?;
        let parameter = if self.peek() == Some('%') {
            self.bump_raw();
            self.skip_ws()?;
            true
        } else {
            false
        };
        let name = self.name()?;
        self.skip_ws()?;
        let def = match self.peek() {
            Some('"' | '\'') => EntityDef::Internal(self.literal(true)?),
            _ => {
                let system = match self.name()?.as_str() {
                    "SYSTEM" => {
                        self.skip_ws()?;
                        self.literal(false)?
                    }
                    "PUBLIC" => {
                        self.skip_ws()?;
                        self.literal(false)?;
                        self.skip_ws()?;
                        self.literal(false)?
                    }
                    other => {
                        return Err(self.error(&format!(
                            "expected an entity value, SYSTEM or PUBLIC, found `{other}`"
                        )))
                    }
                };
                self.skip_ws()?;
                if !parameter && self.looking_at("NDATA") {
                    self.name()?;
                    self.skip_ws()?;
                    self.name()?;
                }
                EntityDef::External {
                    system,
                    base_dir: self.top().base_dir.clone(),
                }
            }
        };
        self.skip_ws()?;
        self.expect(">")?;
        if parameter {
            self.entities.entry(name).or_insert(def);
        }
        Ok(())
    }

    /// A quoted literal read from the innermost frame. Entity values expand
    /// parameter-entity and character references; other literals are taken
    /// verbatim.
    fn literal(&mut self, entity_value: bool) -> Result<String> {
        self.pop_exhausted();
        let quote = match self.peek_raw() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.error("expected a quoted literal")),
        };
        self.bump_raw();
        let mut out = String::new();
        loop {
            match self.peek_raw() {
                None => return Err(self.error("unterminated literal")),
                Some(c) if c == quote => {
                    self.bump_raw();
                    return Ok(out);
                }
                Some('%') if entity_value => {
                    let (line, column) = (self.top().line, self.top().column);
                    self.bump_raw();
                    let name = self.name()?;
                    if self.peek_raw() != Some(';') {
                        return Err(self.error(&format!("parameter entity reference `%{name}` lacks `;`")));
                    }
                    self.bump_raw();
                    if self
                        .frames
                        .iter()
                        .any(|f| f.entity.as_deref() == Some(name.as_str()))
                    {
                        return Err(DtdError::RecursiveEntity { name });
                    }
                    let (text, _) = self.entity_text(&name, line, column)?;
                    out.push_str(&text);
                }
                Some('&') if entity_value && self.peek_nth_raw(1) == Some('#') => {
                    self.bump_raw();
                    self.bump_raw();
                    let mut digits = String::new();
                    while let Some(c) = self.peek_raw().filter(|&c| c != ';' && c != quote) {
                        digits.push(c);
                        self.bump_raw();
                    }
                    if self.bump_raw() != Some(';') {
                        return Err(self.error("unterminated character reference"));
                    }
                    let code = match digits.strip_prefix('x') {
                        Some(hex) => u32::from_str_radix(hex, 16),
                        None => digits.parse(),
                    };
                    match code.ok().and_then(char::from_u32) {
                        Some(c) => out.push(c),
                        None => return Err(self.error(&format!("invalid character reference `&#{digits};`"))),
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.bump_raw();
                }
            }
        }
    }
}

fn strip_text_decl(text: &str) -> &str {
    let trimmed = text.trim_start_matches('\u{feff}');
    if trimmed.starts_with("<?xml") {
        if let Some(end) = trimmed.find("?>") {
            return &trimmed[end + 2..];
        }
    }
    trimmed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dtd> {
        parse_dtd(text, &ParseOptions::default())
    }

    #[test]
    fn comments_and_pis_are_skipped() {
        let dtd = parse("<?xml version='1.0'?><!-- <!ELEMENT fake EMPTY> --><!ELEMENT a EMPTY>").unwrap();
        assert_eq!(dtd.elements.len(), 1);
    }

    #[test]
    fn conditional_sections() {
        let dtd = parse(
            r#"<!ENTITY % draft "IGNORE">
               <![%draft;[ <!ELEMENT gone EMPTY> <![INCLUDE[ <!ELEMENT nested EMPTY> ]]> ]]>
               <![ INCLUDE [ <!ELEMENT kept EMPTY> ]]>"#,
        )
        .unwrap();
        assert_eq!(dtd.elements.keys().collect::<Vec<_>>(), ["kept"]);
    }

    #[test]
    fn nested_entities_and_char_refs() {
        let dtd = parse(
            r#"<!ENTITY % a "x">
               <!ENTITY % ab "%a; | y">
               <!ENTITY % open "&#40;">
               <!ELEMENT x EMPTY> <!ELEMENT y EMPTY>
               <!ELEMENT r %open;%ab;)*>"#,
        )
        .unwrap();
        assert_eq!(
            dtd.element("r").unwrap().content,
            ElementContent::Regular(
                ContentModel::Choice(vec![ContentModel::element("x"), ContentModel::element("y")]).star()
            )
        );
    }

    #[test]
    fn first_entity_declaration_binds() {
        let dtd = parse(
            r#"<!ENTITY % c "(a)"> <!ENTITY % c "(b)">
               <!ELEMENT r %c;> <!ELEMENT a EMPTY>"#,
        )
        .unwrap();
        assert_eq!(
            dtd.element("r").unwrap().content,
            ElementContent::Regular(ContentModel::element("a"))
        );
    }

    #[test]
    fn undefined_entity_reports_position() {
        let err = parse("<!ELEMENT a EMPTY>\n<!ELEMENT b (%nope;)>").unwrap_err();
        match err {
            DtdError::UndefinedEntity { name, line, .. } => {
                assert_eq!(name, "nope");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn recursive_entity_is_rejected() {
        // a self-reference through an external entity file
        let dir = std::env::temp_dir().join(format!("xptype-rec-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("self.ent"), "%self;").unwrap();
        let err = parse_dtd(
            r#"<!ENTITY % self SYSTEM "self.ent"> %self;"#,
            &ParseOptions {
                base_dir: Some(dir.clone()),
            },
        )
        .unwrap_err();
        assert!(matches!(err, DtdError::RecursiveEntity { ref name } if name == "self"));
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn missing_external_entity_is_an_error() {
        let err = parse_dtd(
            r#"<!ENTITY % ext SYSTEM "does-not-exist.ent"> %ext;"#,
            &ParseOptions {
                base_dir: Some(std::env::temp_dir()),
            },
        )
        .unwrap_err();
        assert!(matches!(err, DtdError::ExternalEntity { .. }));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse("<!ELEMENT a EMPTY>\n  <!ELEMENT b (c, d | e)>").unwrap_err();
        match err {
            DtdError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 10);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("<!ELEMENT a (#PCDATA | b)>").is_err());
        assert!(parse("<!ELEMENT a FOO>").is_err());
        assert!(parse("<!BOGUS>").is_err());
    }

    #[test]
    fn attlist_forms() {
        let dtd = parse(
            r#"<!ELEMENT e EMPTY>
               <!ATTLIST e
                 a CDATA #IMPLIED
                 b (x | y) "x"
                 c ID #REQUIRED
                 d CDATA #FIXED 'v'
                 n NOTATION (p|q) #IMPLIED>
               <!NOTATION p SYSTEM "p">"#,
        )
        .unwrap();
        let got: Vec<(&str, &str, &str)> = dtd
            .attrs
            .iter()
            .map(|a| (a.attribute.as_str(), a.value_type.as_str(), a.default.as_str()))
            .collect();
        assert_eq!(
            got,
            [
                ("a", "CDATA", "#IMPLIED"),
                ("b", "(x|y)", "\"x\""),
                ("c", "ID", "#REQUIRED"),
                ("d", "CDATA", "#FIXED \"v\""),
                ("n", "NOTATION (p|q)", "#IMPLIED"),
            ]
        );
        assert!(dtd.warnings.iter().any(|w| w.contains("NOTATION")));
    }

    #[test]
    fn pcdata_only() {
        let dtd = parse("<!ELEMENT t (#PCDATA)> <!ELEMENT u (#PCDATA)*>").unwrap();
        assert_eq!(dtd.element("t").unwrap().content, ElementContent::Mixed(vec![]));
        assert_eq!(dtd.element("u").unwrap().content, ElementContent::Mixed(vec![]));
    }
}
