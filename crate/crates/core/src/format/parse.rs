use std::collections::{HashMap, HashSet};

use serde_json::{Map, Value};

use super::{Diagnostic, DiagnosticCode, ParseError, Severity};
use crate::location::DocPath;
use crate::model::{
    ArchStyle, Category, DecisionTree, Meta, Path, PathSection, Pattern, PatternSource, Question,
    QuestionFlow, QuestionKind, DISCOVERY_AND_COMMUNICATION,
};

/// Everything the parser learned about a document.
#[derive(Debug, Clone)]
pub struct ParseReport {
    /// Present only when no error diagnostics were raised.
    pub tree: Option<DecisionTree>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parse a tree document, keeping warnings alongside the result.
pub fn parse_document(doc: &str) -> ParseReport {
    let mut checker = Checker::default();
    let value: Value = match serde_json::from_str(doc) {
        Ok(v) => v,
        Err(e) => {
            checker.error(
                DiagnosticCode::Syntax,
                &DocPath::root(),
                format!("line {} column {}: {e}", e.line(), e.column()),
            );
            return checker.finish(None);
        }
    };

    let tree = checker.tree(&value);
    if checker.has_errors() {
        return checker.finish(None);
    }
    let tree = tree.expect("schema pass without errors yields a tree");
    check_structure(&tree, &mut checker);
    checker
        .diagnostics
        .sort_by(|a, b| (&a.location, a.code).cmp(&(&b.location, b.code)));
    if checker.has_errors() {
        checker.finish(None)
    } else {
        checker.finish(Some(tree))
    }
}

/// Parse a tree document; any error diagnostic rejects it.
pub fn parse_tree(doc: &str) -> Result<DecisionTree, ParseError> {
    let report = parse_document(doc);
    match report.tree {
        Some(tree) => Ok(tree),
        None => Err(ParseError {
            diagnostics: report.diagnostics,
        }),
    }
}

#[derive(Default)]
struct Checker {
    diagnostics: Vec<Diagnostic>,
}

impl Checker {
    fn error(&mut self, code: DiagnosticCode, location: &DocPath, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            location: location.clone(),
        });
    }

    fn warning(&mut self, code: DiagnosticCode, location: &DocPath, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location: location.clone(),
        });
    }

    fn has_errors(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error)
    }

    fn finish(self, tree: Option<DecisionTree>) -> ParseReport {
        ParseReport {
            tree,
            diagnostics: self.diagnostics,
        }
    }

    /// Checks that `value` is an object with exactly `fields`.
    fn object<'v>(
        &mut self,
        value: &'v Value,
        loc: &DocPath,
        fields: &[&str],
    ) -> Option<&'v Map<String, Value>> {
        let Some(map) = value.as_object() else {
            self.error(
                DiagnosticCode::Schema,
                loc,
                format!("expected an object, found {}", kind_of(value)),
            );
            return None;
        };
        let mut complete = true;
        for field in fields {
            if !map.contains_key(*field) {
                self.error(
                    DiagnosticCode::Schema,
                    loc,
                    format!("missing field `{field}`"),
                );
                complete = false;
            }
        }
        for key in map.keys() {
            if !fields.contains(&key.as_str()) {
                self.error(
                    DiagnosticCode::Schema,
                    &loc.key(key),
                    format!("unknown field `{key}`"),
                );
                complete = false;
            }
        }
        complete.then_some(map)
    }

    fn string(&mut self, map: &Map<String, Value>, loc: &DocPath, key: &str) -> Option<String> {
        match &map[key] {
            Value::String(s) => Some(s.clone()),
            other => {
                self.error(
                    DiagnosticCode::Schema,
                    &loc.key(key),
                    format!("expected a string, found {}", kind_of(other)),
                );
                None
            }
        }
    }

    fn non_empty(&mut self, map: &Map<String, Value>, loc: &DocPath, key: &str) -> Option<String> {
        let s = self.string(map, loc, key)?;
        if s.trim().is_empty() {
            self.error(
                DiagnosticCode::Schema,
                &loc.key(key),
                format!("`{key}` must not be empty"),
            );
            return None;
        }
        Some(s)
    }

    fn array<'v>(
        &mut self,
        map: &'v Map<String, Value>,
        loc: &DocPath,
        key: &str,
    ) -> Option<&'v [Value]> {
        match &map[key] {
            Value::Array(items) => Some(items),
            other => {
                self.error(
                    DiagnosticCode::Schema,
                    &loc.key(key),
                    format!("expected an array, found {}", kind_of(other)),
                );
                None
            }
        }
    }

    /// Maps every item, returning `None` if any item failed.
    fn each<T>(
        &mut self,
        items: &[Value],
        loc: &DocPath,
        mut f: impl FnMut(&mut Self, &Value, &DocPath) -> Option<T>,
    ) -> Option<Vec<T>> {
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match f(self, item, &loc.index(i)) {
                Some(v) => out.push(v),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn tree(&mut self, value: &Value) -> Option<DecisionTree> {
        let root = DocPath::root();
        let map = self.object(value, &root, &["meta", "categories", "patterns", "paths"])?;

        let meta = self.meta(&map["meta"], &root.key("meta"));
        let categories = self
            .array(map, &root, "categories")
            .and_then(|items| self.each(items, &root.key("categories"), Self::category));
        let patterns = self
            .array(map, &root, "patterns")
            .and_then(|items| self.each(items, &root.key("patterns"), Self::pattern));
        let paths = self
            .array(map, &root, "paths")
            .and_then(|items| self.each(items, &root.key("paths"), Self::path));

        Some(DecisionTree {
            meta: meta?,
            categories: categories?,
            patterns: patterns?,
            paths: paths?,
        })
    }

    fn meta(&mut self, value: &Value, loc: &DocPath) -> Option<Meta> {
        let map = self.object(value, loc, &["name", "version"])?;
        let name = self.string(map, loc, "name");
        let version = self.string(map, loc, "version");
        Some(Meta {
            name: name?,
            version: version?,
        })
    }

    fn category(&mut self, value: &Value, loc: &DocPath) -> Option<Category> {
        let map = self.object(value, loc, &["id", "name", "description"])?;
        let id = self.non_empty(map, loc, "id");
        let name = self.non_empty(map, loc, "name");
        let description = self.string(map, loc, "description");
        Some(Category {
            id: id?,
            name: name?,
            description: description?,
        })
    }

    fn pattern(&mut self, value: &Value, loc: &DocPath) -> Option<Pattern> {
        let map = self.object(
            value,
            loc,
            &["id", "name", "category", "description", "source"],
        )?;
        let id = self.non_empty(map, loc, "id");
        let name = self.non_empty(map, loc, "name");
        let category = self.non_empty(map, loc, "category");
        let description = self.string(map, loc, "description");
        let source = self.string(map, loc, "source").and_then(|s| {
            let parsed = PatternSource::parse(&s);
            if parsed.is_none() {
                self.error(
                    DiagnosticCode::Schema,
                    &loc.key("source"),
                    format!("source `{s}` is not one of paper, survey, authored"),
                );
            }
            parsed
        });
        Some(Pattern {
            id: id?,
            name: name?,
            category: category?,
            description: description?,
            source: source?,
        })
    }

    fn path(&mut self, value: &Value, loc: &DocPath) -> Option<Path> {
        let map = self.object(value, loc, &["style", "sections"])?;
        let style = self
            .string(map, loc, "style")
            .and_then(|s| match s.parse::<ArchStyle>() {
                Ok(style) => Some(style),
                Err(e) => {
                    self.error(DiagnosticCode::Schema, &loc.key("style"), e.to_string());
                    None
                }
            });
        let sections = self
            .array(map, loc, "sections")
            .and_then(|items| self.each(items, &loc.key("sections"), Self::section));
        Some(Path {
            style: style?,
            sections: sections?,
        })
    }

    fn section(&mut self, value: &Value, loc: &DocPath) -> Option<PathSection> {
        let map = self.object(value, loc, &["category", "flows"])?;
        let category = self.non_empty(map, loc, "category");
        let flows = self
            .array(map, loc, "flows")
            .and_then(|items| self.each(items, &loc.key("flows"), Self::flow));
        Some(PathSection {
            category: category?,
            flows: flows?,
        })
    }

    fn flow(&mut self, value: &Value, loc: &DocPath) -> Option<QuestionFlow> {
        let map = self.object(value, loc, &["id", "patterns", "questions"])?;
        let id = self.non_empty(map, loc, "id");
        let patterns = self.array(map, loc, "patterns").and_then(|items| {
            let patterns_loc = loc.key("patterns");
            if items.is_empty() {
                self.error(
                    DiagnosticCode::Schema,
                    &patterns_loc,
                    "a flow must bind at least one pattern",
                );
                return None;
            }
            self.each(items, &patterns_loc, |c, item, item_loc| match item {
                Value::String(s) if !s.is_empty() => Some(s.clone()),
                other => {
                    c.error(
                        DiagnosticCode::Schema,
                        item_loc,
                        format!("expected a pattern id, found {}", kind_of(other)),
                    );
                    None
                }
            })
        });
        let questions = self
            .array(map, loc, "questions")
            .and_then(|items| self.each(items, &loc.key("questions"), Self::question));
        Some(QuestionFlow {
            id: id?,
            patterns: patterns?,
            questions: questions?,
        })
    }

    fn question(&mut self, value: &Value, loc: &DocPath) -> Option<Question> {
        let map = self.object(value, loc, &["text", "kind"])?;
        let text = self.non_empty(map, loc, "text");
        let kind = self
            .string(map, loc, "kind")
            .and_then(|s| match s.as_str() {
                "indication" => Some(QuestionKind::Indication),
                "contraindication" => Some(QuestionKind::Contraindication),
                _ => {
                    self.error(
                        DiagnosticCode::Schema,
                        &loc.key("kind"),
                        format!("kind `{s}` is not indication or contraindication"),
                    );
                    None
                }
            });
        Some(Question {
            text: text?,
            kind: kind?,
        })
    }
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn is_kebab(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('-')
        && !id.ends_with('-')
        && !id.contains("--")
        && id
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

/// Reference, uniqueness, style and ordering checks on a schema-valid tree.
fn check_structure(tree: &DecisionTree, c: &mut Checker) {
    let root = DocPath::root();

    let mut category_ids = HashSet::new();
    for (i, category) in tree.categories.iter().enumerate() {
        let loc = root.key("categories").index(i).key("id");
        if !category_ids.insert(category.id.as_str()) {
            c.error(
                DiagnosticCode::Duplicate,
                &loc,
                format!("duplicate category id `{}`", category.id),
            );
        }
        if !is_kebab(&category.id) {
            c.warning(
                DiagnosticCode::IdFormat,
                &loc,
                format!("category id `{}` is not lowercase kebab-case", category.id),
            );
        }
    }

    let mut pattern_category: HashMap<&str, &str> = HashMap::new();
    for (i, pattern) in tree.patterns.iter().enumerate() {
        let loc = root.key("patterns").index(i);
        if pattern_category
            .insert(pattern.id.as_str(), pattern.category.as_str())
            .is_some()
        {
            c.error(
                DiagnosticCode::Duplicate,
                &loc.key("id"),
                format!("duplicate pattern id `{}`", pattern.id),
            );
        }
        if !is_kebab(&pattern.id) {
            c.warning(
                DiagnosticCode::IdFormat,
                &loc.key("id"),
                format!("pattern id `{}` is not lowercase kebab-case", pattern.id),
            );
        }
        if !category_ids.contains(pattern.category.as_str()) {
            c.error(
                DiagnosticCode::Ref,
                &loc.key("category"),
                format!("unknown category `{}`", pattern.category),
            );
        }
    }

    let mut seen_styles: HashMap<ArchStyle, usize> = HashMap::new();
    let mut flow_ids = HashSet::new();
    for (i, path) in tree.paths.iter().enumerate() {
        if let Some(first) = seen_styles.insert(path.style, i) {
            c.error(
                DiagnosticCode::Style,
                &DocPath::path(i).key("style"),
                format!(
                    "style `{}` already has a path at /paths/{first}",
                    path.style
                ),
            );
        }

        let mut section_categories = HashSet::new();
        let mut asked_on_path = HashSet::new();
        for (j, section) in path.sections.iter().enumerate() {
            let section_loc = DocPath::section(i, j);
            if !category_ids.contains(section.category.as_str()) {
                c.error(
                    DiagnosticCode::Ref,
                    &section_loc.key("category"),
                    format!("unknown category `{}`", section.category),
                );
            }
            if !section_categories.insert(section.category.as_str()) {
                c.error(
                    DiagnosticCode::Duplicate,
                    &section_loc.key("category"),
                    format!(
                        "category `{}` already has a section on this path",
                        section.category
                    ),
                );
            }
            if path.style == ArchStyle::Monolithic
                && section.category == DISCOVERY_AND_COMMUNICATION
            {
                c.error(
                    DiagnosticCode::Style,
                    &section_loc.key("category"),
                    "the monolithic path cannot ask about discovery and communication",
                );
            }

            for (k, flow) in section.flows.iter().enumerate() {
                let flow_loc = DocPath::flow(i, j, k);
                if !flow_ids.insert(flow.id.as_str()) {
                    c.error(
                        DiagnosticCode::Duplicate,
                        &flow_loc.key("id"),
                        format!("duplicate flow id `{}`", flow.id),
                    );
                }
                for (m, pattern_id) in flow.patterns.iter().enumerate() {
                    let loc = flow_loc.key("patterns").index(m);
                    match pattern_category.get(pattern_id.as_str()) {
                        None => c.error(
                            DiagnosticCode::Ref,
                            &loc,
                            format!("unknown pattern `{pattern_id}`"),
                        ),
                        Some(category) if *category != section.category => c.error(
                            DiagnosticCode::Ref,
                            &loc,
                            format!(
                                "pattern `{pattern_id}` belongs to `{category}`, not to section category `{}`",
                                section.category
                            ),
                        ),
                        Some(_) => {}
                    }
                    if !asked_on_path.insert(pattern_id.as_str()) {
                        c.error(
                            DiagnosticCode::Duplicate,
                            &loc,
                            format!("pattern `{pattern_id}` is already asked for on this path"),
                        );
                    }
                }
                if let Some(message) = flow_order_problem(flow) {
                    c.error(
                        DiagnosticCode::FlowOrder,
                        &flow_loc.key("questions"),
                        message,
                    );
                }
            }
        }
    }

    for style in ArchStyle::ALL {
        if !seen_styles.contains_key(&style) {
            c.error(
                DiagnosticCode::Style,
                &root.key("paths"),
                format!("missing path for style `{style}`"),
            );
        }
    }
}

fn flow_order_problem(flow: &QuestionFlow) -> Option<String> {
    if flow.is_well_ordered() {
        return None;
    }
    let contra: Vec<usize> = flow
        .questions
        .iter()
        .enumerate()
        .filter(|(_, q)| q.kind == QuestionKind::Contraindication)
        .map(|(i, _)| i)
        .collect();
    Some(match contra.as_slice() {
        [] => "flow has no contraindication question".to_owned(),
        [_, _, ..] => format!(
            "flow has {} contraindication questions; exactly one is allowed",
            contra.len()
        ),
        [0] if flow.questions.len() == 1 => {
            "flow needs at least one indication question before its contraindication".to_owned()
        }
        [at] => format!(
            "contraindication question at position {} must be last",
            at + 1
        ),
    })
}
