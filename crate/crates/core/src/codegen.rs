//! Per-class code templates and their instantiation.
//!
//! Template grammar, line oriented:
//! - `{{name}}` placeholders from a closed set;
//! - `[[legend]]` ... `[[/legend]]` kept only when a legend was detected;
//! - `[[labels]]` ... `[[/labels]]` commented out when no axis label was
//!   found.
//!
//! A line holding a label placeholder whose value is missing is emitted
//! commented out, preceded by a how-to note.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chart::ChartClass;
use crate::error::{Error, Result};
use crate::semantics::SemanticSummary;

pub const PLACEHOLDERS: [&str; 7] = [
    "title",
    "x_label",
    "y_label",
    "categories",
    "n_series",
    "series_names",
    "figsize_comment",
];
pub const BLOCKS: [&str; 2] = ["legend", "labels"];
pub const DEFAULT_BACKEND: &str = "matplotlib";
/// Every template must bind the user's data through this line.
pub const DATA_BINDING: &str = "x = x_data";

const FIGSIZE_COMMENT: &str =
    "# Figure size in inches as (width, height). Enlarge it for slides, shrink it for papers.";

const BUILTIN: [(ChartClass, &str); 7] = [
    (ChartClass::Bar, include_str!("../templates/matplotlib/bar.tmpl")),
    (ChartClass::StackedBar, include_str!("../templates/matplotlib/stacked_bar.tmpl")),
    (ChartClass::GroupedBar, include_str!("../templates/matplotlib/grouped_bar.tmpl")),
    (ChartClass::Scatter, include_str!("../templates/matplotlib/scatter.tmpl")),
    (ChartClass::GroupedScatter, include_str!("../templates/matplotlib/grouped_scatter.tmpl")),
    (ChartClass::Pie, include_str!("../templates/matplotlib/pie.tmpl")),
    (ChartClass::Heatmap, include_str!("../templates/matplotlib/heatmap.tmpl")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTemplate {
    pub class: ChartClass,
    pub body: String,
}

/// `{{name}}` occurrences in a line as (start, end, name).
fn placeholders_in(line: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(i) = line[from..].find("{{") {
        let start = from + i;
        let Some(j) = line[start + 2..].find("}}") else { break };
        let end = start + 2 + j + 2;
        let name = &line[start + 2..end - 2];
        if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            out.push((start, end, name));
            from = end;
        } else {
            from = start + 2;
        }
    }
    out
}

/// `Some((name, closing))` if the trimmed line is a block marker.
fn block_marker(line: &str) -> Option<(&str, bool)> {
    let t = line.trim();
    let inner = t.strip_prefix("[[")?.strip_suffix("]]")?;
    match inner.strip_prefix('/') {
        Some(name) => Some((name, true)),
        None => Some((inner, false)),
    }
}

impl CodeTemplate {
    /// Checks the grammar: known placeholders, known and balanced blocks,
    /// and the data-binding line.
    pub fn parse(class: ChartClass, body: &str) -> Result<Self> {
        let bad = |n: usize, m: String| Err(Error::InvalidInput(format!("{class} template line {}: {m}", n + 1)));
        let mut open: Option<&str> = None;
        let mut binding = false;
        for (n, line) in body.lines().enumerate() {
            if let Some((name, closing)) = block_marker(line) {
                if !BLOCKS.contains(&name) {
                    return bad(n, format!("unknown block \"{name}\""));
                }
                match (open, closing) {
                    (None, false) => open = Some(name),
                    (Some(o), true) if o == name => open = None,
                    (Some(o), false) => return bad(n, format!("block \"{name}\" opened inside \"{o}\"")),
                    _ => return bad(n, format!("unexpected close of \"{name}\"")),
                }
                continue;
            }
            for (_, _, name) in placeholders_in(line) {
                if !PLACEHOLDERS.contains(&name) {
                    return bad(n, format!("unknown placeholder \"{{{{{name}}}}}\""));
                }
            }
            binding |= line.trim() == DATA_BINDING;
        }
        if let Some(o) = open {
            return Err(Error::InvalidInput(format!("{class} template: block \"{o}\" is never closed")));
        }
        if !binding {
            return Err(Error::InvalidInput(format!("{class} template lacks the line \"{DATA_BINDING}\"")));
        }
        Ok(CodeTemplate {
            class,
            body: body.to_string(),
        })
    }

    pub fn has_block(&self, name: &str) -> bool {
        self.body.lines().any(|l| block_marker(l) == Some((name, false)))
    }

    pub fn has_placeholder(&self, name: &str) -> bool {
        self.body.lines().any(|l| placeholders_in(l).iter().any(|p| p.2 == name))
    }
}

/// One template per chart class for one plotting backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub backend: String,
    templates: BTreeMap<ChartClass, CodeTemplate>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let templates = BUILTIN
            .iter()
            .map(|&(c, body)| (c, CodeTemplate::parse(c, body).expect("built-in templates are valid")))
            .collect();
        TemplateSet {
            backend: DEFAULT_BACKEND.to_string(),
            templates,
        }
    }

    /// Reads `<class>.tmpl` for every class from `dir`; the backend id is
    /// the directory name.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut templates = BTreeMap::new();
        for class in ChartClass::ALL {
            let p = dir.join(format!("{}.tmpl", class.name()));
            let body = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            templates.insert(class, CodeTemplate::parse(class, &body)?);
        }
        Ok(TemplateSet {
            backend: dir
                .file_name()
                .map_or_else(|| "custom".to_string(), |n| n.to_string_lossy().into_owned()),
            templates,
        })
    }

    pub fn template_for(&self, class: ChartClass) -> Result<&CodeTemplate> {
        self.templates
            .get(&class)
            .ok_or_else(|| Error::Internal(format!("no template registered for {class}")))
    }
}

/// The built-in template for a class.
pub fn template_for(class: ChartClass) -> Result<CodeTemplate> {
    TemplateSet::builtin().template_for(class).cloned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeArtifact {
    pub code: String,
    pub class: ChartClass,
    pub summary: SemanticSummary,
    /// Placeholder names the template substituted, sorted.
    pub bound: Vec<String>,
    pub warnings: Vec<String>,
}

/// Body of a double-quoted Python string literal. Besides quotes and
/// backslashes, doubled braces and brackets are split with a hex escape
/// so user text can never look like a template marker.
pub fn py_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    let mut prev = '\0';
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '{' | '}' | '[' | ']' if prev == c => out.push_str(&format!("\\x{:02x}", c as u32)),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => out.push_str(&format!("\\x{:02x}", c as u32)),
            c => out.push(c),
        }
        prev = c;
    }
    out
}

fn py_str(s: &str) -> String {
    format!("\"{}\"", py_escape(s))
}

fn is_plain_number(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty()
        && body.chars().all(|c| c.is_ascii_digit() || c == '.')
        && body.chars().filter(|&c| c == '.').count() <= 1
        && body.chars().any(|c| c.is_ascii_digit())
        && !body.starts_with('.')
        && !body.ends_with('.')
}

/// Category names for the template: what the image showed when the count
/// agrees, numbered defaults otherwise.
pub fn category_values(summary: &SemanticSummary) -> Vec<String> {
    let seen = if summary.class == ChartClass::Pie {
        &summary.slice_labels
    } else {
        &summary.x_tick_labels
    };
    if !seen.is_empty() && seen.len() == summary.n_categories {
        return seen.clone();
    }
    let n = summary.n_categories.max(1);
    (1..=n)
        .map(|i| match summary.class {
            ChartClass::Scatter | ChartClass::GroupedScatter => i.to_string(),
            ChartClass::Pie => format!("Slice {i}"),
            _ => format!("Category {i}"),
        })
        .collect()
}

fn categories_literal(summary: &SemanticSummary) -> String {
    let vals = category_values(summary);
    let items: Vec<String> = if vals.iter().all(|v| is_plain_number(v)) {
        vals
    } else {
        vals.iter().map(|v| py_str(v)).collect()
    };
    format!("[{}]", items.join(", "))
}

pub fn series_names(summary: &SemanticSummary) -> Vec<String> {
    if summary.legend && !summary.legend_entries.is_empty() {
        return summary.legend_entries.clone();
    }
    let n = if summary.class.is_multi_series() { 2 } else { 1 };
    (1..=n).map(|i| format!("Series {i}")).collect()
}

fn label_note(name: &str) -> &'static str {
    match name {
        "x_label" => "# No x-axis label was found in the image. Uncomment the next line to add one.",
        _ => "# No y-axis label was found in the image. Uncomment the next line to add one.",
    }
}

fn generic_label(name: &str) -> &'static str {
    match name {
        "x_label" => "x-axis label",
        _ => "y-axis label",
    }
}

fn comment_out(line: &str) -> String {
    let indent = line.len() - line.trim_start().len();
    format!("{}# {}", &line[..indent], &line[indent..])
}

/// Fills a template from a summary of the same class.
pub fn instantiate(template: &CodeTemplate, summary: &SemanticSummary) -> Result<CodeArtifact> {
    if template.class != summary.class {
        return Err(Error::InvalidArgument(format!(
            "template is for {} but the summary is for {}",
            template.class, summary.class
        )));
    }
    let names = series_names(summary);
    let label = |name: &str| match name {
        "x_label" => summary.x_label.as_deref(),
        _ => summary.y_label.as_deref(),
    };
    let value = |name: &str| -> String {
        match name {
            "title" => py_escape(&summary.title),
            "x_label" | "y_label" => py_escape(label(name).unwrap_or(generic_label(name))),
            "categories" => categories_literal(summary),
            "n_series" => names.len().to_string(),
            "series_names" => format!("[{}]", names.iter().map(|n| py_str(n)).collect::<Vec<_>>().join(", ")),
            "figsize_comment" => FIGSIZE_COMMENT.to_string(),
            _ => unreachable!("placeholder names are checked at parse time"),
        }
    };
    let substitute = |line: &str| -> String {
        let mut out = String::with_capacity(line.len());
        let mut last = 0;
        for (s, e, name) in placeholders_in(line) {
            out.push_str(&line[last..s]);
            out.push_str(&value(name));
            last = e;
        }
        out.push_str(&line[last..]);
        out
    };
    let any_label = summary.x_label.is_some() || summary.y_label.is_some();

    let mut out: Vec<String> = Vec::new();
    let mut block: Option<&str> = None;
    for line in template.body.lines() {
        if let Some((name, closing)) = block_marker(line) {
            block = if closing { None } else { Some(name) };
            if !closing && name == "labels" && !any_label {
                out.push("# No axis labels were found in the image. Uncomment these lines to add them.".into());
            }
            continue;
        }
        match block {
            Some("legend") if !summary.legend => continue,
            Some("labels") if !any_label => {
                out.push(comment_out(&substitute(line)));
                continue;
            }
            _ => {}
        }
        let missing = placeholders_in(line)
            .into_iter()
            .find(|p| matches!(p.2, "x_label" | "y_label") && label(p.2).is_none());
        if let Some((_, _, name)) = missing {
            out.push(label_note(name).into());
            out.push(comment_out(&substitute(line)));
        } else {
            out.push(substitute(line));
        }
    }
    let mut code = out.join("\n");
    code.push('\n');
    let mut bound: Vec<String> = template
        .body
        .lines()
        .flat_map(|l| placeholders_in(l).into_iter().map(|p| p.2.to_string()))
        .collect();
    bound.sort();
    bound.dedup();
    Ok(CodeArtifact {
        code,
        class: summary.class,
        summary: summary.clone(),
        bound,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintIssue {
    pub rule: String,
    /// 1-based; 0 when the issue is not tied to a line.
    pub line: usize,
    pub detail: String,
}

impl fmt::Display for LintIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}: {}", self.line, self.rule, self.detail)
        } else {
            write!(f, "{}: {}", self.rule, self.detail)
        }
    }
}

fn issue(rule: &str, line: usize, detail: impl Into<String>) -> LintIssue {
    LintIssue {
        rule: rule.to_string(),
        line,
        detail: detail.into(),
    }
}

/// Bracket and quote balance over Python source, skipping comments and the
/// contents of string literals.
fn check_delimiters(code: &str, issues: &mut Vec<LintIssue>) {
    let mut stack: Vec<(char, usize)> = Vec::new();
    // (quote char, triple, opening line)
    let mut string: Option<(char, bool, usize)> = None;
    let chars: Vec<char> = code.chars().collect();
    let mut line = 1;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if let Some((q, triple, start)) = string {
            match c {
                '\\' => i += 1,
                '\n' if !triple => {
                    issues.push(issue("unterminated string", start, "string literal runs past the end of the line"));
                    string = None;
                    line += 1;
                }
                '\n' => line += 1,
                _ if c == q => {
                    if !triple {
                        string = None;
                    } else if chars.get(i + 1) == Some(&q) && chars.get(i + 2) == Some(&q) {
                        string = None;
                        i += 2;
                    }
                }
                _ => {}
            }
            i += 1;
            continue;
        }
        match c {
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '\n' => line += 1,
            '"' | '\'' => {
                let triple = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                string = Some((c, triple, line));
                if triple {
                    i += 2;
                }
            }
            '(' | '[' | '{' => stack.push((c, line)),
            ')' | ']' | '}' => {
                let want = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                match stack.pop() {
                    Some((o, _)) if o == want => {}
                    Some((o, l)) => issues.push(issue(
                        "unbalanced brackets",
                        line,
                        format!("'{c}' closes '{o}' opened on line {l}"),
                    )),
                    None => issues.push(issue("unbalanced brackets", line, format!("'{c}' has no opening bracket"))),
                }
            }
            _ => {}
        }
        i += 1;
    }
    if let Some((_, _, start)) = string {
        issues.push(issue("unterminated string", start, "string literal is never closed"));
    }
    for (o, l) in stack {
        issues.push(issue("unbalanced brackets", l, format!("'{o}' is never closed")));
    }
}

/// Static checks standing in for running the code. An empty list means ok.
pub fn lint_artifact(artifact: &CodeArtifact) -> Vec<LintIssue> {
    let mut issues = Vec::new();
    let code = &artifact.code;
    for (n, line) in code.lines().enumerate() {
        for (_, _, name) in placeholders_in(line) {
            issues.push(issue("unresolved placeholder", n + 1, format!("{{{{{name}}}}}")));
        }
        if let Some((name, _)) = block_marker(line) {
            issues.push(issue("unresolved block marker", n + 1, format!("[[{name}]]")));
        }
    }
    check_delimiters(code, &mut issues);
    if !code.lines().any(|l| l.trim() == DATA_BINDING) {
        issues.push(issue("missing data binding", 0, format!("no \"{DATA_BINDING}\" line")));
    }
    let s = &artifact.summary;
    let bound = |name: &str| artifact.bound.iter().any(|b| b == name);
    let mut expected: Vec<(&str, &str)> = Vec::new();
    if bound("title") {
        expected.push(("title", &s.title));
    }
    if let Some(x) = s.x_label.as_deref().filter(|_| bound("x_label")) {
        expected.push(("x_label", x));
    }
    if let Some(y) = s.y_label.as_deref().filter(|_| bound("y_label")) {
        expected.push(("y_label", y));
    }
    for (field, text) in expected {
        if !code.contains(&py_str(text)) {
            issues.push(issue("unescaped summary string", 0, format!("{field} {text:?} is not present as an escaped literal")));
        }
    }
    if s.legend && bound("series_names") {
        for e in &s.legend_entries {
            if !code.contains(&py_str(e)) {
                issues.push(issue("unescaped summary string", 0, format!("legend entry {e:?} is not present as an escaped literal")));
            }
        }
    }
    issues
}
