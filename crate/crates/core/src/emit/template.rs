//! Minimal placeholder templates.
//!
//! Syntax:
//!
//! * `{{name}}` is replaced by the text bound to `name`.
//! * `{{#each list}} ... {{/each}}` repeats its body once per entry of the
//!   list bound to `list`. Inside the body, names resolve against the entry
//!   first and then against the enclosing scopes.
//!
//! There are no conditionals and no escaping. Rendering fails on any name
//! that has no binding.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unresolved placeholder `{0}`")]
    Unresolved(String),
    #[error("placeholder `{0}` is bound to a list, not text")]
    NotText(String),
    #[error("`{{{{#each {0}}}}}` needs a list binding")]
    NotAList(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Text(String),
    Var(String),
    Each { list: String, body: Vec<Node> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Text(String),
    List(Vec<Bindings>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bindings(BTreeMap<String, Binding>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(mut self, name: &str, value: impl Into<String>) -> Self {
        self.0.insert(name.to_string(), Binding::Text(value.into()));
        self
    }

    pub fn list(mut self, name: &str, items: Vec<Bindings>) -> Self {
        self.0.insert(name.to_string(), Binding::List(items));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.0.get(name)
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

impl Template {
    pub fn parse(source: &str) -> Result<Template, TemplateError> {
        // Stack of open blocks: (list name, line of the opening tag, nodes so far).
        let mut stack: Vec<(String, usize, Vec<Node>)> = Vec::new();
        let mut current: Vec<Node> = Vec::new();
        let mut rest = source;
        let mut line = 1;
        while let Some(start) = rest.find("{{") {
            if start > 0 {
                current.push(Node::Text(rest[..start].to_string()));
                line += rest[..start].matches('\n').count();
            }
            let after = &rest[start + 2..];
            let end = after.find("}}").ok_or_else(|| TemplateError::Syntax {
                line,
                message: "unclosed `{{`".into(),
            })?;
            let tag = after[..end].trim();
            let tag_line = line;
            line += after[..end].matches('\n').count();
            rest = &after[end + 2..];

            let syntax = |message: String| TemplateError::Syntax {
                line: tag_line,
                message,
            };
            if let Some(block) = tag.strip_prefix('#') {
                let mut parts = block.split_whitespace();
                match (parts.next(), parts.next(), parts.next()) {
                    (Some("each"), Some(list), None) if valid_name(list) => {
                        stack.push((list.to_string(), tag_line, std::mem::take(&mut current)));
                    }
                    _ => return Err(syntax(format!("unsupported block `{{{{{tag}}}}}`"))),
                }
            } else if let Some(close) = tag.strip_prefix('/') {
                if close.trim() != "each" {
                    return Err(syntax(format!("unsupported closing tag `{{{{{tag}}}}}`")));
                }
                let (list, _, parent) = stack
                    .pop()
                    .ok_or_else(|| syntax("`{{/each}}` without a matching `{{#each}}`".into()))?;
                let body = std::mem::replace(&mut current, parent);
                current.push(Node::Each { list, body });
            } else if valid_name(tag) {
                current.push(Node::Var(tag.to_string()));
            } else {
                return Err(syntax(format!("invalid placeholder name `{tag}`")));
            }
        }
        if !rest.is_empty() {
            current.push(Node::Text(rest.to_string()));
        }
        if let Some((list, open_line, _)) = stack.pop() {
            return Err(TemplateError::Syntax {
                line: open_line,
                message: format!("`{{{{#each {list}}}}}` is never closed"),
            });
        }
        Ok(Template { nodes: current })
    }

    /// Every placeholder and list name used, in first-use order.
    pub fn placeholders(&self) -> Vec<String> {
        fn walk(nodes: &[Node], out: &mut Vec<String>) {
            for n in nodes {
                match n {
                    Node::Text(_) => {}
                    Node::Var(v) => {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                    Node::Each { list, body } => {
                        if !out.contains(list) {
                            out.push(list.clone());
                        }
                        walk(body, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.nodes, &mut out);
        out
    }

    pub fn render(&self, bindings: &Bindings) -> Result<String, TemplateError> {
        let mut out = String::new();
        let mut scopes = vec![bindings];
        render_nodes(&self.nodes, &mut scopes, &mut out)?;
        Ok(out)
    }
}

fn lookup<'a>(scopes: &[&'a Bindings], name: &str) -> Option<&'a Binding> {
    scopes.iter().rev().find_map(|s| s.get(name))
}

fn render_nodes(
    nodes: &[Node],
    scopes: &mut Vec<&Bindings>,
    out: &mut String,
) -> Result<(), TemplateError> {
    for node in nodes {
        match node {
            Node::Text(t) => out.push_str(t),
            Node::Var(name) => match lookup(scopes, name) {
                Some(Binding::Text(t)) => out.push_str(t),
                Some(Binding::List(_)) => return Err(TemplateError::NotText(name.clone())),
                None => return Err(TemplateError::Unresolved(name.clone())),
            },
            Node::Each { list, body } => match lookup(scopes, list) {
                Some(Binding::List(items)) => {
                    for item in items {
                        scopes.push(item);
                        let r = render_nodes(body, scopes, out);
                        scopes.pop();
                        r?;
                    }
                }
                Some(Binding::Text(_)) => return Err(TemplateError::NotAList(list.clone())),
                None => return Err(TemplateError::Unresolved(list.clone())),
            },
        }
    }
    Ok(())
}

pub fn render_template(template: &Template, bindings: &Bindings) -> Result<String, TemplateError> {
    template.render(bindings)
}
