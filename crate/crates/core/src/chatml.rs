//! ChatML-style wire format with think blocks, a tool declaration block and
//! an XML tool-call dialect.
//!
//! ```text
//! <|im_start|>user
//! {query}<|im_end|>
//! <|im_start|>assistant
//! <think>
//! {reasoning}
//! </think>
//!
//! {response}
//! <|im_end|>
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

const IM_START: &str = "<|im_start|>";
const IM_END: &str = "<|im_end|>";
const THINK_OPEN: &str = "<think>\n";
const THINK_CLOSE: &str = "\n</think>\n\n";
const BLANK_THINK: &str = "<think>\n\n</think>\n\n";
const CALL_OPEN: &str = "<tool_call>";
const CALL_CLOSE: &str = "</tool_call>";

const TOOLS_HEADER: &str = "# Tools\n\nYou may call one or more functions to assist with the user query.\n\nYou are provided with function signatures within <tools>\n</tools> XML tags:\n<tools>\n";
const TOOLS_FOOTER: &str = "</tools>\n\nFor each function call, output the function name and arguments within the following XML format:\n<tool_call>{function-name}\n<arg_key>{arg-key-1}</arg_key>\n<arg_value>{arg-value-1}</arg_value>\n<arg_key>{arg-key-2}</arg_key>\n<arg_value>{arg-value-2}</arg_value>\n...\n</tool_call>";

pub const DEFAULT_MEDIA_SENTINEL: &str = "<|image|>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }

    fn parse(s: &str) -> Option<Role> {
        match s {
            "system" => Some(Role::System),
            "user" => Some(Role::User),
            "assistant" => Some(Role::Assistant),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Reasoning,
    NonReasoning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCall {
    pub function_name: String,
    pub args: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub description: String,
    pub parameters: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
    /// Assistant only. An empty reasoning block is represented as `None`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    /// Assistant only; rendered after `content`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCall>,
    /// User only; number of media placeholders ahead of the content.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub media: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

impl ChatMessage {
    fn plain(role: Role, content: impl Into<String>) -> Self {
        ChatMessage {
            role,
            content: content.into(),
            reasoning: None,
            tool_calls: Vec::new(),
            media: 0,
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::plain(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::plain(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self::plain(Role::Assistant, content)
    }

    pub fn with_reasoning(mut self, reasoning: impl Into<String>) -> Self {
        let r = reasoning.into();
        self.reasoning = (!r.is_empty()).then_some(r);
        self
    }

    pub fn with_tool_calls(mut self, calls: Vec<ToolCall>) -> Self {
        self.tool_calls = calls;
        self
    }

    pub fn with_media(mut self, count: usize) -> Self {
        self.media = count;
        self
    }
}

/// A conversation as it appears on the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversation {
    pub messages: Vec<ChatMessage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tools: Vec<ToolSpec>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub add_generation_prompt: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireOptions {
    pub media_sentinel: String,
}

impl Default for WireOptions {
    fn default() -> Self {
        WireOptions {
            media_sentinel: DEFAULT_MEDIA_SENTINEL.into(),
        }
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::ContentViolation(msg.into())
}

/// JSON with `", "` and `": "` separators.
fn spaced_json(v: &Value, out: &mut String) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                spaced_json(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                spaced_json(item, out);
            }
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn tool_line(t: &ToolSpec) -> String {
    let mut line = String::from(r#"{"type": "function", "function": {"name": "#);
    line.push_str(&Value::String(t.name.clone()).to_string());
    line.push_str(r#", "description": "#);
    line.push_str(&Value::String(t.description.clone()).to_string());
    line.push_str(r#", "parameters": "#);
    spaced_json(&t.parameters, &mut line);
    line.push_str(" } }");
    line
}

/// The system-prompt block that declares `tools`.
pub fn tools_block(tools: &[ToolSpec]) -> String {
    let mut out = String::from(TOOLS_HEADER);
    for t in tools {
        out.push_str(&tool_line(t));
        out.push('\n');
    }
    out.push_str(TOOLS_FOOTER);
    out
}

pub fn render_tool_call(call: &ToolCall) -> String {
    let mut out = format!("{CALL_OPEN}{}\n", call.function_name);
    for (k, v) in &call.args {
        out.push_str(&format!(
            "<arg_key>{k}</arg_key>\n<arg_value>{v}</arg_value>\n"
        ));
    }
    out.push_str(CALL_CLOSE);
    out
}

fn check_call(call: &ToolCall) -> Result<()> {
    let name = &call.function_name;
    if name.is_empty() || name.trim() != name || name.contains(['\n', '<']) {
        return Err(violation(format!(
            "tool call name {name:?} is empty or contains `<`/newline"
        )));
    }
    for (k, v) in &call.args {
        if k.is_empty() || k.contains('<') {
            return Err(violation(format!(
                "argument key {k:?} is empty or contains `<`"
            )));
        }
        if v.contains("</arg_value>") || v.contains(CALL_CLOSE) {
            return Err(violation("argument value contains a closing tag"));
        }
    }
    Ok(())
}

fn check_message(m: &ChatMessage, mode: Mode, opts: &WireOptions) -> Result<()> {
    for text in std::iter::once(&m.content).chain(m.reasoning.as_ref()) {
        if text.contains(IM_END) || text.contains(IM_START) {
            return Err(violation("message contains a turn delimiter"));
        }
    }
    if m.role != Role::Assistant && (m.reasoning.is_some() || !m.tool_calls.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "{} message carries reasoning or tool calls",
            m.role.as_str()
        )));
    }
    if m.role != Role::User && m.media > 0 {
        return Err(Error::InvalidArgument(
            "only user messages carry media".into(),
        ));
    }
    if m.role == Role::User
        && !opts.media_sentinel.is_empty()
        && m.content.starts_with(&opts.media_sentinel)
    {
        return Err(violation("user content starts with the media sentinel"));
    }
    if m.role == Role::Assistant {
        if let Some(r) = &m.reasoning {
            if mode == Mode::NonReasoning {
                return Err(Error::ModeConflict);
            }
            if r.contains("</think>") {
                return Err(violation("reasoning contains </think>"));
            }
        }
        if m.content.contains(CALL_OPEN) || m.content.contains(CALL_CLOSE) {
            return Err(violation("assistant content contains tool-call tags"));
        }
        m.tool_calls.iter().try_for_each(check_call)?;
    }
    Ok(())
}

fn check_tools(tools: &[ToolSpec]) -> Result<()> {
    let mut names = std::collections::HashSet::new();
    for t in tools {
        if t.name.is_empty() {
            return Err(Error::InvalidArgument("tool name is empty".into()));
        }
        if !names.insert(t.name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate tool `{}`",
                t.name
            )));
        }
        if t.description.contains(IM_END) || t.description.contains(IM_START) {
            return Err(violation("tool description contains a turn delimiter"));
        }
    }
    Ok(())
}

fn assistant_body(m: &ChatMessage) -> String {
    let mut out = match &m.reasoning {
        Some(r) => format!("{THINK_OPEN}{r}{THINK_CLOSE}"),
        None => BLANK_THINK.to_string(),
    };
    out.push_str(&m.content);
    for (i, call) in m.tool_calls.iter().enumerate() {
        if i > 0 || !m.content.is_empty() {
            out.push('\n');
        }
        out.push_str(&render_tool_call(call));
    }
    out.push('\n');
    out
}

/// Renders the conversation with default options.
pub fn render(conv: &Conversation) -> Result<String> {
    render_with(conv, &WireOptions::default())
}

pub fn render_with(conv: &Conversation, opts: &WireOptions) -> Result<String> {
    if conv.messages.is_empty() {
        return Err(Error::InvalidArgument(
            "conversation has no messages".into(),
        ));
    }
    check_tools(&conv.tools)?;
    for m in &conv.messages {
        check_message(m, conv.mode, opts)?;
    }
    let mut out = String::new();
    let mut rest = conv.messages.as_slice();
    if !conv.tools.is_empty() {
        let mut system = String::new();
        if let Some((first, tail)) = rest.split_first() {
            if first.role == Role::System {
                system.push_str(&first.content);
                system.push_str("\n\n");
                rest = tail;
            }
        }
        system.push_str(&tools_block(&conv.tools));
        out.push_str(&format!("{IM_START}system\n{system}{IM_END}\n"));
    }
    for m in rest {
        out.push_str(IM_START);
        out.push_str(m.role.as_str());
        out.push('\n');
        match m.role {
            Role::Assistant => out.push_str(&assistant_body(m)),
            Role::User => {
                for _ in 0..m.media {
                    out.push_str(&opts.media_sentinel);
                    out.push('\n');
                }
                out.push_str(&m.content);
            }
            Role::System => out.push_str(&m.content),
        }
        out.push_str(IM_END);
        out.push('\n');
    }
    if conv.add_generation_prompt {
        out.push_str(IM_START);
        out.push_str("assistant\n");
        if conv.mode == Mode::NonReasoning {
            out.push_str(BLANK_THINK);
        }
    }
    Ok(out)
}

fn malformed(offset: usize, reason: impl Into<String>) -> Error {
    Error::MalformedChat {
        offset,
        reason: reason.into(),
    }
}

/// Splits an assistant body into its think-block contents and the response.
pub fn split_reasoning(text: &str) -> Result<(String, String)> {
    if !text.starts_with("<think>") {
        if let Some(at) = text.find("<think>") {
            return Err(malformed(at, "think block is not at the start"));
        }
        return Ok((String::new(), text.to_string()));
    }
    if let Some(rest) = text.strip_prefix(BLANK_THINK) {
        return Ok((String::new(), rest.to_string()));
    }
    let Some(inner) = text.strip_prefix(THINK_OPEN) else {
        return Err(malformed(0, "expected a newline after <think>"));
    };
    match inner.find(THINK_CLOSE) {
        Some(end) => Ok((
            inner[..end].to_string(),
            inner[end + THINK_CLOSE.len()..].to_string(),
        )),
        None => Err(malformed(0, "unterminated think block")),
    }
}

fn call_error(offset: usize, reason: &str) -> Error {
    Error::MalformedToolCall {
        offset,
        reason: reason.into(),
    }
}

/// Extracts every `<tool_call>` block; text outside blocks is ignored.
pub fn parse_tool_calls(text: &str) -> Result<Vec<ToolCall>> {
    let mut calls = Vec::new();
    let mut pos = 0;
    while let Some(found) = text[pos..].find(CALL_OPEN) {
        let open = pos + found;
        let body_start = open + CALL_OPEN.len();
        let Some(len) = text[body_start..].find(CALL_CLOSE) else {
            return Err(call_error(open, "unclosed <tool_call>"));
        };
        let body_end = body_start + len;
        calls.push(parse_call_body(text, body_start, body_end)?);
        pos = body_end + CALL_CLOSE.len();
    }
    Ok(calls)
}

fn parse_call_body(text: &str, start: usize, end: usize) -> Result<ToolCall> {
    let body = &text[start..end];
    let (name, mut at) = match body.find('\n') {
        Some(nl) => (&body[..nl], nl + 1),
        None => (body, body.len()),
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(call_error(start, "missing function name"));
    }
    let mut args = Vec::new();
    let skip_ws = |at: usize| at + body[at..].len() - body[at..].trim_start().len();
    loop {
        at = skip_ws(at);
        if at >= body.len() {
            break;
        }
        let key = element(body, at, "arg_key")
            .ok_or_else(|| call_error(start + at, "expected <arg_key>"))?;
        at = skip_ws(key.1);
        let value = element(body, at, "arg_value")
            .ok_or_else(|| call_error(start + at, "key without value"))?;
        at = value.1;
        if key.0.is_empty() {
            return Err(call_error(start, "empty argument key"));
        }
        args.push((key.0.to_string(), value.0.to_string()));
    }
    Ok(ToolCall {
        function_name: name.to_string(),
        args,
    })
}

/// `<tag>inner</tag>` at `at`; returns the inner text and the offset after it.
fn element<'a>(body: &'a str, at: usize, tag: &str) -> Option<(&'a str, usize)> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let rest = body[at..].strip_prefix(open.as_str())?;
    let len = rest.find(close.as_str())?;
    let inner_start = at + open.len();
    Some((
        &body[inner_start..inner_start + len],
        inner_start + len + close.len(),
    ))
}

/// Parses wire text produced by [`render`].
pub fn parse_messages(text: &str) -> Result<Conversation> {
    parse_messages_with(text, &WireOptions::default())
}

pub fn parse_messages_with(text: &str, opts: &WireOptions) -> Result<Conversation> {
    let mut messages = Vec::new();
    let mut tools = Vec::new();
    let mut add_generation_prompt = false;
    let mut blank_prompt = false;
    let mut pos = 0;
    while pos < text.len() {
        if !text[pos..].starts_with(IM_START) {
            return Err(malformed(pos, "expected <|im_start|>"));
        }
        let header = pos + IM_START.len();
        let nl = text[header..]
            .find('\n')
            .map(|n| header + n)
            .ok_or_else(|| malformed(header, "missing newline after role"))?;
        let role = Role::parse(&text[header..nl])
            .ok_or_else(|| malformed(header, format!("unknown role {:?}", &text[header..nl])))?;
        let body_start = nl + 1;
        let Some(len) = text[body_start..].find(IM_END) else {
            let tail = &text[body_start..];
            if role == Role::Assistant && (tail.is_empty() || tail == BLANK_THINK) {
                add_generation_prompt = true;
                blank_prompt = !tail.is_empty();
                break;
            }
            return Err(malformed(pos, "unterminated turn"));
        };
        let body = &text[body_start..body_start + len];
        let after = body_start + len + IM_END.len();
        if !text[after..].starts_with('\n') {
            return Err(malformed(after, "expected newline after <|im_end|>"));
        }
        pos = after + 1;

        match role {
            Role::System if messages.is_empty() && tools.is_empty() => {
                match split_tools(body, body_start)? {
                    Some((prefix, specs)) => {
                        tools = specs;
                        if let Some(p) = prefix {
                            messages.push(ChatMessage::system(p));
                        }
                    }
                    None => messages.push(ChatMessage::system(body)),
                }
            }
            Role::System => messages.push(ChatMessage::system(body)),
            Role::User => {
                let mut content = body;
                let mut media = 0;
                let marker = format!("{}\n", opts.media_sentinel);
                if !opts.media_sentinel.is_empty() {
                    while let Some(rest) = content.strip_prefix(marker.as_str()) {
                        media += 1;
                        content = rest;
                    }
                }
                messages.push(ChatMessage::user(content).with_media(media));
            }
            Role::Assistant => messages.push(parse_assistant(body, body_start)?),
        }
    }
    if messages.is_empty() {
        return Err(malformed(0, "no messages"));
    }
    let any_reasoning = messages.iter().any(|m| m.reasoning.is_some());
    if blank_prompt && any_reasoning {
        return Err(Error::ModeConflict);
    }
    let mode = if any_reasoning || (add_generation_prompt && !blank_prompt) {
        Mode::Reasoning
    } else {
        Mode::NonReasoning
    };
    Ok(Conversation {
        messages,
        tools,
        mode,
        add_generation_prompt,
    })
}

fn parse_assistant(body: &str, offset: usize) -> Result<ChatMessage> {
    let Some(body) = body.strip_suffix('\n') else {
        return Err(malformed(offset, "assistant turn must end with a newline"));
    };
    if !body.starts_with("<think>") {
        return Err(malformed(
            offset,
            "assistant turn must open with a think block",
        ));
    }
    let (reasoning, response) = split_reasoning(body).map_err(|e| match e {
        Error::MalformedChat { offset: o, reason } => malformed(offset + o, reason),
        other => other,
    })?;
    let (content, calls) = match response.find(CALL_OPEN) {
        None => (response.as_str(), Vec::new()),
        Some(at) => {
            let content = if at == 0 {
                ""
            } else {
                response[..at]
                    .strip_suffix('\n')
                    .ok_or_else(|| malformed(offset, "tool call must start on its own line"))?
            };
            let tail = &response[at..];
            let calls = parse_tool_calls(tail)?;
            let rerendered: Vec<String> = calls.iter().map(render_tool_call).collect();
            if rerendered.join("\n") != tail {
                return Err(malformed(offset, "unexpected text around tool calls"));
            }
            (content, calls)
        }
    };
    Ok(ChatMessage::assistant(content)
        .with_reasoning(reasoning)
        .with_tool_calls(calls))
}

/// Separates an optional system prefix from a trailing tools block.
fn split_tools(body: &str, offset: usize) -> Result<Option<(Option<String>, Vec<ToolSpec>)>> {
    let (prefix, block) = if body.starts_with(TOOLS_HEADER) {
        (None, body)
    } else if let Some(at) = body.find(&format!("\n\n{TOOLS_HEADER}")) {
        (Some(body[..at].to_string()), &body[at + 2..])
    } else {
        return Ok(None);
    };
    let Some(lines) = block
        .strip_prefix(TOOLS_HEADER)
        .and_then(|b| b.strip_suffix(TOOLS_FOOTER))
    else {
        return Err(malformed(offset, "malformed tools block"));
    };
    let mut specs = Vec::new();
    for line in lines.lines() {
        let v: Value = serde_json::from_str(line)
            .map_err(|e| malformed(offset, format!("tool declaration: {e}")))?;
        let f = &v["function"];
        let (Some(name), Some(description)) = (f["name"].as_str(), f["description"].as_str())
        else {
            return Err(malformed(
                offset,
                "tool declaration lacks name or description",
            ));
        };
        let spec = ToolSpec {
            name: name.into(),
            description: description.into(),
            parameters: f["parameters"].clone(),
        };
        if tool_line(&spec) != line {
            return Err(malformed(
                offset,
                "tool declaration is not in canonical form",
            ));
        }
        specs.push(spec);
    }
    Ok(Some((prefix, specs)))
}
