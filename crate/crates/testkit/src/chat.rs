use serde_json::{json, Value};
use vocadapt::chatml::{ChatMessage, Conversation, Mode, ToolSpec, WireOptions};

use crate::fixtures::chat_template;

pub const QUERY: &str = "서울의 인구는 얼마인가요?";
pub const RESPONSE: &str = "약 940만 명입니다.";
pub const REASONING: &str = "The user asks for Seoul's population.\nRecall the latest estimate.";
pub const MEDIA_SENTINEL: &str = "<|vision_embed|>";

/// A conversation together with the exact bytes its template listing prescribes.
pub struct TemplateCase {
    pub name: &'static str,
    pub conversation: Conversation,
    pub options: WireOptions,
    pub expected: String,
}

fn fill(template: &str) -> String {
    template
        .replace("{query}", QUERY)
        .replace("{response}", RESPONSE)
        .replace("{reasoning_content}", REASONING)
}

fn plain(messages: Vec<ChatMessage>, mode: Mode) -> Conversation {
    Conversation {
        messages,
        tools: vec![],
        mode,
        add_generation_prompt: false,
    }
}

/// JSON with `", "` and `": "` separators, written out independently of the crate.
pub fn spaced(v: &Value) -> String {
    match v {
        Value::Object(m) => {
            let parts: Vec<String> = m
                .iter()
                .map(|(k, v)| format!("{}: {}", json!(k), spaced(v)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        Value::Array(a) => format!("[{}]", a.iter().map(spaced).collect::<Vec<_>>().join(", ")),
        s => s.to_string(),
    }
}

pub fn non_reasoning() -> TemplateCase {
    TemplateCase {
        name: "non_reasoning",
        conversation: plain(
            vec![ChatMessage::user(QUERY), ChatMessage::assistant(RESPONSE)],
            Mode::NonReasoning,
        ),
        options: WireOptions::default(),
        expected: fill(&chat_template("non_reasoning")),
    }
}

pub fn reasoning() -> TemplateCase {
    TemplateCase {
        name: "reasoning",
        conversation: plain(
            vec![
                ChatMessage::user(QUERY),
                ChatMessage::assistant(RESPONSE).with_reasoning(REASONING),
            ],
            Mode::Reasoning,
        ),
        options: WireOptions::default(),
        expected: fill(&chat_template("reasoning")),
    }
}

pub fn agent() -> TemplateCase {
    let params = [
        json!({"type": "object", "properties": {"city": {"type": "string"}}, "required": ["city"]}),
        json!({"type": "object", "properties": {}}),
    ];
    // The listing elides further declarations with a bare `...` line.
    let mut expected = fill(&chat_template("agent")).replacen("...\n</tools>", "</tools>", 1);
    for (i, p) in params.iter().enumerate() {
        let n = i + 1;
        expected = expected
            .replacen(&format!("FUNCTION_NAME_{n}"), &format!("tool_{n}"), 1)
            .replacen(
                &format!("DESCRIPTION_{n}"),
                &format!("Describes tool {n}."),
                1,
            )
            .replacen("{ ... }", &spaced(p), 1);
    }
    let tools = params
        .iter()
        .enumerate()
        .map(|(i, p)| ToolSpec {
            name: format!("tool_{}", i + 1),
            description: format!("Describes tool {}.", i + 1),
            parameters: p.clone(),
        })
        .collect();
    TemplateCase {
        name: "agent",
        conversation: Conversation {
            messages: vec![
                ChatMessage::user("test"),
                ChatMessage::assistant(RESPONSE).with_reasoning(REASONING),
            ],
            tools,
            mode: Mode::Reasoning,
            add_generation_prompt: false,
        },
        options: WireOptions::default(),
        expected,
    }
}

pub fn multimodal() -> TemplateCase {
    TemplateCase {
        name: "multimodal",
        conversation: plain(
            vec![
                ChatMessage::user(QUERY).with_media(1),
                ChatMessage::assistant(RESPONSE).with_reasoning(REASONING),
            ],
            Mode::Reasoning,
        ),
        options: WireOptions {
            media_sentinel: MEDIA_SENTINEL.into(),
        },
        expected: fill(&chat_template("multimodal"))
            .replace("{multimodal embedding}", MEDIA_SENTINEL)
            .replace("\\n", "\n"),
    }
}

pub fn template_cases() -> [TemplateCase; 4] {
    [non_reasoning(), reasoning(), agent(), multimodal()]
}
