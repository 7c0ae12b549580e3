use std::sync::OnceLock;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use vocadapt::chatml::{ChatMessage, Conversation, Mode, ToolCall, ToolSpec};
use vocadapt::Vocab;

/// Inclusive code point ranges drawn from when building mixed-script text.
const POOLS: &[(u32, u32)] = &[
    (0x61, 0x7A),       // a-z
    (0x41, 0x5A),       // A-Z
    (0x30, 0x39),       // ASCII digits
    (0x20, 0x20),       // space
    (0x0A, 0x0A),       // newline
    (0x21, 0x2F),       // ASCII punctuation
    (0x00, 0x1F),       // C0 controls
    (0xAC00, 0xAC20),   // a dense corner of Hangul syllables
    (0xAC00, 0xD7A3),   // all Hangul syllables
    (0x1100, 0x11FF),   // conjoining jamo
    (0x4E00, 0x4E40),   // CJK
    (0x3041, 0x30FF),   // kana
    (0x0410, 0x044F),   // Cyrillic
    (0x0391, 0x03C9),   // Greek
    (0x0627, 0x064A),   // Arabic
    (0x0660, 0x0669),   // Arabic-Indic digits
    (0x0300, 0x036F),   // combining marks
    (0x1F600, 0x1F64F), // emoji
    (0x3000, 0x3000),   // ideographic space
    (0xE000, 0xE010),   // private use
];

pub fn mixed_char() -> impl Strategy<Value = char> {
    (0..POOLS.len(), any::<u32>()).prop_map(|(pool, x)| {
        let (lo, hi) = POOLS[pool];
        let cp = lo + x % (hi - lo + 1);
        char::from_u32(cp).unwrap_or('?')
    })
}

/// Mixed-script strings of at most `max_bytes` UTF-8 bytes.
pub fn mixed_string(max_bytes: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(mixed_char(), 0..=max_bytes).prop_map(move |chars| {
        let mut s = String::new();
        for c in chars {
            if s.len() + c.len_utf8() > max_bytes {
                break;
            }
            s.push(c);
        }
        s
    })
}

/// Mostly mixed-script characters with any scalar value mixed in.
pub fn unicode_string(max_chars: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![4 => mixed_char(), 1 => any::<char>()],
        0..=max_chars,
    )
    .prop_map(|v| v.into_iter().collect())
}

/// A random small vocabulary: merges built from random pairs of tokens over a
/// tiny byte alphabet that includes two Hangul syllables.
pub fn random_vocab(rng: &mut impl Rng, merges: usize) -> Vocab {
    let alphabet: &[&[u8]] = &[b"a", b"b", b"c", b" ", "가".as_bytes(), "나".as_bytes()];
    let mut tokens: Vec<Vec<u8>> = Vec::new();
    for piece in alphabet {
        for &b in *piece {
            if !tokens.iter().any(|t| t == &[b]) {
                tokens.push(vec![b]);
            }
        }
    }
    let mut vocab = Vocab::base();
    let mut attempts = 0;
    while vocab.merge_count() < merges && attempts < merges * 50 {
        attempts += 1;
        let l = tokens.choose(rng).unwrap().clone();
        let r = tokens.choose(rng).unwrap().clone();
        let joined = [l.as_slice(), r.as_slice()].concat();
        if joined.len() > 9 || vocab.token_id(&joined).is_some() {
            continue;
        }
        vocab = vocab.with_appended_merge(&l, &r).expect("operands exist");
        tokens.push(joined);
    }
    vocab
}

/// Text built from the same alphabet as [`random_vocab`].
pub fn random_alphabet_text(rng: &mut impl Rng, len: usize) -> String {
    const CHARS: [char; 6] = ['a', 'b', 'c', ' ', '가', '나'];
    (0..len).map(|_| *CHARS.choose(rng).unwrap()).collect()
}

const SAMPLE: &str = "\
The quick brown fox jumps over the lazy dog. Numbers like 2024 and 3.14 stay split.
서울의 인구는 약 940만 명입니다. 오늘은 날씨가 맑고 기온은 23도입니다.
東京は日本の首都です。カタカナとひらがなも混ざります。
Привет, мир! Καλημέρα κόσμε. مرحبا بالعالم
fn main() { println!(\"hello, world\"); } // code with symbols: <>=+-*/
한국어와 English가 섞인 문장도 자주 등장합니다. 감사합니다!
🙂 emoji 🚀 and tabs\tand\r\nCRLF lines.
";

/// A vocabulary trained on a short mixed-script sample, built once.
pub fn sample_vocab() -> &'static Vocab {
    static V: OnceLock<Vocab> = OnceLock::new();
    V.get_or_init(|| {
        let docs: Vec<String> = (0..4).map(|i| SAMPLE.repeat(i + 1)).collect();
        vocadapt::bpe::train(&docs, 700)
            .expect("sample trains")
            .vocab
    })
}

/// `n` distinct Hangul syllables in random order.
pub fn distinct_syllables(rng: &mut impl Rng, n: usize) -> Vec<char> {
    let mut all: Vec<char> = (0xAC00u32..=0xD7A3).filter_map(char::from_u32).collect();
    all.shuffle(rng);
    all.truncate(n);
    all
}

/// Two texts `S+X` and `S+Y` over distinct characters, with `|S| = shared`
/// and `|X| = |Y| = distinct`. Their 5-shingle Jaccard is exactly
/// `(shared - 4) / (shared + 2 * distinct - 4)`.
pub fn jaccard_pair(rng: &mut impl Rng, shared: usize, distinct: usize) -> (String, String) {
    let chars = distinct_syllables(rng, shared + 2 * distinct);
    let s: String = chars[..shared].iter().collect();
    let x: String = chars[shared..shared + distinct].iter().collect();
    let y: String = chars[shared + distinct..].iter().collect();
    (format!("{s}{x}"), format!("{s}{y}"))
}

/// 100 documents: 20 near-duplicate pairs, 20 decoy pairs sharing a prefix,
/// and 20 unrelated documents, shuffled. Pair indices are (earlier, later).
pub struct PlantedCorpus {
    pub docs: Vec<String>,
    pub near_duplicates: Vec<(usize, usize)>,
    pub decoys: Vec<(usize, usize)>,
}

pub fn planted_corpus(rng: &mut impl Rng) -> PlantedCorpus {
    let pool: Vec<char> = (0xAC00u32..0xAC00 + 3000)
        .filter_map(char::from_u32)
        .collect();
    let random_text = |rng: &mut dyn rand::RngCore, len: usize| -> Vec<char> {
        (0..len).map(|_| *pool.choose(rng).unwrap()).collect()
    };
    let mut groups: Vec<(u8, Vec<String>)> = Vec::new();
    for _ in 0..20 {
        let a = random_text(rng, 300);
        let mut b = a.clone();
        // three edits, far enough apart that their shingles never overlap
        for slot in 0..3 {
            let at = 20 + slot * 100 + rng.gen_range(0..50);
            b[at] = *pool.choose(rng).unwrap();
        }
        groups.push((1, vec![a.iter().collect(), b.iter().collect()]));
    }
    for _ in 0..20 {
        let shared = random_text(rng, 110);
        let a: String = shared.iter().chain(&random_text(rng, 190)).collect();
        let b: String = shared.iter().chain(&random_text(rng, 190)).collect();
        groups.push((2, vec![a, b]));
    }
    for _ in 0..20 {
        groups.push((0, vec![random_text(rng, 300).iter().collect()]));
    }
    groups.shuffle(rng);
    let mut out = PlantedCorpus {
        docs: Vec::new(),
        near_duplicates: Vec::new(),
        decoys: Vec::new(),
    };
    for (kind, texts) in groups {
        let first = out.docs.len();
        out.docs.extend(texts);
        match kind {
            1 => out.near_duplicates.push((first, first + 1)),
            2 => out.decoys.push((first, first + 1)),
            _ => {}
        }
    }
    out
}

fn chat_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-z가-힣 \n<>/|_.]{0,24}").unwrap()
}

pub fn tool_call() -> impl Strategy<Value = ToolCall> {
    (
        "[a-z_]{1,8}",
        proptest::collection::vec(("[a-z_]{1,6}", chat_text()), 0..3),
    )
        .prop_map(|(function_name, args)| ToolCall {
            function_name,
            args,
        })
}

fn assistant_turn(mode: Mode) -> impl Strategy<Value = ChatMessage> {
    (
        chat_text(),
        proptest::option::of(chat_text()),
        proptest::collection::vec(tool_call(), 0..3),
    )
        .prop_map(move |(content, reasoning, calls)| {
            let m = ChatMessage::assistant(content).with_tool_calls(calls);
            match (mode, reasoning) {
                (Mode::Reasoning, Some(r)) => m.with_reasoning(r),
                _ => m,
            }
        })
}

/// Conversations with optional system prompt, tools, media, reasoning and
/// multi-call assistant turns. Content is drawn from an alphabet rich in
/// markup characters, so some conversations are unrenderable.
pub fn conversation() -> impl Strategy<Value = Conversation> {
    (
        prop_oneof![Just(Mode::Reasoning), Just(Mode::NonReasoning)],
        any::<bool>(),
    )
        .prop_flat_map(|(mode, gen_prompt)| {
            let turn = prop_oneof![
                (chat_text(), 0usize..2)
                    .prop_map(|(t, media)| ChatMessage::user(t).with_media(media)),
                assistant_turn(mode),
            ];
            let tools =
                proptest::collection::btree_map("[a-z]{1,6}", (chat_text(), any::<i32>()), 0..3)
                    .prop_map(|m| {
                        m.into_iter()
                .map(|(name, (description, n))| ToolSpec {
                    name,
                    description,
                    parameters: serde_json::json!({"type": "object", "n": n, "list": [n, "x"]}),
                })
                .collect::<Vec<_>>()
                    });
            (
                proptest::option::of(chat_text()),
                proptest::collection::vec(turn, 1..5),
                tools,
            )
                .prop_map(move |(system, turns, tools)| {
                    let mut messages: Vec<ChatMessage> =
                        system.map(ChatMessage::system).into_iter().collect();
                    messages.extend(turns);
                    Conversation {
                        messages,
                        tools,
                        mode,
                        add_generation_prompt: gen_prompt,
                    }
                })
        })
}
