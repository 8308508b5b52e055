use serde::{Deserialize, Serialize};

/// How raw utterance text is split into tokens. Both modes lowercase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// Whitespace split only; for text that is already tokenized.
    #[default]
    Pretokenized,
    /// Whitespace split, then leading and trailing ASCII punctuation become
    /// separate single-character tokens.
    RuleBased,
}

impl std::str::FromStr for TokenizerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pretokenized" => Ok(TokenizerMode::Pretokenized),
            "rule_based" | "rule-based" => Ok(TokenizerMode::RuleBased),
            other => Err(format!("unknown tokenizer mode '{other}'")),
        }
    }
}

pub fn tokenize(text: &str, mode: TokenizerMode) -> Vec<String> {
    let words = text.split_whitespace().map(str::to_lowercase);
    match mode {
        TokenizerMode::Pretokenized => words.collect(),
        TokenizerMode::RuleBased => {
            let mut out = Vec::new();
            for word in words {
                split_punctuation(&word, &mut out);
            }
            out
        }
    }
}

fn split_punctuation(word: &str, out: &mut Vec<String>) {
    let start = word.find(|c: char| !c.is_ascii_punctuation()).unwrap_or(word.len());
    let end = word
        .rfind(|c: char| !c.is_ascii_punctuation())
        .map(|i| i + word[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(start);

    out.extend(word[..start].chars().map(String::from));
    if start < end {
        out.push(word[start..end].to_string());
    }
    out.extend(word[end.max(start)..].chars().map(String::from));
}
