use serde::{Deserialize, Serialize};

/// Utterances kept as conversation context: two turns.
pub const CONTEXT_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Human,
    Computer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text: String,
    pub turn: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConversationSession {
    pub id: String,
    utterances: Vec<Utterance>,
}

impl ConversationSession {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into(), utterances: Vec::new() }
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// Appends an utterance with the next turn index.
    pub fn push(&mut self, speaker: Speaker, text: impl Into<String>) -> &Utterance {
        let turn = self.utterances.last().map_or(0, |u| u.turn + 1);
        self.utterances.push(Utterance { speaker, text: text.into(), turn });
        self.utterances.last().expect("just pushed")
    }

    /// Texts of the last `n` utterances, oldest first.
    pub fn window(&self, n: usize) -> Vec<String> {
        let start = self.utterances.len().saturating_sub(n);
        self.utterances[start..].iter().map(|u| u.text.clone()).collect()
    }
}
