//! Corpus-level vocabulary with reserved sentinel ids.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub type TokenId = u32;

/// Sequence-start sentinel, always id 0.
pub const BOS: TokenId = 0;
/// Sequence-end sentinel, always id 1.
pub const EOS: TokenId = 1;
/// Masked-token placeholder, always id 2. A MASK never matches anything.
pub const MASK: TokenId = 2;

pub const BOS_TEXT: &str = "<s>";
pub const EOS_TEXT: &str = "</s>";
pub const MASK_TEXT: &str = "<mask>";

/// True when two tokens count as a match for span-finding purposes.
/// MASK is excluded: masked positions never match, not even each other.
#[inline]
pub fn tokens_match(a: TokenId, b: TokenId) -> bool {
    a == b && a != MASK
}

/// Assigns ids in first-seen order, after the three reserved sentinels.
/// Interning the same corpus in the same order always yields the same ids.
#[derive(Debug, Clone)]
pub struct Vocab {
    by_text: BTreeMap<String, TokenId>,
    by_id: Vec<String>,
}

impl Vocab {
    pub fn new() -> Self {
        let mut v = Vocab {
            by_text: BTreeMap::new(),
            by_id: Vec::new(),
        };
        for text in [BOS_TEXT, EOS_TEXT, MASK_TEXT] {
            let id = v.by_id.len() as TokenId;
            v.by_text.insert(text.to_string(), id);
            v.by_id.push(text.to_string());
        }
        v
    }

    pub fn intern(&mut self, text: &str) -> TokenId {
        if let Some(&id) = self.by_text.get(text) {
            return id;
        }
        let id = self.by_id.len() as TokenId;
        self.by_text.insert(text.to_string(), id);
        self.by_id.push(text.to_string());
        id
    }

    pub fn intern_all(&mut self, texts: &[String]) -> Vec<TokenId> {
        texts.iter().map(|t| self.intern(t)).collect()
    }

    pub fn get(&self, text: &str) -> Option<TokenId> {
        self.by_text.get(text).copied()
    }

    pub fn text(&self, id: TokenId) -> Option<&str> {
        self.by_id.get(id as usize).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the sentinels are always present
    }
}

impl Default for Vocab {
    fn default() -> Self {
        Self::new()
    }
}

/// Splits on whitespace, optionally lowercasing first.
pub fn whitespace_tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            if lowercase {
                w.to_lowercase()
            } else {
                w.to_string()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinels_take_reserved_ids() {
        let v = Vocab::new();
        assert_eq!(v.get(BOS_TEXT), Some(BOS));
        assert_eq!(v.get(EOS_TEXT), Some(EOS));
        assert_eq!(v.get(MASK_TEXT), Some(MASK));
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn first_seen_order_is_stable() {
        let mut a = Vocab::new();
        let mut b = Vocab::new();
        for w in ["cat", "sat", "cat", "mat"] {
            a.intern(w);
        }
        for w in ["cat", "sat", "cat", "mat"] {
            b.intern(w);
        }
        assert_eq!(a.get("cat"), b.get("cat"));
        assert_eq!(a.get("sat"), Some(4));
        assert_eq!(a.get("mat"), Some(5));
        assert_eq!(a.text(4), Some("sat"));
    }

    #[test]
    fn mask_never_matches() {
        assert!(tokens_match(7, 7));
        assert!(!tokens_match(7, 8));
        assert!(!tokens_match(MASK, MASK));
    }

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(
            whitespace_tokenize("John  Smith\tWAS born", true),
            ["john", "smith", "was", "born"]
        );
        assert_eq!(whitespace_tokenize("A B", false), ["A", "B"]);
        assert!(whitespace_tokenize("   ", true).is_empty());
    }
}
