//! Token sequences with a padding flag.

use alloc::vec::Vec;

use crate::vocab::{TokenId, BOS, EOS};

/// Immutable run of token ids. `padded` records that the sequence carries
/// the BOS/EOS sentinels at its ends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenSequence {
    tokens: Vec<TokenId>,
    padded: bool,
}

/// The sequence already starts with BOS and ends with EOS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlreadyPadded;

impl core::fmt::Display for AlreadyPadded {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "sequence is already padded")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AlreadyPadded {}

impl TokenSequence {
    pub fn new(tokens: Vec<TokenId>) -> Self {
        TokenSequence {
            tokens,
            padded: false,
        }
    }

    /// Wraps tokens that already carry sentinels, marking them padded.
    pub fn pre_padded(tokens: Vec<TokenId>) -> Self {
        debug_assert!(tokens.first() == Some(&BOS) && tokens.last() == Some(&EOS));
        TokenSequence {
            tokens,
            padded: true,
        }
    }

    /// Returns a copy wrapped in BOS/EOS. Padding twice is an error.
    pub fn pad(&self) -> Result<TokenSequence, AlreadyPadded> {
        if self.padded {
            return Err(AlreadyPadded);
        }
        let mut tokens = Vec::with_capacity(self.tokens.len() + 2);
        tokens.push(BOS);
        tokens.extend_from_slice(&self.tokens);
        tokens.push(EOS);
        Ok(TokenSequence {
            tokens,
            padded: true,
        })
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pad_wraps_in_sentinels() {
        let s = TokenSequence::new(vec![5, 6]);
        let p = s.pad().unwrap();
        assert_eq!(p.tokens(), &[BOS, 5, 6, EOS]);
        assert!(p.is_padded());
        assert!(!s.is_padded());
    }

    #[test]
    fn pad_of_empty_is_just_sentinels() {
        let p = TokenSequence::new(vec![]).pad().unwrap();
        assert_eq!(p.tokens(), &[BOS, EOS]);
    }

    #[test]
    fn double_pad_is_rejected() {
        let p = TokenSequence::new(vec![5]).pad().unwrap();
        assert_eq!(p.pad(), Err(AlreadyPadded));
    }
}
