//! Tweet tokenizer.
//!
//! Text is lowercased and split on whitespace. Whitespace chunks that are URLs
//! (`http://`, `https://`, `www.`) or @mentions are dropped whole. Everything
//! else is split on any character that is not a letter or digit, except that a
//! hyphen or apostrophe with a letter/digit on both sides stays inside the token.
//! A leading `#` is therefore just a separator and the hashtag body survives as
//! one token.

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c.is_numeric()
}

fn is_joiner(c: char) -> bool {
    c == '-' || c == '\''
}

/// Characters stripped before checking a chunk for a URL or mention prefix,
/// so that `(@who` and `"https://...` are recognised.
fn is_opening_punct(c: char) -> bool {
    !is_word_char(c) && c != '@' && c != '#'
}

fn is_dropped_chunk(chunk: &str) -> bool {
    let core = chunk.trim_start_matches(is_opening_punct);
    core.starts_with('@') || URL_PREFIXES.iter().any(|p| core.starts_with(p))
}

/// Tokenize tweet text into lowercase tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase().replace('\u{2019}', "'");
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        if is_dropped_chunk(chunk) {
            continue;
        }
        split_chunk(chunk, &mut tokens);
    }
    tokens
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let keep = if is_word_char(c) {
            true
        } else if is_joiner(c) {
            let before = i > 0 && is_word_char(chars[i - 1]);
            let after = chars.get(i + 1).is_some_and(|&n| is_word_char(n));
            before && after
        } else {
            false
        };
        if keep {
            current.push(c);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drops_urls_mentions_and_hash_marker() {
        assert_eq!(
            tokenize("Stay SAFE! https://t.co/xyz @who #StayHome"),
            vec!["stay", "safe", "stayhome"]
        );
    }

    #[test]
    fn keeps_intra_word_hyphen_and_apostrophe() {
        assert_eq!(
            tokenize("COVID-19 won't stop"),
            vec!["covid-19", "won't", "stop"]
        );
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \n\t").is_empty());
    }

    #[test]
    fn edge_joiners_are_separators() {
        assert_eq!(tokenize("-covid- 'quoted' a--b"), vec!["covid", "quoted", "a", "b"]);
    }

    #[test]
    fn curly_apostrophe_is_normalised() {
        assert_eq!(tokenize("Don\u{2019}t"), vec!["don't"]);
    }

    #[test]
    fn wrapped_mentions_and_urls() {
        assert_eq!(tokenize("(@who) \"www.example.com\" ok"), vec!["ok"]);
        assert_eq!(tokenize("RT @user: hello"), vec!["rt", "hello"]);
    }

    #[test]
    fn punctuation_glued_words_split() {
        assert_eq!(tokenize("wow!!!great,stuff"), vec!["wow", "great", "stuff"]);
        assert_eq!(tokenize("#WuhanVirus."), vec!["wuhanvirus"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_are_nonempty_without_whitespace(text in "\\PC{0,80}") {
            for t in tokenize(&text) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn idempotent_on_tweet_like_text(
            words in prop::collection::vec("[#@]?[A-Za-z0-9'\\-]{1,8}[.!,]?|https?://[a-z./]{1,10}", 0..12)
        ) {
            let text = words.join(" ");
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }
    }
}
