/// Characters that always form a token of their own.
const PUNCTUATION: &str = ",./\\\"'=+-;:()!?<>%&$*|[]{}";

/// Whitespace/newline splitting with punctuation split off as single
/// characters; output is lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            flush(&mut current, &mut out);
        } else if PUNCTUATION.contains(ch) {
            flush(&mut current, &mut out);
            out.push(ch.to_string());
        } else {
            current.extend(ch.to_lowercase());
        }
    }
    flush(&mut current, &mut out);
    out
}

fn flush(current: &mut String, out: &mut Vec<String>) {
    if !current.is_empty() {
        out.push(std::mem::take(current));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_punctuation_and_lowercases() {
        assert_eq!(tokenize("He ran, (fast)!\nThen"), ["he", "ran", ",", "(", "fast", ")", "!", "then"]);
        assert_eq!(tokenize("  "), Vec::<String>::new());
        assert_eq!(tokenize("a--b"), ["a", "-", "-", "b"]);
        assert_eq!(tokenize("Ünïcode café"), ["ünïcode", "café"]);
    }
}
