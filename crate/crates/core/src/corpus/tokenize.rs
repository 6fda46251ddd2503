pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{2026}' | '\u{2013}' | '\u{2014}'
                | '\u{00AB}' | '\u{00BB}' | '\u{00BF}' | '\u{00A1}'
        )
}

/// Lowercases, splits on whitespace and trims punctuation from each token.
/// URLs become `<url>` and @-mentions become `<user>`.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        if lower == URL_TOKEN || lower == USER_TOKEN {
            out.push(lower);
            continue;
        }
        let head = lower.trim_start_matches(|c: char| is_punct(c) && c != '@');
        if head.starts_with("http://") || head.starts_with("https://") || head.starts_with("www.") {
            out.push(URL_TOKEN.to_string());
            continue;
        }
        if head.len() > 1 && head.starts_with('@') {
            out.push(USER_TOKEN.to_string());
            continue;
        }
        let core = lower.trim_matches(is_punct);
        if !core.is_empty() {
            out.push(core.to_string());
        }
    }
    out
}
