//! Classic Metaphone phonetic encoding.

use unicode_normalization::UnicodeNormalization;

fn is_vowel(c: Option<char>) -> bool {
    matches!(c, Some('a' | 'e' | 'i' | 'o' | 'u'))
}

fn is_one_of(c: Option<char>, set: &str) -> bool {
    c.is_some_and(|c| set.contains(c))
}

/// Metaphone code of a single word. Non-letters are ignored.
pub fn metaphone_word(word: &str) -> String {
    let folded: String = word
        .nfkd()
        .filter(|c| c.is_ascii())
        .collect::<String>()
        .to_ascii_lowercase();
    let mut s: Vec<char> = folded.chars().collect();
    if s.len() >= 2 && matches!((s[0], s[1]), ('k', 'n') | ('g', 'n') | ('p', 'n') | ('w', 'r') | ('a', 'e')) {
        s.remove(0);
    }

    let at = |j: usize| s.get(j).copied();
    let mut out = String::new();
    let mut i = 0;
    while i < s.len() {
        let c = s[i];
        let next = at(i + 1);
        let nextnext = at(i + 2);
        let prev = if i > 0 { at(i - 1) } else { None };

        if Some(c) == next && c != 'c' {
            i += 1;
            continue;
        }

        match c {
            'a' | 'e' | 'i' | 'o' | 'u' => {
                if i == 0 {
                    out.push(c);
                }
            }
            'b' => out.push('b'),
            'c' => {
                if (next == Some('i') && nextnext == Some('a')) || next == Some('h') {
                    out.push('x');
                    i += 1;
                } else if is_one_of(next, "iey") {
                    out.push('s');
                    i += 1;
                } else {
                    out.push('k');
                }
            }
            'd' => {
                if next == Some('g') && is_one_of(nextnext, "iey") {
                    out.push('j');
                    i += 2;
                } else {
                    out.push('t');
                }
            }
            'f' | 'j' | 'l' | 'm' | 'n' | 'r' => out.push(c),
            'g' => {
                if is_one_of(next, "iey") {
                    out.push('j');
                } else if next == Some('h') && !is_vowel(nextnext) {
                    i += 1;
                } else {
                    out.push('k');
                }
            }
            'h' => {
                if i == 0 || is_vowel(next) || !is_vowel(prev) {
                    out.push('h');
                }
            }
            'k' => {
                if prev != Some('c') {
                    out.push('k');
                }
            }
            'p' => {
                if next == Some('h') {
                    out.push('f');
                    i += 1;
                } else {
                    out.push('p');
                }
            }
            'q' => out.push('k'),
            's' => {
                if next == Some('h') {
                    out.push('x');
                    i += 1;
                } else if next == Some('i') && is_one_of(nextnext, "oa") {
                    out.push('x');
                    i += 2;
                } else {
                    out.push('s');
                }
            }
            't' => {
                if next == Some('i') && is_one_of(nextnext, "oa") {
                    out.push('x');
                } else if next == Some('h') {
                    out.push('0');
                    i += 1;
                } else if next != Some('c') || nextnext != Some('h') {
                    out.push('t');
                }
            }
            'v' => out.push('f'),
            'w' => {
                if i == 0 && next == Some('h') {
                    i += 1;
                    out.push('w');
                } else if is_vowel(next) {
                    out.push('w');
                }
            }
            'x' => {
                if i == 0 {
                    if next == Some('h') || (next == Some('i') && is_one_of(nextnext, "oa")) {
                        out.push('x');
                    } else {
                        out.push('s');
                    }
                } else {
                    out.push_str("ks");
                }
            }
            'y' => {
                if is_vowel(next) {
                    out.push('y');
                }
            }
            'z' => out.push('s'),
            _ => {}
        }
        i += 1;
    }
    out.to_ascii_uppercase()
}

/// Space-joined Metaphone codes of each whitespace-separated token. Tokens
/// whose code is empty are skipped.
pub fn phonetic_key(name: &str) -> String {
    name.split_whitespace()
        .map(metaphone_word)
        .filter(|code| !code.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}
