//! Edit distance and partial token-sort similarity.

/// Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(ca != cb);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

fn sorted_tokens(s: &str) -> Vec<char> {
    let mut tokens: Vec<&str> = s.split_whitespace().collect();
    tokens.sort_unstable();
    tokens.join(" ").chars().collect()
}

/// Partial token-sort ratio in `[0, 100]`.
///
/// Tokens of both strings are sorted and rejoined; the shorter string is slid
/// over every window of equal length in the longer one, and the best window
/// similarity `1 - levenshtein / len` is scaled to a rounded percentage.
pub fn partial_token_sort_ratio(a: &str, b: &str) -> u8 {
    let a = sorted_tokens(a);
    let b = sorted_tokens(b);
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if short.is_empty() {
        return if long.is_empty() { 100 } else { 0 };
    }
    let n = short.len();
    let mut best = usize::MAX;
    for start in 0..=long.len() - n {
        best = best.min(levenshtein(short, &long[start..start + n]));
        if best == 0 {
            break;
        }
    }
    let similarity = 1.0 - best as f64 / n as f64;
    (100.0 * similarity).round() as u8
}
