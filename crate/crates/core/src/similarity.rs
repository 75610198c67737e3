//! String similarity and number parsing shared by several pipeline steps.

/// Normalized Levenshtein similarity: `1 - distance / max(len)`, measured in
/// Unicode scalar values. Two empty strings are identical (1.0).
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

/// Case-insensitive variant of [`normalized_levenshtein`].
pub fn normalized_levenshtein_ci(a: &str, b: &str) -> f64 {
    normalized_levenshtein(&a.to_lowercase(), &b.to_lowercase())
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

/// Levenshtein distance over pre-split character slices.
pub fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    strsim::generic_levenshtein(&a.to_vec(), &b.to_vec())
}

/// Parses a cell or literal as a finite number.
///
/// Accepts surrounding whitespace, a leading `+`, and `,` thousands
/// separators (`1,234.5`). Rejects anything else, including NaN and infinity.
pub fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    let t = t.strip_prefix('+').unwrap_or(t);
    let cleaned: String = if t.contains(',') {
        if !valid_thousands(t) {
            return None;
        }
        t.chars().filter(|&c| c != ',').collect()
    } else {
        t.to_string()
    };
    // Rust's parser accepts "inf"/"nan"; require at least one digit.
    if !cleaned.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    if cleaned
        .bytes()
        .any(|b| !(b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'e' | b'E' | b'+')))
    {
        return None;
    }
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn valid_thousands(t: &str) -> bool {
    let int_part = t.split(['.', 'e', 'E']).next().unwrap_or("");
    let int_part = int_part.strip_prefix('-').unwrap_or(int_part);
    let mut groups = int_part.split(',');
    let first = groups.next().unwrap_or("");
    if first.is_empty() || first.len() > 3 {
        return false;
    }
    groups.all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit())) && !t[int_part.len()..].contains(',')
}

/// Pulls the first number out of a free-form cell such as `"12 km"` or
/// `"$1,200"`. Used when a column has already been judged numerical.
pub fn extract_number(s: &str) -> Option<f64> {
    if let Some(v) = parse_number(s) {
        return Some(v);
    }
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let starts_number =
            bytes[i].is_ascii_digit() || (bytes[i] == b'-' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit());
        if starts_number {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j].is_ascii_digit() || matches!(bytes[j], b'.' | b',')) {
                j += 1;
            }
            let token = s[i..j].trim_end_matches(['.', ',']);
            if let Some(v) = parse_number(token) {
                return Some(v);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levenshtein_examples() {
        assert_eq!(normalized_levenshtein("abc", "abc"), 1.0);
        assert!((normalized_levenshtein("abc", "abd") - 2.0 / 3.0).abs() < 1e-12);
        assert!((normalized_levenshtein("Citty", "City") - 0.8).abs() < 1e-12);
        assert_eq!(normalized_levenshtein("", ""), 1.0);
        assert_eq!(normalized_levenshtein("xyz", "abc"), 0.0);
        assert_eq!(normalized_levenshtein_ci("TOKYO", "tokyo"), 1.0);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("12.5"), Some(12.5));
        assert_eq!(parse_number(" 1,234,567 "), Some(1_234_567.0));
        assert_eq!(parse_number("-3e2"), Some(-300.0));
        assert_eq!(parse_number("+7"), Some(7.0));
        assert_eq!(parse_number("1,23"), None);
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("NaN"), None);
        assert_eq!(parse_number("12 km"), None);
        assert_eq!(parse_number(""), None);
    }

    #[test]
    fn extraction() {
        assert_eq!(extract_number("12 km"), Some(12.0));
        assert_eq!(extract_number("$1,200"), Some(1200.0));
        assert_eq!(extract_number("about -4.5 degrees"), Some(-4.5));
        assert_eq!(extract_number("none"), None);
    }
}
