//! Text repair for raw cell bytes.

use unicode_normalization::UnicodeNormalization;

/// Windows-1252 characters occupying the 0x80..=0x9F byte range.
const CP1252_HIGH: [(u8, char); 27] = [
    (0x80, '€'),
    (0x82, '‚'),
    (0x83, 'ƒ'),
    (0x84, '„'),
    (0x85, '…'),
    (0x86, '†'),
    (0x87, '‡'),
    (0x88, 'ˆ'),
    (0x89, '‰'),
    (0x8A, 'Š'),
    (0x8B, '‹'),
    (0x8C, 'Œ'),
    (0x8E, 'Ž'),
    (0x91, '‘'),
    (0x92, '’'),
    (0x93, '“'),
    (0x94, '”'),
    (0x95, '•'),
    (0x96, '–'),
    (0x97, '—'),
    (0x98, '˜'),
    (0x99, '™'),
    (0x9A, 'š'),
    (0x9B, '›'),
    (0x9C, 'œ'),
    (0x9E, 'ž'),
    (0x9F, 'Ÿ'),
];

/// Decodes raw cell bytes into clean text.
///
/// Invalid UTF-8 is read as Latin-1. The result is repaired for UTF-8 that
/// was mis-read as Latin-1 / Windows-1252 ("CafÃ©" becomes "Café"), stripped
/// of control and zero-width characters, whitespace-collapsed, trimmed, and
/// NFC-normalized. The operation is idempotent.
pub fn decode_text(raw: &[u8]) -> String {
    let text = match std::str::from_utf8(raw) {
        Ok(s) => s.to_string(),
        Err(_) => raw.iter().map(|&b| b as char).collect(),
    };
    clean_text(&text)
}

/// [`decode_text`] for input that is already a `str`.
pub fn clean_text(text: &str) -> String {
    let mut current = clean_once(text);
    // Every repair shortens the string, so this reaches a fixed point.
    loop {
        let next = clean_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn clean_once(text: &str) -> String {
    let repaired = repair_mojibake(text);
    let mut stripped = String::with_capacity(repaired.len());
    for c in repaired.chars() {
        if c.is_whitespace() {
            stripped.push(' ');
        } else if c.is_control() || matches!(c, '\u{FEFF}' | '\u{200B}' | '\u{200C}' | '\u{200D}' | '\u{2060}') {
            continue;
        } else {
            stripped.push(c);
        }
    }
    let collapsed = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.nfc().collect()
}

fn mojibake_byte(c: char) -> Option<u8> {
    let cp = c as u32;
    if (0x80..=0xFF).contains(&cp) {
        return Some(cp as u8);
    }
    CP1252_HIGH.iter().find(|(_, ch)| *ch == c).map(|(b, _)| *b)
}

/// Re-decodes runs of Latin-1 / Windows-1252 characters whose byte values
/// form valid multi-byte UTF-8 sequences. Characters that do not belong to a
/// valid sequence are left untouched.
fn repair_mojibake(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let Some(lead) = mojibake_byte(chars[i]) else {
            out.push(chars[i]);
            i += 1;
            continue;
        };
        let width = match lead {
            0xC2..=0xDF => 2,
            0xE0..=0xEF => 3,
            0xF0..=0xF4 => 4,
            _ => 0,
        };
        if width > 0 && i + width <= chars.len() {
            let mut bytes = vec![lead];
            for &c in &chars[i + 1..i + width] {
                match mojibake_byte(c) {
                    Some(b) if (0x80..=0xBF).contains(&b) => bytes.push(b),
                    _ => break,
                }
            }
            if bytes.len() == width {
                if let Ok(s) = std::str::from_utf8(&bytes) {
                    out.push_str(s);
                    i += width;
                    continue;
                }
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}
