//! Tokenization, bracket cleanup and quotation spans.
//!
//! All downstream analysis works on the token stream produced here. Token
//! spans index into the NFC-normalized form of the input (see [`normalize`]);
//! for text that is already NFC, which includes all ASCII, this is the input
//! itself.

use std::ops::Range;

use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Byte range into the normalized source.
    pub span: Range<usize>,
    pub kind: TokenKind,
}

impl Token {
    /// Words and numbers count towards sentence length; punctuation does not.
    pub fn is_countable(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Number)
    }

    pub fn is_capitalized(&self) -> bool {
        self.kind == TokenKind::Word && self.text.chars().next().is_some_and(char::is_uppercase)
    }
}

/// Token-index interval strictly inside a pair of quotation marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuoteSpan {
    pub open: usize,
    pub close: usize,
}

impl QuoteSpan {
    pub fn contains(&self, range: &Range<usize>) -> bool {
        self.open <= range.start && range.end <= self.close
    }
}

pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

/// Number of word and number tokens.
pub fn word_count(tokens: &[Token]) -> usize {
    tokens.iter().filter(|t| t.is_countable()).count()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '.' | ',')
}

/// Splits normalized text into word, number and punctuation tokens.
///
/// Alphanumeric runs form one token, so measure phrases such as `180cm` stay
/// whole. An apostrophe or hyphen between two alphanumerics joins them
/// (`don't`, `well-known`), as does a `.` or `,` between two digits
/// (`3.5`, `1,000`). Every other non-space character is its own token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let source = normalize(text);
    tokenize_normalized(&source)
}

fn tokenize_normalized(source: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = source.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            while j < chars.len() {
                let cj = chars[j].1;
                if cj.is_alphanumeric() {
                    j += 1;
                    continue;
                }
                if is_joiner(cj) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                    let numeric_only = matches!(cj, '.' | ',');
                    if !numeric_only || (chars[j - 1].1.is_ascii_digit() && chars[j + 1].1.is_ascii_digit()) {
                        j += 2;
                        continue;
                    }
                }
                break;
            }
        }
        let end = chars.get(j).map_or(source.len(), |&(b, _)| b);
        let text = &source[start..end];
        tokens.push(Token {
            text: text.to_string(),
            span: start..end,
            kind: classify(text),
        });
        i = j;
    }
    tokens
}

fn classify(text: &str) -> TokenKind {
    match text.chars().next() {
        Some(c) if c.is_ascii_digit() => TokenKind::Number,
        _ if text.chars().any(char::is_alphanumeric) => TokenKind::Word,
        _ => TokenKind::Punctuation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum QuoteMark {
    Straight,
    CurlyOpen,
    CurlyClose,
    GuillemetOpen,
    GuillemetClose,
}

fn quote_mark(token: &Token) -> Option<QuoteMark> {
    match token.text.as_str() {
        "\"" => Some(QuoteMark::Straight),
        "\u{201C}" => Some(QuoteMark::CurlyOpen),
        "\u{201D}" => Some(QuoteMark::CurlyClose),
        "\u{00AB}" => Some(QuoteMark::GuillemetOpen),
        "\u{00BB}" => Some(QuoteMark::GuillemetClose),
        _ => None,
    }
}

fn closes(open: QuoteMark, mark: QuoteMark) -> bool {
    matches!(
        (open, mark),
        (QuoteMark::Straight, QuoteMark::Straight)
            | (QuoteMark::CurlyOpen, QuoteMark::CurlyClose)
            | (QuoteMark::GuillemetOpen, QuoteMark::GuillemetClose)
    )
}

/// Pairs quotation marks left to right.
///
/// While a quote is open, marks of another style are ordinary content. An
/// opening mark left unclosed at the end yields no span, and so does an empty
/// pair.
pub fn detect_quotes(tokens: &[Token]) -> Vec<QuoteSpan> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, QuoteMark)> = None;
    for (idx, token) in tokens.iter().enumerate() {
        let Some(mark) = quote_mark(token) else {
            continue;
        };
        match open {
            Some((start, kind)) if closes(kind, mark) => {
                if start + 1 < idx {
                    spans.push(QuoteSpan {
                        open: start + 1,
                        close: idx,
                    });
                }
                open = None;
            }
            Some(_) => {}
            None => {
                if matches!(
                    mark,
                    QuoteMark::Straight | QuoteMark::CurlyOpen | QuoteMark::GuillemetOpen
                ) {
                    open = Some((idx, mark));
                }
            }
        }
    }
    spans
}

/// Removes `[` and `]`, collapsing whitespace left around a removed bracket
/// into a single space. Whitespace that ends up leading or trailing because of
/// a removal is dropped. Text without brackets is returned unchanged.
pub fn clean_brackets(text: &str) -> String {
    if !text.contains(['[', ']']) {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut pending = String::new();
    let mut touched = false;
    for c in text.chars() {
        match c {
            '[' | ']' => touched = true,
            c if c.is_whitespace() => pending.push(c),
            c => {
                if !pending.is_empty() {
                    if !touched {
                        out.push_str(&pending);
                    } else if !out.is_empty() {
                        out.push(' ');
                    }
                    pending.clear();
                }
                touched = false;
                out.push(c);
            }
        }
    }
    if !touched {
        out.push_str(&pending);
    }
    out
}
