//! Strip extraneous matter from raw novel text: project boilerplate
//! headers and footers, page numbers, chapter headings and blank-line runs.
//! Paragraph text itself is left untouched.

use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};

static START_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*\*{3}\s*START OF.*$").unwrap());
static END_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*\*{3}\s*END OF.*$").unwrap());
static CHAPTER_HEADING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?ix)^\s*(chapter|part|book)\s+
          ([ivxlcdm]+|\d+|one|two|three|four|five|six|seven|eight|nine|ten|
           eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|
           nineteen|twenty(-\w+)?|thirty(-\w+)?|forty(-\w+)?)\b[.:]?.*$",
    )
    .unwrap()
});
static ROMAN_NUMERAL_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*[IVXLCDM]+\.?\s*$").unwrap());
static PAGE_NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*((page|p\.)\s*)?\d+\s*\.?\s*$|^\s*-\s*\d+\s*-\s*$").unwrap()
});
static DECORATION_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*[*_=~-]{3,}\s*$").unwrap());

/// True when a line is boilerplate rather than narrative.
pub(crate) fn is_boilerplate_line(line: &str) -> bool {
    CHAPTER_HEADING.is_match(line)
        || ROMAN_NUMERAL_LINE.is_match(line)
        || PAGE_NUMBER.is_match(line)
        || DECORATION_LINE.is_match(line)
        || START_MARKER.is_match(line)
        || END_MARKER.is_match(line)
}

/// Clean one novel's plain text. When project start/end markers are
/// present, everything outside them is dropped as well. Blank-line runs
/// collapse to a single blank line.
pub fn clean_source(raw_text: &str) -> Result<String> {
    let lines: Vec<&str> = raw_text.lines().collect();
    let body_start = lines
        .iter()
        .position(|l| START_MARKER.is_match(l))
        .map(|i| i + 1)
        .unwrap_or(0);
    let body_end = lines
        .iter()
        .position(|l| END_MARKER.is_match(l))
        .unwrap_or(lines.len());

    let mut out = String::new();
    let mut pending_blank = false;
    for line in lines
        .get(body_start..body_end)
        .unwrap_or(&[])
        .iter()
        .filter(|l| !is_boilerplate_line(l))
    {
        if line.trim().is_empty() {
            pending_blank = !out.is_empty();
        } else {
            if pending_blank {
                out.push_str("\n\n");
                pending_blank = false;
            } else if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(line.trim_end());
        }
    }

    if out.trim().is_empty() {
        return Err(Error::NoNarrativeContent);
    }
    Ok(out)
}
