//! Plain-text family format.
//!
//! Line 1: `n=<ground set size>`. Each later line is one member given as
//! comma-separated 1-based elements in any order. A line that is entirely
//! whitespace denotes the empty set as a member. `#` starts a comment that
//! runs to end of line; a line holding only a comment is skipped. The writer
//! emits members sorted by (size, bitmask), so output is canonical.

use std::fmt::Write as _;

use thiserror::Error;

use crate::family::{ElementSet, FamilyError, SetFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Family {
        line: usize,
        #[source]
        source: FamilyError,
    },
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

/// Parse the text format described in the module docs.
pub fn parse_family(text: &str) -> Result<SetFamily, ParseError> {
    let mut lines = text.lines().enumerate();

    // Header: first line that is not blank/comment must be `n=<int>`.
    // Blank lines before the header are layout (no family exists yet), not
    // empty members.
    let mut header: Option<(usize, &str)> = None;
    for (idx, raw) in lines.by_ref() {
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        header = Some((idx + 1, body));
        break;
    }
    let (header_line, header_body) = header.ok_or_else(|| syntax(1, "missing `n=<int>` header"))?;
    let header_body = header_body.trim();
    let n: u32 = header_body
        .strip_prefix("n=")
        .or_else(|| header_body.strip_prefix("n ="))
        .map(str::trim)
        .ok_or_else(|| syntax(header_line, format!("expected `n=<int>` header, found `{header_body}`")))?
        .parse()
        .map_err(|_| syntax(header_line, format!("invalid ground set size in `{header_body}`")))?;

    let mut fam = SetFamily::new(n).map_err(|source| ParseError::Family { line: header_line, source })?;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            if raw.contains('#') {
                // Comment-only line: skipped.
                continue;
            }
            // Blank line: the empty set as a member.
            insert_checked(&mut fam, ElementSet::EMPTY, line_no)?;
            continue;
        }
        let mut elements = Vec::new();
        for piece in body.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(syntax(line_no, "empty element between commas"));
            }
            let e: u32 = piece
                .parse()
                .map_err(|_| syntax(line_no, format!("invalid element `{piece}`")))?;
            if e < 1 || e > n {
                return Err(ParseError::Family {
                    line: line_no,
                    source: FamilyError::ElementOutOfRange { element: e, n },
                });
            }
            if elements.contains(&e) {
                return Err(syntax(line_no, format!("duplicate element {e}")));
            }
            elements.push(e);
        }
        insert_checked(&mut fam, ElementSet::from_elements(&elements), line_no)?;
    }
    Ok(fam)
}

fn insert_checked(fam: &mut SetFamily, set: ElementSet, line: usize) -> Result<(), ParseError> {
    match fam.insert(set) {
        Ok(true) => Ok(()),
        Ok(false) => Err(syntax(line, format!("duplicate member {set}"))),
        Err(source) => Err(ParseError::Family { line, source }),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Canonical writer: header, then members by (size, bitmask), the empty set
/// as a blank line.
pub fn write_family(fam: &SetFamily) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n={}", fam.n());
    for s in fam.members_by_size() {
        if s.is_empty() {
            out.push('\n');
        } else {
            let elems: Vec<String> = s.elements().iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{}", elems.join(","));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_simple_family() {
        let f = parse_family("n=5\n1,2\n3,4,5\n").unwrap();
        assert_eq!(f.n(), 5);
        assert_eq!(f.len(), 2);
        assert!(f.contains(ElementSet::from_elements(&[1, 2])));
        assert!(f.contains(ElementSet::from_elements(&[3, 4, 5])));
    }

    #[test]
    fn comments_and_unordered_elements() {
        let text = "n=4  # ground set\n# full comment line\n2,1   # a pair\n4,3,2,1\n";
        let f = parse_family(text).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.contains(ElementSet::from_elements(&[1, 2])));
        assert!(f.contains(ElementSet::full(4)));
    }

    #[test]
    fn whitespace_line_is_empty_member() {
        let f = parse_family("n=3\n\n1\n").unwrap();
        assert!(f.contains_empty_set());
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn comment_only_line_is_not_a_member() {
        let f = parse_family("n=3\n# note\n   # padded note\n1\n").unwrap();
        assert!(!f.contains_empty_set());
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn duplicate_element_rejected_with_line() {
        let err = parse_family("n=4\n1,2\n3,3\n").unwrap_err();
        assert_eq!(err.to_string(), "line 3: duplicate element 3");
    }

    #[test]
    fn out_of_range_element_rejected() {
        let err = parse_family("n=4\n1,5\n").unwrap_err();
        assert!(err.to_string().contains("element 5 outside ground set 1..=4"));
    }

    #[test]
    fn duplicate_member_rejected() {
        let err = parse_family("n=4\n1,2\n2,1\n").unwrap_err();
        assert!(err.to_string().contains("duplicate member {1,2}"));
    }

    #[test]
    fn missing_header_rejected() {
        assert!(parse_family("1,2\n").is_err());
        assert!(parse_family("").is_err());
    }

    #[test]
    fn round_trip_is_canonical() {
        let f = parse_family("n=5\n3,4,5\n1,2\n5\n").unwrap();
        let text = write_family(&f);
        assert_eq!(text, "n=5\n5\n1,2\n3,4,5\n");
        let g = parse_family(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn round_trip_with_empty_member() {
        let mut f = parse_family("n=3\n1\n").unwrap();
        f.insert(ElementSet::EMPTY).unwrap();
        let text = write_family(&f);
        let g = parse_family(&text).unwrap();
        assert_eq!(f, g);
        assert!(g.contains_empty_set());
    }

    #[test]
    fn no_phantom_empty_member_from_trailing_newline() {
        let f = parse_family("n=3\n1,2\n").unwrap();
        assert_eq!(f.len(), 1);
        assert!(!f.contains_empty_set());
    }
}
