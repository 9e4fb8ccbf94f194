//! Text serialization of [`CouplingTable`].
//!
//! ```text
//! CRTABLE v1 family=general2d cutoff=2 entries=17 checksum=8c3f0e6a7d2b9e41
//! 0 0 0 0 0 0 0 0 1.5707963267948966e0
//! ...
//! ```
//!
//! The checksum is FNV-1a (64 bit) over the body bytes, i.e. everything
//! after the header line. Full-product rows carry a trailing `omega=<int>`.

use std::fs;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;

use crate::basis::ModeIndex;
use crate::coefficients::{CouplingTable, Family, ResonantQuadruple, TableEntry};
use crate::error::{CrError, Result};

const MAGIC: &str = "CRTABLE";
const VERSION: &str = "v1";

fn checksum(body: &str) -> String {
    let mut h = FnvHasher::default();
    h.write(body.as_bytes());
    format!("{:016x}", h.finish())
}

pub(crate) fn render(table: &CouplingTable) -> String {
    let mut body = String::new();
    for e in table.entries() {
        for q in e.key.q {
            body.push_str(&format!("{} {} ", q.n(), q.m()));
        }
        body.push_str(&format!("{:.16e}", e.value));
        if table.family() == Family::FullProduct {
            body.push_str(&format!(" omega={}", e.omega()));
        }
        body.push('\n');
    }
    format!(
        "{MAGIC} {VERSION} family={} cutoff={} entries={} checksum={}\n{body}",
        table.family(),
        table.cutoff(),
        table.len(),
        checksum(&body)
    )
}

fn header_field<'a>(fields: &[&'a str], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| CrError::MalformedFile(format!("header lacks `{key}=`")))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| CrError::MalformedFile(format!("line {line}: bad {what} `{s}`")))
}

pub(crate) fn parse(text: &str) -> Result<CouplingTable> {
    let (header, body) = match text.split_once('\n') {
        Some(split) => split,
        None => return Err(CrError::MalformedFile("missing header line".into())),
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.first() != Some(&MAGIC) {
        return Err(CrError::MalformedFile("missing CRTABLE magic".into()));
    }
    match fields.get(1) {
        Some(&VERSION) => {}
        Some(v) => return Err(CrError::VersionMismatch(v.to_string())),
        None => return Err(CrError::MalformedFile("missing version".into())),
    }
    let family: Family = header_field(&fields, "family")?
        .parse()
        .map_err(|_| CrError::MalformedFile("unknown family".into()))?;
    let cutoff: u32 = parse_num(header_field(&fields, "cutoff")?, "cutoff", 1)?;
    let count: usize = parse_num(header_field(&fields, "entries")?, "entry count", 1)?;
    let expected = header_field(&fields, "checksum")?.to_string();

    let mut entries = Vec::with_capacity(count);
    for (i, line) in body.lines().enumerate() {
        let lineno = i + 2;
        let tok: Vec<&str> = line.split_whitespace().collect();
        let want = if family == Family::FullProduct { 10 } else { 9 };
        if tok.len() != want {
            return Err(CrError::MalformedFile(format!("line {lineno}: expected {want} fields, found {}", tok.len())));
        }
        let mut q = [ModeIndex::new_unchecked(0, 0); 4];
        for (j, slot) in q.iter_mut().enumerate() {
            let n: u32 = parse_num(tok[2 * j], "n", lineno)?;
            let m: i32 = parse_num(tok[2 * j + 1], "m", lineno)?;
            *slot = ModeIndex::new(n, m).map_err(|e| CrError::MalformedFile(format!("line {lineno}: {e}")))?;
        }
        let value: f64 = parse_num(tok[8], "value", lineno)?;
        let key = ResonantQuadruple { q };
        if family == Family::FullProduct {
            let omega: i64 = tok[9]
                .strip_prefix("omega=")
                .ok_or_else(|| CrError::MalformedFile(format!("line {lineno}: missing omega=")))
                .and_then(|s| parse_num(s, "omega", lineno))?;
            if omega != key.omega() {
                return Err(CrError::MalformedFile(format!("line {lineno}: omega {omega} disagrees with indices")));
            }
        }
        entries.push(TableEntry { key, value });
    }
    if entries.len() != count || (!body.is_empty() && !body.ends_with('\n')) {
        return Err(CrError::MalformedFile(format!(
            "header announces {count} entries, body holds {} (truncated?)",
            entries.len()
        )));
    }
    let actual = checksum(body);
    if actual != expected {
        return Err(CrError::ChecksumMismatch { expected, actual });
    }
    CouplingTable::from_entries(family, cutoff, entries)
        .map_err(|e| CrError::MalformedFile(e.to_string()))
}

/// Writes the table in the `CRTABLE v1` text format.
pub fn save_table(table: &CouplingTable, path: &Path) -> Result<()> {
    fs::write(path, render(table)).map_err(|e| CrError::io(path, e))
}

/// Reads a table written by [`save_table`], verifying version and checksum.
pub fn load_table(path: &Path) -> Result<CouplingTable> {
    let text = fs::read_to_string(path).map_err(|e| CrError::io(path, e))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_table, BuildOptions};

    #[test]
    fn round_trip_is_bitwise() {
        for (fam, cutoff) in [(Family::Lll, 8), (Family::Radial, 10), (Family::General2d, 3), (Family::FullProduct, 2)] {
            let t = build_table(fam, cutoff, BuildOptions::default()).unwrap();
            let back = parse(&render(&t)).unwrap();
            assert_eq!(back.family(), fam);
            assert_eq!(back.cutoff(), cutoff);
            for (a, b) in t.entries().iter().zip(back.entries()) {
                assert_eq!(a.key, b.key);
                assert_eq!(a.value.to_bits(), b.value.to_bits());
            }
        }
    }

    #[test]
    fn truncated_file_is_malformed() {
        let t = build_table(Family::Lll, 8, BuildOptions::default()).unwrap();
        let text = render(&t);
        let cut = &text[..text.len() * 2 / 3];
        assert!(matches!(parse(cut), Err(CrError::MalformedFile(_))));
        let header_only = text.lines().next().unwrap();
        assert!(matches!(parse(header_only), Err(CrError::MalformedFile(_))));
    }

    #[test]
    fn old_version_is_rejected() {
        let t = build_table(Family::Lll, 2, BuildOptions::default()).unwrap();
        let text = render(&t).replacen("CRTABLE v1", "CRTABLE v0", 1);
        assert!(matches!(parse(&text), Err(CrError::VersionMismatch(v)) if v == "v0"));
    }

    #[test]
    fn edited_value_fails_checksum() {
        let t = build_table(Family::Lll, 2, BuildOptions::default()).unwrap();
        let text = render(&t).replacen("1.5707963267948966e0", "1.5707963267948967e0", 1);
        assert!(matches!(parse(&text), Err(CrError::ChecksumMismatch { .. })));
    }

    #[test]
    fn header_fields() {
        let t = build_table(Family::Lll, 8, BuildOptions::default()).unwrap();
        let text = render(&t);
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("CRTABLE v1 family=lll cutoff=8 entries="));
    }
}
