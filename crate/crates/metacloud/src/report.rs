//! CSV reports, the binary cloud dump and the run manifest.
//!
//! Numbers are written like C's `%.10g` so that equal reports give equal
//! bytes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use metacloud_core::cloud::{IntensityReport, OntoSetReport, SampleCloud};

use crate::error::{Error, Result};

pub const ONTO_HEADER: &str = "eps,outside_frac,min_coverage";
pub const INTENSITY_HEADER: &str = "bin_lo,bin_hi,sector,observed,expected,chi2";
pub const DUMP_MAGIC: [u8; 8] = *b"MCLOUD01";

/// `%.10g`.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 10;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..P).contains(&exp) {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn onto_csv(r: &OntoSetReport) -> String {
    let mut s = String::from(ONTO_HEADER);
    s.push('\n');
    for (i, (&e, &f)) in r.eps.iter().zip(&r.outside_frac).enumerate() {
        let _ = writeln!(s, "{},{},{}", fmt_g(e), fmt_g(f), r.min_coverage(i));
    }
    s
}

/// Per grid point coverage, one row per point and one column per `eps`.
pub fn coverage_csv(r: &OntoSetReport) -> String {
    let mut s = String::from("point,x,y");
    for &e in &r.eps {
        let _ = write!(s, ",count_{}", fmt_g(e));
    }
    s.push('\n');
    for (k, p) in r.grid.iter().enumerate() {
        let _ = write!(s, "{k},{},{}", fmt_g(p[0]), fmt_g(p.get(1).copied().unwrap_or(0.0)));
        for c in &r.coverage {
            let _ = write!(s, ",{}", c[k]);
        }
        s.push('\n');
    }
    s
}

pub fn intensity_csv(r: &IntensityReport) -> String {
    let mut s = String::from(INTENSITY_HEADER);
    s.push('\n');
    for b in &r.bins {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_g(b.r_lo),
            fmt_g(b.r_hi),
            b.sector,
            b.observed,
            fmt_g(b.expected),
            fmt_g(b.chi2)
        );
    }
    s
}

/// Generic table writer: a header line and rows of already formatted cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Header: 8-byte magic, `d` and `n` as little-endian `u32`; then the
/// points, row-major little-endian `f64`.
pub fn dump_cloud(path: &Path, cloud: &SampleCloud) -> Result<()> {
    let d = u32::try_from(cloud.dim()).map_err(|_| Error::Usage("dimension too large".into()))?;
    let n = u32::try_from(cloud.len()).map_err(|_| Error::Usage("cloud too large to dump".into()))?;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(&DUMP_MAGIC).map_err(io)?;
    w.write_all(&d.to_le_bytes()).map_err(io)?;
    w.write_all(&n.to_le_bytes()).map_err(io)?;
    for v in cloud.points() {
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a dump back as `(d, points)`.
pub fn read_dump(path: &Path) -> Result<(usize, Vec<f64>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = || Error::Usage(format!("{}: not a cloud dump", path.display()));
    if bytes.len() < 16 || bytes[..8] != DUMP_MAGIC {
        return Err(bad());
    }
    let d = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let n = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let body = &bytes[16..];
    if body.len() != n * d * 8 {
        return Err(bad());
    }
    let pts = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((d, pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (1e-3, "0.001"),
            (1e-5, "1e-05"),
            (123456789012.0, "1.23456789e+11"),
            (1234567890.0, "1234567890"),
            (-2.5e-7, "-2.5e-07"),
            (1.0 / 3.0, "0.3333333333"),
            (9999999999.5, "1e+10"),
            (f64::INFINITY, "inf"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
    }
}
