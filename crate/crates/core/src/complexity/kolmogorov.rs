//! Kolmogorov complexity approximated by a DEFLATE compression ratio.

use std::fmt::Write as _;
use std::io::Write as _;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use ndarray::ArrayView2;

use super::Prepared;

pub const DEFLATE_LEVEL: u32 = 9;

/// Rows of six-decimal values separated by commas, label last, one row
/// per line.
pub fn canonical_text(x: ArrayView2<f64>, y: &[u8]) -> String {
    let mut out = String::new();
    for (row, l) in x.outer_iter().zip(y) {
        for v in row {
            let _ = write!(out, "{v:.6},");
        }
        let _ = writeln!(out, "{l}");
    }
    out
}

/// Compressed size over raw size under raw DEFLATE at [`DEFLATE_LEVEL`].
pub fn compression_ratio(bytes: &[u8]) -> f64 {
    if bytes.is_empty() {
        return 1.0;
    }
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::new(DEFLATE_LEVEL));
    enc.write_all(bytes).expect("in-memory write");
    let compressed = enc.finish().expect("in-memory write");
    compressed.len() as f64 / bytes.len() as f64
}

pub(super) fn compute(p: &Prepared) -> f64 {
    compression_ratio(canonical_text(p.x.view(), &p.y).as_bytes())
}
