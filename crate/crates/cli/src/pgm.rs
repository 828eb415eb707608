//! 16-bit binary portable graymap (P5, maxval 65535) with a linear value
//! mapping: 0 maps to black, the matrix maximum to 65535. Sample bytes are
//! big-endian per the netpbm format.

/// Encode a row-major matrix; `rows * cols` must match `values.len()`.
pub fn encode_p5_16(values: &[f64], rows: usize, cols: usize) -> Vec<u8> {
    assert_eq!(values.len(), rows * cols, "matrix shape mismatch");
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { 65535.0 / max } else { 0.0 };
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    out.reserve(2 * values.len());
    for &v in values {
        let gray = (v.max(0.0) * scale).round().min(65535.0) as u16;
        out.extend_from_slice(&gray.to_be_bytes());
    }
    out
}
