use alloc::format;
use alloc::string::String;

/// Shortest decimal that parses back to the same `f64`.
///
/// Integral values keep a trailing `.0` and very large or small magnitudes
/// switch to exponent form, so the text never reads back as an integer.
pub fn format_decimal(value: f64) -> String {
    format!("{value:?}")
}

/// Text used when writing a FLOAT cell back to CSV.
pub fn format_cell_float(value: f64) -> String {
    format_decimal(value)
}
