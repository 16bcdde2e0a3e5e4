//! Exact dyadic parameter parsing.
//!
//! The sweep parameter sets are powers of two, and the regime
//! classification branches on exact comparisons like `mu^2 > eps`.
//! Parsing `2^-10` by exponent arithmetic keeps the value exact, where a
//! decimal round trip could land on the wrong side of such a boundary.

/// Parses a parameter given either as `2^k` (integer `k`) or as a plain
/// decimal number.
pub fn parse_value(text: &str) -> Result<f64, String> {
    let t = text.trim();
    if let Some(exponent) = t.strip_prefix("2^") {
        let k: i32 = exponent
            .trim()
            .parse()
            .map_err(|_| format!("`{t}`: expected an integer exponent after `2^`"))?;
        // Stay inside f64: 2^-1074 is the smallest positive value,
        // 2^1023 the largest finite power of two.
        if !(-1074..=1023).contains(&k) {
            return Err(format!("`{t}`: exponent {k} leaves the range of f64"));
        }
        Ok(2f64.powi(k))
    } else {
        t.parse::<f64>()
            .map_err(|e| format!("`{t}` is not a number: {e}"))
    }
}
