//! Deterministic float formatting for CSV/report output.

/// Render with six significant digits, plain decimal notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(5 - mag);
    let rounded = (x * factor).round() / factor;
    let decimals = (5 - mag).max(0) as usize;
    format!("{:.*}", decimals, rounded)
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(0.123456789), "0.123457");
        assert_eq!(sig6(-0.00012345649), "-0.000123456");
        assert_eq!(sig6(1234567.0), "1234570");
        assert_eq!(sig6(1.5e-9), "0.00000000150000");
    }
}
