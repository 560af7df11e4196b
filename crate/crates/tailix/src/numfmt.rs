//! Fixed output locale for tables: decimal point, no separators, 12
//! significant digits, trailing zeros trimmed.

pub(crate) fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{x:.11e}")
    }
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(25.0), "25");
        assert_eq!(sig12(0.05), "0.05");
        assert_eq!(sig12(1.3862943611198906), "1.38629436112");
        assert_eq!(sig12(-1234.5678901234), "-1234.56789012");
        assert_eq!(sig12(1e15), "1.00000000000e15");
        assert_eq!(sig12(f64::NAN), "NaN");
        assert_eq!(sig12(f64::INFINITY), "inf");
    }
}
