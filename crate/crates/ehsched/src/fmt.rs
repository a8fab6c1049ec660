//! Deterministic decimal formatting for CSV output.

/// Formats `x` with 12 significant digits, `%.12g` style.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

/// Formats `x` with `digits` significant digits, dropping trailing zeros.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    // Round first in scientific form so the exponent reflects carries.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(1.5), "1.5");
        assert_eq!(sig12(-2.25), "-2.25");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(123456.789), "123456.789");
        assert_eq!(sig12(1e-7), "1e-7");
        assert_eq!(sig12(1.23456789012345e15), "1.23456789012e15");
        assert_eq!(sig12(0.99999999999999), "1");
        assert_eq!(sig12(f64::INFINITY), "inf");
    }
}
