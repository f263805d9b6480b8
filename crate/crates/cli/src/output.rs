//! Locale-independent number formatting.

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{}", trim(mantissa), exp);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
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
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(2.57217362024526), "2.57217362025");
        assert_eq!(sig12(10.026355011754475), "10.0263550118");
        assert_eq!(sig12(-0.5), "-0.5");
        assert_eq!(sig12(1.5e-7), "1.5e-7");
        assert_eq!(sig12(2.0e13), "2e13");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(99.99999999999999), "100");
    }
}
