//! Artifact formatting shared by the library and the CLI.

/// Scientific notation matching C's `%.12e` (e.g. `1.500000000000e+00`).
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Pretty JSON with a trailing newline; key order follows struct field order.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable artifact");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::fmt_e;

    #[test]
    fn matches_c_printf() {
        assert_eq!(fmt_e(1.5), "1.500000000000e+00");
        assert_eq!(fmt_e(-0.00123), "-1.230000000000e-03");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e(6.02e123), "6.020000000000e+123");
        assert_eq!(fmt_e(f64::NEG_INFINITY), "-inf");
    }
}
