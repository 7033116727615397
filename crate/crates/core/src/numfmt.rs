//! Numeric output formatting: 7 significant digits everywhere, so logs and
//! result files are reproducible and diff-friendly.

/// Format with 7 significant digits, plain decimal notation in a sensible
/// magnitude window and scientific notation outside it.
pub fn sig7(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.000000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..7).contains(&exp) {
        let decimals = (6 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.6e}")
    }
}

/// [`sig7`] for optional values; `undefined` when absent.
pub fn sig7_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), sig7)
}
