//! Small numeric helpers used across modules.

/// Stable log-sum-exp. Returns `-inf` for an empty slice or when every entry
/// is `-inf`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Weighted mean of `values` with probability weights `w` (assumed to sum
/// to 1).
pub fn weighted_mean(w: &[f64], values: &[f64]) -> f64 {
    w.iter().zip(values).map(|(&wi, &v)| wi * v).sum()
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmin, min)` once the bracket is below `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `%.12g`-style formatting: up to 12 significant digits, trailing zeros
/// trimmed, scientific notation outside a moderate exponent range. Used for
/// all CSV output so files are byte-deterministic.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(s)
    } else {
        let s = format!("{:.11e}", x);
        // Rust renders e.g. 1.5e-13; trim the mantissa's trailing zeros.
        if let Some(pos) = s.find('e') {
            let (mant, e) = s.split_at(pos);
            format!("{}{}", trim_zeros(mant.to_string()), e)
        } else {
            s
        }
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_stability() {
        assert_eq!(logsumexp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert_eq!(logsumexp(&[-1e308, 0.0]), 0.0);
        let v = logsumexp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, v) = golden_section_min(|t| (t - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 5e-8); // x-precision floor for quadratics is sqrt(eps)
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g12_formats() {
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(0.25), "0.25");
        assert_eq!(g12(1.0), "1");
        assert_eq!(g12(-3.5), "-3.5");
        assert_eq!(g12(f64::INFINITY), "inf");
        assert_eq!(g12(1e-13), "1e-13");
        assert_eq!(g12(0.1234567890123456), "0.123456789012");
    }
}
