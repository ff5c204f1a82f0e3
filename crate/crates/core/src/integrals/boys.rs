//! Boys function `F_n(T) = ∫_0^1 t^(2n) exp(-T t²) dt`.

const SWITCH: f64 = 25.0;

/// `F_0(T) ..= F_nmax(T)`.
pub fn boys(nmax: usize, t: f64) -> Vec<f64> {
    if t <= 0.0 {
        return (0..=nmax).map(|n| 1.0 / (2 * n + 1) as f64).collect();
    }
    if t < SWITCH {
        series(nmax, t)
    } else {
        large(nmax, t)
    }
}

/// Series for the top order, then downward recursion.
fn series(nmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    let e = (-t).exp();
    let n = nmax as f64;
    let mut term = 1.0 / (2.0 * n + 1.0);
    let mut sum = term;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= 2.0 * t / (2.0 * n + 2.0 * k + 1.0);
        sum += term;
        k += 1.0;
    }
    out[nmax] = e * sum;
    for m in (0..nmax).rev() {
        out[m] = (2.0 * t * out[m + 1] + e) / (2 * m + 1) as f64;
    }
    out
}

/// `F_0` from erf, then upward recursion (stable for T ≫ n).
fn large(nmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    let e = (-t).exp();
    let x = t.sqrt();
    out[0] = 0.5 * (std::f64::consts::PI / t).sqrt() * (1.0 - erfc_large(x));
    for m in 0..nmax {
        out[m + 1] = ((2 * m + 1) as f64 * out[m] - e) / (2.0 * t);
    }
    out
}

/// Complementary error function for x ≥ 5 by its continued fraction.
fn erfc_large(x: f64) -> f64 {
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut frac = x;
    for k in (1..60).rev() {
        frac = x + (k as f64 / 2.0) / frac;
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boys_at_zero() {
        let f = boys(4, 0.0);
        for (n, v) in f.iter().enumerate() {
            assert_eq!(*v, 1.0 / (2 * n + 1) as f64);
        }
    }

    #[test]
    fn branches_agree_near_switch() {
        for t in [20.0, 25.0, 30.0] {
            let (a, b) = (series(8, t), large(8, t));
            for n in 0..=8 {
                assert!((a[n] - b[n]).abs() < 1e-14, "T={t} n={n}");
            }
        }
    }

    #[test]
    fn large_argument_limit() {
        let t = 400.0;
        let f = boys(0, t)[0];
        assert!((f - 0.5 * (std::f64::consts::PI / t).sqrt()).abs() < 1e-15);
    }
}
