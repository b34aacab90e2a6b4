//! Small statistical helpers: Kolmogorov-Smirnov tests and summary stats.
//!
//! The KS machinery backs the time-rescaling diagnostic: residuals of a
//! correctly simulated point process are i.i.d. unit exponentials, and the
//! one-sample test quantifies the distance from that law.

/// One-sample Kolmogorov-Smirnov statistic of `sample` against the CDF `f`.
///
/// Returns `sup_x |F_n(x) - F(x)|`. The sample does not need to be sorted.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], f: F) -> f64 {
    assert!(!sample.is_empty(), "KS statistic needs a nonempty sample");
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let cdf = f(x);
        let lo = (cdf - i as f64 / n).abs();
        let hi = ((i + 1) as f64 / n - cdf).abs();
        d = d.max(lo).max(hi);
    }
    d
}

/// Asymptotic Kolmogorov survival function Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
///
/// Q(t) approximates P(sqrt(n) D_n > t) for large n.
pub fn kolmogorov_survival(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// P-value of the one-sample KS test with the finite-sample scaling
/// `(sqrt(n) + 0.12 + 0.11/sqrt(n)) D_n` feeding the asymptotic law.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample KS test of `sample` against the unit exponential law.
///
/// Returns `(statistic, p_value)`.
pub fn exp1_ks_test(sample: &[f64]) -> (f64, f64) {
    let d = ks_statistic(sample, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() });
    (d, ks_pvalue(d, sample.len()))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks2_test(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert!(
        !a.is_empty() && !b.is_empty(),
        "KS test needs nonempty samples"
    );
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).expect("sample contains NaN"));
    xb.sort_by(|p, q| p.partial_cmp(q).expect("sample contains NaN"));
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    (
        d,
        kolmogorov_survival((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d),
    )
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n - 1 denominator). A sample of fewer than
/// two points carries no dispersion information and reports 0 so that
/// downstream summaries stay finite and serializable.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean (0 for fewer than two points).
pub fn standard_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Median with the even-length average convention.
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of an empty slice");
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
