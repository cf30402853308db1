//! Order-insensitive reductions for ensemble statistics.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Sample mean and its standard error (0 for fewer than two samples).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

/// Weighted least-squares line `y = a + b x`; returns `(b, se(b))`.
///
/// With `weights = None` every point counts equally and the slope error is
/// estimated from the residuals.
pub fn weighted_slope(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let w: Vec<f64> = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; n],
    };
    let sw = compensated_sum(w.iter().copied());
    let xm = compensated_sum(x.iter().zip(&w).map(|(x, w)| w * x)) / sw;
    let ym = compensated_sum(y.iter().zip(&w).map(|(y, w)| w * y)) / sw;
    let sxx = compensated_sum(x.iter().zip(&w).map(|(x, w)| w * (x - xm) * (x - xm)));
    if !(sxx > 0.0) {
        return None;
    }
    let sxy = compensated_sum(
        x.iter()
            .zip(y)
            .zip(&w)
            .map(|((x, y), w)| w * (x - xm) * (y - ym)),
    );
    let slope = sxy / sxx;
    let se = match weights {
        Some(_) => (1.0 / sxx).sqrt(),
        None if n > 2 => {
            let rss = compensated_sum(x.iter().zip(y).map(|(x, y)| {
                let r = y - ym - slope * (x - xm);
                r * r
            }));
            (rss / (n - 2) as f64 / sxx).sqrt()
        }
        None => 0.0,
    };
    Some((slope, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (b, se) = weighted_slope(&x, &y, None).unwrap();
        assert!((b - 2.0).abs() < 1e-14 && se < 1e-14);
        let (b, _) = weighted_slope(&x, &y, Some(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!((b - 2.0).abs() < 1e-14);
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_stderr(&[2.0; 5]), (2.0, 0.0));
    }

    proptest! {
        #[test]
        fn sum_is_order_insensitive(mut xs in proptest::collection::vec(-1e6f64..1e6, 1..50)) {
            let a = compensated_sum(xs.iter().copied());
            xs.reverse();
            let b = compensated_sum(xs.iter().copied());
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
