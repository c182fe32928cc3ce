use crate::batch::{map_indices, Execution};
use crate::error::{Error, Result};

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

fn window_size(n: usize, span: f64) -> Result<usize> {
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::Domain(format!("span {span} outside (0, 1]")));
    }
    let q = ((span * n as f64).ceil() as usize).min(n);
    if q < 2 {
        return Err(Error::Insufficient(format!(
            "span {span} over {n} points leaves fewer than 2 per window"
        )));
    }
    Ok(q)
}

/// Degree-1 local fit at `x0` using the `q` nearest neighbours.
fn local_linear(xs: &[f64], ys: &[f64], q: usize, x0: f64) -> f64 {
    let mut dist: Vec<f64> = xs.iter().map(|x| (x - x0).abs()).collect();
    let h = {
        let mut sorted = dist.clone();
        let (_, kth, _) = sorted.select_nth_unstable_by(q - 1, f64::total_cmp);
        *kth
    };

    let window_mean = || {
        let (s, c) = xs
            .iter()
            .zip(ys)
            .filter(|(x, _)| (*x - x0).abs() <= h)
            .fold((0.0, 0usize), |(s, c), (_, y)| (s + y, c + 1));
        s / c as f64
    };
    if h <= 0.0 {
        return window_mean();
    }

    for d in dist.iter_mut() {
        *d = tricube(*d / h);
    }
    let w = dist;
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return window_mean();
    }
    let xbar = w.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = w.iter().zip(ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((w, x), y) in w.iter().zip(xs).zip(ys) {
        sxx += w * (x - xbar) * (x - xbar);
        sxy += w * (x - xbar) * (y - ybar);
    }
    if sxx <= 1e-12 * sw * h * h {
        return ybar;
    }
    ybar + sxy / sxx * (x0 - xbar)
}

fn check_inputs(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Domain("xs and ys differ in length".into()));
    }
    if xs.len() < 3 {
        return Err(Error::Insufficient(format!("loess needs >= 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite observation".into()));
    }
    Ok(())
}

/// Local linear regression with tricube weights over the `ceil(span n)`
/// nearest neighbours of each point. Returns fitted values at `xs`.
pub fn loess_smooth(xs: &[f64], ys: &[f64], span: f64) -> Result<Vec<f64>> {
    check_inputs(xs, ys)?;
    let q = window_size(xs.len(), span)?;
    Ok(map_indices(xs.len(), Execution::default(), |i| {
        local_linear(xs, ys, q, xs[i])
    }))
}

/// Evaluate the same smoother at arbitrary points, e.g. a plotting grid.
pub fn loess_at(xs: &[f64], ys: &[f64], span: f64, at: &[f64]) -> Result<Vec<f64>> {
    check_inputs(xs, ys)?;
    let q = window_size(xs.len(), span)?;
    Ok(map_indices(at.len(), Execution::default(), |i| {
        local_linear(xs, ys, q, at[i])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64).collect()
    }

    #[test]
    fn constant_in_constant_out() {
        let x = grid(10);
        let y = vec![4.2; 10];
        for v in loess_smooth(&x, &y, 0.5).unwrap() {
            assert!((v - 4.2).abs() < 1e-12);
        }
    }

    #[test]
    fn reproduces_lines() {
        let x: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin() * 10.0 + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| -1.5 + 0.8 * x).collect();
        for span in [0.2, 0.5, 0.75, 1.0] {
            let fit = loess_smooth(&x, &y, span).unwrap();
            for (f, t) in fit.iter().zip(&y) {
                assert!((f - t).abs() < 1e-9, "span {span}: {f} vs {t}");
            }
        }
    }

    #[test]
    fn smaller_span_tracks_curvature() {
        let x = grid(20);
        let y: Vec<f64> = x.iter().map(|x| x * x).collect();
        let err = |span| {
            loess_smooth(&x, &y, span)
                .unwrap()
                .iter()
                .zip(&y)
                .map(|(f, t)| (f - t).abs())
                .fold(0.0f64, f64::max)
        };
        assert!(err(0.3) < err(0.9));
    }

    #[test]
    fn degenerate_window_falls_back_to_mean() {
        let x = vec![1.0, 1.0, 1.0, 1.0, 9.0];
        let y = vec![1.0, 2.0, 3.0, 6.0, 0.0];
        let fit = loess_smooth(&x, &y, 0.6).unwrap();
        assert!((fit[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn input_checks() {
        assert!(loess_smooth(&[1.0, 2.0], &[1.0, 2.0], 0.75).is_err());
        assert!(loess_smooth(&grid(5), &grid(5), 0.0).is_err());
        assert!(loess_smooth(&grid(5), &grid(5), 1.5).is_err());
        assert!(loess_smooth(&grid(5), &grid(5), 0.2).is_err());
    }

    #[test]
    fn full_span_is_weighted_fit_per_point() {
        // Oracle: at each x0, weights tricube(|x - x0| / max distance) over
        // all points, then closed-form weighted least squares.
        let x = grid(12);
        let y: Vec<f64> = x.iter().map(|x| (x * 0.7).sin() * 3.0 + x).collect();
        let fit = loess_smooth(&x, &y, 1.0).unwrap();
        for (i, &x0) in x.iter().enumerate() {
            let h = x.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max);
            let w: Vec<f64> = x
                .iter()
                .map(|x| {
                    let u = (x - x0).abs() / h;
                    if u < 1.0 { (1.0 - u.powi(3)).powi(3) } else { 0.0 }
                })
                .collect();
            let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for j in 0..x.len() {
                s0 += w[j];
                s1 += w[j] * x[j];
                s2 += w[j] * x[j] * x[j];
                t0 += w[j] * y[j];
                t1 += w[j] * x[j] * y[j];
            }
            let det = s0 * s2 - s1 * s1;
            let b0 = (s2 * t0 - s1 * t1) / det;
            let b1 = (s0 * t1 - s1 * t0) / det;
            assert!((fit[i] - (b0 + b1 * x0)).abs() < 1e-9);
        }
    }
}
