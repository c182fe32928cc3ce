use statrs::function::beta::beta_reg;

/// `P(F >= f)` for an F(df1, df2) variable, through the regularized
/// incomplete beta function `I_x(df2/2, df1/2)` at `x = df2 / (df2 + df1 f)`.
pub fn f_upper_tail_p(f: f64, df1: f64, df2: f64) -> f64 {
    assert!(df1 >= 1.0 && df2 >= 1.0, "degrees of freedom must be >= 1");
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    beta_reg(df2 / 2.0, df1 / 2.0, x).clamp(0.0, 1.0)
}

/// Overall-regression p-value for `k` regressors fitted to `n` points.
pub fn p_from_r_squared(r_squared: f64, n: usize, k: usize) -> f64 {
    let df2 = (n - k - 1) as f64;
    if r_squared >= 1.0 {
        return 0.0;
    }
    let f = (r_squared / k as f64) / ((1.0 - r_squared) / df2);
    f_upper_tail_p(f, k as f64, df2)
}
