use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::stats::f_upper_tail_p;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CurveModel {
    /// `y = b0 + b1 x`
    Linear,
    /// `y = b0 + b1 ln x`
    Logarithmic,
    /// `y = b0 + b1 x + b2 x^2`
    Quadratic,
    /// `y = b0 x^b1`, fitted as `ln y = ln b0 + b1 ln x`
    Power,
    /// `y = b0 + b1 / x`
    Inverse,
}

impl CurveModel {
    pub const ALL: [CurveModel; 5] = [
        CurveModel::Linear,
        CurveModel::Logarithmic,
        CurveModel::Quadratic,
        CurveModel::Power,
        CurveModel::Inverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveModel::Linear => "LINEAR",
            CurveModel::Logarithmic => "LOGARITHMIC",
            CurveModel::Quadratic => "QUADRATIC",
            CurveModel::Power => "POWER",
            CurveModel::Inverse => "INVERSE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }

    /// Number of regressors, excluding the intercept.
    pub fn regressors(self) -> usize {
        match self {
            CurveModel::Quadratic => 2,
            _ => 1,
        }
    }

    fn row(self, x: f64) -> Vec<f64> {
        match self {
            CurveModel::Linear => vec![1.0, x],
            CurveModel::Logarithmic | CurveModel::Power => vec![1.0, x.ln()],
            CurveModel::Quadratic => vec![1.0, x, x * x],
            CurveModel::Inverse => vec![1.0, 1.0 / x],
        }
    }

    fn check_domain(self, xs: &[f64], ys: &[f64]) -> Result<()> {
        let needs_positive_x = matches!(
            self,
            CurveModel::Logarithmic | CurveModel::Power | CurveModel::Inverse
        );
        if needs_positive_x && xs.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain(format!("{} requires x > 0", self.name())));
        }
        if self == CurveModel::Power && ys.iter().any(|&y| !(y > 0.0)) {
            return Err(Error::Domain("POWER requires y > 0".into()));
        }
        Ok(())
    }
}

impl std::fmt::Display for CurveModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFitResult {
    pub model: CurveModel,
    /// `[b0, b1]` or `[b0, b1, b2]`, in the model's natural parameterization.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub f_stat: f64,
    pub p_value: f64,
    pub n: usize,
    pub k: usize,
}

impl CurveFitResult {
    pub fn predict(&self, x: f64) -> f64 {
        let b = &self.coefficients;
        match self.model {
            CurveModel::Linear => b[0] + b[1] * x,
            CurveModel::Logarithmic => b[0] + b[1] * x.ln(),
            CurveModel::Quadratic => b[0] + b[1] * x + b[2] * x * x,
            CurveModel::Power => b[0] * x.powf(b[1]),
            CurveModel::Inverse => b[0] + b[1] / x,
        }
    }

    pub fn is_significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Ordinary least squares in the model's fitting space. R² and the F test
/// are computed in that space, so POWER is judged on `(ln x, ln y)`.
pub fn fit_curve(model: CurveModel, xs: &[f64], ys: &[f64]) -> Result<CurveFitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "xs and ys differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let k = model.regressors();
    let n = xs.len();
    if n < k + 2 {
        return Err(Error::Insufficient(format!(
            "{} needs at least {} points, got {n}",
            model.name(),
            k + 2
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite observation".into()));
    }
    model.check_domain(xs, ys)?;

    let target: Vec<f64> = match model {
        CurveModel::Power => ys.iter().map(|y| y.ln()).collect(),
        _ => ys.to_vec(),
    };
    let design = DMatrix::from_row_iterator(n, k + 1, xs.iter().flat_map(|&x| model.row(x)));
    let y = DVector::from_vec(target);

    // Column scaling keeps the rank test meaningful for x^2 columns.
    let scales: Vec<f64> = design
        .column_iter()
        .map(|c| c.norm().max(f64::MIN_POSITIVE))
        .collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let qr = scaled.qr();
    let r = qr.r();
    let rank_tol = 1e-10;
    if (0..=k).any(|i| r[(i, i)].abs() < rank_tol) {
        return Err(Error::Rank(model.name()));
    }
    let qty = qr.q().transpose() * &y;
    let beta_scaled = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::Rank(model.name()))?;
    let beta: Vec<f64> = beta_scaled.iter().zip(&scales).map(|(b, s)| b / s).collect();

    let fitted = &design * DVector::from_column_slice(&beta);
    let ss_res: f64 = (&y - &fitted).iter().map(|e| e * e).sum();
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();

    let df2 = (n - k - 1) as f64;
    let (r_squared, f_stat, p_value) = if ss_tot <= 0.0 {
        (0.0, 0.0, 1.0)
    } else {
        let r2 = (1.0 - ss_res / ss_tot).clamp(0.0, 1.0);
        if r2 >= 1.0 || ss_res <= ss_tot * 1e-28 {
            (1.0, f64::INFINITY, 0.0)
        } else {
            let f = (r2 / k as f64) / ((1.0 - r2) / df2);
            (r2, f, f_upper_tail_p(f, k as f64, df2))
        }
    };

    let coefficients = match model {
        CurveModel::Power => vec![beta[0].exp(), beta[1]],
        _ => beta,
    };
    Ok(CurveFitResult {
        model,
        coefficients,
        r_squared,
        f_stat,
        p_value,
        n,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub fits: Vec<CurveFitResult>,
    /// Models that could not be fitted, with the reason.
    pub skipped: Vec<(CurveModel, String)>,
    pub best_significant: Option<CurveModel>,
    pub alpha: f64,
}

impl ModelComparison {
    pub fn get(&self, model: CurveModel) -> Option<&CurveFitResult> {
        self.fits.iter().find(|f| f.model == model)
    }

    /// Highest-R² fit regardless of significance.
    pub fn best_r_squared(&self) -> Option<&CurveFitResult> {
        self.fits
            .iter()
            .max_by(|a, b| a.r_squared.total_cmp(&b.r_squared))
    }

    pub fn any_significant(&self) -> bool {
        self.best_significant.is_some()
    }
}

/// Fit all five models; the best significant one is the highest R² among
/// fits with `p < alpha`.
pub fn fit_all_models(xs: &[f64], ys: &[f64], alpha: f64) -> ModelComparison {
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for model in CurveModel::ALL {
        match fit_curve(model, xs, ys) {
            Ok(f) => fits.push(f),
            Err(e) => skipped.push((model, e.to_string())),
        }
    }
    let best_significant = fits
        .iter()
        .filter(|f| f.p_value < alpha)
        .max_by(|a, b| a.r_squared.total_cmp(&b.r_squared))
        .map(|f| f.model);
    ModelComparison {
        fits,
        skipped,
        best_significant,
        alpha,
    }
}
