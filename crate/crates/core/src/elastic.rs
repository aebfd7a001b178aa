//! Drive-force laws for the elastic band.
//!
//! Every law carries a slack clamp: a band shorter than its rest length exerts no force and
//! stores no energy.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ElasticModel {
    /// Constant stiffness spring, `F = k (l − l0)`.
    Linear { stiffness: f64, rest_length: f64 },
    /// Statistical-mechanics rubber law, `F = C0 T (λ − λ⁻²)`.
    Gaussian {
        /// Material constant [N/K].
        c0: f64,
        /// Absolute temperature [K], held fixed (isothermal stretching).
        temperature: f64,
        rest_length: f64,
        area: f64,
    },
    /// Two-coefficient Mooney–Rivlin law, `F/A0 = 2 C1 (λ − λ⁻²) + 2 C2 (1 − λ⁻³)`.
    MooneyRivlin {
        /// [Pa]
        c1: f64,
        /// [Pa]
        c2: f64,
        rest_length: f64,
        area: f64,
    },
}

impl ElasticModel {
    /// Mooney–Rivlin fit of the demonstrator's TheraBand strip.
    pub fn demonstrator() -> Self {
        ElasticModel::MooneyRivlin {
            c1: 68.88e3,
            c2: 73.61e3,
            rest_length: 8.50e-2,
            area: 7.0e-6,
        }
    }

    /// Gaussian fit of the same strip at room temperature.
    pub fn demonstrator_gaussian() -> Self {
        ElasticModel::Gaussian {
            c0: 47.94e-4,
            temperature: 296.0,
            rest_length: 8.50e-2,
            area: 7.0e-6,
        }
    }

    pub fn rest_length(&self) -> f64 {
        match *self {
            ElasticModel::Linear { rest_length, .. }
            | ElasticModel::Gaussian { rest_length, .. }
            | ElasticModel::MooneyRivlin { rest_length, .. } => rest_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ElasticModel::Linear {
                stiffness,
                rest_length,
            } => {
                ensure_non_negative("k", stiffness)?;
                ensure_positive("l0", rest_length)
            }
            ElasticModel::Gaussian {
                c0,
                temperature,
                rest_length,
                area,
            } => {
                ensure_non_negative("C0", c0)?;
                ensure_non_negative("T", temperature)?;
                ensure_positive("l0", rest_length)?;
                ensure_positive("A0", area)
            }
            ElasticModel::MooneyRivlin {
                c1,
                c2,
                rest_length,
                area,
            } => {
                ensure_non_negative("C1", c1)?;
                ensure_non_negative("C2", c2)?;
                ensure_positive("l0", rest_length)?;
                ensure_positive("A0", area)
            }
        }
    }

    /// Band tension at stretch `lambda`.
    pub fn force(&self, lambda: f64) -> Result<f64> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("must be > 0, got {lambda}")));
        }
        Ok(self.force_unchecked(lambda))
    }

    pub(crate) fn force_unchecked(&self, lambda: f64) -> f64 {
        if lambda <= 1.0 {
            return 0.0;
        }
        match *self {
            ElasticModel::Linear {
                stiffness,
                rest_length,
            } => stiffness * rest_length * (lambda - 1.0),
            ElasticModel::Gaussian {
                c0, temperature, ..
            } => c0 * temperature * gaussian_shape(lambda),
            ElasticModel::MooneyRivlin { c1, c2, area, .. } => {
                area * (2.0 * c1 * gaussian_shape(lambda) + 2.0 * c2 * (1.0 - lambda.powi(-3)))
            }
        }
    }

    /// Energy stored in the band at stretch `lambda`, the integral of the force over length
    /// from the rest length. Zero for a slack band.
    pub fn stored_energy(&self, lambda: f64) -> f64 {
        if !(lambda > 1.0) {
            return 0.0;
        }
        match *self {
            ElasticModel::Linear {
                stiffness,
                rest_length,
            } => 0.5 * stiffness * ((lambda - 1.0) * rest_length).powi(2),
            ElasticModel::Gaussian {
                c0,
                temperature,
                rest_length,
                ..
            } => c0 * temperature * rest_length * (0.5 * lambda * lambda + 1.0 / lambda - 1.5),
            ElasticModel::MooneyRivlin {
                c1,
                c2,
                rest_length,
                area,
            } => {
                let stretch = lambda - 1.0;
                area * rest_length / (lambda * lambda)
                    * stretch
                    * stretch
                    * (c1 * lambda * (lambda + 2.0) + 2.0 * c2 * lambda + c2)
            }
        }
    }
}

fn gaussian_shape(lambda: f64) -> f64 {
    lambda - lambda.powi(-2)
}

/// One row of a uniaxial force–stretch test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceStretchSample {
    pub lambda: f64,
    #[serde(rename = "force_N")]
    pub force: f64,
}

impl ForceStretchSample {
    pub fn new(lambda: f64, force: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(Error::invalid("lambda", format!("samples need lambda >= 1, got {lambda}")));
        }
        if !(force.is_finite() && force >= 0.0) {
            return Err(Error::invalid("force_N", format!("samples need force >= 0, got {force}")));
        }
        Ok(Self { lambda, force })
    }
}

/// Goodness-of-fit figures shared by both fitters. `r_squared` is measured against the
/// mean-force model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitQuality {
    pub rmse: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MooneyFit {
    pub c1: f64,
    pub c2: f64,
    #[serde(flatten)]
    pub quality: FitQuality,
}

impl MooneyFit {
    pub fn model(&self, rest_length: f64, area: f64) -> ElasticModel {
        ElasticModel::MooneyRivlin {
            c1: self.c1,
            c2: self.c2,
            rest_length,
            area,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub c0: f64,
    #[serde(flatten)]
    pub quality: FitQuality,
}

/// Ordinary least-squares Mooney–Rivlin coefficients. The law is linear in `(C1, C2)`, so the
/// fit is a two-column linear problem solved by SVD.
pub fn fit_mooney(data: &[ForceStretchSample], area: f64, rest_length: f64) -> Result<MooneyFit> {
    ensure_positive("A0", area)?;
    ensure_positive("l0", rest_length)?;
    let taut: Vec<_> = data.iter().filter(|s| s.lambda > 1.0).collect();
    if taut.is_empty() {
        return Err(Error::AllSlack);
    }
    let mut distinct: Vec<f64> = taut.iter().map(|s| s.lambda).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if data.len() < 3 || distinct.len() < 2 {
        return Err(Error::RankDeficient(format!(
            "{} samples with {} distinct stretch values above 1",
            data.len(),
            distinct.len()
        )));
    }

    // Columns are scaled to unit norm before the solve; the raw columns are O(1e-5).
    let rows = data.len();
    let mut design = DMatrix::<f64>::zeros(rows, 2);
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, s) in data.iter().enumerate() {
        if s.lambda > 1.0 {
            design[(i, 0)] = 2.0 * area * gaussian_shape(s.lambda);
            design[(i, 1)] = 2.0 * area * (1.0 - s.lambda.powi(-3));
        }
        rhs[i] = s.force;
    }
    let scale: Vec<f64> = (0..2).map(|j| design.column(j).norm()).collect();
    for (j, &sj) in scale.iter().enumerate() {
        design.column_mut(j).unscale_mut(sj);
    }
    let svd = design.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if sigma_min <= 1e-12 * sigma_max {
        return Err(Error::RankDeficient("design columns are collinear".into()));
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let c1 = solution[0] / scale[0];
    let c2 = solution[1] / scale[1];
    let model = ElasticModel::MooneyRivlin {
        c1,
        c2,
        rest_length,
        area,
    };
    Ok(MooneyFit {
        c1,
        c2,
        quality: quality(data, &model),
    })
}

/// One-parameter least squares for `C0` at fixed temperature.
pub fn fit_gaussian(data: &[ForceStretchSample], temperature: f64) -> Result<GaussianFit> {
    ensure_positive("T", temperature)?;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in data.iter().filter(|s| s.lambda > 1.0) {
        let x = temperature * gaussian_shape(s.lambda);
        sxy += x * s.force;
        sxx += x * x;
    }
    if sxx == 0.0 {
        return Err(Error::AllSlack);
    }
    let c0 = sxy / sxx;
    let model = ElasticModel::Gaussian {
        c0,
        temperature,
        rest_length: 1.0,
        area: 1.0,
    };
    Ok(GaussianFit {
        c0,
        quality: quality(data, &model),
    })
}

fn quality(data: &[ForceStretchSample], model: &ElasticModel) -> FitQuality {
    let n = data.len() as f64;
    let mean = data.iter().map(|s| s.force).sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for s in data {
        let r = s.force - model.force_unchecked(s.lambda);
        ss_res += r * r;
        ss_tot += (s.force - mean).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    FitQuality {
        rmse: (ss_res / n).sqrt(),
        r_squared,
    }
}
