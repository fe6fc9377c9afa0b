// SPDX-License-Identifier: Apache-2.0

use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{DssError, Result};

/// Mixing density on `g`: `p(g) ∝ g^d (g + b)^{-(a + c + d + 1)}` on
/// `g > 0`. When `maruyama_george_d` is set, `d` depends on the model:
/// `d = (n - 5)/2 - p_φ/2 + 3/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperG {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub maruyama_george_d: bool,
}

/// Named hyperparameter configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperGPreset {
    /// `a = 1, b = 1, d = 0` (c left at 0).
    Cui,
    /// `a = 1/2, b = 1, c = 0, d = 0`.
    Liang,
    /// `a = 1/2, b = n, c = 0, d = 0`.
    LiangN,
    /// `c = -3/4, d = (n-5)/2 - p_φ/2 + 3/4`, with `a = 1, b = 1`.
    MaruyamaGeorge,
}

impl HyperGPreset {
    pub fn build(self, n: usize) -> HyperG {
        let (a, b, c, d, mg) = match self {
            HyperGPreset::Cui => (1.0, 1.0, 0.0, 0.0, false),
            HyperGPreset::Liang => (0.5, 1.0, 0.0, 0.0, false),
            HyperGPreset::LiangN => (0.5, n as f64, 0.0, 0.0, false),
            HyperGPreset::MaruyamaGeorge => (1.0, 1.0, -0.75, 0.0, true),
        };
        HyperG {
            a,
            b,
            c,
            d,
            maruyama_george_d: mg,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cui" => Some(HyperGPreset::Cui),
            "liang" => Some(HyperGPreset::Liang),
            "liang-n" | "robust" => Some(HyperGPreset::LiangN),
            "maruyama-george" | "mg" => Some(HyperGPreset::MaruyamaGeorge),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HyperGPreset::Cui => "cui",
            HyperGPreset::Liang => "liang",
            HyperGPreset::LiangN => "liang-n",
            HyperGPreset::MaruyamaGeorge => "maruyama-george",
        }
    }
}

impl HyperG {
    /// The `d` exponent for a model with `k` predictors and `n` observations.
    pub fn d_for(&self, n: usize, k: usize) -> f64 {
        if self.maruyama_george_d {
            (n as f64 - 5.0) / 2.0 - k as f64 / 2.0 + 0.75
        } else {
            self.d
        }
    }

    pub fn validate_for(&self, n: usize, k: usize) -> Result<()> {
        let d = self.d_for(n, k);
        if !(self.a > 0.0 && self.b > 0.0 && self.c > -1.0 && d > -1.0) {
            return Err(DssError::UnsupportedPrior(format!(
                "hyper-g needs a > 0, b > 0, c > -1, d > -1 (got a={}, b={}, c={}, d={d})",
                self.a, self.b, self.c
            )));
        }
        if self.a + self.c <= 0.0 {
            return Err(DssError::UnsupportedPrior(format!(
                "hyper-g density is improper: a + c = {} <= 0",
                self.a + self.c
            )));
        }
        Ok(())
    }

    /// Log density of `g`, normalized: the normalizer is
    /// `b^{-(a+c)} B(d + 1, a + c)`.
    pub fn log_density(&self, g: f64, d: f64) -> f64 {
        let e = self.a + self.c + d + 1.0;
        d * g.ln() - e * (g + self.b).ln() - self.log_normalizer(d)
    }

    pub fn log_normalizer(&self, d: f64) -> f64 {
        -(self.a + self.c) * self.b.ln() + ln_beta(d + 1.0, self.a + self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GFamily {
    Fixed { g: f64 },
    Hyper(HyperG),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelPrior {
    #[default]
    Uniform,
    /// `φ_j ~ Ber(q)` independently, `q ~ Uniform(0, 1)`.
    BetaBinomial,
}

impl ModelPrior {
    /// Log prior mass of one model of size `k` out of `p`.
    pub fn log_mass(self, k: usize, p: usize) -> f64 {
        match self {
            ModelPrior::Uniform => 0.0,
            ModelPrior::BetaBinomial => {
                let ln_choose = ln_gamma(p as f64 + 1.0)
                    - ln_gamma(k as f64 + 1.0)
                    - ln_gamma((p - k) as f64 + 1.0);
                -(p as f64 + 1.0).ln() - ln_choose
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub family: GFamily,
    pub model_prior: ModelPrior,
    /// Maximum admissible model size `M`.
    pub budget: Option<usize>,
}

impl PriorConfig {
    pub fn fixed_g(g: f64, model_prior: ModelPrior) -> Self {
        PriorConfig {
            family: GFamily::Fixed { g },
            model_prior,
            budget: None,
        }
    }

    pub fn hyper_g(h: HyperG, model_prior: ModelPrior) -> Self {
        PriorConfig {
            family: GFamily::Hyper(h),
            model_prior,
            budget: None,
        }
    }

    pub fn with_budget(mut self, m: usize) -> Self {
        self.budget = Some(m);
        self
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if let GFamily::Fixed { g } = self.family {
            if !(g > 0.0 && g.is_finite()) {
                return Err(DssError::UnsupportedPrior(format!("g must be positive, got {g}")));
            }
        }
        if let GFamily::Hyper(h) = self.family {
            if !(h.a > 0.0 && h.b > 0.0 && h.c > -1.0) {
                return Err(DssError::UnsupportedPrior("hyper-g needs a > 0, b > 0, c > -1".into()));
            }
        }
        if let Some(m) = self.budget {
            if m > p {
                return Err(DssError::Argument(format!("budget M = {m} exceeds p = {p}")));
            }
        }
        Ok(())
    }

    /// Largest admissible model size for `n` observations and `p` predictors.
    pub fn max_size(&self, n: usize, p: usize) -> usize {
        let cap = p.min(n - 1);
        match self.budget {
            Some(m) => cap.min(m),
            None => cap,
        }
    }
}
