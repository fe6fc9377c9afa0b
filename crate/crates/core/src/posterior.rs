// SPDX-License-Identifier: Apache-2.0

//! Joint posterior draws of `(β, σ²)`, the common input of every summary.

use std::fmt;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{DssError, Result};
use crate::linalg::neumaier_sum;

/// Which prior (or which outside source) produced a set of draws.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorTag {
    Horseshoe,
    GPrior,
    HyperG,
    LogisticNormal,
    Imported,
    Other(String),
}

impl fmt::Display for PriorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorTag::Horseshoe => f.write_str("horseshoe"),
            PriorTag::GPrior => f.write_str("g-prior"),
            PriorTag::HyperG => f.write_str("hyper-g"),
            PriorTag::LogisticNormal => f.write_str("logistic-normal"),
            PriorTag::Imported => f.write_str("imported"),
            PriorTag::Other(s) => f.write_str(s),
        }
    }
}

/// `S` joint draws: an `S × p` coefficient matrix and `S` variances.
///
/// Logistic posteriors carry an optional per-draw intercept and set every
/// variance to 1. Horseshoe draws may retain their local scales `λ_j` and
/// the global scale `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    beta: DMatrix<f64>,
    sigma2: DVector<f64>,
    intercept: Option<DVector<f64>>,
    local_scales: Option<DMatrix<f64>>,
    global_scales: Option<DVector<f64>>,
    pub prior: PriorTag,
    pub burn_in: usize,
    pub thin: usize,
}

impl PosteriorDraws {
    pub fn new(beta: DMatrix<f64>, sigma2: DVector<f64>, prior: PriorTag) -> Result<Self> {
        if beta.nrows() < 1 {
            return Err(DssError::Argument("posterior draws are empty".into()));
        }
        if beta.nrows() != sigma2.len() {
            return Err(DssError::Argument(format!(
                "{} coefficient draws but {} variance draws",
                beta.nrows(),
                sigma2.len()
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(DssError::Argument("non-finite coefficient draw".into()));
        }
        if sigma2.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(DssError::Argument("variance draws must be finite and positive".into()));
        }
        Ok(PosteriorDraws {
            beta,
            sigma2,
            intercept: None,
            local_scales: None,
            global_scales: None,
            prior,
            burn_in: 0,
            thin: 1,
        })
    }

    pub fn with_intercept(mut self, intercept: DVector<f64>) -> Result<Self> {
        if intercept.len() != self.len() || intercept.iter().any(|v| !v.is_finite()) {
            return Err(DssError::Argument("intercept draws do not match".into()));
        }
        self.intercept = Some(intercept);
        Ok(self)
    }

    pub fn with_local_scales(mut self, scales: DMatrix<f64>) -> Result<Self> {
        if scales.shape() != self.beta.shape() || scales.iter().any(|v| !(*v > 0.0)) {
            return Err(DssError::Argument("local scales must be positive and S × p".into()));
        }
        self.local_scales = Some(scales);
        Ok(self)
    }

    pub fn with_global_scales(mut self, scales: DVector<f64>) -> Result<Self> {
        if scales.len() != self.len() || scales.iter().any(|v| !(*v > 0.0)) {
            return Err(DssError::Argument("global scales must be positive, one per draw".into()));
        }
        self.global_scales = Some(scales);
        Ok(self)
    }

    pub fn with_sampling_metadata(mut self, burn_in: usize, thin: usize) -> Self {
        self.burn_in = burn_in;
        self.thin = thin;
        self
    }

    pub fn len(&self) -> usize {
        self.beta.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.nrows() == 0
    }

    pub fn p(&self) -> usize {
        self.beta.ncols()
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn sigma2(&self) -> &DVector<f64> {
        &self.sigma2
    }

    pub fn intercept(&self) -> Option<&DVector<f64>> {
        self.intercept.as_ref()
    }

    pub fn local_scales(&self) -> Option<&DMatrix<f64>> {
        self.local_scales.as_ref()
    }

    /// Posterior mean coefficient vector `β̄`.
    pub fn mean_beta(&self) -> Vec<f64> {
        (0..self.p())
            .map(|j| neumaier_sum(self.beta.column(j).iter().copied()) / self.len() as f64)
            .collect()
    }

    pub fn mean_sigma2(&self) -> f64 {
        neumaier_sum(self.sigma2.iter().copied()) / self.len() as f64
    }

    pub fn mean_intercept(&self) -> f64 {
        self.intercept
            .as_ref()
            .map(|v| neumaier_sum(v.iter().copied()) / v.len() as f64)
            .unwrap_or(0.0)
    }

    /// Stacks draws from several chains (each already past burn-in).
    pub fn global_scales(&self) -> Option<&DVector<f64>> {
        self.global_scales.as_ref()
    }

    pub fn concat(chains: &[PosteriorDraws]) -> Result<PosteriorDraws> {
        let first = chains
            .first()
            .ok_or_else(|| DssError::Argument("no chains to concatenate".into()))?;
        let p = first.p();
        if chains.iter().any(|c| c.p() != p) {
            return Err(DssError::Argument("chains disagree on p".into()));
        }
        let total: usize = chains.iter().map(|c| c.len()).sum();
        let mut beta = DMatrix::zeros(total, p);
        let mut sigma2 = DVector::zeros(total);
        let keep_scales = chains.iter().all(|c| c.local_scales.is_some());
        let keep_icpt = chains.iter().all(|c| c.intercept.is_some());
        let keep_global = chains.iter().all(|c| c.global_scales.is_some());
        let mut scales = DMatrix::zeros(if keep_scales { total } else { 0 }, p);
        let mut icpt = DVector::zeros(if keep_icpt { total } else { 0 });
        let mut global = DVector::zeros(if keep_global { total } else { 0 });
        let mut row = 0;
        for c in chains {
            for s in 0..c.len() {
                beta.set_row(row, &c.beta.row(s));
                sigma2[row] = c.sigma2[s];
                if keep_scales {
                    scales.set_row(row, &c.local_scales.as_ref().unwrap().row(s));
                }
                if keep_icpt {
                    icpt[row] = c.intercept.as_ref().unwrap()[s];
                }
                if keep_global {
                    global[row] = c.global_scales.as_ref().unwrap()[s];
                }
                row += 1;
            }
        }
        let mut out = PosteriorDraws::new(beta, sigma2, first.prior.clone())?
            .with_sampling_metadata(first.burn_in, first.thin);
        if keep_scales {
            out = out.with_local_scales(scales)?;
        }
        if keep_icpt {
            out = out.with_intercept(icpt)?;
        }
        if keep_global {
            out = out.with_global_scales(global)?;
        }
        Ok(out)
    }

    /// Writes one row per draw: `sigma2[,intercept],<names...>`.
    pub fn write_csv<W: Write>(&self, writer: W, names: &[String]) -> Result<()> {
        if names.len() != self.p() {
            return Err(DssError::Schema(format!(
                "{} names for {} coefficients",
                names.len(),
                self.p()
            )));
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["sigma2".to_string()];
        if self.intercept.is_some() {
            header.push("intercept".into());
        }
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        let mut fields = Vec::with_capacity(header.len());
        for s in 0..self.len() {
            fields.clear();
            fields.push(format!("{}", self.sigma2[s]));
            if let Some(ic) = &self.intercept {
                fields.push(format!("{}", ic[s]));
            }
            for j in 0..self.p() {
                fields.push(format!("{}", self.beta[(s, j)]));
            }
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads draws written by [`write_csv`](Self::write_csv) or by any
    /// outside sampler using the same layout. Returns the draws and the
    /// coefficient names from the header.
    pub fn read_csv<R: Read>(reader: R) -> Result<(PosteriorDraws, Vec<String>)> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.first().map(String::as_str) != Some("sigma2") {
            return Err(DssError::Schema("draws CSV must start with a 'sigma2' column".into()));
        }
        let has_icpt = header.get(1).map(String::as_str) == Some("intercept");
        let offset = if has_icpt { 2 } else { 1 };
        let names: Vec<String> = header[offset..].to_vec();
        if names.is_empty() {
            return Err(DssError::Schema("draws CSV has no coefficient columns".into()));
        }
        let mut sig = Vec::new();
        let mut icpt = Vec::new();
        let mut vals = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(DssError::Schema(format!("draw row {} has wrong width", r + 1)));
            }
            for (c, cell) in rec.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| DssError::Parse {
                    row: r + 1,
                    column: header[c].clone(),
                    message: format!("'{cell}' is not numeric"),
                })?;
                match c {
                    0 => sig.push(v),
                    1 if has_icpt => icpt.push(v),
                    _ => vals.push(v),
                }
            }
        }
        let s = sig.len();
        let p = names.len();
        let beta = DMatrix::from_row_slice(s, p, &vals);
        let mut draws = PosteriorDraws::new(beta, DVector::from_vec(sig), PriorTag::Imported)?;
        if has_icpt {
            draws = draws.with_intercept(DVector::from_vec(icpt))?;
        }
        Ok((draws, names))
    }
}

/// Effective sample size of one chain via Geyer's initial positive sequence.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let m = neumaier_sum(series.iter().copied()) / n as f64;
    let c0 = neumaier_sum(series.iter().map(|v| (v - m) * (v - m))) / n as f64;
    if c0 <= 0.0 {
        return n as f64;
    }
    let autocorr = |lag: usize| -> f64 {
        let s: f64 = (0..n - lag).map(|t| (series[t] - m) * (series[t + lag] - m)).sum();
        s / n as f64 / c0
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = autocorr(lag) + autocorr(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PosteriorDraws {
        let beta = DMatrix::from_row_slice(3, 2, &[0.1, -0.25, 0.3, 1e-17, -2.5, 4.0]);
        PosteriorDraws::new(beta, DVector::from_vec(vec![1.0, 0.5, 2.25]), PriorTag::GPrior).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = sample();
        let mut buf = Vec::new();
        d.write_csv(&mut buf, &["a".into(), "b".into()]).unwrap();
        let (back, names) = PosteriorDraws::read_csv(buf.as_slice()).unwrap();
        assert_eq!(names, vec!["a", "b"]);
        assert_eq!(back.beta(), d.beta());
        assert_eq!(back.sigma2(), d.sigma2());
    }

    #[test]
    fn rejects_nonpositive_variance() {
        let beta = DMatrix::zeros(2, 1);
        let err = PosteriorDraws::new(beta, DVector::from_vec(vec![1.0, 0.0]), PriorTag::Imported);
        assert!(err.is_err());
    }

    #[test]
    fn intercept_column_is_optional() {
        let text = "sigma2,intercept,x\n1,0.5,2\n1,1.5,4\n";
        let (d, names) = PosteriorDraws::read_csv(text.as_bytes()).unwrap();
        assert_eq!(names, vec!["x"]);
        assert_eq!(d.mean_intercept(), 1.0);
        assert_eq!(d.mean_beta(), vec![3.0]);
    }

    #[test]
    fn ess_of_independent_series_is_near_n() {
        use rand::Rng;
        let mut rng = crate::data::RngConfig::new(5).rng();
        let xs: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let ess = effective_sample_size(&xs);
        assert!(ess > 3000.0 && ess < 5000.0, "{ess}");
    }
}
