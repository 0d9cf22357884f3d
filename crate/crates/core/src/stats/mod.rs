//! From-scratch statistics engine: multiple linear regression with
//! inference, nested-model ANOVA, one-way ANOVA, Tukey HSD, and the
//! two-sample z-test.
//!
//! The linear solve goes through a Householder QR decomposition of the
//! design matrix for conditioning; the explicit normal-equations path exists
//! only as an independent oracle in the test suite.

pub mod dist;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::LogBase;
use dist::{f_cdf, normal_cdf, studentized_range_cdf, studentized_range_quantile, t_cdf};

/// A fitted linear model with per-term inference and goodness-of-fit
/// summary statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionFit {
    /// "(Intercept)" followed by the regressor names.
    pub term_names: Vec<String>,
    pub beta: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_value: Vec<f64>,
    pub p_value: Vec<f64>,
    pub residual_se: f64,
    pub df_residual: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub rss: f64,
    /// Base of the logarithm applied to the response, kept so the
    /// coefficients stay interpretable.
    pub log_base: LogBase,
}

impl RegressionFit {
    pub fn n_obs(&self) -> usize {
        self.df_residual + self.term_names.len()
    }

    /// p-value of a named term.
    pub fn term_p(&self, name: &str) -> Option<f64> {
        self.term_names
            .iter()
            .position(|t| t == name)
            .map(|i| self.p_value[i])
    }

    /// Coefficient of a named term.
    pub fn term_beta(&self, name: &str) -> Option<f64> {
        self.term_names
            .iter()
            .position(|t| t == name)
            .map(|i| self.beta[i])
    }
}

/// F-test comparing a model against a restriction of it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NestedAnova {
    pub rss_full: f64,
    pub rss_reduced: f64,
    pub df_full: usize,
    pub df_reduced: usize,
    pub f: f64,
    pub p: f64,
}

/// One-way analysis of variance over k labeled groups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneWayAnova {
    pub k: usize,
    pub group_names: Vec<String>,
    pub group_sizes: Vec<usize>,
    pub group_means: Vec<f64>,
    pub df_between: usize,
    pub ss_between: f64,
    pub ms_between: f64,
    pub df_within: usize,
    pub ss_within: f64,
    pub ms_within: f64,
    pub f: f64,
    pub p: f64,
}

/// One Tukey HSD comparison. `pair` is "later-earlier" in input group
/// order and `diff` the corresponding difference of means.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TukeyPair {
    pub pair: String,
    pub diff: f64,
    pub lwr: f64,
    pub upr: f64,
    pub p_adj: f64,
}

/// All-pairs Tukey HSD comparisons at a family-wise confidence level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TukeyResult {
    pub family_confidence: f64,
    pub k: usize,
    pub df_within: usize,
    pub pairs: Vec<TukeyPair>,
}

/// Two-sample z-test outcome: the statistic and the two-sided type I error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub alpha: f64,
}

/// Coefficients of the published reduced distortion model
/// `D = beta0 + beta1*Cr + beta2*F` (base-10 log scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperModelCoefficients {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// Published reference values for [`PaperModelCoefficients`].
pub const PAPER_MODEL: PaperModelCoefficients = PaperModelCoefficients {
    beta0: -0.46375,
    beta1: 0.02606,
    beta2: -0.0081453,
};

/// Ordinary least squares with an implicit leading intercept.
///
/// `columns` are the regressors; all inference (standard errors, t and
/// p-values, R-squared, overall F against the intercept-only model) follows
/// the classical formulas with `df = n - #terms`.
pub fn ols_fit(names: &[&str], columns: &[Vec<f64>], response: &[f64]) -> Result<RegressionFit> {
    let n = response.len();
    let p = columns.len() + 1;
    if names.len() != columns.len() {
        return Err(Error::Invalid(format!(
            "{} names for {} columns",
            names.len(),
            columns.len()
        )));
    }
    for (name, col) in names.iter().zip(columns) {
        if col.len() != n {
            return Err(Error::Invalid(format!(
                "column {} has {} rows, response has {}",
                name,
                col.len(),
                n
            )));
        }
    }
    if n <= p {
        return Err(Error::Invalid(format!(
            "need more than {} observations to fit {} terms, got {}",
            p, p, n
        )));
    }

    let mut term_names = Vec::with_capacity(p);
    term_names.push("(Intercept)".to_string());
    term_names.extend(names.iter().map(|s| s.to_string()));

    // Column-major design matrix with the intercept first.
    let mut design: Vec<Vec<f64>> = Vec::with_capacity(p);
    design.push(vec![1.0; n]);
    for col in columns {
        design.push(col.clone());
    }
    let col_norms: Vec<f64> = design
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    // Householder QR, LINPACK style: reflectors stored in the lower part of
    // each column, R's diagonal in `rdiag`, R's strict upper triangle in the
    // processed columns' leading rows.
    let mut qr = design;
    let mut rdiag = vec![0.0; p];
    for k in 0..p {
        let mut nrm = 0.0f64;
        for i in k..n {
            nrm = nrm.hypot(qr[k][i]);
        }
        if nrm <= 1e-10 * col_norms[k].max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate(format!(
                "design is rank deficient at column {:?}",
                term_names[k]
            )));
        }
        if qr[k][k] < 0.0 {
            nrm = -nrm;
        }
        for i in k..n {
            qr[k][i] /= nrm;
        }
        qr[k][k] += 1.0;
        for j in k + 1..p {
            let mut s = 0.0;
            for i in k..n {
                s += qr[k][i] * qr[j][i];
            }
            s = -s / qr[k][k];
            for i in k..n {
                qr[j][i] += s * qr[k][i];
            }
        }
        rdiag[k] = -nrm;
    }

    // Apply the reflections to the response, then back-substitute.
    let mut qty = response.to_vec();
    for k in 0..p {
        let mut s = 0.0;
        for i in k..n {
            s += qr[k][i] * qty[i];
        }
        s = -s / qr[k][k];
        for i in k..n {
            qty[i] += s * qr[k][i];
        }
    }
    let mut beta = vec![0.0; p];
    for k in (0..p).rev() {
        let mut v = qty[k];
        for j in k + 1..p {
            v -= r_at(&qr, &rdiag, k, j) * beta[j];
        }
        beta[k] = v / rdiag[k];
    }

    // Residuals against the original design.
    let mut rss = 0.0;
    let mean_y = response.iter().sum::<f64>() / n as f64;
    let mut tss = 0.0;
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let mut fitted = beta[0];
        for j in 1..p {
            fitted += beta[j] * columns[j - 1][i];
        }
        let r = response[i] - fitted;
        residuals.push(r);
        rss += r * r;
        let d = response[i] - mean_y;
        tss += d * d;
    }
    if tss <= 0.0 {
        return Err(Error::Degenerate("response is constant".into()));
    }

    let df_residual = n - p;
    let sigma2 = rss / df_residual as f64;
    let residual_se = sigma2.sqrt();

    // (X'X)^-1 = R^-1 R^-T from the triangular factor.
    let rinv = invert_upper(&qr, &rdiag, p);
    let mut stderr = Vec::with_capacity(p);
    for j in 0..p {
        let unit: f64 = (j..p).map(|k| rinv[j][k] * rinv[j][k]).sum();
        stderr.push((sigma2 * unit).sqrt());
    }

    let mut t_value = Vec::with_capacity(p);
    let mut p_value = Vec::with_capacity(p);
    for j in 0..p {
        let t = beta[j] / stderr[j];
        t_value.push(t);
        p_value.push(2.0 * (1.0 - t_cdf(t.abs(), df_residual as f64)?));
    }

    let r_squared = 1.0 - rss / tss;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df_residual as f64;
    let (f_statistic, f_p_value) = if p > 1 {
        let f = ((tss - rss) / (p as f64 - 1.0)) / sigma2;
        let fp = 1.0 - f_cdf(f, p as f64 - 1.0, df_residual as f64)?;
        (f, fp)
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(RegressionFit {
        term_names,
        beta,
        stderr,
        t_value,
        p_value,
        residual_se,
        df_residual,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        rss,
        log_base: LogBase::Ten,
    })
}

/// R entry at (row, col) for row < col; the strict upper triangle lives in
/// the leading rows of the processed columns.
fn r_at(qr: &[Vec<f64>], _rdiag: &[f64], row: usize, col: usize) -> f64 {
    qr[col][row]
}

fn invert_upper(qr: &[Vec<f64>], rdiag: &[f64], p: usize) -> Vec<Vec<f64>> {
    let mut rinv = vec![vec![0.0; p]; p];
    for c in 0..p {
        let mut x = vec![0.0; p];
        x[c] = 1.0;
        for k in (0..=c).rev() {
            let mut v = x[k];
            for j in k + 1..=c {
                v -= r_at(qr, rdiag, k, j) * x[j];
            }
            x[k] = v / rdiag[k];
        }
        for r in 0..p {
            rinv[r][c] = x[r];
        }
    }
    rinv
}

/// F-test of a full model against a reduced model whose terms are a subset
/// of the full model's, fitted to the same observations.
pub fn nested_anova(full: &RegressionFit, reduced: &RegressionFit) -> Result<NestedAnova> {
    if full.n_obs() != reduced.n_obs() {
        return Err(Error::Invalid(format!(
            "models were fitted to different sample sizes ({} vs {})",
            full.n_obs(),
            reduced.n_obs()
        )));
    }
    for term in &reduced.term_names {
        if !full.term_names.contains(term) {
            return Err(Error::Invalid(format!(
                "models are not nested: reduced term {:?} missing from full model",
                term
            )));
        }
    }
    let delta_df = reduced.df_residual as isize - full.df_residual as isize;
    if delta_df < 0 {
        return Err(Error::Invalid(
            "reduced model has more terms than the full model".into(),
        ));
    }
    if delta_df == 0 {
        // Identical term sets: nothing to test.
        return Ok(NestedAnova {
            rss_full: full.rss,
            rss_reduced: reduced.rss,
            df_full: full.df_residual,
            df_reduced: reduced.df_residual,
            f: 0.0,
            p: 1.0,
        });
    }
    let delta_df = delta_df as f64;
    let rss_diff = (reduced.rss - full.rss).max(0.0);
    let f = (rss_diff / delta_df) / (full.rss / full.df_residual as f64);
    let p = 1.0 - f_cdf(f, delta_df, full.df_residual as f64)?;
    Ok(NestedAnova {
        rss_full: full.rss,
        rss_reduced: reduced.rss,
        df_full: full.df_residual,
        df_reduced: reduced.df_residual,
        f,
        p,
    })
}

/// Classical between/within variance decomposition for k labeled groups.
pub fn one_way_anova(groups: &[(String, Vec<f64>)]) -> Result<OneWayAnova> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::Invalid(format!(
            "one-way ANOVA needs at least 2 groups, got {}",
            k
        )));
    }
    for (name, values) in groups {
        if values.len() < 2 {
            return Err(Error::Invalid(format!(
                "group {:?} has {} observations, need at least 2",
                name,
                values.len()
            )));
        }
    }
    let n_total: usize = groups.iter().map(|(_, v)| v.len()).sum();
    let grand_mean =
        groups.iter().flat_map(|(_, v)| v).sum::<f64>() / n_total as f64;

    let mut group_names = Vec::with_capacity(k);
    let mut group_sizes = Vec::with_capacity(k);
    let mut group_means = Vec::with_capacity(k);
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for (name, values) in groups {
        let m = values.iter().sum::<f64>() / values.len() as f64;
        ss_between += values.len() as f64 * (m - grand_mean) * (m - grand_mean);
        ss_within += values.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        group_names.push(name.clone());
        group_sizes.push(values.len());
        group_means.push(m);
    }

    let df_between = k - 1;
    let df_within = n_total - k;
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let (f, p) = if ms_within == 0.0 {
        if ss_between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_between / ms_within;
        (f, 1.0 - f_cdf(f, df_between as f64, df_within as f64)?)
    };

    Ok(OneWayAnova {
        k,
        group_names,
        group_sizes,
        group_means,
        df_between,
        ss_between,
        ms_between,
        df_within,
        ss_within,
        ms_within,
        f,
        p,
    })
}

/// Tukey HSD over all group pairs, with the Tukey-Kramer standard error for
/// unequal group sizes.
pub fn tukey_hsd(groups: &[(String, Vec<f64>)], family_confidence: f64) -> Result<TukeyResult> {
    if !(0.0 < family_confidence && family_confidence < 1.0) {
        return Err(Error::Invalid(format!(
            "family confidence must be in (0, 1), got {}",
            family_confidence
        )));
    }
    let anova = one_way_anova(groups)?;
    let k = anova.k;
    let df = anova.df_within as f64;
    let q_crit = studentized_range_quantile(family_confidence, k, df)?;

    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for j in 0..k {
        for i in j + 1..k {
            let diff = anova.group_means[i] - anova.group_means[j];
            let se = (anova.ms_within
                * (1.0 / anova.group_sizes[i] as f64 + 1.0 / anova.group_sizes[j] as f64)
                / 2.0)
                .sqrt();
            let q_obs = if diff == 0.0 { 0.0 } else { diff.abs() / se };
            let p_adj = if q_obs.is_finite() {
                (1.0 - studentized_range_cdf(q_obs, k, df)?).clamp(0.0, 1.0)
            } else {
                0.0
            };
            pairs.push(TukeyPair {
                pair: format!("{}-{}", anova.group_names[i], anova.group_names[j]),
                diff,
                lwr: diff - q_crit * se,
                upr: diff + q_crit * se,
                p_adj,
            });
        }
    }
    Ok(TukeyResult {
        family_confidence,
        k,
        df_within: anova.df_within,
        pairs,
    })
}

/// Two-sample z-test on the difference of means from summary statistics.
/// The two-sided type I error uses |z|, so it is a probability for either
/// sign of the difference.
pub fn two_sample_ztest(
    mean1: f64,
    sd1: f64,
    n1: usize,
    mean2: f64,
    sd2: f64,
    n2: usize,
) -> Result<ZTest> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::Invalid(format!(
            "both samples need n >= 2, got {} and {}",
            n1, n2
        )));
    }
    if !(sd1 > 0.0) || !(sd2 > 0.0) {
        return Err(Error::Invalid(format!(
            "standard deviations must be positive, got {} and {}",
            sd1, sd2
        )));
    }
    let z = (mean2 - mean1) / (sd1 * sd1 / n1 as f64 + sd2 * sd2 / n2 as f64).sqrt();
    let alpha = 2.0 * (1.0 - normal_cdf(z.abs()));
    Ok(ZTest { z, alpha })
}

/// Format a p-value; values below 1e-16 print as "< 1e-16".
pub fn format_p(p: f64) -> String {
    if p.is_nan() {
        "NA".to_string()
    } else if p < 1e-16 {
        "< 1e-16".to_string()
    } else if p < 1e-4 {
        format!("{:.3e}", p)
    } else {
        format!("{:.4}", p)
    }
}

fn stars(p: f64) -> &'static str {
    if p.is_nan() {
        ""
    } else if p <= 0.001 {
        "***"
    } else if p <= 0.01 {
        "**"
    } else if p <= 0.05 {
        "*"
    } else if p <= 0.1 {
        "."
    } else {
        ""
    }
}

impl fmt::Display for RegressionFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Coefficients:")?;
        writeln!(
            f,
            "{:<24} {:>12} {:>12} {:>9} {:>10}",
            "", "Estimate", "Std. Error", "t value", "Pr(>|t|)"
        )?;
        for j in 0..self.term_names.len() {
            writeln!(
                f,
                "{:<24} {:>12.6} {:>12.6} {:>9.3} {:>10} {}",
                self.term_names[j],
                self.beta[j],
                self.stderr[j],
                self.t_value[j],
                format_p(self.p_value[j]),
                stars(self.p_value[j])
            )?;
        }
        writeln!(f, "---")?;
        writeln!(
            f,
            "Residual standard error: {:.5} on {} degrees of freedom",
            self.residual_se, self.df_residual
        )?;
        writeln!(
            f,
            "Multiple R-squared: {:.4},  Adjusted R-squared: {:.4}",
            self.r_squared, self.adj_r_squared
        )?;
        if self.term_names.len() > 1 {
            writeln!(
                f,
                "F-statistic: {:.4} on {} and {} DF,  p-value: {}",
                self.f_statistic,
                self.term_names.len() - 1,
                self.df_residual,
                format_p(self.f_p_value)
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for NestedAnova {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Analysis of Variance Table")?;
        writeln!(
            f,
            "  {:>7} {:>12} {:>4} {:>12} {:>9} {:>8}",
            "Res.Df", "RSS", "Df", "Sum of Sq", "F", "Pr(>F)"
        )?;
        writeln!(
            f,
            "1 {:>7} {:>12.6} {:>4} {:>12} {:>9} {:>8}",
            self.df_full, self.rss_full, "", "", "", ""
        )?;
        let delta = self.df_full as isize - self.df_reduced as isize;
        writeln!(
            f,
            "2 {:>7} {:>12.6} {:>4} {:>12.4e} {:>9.4} {:>8}",
            self.df_reduced,
            self.rss_reduced,
            delta,
            self.rss_full - self.rss_reduced,
            self.f,
            format_p(self.p)
        )?;
        Ok(())
    }
}

impl fmt::Display for OneWayAnova {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Analysis of Variance Table")?;
        writeln!(
            f,
            "{:<12} {:>5} {:>10} {:>10} {:>9} {:>10}",
            "", "Df", "Sum Sq", "Mean Sq", "F value", "Pr(>F)"
        )?;
        writeln!(
            f,
            "{:<12} {:>5} {:>10.4} {:>10.4} {:>9.4} {:>10} {}",
            "groups",
            self.df_between,
            self.ss_between,
            self.ms_between,
            self.f,
            format_p(self.p),
            stars(self.p)
        )?;
        writeln!(
            f,
            "{:<12} {:>5} {:>10.4} {:>10.4}",
            "Residuals", self.df_within, self.ss_within, self.ms_within
        )?;
        Ok(())
    }
}

impl fmt::Display for TukeyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  Tukey multiple comparisons of means")?;
        writeln!(
            f,
            "    {}% family-wise confidence level",
            self.family_confidence * 100.0
        )?;
        writeln!(f)?;
        writeln!(
            f,
            "{:<16} {:>12} {:>12} {:>12} {:>10}",
            "", "diff", "lwr", "upr", "p adj"
        )?;
        for pair in &self.pairs {
            writeln!(
                f,
                "{:<16} {:>12.6} {:>12.6} {:>12.6} {:>10}",
                pair.pair,
                pair.diff,
                pair.lwr,
                pair.upr,
                format_p(pair.p_adj)
            )?;
        }
        Ok(())
    }
}
