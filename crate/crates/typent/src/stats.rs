//! Sample statistics for Monte Carlo purity runs.

use crate::error::{Error, Result};

/// The 2-Renyi entropy -log P (natural log).
pub fn renyi2(purity: f64) -> Result<f64> {
    if purity.is_nan() || purity <= 0.0 {
        return Err(Error::invalid(format!("purity {purity} not in (0, 1]")));
    }
    Ok(-purity.ln())
}

/// Aggregated purity statistics over an ensemble of samples.
///
/// `mean_s2` is the sample mean of -log P, which by Jensen's inequality
/// dominates `s2_of_mean` = -log(mean P).
#[derive(Clone, Debug, PartialEq)]
pub struct PurityStats {
    pub mean: f64,
    /// Unbiased (n-1) sample variance of the purity.
    pub variance: f64,
    /// Standard error of the mean purity.
    pub stderr: f64,
    pub count: usize,
    /// Mean of -log P over the samples.
    pub mean_s2: f64,
    /// -log of the mean purity.
    pub s2_of_mean: f64,
    /// Standard error of `variance`, estimated from the fourth central
    /// moment: sqrt((m4 - (n-3)/(n-1) m2^2) / n).
    pub variance_stderr: f64,
    /// Standard error of `mean_s2`.
    pub s2_stderr: f64,
}

impl PurityStats {
    /// Aggregate per-sample purities in their canonical order. The reduction
    /// is a fixed-order sequential sum, so the result is bit-identical for a
    /// given sample vector regardless of how the samples were produced.
    pub fn from_purities(purities: &[f64]) -> Result<Self> {
        let n = purities.len();
        if n == 0 {
            return Err(Error::invalid("at least one sample required"));
        }
        let nf = n as f64;
        let mean = purities.iter().sum::<f64>() / nf;

        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for &p in purities {
            let dev = p - mean;
            m2 += dev * dev;
            m4 += dev * dev * dev * dev;
        }
        m2 /= nf;
        m4 /= nf;

        let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        let stderr = (variance / nf).sqrt();
        let variance_stderr = if n > 1 {
            ((m4 - (nf - 3.0) / (nf - 1.0) * m2 * m2).max(0.0) / nf).sqrt()
        } else {
            0.0
        };

        let logs: Vec<f64> = purities
            .iter()
            .map(|&p| renyi2(p))
            .collect::<Result<_>>()?;
        let mean_s2 = logs.iter().sum::<f64>() / nf;
        let s2_var = if n > 1 {
            logs.iter().map(|&s| (s - mean_s2).powi(2)).sum::<f64>() / (nf - 1.0)
        } else {
            0.0
        };

        Ok(PurityStats {
            mean,
            variance,
            stderr,
            count: n,
            mean_s2,
            s2_of_mean: renyi2(mean)?,
            variance_stderr,
            s2_stderr: (s2_var / nf).sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renyi2_values() {
        assert_eq!(renyi2(1.0).unwrap(), 0.0);
        // -log2(0.8) after base conversion
        let nats = renyi2(0.8).unwrap();
        assert!((nats / 2.0f64.ln() - 0.321928094887362).abs() < 1e-12);
        // maximally mixed: P = d^-L_A gives L_A log d
        let d: f64 = 3.0;
        let la = 4;
        let nats = renyi2(d.powi(-la)).unwrap();
        assert!((nats - la as f64 * d.ln()).abs() < 1e-12);
        assert!(renyi2(0.0).is_err());
        assert!(renyi2(-0.5).is_err());
    }

    #[test]
    fn stats_on_known_samples() {
        let samples = [0.5, 0.75, 1.0, 0.75];
        let stats = PurityStats::from_purities(&samples).unwrap();
        assert!((stats.mean - 0.75).abs() < 1e-15);
        // unbiased variance of these four points
        let expect_var = (0.0625 + 0.0 + 0.0625 + 0.0) / 3.0;
        assert!((stats.variance - expect_var).abs() < 1e-15);
        assert!((stats.stderr - (expect_var / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(stats.count, 4);
        assert!(stats.variance_stderr > 0.0);
    }

    #[test]
    fn jensen_ordering_holds() {
        let samples = [0.3, 0.9, 0.55, 0.7, 1.0];
        let stats = PurityStats::from_purities(&samples).unwrap();
        assert!(stats.mean_s2 >= stats.s2_of_mean - 1e-12);
    }

    #[test]
    fn degenerate_single_sample() {
        let stats = PurityStats::from_purities(&[0.8]).unwrap();
        assert_eq!(stats.variance, 0.0);
        assert_eq!(stats.stderr, 0.0);
        assert_eq!(stats.count, 1);
    }

    #[test]
    fn rejects_empty_and_nonpositive() {
        assert!(PurityStats::from_purities(&[]).is_err());
        assert!(PurityStats::from_purities(&[0.5, 0.0]).is_err());
    }
}
