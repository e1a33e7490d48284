use serde::Serialize;

use crate::error::{HermiteError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityTest {
    pub statistic: f64,
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Jarque–Bera test; the statistic is asymptotically χ² with two degrees of
/// freedom, whose survival function is `exp(-x/2)`.
pub fn jarque_bera(sample: &[f64]) -> Result<NormalityTest> {
    let n = sample.len();
    if n < 8 {
        return Err(HermiteError::InvalidInput(format!(
            "normality test needs at least 8 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in sample {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return Err(HermiteError::Degenerate("sample has zero variance".into()));
    }
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let statistic = nf / 6.0 * (skewness * skewness + 0.25 * excess_kurtosis * excess_kurtosis);
    Ok(NormalityTest {
        statistic,
        p_value: (-0.5 * statistic).exp(),
        skewness,
        excess_kurtosis,
    })
}
