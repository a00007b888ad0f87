use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::propagation::check_m;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    ExactBinomial,
    GaussianAsymptotic,
}

impl WeightScheme {
    pub fn weights(self, m: usize) -> Result<Arc<Vec<f64>>> {
        cached_weights(m, self)
    }
}

/// Folded binomial weights `w_j = C(m, m/2 + j) / 2^m` for `j = 0..=m/2`.
///
/// Built in log space from `ln w_0` with `k = m/2`, then
/// `w_{j+1} = w_j (k-j)/(k+j+1)`.
pub fn binomial_weights(m: usize) -> Result<Vec<f64>> {
    check_m(m)?;
    let k = m / 2;
    let kf = k as f64;
    let mut log_w = log_central(k);
    let mut out = Vec::with_capacity(k + 1);
    out.push(log_w.exp());
    for j in 0..k {
        let jf = j as f64;
        log_w += (-(2.0 * jf + 1.0) / (kf + jf + 1.0)).ln_1p();
        out.push(log_w.exp());
    }
    Ok(out)
}

/// `ln(C(2k, k) / 4^k)`.
///
/// Small `k` sums `ln((k+i)/(4i))` directly. For larger `k` that sum drifts by
/// ~1e-12, so the Stirling series `-ln(πk)/2 + S(2k) - 2S(k)` is used instead.
fn log_central(k: usize) -> f64 {
    let kf = k as f64;
    if k < 32 {
        return (1..=k)
            .map(|i| ((kf + i as f64) / (4.0 * i as f64)).ln())
            .sum();
    }
    let s = |z: f64| {
        let z2 = z * z;
        (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
    };
    -0.5 * (std::f64::consts::PI * kf).ln() + s(2.0 * kf) - 2.0 * s(kf)
}

/// Stirling limit `e^{-2j²/m} / √(mπ/2)`.
pub fn gaussian_weights(m: usize) -> Result<Vec<f64>> {
    check_m(m)?;
    let mf = m as f64;
    let norm = (mf * std::f64::consts::PI / 2.0).sqrt().recip();
    Ok((0..=m / 2)
        .map(|j| {
            let jf = j as f64;
            (-2.0 * jf * jf / mf).exp() * norm
        })
        .collect())
}

/// `w_0 + 2 Σ_{j≥1} w_j`.
pub fn folded_sum(w: &[f64]) -> f64 {
    w[0] + 2.0 * w[1..].iter().sum::<f64>()
}

// Beyond this the vectors are cheap to rebuild relative to their footprint.
const CACHE_MAX_M: usize = 1 << 14;

type WeightCache = RwLock<HashMap<(usize, WeightScheme), Arc<Vec<f64>>>>;

fn cache() -> &'static WeightCache {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub fn cached_weights(m: usize, scheme: WeightScheme) -> Result<Arc<Vec<f64>>> {
    let build = || match scheme {
        WeightScheme::ExactBinomial => binomial_weights(m),
        WeightScheme::GaussianAsymptotic => gaussian_weights(m),
    };
    if m > CACHE_MAX_M {
        return Ok(Arc::new(build()?));
    }
    if let Some(w) = cache().read().expect("weight cache poisoned").get(&(m, scheme)) {
        return Ok(Arc::clone(w));
    }
    let w = Arc::new(build()?);
    let mut guard = cache().write().expect("weight cache poisoned");
    Ok(Arc::clone(guard.entry((m, scheme)).or_insert(w)))
}
