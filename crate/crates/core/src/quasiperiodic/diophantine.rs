use serde::{Deserialize, Serialize};

/// Diophantine class parameters: `‖kω‖ >= C0 / |k|^A` for all `k != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
}

impl Default for DiophantineParams {
    fn default() -> Self {
        Self { a: 2.0, c0: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiophantineCheck {
    pub satisfied: bool,
    /// Smallest `k >= 1` minimising `‖kω‖ |k|^A / C0`.
    pub worst_k: u64,
    /// The minimised ratio; the condition holds iff it is at least one.
    pub worst_ratio: f64,
}

/// Distance to the nearest integer.
pub fn dist_to_int(y: f64) -> f64 {
    (y - y.round()).abs()
}

/// Scans `1 <= k <= k_max` for the condition `‖kω‖ >= C0 k^{-A}`.
/// Negative `k` give the same distances and are not scanned separately.
pub fn is_diophantine(omega: f64, params: DiophantineParams, k_max: u64) -> DiophantineCheck {
    assert!(k_max >= 1, "k_max must be at least 1");
    let mut worst_k = 1;
    let mut worst_ratio = f64::INFINITY;
    for k in 1..=k_max {
        let kf = k as f64;
        let ratio = dist_to_int(kf * omega) * kf.powf(params.a) / params.c0;
        if ratio < worst_ratio {
            worst_ratio = ratio;
            worst_k = k;
        }
    }
    DiophantineCheck { satisfied: worst_ratio >= 1.0, worst_k, worst_ratio }
}
