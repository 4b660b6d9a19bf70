//! dB / dBm conversions. The model itself only sees linear quantities.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Noise power in watts for a spectral density in dBm/Hz over a bandwidth.
pub fn noise_power(dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    dbm_to_watts(dbm_per_hz) * bandwidth_hz
}

/// Circulator leakage from an isolation figure: 0 dB means everything leaks.
pub fn isolation_db_to_phi(isolation_db: f64) -> f64 {
    10f64.powf(-isolation_db / 10.0)
}

/// Residual SI fraction from a SIC gain `1/alpha` in dB. Infinite gain is
/// perfect cancellation.
pub fn sic_gain_db_to_alpha(gain_db: f64) -> f64 {
    if gain_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-gain_db / 10.0)
    }
}
