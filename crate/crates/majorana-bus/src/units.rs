//! Physical constants and unit conversions.

use std::f64::consts::PI;

/// ħ²/(2mₑ) in meV·nm².
pub const HBAR2_OVER_2ME_MEV_NM2: f64 = 38.099_821;
/// ħ in meV·ns.
pub const HBAR_MEV_NS: f64 = 6.582_119_569e-4;
/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 8.617_333_262e-2;

/// Angular frequency (rad/ns) of a frequency given in GHz.
pub fn ghz_to_rad_per_ns(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz
}

/// Frequency in MHz of an angular frequency in rad/ns.
pub fn rad_per_ns_to_mhz(w: f64) -> f64 {
    w / (2.0 * PI) * 1e3
}

/// Bose-Einstein occupation of a mode of angular frequency `omega` (rad/ns) at `temperature` (K).
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR_MEV_NS * omega / (KB_MEV_PER_K * temperature);
    1.0 / x.exp_m1()
}
