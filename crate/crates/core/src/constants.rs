//! Unit conventions and physical constants.
//!
//! Everything runs in natural units with hbar = k_B = 1. Energies and
//! frequencies are stored as angular frequencies in units of 1e9 rad/s
//! (written "angular GHz" throughout), time in ns, so a phase is just
//! energy * time. Inverse temperature beta = 1/T then carries ns.

/// Boltzmann constant, J/K (2019 SI exact value).
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Working temperature quoted for the device, mK.
pub const DEVICE_TEMPERATURE_MK: f64 = 12.1;

/// The device temperature expressed in angular GHz, as used by the
/// shipped experiment configurations (the rounded published value).
pub const DEVICE_TEMPERATURE: f64 = 1.57;

/// Convert a temperature in mK to an angular frequency in 1e9 rad/s.
///
/// k_B * T / hbar, scaled to the crate's 1e9 rad/s energy unit. For the
/// 12.1 mK working point this gives 1.584, within 1% of the rounded
/// 1.57 used in the experiment configurations.
pub fn temperature_mk_to_angular_ghz(t_mk: f64) -> f64 {
    K_BOLTZMANN * (t_mk * 1e-3) / HBAR / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_temperature_conversion() {
        let t = temperature_mk_to_angular_ghz(DEVICE_TEMPERATURE_MK);
        assert!((t - 1.584).abs() < 5e-3, "got {t}");
        // within 1.5% of the rounded published figure
        assert!((t - DEVICE_TEMPERATURE).abs() / DEVICE_TEMPERATURE < 0.015);
    }
}
