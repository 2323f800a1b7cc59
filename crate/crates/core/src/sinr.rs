//! Interference aggregation and the SINR ratio shared by the direct and
//! IRS-assisted models. Both models use the same interference and noise
//! denominator; only the signal term differs.

use crate::error::{domain, Result};
use crate::linkbudget::{
    conventional_rx_power, linear_to_db, ConventionalLink, Position3D, RadioEnvironment,
};

/// A downlink transmitter that is not serving the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceSource {
    pub transmit_power: f64,
    pub position: Position3D,
    pub pathloss_exponent: f64,
}

impl InterferenceSource {
    pub fn validate(&self) -> Result<()> {
        if !(self.transmit_power >= 0.0 && self.transmit_power.is_finite()) {
            return domain(format!(
                "interferer power must be non-negative, got {}",
                self.transmit_power
            ));
        }
        if !(self.pathloss_exponent >= 2.0 && self.pathloss_exponent.is_finite()) {
            return domain(format!(
                "interferer path-loss exponent must be >= 2, got {}",
                self.pathloss_exponent
            ));
        }
        if !self.position.is_finite() {
            return domain("interferer position must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub signal_power: f64,
    pub interference_power: f64,
    pub noise_power: f64,
    pub sinr_linear: f64,
    /// `-inf` when the signal is zero.
    pub sinr_db: f64,
}

/// Sum of the direct-path power each source delivers at `user`.
pub fn interference_power(
    user: &Position3D,
    sources: &[InterferenceSource],
    env: &RadioEnvironment,
) -> Result<f64> {
    sources.iter().try_fold(0.0, |acc, source| {
        let link = ConventionalLink {
            transmit_power: source.transmit_power,
            transmitter: source.position,
            receiver: *user,
            pathloss_exponent: source.pathloss_exponent,
        };
        Ok(acc + conventional_rx_power(&link, env)?)
    })
}

pub fn sinr(signal_power: f64, interference_power: f64, noise_power: f64) -> Result<SinrSample> {
    if !(signal_power >= 0.0) || !(interference_power >= 0.0) {
        return domain(format!(
            "signal and interference must be non-negative (signal {signal_power}, interference {interference_power})"
        ));
    }
    if !(noise_power > 0.0) {
        return domain(format!("noise power must be positive, got {noise_power}"));
    }
    let sinr_linear = signal_power / (interference_power + noise_power);
    let sinr_db = if sinr_linear > 0.0 {
        linear_to_db(sinr_linear)
    } else {
        f64::NEG_INFINITY
    };
    Ok(SinrSample {
        signal_power,
        interference_power,
        noise_power,
        sinr_linear,
        sinr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env() -> RadioEnvironment {
        RadioEnvironment::new(130e9, 1e-12, 3.0, 4.0).unwrap()
    }

    fn macro_at(x: f64) -> InterferenceSource {
        InterferenceSource {
            transmit_power: 50.0,
            position: Position3D::new(x, 0.0, 0.0),
            pathloss_exponent: 4.0,
        }
    }

    #[test]
    fn no_sources_no_interference() {
        assert_eq!(
            interference_power(&Position3D::default(), &[], &env()).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_macro_source_oracle() {
        let got = interference_power(&Position3D::default(), &[macro_at(500.0)], &env()).unwrap();
        // 40-digit evaluation, 50 W at 500 m with exponent 4.
        assert!(
            ((got - 2.694_169_778_529_444e-17) / got).abs() < 1e-13,
            "{got}"
        );
    }

    #[test]
    fn co_located_sources_add() {
        let one = interference_power(&Position3D::default(), &[macro_at(250.0)], &env()).unwrap();
        let two = interference_power(
            &Position3D::default(),
            &[macro_at(250.0), macro_at(250.0)],
            &env(),
        )
        .unwrap();
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn user_on_source_is_domain_error() {
        assert!(
            interference_power(&Position3D::new(3.0, 0.0, 0.0), &[macro_at(3.0)], &env()).is_err()
        );
    }

    #[test]
    fn sinr_examples() {
        let unit = sinr(3.0, 1.0, 2.0).unwrap();
        assert_eq!(unit.sinr_linear, 1.0);
        assert_eq!(unit.sinr_db, 0.0);

        let snr = sinr(1e-9, 0.0, 1e-12).unwrap();
        assert!((snr.sinr_db - 30.0).abs() < 1e-12);

        let s = sinr(1e-9, 1e-11, 1e-12).unwrap();
        assert!((s.sinr_linear - 90.909_090_909_090_9).abs() < 1e-12);
        assert!((s.sinr_db - 19.586_073_148_417_75).abs() < 1e-12);

        let zero = sinr(0.0, 1e-11, 1e-12).unwrap();
        assert_eq!(zero.sinr_linear, 0.0);
        assert_eq!(zero.sinr_db, f64::NEG_INFINITY);
    }

    #[test]
    fn sinr_rejects_bad_inputs() {
        assert!(sinr(-1.0, 0.0, 1.0).is_err());
        assert!(sinr(1.0, -1e-20, 1.0).is_err());
        assert!(sinr(1.0, 0.0, 0.0).is_err());
        assert!(sinr(f64::NAN, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn ratio_is_homogeneous(s in 1e-15..1e-3f64, i in 0.0..1e-6f64, n in 1e-15..1e-9f64, k in 1e-3..1e3f64) {
            let a = sinr(s, i, n).unwrap().sinr_linear;
            let b = sinr(k * s, k * i, k * n).unwrap().sinr_linear;
            prop_assert!(((a - b) / a).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_each_argument(s in 1e-15..1e-3f64, i in 0.0..1e-6f64, n in 1e-15..1e-9f64, bump in 1.01..10.0f64) {
            let base = sinr(s, i, n).unwrap().sinr_linear;
            prop_assert!(sinr(s * bump, i, n).unwrap().sinr_linear > base);
            prop_assert!(sinr(s, i + n * (bump - 1.0), n).unwrap().sinr_linear < base);
            prop_assert!(sinr(s, i, n * bump).unwrap().sinr_linear < base);
        }

        #[test]
        fn interference_is_additive(
            xs in proptest::collection::vec((10.0..900.0f64, 0.0..80.0f64, 2.0..5.0f64), 0..6),
            split in 0usize..6,
        ) {
            let sources: Vec<_> = xs
                .iter()
                .map(|&(x, p, a)| InterferenceSource { transmit_power: p, position: Position3D::new(x, 5.0, 10.0), pathloss_exponent: a })
                .collect();
            let cut = split.min(sources.len());
            let user = Position3D::new(0.0, 0.0, 1.5);
            let whole = interference_power(&user, &sources, &env()).unwrap();
            let parts = interference_power(&user, &sources[..cut], &env()).unwrap()
                + interference_power(&user, &sources[cut..], &env()).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(f64::MIN_POSITIVE));
        }
    }
}
