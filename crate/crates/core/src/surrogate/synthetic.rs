use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::space::StateVector;

use super::ObjectiveModel;

/// Output names of the ozonation model, in prediction order.
pub const OZONATION_OUTPUTS: [&str; 4] = ["k/s", "L*", "a*", "b*"];

/// Analytic colour-fading response for `(water, temperature, pH, time)`.
///
/// Returns `(k/s, L*, a*, b*)`. With normalized inputs
/// `w = water/150`, `T = temp/100`, `p = (pH-1)/13`, `t = (time-1)/59`
/// the fading degree is
///
/// ```text
/// d = 1 - exp(-3 t (0.4 + 0.6 T)(0.2 + 0.8 w)(0.6 + 0.4 sin(pi p)))
/// ```
///
/// and the outputs are `k/s = 3.2 (1 - d)`, `L* = 12 + 55 d`,
/// `a* = -5 - 30 d (1 - 0.5 p)`, `b* = -20 - 60 d (0.5 + 0.5 w)`.
/// Inputs need not lie on the grid.
pub fn synthetic_ozonation(values: &[f64; 4]) -> [f64; 4] {
    let [water, temp, ph, time] = *values;
    let w = water / 150.0;
    let t_ = temp / 100.0;
    let p = (ph - 1.0) / 13.0;
    let t = (time - 1.0) / 59.0;
    let d =
        1.0 - (-3.0 * t * (0.4 + 0.6 * t_) * (0.2 + 0.8 * w) * (0.6 + 0.4 * (PI * p).sin())).exp();
    [
        3.2 * (1.0 - d),
        12.0 + 55.0 * d,
        -5.0 - 30.0 * d * (1.0 - 0.5 * p),
        -20.0 - 60.0 * d * (0.5 + 0.5 * w),
    ]
}

/// [`synthetic_ozonation`] as an [`ObjectiveModel`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticOzonation;

impl ObjectiveModel for SyntheticOzonation {
    fn objective_count(&self) -> usize {
        4
    }

    fn predict(&self, state: &StateVector) -> Result<Vec<f64>> {
        let values: &[f64; 4] = state.values().try_into().map_err(|_| Error::Arity {
            expected: 4,
            got: state.len(),
        })?;
        Ok(synthetic_ozonation(values).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterSpace;

    #[test]
    fn zero_time_gives_base_colour() {
        for v in [
            [0.0, 0.0, 1.0, 1.0],
            [150.0, 100.0, 7.0, 1.0],
            [50.0, 30.0, 14.0, 1.0],
        ] {
            assert_eq!(synthetic_ozonation(&v), [3.2, 12.0, -5.0, -20.0]);
        }
    }

    #[test]
    fn saturated_corner() {
        let out = synthetic_ozonation(&[150.0, 100.0, 7.5, 60.0]);
        let d = 1.0 - (-3.0f64).exp();
        assert!((d - 0.950_212_931_632_136).abs() < 1e-12);
        assert!((out[0] - 3.2 * (-3.0f64).exp()).abs() < 1e-12);
        assert!((out[0] - 0.1593).abs() < 5e-5);
        assert!((out[1] - (12.0 + 55.0 * d)).abs() < 1e-12);
    }

    #[test]
    fn temperature_never_raises_depth() {
        let space = ParameterSpace::ozonation();
        for w in [0.0, 50.0, 100.0, 150.0] {
            for ph in 1..=14 {
                for time in 1..=60 {
                    let mut prev = f64::INFINITY;
                    for temp in (0..=100).step_by(10) {
                        let ks = synthetic_ozonation(&[
                            w,
                            f64::from(temp),
                            f64::from(ph),
                            f64::from(time),
                        ])[0];
                        assert!(ks <= prev);
                        prev = ks;
                    }
                }
            }
        }
        assert_eq!(space.dims(), 4);
    }

    #[test]
    fn depth_and_lightness_share_fading_degree() {
        let space = ParameterSpace::ozonation();
        for s in space.states().step_by(37) {
            let out = SyntheticOzonation.predict(&s).unwrap();
            let lhs = out[0] + (out[1] - 12.0) * (3.2 / 55.0);
            assert!((lhs - 3.2).abs() < 1e-12, "{lhs}");
        }
    }

    #[test]
    fn rejects_wrong_arity() {
        let space = ParameterSpace::new(vec![crate::space::ParameterSpec::new("x", 0.0, 1.0, 1.0)])
            .unwrap();
        let s = space.random_state(0);
        assert!(SyntheticOzonation.predict(&s).is_err());
    }
}
