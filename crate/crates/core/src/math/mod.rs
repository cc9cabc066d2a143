//! Shared numeric helpers: special functions, basic statistics, filtering,
//! and a small symmetric eigensolver.

pub mod eigen;
pub mod filter;

/// Lanczos approximation of the Gamma function (g = 7, n = 9).
///
/// Relative error is below 2e-10 over the positive reals, which is far
/// tighter than anything the moment-matching estimators here need.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection formula
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = COEF[0];
        for (i, c) in COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Arithmetic mean. Returns 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divide by n).
pub fn std_pop(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_matches_known_values() {
        assert_relative_eq!(gamma(1.0), 1.0, max_relative = 1e-10);
        assert_relative_eq!(gamma(2.0), 1.0, max_relative = 1e-10);
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-10);
        assert_relative_eq!(gamma(0.5), std::f64::consts::PI.sqrt(), max_relative = 1e-10);
        assert_relative_eq!(gamma(3.5), 3.323_350_970_447_843, max_relative = 1e-9);
    }

    #[test]
    fn population_std() {
        assert_relative_eq!(std_pop(&[0.0, 2.0]), 1.0);
        assert_relative_eq!(mean(&[0.0, 2.0]), 1.0);
    }

    #[test]
    fn sigmoid_closed_forms() {
        assert_relative_eq!(sigmoid(0.0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(sigmoid(1.0), 0.731_058_578_630_004_9, epsilon = 1e-12);
        assert_relative_eq!(sigmoid(-1.0), 0.268_941_421_369_995_1, epsilon = 1e-12);
    }
}
