//! Wigner rotation matrices, used for covariance checks of the collision
//! and cascade geometry.

use crate::{Error, Result};

/// Small Wigner d-matrix element d^j_{mp, m}(beta).
///
/// Factorial-sum formula; integer and half-integer j. Angles in radians.
pub fn wigner_d(j: f64, mp: f64, m: f64, beta: f64) -> Result<f64> {
    let tj = double_checked(j, "j")?;
    let tmp = double_checked(mp, "m'")?;
    let tm = double_checked(m, "m")?;
    if tmp.abs() > tj || tm.abs() > tj || (tj - tmp) % 2 != 0 || (tj - tm) % 2 != 0 {
        return Err(Error::AngularMomentum(format!(
            "wigner_d: invalid projection for j={j}, m'={mp}, m={m}"
        )));
    }
    let h = |t: i32| t / 2;
    let ln_pre = 0.5
        * (ln_fact(h(tj + tmp))
            + ln_fact(h(tj - tmp))
            + ln_fact(h(tj + tm))
            + ln_fact(h(tj - tm)));
    let (cb, sb) = ((0.5 * beta).cos(), (0.5 * beta).sin());
    let s_min = 0.max(h(tm - tmp));
    let s_max = h(tj + tm).min(h(tj - tmp));
    let mut acc = 0.0;
    for s in s_min..=s_max {
        let c_pow = h(2 * tj + tm - tmp) - 2 * s;
        let s_pow = h(tmp - tm) + 2 * s;
        let ln_den = ln_fact(h(tj + tm) - s)
            + ln_fact(s)
            + ln_fact(h(tmp - tm) + s)
            + ln_fact(h(tj - tmp) - s);
        let mag = (ln_pre - ln_den).exp()
            * cb.powi(c_pow)
            * sb.powi(s_pow);
        let sign = if (h(tmp - tm) + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        acc += sign * mag;
    }
    Ok(acc)
}

fn double_checked(x: f64, what: &str) -> Result<i32> {
    let d = (2.0 * x).round();
    if (2.0 * x - d).abs() > 1e-9 {
        return Err(Error::AngularMomentum(format!(
            "{what} = {x} is not integral or half-integral"
        )));
    }
    Ok(d as i32)
}

fn ln_fact(n: i32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::sph_harm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_at_zero_angle() {
        for j in [0.5, 1.0, 2.0] {
            let tj = (2.0 * j) as i32;
            for tm in (-tj..=tj).step_by(2) {
                for tmp in (-tj..=tj).step_by(2) {
                    let d = wigner_d(j, tmp as f64 / 2.0, tm as f64 / 2.0, 0.0).unwrap();
                    let want = if tm == tmp { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(d, want, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn j1_closed_forms() {
        let b = 0.613;
        assert_abs_diff_eq!(wigner_d(1.0, 0.0, 0.0, b).unwrap(), b.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            wigner_d(1.0, 1.0, 0.0, b).unwrap(),
            -b.sin() / std::f64::consts::SQRT_2,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            wigner_d(1.0, 1.0, 1.0, b).unwrap(),
            0.5 * (1.0 + b.cos()),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            wigner_d(1.0, 1.0, -1.0, b).unwrap(),
            0.5 * (1.0 - b.cos()),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rows_are_orthonormal() {
        let b = 1.234;
        for j in [1.0f64, 2.0, 3.0] {
            let dim = (2.0 * j) as i32;
            for ta in (-dim..=dim).step_by(2) {
                for tb in (-dim..=dim).step_by(2) {
                    let mut acc = 0.0;
                    for tmp in (-dim..=dim).step_by(2) {
                        acc += wigner_d(j, tmp as f64 / 2.0, ta as f64 / 2.0, b).unwrap()
                            * wigner_d(j, tmp as f64 / 2.0, tb as f64 / 2.0, b).unwrap();
                    }
                    let want = if ta == tb { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(acc, want, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn consistent_with_spherical_harmonics() {
        // Y_l^m(beta, alpha) = sqrt((2l+1)/4pi) d^l_{m,0}(beta) e^{i m alpha}
        let (beta, alpha) = (0.9, 2.3);
        for l in 0..=4u32 {
            for m in -(l as i32)..=l as i32 {
                let lhs = sph_harm(l, m, beta, alpha).unwrap();
                let d = wigner_d(l as f64, m as f64, 0.0, beta).unwrap();
                let pre = ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI)).sqrt();
                let rhs = pre * d * num_complex::Complex64::from_polar(1.0, m as f64 * alpha);
                assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-13);
                assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-13);
            }
        }
    }
}
