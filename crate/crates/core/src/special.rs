//! Elliptic integrals, Jacobi `sn`, theta series and rational recognition.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || !(x + y).is_finite() || !z.is_finite() {
        return Err(Error::Elliptic(format!("R_F arguments out of domain: {x}, {y}, {z}")));
    }
    if (x == 0.0) as u8 + (y == 0.0) as u8 + (z == 0.0) as u8 > 1 {
        return Err(Error::Elliptic("R_F with two vanishing arguments diverges".into()));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    // Carlson's stopping rule: (3 r)^(-1/6) max|A0 - x| with r = 1e-17.
    let mut q = (3.0e-17f64).powf(-1.0 / 6.0) * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut a = a0;
    for _ in 0..200 {
        if q < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = (x + lambda) / 4.0;
        y = (y + lambda) / 4.0;
        z = (z + lambda) / 4.0;
        a = (a + lambda) / 4.0;
        q /= 4.0;
    }
    let dx = 1.0 - x / a;
    let dy = 1.0 - y / a;
    let dz = -dx - dy;
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    let poly = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0 - 5.0 * e2 * e2 * e2 / 208.0
        + 3.0 * e3 * e3 / 104.0
        + e2 * e2 * e3 / 16.0;
    let v = poly / a.sqrt();
    if !v.is_finite() {
        return Err(Error::Elliptic("R_F did not converge".into()));
    }
    Ok(v)
}

/// `K(k)` from `k^2`, through `R_F(0, 1 - k^2, 1)`.
pub fn ellip_k_carlson(k2: f64) -> Result<f64> {
    carlson_rf(0.0, 1.0 - k2, 1.0)
}

pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a.abs() {
            break;
        }
        let an = (a + b) / 2.0;
        b = (a * b).sqrt();
        a = an;
    }
    (a + b) / 2.0
}

/// `K(k)` by the arithmetic-geometric mean, with `k'^2 = 1 - k^2` supplied
/// directly so that moduli close to 1 keep full relative accuracy.
pub fn ellip_k_from_complement(kp2: f64) -> f64 {
    PI / (2.0 * agm(1.0, kp2.sqrt()))
}

pub fn ellip_k_agm(k2: f64) -> f64 {
    ellip_k_from_complement(1.0 - k2)
}

/// Jacobi `sn(u, k)` by the descending Landen / AGM scheme; `kp2 = 1 - k^2`.
pub fn jacobi_sn(u: f64, kp2: f64) -> f64 {
    let k2 = 1.0 - kp2;
    if k2 <= 0.0 {
        return u.sin();
    }
    let mut a = vec![1.0];
    let mut c = vec![k2.sqrt()];
    let mut b = kp2.sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 40 {
        let an = *a.last().unwrap();
        a.push((an + b) / 2.0);
        c.push((an - b) / 2.0);
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for k in (1..=n).rev() {
        phi = (phi + (c[k] / a[k] * phi.sin()).asin()) / 2.0;
    }
    phi.sin()
}

/// Number of series terms needed so that the neglected tail is below 1e-17.
pub fn theta_terms(q: f64) -> usize {
    let aq = q.abs();
    if aq == 0.0 {
        return 1;
    }
    let mut n = 1usize;
    while (n * n) as f64 * aq.ln() > (1e-17f64).ln() && n < 10_000 {
        n += 1;
    }
    n + 1
}

/// Jacobi theta functions `theta_kind(z, q)` with `q = e^{i pi tau}`:
/// `theta_3(z) = 1 + 2 sum q^{n^2} cos 2nz`, etc. `theta_3` and `theta_4`
/// accept negative `q`; `theta_1`, `theta_2` require `q >= 0`.
pub fn theta(kind: u8, z: f64, q: f64, terms: Option<usize>) -> Result<f64> {
    if !(q.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("nome {q} outside (-1, 1)")));
    }
    let n = terms.unwrap_or_else(|| theta_terms(q));
    match kind {
        1 | 2 => {
            if q < 0.0 {
                return Err(Error::InvalidArgument("theta_1/theta_2 need a nonnegative nome".into()));
            }
            let q4 = q.powf(0.25);
            let mut s = 0.0;
            for k in 0..n as i32 {
                let t = q4 * q.powi(k * (k + 1));
                let arg = (2 * k + 1) as f64 * z;
                s += if kind == 1 {
                    if k % 2 == 0 { t * arg.sin() } else { -t * arg.sin() }
                } else {
                    t * arg.cos()
                };
            }
            Ok(2.0 * s)
        }
        3 | 4 => {
            let mut s = 0.0;
            for k in 1..n as i32 {
                let t = q.powi(k * k) * ((2 * k) as f64 * z).cos();
                s += if kind == 4 && k % 2 == 1 { -t } else { t };
            }
            Ok(1.0 + 2.0 * s)
        }
        _ => Err(Error::InvalidArgument(format!("theta kind {kind} not in 1..=4"))),
    }
}

/// `theta_1(iy, q) / i` and `theta_2(iy, q)` for real `y >= 0`, evaluated
/// with factored exponentials so that large `y` does not overflow.
pub fn theta12_imaginary(y: f64, q: f64) -> (f64, f64) {
    let lq = q.ln();
    let mut s = 0.0;
    let mut c = 0.0;
    for k in 0..200i32 {
        let h = k as f64 + 0.5;
        // q^{h^2} e^{(2k+1) y} and q^{h^2} e^{-(2k+1) y}
        let up = (lq * h * h + 2.0 * h * y).exp();
        let down = (lq * h * h - 2.0 * h * y).exp();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * (up - down);
        c += up + down;
        if up < 1e-300 && k > 2 {
            break;
        }
    }
    (s, c)
}

/// Best rational approximation `p/q` with `q <= qmax` (continued fractions
/// with semiconvergents).
pub fn best_rational(x: f64, qmax: i64) -> (i64, i64) {
    if !x.is_finite() {
        return (0, 1);
    }
    let neg = x < 0.0;
    let x = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut v = x;
    loop {
        let a = v.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > qmax {
            // largest semiconvergent that fits
            let t = (qmax - q0) / q1.max(1);
            let (ps, qs) = (p0 + t * p1, q0 + t * q1);
            if q1 == 0 || ((ps as f64 / qs as f64) - x).abs() < ((p1 as f64 / q1 as f64) - x).abs() {
                if qs > 0 {
                    p1 = ps;
                    q1 = qs;
                }
            }
            break;
        }
        let p2 = a * p1 + p0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return (0, 1);
    }
    (if neg { -p1 } else { p1 }, q1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rf_special_values() {
        // R_F(x,x,x) = 1/sqrt(x)
        assert!((carlson_rf(4.0, 4.0, 4.0).unwrap() - 0.5).abs() < 1e-15);
        // R_F(0,1,2) = 1.31102877714605990523... (DLMF 19.36)
        assert!((carlson_rf(0.0, 1.0, 2.0).unwrap() - 1.311_028_777_146_059_9).abs() < 1e-14);
        assert!(carlson_rf(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn complete_integral_agrees() {
        assert!((ellip_k_agm(0.0) - PI / 2.0).abs() < 1e-15);
        // K(1/sqrt 2) = Gamma(1/4)^2 / (4 sqrt(pi))
        let expected = 1.854_074_677_301_371_9;
        assert!((ellip_k_agm(0.5) - expected).abs() < 1e-14);
        assert!((ellip_k_carlson(0.5).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn sn_limits() {
        assert!((jacobi_sn(0.3, 1.0) - 0.3f64.sin()).abs() < 1e-15);
        let k2 = 0.7;
        let kk = ellip_k_agm(k2);
        assert!((jacobi_sn(kk, 1.0 - k2) - 1.0).abs() < 1e-12);
        // sn near k = 1 approaches tanh
        assert!((jacobi_sn(0.8, 1e-14) - 0.8f64.tanh()).abs() < 1e-9);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(3, 0.0, 0.0, None).unwrap(), 1.0);
        let t = theta(3, 0.0, 0.1, None).unwrap();
        assert!((t - 1.200_200_002_000_000_2).abs() < 1e-12);
        let a = theta(4, 0.0, 0.05, None).unwrap();
        let b = theta(3, 0.0, -0.05, None).unwrap();
        assert!((a - b).abs() < 1e-16);
        // Jacobi's identity theta_3^4 = theta_2^4 + theta_4^4
        let q = 0.3;
        let t2 = theta(2, 0.0, q, None).unwrap();
        let t3 = theta(3, 0.0, q, None).unwrap();
        let t4 = theta(4, 0.0, q, None).unwrap();
        assert!((t3.powi(4) - t2.powi(4) - t4.powi(4)).abs() < 1e-13);
    }

    #[test]
    fn imaginary_theta_matches_real_continuation() {
        let q: f64 = 0.2;
        let y = 0.4;
        let (s, c) = theta12_imaginary(y, q);
        let mut s2 = 0.0;
        let mut c2 = 0.0;
        for k in 0..30 {
            let h = k as f64 + 0.5;
            let t = q.powf(h * h);
            s2 += if k % 2 == 0 { t } else { -t } * ((2 * k + 1) as f64 * y).sinh();
            c2 += t * ((2 * k + 1) as f64 * y).cosh();
        }
        assert!((s - 2.0 * s2).abs() < 1e-14);
        assert!((c - 2.0 * c2).abs() < 1e-14);
    }

    #[test]
    fn rational_recognition() {
        assert_eq!(best_rational(0.4, 16), (2, 5));
        assert_eq!(best_rational(2.0 / 3.0 + 1e-12, 16), (2, 3));
        assert_eq!(best_rational(PI - 3.0, 10), (1, 7));
        assert_eq!(best_rational(0.5, 16), (1, 2));
        assert_eq!(best_rational(0.0, 16), (0, 1));
    }
}
