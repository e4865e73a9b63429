//! Univariate polynomials (coefficients low to high) in `f64` and exact
//! rationals: evaluation, companion-matrix roots, Newton refinement and
//! Sturm isolation.

use nalgebra::{Complex, DMatrix};
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Q};

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn eval_exact(c: &[Q], x: &Q) -> Q {
    c.iter().rev().fold(Q::zero(), |acc, a| acc * x + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

pub fn derivative_exact(c: &[Q]) -> Vec<Q> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * rational::qi(k as i64)).collect()
}

pub fn mul_exact(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Drops exactly vanishing leading coefficients.
pub fn trim_exact(mut c: Vec<Q>) -> Vec<Q> {
    while c.last().is_some_and(|a| a.is_zero()) {
        c.pop();
    }
    c
}

fn companion_roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// All complex roots. Roots inside the unit disc are taken from the
/// polynomial itself and roots outside from its reversal, which keeps both
/// tiny and huge roots accurate when coefficients are badly scaled.
pub fn roots(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    // zero roots
    let zeros = c.iter().take_while(|a| **a == 0.0).count();
    let core = &c[zeros..];
    let mut out = vec![Complex::new(0.0, 0.0); zeros];
    if core.len() <= 1 {
        return out;
    }
    let direct = companion_roots(core);
    let rev: Vec<f64> = core.iter().rev().copied().collect();
    let reversed: Vec<Complex<f64>> = companion_roots(&rev)
        .into_iter()
        .map(|z| Complex::new(1.0, 0.0) / z)
        .collect();
    let mut small: Vec<Complex<f64>> = direct.into_iter().filter(|z| z.norm() <= 1.0).collect();
    let mut large: Vec<Complex<f64>> = reversed.into_iter().filter(|z| z.norm() > 1.0).collect();
    // The split can disagree on roots close to the unit circle; fall back on
    // the direct eigenvalues then.
    if small.len() + large.len() != core.len() - 1 {
        small = companion_roots(core);
        large.clear();
    }
    out.append(&mut small);
    out.append(&mut large);
    aberth(core, &mut out[zeros..]);
    out
}

fn eval_complex(c: &[f64], z: Complex<f64>) -> (Complex<f64>, Complex<f64>) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Aberth–Ehrlich refinement of all roots at once; clusters of nearly
/// double roots, where eigenvalues lose half of the digits, separate cleanly.
fn aberth(c: &[f64], z: &mut [Complex<f64>]) {
    let n = z.len();
    // coincident starting points stall the iteration
    for k in 0..n {
        for j in 0..k {
            if (z[k] - z[j]).norm() <= 1e-14 * z[k].norm() {
                z[k] *= Complex::new(1.0, 1e-9);
            }
        }
    }
    for _ in 0..100 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let (p, dp) = eval_complex(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    s += Complex::new(1.0, 0.0) / (z[k] - z[j]);
                }
            }
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * s);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
}

/// Newton polishing of a real root with a caller-supplied evaluator
/// returning `(f, f')`.
pub fn polish<F>(mut x: f64, f: F) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    for _ in 0..60 {
        let (v, dv) = f(x);
        if v == 0.0 || dv == 0.0 || !dv.is_finite() {
            break;
        }
        let step = v / dv;
        let nx = x - step;
        if !nx.is_finite() {
            break;
        }
        let done = step.abs() <= 1e-17 * x.abs().max(1e-300);
        x = nx;
        if done {
            break;
        }
    }
    x
}

/// Newton refinement of a simple root over the rationals, rounding every
/// iterate to `bits` significant bits.
pub fn refine_exact(c: &[Q], seed: f64, bits: u64) -> Option<Q> {
    let dc = derivative_exact(c);
    let mut x = rational::from_f64(seed)?;
    for _ in 0..400 {
        let v = eval_exact(c, &x);
        if v.is_zero() {
            return Some(x);
        }
        let dv = eval_exact(&dc, &x);
        if dv.is_zero() {
            return None;
        }
        let step = v / dv;
        let nx = rational::round_to_bits(&(&x - &step), bits);
        let small = {
            let s = step.abs();
            let scale = x.abs();
            // |step| <= |x| 2^{-bits+8}
            s.is_zero() || rational::to_f64(&(s / scale)).log2() < -(bits as f64) + 8.0
        };
        x = nx;
        if small {
            return Some(x);
        }
    }
    None
}

/// `a mod b` over the rationals; `b` must have a nonzero leading coefficient.
fn rem_exact(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = trim_exact(a.to_vec());
    let lb = b.last().expect("nonzero divisor");
    while r.len() >= b.len() {
        let f = r.last().unwrap() / lb;
        let shift = r.len() - b.len();
        for (k, c) in b.iter().enumerate() {
            r[shift + k] -= &f * c;
        }
        r.pop();
        r = trim_exact(r);
    }
    r
}

/// Scales by a positive rational to coprime integer coefficients.
fn primitive(c: Vec<Q>) -> Vec<Q> {
    use num_integer::Integer;
    let den = c.iter().fold(num_bigint::BigInt::one(), |l, a| l.lcm(a.denom()));
    let num = c.iter().fold(num_bigint::BigInt::zero(), |g, a| g.gcd(a.numer()));
    if num.is_zero() {
        return c;
    }
    let f = Q::new(den, num);
    c.into_iter().map(|a| a * &f).collect()
}

fn sturm_chain(c: &[Q]) -> Vec<Vec<Q>> {
    let mut chain = vec![primitive(trim_exact(c.to_vec())), primitive(trim_exact(derivative_exact(c)))];
    loop {
        let n = chain.len();
        if chain[n - 1].is_empty() {
            chain.pop();
            return chain;
        }
        let r: Vec<Q> = rem_exact(&chain[n - 2], &chain[n - 1]).into_iter().map(|x| -x).collect();
        if r.is_empty() {
            return chain;
        }
        chain.push(primitive(r));
    }
}

fn sign_changes(chain: &[Vec<Q>], x: &Q) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| eval_exact(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn relative_width(lo: &Q, hi: &Q) -> Option<Q> {
    let same_sign = lo.is_positive() == hi.is_positive() && !lo.is_zero() && !hi.is_zero();
    same_sign.then(|| (hi - lo) / lo.abs().min(hi.abs()))
}

/// Bisection down to 24 bits, then Newton steps from inside the bracket.
fn refine_isolated(c: &[Q], dc: &[Q], mut lo: Q, mut hi: Q, bits: u64) -> Q {
    let two = rational::qi(2);
    let s_hi = eval_exact(c, &hi).is_positive();
    let coarse = Q::new(One::one(), num_bigint::BigInt::one() << 24usize);
    let fine = Q::new(One::one(), num_bigint::BigInt::one() << bits as usize);
    loop {
        let w = relative_width(&lo, &hi);
        if w.as_ref().is_some_and(|w| *w <= coarse) {
            break;
        }
        let mid = (&lo + &hi) / &two;
        let v = eval_exact(c, &mid);
        if v.is_zero() {
            return mid;
        }
        if v.is_positive() == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = rational::round_to_bits(&((&lo + &hi) / &two), 80);
    for _ in 0..64 {
        let d = eval_exact(dc, &x);
        if d.is_zero() {
            break;
        }
        let step = eval_exact(c, &x) / d;
        let nx = rational::round_to_bits(&(&x - &step), bits + 16);
        if nx <= lo || nx >= hi {
            break;
        }
        if step.abs() <= nx.abs() * &fine / rational::qi(16) {
            return nx;
        }
        x = nx;
    }
    // Newton left the bracket: plain bisection
    loop {
        if relative_width(&lo, &hi).is_some_and(|w| w <= fine) {
            return rational::round_to_bits(&((&lo + &hi) / &two), bits + 8);
        }
        let mid = (&lo + &hi) / &two;
        let v = eval_exact(c, &mid);
        if v.is_zero() {
            return mid;
        }
        if v.is_positive() == s_hi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// All real roots of a squarefree polynomial, increasing, each to `bits`
/// significant bits. `None` when the polynomial has a repeated root.
pub fn real_roots_exact(c: &[Q], bits: u64) -> Option<Vec<Q>> {
    let mut c = trim_exact(c.to_vec());
    let zeros = c.iter().take_while(|a| a.is_zero()).count();
    if zeros > 1 {
        return None;
    }
    c.drain(..zeros);
    if c.len() < 2 {
        return Some(vec![Q::zero(); zeros]);
    }
    let chain = sturm_chain(&c);
    if chain.last().map_or(true, |g| g.len() != 1) {
        return None;
    }
    let lead = c.last().unwrap().abs();
    let cauchy = c.iter().fold(Q::zero(), |m, a| m.max(a.abs() / &lead)) + Q::one();
    // a power of two keeps every bisection point dyadic
    let bound = Q::from_integer(num_bigint::BigInt::one() << (cauchy.ceil().to_integer().bits() as usize + 1));
    // isolate: intervals (lo, hi] holding exactly one root
    let mut stack = vec![(-bound.clone(), bound)];
    let mut isolated = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = sign_changes(&chain, &lo) - sign_changes(&chain, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            isolated.push((lo, hi));
            continue;
        }
        // a split point that is not itself a root
        let w = &hi - &lo;
        let mid = [rational::q(1, 2), rational::q(17, 32), rational::q(15, 32), rational::q(9, 16)]
            .into_iter()
            .map(|f| &lo + &w * f)
            .find(|m| !eval_exact(&c, m).is_zero())?;
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    let dc = derivative_exact(&c);
    let mut out: Vec<Q> = isolated.into_iter().map(|(lo, hi)| refine_isolated(&c, &dc, lo, hi, bits)).collect();
    out.extend(std::iter::repeat(Q::zero()).take(zeros));
    out.sort();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn evaluation() {
        assert_eq!(eval(&[1.0, 2.0, 3.0], 2.0), 17.0);
        assert_eq!(eval_exact(&[qi(1), qi(2), qi(3)], &q(1, 2)), q(11, 4));
        assert_eq!(derivative(&[1.0, 2.0, 3.0]), vec![2.0, 6.0]);
    }

    #[test]
    fn badly_scaled_roots() {
        // (x - 1e-6)(x - 2)(x - 3e5)
        let r = [1e-6, 2.0, 3e5];
        let c = [-r[0] * r[1] * r[2], r[0] * r[1] + r[0] * r[2] + r[1] * r[2], -(r[0] + r[1] + r[2]), 1.0];
        let mut found: Vec<f64> = roots(&c).iter().map(|z| z.re).collect();
        found.sort_by(f64::total_cmp);
        for (a, b) in found.iter().zip(r) {
            let p = polish(*a, |x| (eval(&c, x), eval(&derivative(&c), x)));
            assert!((p - b).abs() <= 1e-12 * b, "{p} vs {b}");
        }
    }

    #[test]
    fn sturm_isolates_close_roots() {
        // (x - 1)(x - 1 - 2^-80)(x + 3)
        let e = Q::new(1.into(), num_bigint::BigInt::one() << 80usize);
        let r1 = qi(1) + &e;
        let c = mul_exact(&mul_exact(&[qi(-1), qi(1)], &[-r1.clone(), qi(1)]), &[qi(3), qi(1)]);
        let roots = real_roots_exact(&c, 200).unwrap();
        assert_eq!(roots.len(), 3);
        for (x, want) in roots.iter().zip([qi(-3), qi(1), r1]) {
            assert!((x - &want).abs() < Q::new(1.into(), num_bigint::BigInt::one() << 190usize));
        }
        // a root at the origin
        let z = real_roots_exact(&[qi(0), qi(-2), qi(0), qi(1)], 64).unwrap();
        assert_eq!(z[1], qi(0));
        // a double root is reported
        assert!(real_roots_exact(&mul_exact(&[qi(-1), qi(1)], &[qi(-1), qi(1)]), 64).is_none());
    }

    #[test]
    fn exact_refinement() {
        // x^2 - 2
        let c = vec![qi(-2), qi(0), qi(1)];
        let r = refine_exact(&c, 1.4, 200).unwrap();
        let err = &r * &r - qi(2);
        assert!(rational::to_f64(&err.abs()) < 1e-55);
    }
}
