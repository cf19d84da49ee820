//! Bessel functions of the first kind and their zeros.
//!
//! Self-contained evaluation good to ~1e-13 on the ranges the disk
//! spectrum needs: ascending series for small argument, Hankel
//! asymptotics for large argument, and order recursion in between
//! (upward when stable, Miller's downward normalization otherwise).
//! Zeros are found by bracketing and bisection.

use std::f64::consts::{FRAC_PI_4, PI};

/// Below this the ascending series loses at most ~2 digits to
/// cancellation; between the two cutoffs Miller's normalized downward
/// recurrence carries every order; beyond, Hankel asymptotics seed an
/// upward recurrence.
const SERIES_CUTOFF: f64 = 9.0;
const ASYMPTOTIC_CUTOFF: f64 = 18.0;

fn j_series(order: u32, x: f64) -> f64 {
    let m = order as f64;
    let half = 0.5 * x;
    let q = -half * half;
    // term_0 = (x/2)^m / m!
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (m + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel asymptotic expansion J_ν ≈ √(2/πx)(P cos χ − Q sin χ) with
/// χ = x − νπ/2 − π/4 and a_k(ν) = Π(4ν²−(2i−1)²)/(k!·8^k).
/// Only reached for ν ∈ {0, 1}, where ten terms give ~1e-14 at x ≥ 16.
fn j_asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0; // a_k / x^k
    for k in 0..10u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    let chi = x - (order as f64) * 0.5 * PI - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_m(x) for integer order m ≥ 0 and x ≥ 0.
pub fn jn(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_CUTOFF {
        j_series(order, x)
    } else if x < ASYMPTOTIC_CUTOFF || (order as f64) >= x {
        jn_miller(order, x)
    } else {
        match order {
            0 => j_asymptotic(0, x),
            1 => j_asymptotic(1, x),
            _ => {
                // upward recurrence, stable for x > order
                let mut prev = j_asymptotic(0, x);
                let mut curr = j_asymptotic(1, x);
                for k in 1..order {
                    let next = 2.0 * k as f64 / x * curr - prev;
                    prev = curr;
                    curr = next;
                }
                curr
            }
        }
    }
}

/// Miller's downward recurrence, normalized by J_0 + 2ΣJ_{2k} = 1.
fn jn_miller(order: u32, x: f64) -> f64 {
    let base = (order).max(x.ceil() as u32);
    let mut start = base + base / 2 + 28;
    if start % 2 != 0 {
        start += 1;
    }
    let mut upper = 0.0f64; // J_{k+1}
    let mut here = 1e-30f64; // J_k
    let mut norm = 0.0f64;
    let mut result = 0.0f64;
    let mut k = start as i64;
    while k >= 0 {
        if k as u32 == order {
            result = here;
        }
        if k % 2 == 0 {
            norm += if k == 0 { here } else { 2.0 * here };
        }
        if k > 0 {
            let lower = 2.0 * k as f64 / x * here - upper;
            upper = here;
            here = lower;
            if here.abs() > 1e250 {
                here *= 1e-250;
                upper *= 1e-250;
                norm *= 1e-250;
                result *= 1e-250;
            }
        }
        k -= 1;
    }
    result / norm
}

/// J_m'(x) from the recurrence J_m' = J_{m-1} − (m/x)·J_m (m ≥ 1),
/// J_0' = −J_1.
pub fn jn_prime(order: u32, x: f64) -> f64 {
    if order == 0 {
        -jn(1, x)
    } else {
        jn(order - 1, x) - order as f64 / x * jn(order, x)
    }
}

/// Positive zeros of J_m below `x_max`, ascending, located by scanning
/// for sign changes and bisecting to ~1e-13 absolute accuracy.
pub fn jn_zeros_below(order: u32, x_max: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    // J_m > 0 on (0, j_{m,1}) and j_{m,1} > m, so start just above 0 / m
    let mut x = if order == 0 { 0.05 } else { order as f64 };
    let step = 0.05;
    let mut f_prev = jn(order, x);
    while x < x_max {
        let x_next = x + step;
        let f_next = jn(order, x_next);
        if f_prev == 0.0 {
            zeros.push(x);
        } else if f_prev * f_next < 0.0 {
            let z = bisect(order, x, x_next, f_prev);
            if z < x_max {
                zeros.push(z);
            }
        }
        x = x_next;
        f_prev = f_next;
    }
    zeros
}

fn bisect(order: u32, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let mut sign_lo = f_lo.signum();
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let f_mid = jn(order, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
        sign_lo = jn(order, lo).signum();
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    // first zeros of J_0, J_1, J_2 to 15 digits (Abramowitz & Stegun 9.5)
    const J0_ZEROS: [f64; 3] = [2.404825557695773, 5.520078110286311, 8.653727912911013];
    const J1_ZEROS: [f64; 2] = [3.831705970207512, 7.015586669815619];
    const J2_ZEROS: [f64; 2] = [5.135622301840683, 8.417244140399864];

    #[test]
    fn zero_locations_match_reference() {
        let z0 = jn_zeros_below(0, 10.0);
        assert_eq!(z0.len(), 3);
        for (a, b) in z0.iter().zip(J0_ZEROS) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let z1 = jn_zeros_below(1, 8.0);
        for (a, b) in z1.iter().zip(J1_ZEROS) {
            assert!((a - b).abs() < 1e-12);
        }
        let z2 = jn_zeros_below(2, 9.0);
        for (a, b) in z2.iter().zip(J2_ZEROS) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn known_values() {
        // J_0(1) and J_1(1), 15 digits
        assert!((jn(0, 1.0) - 0.7651976865579666).abs() < 1e-14);
        assert!((jn(1, 1.0) - 0.4400505857449335).abs() < 1e-14);
        // J_5(10) reference value
        assert!((jn(5, 10.0) - (-0.2340615281867936)).abs() < 1e-12);
        // large argument goes through the asymptotic branch
        assert!((jn(0, 20.0) - 0.1670246643405831).abs() < 1e-11);
        assert!((jn(2, 25.0) - (-0.1062948032423813)).abs() < 1e-10);
    }

    #[test]
    fn normalization_identity() {
        // J_0(x) + 2 Σ_{k≥1} J_{2k}(x) = 1
        for &x in &[0.5, 3.0, 9.5, 14.0] {
            let mut sum = jn(0, x);
            for m in 1..40 {
                sum += 2.0 * jn(2 * m, x);
            }
            assert!((sum - 1.0).abs() < 1e-12, "x = {x}: {sum}");
        }
    }

    #[test]
    fn squared_normalization_identity() {
        // J_0² + 2 Σ J_k² = 1
        for &x in &[1.0, 6.0, 12.0] {
            let mut sum = jn(0, x).powi(2);
            for m in 1..50 {
                sum += 2.0 * jn(m, x).powi(2);
            }
            assert!((sum - 1.0).abs() < 1e-12, "x = {x}: {sum}");
        }
    }

    #[test]
    fn recurrence_consistency() {
        // J_{m-1} + J_{m+1} = (2m/x) J_m across the order/branch seams
        for &x in &[2.5, 8.0, 14.0, 18.0] {
            for m in 1..12u32 {
                let lhs = jn(m - 1, x) + jn(m + 1, x);
                let rhs = 2.0 * m as f64 / x * jn(m, x);
                assert!((lhs - rhs).abs() < 1e-11, "m={m}, x={x}");
            }
        }
    }

    #[test]
    fn derivative_at_zero_matches_next_order() {
        // at a zero z of J_m, J_m'(z) = −J_{m+1}(z)
        for (m, zeros) in [(0u32, &J0_ZEROS[..]), (1, &J1_ZEROS[..]), (2, &J2_ZEROS[..])] {
            for &z in zeros {
                let lhs = jn_prime(m, z);
                let rhs = -jn(m + 1, z);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zeros_interlace() {
        let z0 = jn_zeros_below(0, 30.0);
        let z1 = jn_zeros_below(1, 30.0);
        for k in 0..z1.len().min(z0.len() - 1) {
            assert!(z0[k] < z1[k] && z1[k] < z0[k + 1]);
        }
    }
}
