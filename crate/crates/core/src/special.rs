//! Exponential integral E1, needed by the Ewald-split Green function.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E1(z) = int_z^inf e^(-t)/t dt for z > 0.
///
/// Power series below z = 2, modified-Lentz continued fraction above;
/// relative accuracy ~1e-14 across the range used here.
pub fn exp1(z: f64) -> f64 {
    assert!(z > 0.0, "exp1 requires z > 0");
    if z < 2.0 {
        // E1 = -gamma - ln z + sum_{m>=1} (-1)^(m+1) z^m / (m * m!)
        let mut sum = 0.0;
        let mut pow = 1.0; // z^m / m!
        for m in 1..=60 {
            pow *= z / m as f64;
            let term = pow / m as f64;
            if m % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() + sum
    } else {
        // e^-z / (z + 1/(1 + 1/(z + 2/(1 + 2/(z + ...)))))
        // modified Lentz with b0 = z, a_i = ceil(i/2), b_i alternating 1, z
        let tiny = 1e-300;
        let mut f = z;
        let mut c = z;
        let mut d = 0.0f64;
        for i in 1..200 {
            let a = ((i + 1) / 2) as f64;
            let b = if i % 2 == 1 { 1.0 } else { z };
            d = b + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z).exp() / f
    }
}
