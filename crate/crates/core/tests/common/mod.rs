//! Independent reference implementations used only by the integration
//! tests. Nothing here calls into the library's correlation code.

#![allow(dead_code)]

/// Direct double loop over the literal normalized cross-correlation:
/// full-sequence means and norms, numerator restricted to valid indices.
pub fn naive_cross(x: &[f64], y: &[f64], f: i64) -> f64 {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    for i in 0..n as i64 {
        let j = i + f;
        if j >= 0 && j < n as i64 {
            num += (x[i as usize] - mx) * (y[j as usize] - my);
        }
    }
    let dx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let dy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    num / (dx.sqrt() * dy.sqrt())
}

pub fn naive_auto(x: &[f64], f: i64) -> f64 {
    let n = x.len();
    let mx = x.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    for i in 0..n as i64 {
        let j = i + f;
        if j >= 0 && j < n as i64 {
            num += (x[i as usize] - mx) * (x[j as usize] - mx);
        }
    }
    let d: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    num / d
}

/// Cyclic extension of the centered correlation: indices wrap modulo N.
pub fn cyclic_centered(x: &[f64], y: &[f64], f: i64) -> f64 {
    let n = x.len() as i64;
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    for i in 0..n {
        num += (x[i as usize] - mx) * (y[(i + f).rem_euclid(n) as usize] - my);
    }
    let dx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let dy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    num / (dx * dy).sqrt()
}

/// Bit-level Fibonacci register written out as a plain Vec<u8>, used to
/// cross-check the packed implementation. `taps` are 1-based flip-flops.
pub fn reference_states(degree: usize, taps: &[usize], seed: &[u8], steps: usize) -> Vec<Vec<u8>> {
    assert_eq!(seed.len(), degree);
    let mut s = seed.to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(s.clone());
        let fb = taps.iter().fold(0u8, |acc, &t| acc ^ s[t - 1]);
        s.rotate_right(1);
        s[0] = fb;
    }
    out
}
