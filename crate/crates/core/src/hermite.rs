//! Quintic Hermite interpolation from values, first and second derivatives.

/// Value, first and second derivative at `x ∈ [x0, x0 + h]` of the quintic
/// matching `(y, y′, y″)` at both ends.
pub fn quintic(x0: f64, h: f64, left: [f64; 3], right: [f64; 3], x: f64) -> [f64; 3] {
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let b = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        10.0 * t3 - 15.0 * t4 + 6.0 * t5,
        -4.0 * t3 + 7.0 * t4 - 3.0 * t5,
        0.5 * t3 - t4 + 0.5 * t5,
    ];
    let db = [
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        30.0 * t2 - 60.0 * t3 + 30.0 * t4,
        -12.0 * t2 + 28.0 * t3 - 15.0 * t4,
        1.5 * t2 - 4.0 * t3 + 2.5 * t4,
    ];
    let ddb = [
        -60.0 * t + 180.0 * t2 - 120.0 * t3,
        -36.0 * t + 96.0 * t2 - 60.0 * t3,
        1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
        60.0 * t - 180.0 * t2 + 120.0 * t3,
        -24.0 * t + 84.0 * t2 - 60.0 * t3,
        3.0 * t - 12.0 * t2 + 10.0 * t3,
    ];
    let c = [
        left[0],
        h * left[1],
        h * h * left[2],
        right[0],
        h * right[1],
        h * h * right[2],
    ];
    let dot = |w: &[f64; 6]| w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
    [dot(&b), dot(&db) / h, dot(&ddb) / (h * h)]
}
