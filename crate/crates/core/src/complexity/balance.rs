//! Class balance measures: C1, C2.

pub(super) fn compute(counts: [usize; 2]) -> [f64; 2] {
    let n = (counts[0] + counts[1]) as f64;
    let entropy: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum();
    let c1 = (1.0 - entropy / 2f64.ln()).clamp(0.0, 1.0);
    let (a, b) = (counts[0] as f64, counts[1] as f64);
    let ir = 0.5 * (a / b + b / a);
    let c2 = (1.0 - 1.0 / ir).clamp(0.0, 1.0);
    [c1, c2]
}
