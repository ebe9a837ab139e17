//! Independent reference computations shared by the integration tests.
//! Nothing here calls the library's own formulas.

#![allow(dead_code)]

/// Event probabilities of one excursion away from the special vertex of a
/// triangle, by exhaustive path enumeration. The two other vertices carry
/// weights `w = [u, v]`, the special vertex weight `a` stays frozen.
///
/// Returns `P(start at `start`, last vertex before return is `last`,
/// exactly `m` visits to `start`)`.
pub fn enumerate_event(u: u64, v: u64, a: u64, m: u64, start: usize, last: usize) -> f64 {
    let w = [u as f64, v as f64];
    let first = w[start] / (w[0] + w[1]);
    let mut weights = w;
    weights[start] += 1.0;
    let mut visits = [0u64; 2];
    visits[start] = 1;
    first * walk_from(start, weights, visits, a as f64, m, start, last)
}

fn walk_from(pos: usize, w: [f64; 2], visits: [u64; 2], a: f64, m: u64, start: usize, last: usize) -> f64 {
    if visits[start] > m {
        return 0.0;
    }
    let other = 1 - pos;
    let denom = a + w[other];
    let mut total = 0.0;
    if pos == last && visits[start] == m {
        total += a / denom;
    }
    let mut w2 = w;
    w2[other] += 1.0;
    let mut v2 = visits;
    v2[other] += 1;
    total + w[other] / denom * walk_from(other, w2, v2, a, m, start, last)
}

/// `P(excursion starts at vertex 1 and visits it at least m times)`,
/// as the start probability minus the enumerated shorter excursions.
pub fn enumerate_tail(u: u64, v: u64, a: u64, m: u64) -> f64 {
    let mut p = u as f64 / (u + v) as f64;
    for k in 1..m {
        p -= enumerate_event(u, v, a, k, 0, 0) + enumerate_event(u, v, a, k, 0, 1);
    }
    p
}

/// `n choose k` in exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Exact binomial probability mass summed over `range`.
pub fn binomial_mass(n: u64, p: f64, range: std::ops::RangeInclusive<u64>) -> f64 {
    range.map(|j| binomial(n, j) as f64 * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)).sum()
}

/// Relative entropy written out directly.
pub fn relative_entropy(a: f64, p: f64) -> f64 {
    a * (a / p).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - p)).ln()
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Log-spaced integer sample points in `[lo, hi]`.
pub fn log_points(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let (l, h) = ((lo as f64).ln(), (hi as f64).ln());
    let mut pts: Vec<u64> =
        (0..count).map(|i| (l + (h - l) * i as f64 / (count - 1) as f64).exp().round() as u64).collect();
    pts.dedup();
    pts
}

/// Median (lower) of a sample, sorted here.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// OLS slope of `ln y` against `ln x`, written out directly.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
