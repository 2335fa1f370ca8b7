//! Small descriptive-statistics helpers shared across modules.

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divides by N).
pub fn pop_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Percentile with linear interpolation between order statistics, `q` in [0, 100].
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = (q.clamp(0.0, 100.0) / 100.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 50.0)
}

/// Three-point running median; the end points are kept as they are.
pub fn median3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return values.to_vec();
    }
    let mut out = values.to_vec();
    for i in 1..n - 1 {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        out[i] = a.max(b).min(a.min(b).max(c));
    }
    out
}

/// Three-point running median applied separately inside each run of valid
/// frames. At the ends of a run the window is shifted inward, so a run edge
/// takes the median of itself and its two inner neighbours. Runs shorter
/// than three frames are marked invalid. Invalid frames are set to zero.
pub fn median3_runs(values: &[f64], valid: &[bool]) -> (Vec<f64>, Vec<bool>) {
    let n = values.len();
    let mut out = vec![0.0; n];
    let mut keep = vec![false; n];
    let mut i = 0;
    while i < n {
        if !valid[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && valid[i] {
            i += 1;
        }
        if i - start < 3 {
            continue;
        }
        for t in start..i {
            let c = t.clamp(start + 1, i - 2);
            let (a, b, d) = (values[c - 1], values[c], values[c + 1]);
            out[t] = a.max(b).min(a.min(b).max(d));
            keep[t] = true;
        }
    }
    (out, keep)
}

/// Three-point moving average restricted to frames where `valid` is set.
/// Invalid frames stay at their original value.
pub fn masked_moving_average3(values: &[f64], valid: &[bool]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if !valid[i] {
                return values[i];
            }
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            let (sum, count) = (lo..=hi)
                .filter(|&j| valid[j])
                .fold((0.0, 0usize), |(s, c), j| (s + values[j], c + 1));
            sum / count as f64
        })
        .collect()
}

/// Ordinary least squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
