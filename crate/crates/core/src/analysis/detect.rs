//! Detectors operating on a single sampled series.

use super::{CorrelationSeries, Crossing, DetectionOptions, FreezingInterval, Measure, SuddenChange};

/// Least-squares slope of `v` against `t`. Fewer than two points give 0.
pub fn least_squares_slope(t: &[f64], v: &[f64]) -> f64 {
    let n = t.len() as f64;
    if t.len() < 2 {
        return 0.0;
    }
    let tm = t.iter().sum::<f64>() / n;
    let vm = v.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, vi) in t.iter().zip(v) {
        num += (ti - tm) * (vi - vm);
        den += (ti - tm) * (ti - tm);
    }
    num / den
}

/// Slopes over `window` samples on each side of `i`, clipped to the series.
fn side_slopes(t: &[f64], v: &[f64], i: usize, window: usize) -> (f64, f64) {
    let lo = i.saturating_sub(window);
    let hi = (i + window).min(t.len() - 1);
    (
        least_squares_slope(&t[lo..=i], &v[lo..=i]),
        least_squares_slope(&t[i..=hi], &v[i..=hi]),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Relative floor on the local slope-jump scale, as a fraction of the
/// largest slope magnitude in the series.
const RELATIVE_SCALE_FLOOR: f64 = 1e-6;
/// A slope jump must change the value extrapolated across one window by
/// more than this to count.
const VALUE_RESOLUTION: f64 = 1e-9;

/// Kinks and optimizer branch switches of one measure.
///
/// A kink at sample `i` is a least-squares slope jump `|s_R - s_L|` that
/// exceeds `slope_jump_threshold` times the median jump over the surrounding
/// `8 * window + 1` samples, and is a local maximum of the jump profile.
/// Branch switches of the optimizer argument are merged in: a switch within
/// one sample of a kink marks that kink, otherwise it is reported on its own.
pub fn detect_sudden_changes(
    series: &CorrelationSeries,
    measure: Measure,
    options: &DetectionOptions,
) -> Vec<SuddenChange> {
    let Some(v) = series.values(measure) else {
        return Vec::new();
    };
    let t = series.times();
    let n = t.len();
    let w = options.window.max(1);
    let mut changes = Vec::new();

    if n > 2 * w {
        let mut jump = vec![0.0; n];
        let mut slopes = vec![(0.0, 0.0); n];
        let mut max_slope: f64 = 0.0;
        for i in w..n - w {
            let (l, r) = side_slopes(t, v, i, w);
            slopes[i] = (l, r);
            jump[i] = (r - l).abs();
            max_slope = max_slope.max(l.abs()).max(r.abs());
        }
        let reach = 4 * w;
        let floor = RELATIVE_SCALE_FLOOR * max_slope;
        let significant = |i: usize| {
            let lo = i.saturating_sub(reach).max(w);
            let hi = (i + reach).min(n - w - 1);
            let scale = median(jump[lo..=hi].to_vec()).max(floor);
            let dt = (t[i + w] - t[i - w]) / 2.0;
            jump[i] > options.slope_jump_threshold * scale && jump[i] * dt > VALUE_RESOLUTION
        };
        let mut i = w;
        while i < n - w {
            if !significant(i) {
                i += 1;
                continue;
            }
            let start = i;
            while i < n - w && significant(i) {
                i += 1;
            }
            let peak = (start..i)
                .max_by(|&a, &b| jump[a].total_cmp(&jump[b]).then(b.cmp(&a)))
                .unwrap_or(start);
            changes.push(SuddenChange {
                time: t[peak],
                index: peak,
                measure,
                left_slope: slopes[peak].0,
                right_slope: slopes[peak].1,
                branch_jump: false,
            });
        }
    }

    if let Some(theta) = measure.argument_source().and_then(|m| series.argument(m)) {
        for k in 0..n.saturating_sub(1) {
            let switched = (theta[k + 1] - theta[k]).abs() > options.branch_jump
                && v[k].min(v[k + 1]) > options.branch_value_floor;
            if !switched {
                continue;
            }
            if let Some(c) = changes.iter_mut().find(|c| c.index + 1 >= k && c.index <= k + 2) {
                c.branch_jump = true;
                continue;
            }
            let (l, r) = side_slopes(t, v, k, w);
            changes.push(SuddenChange {
                time: t[k],
                index: k,
                measure,
                left_slope: l,
                right_slope: r,
                branch_jump: true,
            });
        }
        changes.sort_by_key(|c| c.index);
    }
    changes
}

/// Maximal left-to-right intervals of duration at least `min_length` over
/// which `max - min < epsilon`.
pub fn detect_freezing(
    times: &[f64],
    values: &[f64],
    measure: Measure,
    epsilon: f64,
    min_length: f64,
) -> Vec<FreezingInterval> {
    let n = times.len().min(values.len());
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let (mut lo, mut hi) = (values[i], values[i]);
        let mut j = i;
        while j + 1 < n {
            let v = values[j + 1];
            if hi.max(v) - lo.min(v) >= epsilon {
                break;
            }
            lo = lo.min(v);
            hi = hi.max(v);
            j += 1;
        }
        if j > i && times[j] - times[i] >= min_length {
            let level = values[i..=j].iter().sum::<f64>() / (j - i + 1) as f64;
            out.push(FreezingInterval {
                t_start: times[i],
                t_end: times[j],
                measure,
                level,
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Times at which `a - b` changes sign, linearly interpolated.
pub fn crossings(series: &CorrelationSeries, a: Measure, b: Measure) -> Vec<Crossing> {
    let (Some(va), Some(vb)) = (series.values(a), series.values(b)) else {
        return Vec::new();
    };
    let t = series.times();
    let mut out = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    for i in 0..t.len() {
        let d = va[i] - vb[i];
        if d == 0.0 {
            continue;
        }
        if let Some((j, dj)) = last {
            if dj.signum() != d.signum() {
                let time = t[j] + (t[i] - t[j]) * dj / (dj - d);
                out.push(Crossing { time, pair: (a, b) });
            }
        }
        last = Some((i, d));
    }
    out
}
