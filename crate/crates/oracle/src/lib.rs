//! Slow, obviously-correct reference implementations.
//!
//! Everything here works on plain slices and shares no code with `tps-core`,
//! so agreement between the two is evidence rather than tautology. Series
//! are `[B, T, C]` row-major; patch tensors are `[B, N, C, p]`.

/// Sample variance via the two-pass formula with denominator `n − 1`.
pub fn variance_two_pass(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Indices of the `k` smallest scores, found by repeatedly taking the
/// lexicographically smallest unused `(score, index)`.
pub fn lowest_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut used = vec![false; scores.len()];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..scores.len() {
            if used[i] {
                continue;
            }
            best = match best {
                Some(j) if scores[j] <= scores[i] => Some(j),
                _ => Some(i),
            };
        }
        let i = best.expect("k <= len");
        used[i] = true;
        out.push(i);
    }
    out
}

/// Number of patches, or `None` when `p > T` or either is zero.
pub fn num_patches(time: usize, p: usize, s: usize) -> Option<usize> {
    if p == 0 || s == 0 || p > time {
        return None;
    }
    let mut n = 0;
    let mut start = 0;
    while start + p <= time {
        n += 1;
        start += s;
    }
    Some(n)
}

/// `K_τ` by checking every window against every index.
pub fn coverage(time: usize, p: usize, s: usize) -> Vec<usize> {
    let n = num_patches(time, p, s).unwrap_or(0);
    let mut counts = vec![0; time];
    for (tau, count) in counts.iter_mut().enumerate() {
        for i in 0..n {
            if i * s <= tau && tau < i * s + p {
                *count += 1;
            }
        }
    }
    counts
}

pub fn unfold(x: &[f64], b: usize, t: usize, c: usize, p: usize, s: usize) -> Vec<f64> {
    let n = num_patches(t, p, s).expect("valid geometry");
    let mut out = vec![0.0; b * n * c * p];
    for bi in 0..b {
        for i in 0..n {
            for ci in 0..c {
                for j in 0..p {
                    out[((bi * n + i) * c + ci) * p + j] = x[(bi * t + i * s + j) * c + ci];
                }
            }
        }
    }
    out
}

/// Overlap average per index; uncovered indices come from `passthrough`.
pub fn reconstruct(
    patches: &[f64],
    b: usize,
    t: usize,
    c: usize,
    p: usize,
    s: usize,
    passthrough: &[f64],
) -> Vec<f64> {
    let n = num_patches(t, p, s).expect("valid geometry");
    let mut out = vec![0.0; b * t * c];
    for bi in 0..b {
        for tau in 0..t {
            for ci in 0..c {
                let mut sum = 0.0;
                let mut k = 0;
                for i in 0..n {
                    if i * s <= tau && tau < i * s + p {
                        sum += patches[((bi * n + i) * c + ci) * p + (tau - i * s)];
                        k += 1;
                    }
                }
                let at = (bi * t + tau) * c + ci;
                out[at] = if k == 0 { passthrough[at] } else { sum / k as f64 };
            }
        }
    }
    out
}

/// Whole-series TPS with caller-supplied permutations, one per element:
/// slot `selected[k]` receives the patch from `selected[perms[b][k]]`.
#[allow(clippy::too_many_arguments)]
pub fn tps(
    x: &[f64],
    b: usize,
    t: usize,
    c: usize,
    p: usize,
    s: usize,
    alpha: f64,
    perms: &[Vec<usize>],
) -> Vec<f64> {
    let n = num_patches(t, p, s).expect("valid geometry");
    let count = (alpha * n as f64).floor() as usize;
    let patches = unfold(x, b, t, c, p, s);
    let size = c * p;
    let mut shuffled = patches.clone();
    for bi in 0..b {
        let scores: Vec<f64> = (0..n)
            .map(|i| {
                let at = (bi * n + i) * size;
                variance_two_pass(&patches[at..at + size])
            })
            .collect();
        let selected = lowest_k(&scores, count);
        if count > 1 {
            for k in 0..count {
                let to = (bi * n + selected[k]) * size;
                let from = (bi * n + selected[perms[bi][k]]) * size;
                shuffled[to..to + size].copy_from_slice(&patches[from..from + size]);
            }
        }
    }
    reconstruct(&shuffled, b, t, c, p, s, x)
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s / a.len() as f64
}

pub fn mae(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).abs();
    }
    s / a.len() as f64
}

/// Level-averaged check loss, written out case by case.
pub fn pinball(y: &[f64], quantiles: &[Vec<f64>], levels: &[f64]) -> f64 {
    let mut total = 0.0;
    for (q, &tau) in quantiles.iter().zip(levels) {
        let mut s = 0.0;
        for i in 0..y.len() {
            s += if y[i] >= q[i] {
                tau * (y[i] - q[i])
            } else {
                (1.0 - tau) * (q[i] - y[i])
            };
        }
        total += s / y.len() as f64;
    }
    total / levels.len() as f64
}

/// `(coverage, width)` of the closed interval `[lo, hi]`.
pub fn interval(y: &[f64], lo: &[f64], hi: &[f64]) -> (f64, f64) {
    let mut inside = 0;
    let mut width = 0.0;
    for i in 0..y.len() {
        if y[i] >= lo[i] && y[i] <= hi[i] {
            inside += 1;
        }
        width += hi[i] - lo[i];
    }
    (inside as f64 / y.len() as f64, width / y.len() as f64)
}

fn ecdf(sample: &[f64], x: f64) -> f64 {
    sample.iter().filter(|&&v| v <= x).count() as f64 / sample.len() as f64
}

/// KS by evaluating both ECDFs at every sample point, O(n²).
pub fn ks(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max)
}

/// Left-continuous quantile function `inf { x : F(x) ≥ u }`.
fn quantile(sample: &[f64], u: f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    // smallest k with k/n >= u, 1-based
    let mut k = 1;
    while (k as f64) < u * n as f64 && k < n {
        k += 1;
    }
    v[k - 1]
}

/// `∫₀¹ |F_a⁻¹(u) − F_b⁻¹(u)| du`, exact: both quantile functions are
/// constant between consecutive breakpoints `{i/n} ∪ {j/m}`.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut cuts: Vec<(usize, usize)> = (0..=n).map(|i| (i, n)).chain((0..=m).map(|j| (j, m))).collect();
    // compare fractions exactly by cross-multiplication
    cuts.sort_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
    cuts.dedup_by(|x, y| x.0 * y.1 == y.0 * x.1);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0].0 as f64 / w[0].1 as f64, w[1].0 as f64 / w[1].1 as f64);
        let mid = 0.5 * (lo + hi);
        total += (hi - lo) * (quantile(a, mid) - quantile(b, mid)).abs();
    }
    total
}

/// DTW by depth-first enumeration of every monotone alignment path from
/// `(0, 0)` to `(n−1, m−1)`. Branches whose partial cost already reaches the
/// best complete path are cut, which never changes the minimum.
pub fn dtw_exhaustive(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if acc >= *best {
            return;
        }
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = acc;
            return;
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

/// Number of monotone alignment paths for lengths `n × m` (Delannoy).
pub fn count_paths(n: usize, m: usize) -> u64 {
    fn go(i: usize, j: usize) -> u64 {
        if i == 0 || j == 0 {
            return 1;
        }
        go(i - 1, j) + go(i, j - 1) + go(i - 1, j - 1)
    }
    go(n - 1, m - 1)
}

/// Every sequence of length `1..=max_len` over `alphabet`.
pub fn all_sequences(alphabet: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&v| {
                    let mut next = s.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
