//! Small derivative-free and finite-difference search kernels shared by the
//! norm solvers and the constant estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// splitmix64 finalizer, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: &[u64]) -> ChaCha8Rng {
    let s = stream.iter().fold(mix(seed), |acc, &t| mix(acc ^ mix(t)));
    ChaCha8Rng::seed_from_u64(s)
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rescale onto the Euclidean unit sphere; returns false for the zero vector.
pub fn normalize(v: &mut [f64]) -> bool {
    let n = norm2(v);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// Larger is better; NaN ranks below everything.
pub fn better(candidate: f64, incumbent: f64) -> bool {
    !candidate.is_nan() && (incumbent.is_nan() || candidate > incumbent)
}

/// Pick the best `(value, payload)` by value, ties resolved by position, so
/// the result does not depend on how the list was produced.
pub fn argmax<T>(items: Vec<(f64, T)>) -> Option<(f64, T)> {
    let mut best: Option<(f64, T)> = None;
    for (v, t) in items {
        match &best {
            Some((bv, _)) if !better(v, *bv) => {}
            _ => best = Some((v, t)),
        }
    }
    best
}

pub fn argmin<T>(items: Vec<(f64, T)>) -> Option<(f64, T)> {
    argmax(items.into_iter().map(|(v, t)| (-v, t)).collect()).map(|(v, t)| (-v, t))
}

/// Settings for [`pattern_search_box`].
#[derive(Debug, Clone, Copy)]
pub struct PatternOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evals: usize,
    /// Random directions tried in addition to the coordinate axes.
    pub random_directions: usize,
}

impl Default for PatternOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            min_step: 1e-10,
            max_evals: 4000,
            random_directions: 2,
        }
    }
}

/// Minimize `obj` over the box `[0, 1]^d` by an opportunistic compass search
/// augmented with random directions.
pub fn pattern_search_box<F, R>(obj: &F, x0: Vec<f64>, opts: PatternOptions, rng: &mut R) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    R: Rng,
{
    let d = x0.len();
    let mut x = x0;
    let mut fx = obj(&x);
    let mut evals = 1usize;
    let mut step = opts.initial_step;
    let mut y = vec![0.0; d];
    while step > opts.min_step && evals < opts.max_evals {
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(2 * d + 2 * opts.random_directions);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            dirs.push(e.clone());
            e[i] = -1.0;
            dirs.push(e);
        }
        for _ in 0..opts.random_directions {
            let mut g = gaussian_vec(rng, d);
            if normalize(&mut g) {
                dirs.push(g.iter().map(|v| -v).collect());
                dirs.push(g);
            }
        }
        let mut improved = false;
        for dir in &dirs {
            let mut moved = false;
            for i in 0..d {
                y[i] = (x[i] + step * dir[i]).clamp(0.0, 1.0);
                moved |= y[i] != x[i];
            }
            if !moved {
                continue;
            }
            let fy = obj(&y);
            evals += 1;
            if fy < fx {
                x.copy_from_slice(&y);
                fx = fy;
                improved = true;
                break;
            }
        }
        if improved {
            step = (step * 2.0).min(opts.initial_step);
        } else {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Golden-section minimization of `g` on `[a, b]`, endpoints included.
pub(crate) fn golden_section<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (ga, gb) = (g(a), g(b));
    let mut best = if gb < ga { (b, gb) } else { (a, ga) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-15 * (1.0 + a.abs().max(b.abs())) {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    for (s, v) in [(c, gc), (d, gd)] {
        if v < best.1 {
            best = (s, v);
        }
    }
    best
}

/// Exact line searches on `[0, 1]^d` along the coordinate axes and random
/// directions, repeated until a full round brings no decrease. Intended as
/// a final polish for convex objectives, where pattern search can stall on
/// a ridge.
pub fn line_polish_box<F, R>(obj: &F, x0: Vec<f64>, rounds: usize, random_directions: usize, rng: &mut R) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    R: Rng,
{
    let d = x0.len();
    let mut x = x0;
    let mut fx = obj(&x);
    let mut y = vec![0.0; d];
    for _ in 0..rounds {
        let start = fx;
        let mut dirs: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        for _ in 0..random_directions {
            let mut g = gaussian_vec(rng, d);
            if normalize(&mut g) {
                dirs.push(g);
            }
        }
        for dir in &dirs {
            // Step interval keeping the free coordinates in the box; those
            // already on a face are clamped, which projects the direction.
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for i in 0..d {
                if x[i] <= 0.0 || x[i] >= 1.0 {
                    continue;
                }
                if dir[i] > 0.0 {
                    lo = lo.max(-x[i] / dir[i]);
                    hi = hi.min((1.0 - x[i]) / dir[i]);
                } else if dir[i] < 0.0 {
                    lo = lo.max((1.0 - x[i]) / dir[i]);
                    hi = hi.min(-x[i] / dir[i]);
                }
            }
            let reach = (d as f64).sqrt();
            let (lo, hi) = (lo.max(-reach), hi.min(reach));
            if !(hi > lo) {
                continue;
            }
            let along = |s: f64| {
                let mut p = vec![0.0; d];
                for i in 0..d {
                    p[i] = (x[i] + s * dir[i]).clamp(0.0, 1.0);
                }
                obj(&p)
            };
            let (s, v) = golden_section(&along, lo, hi);
            if v < fx {
                for i in 0..d {
                    y[i] = (x[i] + s * dir[i]).clamp(0.0, 1.0);
                }
                x.copy_from_slice(&y);
                fx = v;
            }
        }
        if !(fx < start) {
            break;
        }
    }
    (x, fx)
}

/// Projected subgradient descent on `[0, 1]^d` for convex objectives, with
/// central-difference subgradients and a diminishing step. Returns the best
/// iterate seen.
pub fn projected_subgradient_box<F>(obj: &F, x0: Vec<f64>, iters: usize, step0: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let mut x = x0;
    let mut best_x = x.clone();
    let mut best = obj(&x);
    let h = 1e-7;
    let mut probe = x.clone();
    for j in 1..=iters {
        let mut g = vec![0.0; d];
        for i in 0..d {
            let lo = (x[i] - h).max(0.0);
            let hi = (x[i] + h).min(1.0);
            if hi <= lo {
                continue;
            }
            probe.copy_from_slice(&x);
            probe[i] = hi;
            let fp = obj(&probe);
            probe[i] = lo;
            let fm = obj(&probe);
            g[i] = (fp - fm) / (hi - lo);
        }
        let gn = norm2(&g);
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let step = step0 / (j as f64).sqrt();
        for i in 0..d {
            x[i] = (x[i] - step * g[i] / gn).clamp(0.0, 1.0);
        }
        let fx = obj(&x);
        if fx < best {
            best = fx;
            best_x.copy_from_slice(&x);
        }
    }
    (best_x, best)
}

/// Settings for the ascent kernels.
#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_iters: usize,
    pub fd_step: f64,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            fd_step: 1e-5,
            initial_step: 0.2,
            min_step: 1e-10,
        }
    }
}

/// Maximize a scale-invariant objective on the Euclidean unit sphere by
/// projected gradient ascent with central-difference gradients and an
/// adaptive step.
pub fn sphere_ascent<F>(obj: &F, x0: Vec<f64>, opts: AscentOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let mut x = x0;
    if !normalize(&mut x) {
        return (x.clone(), obj(&x));
    }
    let mut fx = obj(&x);
    let mut eta = opts.initial_step;
    let mut probe = x.clone();
    let mut y = vec![0.0; d];
    for _ in 0..opts.max_iters {
        if eta < opts.min_step || !fx.is_finite() {
            break;
        }
        let mut g = vec![0.0; d];
        for i in 0..d {
            probe.copy_from_slice(&x);
            probe[i] += opts.fd_step;
            let fp = obj(&probe);
            probe[i] -= 2.0 * opts.fd_step;
            let fm = obj(&probe);
            g[i] = (fp - fm) / (2.0 * opts.fd_step);
        }
        let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(&x).for_each(|(gi, xi)| *gi -= radial * xi);
        let gn = norm2(&g);
        if gn < 1e-14 || !gn.is_finite() {
            break;
        }
        loop {
            for i in 0..d {
                y[i] = x[i] + eta * g[i] / gn;
            }
            normalize(&mut y);
            let fy = obj(&y);
            if better(fy, fx) {
                x.copy_from_slice(&y);
                fx = fy;
                eta *= 1.5;
                break;
            }
            eta *= 0.5;
            if eta < opts.min_step {
                break;
            }
        }
    }
    (x, fx)
}

/// Maximize over a product of probability simplices. `w` is `rows × cols`
/// in row-major order and every column is a point of the simplex.
pub fn simplex_columns_ascent<F>(obj: &F, w0: Vec<f64>, rows: usize, cols: usize, opts: AscentOptions) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let d = rows * cols;
    let mut w = w0;
    let mut fw = obj(&w);
    let mut eta = opts.initial_step;
    let mut probe = w.clone();
    let mut y = vec![0.0; d];
    let mut col = vec![0.0; rows];
    for _ in 0..opts.max_iters {
        if eta < opts.min_step || !fw.is_finite() {
            break;
        }
        let mut g = vec![0.0; d];
        for i in 0..d {
            probe.copy_from_slice(&w);
            probe[i] = (w[i] + opts.fd_step).min(1.0);
            let fp = obj(&probe);
            probe[i] = (w[i] - opts.fd_step).max(0.0);
            let fm = obj(&probe);
            let width = (w[i] + opts.fd_step).min(1.0) - (w[i] - opts.fd_step).max(0.0);
            g[i] = (fp - fm) / width;
        }
        for c in 0..cols {
            let mean = (0..rows).map(|r| g[r * cols + c]).sum::<f64>() / rows as f64;
            (0..rows).for_each(|r| g[r * cols + c] -= mean);
        }
        let gn = norm2(&g);
        if gn < 1e-14 || !gn.is_finite() {
            break;
        }
        loop {
            for c in 0..cols {
                for r in 0..rows {
                    col[r] = w[r * cols + c] + eta * g[r * cols + c] / gn;
                }
                project_simplex(&mut col);
                for r in 0..rows {
                    y[r * cols + c] = col[r];
                }
            }
            let fy = obj(&y);
            if better(fy, fw) {
                w.copy_from_slice(&y);
                fw = fy;
                eta *= 1.5;
                break;
            }
            eta *= 0.5;
            if eta < opts.min_step {
                break;
            }
        }
    }
    (w, fw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection() {
        let mut v = vec![0.5, 0.5];
        project_simplex(&mut v);
        assert_eq!(v, vec![0.5, 0.5]);
        let mut v = vec![2.0, 0.0, 0.0];
        project_simplex(&mut v);
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
        let mut v = vec![0.3, 0.3, 0.6];
        project_simplex(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn pattern_search_finds_box_minimum() {
        let obj = |x: &[f64]| (x[0] - 0.3).abs() + (x[1] - 0.8).powi(2);
        let mut rng = stream_rng(1, &[]);
        let (x, fx) = pattern_search_box(&obj, vec![0.5, 0.5], PatternOptions::default(), &mut rng);
        assert!(fx < 1e-8, "{x:?} {fx}");
    }

    #[test]
    fn subgradient_descends_convex_kinks() {
        let obj = |x: &[f64]| (x[0] - 0.25).abs().max((x[1] - 0.75).abs());
        let (_, fx) = projected_subgradient_box(&obj, vec![0.9, 0.2], 2000, 0.5);
        assert!(fx < 5e-2, "{fx}");
    }

    #[test]
    fn sphere_ascent_finds_dominant_axis() {
        // Rayleigh quotient of diag(1, 3).
        let obj = |x: &[f64]| (x[0] * x[0] + 3.0 * x[1] * x[1]) / (x[0] * x[0] + x[1] * x[1]);
        let (_, fx) = sphere_ascent(&obj, vec![1.0, 0.1], AscentOptions::default());
        assert!((fx - 3.0).abs() < 1e-8);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: f64 = stream_rng(7, &[1, 2]).random();
        let b: f64 = stream_rng(7, &[1, 2]).random();
        let c: f64 = stream_rng(7, &[2, 1]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
