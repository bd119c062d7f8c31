//! Small numerical building blocks: range-aware finite differences,
//! adaptive quadrature, bracketed root finding and a Nelder-Mead simplex.

/// Derivative of `f` at `x` by finite differences, respecting the open
/// interval `(lo, hi)`.
///
/// The interior uses a fourth-order five-point stencil: its truncation term
/// is negligible at the chosen step while the step is still large enough
/// that roundoff noise survives later division by small probability masses.
/// Near a boundary the step shrinks well below the remaining room, since a
/// boundary usually marks where `f` steepens; if no symmetric step fits at
/// all, a second-order one-sided stencil pointing into the interior is used.
pub fn diff_in_range(f: impl Fn(f64) -> f64, x: f64, lo: f64, hi: f64) -> f64 {
    let base = 1e-4 * x.abs().max(1.0);
    let room_lo = x - lo;
    let room_hi = hi - x;
    if room_lo >= 2.0 * base && room_hi >= 2.0 * base {
        let h = base;
        return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h))
            / (12.0 * h);
    }
    let room = room_lo.min(room_hi);
    let h = base.min(0.05 * room);
    if h > 1e-13 * x.abs().max(1.0) {
        return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h))
            / (12.0 * h);
    }
    // pinned against one boundary: one-sided stencil away from it
    if room_hi > room_lo {
        let h = base.min(0.01 * room_hi);
        (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    } else {
        let h = base.min(0.01 * room_lo);
        (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    }
}

/// Plain central difference with a fixed step.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Like [`diff_in_range`] but for a function returning a pair, differencing
/// both components from the same evaluations.
pub fn paired_diff_in_range(
    f: impl Fn(f64) -> (f64, f64),
    x: f64,
    lo: f64,
    hi: f64,
) -> (f64, f64) {
    let base = 1e-4 * x.abs().max(1.0);
    let room_lo = x - lo;
    let room_hi = hi - x;
    let central4 = |h: f64| {
        let (p2a, p2b) = f(x + 2.0 * h);
        let (p1a, p1b) = f(x + h);
        let (m1a, m1b) = f(x - h);
        let (m2a, m2b) = f(x - 2.0 * h);
        (
            (-p2a + 8.0 * p1a - 8.0 * m1a + m2a) / (12.0 * h),
            (-p2b + 8.0 * p1b - 8.0 * m1b + m2b) / (12.0 * h),
        )
    };
    if room_lo >= 2.0 * base && room_hi >= 2.0 * base {
        return central4(base);
    }
    let room = room_lo.min(room_hi);
    let h = base.min(0.05 * room);
    if h > 1e-13 * x.abs().max(1.0) {
        return central4(h);
    }
    if room_hi > room_lo {
        let h = base.min(0.01 * room_hi);
        let (f0a, f0b) = f(x);
        let (f1a, f1b) = f(x + h);
        let (f2a, f2b) = f(x + 2.0 * h);
        (
            (-3.0 * f0a + 4.0 * f1a - f2a) / (2.0 * h),
            (-3.0 * f0b + 4.0 * f1b - f2b) / (2.0 * h),
        )
    } else {
        let h = base.min(0.01 * room_lo);
        let (f0a, f0b) = f(x);
        let (f1a, f1b) = f(x - h);
        let (f2a, f2b) = f(x - 2.0 * h);
        (
            (3.0 * f0a - 4.0 * f1a + f2a) / (2.0 * h),
            (3.0 * f0b - 4.0 * f1b + f2b) / (2.0 * h),
        )
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` (b may be below a).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Smallest `v` in `(lo, hi)` with `f(v) >= target` for nondecreasing `f`,
/// found by bisection to absolute tolerance `tol`.
pub fn bisect_nondecreasing(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    target: f64,
    tol: f64,
) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimise `f` with a deterministic Nelder-Mead simplex.
///
/// Good enough for the 1-3 dimensional intercept-only likelihood fits used
/// for offsets; starts from `x0` with per-coordinate spread `scale`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], scale: f64, max_iter: usize) -> Vec<f64> {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += scale;
        let v = f(&p);
        simplex.push((p, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= 1e-12 * (1.0 + best.abs()) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in simplex.iter().take(n) {
            for j in 0..n {
                centroid[j] += p[j] / n as f64;
            }
        }
        let refl: Vec<f64> = (0..n)
            .map(|j| centroid[j] + alpha * (centroid[j] - simplex[n].0[j]))
            .collect();
        let f_refl = f(&refl);
        if f_refl < simplex[0].1 {
            let exp: Vec<f64> = (0..n)
                .map(|j| centroid[j] + gamma * (refl[j] - centroid[j]))
                .collect();
            let f_exp = f(&exp);
            simplex[n] = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
        } else if f_refl < simplex[n - 1].1 {
            simplex[n] = (refl, f_refl);
        } else {
            let contr: Vec<f64> = (0..n)
                .map(|j| centroid[j] + rho * (simplex[n].0[j] - centroid[j]))
                .collect();
            let f_contr = f(&contr);
            if f_contr < simplex[n].1 {
                simplex[n] = (contr, f_contr);
            } else {
                let best_pt = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        item.0[j] = best_pt[j] + sigma * (item.0[j] - best_pt[j]);
                    }
                    item.1 = f(&item.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex[0].0.clone()
}
