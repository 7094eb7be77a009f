//! Quadrature rules: composite Gauss-Legendre on split intervals and a
//! fourth-order cumulative rule for uniformly sampled data.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Composite 8-point Gauss-Legendre over `[a, b]`, split at every point of
/// `breaks` inside the interval and further into panels no wider than
/// `max_panel`. The integrand is vector valued with `width` components.
pub fn integrate_vec<F>(a: f64, b: f64, breaks: &[f64], max_panel: f64, width: usize, mut f: F) -> Vec<f64>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut out = vec![0.0; width];
    if !(b > a) {
        return out;
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (nodes, weights) = gl8();
    let mut buf = vec![0.0; width];
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let panels = ((len / max_panel).ceil() as usize).max(1);
        let h = len / panels as f64;
        for p in 0..panels {
            let c = lo + (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(weights) {
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(c + 0.5 * h * x, &mut buf);
                for (o, v) in out.iter_mut().zip(&buf) {
                    *o += 0.5 * h * w * v;
                }
            }
        }
    }
    out
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(a: f64, b: f64, breaks: &[f64], max_panel: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(a, b, breaks, max_panel, 1, |x, out| out[0] = f(x))[0]
}

/// Integral over the cell `[x_k, x_{k+1}]` of the four-point cubic through
/// `f_{k-1}, f_k, f_{k+1}, f_{k+2}`; fourth-order accurate.
#[inline]
pub fn cubic_cell_integral(h: f64, fm1: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    h / 24.0 * (-fm1 + 13.0 * f0 + 13.0 * f1 - f2)
}

/// Cumulative integral `F_k = ∫_{x_0}^{x_k} f` of uniformly spaced samples
/// with the fourth-order cell rule. The first and last cells use the
/// one-sided cubic through four interior samples.
pub fn cumulative_fourth_order(h: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for k in 1..n {
            out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
        }
        return out;
    }
    for k in 0..n - 1 {
        let cell = if k == 0 {
            // cubic through f0..f3 integrated over [x0, x1]
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if k == n - 2 {
            h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        } else {
            cubic_cell_integral(h, f[k - 1], f[k], f[k + 1], f[k + 2])
        };
        out[k + 1] = out[k] + cell;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 15 is exact
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn composite_handles_kinks() {
        let v = integrate(-1.0, 2.0, &[0.0], 0.5, |x| x.abs());
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn cumulative_rule_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|k| (k as f64 * h).exp()).collect();
            let c = cumulative_fourth_order(h, &f);
            (c[n - 1] - (2f64.exp() - 1.0)).abs()
        };
        let order = (err(41) / err(81)).log2();
        assert!(order > 3.7, "order {order}");
    }
}
