//! Limited-memory quasi-Newton minimization inside a box.
//!
//! Coordinates sitting on a bound whose gradient pushes outward are frozen
//! for the iteration; the two-loop recursion runs on the remaining free
//! coordinates and the step is projected back onto the box, with Armijo
//! backtracking along the projection arc.

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub memory: usize,
    pub max_iters: usize,
    /// Relative objective decrease below which the run stops.
    pub ftol: f64,
    /// Infinity norm of the projected gradient below which the run stops.
    pub pgtol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iters: 1000,
            ftol: 1e-12,
            pgtol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Minimizes `f` over `lo <= x <= hi`. `fg` returns the value and writes the
/// gradient; a non-finite value is treated as +inf.
pub fn minimize<F>(mut fg: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: Options) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x: Vec<f64> = (0..n).map(|i| x0[i].clamp(lo[i], hi[i])).collect();
    let mut g = vec![0.0; n];
    let mut evaluations = 1;
    let mut f = fg(&x, &mut g);
    if !f.is_finite() {
        return Minimum {
            x,
            f: f64::INFINITY,
            converged: false,
            evaluations,
        };
    }
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];

    for iter in 0..opts.max_iters {
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)))
            .collect();
        let pg = (0..n).filter(|&i| free[i]).map(|i| g[i].abs()).fold(0.0, f64::max);
        if pg <= opts.pgtol {
            return Minimum {
                x,
                f,
                converged: true,
                evaluations,
            };
        }

        let mut d = two_loop(&g, &free, &s_hist, &y_hist);
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            d = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
            slope = -d.iter().map(|v| v * v).sum::<f64>();
        }
        let mut t = if iter == 0 && s_hist.is_empty() {
            (1.0 / pg).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = (x[i] + t * d[i]).clamp(lo[i], hi[i]);
            }
            let decrease: f64 = (0..n).map(|i| (trial[i] - x[i]) * g[i]).sum();
            if !(decrease < 0.0) {
                t *= 0.5;
                continue;
            }
            evaluations += 1;
            let ft = fg(&trial, &mut g_trial);
            if ft.is_finite() && ft <= f + 1e-4 * decrease {
                accepted = Some(ft);
                break;
            }
            t *= 0.5;
        }
        let Some(f_new) = accepted else {
            if s_hist.is_empty() {
                // Stalled at floating-point resolution along steepest descent.
                return Minimum {
                    x,
                    f,
                    converged: true,
                    evaluations,
                };
            }
            s_hist.clear();
            y_hist.clear();
            continue;
        };

        let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_trial[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if sy > 1e-12 * yy && sy > 0.0 {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let rel = (f - f_new) / f.abs().max(f_new.abs()).max(1.0);
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_trial);
        f = f_new;
        if rel <= opts.ftol {
            return Minimum {
                x,
                f,
                converged: true,
                evaluations,
            };
        }
    }
    Minimum {
        x,
        f,
        converged: false,
        evaluations,
    }
}

fn two_loop(g: &[f64], free: &[bool], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let dot = |a: &[f64], b: &[f64]| -> f64 { (0..n).filter(|&i| free[i]).map(|i| a[i] * b[i]).sum() };
    let mut q: Vec<f64> = (0..n).map(|i| if free[i] { g[i] } else { 0.0 }).collect();
    let k = s_hist.len();
    let mut coef = vec![0.0; k];
    let mut rho = vec![0.0; k];
    for j in (0..k).rev() {
        let sy = dot(&s_hist[j], &y_hist[j]);
        rho[j] = if sy > 0.0 { 1.0 / sy } else { 0.0 };
        coef[j] = rho[j] * dot(&s_hist[j], &q);
        for i in 0..n {
            if free[i] {
                q[i] -= coef[j] * y_hist[j][i];
            }
        }
    }
    if k > 0 {
        let yy = dot(&y_hist[k - 1], &y_hist[k - 1]);
        let sy = dot(&s_hist[k - 1], &y_hist[k - 1]);
        if yy > 0.0 && sy > 0.0 {
            let gamma = sy / yy;
            q.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for j in 0..k {
        let b = rho[j] * dot(&y_hist[j], &q);
        for i in 0..n {
            if free[i] {
                q[i] += s_hist[j][i] * (coef[j] - b);
            }
        }
    }
    q.iter().map(|v| -v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn unconstrained_rosenbrock() {
        let m = minimize(rosenbrock, &[-1.2, 1.0], &[-5.0; 2], &[5.0; 2], Options::default());
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn active_bound_is_respected() {
        // Minimum of (x-3)^2 + (y+1)^2 on [0,2]x[0,2] is (2, 0).
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            g[1] = 2.0 * (x[1] + 1.0);
            (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2)
        };
        let m = minimize(f, &[1.0, 1.0], &[0.0; 2], &[2.0; 2], Options::default());
        assert_eq!(m.x, vec![2.0, 0.0]);
        assert!(m.converged);
    }
}
