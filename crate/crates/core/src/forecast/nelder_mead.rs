//! Box-constrained Nelder–Mead simplex search.

/// Standard reflection/expansion/contraction/shrink coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub lower: f64,
    pub upper: f64,
    /// Initial simplex edge length along each axis.
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the spread of objective values across the simplex is below this.
    pub f_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            lower: 1e-4,
            upper: 0.9999,
            step: 0.1,
            max_iter: 2000,
            f_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
}

fn project<const N: usize>(mut x: [f64; N], opts: &Options) -> [f64; N] {
    for v in &mut x {
        *v = v.clamp(opts.lower, opts.upper);
    }
    x
}

fn affine<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    // a + t (b - a)
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = a[i] + t * (b[i] - a[i]);
    }
    out
}

/// Minimizes `f` over the box `[lower, upper]^N` starting from `x0`.
/// Every candidate is projected onto the box before evaluation, and
/// non-finite objective values are treated as `+inf`.
pub fn minimize<const N: usize, F>(f: F, x0: [f64; N], opts: Options) -> Minimum<N>
where
    F: Fn(&[f64; N]) -> f64,
{
    let eval = |x: &[f64; N]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let x0 = project(x0, &opts);
    simplex.push((x0, eval(&x0)));
    for i in 0..N {
        let mut x = x0;
        x[i] += if x[i] + opts.step <= opts.upper {
            opts.step
        } else {
            -opts.step
        };
        let x = project(x, &opts);
        simplex.push((x, eval(&x)));
    }

    let mut iterations = 0;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[N].1;
        if worst.is_finite() && (worst - best).abs() <= opts.f_tol * (1.0 + best.abs()) {
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let worst_x = simplex[N].0;

        let reflected = project(affine(&centroid, &worst_x, -REFLECT), &opts);
        let fr = eval(&reflected);

        if fr < simplex[0].1 {
            let expanded = project(affine(&centroid, &worst_x, -EXPAND), &opts);
            let fe = eval(&expanded);
            simplex[N] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
        } else {
            let (toward, ft) = if fr < simplex[N].1 {
                (reflected, fr)
            } else {
                (worst_x, simplex[N].1)
            };
            let contracted = project(affine(&centroid, &toward, CONTRACT), &opts);
            let fc = eval(&contracted);
            if fc < ft {
                simplex[N] = (contracted, fc);
            } else {
                let best_x = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    let x = project(affine(&best_x, &entry.0, SHRINK), &opts);
                    *entry = (x, eval(&x));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Minimum {
        x: simplex[0].0,
        value: simplex[0].1,
        iterations,
    }
}
