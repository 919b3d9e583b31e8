//! Restarted GMRES with right preconditioning for matrix-free operators.

#[derive(Clone, Copy, Debug)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
}

#[derive(Clone, Debug)]
pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` from `x = 0`, with `A` applied by `apply` and the right
/// preconditioner by `precond`.
pub fn gmres<A, P>(apply: A, precond: P, b: &[f64], opts: GmresOptions) -> GmresResult
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return GmresResult {
            x,
            iterations: 0,
            rel_residual: 0.0,
        };
    }
    let m = opts.restart.max(1);
    let mut total = 0;
    let mut r = b.to_vec();
    let mut rel = 1.0;
    while total < opts.max_iter {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.rel_tol {
            break;
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < opts.max_iter {
            let zk = precond(&v[k]);
            let mut w = apply(&zk);
            z.push(zk);
            // Modified Gram-Schmidt, applied twice for stability.
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    h[i][k] += c;
                    w.iter_mut().zip(vi).for_each(|(a, b)| *a -= c * b);
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = if d == 0.0 { 1.0 } else { h[k][k] / d };
            sn[k] = if d == 0.0 { 0.0 } else { h[k + 1][k] / d };
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            rel = g[k].abs() / bnorm;
            if rel <= opts.rel_tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.iter_mut().zip(zi).for_each(|(a, b)| *a += yi * b);
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        rel = norm(&r) / bnorm;
        if rel <= opts.rel_tol {
            break;
        }
    }
    GmresResult {
        x,
        iterations: total,
        rel_residual: rel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let a = [[4.0, 1.0, 0.0], [2.0, 5.0, 1.0], [0.0, -1.0, 3.0]];
        let apply = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect();
        let b = [1.0, 2.0, 3.0];
        let res = gmres(
            apply,
            |x: &[f64]| x.to_vec(),
            &b,
            GmresOptions {
                restart: 2,
                max_iter: 50,
                rel_tol: 1e-13,
            },
        );
        let ax: Vec<f64> = apply(&res.x);
        for (l, r) in ax.iter().zip(&b) {
            assert!((l - r).abs() < 1e-12);
        }
    }
}
