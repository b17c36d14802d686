use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{binomial, Quartic};

/// A root and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl Root {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// Distinct roots of a quartic; multiplicities sum to four.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    entries: Vec<Root>,
}

impl RootSet {
    pub fn entries(&self) -> &[Root] {
        &self.entries
    }

    /// Number of distinct real roots.
    pub fn n_real(&self) -> usize {
        self.entries.iter().filter(|r| r.is_real()).count()
    }

    /// Distinct real roots ascending, with multiplicities.
    pub fn real_roots(&self) -> Vec<(f64, usize)> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .filter(|r| r.is_real())
            .map(|r| (r.value.re, r.multiplicity))
            .collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    }

    pub fn distinct_real(&self) -> Vec<f64> {
        self.real_roots().into_iter().map(|(x, _)| x).collect()
    }

    /// Coefficients `[c0..c4]` of `prod (x - root)^mult`.
    pub fn vieta(&self) -> [f64; 5] {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for root in &self.entries {
            for _ in 0..root.multiplicity {
                let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                for (i, ci) in c.iter().enumerate() {
                    next[i + 1] += ci;
                    next[i] -= ci * root.value;
                }
                c = next;
            }
        }
        let mut out = [0.0; 5];
        for (o, ci) in out.iter_mut().zip(&c) {
            *o = ci.re;
        }
        out
    }
}

/// `tol * (1 + max |c_i|)`: the absolute clustering and snapping radius used
/// for a quartic whose relative tolerance is `tol`.
pub fn default_cluster_tolerance(q: &Quartic<f64>, tol: f64) -> f64 {
    tol * (1.0 + q.max_abs_coeff())
}

/// All four roots of a monic quartic with multiplicities.
///
/// Companion-matrix eigenvalues give the initial estimates. A group of `m`
/// estimates is merged into one root of multiplicity `m` when its centroid
/// annihilates the first `m` Taylor coefficients of `q` to within `tol`
/// (relative to the size of those coefficients). The centroid of a perturbed
/// multiple root is far more accurate than any individual estimate, which is
/// what makes this test usable for triple and quadruple roots. Groups are
/// then polished by Newton iteration on the `(m-1)`-th derivative, and
/// centres whose imaginary part is below `tol * (1 + max |c_i|)` are snapped
/// onto the real axis.
pub fn solve_quartic(q: &Quartic<f64>, tol: f64) -> RootSet {
    let estimates = companion_eigenvalues(q);
    let partition = best_partition(q, &estimates, tol);
    let snap = default_cluster_tolerance(q, tol);

    let mut entries: Vec<Root> = partition
        .iter()
        .map(|block| {
            let m = block.len();
            let centre = block.iter().map(|&i| estimates[i]).sum::<Complex64>() / m as f64;
            let mut value = polish(q, centre, m);
            if value.im.abs() <= snap {
                value.im = 0.0;
            }
            Root { value, multiplicity: m }
        })
        .collect();
    enforce_conjugates(&mut entries);
    entries.sort_by(|x, y| {
        x.value
            .re
            .total_cmp(&y.value.re)
            .then(x.value.im.total_cmp(&y.value.im))
    });
    RootSet { entries }
}

fn companion_eigenvalues(q: &Quartic<f64>) -> [Complex64; 4] {
    let c = q.coeffs();
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 0.0, 0.0, -c[0],
        1.0, 0.0, 0.0, -c[1],
        0.0, 1.0, 0.0, -c[2],
        0.0, 0.0, 1.0, -c[3],
    );
    // Plain QR can stall on near-orthogonal companions (x^4 + 1); shifting
    // the spectrum breaks the symmetry.
    for shift in [0.0, 0.5, -0.75, 1.25] {
        let shifted = m + Matrix4::identity() * shift;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 500) {
            let ev = schur.complex_eigenvalues();
            let mut out = [Complex64::new(0.0, 0.0); 4];
            for (o, v) in out.iter_mut().zip(ev.iter()) {
                *o = v - shift;
            }
            if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return out;
            }
        }
    }
    durand_kerner(q)
}

/// Simultaneous iteration for all four roots, used only if QR fails.
fn durand_kerner(q: &Quartic<f64>) -> [Complex64; 4] {
    let radius = 1.0 + q.max_abs_coeff();
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [0, 1, 2, 3].map(|k| seed.powu(k) * radius * 0.5);
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(f64::EPSILON, 0.0);
            }
            let step = q.eval_complex(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= f64::EPSILON * radius {
            break;
        }
    }
    z
}

/// Largest distance of `m` estimates from their centroid that a perturbed
/// `m`-fold root can plausibly show.
fn max_spread(q: &Quartic<f64>, m: usize, tol: f64) -> f64 {
    let scale = 1.0 + q.max_abs_coeff();
    let perturbation = (1e4 * f64::EPSILON * scale).powf(1.0 / m as f64) * scale.powf(1.0 - 1.0 / m as f64);
    perturbation.max(tol * scale)
}

/// Normalised size of the first `m` Taylor coefficients of `q` at `z`.
fn multiplicity_defect(q: &Quartic<f64>, z: Complex64, m: usize) -> f64 {
    let x = z.norm().max(1.0);
    (0..m)
        .map(|order| {
            let coeffs = q.taylor_coeffs(order);
            let value = coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.abs() * x.powi(k as i32))
                .sum();
            value.norm() / scale.max(binomial(4, order) as f64)
        })
        .fold(0.0, f64::max)
}

fn best_partition(q: &Quartic<f64>, estimates: &[Complex64; 4], tol: f64) -> Vec<Vec<usize>> {
    let mut partitions = set_partitions(4);
    partitions.sort_by_key(|p| p.len());
    let mut best: Option<(usize, f64, Vec<Vec<usize>>)> = None;
    for p in partitions {
        if let Some((len, _, _)) = &best {
            if p.len() > *len {
                break;
            }
        }
        let mut worst: f64 = 0.0;
        let mut ok = true;
        let mut centres = Vec::with_capacity(p.len());
        for block in &p {
            let m = block.len();
            let centre = block.iter().map(|&i| estimates[i]).sum::<Complex64>() / m as f64;
            centres.push((centre, m));
            if m > 1 {
                let spread = block
                    .iter()
                    .map(|&i| (estimates[i] - centre).norm())
                    .fold(0.0, f64::max);
                if spread > max_spread(q, m, tol) {
                    ok = false;
                    break;
                }
                let defect = multiplicity_defect(q, centre, m);
                if defect > tol {
                    ok = false;
                    break;
                }
                worst = worst.max(defect);
            }
        }
        if !ok || !conjugate_closed(&centres, default_cluster_tolerance(q, tol)) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, w, _)) => worst < *w,
        };
        if better {
            best = Some((p.len(), worst, p));
        }
    }
    best.map(|(_, _, p)| p)
        .unwrap_or_else(|| (0..4).map(|i| vec![i]).collect())
}

fn conjugate_closed(centres: &[(Complex64, usize)], snap: f64) -> bool {
    centres.iter().all(|(z, m)| {
        z.im.abs() <= snap.max(1e-6 * z.norm())
            || centres
                .iter()
                .any(|(w, k)| k == m && (w - z.conj()).norm() <= snap.max(1e-6 * z.norm()))
    })
}

/// Makes non-real entries exact conjugate pairs.
fn enforce_conjugates(entries: &mut [Root]) {
    let n = entries.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || entries[i].is_real() || entries[i].value.im < 0.0 {
            continue;
        }
        let target = entries[i].value.conj();
        let partner = (0..n)
            .filter(|&j| j != i && !used[j] && entries[j].multiplicity == entries[i].multiplicity)
            .filter(|&j| entries[j].value.im < 0.0)
            .min_by(|&a, &b| {
                (entries[a].value - target)
                    .norm()
                    .total_cmp(&(entries[b].value - target).norm())
            });
        if let Some(j) = partner {
            let avg = (entries[i].value + entries[j].value.conj()) / 2.0;
            entries[i].value = avg;
            entries[j].value = avg.conj();
            used[i] = true;
            used[j] = true;
        }
    }
}

fn polish(q: &Quartic<f64>, start: Complex64, multiplicity: usize) -> Complex64 {
    if multiplicity >= 4 {
        // The third derivative is linear: its root is exact.
        return Complex64::new(-q.coeffs()[3] / 4.0, 0.0);
    }
    newton(q, start, multiplicity - 1, 8)
}

/// Newton iteration on the `order`-th derivative, keeping the best iterate.
fn newton(q: &Quartic<f64>, start: Complex64, order: usize, iters: usize) -> Complex64 {
    let f = q.taylor_coeffs(order);
    let df: Vec<f64> = f.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    let eval = |coeffs: &[f64], z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let mut z = start;
    let mut best = (eval(&f, z).norm(), z);
    for _ in 0..iters {
        let fz = eval(&f, z);
        let dz = eval(&df, z);
        if dz.norm() == 0.0 || !fz.norm().is_finite() {
            break;
        }
        let next = z - fz / dz;
        if !next.re.is_finite() || !next.im.is_finite() {
            break;
        }
        z = next;
        let r = eval(&f, z).norm();
        if r < best.0 {
            best = (r, z);
        }
        if r == 0.0 {
            break;
        }
    }
    best.1
}

/// All set partitions of `0..n`.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for i in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for b in 0..p.len() {
                let mut q = p.clone();
                q[b].push(i);
                next.push(q);
            }
            let mut q = p.clone();
            q.push(vec![i]);
            next.push(q);
        }
        out = next;
    }
    out
}
