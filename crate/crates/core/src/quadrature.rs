//! Gaussian quadrature: fixed-order Gauss–Legendre rules (nodes cached per
//! order) and adaptive Gauss–Kronrod 7/15 integration.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default node count for the correlation/spectrum transforms.
pub const TRANSFORM_NODES: usize = 4096;

type Table = Arc<(Vec<f64>, Vec<f64>)>;

fn table_cache() -> &'static Mutex<HashMap<usize, Table>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Table>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the `n`-point rule on [-1, 1], ascending nodes.
fn legendre_table(n: usize) -> Table {
    if let Some(t) = table_cache().lock().unwrap().get(&n) {
        return Arc::clone(t);
    }
    let table = Arc::new(compute_table(n));
    table_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert(table)
        .clone()
}

/// Returns (P_n(z), P_n'(z)) by upward recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = 1.0;
    for j in 1..=n {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * z * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (z * p - p_prev) / (z * z - 1.0);
    (p, dp)
}

fn compute_table(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..half {
        // Tricomi initial guess, then Newton.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// An `n`-point Gauss–Legendre rule, exact for polynomials of degree `2n - 1`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        let table = legendre_table(n);
        Self {
            nodes: table.0.iter().map(|&v| T::lit(v)).collect(),
            weights: table.1.iter().map(|&v| T::lit(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Integrates over `[a, b]` after the substitution
    /// `x = (a+b)/2 - (b-a)/2 cos s`, `s` in `[0, pi]`.
    ///
    /// The Jacobian `(b-a)/2 sin s` vanishes like `(x-a)^(1/2)` at both ends, so
    /// integrands with inverse-square-root endpoint singularities or
    /// square-root kinks become smooth in `s`.
    pub fn integrate_cos_mapped<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.integrate(T::zero(), T::PI(), |s| {
            let jac = half * s.sin();
            if jac == T::zero() {
                T::zero()
            } else {
                jac * f(mid - half * s.cos())
            }
        })
    }

    /// Composite rule over consecutive intervals defined by sorted `edges`.
    pub fn integrate_pieces<F: FnMut(T) -> T>(&self, edges: &[T], mut f: F) -> T {
        edges
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| self.integrate(w[0], w[1], &mut f))
            .sum()
    }
}

/// Sorted, deduplicated interval edges: `[a, cuts within (a, b)..., b]`.
pub fn split_points<T: Real>(a: T, b: T, cuts: impl IntoIterator<Item = T>) -> Vec<T> {
    let tiny = (b - a).abs() * T::lit(1e-12);
    let mut pts: Vec<T> = cuts
        .into_iter()
        .filter(|&c| c.is_finite() && c > a + tiny && c < b - tiny)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= tiny);
    pts
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and |Kronrod - Gauss| on one interval.
pub fn gauss_kronrod_15<T: Real, F: FnMut(T) -> T>(a: T, b: T, f: &mut F) -> (T, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-6),
            abs_tol: T::lit(1e-14),
            max_intervals: 500,
        }
    }
}

/// Globally adaptive bisection with Gauss–Kronrod 7/15 panels: the panel with
/// the largest error estimate is split until the summed error falls below
/// `max(abs_tol, rel_tol * |integral|)`.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    opts: &AdaptiveOptions<T>,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (v, e) = gauss_kronrod_15(a, b, &mut f);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: T = panels.iter().map(|p| p.2).sum();
        let err: T = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NonFinite {
                what: "adaptive integrand",
                at: a.to_f64_lossy(),
            });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= opts.max_intervals {
            return Err(Error::NonConvergence {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
                estimate: total.to_f64_lossy(),
                error: err.to_f64_lossy(),
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let m = (lo + hi) / T::lit(2.0);
        if m <= lo || m >= hi {
            // Interval exhausted at machine resolution; accept what we have.
            let (v, _) = gauss_kronrod_15(lo, hi, &mut f);
            panels.push((lo, hi, v, T::zero()));
            continue;
        }
        let (v1, e1) = gauss_kronrod_15(lo, m, &mut f);
        let (v2, e2) = gauss_kronrod_15(m, hi, &mut f);
        panels.push((lo, m, v1, e1));
        panels.push((m, hi, v2, e2));
    }
}
