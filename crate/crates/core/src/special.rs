//! Legendre polynomials and Bessel functions of the first kind, orders 0 and 1.

use crate::scalar::Real;

/// Iterator over `P_0(x), P_1(x), ...` via the three-term upward recurrence
/// `(l+1) P_{l+1} = (2l+1) x P_l - l P_{l-1}`.
#[derive(Clone, Debug)]
pub struct LegendreSeq<T> {
    x: T,
    prev: T,
    cur: T,
    l: usize,
}

impl<T: Real> LegendreSeq<T> {
    pub fn new(x: T) -> Self {
        Self {
            x,
            prev: T::zero(),
            cur: T::one(),
            l: 0,
        }
    }
}

impl<T: Real> Iterator for LegendreSeq<T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        let out = self.cur;
        let l = T::from_usize_lossy(self.l);
        let next = ((l + l + T::one()) * self.x * self.cur - l * self.prev) / (l + T::one());
        self.prev = self.cur;
        self.cur = next;
        self.l += 1;
        Some(out)
    }
}

/// `P_l(x)`.
pub fn legendre_p<T: Real>(l: usize, x: T) -> T {
    LegendreSeq::new(x).nth(l).unwrap()
}

const SERIES_MAX: f64 = 4.0;
const ASYMPTOTIC_MIN: f64 = 25.0;

/// Bessel function of the first kind of order zero.
///
/// Power series below 4, Miller's backward recurrence on [4, 25), and the
/// Hankel asymptotic expansion beyond.
pub fn bessel_j0<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < T::lit(SERIES_MAX) {
        series(ax, 0)
    } else if ax < T::lit(ASYMPTOTIC_MIN) {
        miller(ax).0
    } else {
        hankel(ax, 0)
    }
}

/// Bessel function of the first kind of order one.
pub fn bessel_j1<T: Real>(x: T) -> T {
    let ax = x.abs();
    let v = if ax < T::lit(SERIES_MAX) {
        series(ax, 1)
    } else if ax < T::lit(ASYMPTOTIC_MIN) {
        miller(ax).1
    } else {
        hankel(ax, 1)
    };
    if x < T::zero() {
        -v
    } else {
        v
    }
}

fn series<T: Real>(x: T, order: u32) -> T {
    let half = x / T::lit(2.0);
    let q = -half * half;
    let mut term = if order == 0 { T::one() } else { half };
    let mut sum = term;
    let n = T::lit(order as f64);
    for k in 1..200 {
        let kf = T::lit(k as f64);
        term = term * q / (kf * (kf + n));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.5) {
            break;
        }
    }
    sum
}

/// Returns (J0, J1) via backward recurrence normalised by
/// `J0 + 2 (J2 + J4 + ...) = 1`.
fn miller<T: Real>(x: T) -> (T, T) {
    let xf = x.to_f64_lossy();
    let mut n = 2 * ((xf + 8.0 * xf.cbrt() + 24.0) as usize / 2);
    let rescale = T::lit(1e10);
    let two_over_x = T::lit(2.0) / x;
    let mut j_next = T::zero();
    let mut j = T::lit(1e-30);
    let mut sum = T::zero();
    let mut j1 = T::zero();
    while n > 0 {
        let j_prev = T::from_usize_lossy(n) * two_over_x * j - j_next;
        j_next = j;
        j = j_prev;
        n -= 1;
        if n == 1 {
            j1 = j;
        }
        if n > 0 && n.is_multiple_of(2) {
            sum = sum + j + j;
        }
        if j.abs() > rescale {
            j = j / rescale;
            j_next = j_next / rescale;
            sum = sum / rescale;
            j1 = j1 / rescale;
        }
    }
    sum = sum + j;
    (j / sum, j1 / sum)
}

fn hankel<T: Real>(x: T, order: u32) -> T {
    let nu = T::lit(order as f64);
    let mu = T::lit(4.0) * nu * nu;
    let z8 = T::lit(8.0) * x;
    let mut p = T::one();
    let mut q = T::zero();
    let mut a = T::one();
    for k in 1..60usize {
        let odd = T::lit((2 * k - 1) as f64);
        let next = a * (mu - odd * odd) / (T::lit(k as f64) * z8);
        if next.abs() > a.abs() {
            break;
        }
        a = next;
        match k % 4 {
            0 => p = p + a,
            1 => q = q + a,
            2 => p = p - a,
            _ => q = q - a,
        }
        if a.abs() < T::epsilon() * T::lit(0.25) {
            break;
        }
    }
    let chi = x - (nu / T::lit(2.0) + T::lit(0.25)) * T::PI();
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
