//! Reference spectra: the square by separation of variables and the disk
//! through Bessel zeros.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem_scalar::ScalarBc;
use crate::spectrum::Spectrum;

/// Above this argument the power series is replaced by backward recurrence.
const SERIES_LIMIT: f64 = 12.0;
const SCAN_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ZeroKind {
    J,
    #[serde(rename = "Jprime")]
    JPrime,
}

/// Dirichlet (`m, n >= 1`) or Neumann (`m, n >= 0`) eigenvalues of the
/// square `(0, side)^2`, ascending with multiplicity.
pub fn square_spectrum(bc: ScalarBc, count: usize, side: f64) -> Spectrum {
    let first = match bc {
        ScalarBc::Dirichlet => 1u64,
        ScalarBc::Neumann => 0,
    };
    let mut reach = first + 2;
    loop {
        // every pair with m^2 + n^2 < reach^2 is enumerated
        let mut ints: Vec<u64> = Vec::new();
        for m in first..reach {
            for n in first..reach {
                if m * m + n * n < reach * reach {
                    ints.push(m * m + n * n);
                }
            }
        }
        ints.sort_unstable();
        if ints.len() >= count {
            let scale = (PI / side).powi(2);
            let values = ints[..count].iter().map(|&s| scale * s as f64).collect();
            return Spectrum::analytic(bc.label(), values, "square");
        }
        reach *= 2;
    }
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for m in 1..200u32 {
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J0 + 2 (J2 + J4 + ...) = 1`.
fn backward(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut start = (top + 20.0 + 4.0 * top.sqrt()) as u32;
    start += start % 2;
    let (mut next, mut cur) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut want = 0.0;
    for m in (0..=start).rev() {
        // cur holds J_m (unnormalized), next holds J_{m+1}
        if m == n {
            want = cur;
        }
        if m % 2 == 0 {
            norm += if m == 0 { cur } else { 2.0 * cur };
        }
        if m == 0 {
            break;
        }
        let prev = 2.0 * m as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
    }
    want / norm
}

fn j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        series(n, x)
    } else {
        backward(n, x)
    }
}

/// `J_n(x)` or its derivative, for `x >= 0`.
pub fn bessel_j(n: u32, x: f64, derivative: bool) -> f64 {
    if !derivative {
        j(n, x)
    } else if n == 0 {
        -j(1, x)
    } else {
        0.5 * (j(n - 1, x) - j(n + 1, x))
    }
}

fn eval(kind: ZeroKind, n: u32, x: f64) -> f64 {
    bessel_j(n, x, kind == ZeroKind::JPrime)
}

/// Derivative of [`eval`] in `x`, from Bessel's equation for the second derivative.
fn eval_slope(kind: ZeroKind, n: u32, x: f64) -> f64 {
    match kind {
        ZeroKind::J => bessel_j(n, x, true),
        ZeroKind::JPrime => {
            let nf = n as f64;
            -bessel_j(n, x, true) / x - (1.0 - nf * nf / (x * x)) * j(n, x)
        }
    }
}

/// McMahon's first-order estimate of the k-th positive zero.
pub fn mcmahon_guess(kind: ZeroKind, n: u32, k: u32) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let mu = 4.0 * nf * nf;
    match kind {
        ZeroKind::J => {
            let b = (kf + 0.5 * nf - 0.25) * PI;
            b - (mu - 1.0) / (8.0 * b)
        }
        ZeroKind::JPrime => {
            // n = 0 has no trivial-root offset: j'_{0,k} = j_{1,k}
            let kk = if n == 0 { kf + 1.0 } else { kf };
            let b = (kk + 0.5 * nf - 0.75) * PI;
            b - (mu + 3.0) / (8.0 * b)
        }
    }
}

/// k-th positive zero of `J_n` or `J_n'` with the achieved bracket width.
pub fn bessel_zero_with_accuracy(kind: ZeroKind, n: u32, k: u32) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("zero index starts at 1".into()));
    }
    let upper = mcmahon_guess(kind, n, k).max(n as f64) + 2.0 * PI + 5.0;
    let fail = || Error::BracketFailure {
        kind: match kind {
            ZeroKind::J => "J",
            ZeroKind::JPrime => "Jprime",
        },
        order: n as usize,
        index: k as usize,
        upper,
    };
    // no positive zero lies below n; the trivial root of J_0' at 0 is skipped
    let mut a = (n as f64).max(1e-3);
    let mut fa = eval(kind, n, a);
    let mut found = 0;
    let (lo, hi) = loop {
        let b = a + SCAN_STEP;
        if b > upper {
            return Err(fail());
        }
        let fb = eval(kind, n, b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == k {
                break (a, b);
            }
        }
        a = b;
        fa = fb;
    };
    let root = polish(kind, n, lo, hi, mcmahon_guess(kind, n, k));
    Ok(root)
}

pub fn bessel_zero(kind: ZeroKind, n: u32, k: u32) -> Result<f64> {
    bessel_zero_with_accuracy(kind, n, k).map(|(z, _)| z)
}

/// Newton iteration kept inside the bracket, with bisection as fallback.
fn polish(kind: ZeroKind, n: u32, mut lo: f64, mut hi: f64, guess: f64) -> (f64, f64) {
    let flo = eval(kind, n, lo);
    let mut x = if guess > lo && guess < hi {
        guess
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..200 {
        let fx = eval(kind, n, x);
        if fx == 0.0 {
            return (x, 0.0);
        }
        if fx.signum() == flo.signum() {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let step = fx / eval_slope(kind, n, x);
        if step.abs() <= 1e-15 * x {
            return (x - step, (hi - lo).min(step.abs().max(f64::EPSILON * x)));
        }
        let newton = x - step;
        x = if newton > lo && newton < hi && step.abs() < 0.5 * (hi - lo) {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    (0.5 * (lo + hi), hi - lo)
}

/// Zeros `z[n][k-1]` for `n <= n_max`, `k <= k_max`.
#[derive(Clone, Debug, Serialize)]
pub struct BesselZeroTable {
    pub kind: ZeroKind,
    pub zeros: Vec<Vec<f64>>,
    /// Largest bracket width over the table.
    pub accuracy: f64,
}

impl BesselZeroTable {
    pub fn build(kind: ZeroKind, n_max: u32, k_max: u32) -> Result<Self> {
        let mut zeros = Vec::new();
        let mut accuracy: f64 = 0.0;
        for n in 0..=n_max {
            let mut row = Vec::new();
            for k in 1..=k_max {
                let (z, w) = bessel_zero_with_accuracy(kind, n, k)?;
                accuracy = accuracy.max(w);
                row.push(z);
            }
            zeros.push(row);
        }
        Ok(Self {
            kind,
            zeros,
            accuracy,
        })
    }

    pub fn get(&self, n: u32, k: u32) -> f64 {
        self.zeros[n as usize][k as usize - 1]
    }

    /// Strictly increasing rows.
    pub fn is_increasing(&self) -> bool {
        self.zeros.iter().all(|r| r.windows(2).all(|w| w[0] < w[1]))
    }

    /// `z(n, k) < z(n + 1, k) < z(n, k + 1)` wherever the table has the entries.
    /// For `J'` the order-0 row is skipped: dropping its root at 0 shifts its indices.
    pub fn is_interlaced(&self) -> bool {
        let rows = self.zeros.len();
        let from = usize::from(self.kind == ZeroKind::JPrime);
        (from..rows.saturating_sub(1)).all(|n| {
            let cols = self.zeros[n].len();
            (0..cols).all(|k| {
                let next = self.zeros[n + 1][k];
                self.zeros[n][k] < next && (k + 1 >= cols || next < self.zeros[n][k + 1])
            })
        })
    }
}

/// Disk eigenvalues: squared zeros of `J_n` (Dirichlet) or `J_n'`
/// (Neumann, led by 0), double for `n >= 1`.
pub fn disk_spectrum(bc: ScalarBc, count: usize, radius: f64) -> Result<Spectrum> {
    let kind = match bc {
        ScalarBc::Dirichlet => ZeroKind::J,
        ScalarBc::Neumann => ZeroKind::JPrime,
    };
    let mut cap = 3.0 * (count as f64).sqrt() + 4.0;
    loop {
        let mut zeros: Vec<f64> = match bc {
            ScalarBc::Neumann => vec![0.0],
            ScalarBc::Dirichlet => Vec::new(),
        };
        // all zeros below `cap`: orders with n >= cap have none
        for n in 0..(cap.ceil() as u32) {
            for k in 1.. {
                let z = bessel_zero(kind, n, k)?;
                if z >= cap {
                    break;
                }
                zeros.push(z);
                if n > 0 {
                    zeros.push(z);
                }
            }
        }
        if zeros.len() >= count {
            zeros.sort_by(f64::total_cmp);
            let values = zeros[..count]
                .iter()
                .map(|z| (z / radius).powi(2))
                .collect();
            return Ok(Spectrum::analytic(bc.label(), values, "disk"));
        }
        cap *= 2.0;
    }
}
