//! Compensated summation with a deterministic chunked reduction.
//!
//! Heavy sums are split into fixed-size chunks; chunks are summed
//! sequentially with Neumaier compensation, mapped (possibly in parallel)
//! by chunk index, and combined in index order. The grouping is a constant
//! of the algorithm, so totals are bit-identical for any thread count and
//! for the sequential build.

use num_complex::Complex64;

use crate::parallel::map_indexed;

const CHUNK: usize = 1024;

/// Neumaier variant of Kahan summation; keeps infinities intact (the
/// compensation channel is bypassed once a non-finite value appears).
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    pub fn new() -> Neumaier {
        Neumaier::default()
    }

    pub fn add(&mut self, x: f64) {
        if !x.is_finite() || !self.s.is_finite() {
            self.s += x;
            return;
        }
        let t = self.s + x;
        self.c += if self.s.abs() >= x.abs() { (self.s - t) + x } else { (x - t) + self.s };
        self.s = t;
    }

    pub fn total(&self) -> f64 {
        if self.s.is_finite() {
            self.s + self.c
        } else {
            self.s
        }
    }
}

pub(crate) fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let mut acc = Neumaier::new();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            acc.add(f(i));
        }
        acc.total()
    });
    let mut acc = Neumaier::new();
    for p in partials {
        acc.add(p);
    }
    acc.total()
}

pub(crate) fn sum_indexed_complex<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let mut re = Neumaier::new();
        let mut im = Neumaier::new();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let v = f(i);
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.total(), im.total())
    });
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for p in partials {
        re.add(p.re);
        im.add(p.im);
    }
    Complex64::new(re.total(), im.total())
}
