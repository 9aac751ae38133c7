//! Nonoverlapping floating-point expansions.
//!
//! An expansion is a sum of doubles stored in increasing order of magnitude
//! with pairwise nonoverlapping bit ranges. Sums and products are exact as
//! long as no intermediate overflows or underflows, which makes the sign of
//! the most significant component the exact sign of the represented value.

#[derive(Clone, Debug, Default)]
pub(crate) struct Expansion {
    terms: Vec<f64>,
}

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let x = a + b;
    let bv = x - a;
    let av = x - bv;
    let br = b - bv;
    let ar = a - av;
    (x, ar + br)
}

#[inline]
pub(crate) fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let x = a - b;
    let bv = a - x;
    let av = x + bv;
    let br = bv - b;
    let ar = a - av;
    (x, ar + br)
}

#[inline]
pub(crate) fn two_product(a: f64, b: f64) -> (f64, f64) {
    let x = a * b;
    (x, a.mul_add(b, -x))
}

impl Expansion {
    #[cfg(test)]
    pub(crate) fn from_f64(x: f64) -> Self {
        let terms = if x == 0.0 { Vec::new() } else { vec![x] };
        Expansion { terms }
    }

    /// Exact `a - b`.
    pub(crate) fn diff(a: f64, b: f64) -> Self {
        let (x, y) = two_diff(a, b);
        Self::from_pair(x, y)
    }

    /// Exact `a * b`.
    pub(crate) fn product(a: f64, b: f64) -> Self {
        let (x, y) = two_product(a, b);
        Self::from_pair(x, y)
    }

    fn from_pair(hi: f64, lo: f64) -> Self {
        let mut terms = Vec::with_capacity(2);
        if lo != 0.0 {
            terms.push(lo);
        }
        if hi != 0.0 {
            terms.push(hi);
        }
        Expansion { terms }
    }

    /// Adds a single double (Shewchuk's GROW-EXPANSION with zero elimination).
    fn grow(&self, b: f64) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + 1);
        let mut q = b;
        for &e in &self.terms {
            let (sum, err) = two_sum(q, e);
            if err != 0.0 {
                out.push(err);
            }
            q = sum;
        }
        if q != 0.0 {
            out.push(q);
        }
        Expansion { terms: out }
    }

    pub(crate) fn add(&self, other: &Expansion) -> Self {
        let (mut acc, rest) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for &t in &rest.terms {
            acc = acc.grow(t);
        }
        acc
    }

    pub(crate) fn neg(&self) -> Self {
        Expansion {
            terms: self.terms.iter().map(|t| -t).collect(),
        }
    }

    pub(crate) fn sub(&self, other: &Expansion) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies by a single double (SCALE-EXPANSION with zero elimination).
    fn scale(&self, b: f64) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        let mut iter = self.terms.iter();
        let Some(&first) = iter.next() else {
            return Expansion::default();
        };
        let (mut q, lo) = two_product(first, b);
        if lo != 0.0 {
            out.push(lo);
        }
        for &e in iter {
            let (p_hi, p_lo) = two_product(e, b);
            let (sum, err) = two_sum(q, p_lo);
            if err != 0.0 {
                out.push(err);
            }
            let (hi, err2) = two_sum(p_hi, sum);
            if err2 != 0.0 {
                out.push(err2);
            }
            q = hi;
        }
        if q != 0.0 {
            out.push(q);
        }
        Expansion { terms: out }
    }

    pub(crate) fn mul(&self, other: &Expansion) -> Self {
        let mut acc = Expansion::default();
        for &t in &other.terms {
            acc = acc.add(&self.scale(t));
        }
        acc
    }

    /// Sign of the represented value: -1, 0 or +1.
    pub(crate) fn signum(&self) -> i8 {
        match self.terms.iter().rev().find(|t| **t != 0.0) {
            Some(t) if *t > 0.0 => 1,
            Some(_) => -1,
            None => 0,
        }
    }

    #[cfg(test)]
    pub(crate) fn estimate(&self) -> f64 {
        self.terms.iter().sum()
    }
}
