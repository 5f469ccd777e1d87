use alloc::vec::Vec;

/// Exact rational `num / den` with `den > 0` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: i128,
    pub den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    fn add(self, other: Rational) -> Option<Rational> {
        let g = gcd(self.den, other.den);
        let l = (self.den / g).checked_mul(other.den)?;
        let a = self.num.checked_mul(l / self.den)?;
        let b = other.num.checked_mul(l / other.den)?;
        Some(Rational::new(a.checked_add(b)?, l))
    }

    fn mul_int(self, k: i128) -> Option<Rational> {
        let g = gcd(k, self.den).max(1);
        Some(Rational::new(self.num.checked_mul(k / g)?, self.den / g))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Bernoulli numbers `B_0..=B_K` with `B_1 = -1/2`.
#[derive(Clone, Debug)]
pub struct BernoulliTable {
    exact: Vec<Rational>,
    values: Vec<f64>,
}

impl BernoulliTable {
    /// Largest index representable without overflowing the exact recurrence.
    pub const MAX_INDEX: usize = 58;

    pub fn new(k_max: usize) -> Self {
        assert!(k_max <= Self::MAX_INDEX, "Bernoulli index {k_max} too large");
        let mut exact: Vec<Rational> = Vec::with_capacity(k_max + 1);
        exact.push(Rational::new(1, 1));
        for m in 1..=k_max {
            if m >= 3 && m % 2 == 1 {
                exact.push(Rational::zero());
                continue;
            }
            // B_m = -1/(m+1) sum_{k<m} C(m+1, k) B_k
            let mut acc = Rational::zero();
            let mut binom: i128 = 1;
            for (k, b) in exact.iter().enumerate() {
                if b.num != 0 {
                    acc = acc
                        .add(b.mul_int(binom).expect("Bernoulli overflow"))
                        .expect("Bernoulli overflow");
                }
                binom = binom * (m as i128 + 1 - k as i128) / (k as i128 + 1);
            }
            exact.push(Rational::new(-acc.num, acc.den.checked_mul(m as i128 + 1).expect("Bernoulli overflow")));
        }
        let values = exact.iter().map(|r| r.to_f64()).collect();
        BernoulliTable { exact, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn exact(&self, k: usize) -> Rational {
        self.exact[k]
    }

    /// `B_k / k!`.
    pub fn over_factorial(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.values[k] / f
    }
}
