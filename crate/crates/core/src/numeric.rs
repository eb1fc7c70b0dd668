//! Small numeric helpers shared by the spectral code: compensated summation
//! and trigonometry of rational multiples of a full turn with exact argument
//! reduction.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of complex values (real and imaginary parts separately).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `cos(2π k / n)` with the argument reduced in integer arithmetic.
///
/// Values at multiples of a quarter turn are exact, and `k` and `n - k`
/// give bitwise-identical results.
pub fn cos_turn(k: i64, n: i64) -> f64 {
    debug_assert!(n > 0);
    let mut k = k.rem_euclid(n);
    if 2 * k > n {
        k = n - k;
    }
    if k == 0 {
        1.0
    } else if 2 * k == n {
        -1.0
    } else if 4 * k == n {
        0.0
    } else if 4 * k < n {
        (2.0 * PI * k as f64 / n as f64).cos()
    } else {
        // cos(x) = -cos(π - x), keeps the evaluated angle within [0, π/2]
        -(2.0 * PI * (n - 2 * k) as f64 / (2 * n) as f64).cos()
    }
}

/// `sin(2π k / n)` with integer argument reduction; exact at quarter turns.
pub fn sin_turn(k: i64, n: i64) -> f64 {
    debug_assert!(n > 0);
    let k = k.rem_euclid(n);
    if 2 * k > n {
        return -sin_turn(n - k, n);
    }
    if k == 0 || 2 * k == n {
        0.0
    } else if 4 * k == n {
        1.0
    } else if 4 * k < n {
        (2.0 * PI * k as f64 / n as f64).sin()
    } else {
        // sin(x) = sin(π - x)
        (2.0 * PI * (n - 2 * k) as f64 / (2 * n) as f64).sin()
    }
}

/// `e^{2πi k / n}` built from [`cos_turn`] and [`sin_turn`].
pub fn unit_root(k: i64, n: i64) -> Complex64 {
    Complex64::new(cos_turn(k, n), sin_turn(k, n))
}
