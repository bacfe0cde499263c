//! `f64` math through `libm`, so results are bit-identical whatever features
//! the final build turns on for `num-traits`.

use num_complex::Complex64;

pub trait Real: Copy {
    fn abs(self) -> Self;
    fn signum(self) -> Self;
    fn round(self) -> Self;
    fn ceil(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn log10(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Real for f64 {
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn signum(self) -> f64 {
        if self.is_nan() {
            f64::NAN
        } else {
            libm::copysign(1.0, self)
        }
    }
    fn round(self) -> f64 {
        libm::round(self)
    }
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn log10(self) -> f64 {
        libm::log10(self)
    }
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    fn sinh(self) -> f64 {
        libm::sinh(self)
    }
    fn atan2(self, x: f64) -> f64 {
        libm::atan2(self, x)
    }
    fn cosh(self) -> f64 {
        libm::cosh(self)
    }
    fn powf(self, e: f64) -> f64 {
        libm::pow(self, e)
    }
    // same multiplication order as compiler-rt's __powidf2
    fn powi(self, n: i32) -> f64 {
        let mut a = self;
        let mut b = n;
        let mut r = 1.0;
        loop {
            if b & 1 != 0 {
                r *= a;
            }
            b /= 2;
            if b == 0 {
                break;
            }
            a *= a;
        }
        if n < 0 {
            1.0 / r
        } else {
            r
        }
    }
}

/// `r e^{iθ}`.
pub fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::new(r * libm::cos(theta), r * libm::sin(theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_std() {
        for x in [0.3, -1.7, 2.0, 10.5] {
            for n in -7..12 {
                assert_eq!(Real::powi(x, n), std::primitive::f64::powi(x, n), "{x}^{n}");
            }
        }
    }
}
