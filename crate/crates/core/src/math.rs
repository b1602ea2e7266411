// Float intrinsics that are not in `core`.

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
}

pub use imp::*;

/// `-x log x` with the `0 log 0 = 0` convention.
#[inline]
pub fn xlogx_neg(x: f64) -> f64 {
    if x > 0.0 {
        -x * ln(x)
    } else {
        0.0
    }
}

/// Natural log of a big unsigned integer, `-inf` for zero.
pub fn ln_big(n: &num_bigint::BigUint) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        let v: u64 = n.iter_u64_digits().next().unwrap_or(0);
        return ln(v as f64);
    }
    let shift = bits - 64;
    let top = n >> shift;
    let v: u64 = top.iter_u64_digits().next().unwrap_or(0);
    ln(v as f64) + shift as f64 * core::f64::consts::LN_2
}
