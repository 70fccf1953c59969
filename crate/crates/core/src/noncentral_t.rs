//! Log density of the noncentral t distribution.
//!
//! With T = (Z + λ)/S and S = √(V/ν), V ~ χ²(ν), the density is the
//! one-dimensional mixture
//!
//! ```text
//! f(x; ν, λ) = ∫₀^∞ φ(x·s − λ) · s · g_ν(s) ds
//! ```
//!
//! whose log-integrand `ν(ln s − (s² − 1)/2) − (x·s − λ)²/2` is concave in
//! `s`. The integral is evaluated around the closed-form mode in scaled form
//! so nothing underflows, even for |λ| in the hundreds.

use std::f64::consts::{LN_2, PI};

use crate::error::{invalid, Result};
use crate::quadrature::integrate;
use crate::special::{stirlerr, student_t_logpdf};

/// Drop in the log-integrand at which the integration window is cut.
const WINDOW_DROP: f64 = 60.0;

/// Natural log of the noncentral t density with `nu` degrees of freedom and
/// noncentrality `ncp`, evaluated at `x`.
pub fn noncentral_t_logpdf(x: f64, nu: f64, ncp: f64) -> Result<f64> {
    if !(nu > 0.0 && nu.is_finite()) {
        return invalid(format!("degrees of freedom must be positive, got {nu}"));
    }
    if !(x.is_finite() && ncp.is_finite()) {
        return invalid(format!("x and ncp must be finite, got x = {x}, ncp = {ncp}"));
    }
    Ok(logpdf_unchecked(x, nu, ncp))
}

/// Same as [`noncentral_t_logpdf`] for arguments already known to be valid.
pub(crate) fn logpdf_unchecked(x: f64, nu: f64, ncp: f64) -> f64 {
    if ncp == 0.0 {
        student_t_logpdf(x, nu)
    } else {
        logpdf_by_mixture(x, nu, ncp)
    }
}

/// The mixture-integral evaluation, valid for any ncp including zero.
pub(crate) fn logpdf_by_mixture(x: f64, nu: f64, ncp: f64) -> f64 {
    let log_kernel = |s: f64| {
        let shape = if (s - 1.0).abs() < 0.5 {
            let u = s - 1.0;
            // ln(1+u) − u − u²/2, kept accurate near s = 1 for large ν
            (u.ln_1p() - u) - 0.5 * u * u
        } else {
            s.ln() - 0.5 * (s * s - 1.0)
        };
        let r = x * s - ncp;
        nu * shape - 0.5 * r * r
    };

    // mode of the concave log-kernel: (x² + ν)s² − xλ s − ν = 0
    let a = x * x + nu;
    let xl = x * ncp;
    let disc = (xl * xl + 4.0 * nu * a).sqrt();
    let mode = if xl >= 0.0 {
        (xl + disc) / (2.0 * a)
    } else {
        2.0 * nu / (disc - xl)
    };
    let width = 1.0 / (nu / (mode * mode) + a).sqrt();
    let peak = log_kernel(mode);

    let mut lo = 0.0;
    let mut step = width;
    while mode - step > 0.0 {
        if log_kernel(mode - step) < peak - WINDOW_DROP {
            lo = mode - step;
            break;
        }
        step *= 2.0;
    }
    let mut step = width;
    let hi = loop {
        let s = mode + step;
        if log_kernel(s) < peak - WINDOW_DROP {
            break s;
        }
        step *= 2.0;
    };

    let mut pts = vec![lo, hi, mode];
    for k in [1.0, 3.0, 8.0] {
        for s in [mode - k * width, mode + k * width] {
            if s > lo && s < hi {
                pts.push(s);
            }
        }
    }
    let res = integrate(|s| (log_kernel(s) - peak).exp(), &pts, 1e-12, 1e-300, 200);

    let log_const = LN_2 + 0.5 * (nu / 2.0).ln() - (2.0 * PI).ln() - stirlerr(nu / 2.0);
    log_const + peak + res.value.ln()
}
