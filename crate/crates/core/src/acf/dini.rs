use crate::error::{Error, Result};
use crate::field::ModulusOfContinuity;

/// `(psi(r), g(r))` for `omega(r) = omega0 r^alpha`, with
/// `psi = omega + D + D^2`, `D(r) = int_0^r omega(rho)/rho drho`, and
/// `g(r) = int_0^r psi`.
pub fn modulus_psi_g(modulus: &ModulusOfContinuity, r: f64) -> Result<(f64, f64)> {
    let (w0, a) = (modulus.omega0, modulus.alpha);
    if !(a > 0.0) {
        return Err(Error::InvalidModel(format!("exponent {a} must be positive")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    let ra = r.powf(a);
    let psi = w0 * ra * (1.0 + 1.0 / a) + (w0 * ra / a).powi(2);
    let g = (1.0 + 1.0 / a) * w0 * r.powf(a + 1.0) / (a + 1.0)
        + w0 * w0 * r.powf(2.0 * a + 1.0) / (a * a * (2.0 * a + 1.0));
    Ok((psi, g))
}
