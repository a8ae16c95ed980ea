use crate::error::{Error, Result};

/// `psi(s / eps)` with `psi(t) = 0` for `t < 0`, `t` on `[0, 1]`, `1` for `t > 1`.
pub fn smoothed_heaviside(eps: f64, s: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("smoothing width {eps} must be positive")));
    }
    Ok(ramp(eps, s))
}

/// Ramp without argument checks. `eps == 0` gives the Heaviside function
/// with `H(0) = 0`.
#[inline]
pub(crate) fn ramp(eps: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= eps {
        1.0
    } else {
        s / eps
    }
}

/// `A_eps(x, s) = a_-(x) + (a_+(x) - a_-(x)) psi_eps(s)` at one node.
#[inline]
pub(crate) fn blended(aminus: f64, aplus: f64, eps: f64, s: f64) -> f64 {
    aminus + (aplus - aminus) * ramp(eps, s)
}

// 4-point Gauss-Legendre on [0, 1]
const GL_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_9,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GL_W: [f64; 4] = [
    0.173_927_422_568_726_9,
    0.326_072_577_431_273_1,
    0.326_072_577_431_273_1,
    0.173_927_422_568_726_9,
];

/// Effective conductivity of the link between two adjacent nodes: the
/// harmonic mean of `A_eps` along the segment, with `u` and `a_+-`
/// interpolated linearly between the endpoint values. Exact whenever the
/// coefficients are piecewise constant along the link.
pub(crate) fn link_coefficient(
    am: (f64, f64),
    ap: (f64, f64),
    u: (f64, f64),
    eps: f64,
) -> f64 {
    let (ui, uj) = u;
    let du = uj - ui;
    // pure-phase fast paths
    let all_minus = ui <= 0.0 && uj <= 0.0;
    let all_plus = if eps > 0.0 {
        ui >= eps && uj >= eps
    } else {
        // H(0) = 0 only matters on a null set of the segment
        ui >= 0.0 && uj >= 0.0 && (ui > 0.0 || uj > 0.0)
    };
    if all_minus && am.0 == am.1 {
        return am.0;
    }
    if all_plus && ap.0 == ap.1 {
        return ap.0;
    }

    let mut breaks = [0.0f64; 4];
    let mut nb = 0;
    breaks[nb] = 0.0;
    nb += 1;
    if du != 0.0 {
        let mut cross = [-ui / du, f64::NAN];
        if eps > 0.0 {
            cross[1] = (eps - ui) / du;
        }
        if cross[0] > cross[1] {
            cross.swap(0, 1);
        }
        for s in cross {
            if s > 0.0 && s < 1.0 {
                breaks[nb] = s;
                nb += 1;
            }
        }
    }
    breaks[nb] = 1.0;
    nb += 1;

    let mut resistance = 0.0;
    for w in breaks[..nb].windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let len = s1 - s0;
        if len <= 0.0 {
            continue;
        }
        let mid_u = ui + 0.5 * (s0 + s1) * du;
        let phase = if mid_u <= 0.0 {
            Some(false)
        } else if eps == 0.0 || mid_u >= eps {
            Some(true)
        } else {
            None
        };
        let piece_const = match phase {
            Some(false) => am.0 == am.1,
            Some(true) => ap.0 == ap.1,
            None => false,
        };
        if piece_const {
            let a = if phase == Some(true) { ap.0 } else { am.0 };
            resistance += len / a;
            continue;
        }
        let mut acc = 0.0;
        for (x, wgt) in GL_X.iter().zip(GL_W.iter()) {
            let s = s0 + x * len;
            let a_m = am.0 + s * (am.1 - am.0);
            let a_p = ap.0 + s * (ap.1 - ap.0);
            let a = blended(a_m, a_p, eps, ui + s * du);
            acc += wgt / a;
        }
        resistance += acc * len;
    }
    1.0 / resistance
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_values() {
        assert_eq!(smoothed_heaviside(0.1, -1.0).unwrap(), 0.0);
        assert!((smoothed_heaviside(0.1, 0.05).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(smoothed_heaviside(0.1, 0.2).unwrap(), 1.0);
        assert_eq!(smoothed_heaviside(0.1, 0.0).unwrap(), 0.0);
        assert!(smoothed_heaviside(0.0, 1.0).is_err());
        assert!(smoothed_heaviside(-0.1, 1.0).is_err());
    }

    #[test]
    fn ramp_is_monotone() {
        let mut last = 0.0;
        for k in -50..150 {
            let v = smoothed_heaviside(0.1, k as f64 * 1e-3).unwrap();
            assert!(v >= last && (0.0..=1.0).contains(&v));
            last = v;
        }
    }

    #[test]
    fn sharp_link_is_series_conductance() {
        // interface at fraction 1/3 from node i (minus side) -> 1/(1/3/1 + 2/3/2)
        let c = link_coefficient((1.0, 1.0), (2.0, 2.0), (-1.0, 2.0), 0.0);
        assert!((c - 1.0 / (1.0 / 3.0 + 1.0 / 3.0)).abs() < 1e-14);
        // kink exactly at a node
        assert_eq!(link_coefficient((1.0, 1.0), (2.0, 2.0), (0.0, 0.5), 0.0), 2.0);
        assert_eq!(link_coefficient((1.0, 1.0), (2.0, 2.0), (-1.0, 0.0), 0.0), 1.0);
    }

    #[test]
    fn ramp_link_matches_closed_form() {
        // u from 0 to eps: A = 1 + s, int_0^1 ds/(1+s) = ln 2
        let c = link_coefficient((1.0, 1.0), (2.0, 2.0), (0.0, 0.1), 0.1);
        assert!((c - 1.0 / 2f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn varying_single_phase_is_log_mean() {
        let c = link_coefficient((1.0, 1.5), (2.0, 2.0), (-1.0, -2.0), 0.0);
        let exact = 0.5 / (1.5f64 / 1.0).ln();
        assert!((c - exact).abs() < 1e-6);
    }
}
