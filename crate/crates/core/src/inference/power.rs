use super::{check_alpha, norm_cdf, norm_quantile, norm_sf, Alternative};
use crate::error::{Error, Result};

/// Asymptotic power against `θ = θ₀ + c̃/√n` when the partial information is
/// `info`. Two-sided:
/// `1 − Φ(z_{α/2} + c̃√I) + Φ(−z_{α/2} + c̃√I)`, with `z_{α/2} = Φ⁻¹(1 − α/2)`.
/// One-sided `Greater` (and `Less` with `−c̃`): `1 − Φ(Φ⁻¹(1 − α) − c̃√I)`.
pub fn local_power(alpha: f64, c_tilde: f64, info: f64, alternative: Alternative) -> Result<f64> {
    check_alpha(alpha)?;
    if !(info > 0.0 && info.is_finite()) || !c_tilde.is_finite() {
        return Err(Error::InvalidInput(format!("need finite c_tilde and info > 0, got {c_tilde}, {info}")));
    }
    let shift = c_tilde * info.sqrt();
    Ok(match alternative {
        Alternative::TwoSided => {
            let z = norm_quantile(1.0 - alpha / 2.0);
            norm_sf(z + shift) + norm_cdf(-z + shift)
        }
        Alternative::Greater => norm_sf(norm_quantile(1.0 - alpha) - shift),
        Alternative::Less => norm_sf(norm_quantile(1.0 - alpha) + shift),
    })
}
