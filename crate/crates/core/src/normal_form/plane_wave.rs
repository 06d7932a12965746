//! Parameter of the homogeneous plane waves carried by heis-type isometry algebras.

use serde::Serialize;

use crate::bianchi::{classify, BianchiTag};
use crate::lie::LieAlgebra3;
use crate::{Error, Result, Tolerances};

#[derive(Clone, Debug, Serialize)]
pub struct PlaneWave {
    pub alpha: f64,
    pub sigma: f64,
    /// ad of the transverse generator on heis in the adapted basis
    pub d_sigma: [[f64; 3]; 3],
    /// generator of the R-action on R^2 for the simply transitive group
    pub rho_generator: [[f64; 2]; 2],
    /// Bianchi family of that group
    pub group_family: BianchiTag,
    pub group_param: Option<f64>,
}

/// sigma = alpha (alpha - 1); alpha = 0, 1 and sigma <= -1/4 are refused.
pub fn plane_wave_parameter(alpha: f64) -> Result<PlaneWave> {
    if !alpha.is_finite() || alpha == 0.0 || alpha == 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let sigma = alpha * (alpha - 1.0);
    if sigma <= -0.25 {
        return Err(Error::InvalidAlpha(alpha));
    }
    let r = 1.0 / (1.0 - alpha);
    let g = LieAlgebra3::from_brackets(&[(0, 1, [0.0, 1.0, 0.0]), (0, 2, [0.0, 0.0, r])]);
    let class = classify(&g, &Tolerances::default())?;
    Ok(PlaneWave {
        alpha,
        sigma,
        d_sigma: [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, sigma, 1.0]],
        rho_generator: [[1.0, 0.0], [0.0, r]],
        group_family: class.tag,
        group_param: class.param,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(plane_wave_parameter(2.0).unwrap().sigma, 2.0);
        assert_eq!(plane_wave_parameter(-1.0).unwrap().sigma, 2.0);
        assert!(matches!(plane_wave_parameter(0.5), Err(Error::InvalidAlpha(_))));
        assert!(matches!(plane_wave_parameter(0.0), Err(Error::InvalidAlpha(_))));
        assert!(matches!(plane_wave_parameter(1.0), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn alpha_two_is_sol() {
        let pw = plane_wave_parameter(2.0).unwrap();
        assert_eq!(pw.group_family, BianchiTag::Sol);
        assert_eq!(pw.d_sigma[2][1], 2.0);
    }

    #[test]
    fn negative_alpha_gives_h_lambda() {
        let pw = plane_wave_parameter(-1.0).unwrap();
        assert_eq!(pw.group_family, BianchiTag::HLambda);
        assert!((pw.group_param.unwrap() - 0.5).abs() < 1e-12);
    }
}
