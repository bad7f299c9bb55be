use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::environment::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Heyde,
    Env,
}

/// Closed-form limits predicted for a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryTargets {
    pub kind: ModelKind,
    pub gamma: Option<f64>,
    pub q: Option<f64>,
    /// Long-run fraction of horizontal steps.
    pub hfrac: f64,
    pub vfrac: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub diffusion: [[f64; 2]; 2],
    pub lil_x: f64,
    pub lil_y: f64,
    /// Limit ellipse `a x^2 + b y^2 <= 1`.
    pub ellipse_a: f64,
    pub ellipse_b: f64,
    /// Limit of vertical over horizontal step counts.
    pub anisotropy: f64,
    /// Limit of `n * P(Z(2n) = 0)`, for models where it is known to hold.
    pub qn_const: Option<f64>,
    /// Limit of `R(n) log n / n`, same eligibility as `qn_const`.
    pub rn_const: Option<f64>,
    pub integral_var_x: f64,
    pub integral_var_y: f64,
}

pub fn targets_of(model: &Model) -> TheoryTargets {
    let (kind, gamma, q, hfrac, return_density) = match model {
        Model::Heyde(p) => {
            let g = p.gamma();
            // Only the simple symmetric profile is a mixing special case.
            (ModelKind::Heyde, Some(g), None, 1.0 / g, p.is_simple_symmetric().then_some(g - 1.0))
        }
        Model::Env(law) => {
            let q = law.q();
            (ModelKind::Env, None, Some(q), 1.0 / (1.0 + q), law.is_iid().then_some(q))
        }
    };
    let vfrac = 1.0 - hfrac;
    let (var_x, var_y) = (hfrac, vfrac);
    TheoryTargets {
        kind,
        gamma,
        q,
        hfrac,
        vfrac,
        var_x,
        var_y,
        diffusion: [[var_x, 0.0], [0.0, var_y]],
        lil_x: var_x.sqrt(),
        lil_y: var_y.sqrt(),
        ellipse_a: 1.0 / var_x,
        ellipse_b: 1.0 / var_y,
        anisotropy: vfrac / hfrac,
        qn_const: return_density.map(|q| (1.0 + q) / (2.0 * PI * q.sqrt())),
        rn_const: return_density.map(|q| 2.0 * PI * q.sqrt() / (1.0 + q)),
        integral_var_x: var_x / 3.0,
        integral_var_y: var_y / 3.0,
    }
}

impl TheoryTargets {
    /// Quadratic form of the limit ellipse at `(u, v)`.
    pub fn ellipse_form(&self, u: f64, v: f64) -> f64 {
        self.ellipse_a * u * u + self.ellipse_b * v * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{ColumnProfile, EnvironmentLaw};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn uniform_four() {
        let t = targets_of(&Model::Heyde(ColumnProfile::uniform_periodic(4).unwrap()));
        assert!(close(t.hfrac, 0.8) && close(t.vfrac, 0.2));
        assert!(close(t.anisotropy, 0.25));
        assert!(close(t.lil_y, 0.2f64.sqrt()));
        assert!(t.qn_const.is_none());
    }

    #[test]
    fn env_constants() {
        let t = targets_of(&Model::Env(EnvironmentLaw::iid(0.5).unwrap()));
        assert!(close(t.hfrac, 2.0 / 3.0) && close(t.vfrac, 1.0 / 3.0));
        assert!((t.qn_const.unwrap() - 0.337_618_62).abs() < 1e-8);
        assert!((t.rn_const.unwrap() - 2.961_921_96).abs() < 1e-8);
        assert!(close(t.lil_x, 1.0 / 1.5f64.sqrt()));
        let one = targets_of(&Model::Env(EnvironmentLaw::iid(1.0).unwrap()));
        assert_eq!(one.diffusion, [[0.5, 0.0], [0.0, 0.5]]);
        assert!(close(one.qn_const.unwrap(), 1.0 / PI));
        assert!(close(one.rn_const.unwrap(), PI));
        let periodic = targets_of(&Model::Env(EnvironmentLaw::periodic(&[1, 0]).unwrap()));
        assert!(periodic.qn_const.is_none() && periodic.rn_const.is_none());
    }

    #[test]
    fn simple_symmetric_heyde_matches_full_density_env() {
        let h = targets_of(&Model::Heyde(ColumnProfile::explicit(vec![0.25]).unwrap()));
        let e = targets_of(&Model::Env(EnvironmentLaw::iid(1.0).unwrap()));
        assert!(close(h.qn_const.unwrap(), e.qn_const.unwrap()));
        assert!(close(h.lil_x, 1.0 / 2f64.sqrt()));
        assert!(close(h.integral_var_x, 1.0 / 6.0));
    }

    #[test]
    fn ellipse_boundary() {
        let t = targets_of(&Model::Heyde(ColumnProfile::explicit(vec![0.25]).unwrap()));
        assert!(close(t.ellipse_form(1.0 / 2f64.sqrt(), 0.0), 1.0));
        assert!(close(t.ellipse_a, 2.0) && close(t.ellipse_b, 2.0));
    }
}
