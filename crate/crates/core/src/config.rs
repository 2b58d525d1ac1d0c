use serde::{Deserialize, Serialize};

use crate::error::{HarnackError, Result};

/// Numerical tolerances shared by every module. All values are absolute
/// unless the field doc says otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative threshold below which a kernel eigenvalue counts as zero
    /// (scaled by `max(1, ||K||)`).
    pub rank_tol: f64,
    /// Smallest admissible `sigma_min(I - conj(z) T)`.
    pub resolvent_tol: f64,
    /// Largest principal angle (radians) for two subspaces to count as equal.
    pub angle_tol: f64,
    /// Distance `||lambda| - 1|` under which an eigenvalue is unimodular.
    pub unimodular_tol: f64,
    /// Eigenvalues closer than this are grouped into one cluster.
    pub cluster_tol: f64,
    /// Acceptance threshold for the normalized class-membership margin.
    pub membership_tol: f64,
    /// Acceptance threshold for Loewner-order margins.
    pub dom_tol: f64,
    /// Bisection width target for operator radii.
    pub radius_tol: f64,
    /// Constants above this value count as "not dominated".
    pub c_cap: f64,
    /// Distance to the unit circle for numerical-range witnesses.
    pub boundary_tol: f64,
    /// Upper bound on the minimal kernel eigenvalue at a degenerate boundary point.
    pub degeneracy_tol: f64,
    /// Finest circle resolution used by certification escalation.
    pub max_grid_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            resolvent_tol: 1e-8,
            angle_tol: 1e-7,
            unimodular_tol: 1e-8,
            cluster_tol: 1e-7,
            membership_tol: 1e-9,
            dom_tol: 1e-7,
            radius_tol: 1e-6,
            c_cap: 1e6,
            boundary_tol: 1e-7,
            degeneracy_tol: 1e-4,
            max_grid_points: 1 << 17,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank_tol", self.rank_tol),
            ("resolvent_tol", self.resolvent_tol),
            ("angle_tol", self.angle_tol),
            ("unimodular_tol", self.unimodular_tol),
            ("cluster_tol", self.cluster_tol),
            ("membership_tol", self.membership_tol),
            ("dom_tol", self.dom_tol),
            ("radius_tol", self.radius_tol),
            ("c_cap", self.c_cap),
            ("boundary_tol", self.boundary_tol),
            ("degeneracy_tol", self.degeneracy_tol),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(HarnackError::InvalidConfig(format!(
                    "{name} must be a positive finite number, got {value}"
                )));
            }
        }
        if self.c_cap < 1.0 {
            return Err(HarnackError::InvalidConfig("c_cap must be at least 1".into()));
        }
        if self.max_grid_points < 8 {
            return Err(HarnackError::InvalidConfig(
                "max_grid_points must be at least 8".into(),
            ));
        }
        Ok(())
    }
}
