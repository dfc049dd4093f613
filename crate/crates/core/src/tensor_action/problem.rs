use super::{kempf_ness_differential_modes, kempf_ness_modes, recession_modes, DenseTensor, SUPPORT_TOL};
use crate::flow_solver::FlowProblem;
use crate::pd_geometry::{BoundaryCertificate, ProductPDPoint, TangentBlock};
use crate::spectral_convex::Signature;
use crate::{Error, Result};

/// `Φ_v` on the PD factors of the listed modes (the other modes are left
/// alone, as in the left-right action on a pencil).
#[derive(Clone, Debug)]
pub struct KempfNessProblem {
    v: DenseTensor,
    modes: Vec<usize>,
    support_tol: f64,
}

impl KempfNessProblem {
    /// All modes active; the tensor is normalized on ingestion.
    pub fn new(v: &DenseTensor) -> Result<Self> {
        Self::with_modes(v, (0..v.order()).collect())
    }

    pub fn with_modes(v: &DenseTensor, modes: Vec<usize>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Parameter("at least one active mode is required".into()));
        }
        let mut seen = vec![false; v.order()];
        for &m in &modes {
            if m >= v.order() || seen[m] {
                return Err(Error::Parameter(format!("invalid or repeated mode {m} for order {}", v.order())));
            }
            seen[m] = true;
        }
        Ok(Self { v: v.normalized()?, modes, support_tol: SUPPORT_TOL })
    }

    pub fn with_support_tol(mut self, tol: f64) -> Self {
        self.support_tol = tol;
        self
    }

    pub fn tensor(&self) -> &DenseTensor {
        &self.v
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn support_tol(&self) -> f64 {
        self.support_tol
    }
}

impl FlowProblem for KempfNessProblem {
    fn signature(&self) -> Signature {
        Signature::blocks(&self.modes.iter().map(|&m| self.v.dims()[m]).collect::<Vec<_>>())
    }

    fn value(&self, x: &ProductPDPoint) -> Result<f64> {
        kempf_ness_modes(&self.v, x, &self.modes)
    }

    fn differential(&self, x: &ProductPDPoint) -> Result<TangentBlock> {
        kempf_ness_differential_modes(&self.v, x, &self.modes)
    }

    fn recession(&self, xi: &BoundaryCertificate) -> Result<f64> {
        recession_modes(&self.v, xi, &self.modes, self.support_tol)
    }
}
