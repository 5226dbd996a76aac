//! Translation-invariant matrix product states given by a d-tuple of k×k
//! matrices.

mod canonical;
mod transfer;
mod window;

pub use canonical::{canonical_form, correlation_length, expectation, CanonicalMps};
pub use transfer::{is_primitive, normalize, spectral_radius, transfer_op, PrimitivityReport, SpanOutcome, TransferOp, PERIPHERAL_TOL};
pub use window::{brute_force_window, window_density_matrix, DEFAULT_WINDOW_CAP};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug)]
pub struct MpsTensor {
    d: usize,
    k: usize,
    matrices: Vec<CMat>,
    label: String,
}

impl MpsTensor {
    pub fn new(matrices: Vec<CMat>, label: impl Into<String>) -> Result<Self> {
        let d = matrices.len();
        if d == 0 {
            return Err(Error::InvalidArgument("an MPS tensor needs at least one matrix".into()));
        }
        let k = matrices[0].nrows();
        if k == 0 {
            return Err(Error::InvalidArgument("bond dimension must be positive".into()));
        }
        for (mu, v) in matrices.iter().enumerate() {
            if v.dim() != (k, k) {
                return Err(Error::InvalidArgument(format!("matrix {mu} has shape {:?}, expected {k}x{k}", v.dim())));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("matrix {mu} has non-finite entries")));
            }
        }
        Ok(MpsTensor { d, k, matrices, label: label.into() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn matrix(&self, mu: usize) -> &CMat {
        &self.matrices[mu]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scaled(&self, s: C64) -> MpsTensor {
        let matrices = self.matrices.iter().map(|v| v.mapv(|z| z * s)).collect();
        MpsTensor { matrices, ..self.clone() }
    }

    /// v_μ ↦ W v_μ W⁻¹.
    pub fn gauge(&self, w: &CMat) -> Result<MpsTensor> {
        let winv = linalg::inverse(w)?;
        let matrices = self.matrices.iter().map(|v| w.dot(v).dot(&winv)).collect();
        MpsTensor::new(matrices, self.label.clone())
    }

    /// Product v_{μ0} ⋯ v_{μ_{n-1}}.
    pub fn word(&self, mus: &[usize]) -> CMat {
        mus.iter().fold(linalg::eye(self.k), |acc, &m| acc.dot(&self.matrices[m]))
    }

    /// Bond-stacked tensor (v ⊗ v'): physical index μ d' + μ', bond k k'.
    pub fn stack(&self, other: &MpsTensor) -> MpsTensor {
        let mut matrices = Vec::with_capacity(self.d * other.d);
        for a in &self.matrices {
            for b in &other.matrices {
                matrices.push(linalg::kron(a, b));
            }
        }
        MpsTensor { d: self.d * other.d, k: self.k * other.k, matrices, label: format!("{}+{}", self.label, other.label) }
    }

    /// Two-site blocking: physical index μ d + ν carries v_μ v_ν.
    pub fn block2(&self) -> MpsTensor {
        let mut matrices = Vec::with_capacity(self.d * self.d);
        for a in &self.matrices {
            for b in &self.matrices {
                matrices.push(a.dot(b));
            }
        }
        MpsTensor { d: self.d * self.d, k: self.k, matrices, label: format!("{}^2", self.label) }
    }

    /// Spin-1 AKLT tensor in the S3 eigenbasis (m = +1, 0, -1):
    /// v₊ = -√(2/3) σ⁺, v₀ = σ₃/√3, v₋ = √(2/3) σ⁻. This is the Cartesian
    /// tensor σ_μ/√3 rewritten in the spherical basis.
    pub fn aklt() -> MpsTensor {
        let r = (2.0f64 / 3.0).sqrt();
        let z = 1.0 / 3.0f64.sqrt();
        let m = |a: f64, b: f64, c: f64, d: f64| {
            CMat::from_shape_vec((2, 2), vec![C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0)]).unwrap()
        };
        MpsTensor::new(vec![m(0.0, -r, 0.0, 0.0), m(z, 0.0, 0.0, -z), m(0.0, 0.0, r, 0.0)], "aklt").unwrap()
    }

    /// AKLT tensor in the Cartesian basis, v_μ = σ_μ/√3.
    pub fn aklt_cartesian() -> MpsTensor {
        let s = 1.0 / 3.0f64.sqrt();
        let [x, y, z] = pauli();
        MpsTensor::new(vec![x.mapv(|w| w * s), y.mapv(|w| w * s), z.mapv(|w| w * s)], "aklt-cartesian").unwrap()
    }

    /// GHZ-type tensor (|0⟩⟨0|, |1⟩⟨1|).
    pub fn ghz() -> MpsTensor {
        let p0 = CMat::from_shape_vec((2, 2), vec![linalg::ONE, linalg::ZERO, linalg::ZERO, linalg::ZERO]).unwrap();
        let p1 = CMat::from_shape_vec((2, 2), vec![linalg::ZERO, linalg::ZERO, linalg::ZERO, linalg::ONE]).unwrap();
        MpsTensor::new(vec![p0, p1], "ghz").unwrap()
    }

    /// Bond dimension 1 product state on the basis vector `site` of C^d.
    pub fn product_basis(d: usize, site: usize) -> Result<MpsTensor> {
        if d == 0 || site >= d {
            return Err(Error::InvalidArgument(format!("product state needs 0 <= site < d (site {site}, d {d})")));
        }
        let matrices = (0..d).map(|mu| CMat::from_elem((1, 1), if mu == site { linalg::ONE } else { linalg::ZERO })).collect();
        MpsTensor::new(matrices, format!("product:{d}"))
    }

    /// Product state on the middle basis vector ⌊d/2⌋ (the m = 0 state for odd d).
    pub fn product(d: usize) -> Result<MpsTensor> {
        MpsTensor::product_basis(d, d / 2)
    }

    pub fn to_file(&self) -> MpsFile {
        MpsFile {
            d: self.d,
            k: self.k,
            matrices: self
                .matrices
                .iter()
                .map(|v| MatrixRepr::Rows(v.rows().into_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()))
                .collect(),
            label: Some(self.label.clone()),
        }
    }

    pub fn from_file(f: MpsFile) -> Result<MpsTensor> {
        if f.matrices.len() != f.d {
            return Err(Error::Parse(format!("declared d = {} but {} matrices given", f.d, f.matrices.len())));
        }
        let k = f.k;
        let mut mats = Vec::with_capacity(f.d);
        for (mu, m) in f.matrices.into_iter().enumerate() {
            let flat: Vec<[f64; 2]> = match m {
                MatrixRepr::Rows(rows) => {
                    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                        return Err(Error::Parse(format!("matrix {mu} is not {k}x{k}")));
                    }
                    rows.into_iter().flatten().collect()
                }
                MatrixRepr::Flat(v) => v,
            };
            if flat.len() != k * k {
                return Err(Error::Parse(format!("matrix {mu} has {} entries, expected {}", flat.len(), k * k)));
            }
            mats.push(CMat::from_shape_vec((k, k), flat.into_iter().map(|[re, im]| C64::new(re, im)).collect()).unwrap());
        }
        MpsTensor::new(mats, f.label.unwrap_or_else(|| "file".into()))
    }

    pub fn from_json(text: &str) -> Result<MpsTensor> {
        MpsTensor::from_file(serde_json::from_str(text)?)
    }
}

/// Pauli matrices σ1, σ2, σ3.
pub fn pauli() -> [CMat; 3] {
    let (o, z, i) = (linalg::ONE, linalg::ZERO, linalg::I);
    [
        CMat::from_shape_vec((2, 2), vec![z, o, o, z]).unwrap(),
        CMat::from_shape_vec((2, 2), vec![z, -i, i, z]).unwrap(),
        CMat::from_shape_vec((2, 2), vec![o, z, z, -o]).unwrap(),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRepr {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpsFile {
    pub d: usize,
    pub k: usize,
    pub matrices: Vec<MatrixRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}
