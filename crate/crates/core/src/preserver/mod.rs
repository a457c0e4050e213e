//! Linear operators on `Mat_n(F)` and the canonical preservers
//! `A ↦ D1 P(σ1) A P(σ2) D2` and `A ↦ D1 P(σ1) Aᵀ P(σ2) D2`.
//!
//! A [`LinearMap`] is stored as an `n² x n²` matrix acting on row-major
//! vectorizations: column `i·n + j` holds `vec(T(E_ij))`.

mod check;
mod decompose;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::json::{parse_rows, rows_to_text, ScalarText};
use crate::linalg;
use crate::matrix::{Matrix, Permutation};
use crate::sampling;
use crate::subspace::{canonical_basis, classify_maximal, Classification, SubspaceBasis};
use crate::theta::ThetaGraph;

pub use check::{
    check_equality_variant, check_preserves, check_preserves_with_table, check_structural,
    folding_map, CheckMode, EqualityVerdict, PreserverVerdict, StructuralSearch,
};
pub use decompose::{decompose, DecomposeFailure, Decomposition, FailureDoc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    n: usize,
    matrix: Matrix,
}

impl LinearMap {
    pub fn new(n: usize, matrix: Matrix) -> Result<Self> {
        let nn = n * n;
        if (matrix.rows(), matrix.cols()) != (nn, nn) {
            return Err(Error::ShapeMismatch(format!(
                "a map on {n}x{n} matrices needs a {nn}x{nn} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(LinearMap { n, matrix })
    }

    /// The map sending each `E_ij` to `image(i, j)`.
    pub fn from_unit_images(
        n: usize,
        field: FieldSpec,
        mut image: impl FnMut(usize, usize) -> Result<Matrix>,
    ) -> Result<Self> {
        let nn = n * n;
        let mut entries = vec![field.zero(); nn * nn];
        for i in 0..n {
            for j in 0..n {
                let m = image(i, j)?;
                if m.field() != field || (m.rows(), m.cols()) != (n, n) {
                    return Err(Error::ShapeMismatch(format!(
                        "image of E_({},{}) is not an {n}x{n} matrix over {field}",
                        i + 1,
                        j + 1
                    )));
                }
                let col = i * n + j;
                for (row, v) in m.into_entries().into_iter().enumerate() {
                    entries[row * nn + col] = v;
                }
            }
        }
        LinearMap::new(n, Matrix::new(nn, nn, field, entries)?)
    }

    /// The map `A ↦ f(A)` for a function known to be linear.
    pub fn from_fn(n: usize, field: FieldSpec, f: impl Fn(&Matrix) -> Matrix) -> Result<Self> {
        LinearMap::from_unit_images(n, field, |i, j| Ok(f(&Matrix::unit(n, i, j, field)?)))
    }

    pub fn identity(n: usize, field: FieldSpec) -> Self {
        LinearMap {
            n,
            matrix: Matrix::identity(n * n, field),
        }
    }

    pub fn zero(n: usize, field: FieldSpec) -> Self {
        LinearMap {
            n,
            matrix: Matrix::zero(n * n, n * n, field),
        }
    }

    /// `A ↦ Aᵀ`.
    pub fn transposition(n: usize, field: FieldSpec) -> Self {
        LinearMap::from_fn(n, field, Matrix::transpose).expect("square images")
    }

    /// A uniformly random bijective map (resampled until invertible).
    pub fn random_bijective<R: Rng + ?Sized>(n: usize, field: FieldSpec, rng: &mut R) -> Self {
        loop {
            let m = Matrix::from_fn(n * n, n * n, field, |_, _| sampling::random_scalar(field, rng));
            if linalg::is_invertible(&m) {
                return LinearMap { n, matrix: m };
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldSpec {
        self.matrix.field()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `unvec(M · vec(A))`.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix> {
        if a.field() != self.field() {
            return Err(Error::FieldMismatch {
                left: self.field(),
                right: a.field(),
            });
        }
        if (a.rows(), a.cols()) != (self.n, self.n) {
            return Err(Error::ShapeMismatch(format!(
                "map acts on {n}x{n} matrices, got {}x{}",
                a.rows(),
                a.cols(),
                n = self.n
            )));
        }
        let nn = self.n * self.n;
        let v = Matrix::new(nn, 1, a.field(), a.entries().to_vec())?;
        let out = self.matrix.mul(&v)?;
        Matrix::new(self.n, self.n, a.field(), out.into_entries())
    }

    /// `T(E_ij)`, read off column `i·n + j`.
    pub fn unit_image(&self, i: usize, j: usize) -> Matrix {
        let nn = self.n * self.n;
        let col = i * self.n + j;
        let entries = (0..nn).map(|r| self.matrix.get(r, col).clone()).collect();
        Matrix::new(self.n, self.n, self.field(), entries).expect("column shape")
    }

    /// Replaces the image of `E_ij`.
    pub fn with_unit_image(&self, i: usize, j: usize, image: &Matrix) -> Result<Self> {
        let mut m = self.matrix.clone();
        let col = i * self.n + j;
        for (r, v) in image.entries().iter().enumerate() {
            m.set(r, col, v.clone())?;
        }
        LinearMap::new(self.n, m)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearMap) -> Result<Self> {
        LinearMap::new(self.n, self.matrix.mul(&other.matrix)?)
    }

    pub fn is_bijective(&self) -> bool {
        linalg::is_invertible(&self.matrix)
    }

    /// `T(V)` as a subspace.
    pub fn image_of(&self, v: &SubspaceBasis) -> Result<SubspaceBasis> {
        let imgs = v
            .basis()
            .iter()
            .map(|b| self.apply(b))
            .collect::<Result<Vec<_>>>()?;
        SubspaceBasis::span(self.n, self.field(), &imgs)
    }

    pub fn to_doc(&self) -> LinearMapDoc {
        LinearMapDoc {
            n: self.n,
            field: map_field_name(self.field()),
            matrix: rows_to_text(&self.matrix),
            vectorization: ROW_MAJOR.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("map serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LinearMapDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        doc.to_map()
    }
}

pub const ROW_MAJOR: &str = "row-major";

/// `{"n":3,"field":"F3","matrix":[[...9 entries...] x 9],"vectorization":"row-major"}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMapDoc {
    pub n: usize,
    pub field: String,
    pub matrix: Vec<Vec<ScalarText>>,
    pub vectorization: String,
}

impl LinearMapDoc {
    pub fn to_map(&self) -> Result<LinearMap> {
        if self.vectorization != ROW_MAJOR {
            return Err(Error::Parse(format!(
                "unsupported vectorization {:?}",
                self.vectorization
            )));
        }
        let field: FieldSpec = self.field.parse()?;
        let nn = self.n * self.n;
        let entries = parse_rows(&self.matrix, field, nn, nn)?;
        LinearMap::new(self.n, Matrix::new(nn, nn, field, entries)?)
    }
}

/// Field names in map documents use the short `F<p>` form.
fn map_field_name(field: FieldSpec) -> String {
    match field.modulus() {
        Some(p) => format!("F{p}"),
        None => "Q".into(),
    }
}

/// The data `(D1, σ1, transpose flag, σ2, D2)` of a canonical preserver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalPreserver {
    d1: Vec<Scalar>,
    sigma1: Permutation,
    transpose: bool,
    sigma2: Permutation,
    d2: Vec<Scalar>,
}

impl CanonicalPreserver {
    /// Validates lengths, fields and nonzero diagonals. The tuple is kept as
    /// given; see [`CanonicalPreserver::normalized`].
    pub fn new(
        d1: Vec<Scalar>,
        sigma1: Permutation,
        transpose: bool,
        sigma2: Permutation,
        d2: Vec<Scalar>,
    ) -> Result<Self> {
        let n = d1.len();
        if n == 0 || [d2.len(), sigma1.len(), sigma2.len()].iter().any(|&l| l != n) {
            return Err(Error::ShapeMismatch("canonical preserver parts differ in size".into()));
        }
        let field = d1[0].field();
        for d in d1.iter().chain(&d2) {
            if d.field() != field {
                return Err(Error::FieldMismatch {
                    left: field,
                    right: d.field(),
                });
            }
            if d.is_zero() {
                return Err(Error::InvalidRange("diagonal entries must be nonzero".into()));
            }
        }
        Ok(CanonicalPreserver {
            d1,
            sigma1,
            transpose,
            sigma2,
            d2,
        })
    }

    pub fn identity(n: usize, field: FieldSpec) -> Self {
        CanonicalPreserver {
            d1: vec![field.one(); n],
            sigma1: Permutation::identity(n),
            transpose: false,
            sigma2: Permutation::identity(n),
            d2: vec![field.one(); n],
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, field: FieldSpec, rng: &mut R) -> Self {
        CanonicalPreserver {
            d1: sampling::random_diagonal(n, field, rng),
            sigma1: Permutation::random(n, rng),
            transpose: rng.gen_bool(0.5),
            sigma2: Permutation::random(n, rng),
            d2: sampling::random_diagonal(n, field, rng),
        }
    }

    pub fn n(&self) -> usize {
        self.d1.len()
    }

    pub fn field(&self) -> FieldSpec {
        self.d1[0].field()
    }

    pub fn d1(&self) -> &[Scalar] {
        &self.d1
    }

    pub fn d2(&self) -> &[Scalar] {
        &self.d2
    }

    pub fn sigma1(&self) -> &Permutation {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &Permutation {
        &self.sigma2
    }

    pub fn transpose(&self) -> bool {
        self.transpose
    }

    pub fn is_normalized(&self) -> bool {
        self.d1[0].is_one()
    }

    /// Moves the scalar `d1[0]` from `D1` to `D2` so that `d1[0] = 1`. The map
    /// is unchanged since `(cD1) X (c⁻¹D2) = D1 X D2`.
    pub fn normalized(&self) -> Self {
        let c = &self.d1[0];
        let inv = c.inv().expect("nonzero diagonal");
        CanonicalPreserver {
            d1: self.d1.iter().map(|d| d * &inv).collect(),
            sigma1: self.sigma1.clone(),
            transpose: self.transpose,
            sigma2: self.sigma2.clone(),
            d2: self.d2.iter().map(|d| d * c).collect(),
        }
    }

    /// Scales `D1` by `c` and `D2` by `c⁻¹`.
    pub fn regauged(&self, c: &Scalar) -> Result<Self> {
        let inv = c.inv()?;
        CanonicalPreserver::new(
            self.d1.iter().map(|d| d.checked_mul(c)).collect::<Result<_>>()?,
            self.sigma1.clone(),
            self.transpose,
            self.sigma2.clone(),
            self.d2.iter().map(|d| d.checked_mul(&inv)).collect::<Result<_>>()?,
        )
    }

    /// Evaluates `D1 P(σ1) A^{(T)} P(σ2) D2` by matrix products.
    pub fn eval(&self, a: &Matrix) -> Result<Matrix> {
        let field = self.field();
        let left = Matrix::diagonal(&self.d1, field)?.mul(&Matrix::permutation(&self.sigma1, field))?;
        let right = Matrix::permutation(&self.sigma2, field).mul(&Matrix::diagonal(&self.d2, field)?)?;
        let body = if self.transpose { a.transpose() } else { a.clone() };
        left.mul(&body)?.mul(&right)
    }

    pub fn to_doc(&self) -> CanonicalPreserverDoc {
        CanonicalPreserverDoc {
            field: self.field(),
            d1: self.d1.iter().map(Scalar::to_string).collect(),
            sigma1: self.sigma1.images().iter().map(|i| i + 1).collect(),
            transpose_flag: self.transpose,
            sigma2: self.sigma2.images().iter().map(|i| i + 1).collect(),
            d2: self.d2.iter().map(Scalar::to_string).collect(),
        }
    }
}

/// Builds the linear map of a canonical preserver.
pub fn compose_canonical(cp: &CanonicalPreserver) -> LinearMap {
    let n = cp.n();
    LinearMap::from_unit_images(n, cp.field(), |i, j| {
        cp.eval(&Matrix::unit(n, i, j, cp.field())?)
    })
    .expect("canonical images are n x n")
}

/// Canonical preserver as JSON; permutations are 1-based image lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalPreserverDoc {
    pub field: FieldSpec,
    pub d1: Vec<String>,
    pub sigma1: Vec<usize>,
    pub transpose_flag: bool,
    pub sigma2: Vec<usize>,
    pub d2: Vec<String>,
}

impl CanonicalPreserverDoc {
    pub fn to_preserver(&self) -> Result<CanonicalPreserver> {
        let parse = |v: &[String]| -> Result<Vec<Scalar>> {
            v.iter().map(|s| self.field.parse_scalar(s)).collect()
        };
        CanonicalPreserver::new(
            parse(&self.d1)?,
            permutation_from_one_based(&self.sigma1)?,
            self.transpose_flag,
            permutation_from_one_based(&self.sigma2)?,
            parse(&self.d2)?,
        )
    }
}

pub fn permutation_from_one_based(images: &[usize]) -> Result<Permutation> {
    let zero_based = images
        .iter()
        .map(|&i| i.checked_sub(1).ok_or_else(|| Error::InvalidPermutation(images.to_vec())))
        .collect::<Result<Vec<_>>>()?;
    Permutation::new(zero_based).map_err(|_| Error::InvalidPermutation(images.to_vec()))
}

/// The vertex map `V ↦ T(V)` on the maximal subspace graph. Fails if some
/// image is not a canonical subspace with the same support size.
pub fn induced_vertex_map(t: &LinearMap, graph: &ThetaGraph) -> Result<Vec<usize>> {
    let field = t.field();
    let k = graph.k();
    graph
        .vertices()
        .iter()
        .map(|v| {
            let img = t.image_of(&canonical_basis(v, t.n(), field)?)?;
            let target = match classify_maximal(&img, k) {
                Classification::Row(s) => {
                    crate::subspace::CanonicalSubspace::new(crate::subspace::Orientation::Row, s, t.n())?
                }
                Classification::Col(s) => {
                    crate::subspace::CanonicalSubspace::new(crate::subspace::Orientation::Col, s, t.n())?
                }
                Classification::NotCanonical => {
                    return Err(Error::AssertionFailure(format!("image of {v} is not canonical")))
                }
            };
            graph
                .index_of(&target)
                .ok_or_else(|| Error::AssertionFailure(format!("{target} is not a vertex")))
        })
        .collect()
}
