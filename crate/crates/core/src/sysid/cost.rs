//! Rational-approximation costs on St(n,k) and Gr(n,k) and their
//! gradients with respect to `Φ`.

use alloc::vec::Vec;

use crate::arproc::{ManifoldKind, Trajectory};
use crate::manifolds::procrustes_rotation_from_overlap;
use crate::matcore::{chart_inverse, chart_inverse_into, expm, so_basis, AntisymMatrix, OrthoMatrix, PlanarForm};
use crate::{Error, Mat, Result};

/// Cost family, fixed by the manifold of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Stiefel,
    Grassmann,
}

/// Observations `Y_0..Y_N` prepared for cost and gradient evaluation.
#[derive(Debug, Clone)]
pub struct CostContext {
    kind: CostKind,
    n: usize,
    k: usize,
    ys: Vec<Mat>,
    /// `[Y_0 … Y_{N−1}]` and `[Y_1 … Y_N]`, each `n × Nk`.
    prev: Mat,
    next: Mat,
}

/// Per-step quantities at a fixed `Φ`.
///
/// `m = Y_jᵀΦᵀY_{j+1}` (with `Y_j` replaced by its aligned representative
/// on Gr), `a = (I + m)⁻¹`, `c = (I + mᵀ)⁻¹ = aᵀ`.
#[derive(Debug, Clone)]
pub struct StepTerm {
    pub m: Mat,
    pub a: Mat,
    pub c: Mat,
    /// Representative of `Y_j` used for this step (`Y_j·R` on Gr).
    pub y: Mat,
}

impl CostContext {
    pub fn new(traj: &Trajectory) -> Result<Self> {
        let kind = match traj.kind() {
            ManifoldKind::Stiefel { .. } => CostKind::Stiefel,
            ManifoldKind::Grassmann { .. } => CostKind::Grassmann,
            other => {
                return Err(Error::WrongManifold {
                    expected: "stiefel or grassmann",
                    found: other,
                })
            }
        };
        let ys = traj.points().to_vec();
        let (n, k) = traj.kind().point_shape();
        let steps = ys.len() - 1;
        let mut prev = Mat::zeros(n, steps * k);
        let mut next = Mat::zeros(n, steps * k);
        for j in 0..steps {
            prev.columns_mut(j * k, k).copy_from(&ys[j]);
            next.columns_mut(j * k, k).copy_from(&ys[j + 1]);
        }
        Ok(Self {
            kind,
            n,
            k,
            ys,
            prev,
            next,
        })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[Mat] {
        &self.ys
    }

    fn check_phi(&self, phi: &OrthoMatrix) -> Result<()> {
        if phi.dim() != self.n {
            return Err(Error::shape((self.n, self.n), phi.as_matrix().shape()));
        }
        Ok(())
    }

    /// [`StepTerm`] for every transition `j → j+1`.
    pub fn step_terms(&self, phi: &OrthoMatrix) -> Result<Vec<StepTerm>> {
        self.check_phi(phi)?;
        let moved = phi.as_matrix() * &self.prev;
        (0..self.ys.len() - 1)
            .map(|j| {
                let (m, r) = self.chart_overlap(overlap(&moved, &self.next, j, self.k), j)?;
                let (a, c) = self.chart_inverses(&m, j)?;
                let y = match r {
                    Some(r) => &self.ys[j] * r,
                    None => self.ys[j].clone(),
                };
                Ok(StepTerm { m, a, c, y })
            })
            .collect()
    }

    /// `M_j` from the raw overlap `(ΦY_j)ᵀY_{j+1}`; on Gr also the
    /// Procrustes rotation `R_j` that makes it symmetric.
    fn chart_overlap(&self, raw: Mat, j: usize) -> Result<(Mat, Option<Mat>)> {
        match self.kind {
            CostKind::Stiefel => Ok((raw, None)),
            CostKind::Grassmann => {
                let r = procrustes_rotation_from_overlap(raw.transpose()).map_err(|e| e.at_step(j))?;
                Ok((r.tr_mul(&raw), Some(r)))
            }
        }
    }

    fn chart_inverses(&self, m: &Mat, j: usize) -> Result<(Mat, Mat)> {
        let eye = Mat::identity(self.k, self.k);
        let a = chart_inverse(&(eye + m)).map_err(|e| e.at_step(j))?;
        let c = a.transpose();
        Ok((a, c))
    }

    /// `f(Φ)` on St or `F(Φ)` on Gr.
    pub fn cost(&self, phi: &OrthoMatrix) -> Result<f64> {
        self.check_phi(phi)?;
        self.cost_of_stacks(&(phi.as_matrix() * &self.prev), &self.next)
    }

    /// Cost with `M_j = L_jᵀR_j` read from column blocks of `left`, `right`.
    fn cost_of_stacks(&self, left: &Mat, right: &Mat) -> Result<f64> {
        let mut total = 0.0;
        for j in 0..self.ys.len() - 1 {
            let (m, _) = self.chart_overlap(overlap(left, right, j, self.k), j)?;
            let (a, c) = self.chart_inverses(&m, j)?;
            total += self.step_cost(&m, &a, &c);
        }
        Ok(total)
    }

    /// The cost as a sum of squared approximate distances
    /// `d(Y_{j+1}, ΦY_j)²`, evaluated from the differences `ΦY_j − Y_{j+1}`.
    ///
    /// Equal to [`Self::cost`] up to rounding, but without the `O(1)`
    /// cancellation inside `B_j`/`D_j`, so it stays accurate relative to
    /// its own size as the residual goes to zero.
    pub fn composed_cost(&self, phi: &OrthoMatrix) -> Result<f64> {
        self.check_phi(phi)?;
        self.composed_of_stacks(&(phi.as_matrix() * &self.prev), &self.next)
    }

    fn composed_of_stacks(&self, left: &Mat, right: &Mat) -> Result<f64> {
        let (n, k) = (self.n, self.k);
        let block = n * k;
        let (ls, rs) = (left.as_slice(), right.as_slice());
        let mut diff = alloc::vec![0.0; block];
        let mut scratch = Scratch::new(k);
        let mut total = 0.0;
        for j in 0..self.ys.len() - 1 {
            // column-major stacks: block j is contiguous
            let (y, x) = (&ls[j * block..(j + 1) * block], &rs[j * block..(j + 1) * block]);
            total += match self.kind {
                CostKind::Stiefel => {
                    for ((d, a), b) in diff.iter_mut().zip(y).zip(x) {
                        *d = a - b;
                    }
                    stiefel_step(x, &diff, n, k, &mut scratch).map_err(|e| e.at_step(j))?
                }
                CostKind::Grassmann => {
                    // Y − X(XᵀY) is the component of Y off span(X)
                    gram_into(x, y, n, k, &mut scratch.g);
                    diff.copy_from_slice(y);
                    for c in 0..k {
                        let dc = &mut diff[c * n..(c + 1) * n];
                        for r in 0..k {
                            let f = scratch.g[c * k + r];
                            for (d, v) in dc.iter_mut().zip(&x[r * n..(r + 1) * n]) {
                                *d -= f * v;
                            }
                        }
                    }
                    gram_into(&diff, &diff, n, k, &mut scratch.s);
                    grassmann_step(Mat::from_column_slice(k, k, &scratch.s), j)?
                }
            };
        }
        Ok(total)
    }

    /// Composed cost along `τ ↦ Φ0·expm(−τΔ)`.
    pub fn along(&self, phi0: &OrthoMatrix, delta: &AntisymMatrix) -> Result<LineCost<'_>> {
        self.check_phi(phi0)?;
        if delta.dim() != self.n {
            return Err(Error::shape((self.n, self.n), delta.as_matrix().shape()));
        }
        // ‖Φ0 E Y_j − Y_{j+1}‖ = ‖E Y_j − Φ0ᵀY_{j+1}‖, and with E = Q·R·Qᵀ
        // the common factor Q drops out as well
        let pulled = phi0.as_matrix().tr_mul(&self.next);
        let path = match PlanarForm::new(delta) {
            Some(form) => {
                let q = form.basis();
                LinePath::Planar {
                    left: q.tr_mul(&self.prev),
                    right: q.tr_mul(&pulled),
                    form,
                }
            }
            None => LinePath::Dense {
                delta: delta.as_matrix().clone(),
                pulled,
            },
        };
        Ok(LineCost {
            ctx: self,
            phi0: phi0.as_matrix().clone(),
            path,
        })
    }

    fn step_cost(&self, m: &Mat, a: &Mat, c: &Mat) -> f64 {
        let eye = Mat::identity(self.k, self.k);
        let mmt = m * m.transpose();
        match self.kind {
            // tr(A(3I − M − Mᵀ − MMᵀ)C)
            CostKind::Stiefel => {
                let b = &eye * 3.0 - m - m.transpose() - mmt;
                (a * b * c).trace()
            }
            // 4 tr(A(I − MMᵀ)C)
            CostKind::Grassmann => 4.0 * (a * (eye - mmt) * c).trace(),
        }
    }

    /// Directional derivative of the cost at `Φ` along the Euclidean
    /// direction `dphi`, evaluated term by term from the trace formula
    /// with `E_j = Y_jᵀ·dphiᵀ·Y_{j+1}`.
    pub fn directional_derivative(&self, phi: &OrthoMatrix, dphi: &Mat) -> Result<f64> {
        if dphi.shape() != (self.n, self.n) {
            return Err(Error::shape((self.n, self.n), dphi.shape()));
        }
        let terms = self.step_terms(phi)?;
        let eye = Mat::identity(self.k, self.k);
        let mut total = 0.0;
        for (t, ynext) in terms.iter().zip(&self.ys[1..]) {
            let e = (dphi * &t.y).tr_mul(ynext);
            let (a, c, m) = (&t.a, &t.c, &t.m);
            let mmt = m * m.transpose();
            let d_inner = &e * m.transpose() + m * e.transpose();
            total += match self.kind {
                CostKind::Stiefel => {
                    let b = &eye * 3.0 - m - m.transpose() - mmt;
                    let db = &e + e.transpose() + d_inner;
                    -((a * &e * a * &b * c).trace()
                        + (a * db * c).trace()
                        + (a * &b * c * e.transpose() * c).trace())
                }
                CostKind::Grassmann => {
                    let d = eye.clone() - mmt;
                    -4.0 * ((a * &e * a * &d * c).trace()
                        + (a * d_inner * c).trace()
                        + (a * &d * c * e.transpose() * c).trace())
                }
            };
        }
        Ok(total)
    }

    /// `ΦᵀG` with `G` the Euclidean gradient `Σ_j Y_{j+1}P_jᵀY_jᵀ`, where
    /// `P_j` collects the trace-formula terms so that `df_j = ⟨P_j, E_j⟩`.
    pub fn pulled_back_gradient(&self, phi: &OrthoMatrix) -> Result<Mat> {
        let terms = self.step_terms(phi)?;
        let eye = Mat::identity(self.k, self.k);
        let mut h = Mat::zeros(self.n, self.n);
        for (t, ynext) in terms.iter().zip(&self.ys[1..]) {
            let (a, c, m) = (&t.a, &t.c, &t.m);
            let ca = c * a;
            let cam = &ca * m;
            let mt_ca = m.tr_mul(&ca);
            let p = match self.kind {
                CostKind::Stiefel => {
                    let b = &eye * 3.0 - m - m.transpose() - m * m.transpose();
                    let abca = a * &b * &ca;
                    let cabc = &ca * &b * c;
                    -(abca.transpose() + ca.transpose() + &ca + mt_ca.transpose() + cam + cabc)
                }
                CostKind::Grassmann => {
                    let d = eye.clone() - m * m.transpose();
                    let adca = a * &d * &ca;
                    let cadc = &ca * &d * c;
                    (adca.transpose() + mt_ca.transpose() + cam + cadc) * -4.0
                }
            };
            let w = phi.as_matrix().tr_mul(ynext);
            h += w * p.transpose() * t.y.transpose();
        }
        Ok(h)
    }

    /// Gradient in 𝔬(n): `Σ_i ∇f(Φe_i)·e_i` over `basis`, summed in the
    /// given order.
    pub fn gradient_in_basis(&self, phi: &OrthoMatrix, basis: &[AntisymMatrix]) -> Result<AntisymMatrix> {
        let h = self.pulled_back_gradient(phi)?;
        let mut g = Mat::zeros(self.n, self.n);
        for e in basis {
            if e.dim() != self.n {
                return Err(Error::shape((self.n, self.n), e.as_matrix().shape()));
            }
            let coeff = h.dot(e.as_matrix());
            g += e.as_matrix() * coeff;
        }
        Ok(AntisymMatrix::from_matrix_unchecked(g))
    }

    /// Gradient over the canonical basis of 𝔬(n).
    pub fn gradient(&self, phi: &OrthoMatrix) -> Result<AntisymMatrix> {
        if self.n < 2 {
            self.check_phi(phi)?;
            return Ok(AntisymMatrix::zeros(self.n));
        }
        self.gradient_in_basis(phi, &so_basis(self.n)?)
    }
}

/// Smallest principal-angle cosine accepted on Gr.
const MIN_COSINE: f64 = 1e-6;

/// `k×k` work buffers for one pass over the steps.
struct Scratch {
    g: Vec<f64>,
    s: Vec<f64>,
    m: Vec<f64>,
    w: Vec<f64>,
    work: Vec<f64>,
}

impl Scratch {
    fn new(k: usize) -> Self {
        let z = alloc::vec![0.0; k * k];
        Self {
            g: z.clone(),
            s: z.clone(),
            m: z.clone(),
            w: z.clone(),
            work: z,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// `AᵀB` for column-major `n×k` blocks, written column-major into `out`.
fn gram_into(a: &[f64], b: &[f64], n: usize, k: usize, out: &mut [f64]) {
    for c in 0..k {
        let bc = &b[c * n..(c + 1) * n];
        for r in 0..k {
            out[c * k + r] = dot(&a[r * n..(r + 1) * n], bc);
        }
    }
}

/// `d(Y, X)²` on St from `X` and `Y − X`. With `G = Xᵀ(Y − X)`,
/// `S = (Y − X)ᵀ(Y − X)` and `W = (2I + G)⁻¹`, the rational log is
/// `L = 2(Y − X)W` and `½(‖L‖² − ½‖XᵀL‖²) = 2tr(WᵀSW) − ‖GW‖²`.
fn stiefel_step(x: &[f64], diff: &[f64], n: usize, k: usize, t: &mut Scratch) -> Result<f64> {
    gram_into(x, diff, n, k, &mut t.g);
    gram_into(diff, diff, n, k, &mut t.s);
    t.m.copy_from_slice(&t.g);
    for i in 0..k {
        t.m[i * k + i] += 2.0;
    }
    chart_inverse_into(&t.m, k, &mut t.work, &mut t.w)?;
    let (g, s, w) = (&t.g, &t.s, &t.w);
    let mut value = 0.0;
    for c in 0..k {
        let wc = &w[c * k..(c + 1) * k];
        for r in 0..k {
            // (SW)_{rc} and (GW)_{rc}
            let (mut sw, mut gw) = (0.0, 0.0);
            for (i, wi) in wc.iter().enumerate() {
                sw += s[i * k + r] * wi;
                gw += g[i * k + r] * wi;
            }
            value += 2.0 * w[c * k + r] * sw - gw * gw;
        }
    }
    Ok(value)
}

/// `4Σ tan²(θ_i/2)` on Gr from the Gram matrix of the off-span component,
/// whose eigenvalues are `sin²θ_i`.
fn grassmann_step(perp_gram: Mat, j: usize) -> Result<f64> {
    let mut sum = 0.0;
    for &s2 in perp_gram.symmetric_eigenvalues().iter() {
        let s2 = s2.clamp(0.0, 1.0);
        let c = libm::sqrt(1.0 - s2);
        if c < MIN_COSINE {
            return Err(Error::OutOfChart {
                step: Some(j),
                condition: 1.0 / c,
            });
        }
        sum += s2 / ((1.0 + c) * (1.0 + c));
    }
    Ok(4.0 * sum)
}

/// `(L_j)ᵀ R_j` for the `j`-th `k`-column blocks.
fn overlap(left: &Mat, right: &Mat, j: usize, k: usize) -> Mat {
    left.columns(j * k, k).tr_mul(&right.columns(j * k, k))
}

/// Cost restricted to the curve `τ ↦ Φ0·expm(−τΔ)`.
pub struct LineCost<'a> {
    ctx: &'a CostContext,
    phi0: Mat,
    path: LinePath,
}

enum LinePath {
    /// `Δ` in plane-rotation form; stacks already multiplied by `Qᵀ`.
    Planar { form: PlanarForm, left: Mat, right: Mat },
    Dense { delta: Mat, pulled: Mat },
}

impl LineCost<'_> {
    /// Composed cost at `Φ0·expm(−τΔ)`.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        match &self.path {
            LinePath::Planar { form, left, right } => {
                let mut moved = left.clone();
                form.rotate_rows(&mut moved, -tau);
                self.ctx.composed_of_stacks(&moved, right)
            }
            LinePath::Dense { delta, pulled } => {
                let e = expm(&(delta * -tau))?;
                self.ctx.composed_of_stacks(&(e * &self.ctx.prev), pulled)
            }
        }
    }

    /// The point `Φ0·expm(−τΔ)` itself.
    pub fn point(&self, tau: f64) -> Result<OrthoMatrix> {
        let e = match &self.path {
            LinePath::Planar { form, .. } => form.exp(-tau),
            LinePath::Dense { delta, .. } => expm(&(delta * -tau))?,
        };
        Ok(OrthoMatrix::from_matrix_unchecked(&self.phi0 * e))
    }
}

fn context_for(ctx: &CostContext, expected: CostKind) -> Result<&CostContext> {
    if ctx.kind == expected {
        Ok(ctx)
    } else {
        Err(Error::InvalidParameter("cost context is for a different manifold"))
    }
}

/// `f(Φ) = Σ_j tr(A_j B_j C_j)` with `B_j = 3I − M_j − M_jᵀ − M_jM_jᵀ`.
pub fn stiefel_cost(phi: &OrthoMatrix, ctx: &CostContext) -> Result<f64> {
    context_for(ctx, CostKind::Stiefel)?.cost(phi)
}

pub fn stiefel_gradient(phi: &OrthoMatrix, ctx: &CostContext) -> Result<AntisymMatrix> {
    context_for(ctx, CostKind::Stiefel)?.gradient(phi)
}

/// `F(Φ) = Σ_j 4 tr(A_j D_j C_j)` with `D_j = I − M_jM_jᵀ`, after
/// aligning each `Y_j` to its successor.
pub fn grassmann_cost(phi: &OrthoMatrix, ctx: &CostContext) -> Result<f64> {
    context_for(ctx, CostKind::Grassmann)?.cost(phi)
}

pub fn grassmann_gradient(phi: &OrthoMatrix, ctx: &CostContext) -> Result<AntisymMatrix> {
    context_for(ctx, CostKind::Grassmann)?.gradient(phi)
}
