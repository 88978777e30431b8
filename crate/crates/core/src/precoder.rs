//! Position-based joint transmit precoders.
//!
//! Every zero-forcing variant is the orthogonal projection of a target vector
//! onto the complement of a constraint span:
//!
//! ```text
//! e0 = (I - E (E^H E)^+ E^H) d
//! ```
//!
//! and only the choice of `d` and of the columns of `E` differs. The MPDR
//! precoder is `R^+ d / (d^H R^+ d)` with `R = Ẽ Ẽ^H`; it is evaluated through
//! the small Gram matrix, using `(Ẽ Ẽ^H)^+ = Ẽ (Ẽ^H Ẽ)^{+2} Ẽ^H`.

use nalgebra::DVector;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{all_finite, cmul, cmul_adjoint, modulus, norm_sqr, CMatrix, CVector, Real};

/// Relative singular-value cutoff used for every Gram inversion.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderMethod {
    Zfp,
    ZfpD,
    Mpdr,
    ZfpGeneral,
    ConventionalZf,
}

impl PrecoderMethod {
    pub const ALL: [PrecoderMethod; 5] = [
        PrecoderMethod::Zfp,
        PrecoderMethod::ZfpD,
        PrecoderMethod::Mpdr,
        PrecoderMethod::ZfpGeneral,
        PrecoderMethod::ConventionalZf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PrecoderMethod::Zfp => "zfp",
            PrecoderMethod::ZfpD => "zfp_d",
            PrecoderMethod::Mpdr => "mpdr",
            PrecoderMethod::ZfpGeneral => "zfp_general",
            PrecoderMethod::ConventionalZf => "conventional_zf",
        }
    }

    /// Whether only the first array takes part in transmission.
    pub fn single_array(&self) -> bool {
        matches!(self, PrecoderMethod::ConventionalZf)
    }
}

impl std::fmt::Display for PrecoderMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PrecoderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrecoderMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown precoder `{s}`")))
    }
}

/// Rank used by the truncated pseudo-inverse and whether any singular value
/// was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InverseReport {
    pub rank: usize,
    pub truncated: bool,
}

/// Truncated-SVD pseudo-inverse: singular values below `rel_tol * s_max` are
/// dropped.
pub fn regularized_inverse<T: Real>(a: &CMatrix<T>, rel_tol: T) -> Result<(CMatrix<T>, InverseReport)> {
    if !all_finite(a.iter().copied()) {
        return Err(Error::NonFinite("matrix to invert"));
    }
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Ok((CMatrix::zeros(cols, rows), InverseReport::default()));
    }
    let max_iter = 1000 * rows.max(cols);
    let svd = a
        .clone()
        .try_svd(true, true, T::eps(), max_iter)
        .ok_or(Error::SvdDivergence)?;
    let u = svd.u.as_ref().ok_or(Error::SvdDivergence)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdDivergence)?;
    let s = &svd.singular_values;
    let s_max = s.iter().copied().fold(T::zero(), |m, x| if x > m { x } else { m });
    let cutoff = rel_tol * s_max;
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cutoff && s[i] > T::zero()).collect();
    let report = InverseReport {
        rank: keep.len(),
        truncated: keep.len() < rows.min(cols),
    };
    // pinv = V diag(1/s) U^H over the kept subspace
    let mut v_scaled = CMatrix::zeros(cols, keep.len());
    let mut u_kept = CMatrix::zeros(rows, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let inv = Complex::new(T::one() / s[i], T::zero());
        v_scaled.set_column(c, &(v_t.row(i).adjoint() * inv));
        u_kept.set_column(c, &u.column(i));
    }
    let pinv = cmul(&v_scaled, &u_kept.adjoint());
    Ok((pinv, report))
}

/// Pseudo-inverse of a Hermitian positive semidefinite matrix such as a Gram
/// matrix, from its eigendecomposition. Eigenvalues at or below
/// `rel_tol * max` are discarded, matching [`regularized_inverse`] on the same
/// input.
pub fn hermitian_inverse<T: Real>(g: &CMatrix<T>, rel_tol: T) -> Result<(CMatrix<T>, InverseReport)> {
    if !all_finite(g.iter().copied()) {
        return Err(Error::NonFinite("matrix to invert"));
    }
    let n = g.nrows();
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), InverseReport::default()));
    }
    let eig = g
        .clone()
        .try_symmetric_eigen(T::eps(), 1000 * n)
        .ok_or(Error::SvdDivergence)?;
    let lambda = &eig.eigenvalues;
    let top = lambda
        .iter()
        .copied()
        .fold(T::zero(), |m, x| if x.abs() > m { x.abs() } else { m });
    let cutoff = rel_tol * top;
    let keep: Vec<usize> = (0..n)
        .filter(|&i| lambda[i] > cutoff && lambda[i] > T::zero())
        .collect();
    let report = InverseReport {
        rank: keep.len(),
        truncated: keep.len() < n,
    };
    let mut v_scaled = CMatrix::zeros(n, keep.len());
    let mut v_kept = CMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        v_scaled.set_column(c, &(col * Complex::new(T::one() / lambda[i], T::zero())));
        v_kept.set_column(c, &col);
    }
    Ok((cmul(&v_scaled, &v_kept.adjoint()), report))
}

/// Target vector and constraint vectors of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet<T: Real> {
    pub desired: CVector<T>,
    pub interferers: Vec<CVector<T>>,
    pub derivative_vectors: Vec<CVector<T>>,
}

impl<T: Real> ConstraintSet<T> {
    pub fn new(desired: CVector<T>, interferers: Vec<CVector<T>>) -> Self {
        Self {
            desired,
            interferers,
            derivative_vectors: Vec::new(),
        }
    }

    pub fn with_derivatives(mut self, derivative_vectors: Vec<CVector<T>>) -> Self {
        self.derivative_vectors = derivative_vectors;
        self
    }

    pub fn elements(&self) -> usize {
        self.desired.len()
    }

    fn validate(&self) -> Result<()> {
        let m = self.elements();
        for v in self.interferers.iter().chain(&self.derivative_vectors) {
            if v.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    found: v.len(),
                });
            }
        }
        if !all_finite(
            self.desired
                .iter()
                .chain(self.interferers.iter().flat_map(|v| v.iter()))
                .chain(self.derivative_vectors.iter().flat_map(|v| v.iter()))
                .copied(),
        ) {
            return Err(Error::NonFinite("constraint set"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder<T: Real> {
    pub weights: CVector<T>,
    pub method: PrecoderMethod,
    pub report: InverseReport,
}

fn columns<T: Real>(m: usize, vs: &[&CVector<T>]) -> CMatrix<T> {
    let mut e = CMatrix::zeros(m, vs.len());
    for (j, v) in vs.iter().enumerate() {
        e.set_column(j, v);
    }
    e
}

/// Column matrix with every nonzero column scaled to unit norm. Projections
/// do not depend on column scale, and equal norms keep the Gram matrix from
/// mixing steering vectors with much longer derivative vectors.
fn unit_columns<T: Real>(m: usize, vs: &[&CVector<T>]) -> CMatrix<T> {
    let mut e = CMatrix::zeros(m, vs.len());
    for (j, v) in vs.iter().enumerate() {
        let n = v.norm();
        if n > T::zero() {
            e.set_column(j, &v.unscale(n));
        }
    }
    e
}

fn is_degenerate<T: Real>(v: &CVector<T>) -> bool {
    norm_sqr(v) <= T::eps() * T::eps()
}

/// Projects `target` onto the orthogonal complement of `constraints`.
///
/// Numerically-zero constraint vectors carry no null and are skipped. The
/// projection is applied twice; the second pass removes the residual left by
/// rounding in an ill-conditioned Gram inverse.
pub fn project_out<T: Real>(
    target: &CVector<T>,
    constraints: &[&CVector<T>],
    rel_tol: T,
) -> Result<(CVector<T>, InverseReport)> {
    let m = target.len();
    let active: Vec<&CVector<T>> = constraints.iter().copied().filter(|v| !is_degenerate(*v)).collect();
    if active.len() >= m {
        return Err(Error::InfeasibleConstraints {
            constraints: active.len(),
            elements: m,
        });
    }
    if active.is_empty() {
        return Ok((target.clone(), InverseReport::default()));
    }
    let e = unit_columns(m, &active);
    let gram = cmul_adjoint(&e, &e);
    let (g_inv, report) = hermitian_inverse(&gram, rel_tol)?;
    let project = |x: &CVector<T>| -> CVector<T> { x - &e * (&g_inv * (e.adjoint() * x)) };
    let once = project(target);
    Ok((project(&once), report))
}

fn finish<T: Real>(weights: CVector<T>, method: PrecoderMethod, report: InverseReport) -> Precoder<T> {
    Precoder {
        weights,
        method,
        report,
    }
}

/// Zero-forcing precoder: nulls every (combined) interferer steering vector.
pub fn zfp<T: Real>(cs: &ConstraintSet<T>) -> Result<Precoder<T>> {
    cs.validate()?;
    let cons: Vec<&CVector<T>> = cs.interferers.iter().collect();
    let (w, r) = project_out(&cs.desired, &cons, T::lit(DEFAULT_REL_TOL))?;
    Ok(finish(w, PrecoderMethod::Zfp, r))
}

/// Zero-forcing with first-order derivative nulls, constraint matrix
/// `[interferers | derivative_vectors]`.
pub fn zfp_d<T: Real>(cs: &ConstraintSet<T>) -> Result<Precoder<T>> {
    cs.validate()?;
    let cons: Vec<&CVector<T>> = cs.interferers.iter().chain(&cs.derivative_vectors).collect();
    let (w, r) = project_out(&cs.desired, &cons, T::lit(DEFAULT_REL_TOL))?;
    Ok(finish(w, PrecoderMethod::ZfpD, r))
}

/// Single-array zero forcing; the constraint set holds single-array vectors.
pub fn conventional_zf<T: Real>(cs: &ConstraintSet<T>) -> Result<Precoder<T>> {
    let mut p = zfp(cs)?;
    p.method = PrecoderMethod::ConventionalZf;
    Ok(p)
}

/// Per-array zero forcing: every `e_Ln` and `e_Rn` is nulled on its own,
/// target `e_L0 + e_R0`.
pub fn zfp_general<T: Real>(
    desired_left: &CVector<T>,
    desired_right: &CVector<T>,
    interferers_left: &[CVector<T>],
    interferers_right: &[CVector<T>],
) -> Result<Precoder<T>> {
    if interferers_left.len() != interferers_right.len() {
        return Err(Error::LengthMismatch {
            expected: interferers_left.len(),
            found: interferers_right.len(),
        });
    }
    if desired_left.len() != desired_right.len() {
        return Err(Error::LengthMismatch {
            expected: desired_left.len(),
            found: desired_right.len(),
        });
    }
    let interferers = interferers_left
        .iter()
        .zip(interferers_right)
        .flat_map(|(l, r)| [l.clone(), r.clone()])
        .collect();
    let cs = ConstraintSet::new(desired_left + desired_right, interferers);
    cs.validate()?;
    let cons: Vec<&CVector<T>> = cs.interferers.iter().collect();
    let (w, r) = project_out(&cs.desired, &cons, T::lit(DEFAULT_REL_TOL))?;
    Ok(finish(w, PrecoderMethod::ZfpGeneral, r))
}

/// Minimum-power distortionless response precoder, `w^H d = 1`.
pub fn mpdr<T: Real>(cs: &ConstraintSet<T>) -> Result<Precoder<T>> {
    cs.validate()?;
    if is_degenerate(&cs.desired) {
        return Err(Error::ZeroDesired);
    }
    let m = cs.elements();
    let mut cols: Vec<&CVector<T>> = cs.interferers.iter().collect();
    cols.push(&cs.desired);
    let e = columns(m, &cols);
    let gram = cmul_adjoint(&e, &e);
    let (g_inv, report) = hermitian_inverse(&gram, T::lit(DEFAULT_REL_TOL))?;
    let r_inv_d = &e * (&g_inv * (&g_inv * (e.adjoint() * &cs.desired)));
    let w = distortionless(&cs.desired, r_inv_d)?;
    Ok(finish(w, PrecoderMethod::Mpdr, report))
}

fn distortionless<T: Real>(d: &CVector<T>, r_inv_d: CVector<T>) -> Result<CVector<T>> {
    let denom = d.dotc(&r_inv_d);
    if !(modulus(denom) > T::zero()) || !denom.re.finite() {
        return Err(Error::ZeroDesired);
    }
    Ok(r_inv_d / denom)
}

/// Precoders for every user of a scenario at once.
///
/// `columns` holds candidate constraint vectors; user `k` targets the sum of
/// its own group `groups[k]` and must null every column outside that group
/// together with all `shared` columns. With `B` the unit-norm column matrix,
/// `W = B (B^H B)^{-1}`, `S` the group and `n` its column norms, the target is
/// `B_S n` and its leave-group-out projection equals `W_S [G^{-1}]_{SS}^{-1} n`,
/// so one Gram inverse serves every user. Users whose result fails the nulling check
/// (or any truncated inverse) fall back to [`project_out`].
pub fn leave_group_out<T: Real>(
    columns_in: &[CVector<T>],
    groups: &[Vec<usize>],
    shared: &[CVector<T>],
    rel_tol: T,
) -> Result<Vec<(CVector<T>, InverseReport)>> {
    let Some(first) = columns_in.first() else {
        return Ok(Vec::new());
    };
    let m = first.len();
    let all: Vec<&CVector<T>> = columns_in.iter().chain(shared).collect();
    if let Some(bad) = all.iter().find(|v| v.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    let b = unit_columns(m, &all);
    let gram = cmul_adjoint(&b, &b);
    let (g_inv, report) = hermitian_inverse(&gram, rel_tol)?;
    // only the non-shared columns of W are ever combined
    let g_inv_own = g_inv.columns(0, columns_in.len()).into_owned();
    let w = cmul(&b, &g_inv_own);
    // B^H W = G G^{-1}; its off-group entries are the achieved nulls of the
    // unit-norm columns
    let check = cmul(&gram, &g_inv_own);
    let norms: Vec<T> = all.iter().map(|v| v.norm()).collect();
    let tol = T::lit(1e-11) * T::lit(m as f64);

    let mut out = Vec::with_capacity(groups.len());
    for group in groups {
        let target = group.iter().fold(CVector::zeros(m), |acc, &j| acc + &columns_in[j]);
        let fallback = |()| -> Result<(CVector<T>, InverseReport)> {
            let cons: Vec<&CVector<T>> = (0..all.len()).filter(|j| !group.contains(j)).map(|j| all[j]).collect();
            project_out(&target, &cons, rel_tol)
        };
        if report.truncated || all.len() >= m {
            out.push(fallback(())?);
            continue;
        }
        let s = group.len();
        let mut sub = CMatrix::zeros(s, s);
        for (a, &ja) in group.iter().enumerate() {
            for (c, &jc) in group.iter().enumerate() {
                sub[(a, c)] = g_inv[(ja, jc)];
            }
        }
        let coeff = match sub.try_inverse() {
            Some(inv) => inv * CVector::from_iterator(s, group.iter().map(|&j| Complex::new(norms[j], T::zero()))),
            None => {
                out.push(fallback(())?);
                continue;
            }
        };
        let mut e = CVector::zeros(m);
        for (a, &j) in group.iter().enumerate() {
            e += w.column(j) * coeff[a];
        }
        let e_norm = e.norm().max(T::one());
        let nulls_ok = (0..all.len()).filter(|j| !group.contains(j)).all(|j| {
            let r = group
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (a, &c)| {
                    acc + check[(j, c)] * coeff[a]
                });
            modulus(r) <= tol * e_norm
        });
        if nulls_ok && all_finite(e.iter().copied()) {
            out.push((e, report));
        } else {
            out.push(fallback(())?);
        }
    }
    Ok(out)
}

/// MPDR precoders for every user sharing the same constraint matrix
/// `Ẽ = [d_0 .. d_N]`.
pub fn mpdr_all<T: Real>(desired: &[CVector<T>], rel_tol: T) -> Result<Vec<(CVector<T>, InverseReport)>> {
    let Some(first) = desired.first() else {
        return Ok(Vec::new());
    };
    let m = first.len();
    let refs: Vec<&CVector<T>> = desired.iter().collect();
    if let Some(bad) = refs.iter().find(|v| v.len() != m) {
        return Err(Error::LengthMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    let e = columns(m, &refs);
    let gram = cmul_adjoint(&e, &e);
    let (g_inv, report) = hermitian_inverse(&gram, rel_tol)?;
    let r_inv_cols = cmul(&e, &cmul(&g_inv, &cmul(&g_inv, &gram)));
    desired
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if is_degenerate(d) {
                return Err(Error::ZeroDesired);
            }
            let col: DVector<Complex<T>> = r_inv_cols.column(k).into_owned();
            Ok((distortionless(d, col)?, report))
        })
        .collect()
}
