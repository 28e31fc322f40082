//! Nystrom discretization of Birman-Schwinger operators for compactly
//! supported radial potentials, and classification of the zero-energy
//! threshold.

use std::f64::consts::PI;

use faer::Side;

use crate::geom::{dist, norm, Vec3};
use crate::green::{free_resolvent_matrix, QuadGrid, SingularityRule};
use crate::linalg::{CMat, RMat};
use crate::quad::legendre_on;
use crate::{Error, Result, C64};

/// Attractive radial potentials supported in a ball about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `-depth` on `|x| <= radius`.
    Well { depth: f64, radius: f64 },
    /// `-depth exp(-|x|^2 / width^2)` truncated to `|x| <= radius`.
    Gaussian { depth: f64, width: f64, radius: f64 },
}

impl Potential {
    pub fn well(depth: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad well depth {depth} / radius {radius}")));
        }
        Ok(Potential::Well { depth, radius })
    }

    /// Gaussian truncated at three widths.
    pub fn gaussian(depth: f64, width: f64) -> Result<Self> {
        Self::gaussian_truncated(depth, width, 3.0 * width)
    }

    pub fn gaussian_truncated(depth: f64, width: f64, radius: f64) -> Result<Self> {
        if !(width > 0.0 && radius > 0.0 && depth.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad gaussian depth {depth} / width {width}")));
        }
        Ok(Potential::Gaussian { depth, width, radius })
    }

    /// Parses `well(depth,radius)`, `gaussian(depth,width)` or
    /// `gaussian(depth,width,radius)`.
    pub fn parse(label: &str) -> Result<Self> {
        let bad = || Error::BadLabel(label.to_string());
        let s = label.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim();
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (name, args.as_slice()) {
            ("well", [d, r]) => Self::well(*d, *r),
            ("gaussian", [d, w]) => Self::gaussian(*d, *w),
            ("gaussian", [d, w, r]) => Self::gaussian_truncated(*d, *w, *r),
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Potential::Well { depth, radius } => format!("well({depth},{radius})"),
            Potential::Gaussian { depth, width, radius } => format!("gaussian({depth},{width},{radius})"),
        }
    }

    pub fn depth(&self) -> f64 {
        match *self {
            Potential::Well { depth, .. } | Potential::Gaussian { depth, .. } => depth,
        }
    }

    pub fn with_depth(&self, d: f64) -> Self {
        match *self {
            Potential::Well { radius, .. } => Potential::Well { depth: d, radius },
            Potential::Gaussian { width, radius, .. } => Potential::Gaussian { depth: d, width, radius },
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            Potential::Well { radius, .. } | Potential::Gaussian { radius, .. } => radius,
        }
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        match *self {
            Potential::Well { depth, radius } => {
                if r <= radius {
                    -depth
                } else {
                    0.0
                }
            }
            Potential::Gaussian { depth, width, radius } => {
                if r <= radius {
                    -depth * (-(r * r) / (width * width)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.eval_radial(norm(x))
    }
}

/// Product grid on the support ball with the factorization `V = b a`,
/// `a = |V|^{1/2}`, `b = |V|^{1/2} sgn V`, sampled at the nodes.
#[derive(Debug, Clone)]
pub struct NystromGrid {
    pub potential: Potential,
    pub resolution: usize,
    pub grid: QuadGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Gauss-Legendre in `r` and `cos(theta)` with `resolution / 2` points each
/// and the trapezoid rule in `phi` with `resolution` points.
pub fn build_nystrom(potential: &Potential, resolution: usize) -> Result<NystromGrid> {
    if resolution < 4 {
        return Err(Error::InvalidConfig(format!("resolution {resolution} is too coarse (need >= 4)")));
    }
    let radius = potential.support_radius();
    let nr = resolution.div_ceil(2);
    let nt = resolution.div_ceil(2);
    let np = resolution;
    let (rs, wr) = legendre_on(nr, 0.0, radius);
    let (ct, wt) = legendre_on(nt, -1.0, 1.0);
    let mut nodes = Vec::with_capacity(nr * nt * np);
    let mut weights = Vec::with_capacity(nr * nt * np);
    for (r, w_r) in rs.iter().zip(&wr) {
        for (c, w_t) in ct.iter().zip(&wt) {
            let s = (1.0 - c * c).sqrt();
            for j in 0..np {
                let phi = 2.0 * PI * j as f64 / np as f64;
                nodes.push([r * s * phi.cos(), r * s * phi.sin(), r * c]);
                weights.push(w_r * r * r * w_t * 2.0 * PI / np as f64);
            }
        }
    }
    let grid = QuadGrid::new(nodes, weights)?;
    let v: Vec<f64> = grid.nodes.iter().map(|x| potential.eval(*x)).collect();
    let a: Vec<f64> = v.iter().map(|v| v.abs().sqrt()).collect();
    let b: Vec<f64> = v.iter().zip(&a).map(|(v, a)| a * v.signum() * (*v != 0.0) as i32 as f64).collect();
    Ok(NystromGrid { potential: *potential, resolution, grid, a, b })
}

impl NystromGrid {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn rule(&self) -> SingularityRule {
        SingularityRule::BallSubtraction { center: [0.0; 3], radius: self.potential.support_radius() }
    }

    /// Kernel matrix of `G_0(kappa)` with weights folded in.
    pub fn kernel(&self, kappa: C64) -> CMat {
        free_resolvent_matrix(&self.grid, kappa, self.rule())
    }

    pub fn sign_definite(&self) -> bool {
        self.b.iter().zip(&self.a).all(|(b, a)| *b == -a) || self.b.iter().zip(&self.a).all(|(b, a)| b == a)
    }

    /// `L(phi) = (1 / 4 pi) int a phi`.
    pub fn l_functional(&self, phi: &[f64]) -> f64 {
        self.a.iter().zip(phi).zip(&self.grid.weights).map(|((a, p), w)| a * p * w).sum::<f64>() / (4.0 * PI)
    }

    /// `(f, g)` in the discrete `L^2` of the grid, real case.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.grid.weights).map(|((f, g), w)| f * g * w).sum()
    }

    pub fn a_norm(&self) -> f64 {
        self.dot(&self.a, &self.a).sqrt()
    }

    /// Symmetrized static operator `W^{1/2} K_0 W^{-1/2}` sandwiched by
    /// `a`, i.e. the matrix of `a D_0 a` in an orthonormal basis of the grid.
    fn sym_static(&self, k0: &CMat) -> RMat {
        let n = self.len();
        let w = &self.grid.weights;
        RMat::from_fn(n, n, |i, j| self.a[i] * k0[(i, j)].re * (w[i] / w[j]).sqrt() * self.a[j])
    }
}

/// Dense operator acting on nodal vectors (block structure recorded for
/// multi-centre systems).
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: CMat,
    pub blocks: Vec<usize>,
}

/// `lambda B G_0(k) A` as a nodal matrix.
pub fn bs_matrix(grid: &NystromGrid, lambda: f64, k: C64) -> DiscreteOperator {
    let n = grid.len();
    let kern = grid.kernel(k);
    let matrix = CMat::from_fn(n, n, |i, j| kern[(i, j)] * (lambda * grid.b[i] * grid.a[j]));
    DiscreteOperator { matrix, blocks: vec![n] }
}

/// `b D_0 a` and `b D_1 a`, the first two terms of the low-energy expansion
/// `b G_0(k) a = b D_0 a + i k b D_1 a + ...` with `D_1 = 1 / (4 pi)`.
pub struct ZeroEnergyTerms {
    pub d0: DiscreteOperator,
    pub d1: DiscreteOperator,
}

pub fn zero_energy_terms(grid: &NystromGrid) -> ZeroEnergyTerms {
    let n = grid.len();
    let d0 = bs_matrix(grid, 1.0, C64::new(0.0, 0.0));
    let w = &grid.grid.weights;
    let d1 = CMat::from_fn(n, n, |i, j| C64::new(grid.b[i] * grid.a[j] * w[j] / (4.0 * PI), 0.0));
    ZeroEnergyTerms { d0, d1: DiscreteOperator { matrix: d1, blocks: vec![n] } }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `Q_0` is invertible: no zero-energy resonance or eigenvalue.
    Regular,
    /// Zero is a resonance and not an eigenvalue.
    ResonanceOnly,
    /// Zero is an eigenvalue and not a resonance.
    EigenvalueOnly,
    /// Zero is both a resonance and an eigenvalue.
    Mixed,
    /// The refinement trace does not settle the question.
    Indeterminate,
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    /// Smallest singular values below this are candidates for the kernel.
    pub sigma_threshold: f64,
    /// Candidates must shrink by at least this factor per refinement step...
    pub refinement_ratio: f64,
    /// ...unless they are already below this floor.
    pub zero_floor: f64,
    /// `L(phi)` counts as zero below this fraction of its Cauchy-Schwarz bound.
    pub l_tolerance: f64,
    /// Number of smallest singular values reported per level.
    pub reported: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { sigma_threshold: 5e-2, refinement_ratio: 2.0, zero_floor: 1e-9, l_tolerance: 1e-6, reported: 4 }
    }
}

pub const DEFAULT_RESOLUTIONS: [usize; 2] = [12, 16];

#[derive(Debug, Clone)]
pub struct RefinementLevel {
    pub resolution: usize,
    pub nodes: usize,
    /// Smallest singular values of `Q_0`, ascending.
    pub smallest: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub classification: Classification,
    pub trace: Vec<RefinementLevel>,
    /// Grid of the finest level; all nodal vectors below live on it.
    pub grid: NystromGrid,
    /// Kernel of `Q_0`, normalized by `(a phi_i, D_0 a phi_j) = delta_ij`,
    /// with `phi_2, ...` in the kernel of `L` and `L(phi_1) > 0`.
    pub phi: Vec<Vec<f64>>,
    /// Dual basis `psi_j = a D_0 a phi_j` of the adjoint kernel.
    pub psi: Vec<Vec<f64>>,
    pub l_phi1: f64,
    pub coupling_slope: f64,
    /// `-lambda'(0) / |(a, phi_1)|^2`; only present when zero is a resonance.
    pub alpha: Option<f64>,
    /// Condition number of the Gram matrix of the raw kernel vectors.
    pub gram_condition: f64,
    pub warnings: Vec<String>,
}

impl ThresholdReport {
    pub fn is_resonant(&self) -> bool {
        matches!(self.classification, Classification::ResonanceOnly | Classification::Mixed)
    }

    pub fn finest_sigma(&self) -> f64 {
        self.trace.last().and_then(|l| l.smallest.first().copied()).unwrap_or(f64::NAN)
    }

    /// `S = sum_j phi_j <., psi_j>` as a nodal matrix.
    pub fn riesz_projection(&self) -> CMat {
        let n = self.grid.len();
        let w = &self.grid.grid.weights;
        CMat::from_fn(n, n, |i, j| {
            let s: f64 = self.phi.iter().zip(&self.psi).map(|(p, q)| p[i] * q[j] * w[j]).sum();
            C64::new(s, 0.0)
        })
    }
}

struct Spectrum {
    /// Ascending singular values.
    sigma: Vec<f64>,
    /// Right singular vectors in the orthonormal (weight-scaled) basis,
    /// matching `sigma`.
    vectors: Vec<Vec<f64>>,
}

/// Singular values of `Q_0` in the weighted inner product with the vectors
/// of the `count` smallest.
fn q0_spectrum(grid: &NystromGrid, count: usize) -> Result<Spectrum> {
    let n = grid.len();
    let k0 = grid.kernel(C64::new(0.0, 0.0));
    let s = grid.sym_static(&k0);
    let signs: Vec<f64> = grid.b.iter().map(|b| if *b < 0.0 { -1.0 } else { 1.0 }).collect();
    if grid.sign_definite() {
        let sg = signs[0];
        let q = RMat::from_fn(n, n, |i, j| (i == j) as i32 as f64 + sg * 0.5 * (s[(i, j)] + s[(j, i)]));
        let eig = q
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Precondition(format!("eigen-decomposition failed: {e:?}")))?;
        let vals: Vec<f64> = eig.S().column_vector().iter().copied().collect();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|x, y| vals[*x].abs().total_cmp(&vals[*y].abs()));
        let u = eig.U();
        Ok(Spectrum {
            sigma: idx.iter().map(|i| vals[*i].abs()).collect(),
            vectors: idx.iter().take(count).map(|i| (0..n).map(|r| u[(r, *i)]).collect()).collect(),
        })
    } else {
        let q = RMat::from_fn(n, n, |i, j| (i == j) as i32 as f64 + signs[i] * s[(i, j)]);
        let svd = q.svd().map_err(|e| Error::Precondition(format!("SVD failed: {e:?}")))?;
        let vals: Vec<f64> = svd.S().column_vector().iter().copied().collect();
        let v = svd.V();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|x, y| vals[*x].total_cmp(&vals[*y]));
        Ok(Spectrum {
            sigma: idx.iter().map(|i| vals[*i]).collect(),
            vectors: idx.iter().take(count).map(|i| (0..n).map(|r| v[(r, *i)]).collect()).collect(),
        })
    }
}

/// Classifies the threshold behaviour of `lambda(eps) V` at `eps = 0` by
/// the smallest singular values of `Q_0 = 1 + b D_0 a` along a ladder of
/// resolutions.
///
/// A singular value counts as zero when, at the finest level, it is below
/// the threshold and either shrinks by the refinement ratio at every step or
/// is already below the numerical floor.  The kernel is then normalized and
/// split against `L` to decide between the resonance and eigenvalue cases.
pub fn threshold_classify(
    potential: &Potential,
    coupling_slope: f64,
    resolutions: &[usize],
    opts: ThresholdOptions,
) -> Result<ThresholdReport> {
    if resolutions.is_empty() {
        return Err(Error::InvalidConfig("empty resolution ladder".into()));
    }
    let mut trace = Vec::new();
    let mut last = None;
    for &res in resolutions {
        let grid = build_nystrom(potential, res)?;
        let spec = q0_spectrum(&grid, opts.reported.max(1))?;
        trace.push(RefinementLevel {
            resolution: res,
            nodes: grid.len(),
            smallest: spec.sigma.iter().take(opts.reported.max(1)).copied().collect(),
        });
        last = Some((grid, spec));
    }
    let (grid, spec) = last.unwrap();
    let mut warnings = Vec::new();

    let mut dim = 0;
    for i in 0..spec.vectors.len() {
        let fine = spec.sigma[i];
        if fine >= opts.sigma_threshold {
            break;
        }
        let shrinking = trace.windows(2).all(|w| {
            let (c, f) = (w[0].smallest.get(i), w[1].smallest.get(i));
            matches!((c, f), (Some(c), Some(f)) if *c >= opts.refinement_ratio * *f)
        });
        if fine < opts.zero_floor || (trace.len() > 1 && shrinking) {
            dim += 1;
        } else {
            break;
        }
    }

    let mut report = ThresholdReport {
        classification: Classification::Regular,
        trace,
        grid,
        phi: Vec::new(),
        psi: Vec::new(),
        l_phi1: 0.0,
        coupling_slope,
        alpha: None,
        gram_condition: 1.0,
        warnings: Vec::new(),
    };
    if dim == 0 {
        let all_above = report.trace.iter().all(|l| l.smallest[0] >= opts.sigma_threshold);
        report.classification = if all_above { Classification::Regular } else { Classification::Indeterminate };
        return Ok(report);
    }

    let grid = &report.grid;
    let n = grid.len();
    let w = &grid.grid.weights;
    let k0 = grid.kernel(C64::new(0.0, 0.0));
    // back from the orthonormal basis to nodal values
    let raw: Vec<Vec<f64>> = spec.vectors[..dim]
        .iter()
        .map(|v| v.iter().zip(w).map(|(x, w)| x / w.sqrt()).collect())
        .collect();
    let d0a = |phi: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| k0[(i, j)].re * grid.a[j] * phi[j]).sum()).collect()
    };
    let images: Vec<Vec<f64>> = raw.iter().map(|p| d0a(p)).collect();
    let gram = RMat::from_fn(dim, dim, |i, j| {
        let ap: Vec<f64> = raw[i].iter().zip(&grid.a).map(|(p, a)| p * a).collect();
        0.5 * (grid.dot(&ap, &images[j]) + {
            let aq: Vec<f64> = raw[j].iter().zip(&grid.a).map(|(p, a)| p * a).collect();
            grid.dot(&aq, &images[i])
        })
    });
    let ge = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Precondition(format!("Gram eigen-decomposition failed: {e:?}")))?;
    let gvals: Vec<f64> = ge.S().column_vector().iter().copied().collect();
    let gmin = gvals.iter().copied().fold(f64::INFINITY, f64::min);
    let gmax = gvals.iter().copied().fold(0.0, f64::max);
    if !(gmin > 0.0) {
        return Err(Error::Precondition("kernel Gram matrix is not positive definite".into()));
    }
    report.gram_condition = gmax / gmin;
    // orthonormal basis: columns of U diag(s^{-1/2})
    let gu = ge.U();
    let mut basis: Vec<Vec<f64>> = (0..dim)
        .map(|c| {
            let s = gvals[c].sqrt();
            (0..n).map(|m| (0..dim).map(|r| raw[r][m] * gu[(r, c)]).sum::<f64>() / s).collect()
        })
        .collect();

    // rotate so that phi_1 carries all of L and the rest lies in Ker L
    let ell: Vec<f64> = basis.iter().map(|p| grid.l_functional(p)).collect();
    let ell_norm = ell.iter().map(|x| x * x).sum::<f64>().sqrt();
    let bound = basis_scale(grid, &basis) / (4.0 * PI);
    let l_vanishes = ell_norm <= opts.l_tolerance * bound.max(f64::MIN_POSITIVE);
    if !l_vanishes {
        let e: Vec<f64> = ell.iter().map(|x| x / ell_norm).collect();
        let householder = householder_to_first(&e);
        basis = (0..dim)
            .map(|c| (0..n).map(|m| (0..dim).map(|r| basis[r][m] * householder[(r, c)]).sum()).collect())
            .collect();
        if grid.l_functional(&basis[0]) < 0.0 {
            for x in basis[0].iter_mut() {
                *x = -*x;
            }
        }
    }
    let psi: Vec<Vec<f64>> = basis
        .iter()
        .map(|p| {
            let img = d0a(p);
            img.iter().zip(&grid.a).map(|(u, a)| a * u).collect()
        })
        .collect();
    report.l_phi1 = grid.l_functional(&basis[0]);
    report.classification = if l_vanishes {
        Classification::EigenvalueOnly
    } else if dim == 1 {
        Classification::ResonanceOnly
    } else {
        Classification::Mixed
    };
    if report.is_resonant() {
        let pairing = 4.0 * PI * report.l_phi1;
        if coupling_slope == 0.0 {
            warnings.push("coupling slope is zero; the limiting point strength is zero".into());
        }
        report.alpha = Some(-coupling_slope / (pairing * pairing));
    }
    if report.gram_condition > 1e8 {
        warnings.push(format!("kernel basis is nearly degenerate (Gram condition {:.3e})", report.gram_condition));
    }
    report.phi = basis;
    report.psi = psi;
    report.warnings = warnings;
    Ok(report)
}

/// Cauchy-Schwarz scale for `L` on unit vectors of the kernel: `|L(phi)| <=
/// ||a|| ||phi|| / (4 pi)`, with the largest `||phi||` in the basis.
fn basis_scale(grid: &NystromGrid, basis: &[Vec<f64>]) -> f64 {
    let phi_norm = basis.iter().map(|p| grid.dot(p, p).sqrt()).fold(0.0, f64::max);
    grid.a_norm() * phi_norm
}

/// Orthogonal matrix whose first column is the unit vector `e`.
fn householder_to_first(e: &[f64]) -> RMat {
    let n = e.len();
    let mut v: Vec<f64> = e.to_vec();
    let sign = if e[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    // H = I - 2 v v^T / (v^T v) maps e to -sign * e_1; flip to get e as first column
    RMat::from_fn(n, n, |i, j| {
        let h = (i == j) as i32 as f64 - 2.0 * v[i] * v[j] / vv;
        -sign * h
    })
}

/// Smallest resolvable depth scale: the depth at which the discrete `Q_0`
/// of the given potential shape is exactly singular.
pub fn critical_depth(potential: &Potential, resolution: usize) -> Result<f64> {
    if !(potential.depth() > 0.0) {
        return Err(Error::Precondition("critical depth needs an attractive potential".into()));
    }
    let grid = build_nystrom(potential, resolution)?;
    let s = grid.sym_static(&grid.kernel(C64::new(0.0, 0.0)));
    let n = grid.len();
    let sym = RMat::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let vals = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Precondition(format!("eigenvalue iteration failed: {e:?}")))?;
    let mu = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(potential.depth() / mu)
}

/// Nodal values of `u = D_0 a phi` and its extension off the grid.
///
/// Outside the support the extension is the plain quadrature sum.  Inside,
/// the Nystrom interpolant of `u = -D_0 V u` is used, with the same
/// subtraction of the static singularity as the matrix.
pub fn resonance_field(grid: &NystromGrid, phi: &[f64], x: Vec3) -> Result<f64> {
    if phi.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: phi.len() });
    }
    let radius = grid.potential.support_radius();
    let w = &grid.grid.weights;
    let mut direct = 0.0;
    let mut static_sum = 0.0;
    for ((y, (a, p)), w) in grid.grid.nodes.iter().zip(grid.a.iter().zip(phi)).zip(w) {
        let r = dist(x, *y);
        if r == 0.0 {
            return Err(Error::SingularPoint);
        }
        direct += a * p * w / (4.0 * PI * r);
        static_sum += w / (4.0 * PI * r);
    }
    let s = norm(x);
    if s > radius {
        return Ok(direct);
    }
    let newton = radius * radius / 2.0 - s * s / 6.0;
    let v = grid.potential.eval(x);
    Ok(direct / (1.0 - v * (static_sum - newton)))
}

#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub r: f64,
    pub u: f64,
    pub r_u: f64,
}

/// `u(r d)` and `r u(r d)` along a ray, for `u = D_0 a phi`.
pub fn resonance_profile(grid: &NystromGrid, phi: &[f64], radii: &[f64], direction: Vec3) -> Result<Vec<ProfilePoint>> {
    let dn = norm(direction);
    if !(dn > 0.0) {
        return Err(Error::InvalidConfig("profile direction must be nonzero".into()));
    }
    radii
        .iter()
        .map(|r| {
            let x = [r * direction[0] / dn, r * direction[1] / dn, r * direction[2] / dn];
            let u = resonance_field(grid, phi, x)?;
            Ok(ProfilePoint { r: *r, u, r_u: r * u })
        })
        .collect()
}

/// Real nodal vector as a complex one.
pub fn complexify(v: &[f64]) -> Vec<C64> {
    v.iter().map(|x| C64::new(*x, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        let p = Potential::parse("well(2.5, 1)").unwrap();
        assert_eq!(p, Potential::Well { depth: 2.5, radius: 1.0 });
        let g = Potential::parse("gaussian(3,0.5)").unwrap();
        assert_eq!(g.support_radius(), 1.5);
        assert_eq!(Potential::parse(&g.label()).unwrap(), g);
        assert!(matches!(Potential::parse("square(1,2)"), Err(Error::BadLabel(_))));
        assert!(Potential::parse("well(1)").is_err());
    }

    #[test]
    fn grid_volume_is_exact() {
        let g = build_nystrom(&Potential::well(1.0, 1.0).unwrap(), 8).unwrap();
        assert_eq!(g.len(), 4 * 4 * 8);
        assert!((g.grid.volume() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(build_nystrom(&Potential::well(1.0, 1.0).unwrap(), 2).is_err());
    }

    #[test]
    fn static_kernel_top_eigenvalue() {
        // largest eigenvalue of D_0 on the unit ball is 4 / pi^2
        let depth = critical_depth(&Potential::well(1.0, 1.0).unwrap(), 16).unwrap();
        assert!((1.0 / depth - 4.0 / (PI * PI)).abs() < 1e-3);
    }

    #[test]
    fn householder_first_column() {
        let e = [0.6, -0.8, 0.0];
        let h = householder_to_first(&e);
        for i in 0..3 {
            assert!((h[(i, 0)] - e[i]).abs() < 1e-15);
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| h[(k, i)] * h[(k, j)]).sum();
                assert!((d - (i == j) as i32 as f64).abs() < 1e-14);
            }
        }
    }
}
