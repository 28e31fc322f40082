//! Scaled short-range potentials `sum_j lambda_j(eps) eps^{-2} V_j((x - y_j) / eps)`
//! and their convergence to point interactions as `eps -> 0`.
//!
//! Each centre carries a Nystrom grid in its own scaled frame.  The
//! Birman-Schwinger matrix of the whole system couples the frames through
//! `eps G_k(eps (x - x') + y_i - y_j)`; its diagonal blocks are the local
//! operators at wavenumber `eps k`.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;

use crate::birman::{threshold_classify, zero_energy_terms, NystromGrid, Potential, ThresholdOptions, ThresholdReport};
use crate::gamma::{gamma_entries, PointConfig};
use crate::geom::{add, dist, norm, scale, Vec3};
use crate::green::{green_radial, Wavenumber};
use crate::krein::{apply_point_resolvent, Source};
use crate::linalg::{frobenius, identity, matmul, par_matrix, CMat, Lu};
use crate::packet::WavePacket;
use crate::quad::composite_on;
use crate::waveop::{wave_pairing_point, WaveOptions};
use crate::{Error, Result, C64, I};

/// Potential and coupling `lambda(eps) = 1 + slope * eps` at one centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSpec {
    pub potential: Potential,
    pub slope: f64,
}

impl CenterSpec {
    pub fn lambda(&self, eps: f64) -> f64 {
        1.0 + self.slope * eps
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalingOptions {
    /// Gauss-Legendre points per panel of the energy rule.
    pub k_nodes: usize,
    pub k_panels: usize,
    /// Factor conditioning below which a solve is refused.
    pub singular_floor: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions { k_nodes: 16, k_panels: 2, singular_floor: 1e-13 }
    }
}

/// The scaled system with its per-centre threshold data.
#[derive(Debug, Clone)]
pub struct ScaledSystem {
    centers: Vec<Vec3>,
    specs: Vec<CenterSpec>,
    reports: Vec<ThresholdReport>,
    offsets: Vec<usize>,
    pub options: ScalingOptions,
}

impl ScaledSystem {
    /// Classifies every centre on the resolution ladder; the finest grid
    /// is the one used for the scaled operators.
    pub fn new(
        centers: Vec<Vec3>,
        specs: Vec<CenterSpec>,
        resolutions: &[usize],
        threshold: ThresholdOptions,
    ) -> Result<Self> {
        if centers.len() != specs.len() || centers.is_empty() {
            return Err(Error::InvalidConfig("need one potential per centre".into()));
        }
        // validates distinct centres
        PointConfig::new(centers.clone(), vec![0.0; centers.len()])?;
        let reports = specs
            .iter()
            .map(|s| threshold_classify(&s.potential, s.slope, resolutions, threshold))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = vec![0];
        for r in &reports {
            offsets.push(offsets.last().unwrap() + r.grid.len());
        }
        Ok(ScaledSystem { centers, specs, reports, offsets, options: ScalingOptions::default() })
    }

    pub fn with_options(mut self, options: ScalingOptions) -> Self {
        self.options = options;
        self
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn reports(&self) -> &[ThresholdReport] {
        &self.reports
    }

    pub fn specs(&self) -> &[CenterSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn grid(&self, j: usize) -> &NystromGrid {
        &self.reports[j].grid
    }

    fn block(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    /// Indices of centres that survive in the limit.
    pub fn resonant(&self) -> Vec<usize> {
        (0..self.len()).filter(|j| self.reports[*j].is_resonant()).collect()
    }

    /// Point configuration of the limit, or `None` when no centre is resonant.
    pub fn reduced_config(&self) -> Option<PointConfig> {
        let idx = self.resonant();
        if idx.is_empty() {
            return None;
        }
        let c = idx.iter().map(|j| self.centers[*j]).collect();
        let a = idx.iter().map(|j| self.reports[*j].alpha.unwrap_or(0.0)).collect();
        PointConfig::new(c, a).ok()
    }

    /// `-Gamma~(k)^{-1}` embedded as an `N x N` matrix (zero rows and columns
    /// at non-resonant centres): the limit of the sandwiched scaled inverse.
    pub fn limit_sandwich(&self, k: C64) -> Result<CMat> {
        let n = self.len();
        let mut out = CMat::zeros(n, n);
        let idx = self.resonant();
        if let Some(cfg) = self.reduced_config() {
            let g = gamma_entries(&cfg, k);
            let inv = crate::linalg::checked_inverse(&g, 1e-13, k)?;
            for (a, i) in idx.iter().enumerate() {
                for (b, j) in idx.iter().enumerate() {
                    out[(*i, *j)] = -inv[(a, b)];
                }
            }
        }
        Ok(out)
    }

    fn check_separation(&self, eps: f64) -> Result<()> {
        if self.len() < 2 {
            return Ok(());
        }
        let mut dmin = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..i {
                dmin = dmin.min(dist(self.centers[i], self.centers[j]));
            }
        }
        let reach = self
            .reports
            .iter()
            .map(|r| r.grid.grid.nodes.iter().map(|x| norm(*x)).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if eps * reach >= dmin / 4.0 {
            return Err(Error::Precondition(format!(
                "scaled supports overlap: eps * {reach:.3} >= {:.3} / 4",
                dmin
            )));
        }
        Ok(())
    }

    /// Physical position `y_j + eps x` of node `m` of block `j`.
    fn position(&self, j: usize, m: usize, eps: f64) -> Vec3 {
        add(self.centers[j], scale(eps, self.grid(j).grid.nodes[m]))
    }
}

/// Block-diagonal part `D` and coupling part `E` of `M_eps(eps k)`.
#[derive(Debug, Clone)]
pub struct MEps {
    pub eps: f64,
    pub k: C64,
    pub diagonal: Vec<CMat>,
    pub coupling: CMat,
}

impl MEps {
    pub fn to_dense(&self) -> CMat {
        let mut m = self.coupling.clone();
        let mut off = 0;
        for d in &self.diagonal {
            for i in 0..d.nrows() {
                for j in 0..d.ncols() {
                    m[(off + i, off + j)] += d[(i, j)];
                }
            }
            off += d.nrows();
        }
        m
    }

    /// `E = coupling / eps`, so that `M = D + eps E`.
    pub fn coupling_kernel(&self) -> CMat {
        let mut e = self.coupling.clone();
        for j in 0..e.ncols() {
            for i in 0..e.nrows() {
                e[(i, j)] /= self.eps;
            }
        }
        e
    }
}

/// Assembles `M_eps(eps k)` for physical wavenumber `k`:
/// `M_{(i,m),(j,n)} = lambda_i b_m K^{ij}_{mn} a_n w_n`.
pub fn assemble_m_eps(sys: &ScaledSystem, eps: f64, k: C64) -> Result<MEps> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    sys.check_separation(eps)?;
    let kappa = k * eps;
    let diagonal = (0..sys.len())
        .map(|j| {
            let g = sys.grid(j);
            let lam = sys.specs[j].lambda(eps);
            let kern = g.kernel(kappa);
            CMat::from_fn(g.len(), g.len(), |m, n| kern[(m, n)] * (lam * g.b[m] * g.a[n]))
        })
        .collect();
    let dim = sys.dim();
    let owner: Vec<(usize, usize)> = (0..sys.len()).flat_map(|j| (0..sys.grid(j).len()).map(move |m| (j, m))).collect();
    let coupling = par_matrix(dim, dim, |r, c| {
        let (i, m) = owner[r];
        let (j, n) = owner[c];
        if i == j {
            return C64::new(0.0, 0.0);
        }
        let gi = sys.grid(i);
        let gj = sys.grid(j);
        let d = dist(sys.position(i, m, eps), sys.position(j, n, eps));
        green_radial(k, d) * (eps * sys.specs[i].lambda(eps) * gi.b[m] * gj.a[n] * gj.grid.weights[n])
    });
    Ok(MEps { eps, k, diagonal, coupling })
}

/// `eps (1 + M_eps(eps k))^{-1}` in factored form
/// `(1 + (1 + D)^{-1} E)^{-1} (1 + D)^{-1}`.
pub struct ScaledInverse {
    pub eps: f64,
    pub k: C64,
    blocks: Vec<Lu>,
    outer: Lu,
    offsets: Vec<usize>,
    /// Smallest singular value estimate over all inverted factors.
    pub min_sv: f64,
}

impl ScaledInverse {
    fn block_solve(&self, rhs: &[C64]) -> Vec<C64> {
        let mut out = Vec::with_capacity(rhs.len());
        for (j, lu) in self.blocks.iter().enumerate() {
            out.extend(lu.solve_vec(&rhs[self.offsets[j]..self.offsets[j + 1]]));
        }
        out
    }

    /// `eps (1 + M)^{-1} f`.
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let x = self.block_solve(f);
        self.outer.solve_vec(&x).into_iter().map(|v| v * self.eps).collect()
    }

    pub fn to_dense(&self) -> CMat {
        let n = *self.offsets.last().unwrap();
        let cols: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|c| {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[c] = C64::new(1.0, 0.0);
                self.apply(&e)
            })
            .collect();
        CMat::from_fn(n, n, |i, j| cols[j][i])
    }
}

pub fn scaled_inverse(sys: &ScaledSystem, eps: f64, k: C64) -> Result<ScaledInverse> {
    let m = assemble_m_eps(sys, eps, k)?;
    let mut blocks = Vec::new();
    let mut min_sv = f64::INFINITY;
    for d in &m.diagonal {
        let n = d.nrows();
        let one_d = CMat::from_fn(n, n, |i, j| d[(i, j)] + if i == j { 1.0 } else { 0.0 });
        let lu = Lu::new(&one_d);
        min_sv = min_sv.min(lu.min_singular_estimate());
        blocks.push(lu);
    }
    let dim = sys.dim();
    // (1 + D)^{-1} E, block row by block row
    let mut f = m.coupling.clone();
    for (j, lu) in blocks.iter().enumerate() {
        let r = sys.block(j);
        let rows = CMat::from_fn(r.len(), dim, |i, c| m.coupling[(r.start + i, c)]);
        let solved = lu.solve(&rows);
        for i in 0..r.len() {
            for c in 0..dim {
                f[(r.start + i, c)] = solved[(i, c)];
            }
        }
    }
    for i in 0..dim {
        f[(i, i)] += 1.0;
    }
    let outer = Lu::new(&f);
    min_sv = min_sv.min(outer.min_singular_estimate());
    if !(min_sv > sys.options.singular_floor) {
        return Err(Error::SingularFactor { k, sigma: min_sv });
    }
    Ok(ScaledInverse { eps, k, blocks, outer, offsets: sys.offsets.clone(), min_sv })
}

/// `|B> Gamma^(k) <A|`: the `eps -> 0` limit of the coupling kernel `E`, with
/// `G_k(y_i - y_j)` between blocks and zero within a block.
pub fn limit_coupling(sys: &ScaledSystem, k: C64) -> CMat {
    let dim = sys.dim();
    let owner: Vec<(usize, usize)> = (0..sys.len()).flat_map(|j| (0..sys.grid(j).len()).map(move |m| (j, m))).collect();
    CMat::from_fn(dim, dim, |r, c| {
        let (i, m) = owner[r];
        let (j, n) = owner[c];
        if i == j {
            return C64::new(0.0, 0.0);
        }
        let gj = sys.grid(j);
        green_radial(k, dist(sys.centers[i], sys.centers[j])) * (sys.grid(i).b[m] * gj.a[n] * gj.grid.weights[n])
    })
}

/// Limit `L~ = lim eps (1 + D_eps(eps k))^{-1}`, block by block.
///
/// On a resonant block with kernel basis `Phi` and dual basis `Psi`,
/// `L_j = Phi (Psi^T T_1 Phi)^{-1} Psi^T` where `T_1 = lambda'(0) b D_0 a + i k b D_1 a`
/// is the first-order term of `1 + D`.  Regular blocks give zero.
pub fn limit_block_inverse(sys: &ScaledSystem, k: C64) -> Result<CMat> {
    let dim = sys.dim();
    let mut out = CMat::zeros(dim, dim);
    for j in 0..sys.len() {
        let rep = &sys.reports[j];
        if !rep.is_resonant() || rep.phi.is_empty() {
            continue;
        }
        let g = &rep.grid;
        let n = g.len();
        let w = &g.grid.weights;
        let terms = zero_energy_terms(g);
        let t1 = CMat::from_fn(n, n, |r, c| terms.d0.matrix[(r, c)] * sys.specs[j].slope + terms.d1.matrix[(r, c)] * (I * k));
        let q = rep.phi.len();
        let phi = CMat::from_fn(n, q, |r, c| C64::new(rep.phi[c][r], 0.0));
        let psi_t = CMat::from_fn(q, n, |r, c| C64::new(rep.psi[r][c] * w[c], 0.0));
        let small = matmul(&psi_t, &matmul(&t1, &phi));
        let inv = crate::linalg::checked_inverse(&small, 1e-13, k)?;
        let l = matmul(&phi, &matmul(&inv, &psi_t));
        let r = sys.block(j);
        for a in 0..n {
            for b in 0..n {
                out[(r.start + a, r.start + b)] = l[(a, b)];
            }
        }
    }
    Ok(out)
}

/// `(1 + L~ |B> Gamma^ <A|)^{-1} L~`, the limit of the scaled inverse.
pub fn limit_inverse(sys: &ScaledSystem, k: C64) -> Result<CMat> {
    let l = limit_block_inverse(sys, k)?;
    let mut f = identity(sys.dim()) + matmul(&l, &limit_coupling(sys, k));
    let lu = Lu::new(&f);
    if !(lu.min_singular_estimate() > sys.options.singular_floor) {
        return Err(Error::SingularFactor { k, sigma: lu.min_singular_estimate() });
    }
    f = lu.solve(&l);
    Ok(f)
}

/// `<A| eps (1 + M)^{-1} |B>` as an `N x N` matrix:
/// entry `(j, l)` pairs `a` on block `j` with the output for `b` on block `l`.
/// The couplings `Lambda(eps)` enter only through `M`.
pub fn sandwich(sys: &ScaledSystem, inv: &ScaledInverse) -> CMat {
    let n = sys.len();
    let dim = sys.dim();
    let mut out = CMat::zeros(n, n);
    for l in 0..n {
        let mut rhs = vec![C64::new(0.0, 0.0); dim];
        let g = sys.grid(l);
        for (m, idx) in sys.block(l).enumerate() {
            rhs[idx] = C64::new(g.b[m], 0.0);
        }
        let x = inv.apply(&rhs);
        for j in 0..n {
            let gj = sys.grid(j);
            out[(j, l)] = sys
                .block(j)
                .enumerate()
                .map(|(m, idx)| x[idx] * (gj.a[m] * gj.grid.weights[m]))
                .sum();
        }
    }
    out
}

/// Relative distance of the sandwich from its limit `-Gamma~(k)^{-1}`.
pub fn sandwich_error(sys: &ScaledSystem, eps: f64, k: C64) -> Result<(f64, f64)> {
    let inv = scaled_inverse(sys, eps, k)?;
    let s = sandwich(sys, &inv);
    let lim = sys.limit_sandwich(k)?;
    let scale = frobenius(&lim).max(f64::MIN_POSITIVE);
    Ok((frobenius(&(s - lim)) / scale, inv.min_sv))
}

/// Distance of the scaled end terms from their limits along an `eps` ladder.
#[derive(Debug, Clone)]
pub struct EndtermTrace {
    pub eps: Vec<f64>,
    /// `|| a P[u](y + eps x) - a P[u](y) ||` on the grid.
    pub errors: Vec<f64>,
    /// `|| a P[u](y + eps x) || / || u ||` per `eps`.
    pub norms: Vec<f64>,
    /// Uniform bound `||a|| / sqrt(8 pi Im k)` of the scaled operator
    /// (infinite on the real axis).
    pub bound: f64,
}

/// End term `eps^{1/2} a G_0(+-k eps) U_eps^* u` in the local frame of a
/// centre at `y`: nodal values `a(x_n) P_{+-k}[u](y + eps x_n)`.
pub fn endterm_check(grid: &NystromGrid, center: Vec3, u: &WavePacket, k: C64, eps_list: &[f64], plus: bool) -> Result<EndtermTrace> {
    let z = Wavenumber::new(if plus { k } else { -k })?;
    let limit: Vec<C64> = grid.a.iter().map(|a| u.green_pairing(z, center) * *a).collect();
    let mut errors = Vec::new();
    let mut norms = Vec::new();
    let un = u.norm().max(f64::MIN_POSITIVE);
    for &eps in eps_list {
        let e: Vec<C64> = grid
            .grid
            .nodes
            .iter()
            .zip(&grid.a)
            .map(|(x, a)| u.green_pairing(z, add(center, scale(eps, *x))) * *a)
            .collect();
        let diff: Vec<C64> = e.iter().zip(&limit).map(|(a, b)| a - b).collect();
        errors.push(grid.grid.norm(&diff));
        norms.push(grid.grid.norm(&e) / un);
    }
    let bound = if z.value().im > 0.0 { grid.a_norm() / (8.0 * PI * z.value().im).sqrt() } else { f64::INFINITY };
    Ok(EndtermTrace { eps: eps_list.to_vec(), errors, norms, bound })
}

/// Energy rule on the support of `u`.
fn energy_rule(u: &WavePacket, opts: &ScalingOptions) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = u.k_support();
    composite_on(opts.k_nodes, opts.k_panels, lo, hi)
}

/// `<W_eps u, v> = <u, v> - (1 / (pi i)) int k <eps (1 + M(-eps k))^{-1}
/// Lambda B D[u], A P_k[v]> dk` for each pair, sharing factorizations.
pub fn wave_pairings_eps(sys: &ScaledSystem, eps: f64, pairs: &[(WavePacket, WavePacket)]) -> Result<(Vec<C64>, f64)> {
    let opts = sys.options;
    let mut min_sv = f64::INFINITY;
    let mut out: Vec<C64> = pairs.iter().map(|(u, v)| u.inner(v)).collect();
    // group pairs by energy rule: one rule per distinct u support
    let rules: Vec<(Vec<f64>, Vec<f64>)> = pairs.iter().map(|(u, _)| energy_rule(u, &opts)).collect();
    let mut nodes: Vec<f64> = rules.iter().flat_map(|r| r.0.iter().copied()).collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup();
    let dim = sys.dim();
    for k in nodes {
        let inv = scaled_inverse(sys, eps, C64::new(-k, 0.0))?;
        min_sv = min_sv.min(inv.min_sv);
        for (p, (u, v)) in pairs.iter().enumerate() {
            let Some(q) = rules[p].0.iter().position(|x| *x == k) else { continue };
            let wk = rules[p].1[q];
            let mut f = vec![C64::new(0.0, 0.0); dim];
            for l in 0..sys.len() {
                let g = sys.grid(l);
                let lam = sys.specs[l].lambda(eps);
                for (m, idx) in sys.block(l).enumerate() {
                    f[idx] = u.difference(k, sys.position(l, m, eps)) * (lam * g.b[m]);
                }
            }
            let x = inv.apply(&f);
            let mut inner = C64::new(0.0, 0.0);
            for j in 0..sys.len() {
                let g = sys.grid(j);
                for (m, idx) in sys.block(j).enumerate() {
                    let pv = v.green_pairing(Wavenumber::real(k), sys.position(j, m, eps));
                    inner += x[idx] * (pv * g.a[m]).conj() * g.grid.weights[m];
                }
            }
            out[p] -= inner * k * wk / (PI * I);
        }
    }
    Ok((out, min_sv))
}

pub fn wave_pairing_eps(sys: &ScaledSystem, eps: f64, u: &WavePacket, v: &WavePacket) -> Result<C64> {
    Ok(wave_pairings_eps(sys, eps, &[(u.clone(), v.clone())])?.0[0])
}

/// `R_eps(k) u` at the given points, `Im k > 0`:
/// `G_0(k) u - sum_j sum_m G_k(x - y_j - eps x_m) a_m w_m [eps (1+M)^{-1} Lambda B P_k[u]]_{j,m}`.
pub fn resolvent_eps_apply(sys: &ScaledSystem, eps: f64, k: Wavenumber, u: &WavePacket, points: &[Vec3]) -> Result<(Vec<C64>, f64)> {
    if !(k.value().im > 0.0) {
        return Err(Error::NotResolventSet(k.value()));
    }
    let inv = scaled_inverse(sys, eps, k.value())?;
    let dim = sys.dim();
    let mut f = vec![C64::new(0.0, 0.0); dim];
    for l in 0..sys.len() {
        let g = sys.grid(l);
        let lam = sys.specs[l].lambda(eps);
        for (m, idx) in sys.block(l).enumerate() {
            f[idx] = u.green_pairing(k, sys.position(l, m, eps)) * (lam * g.b[m]);
        }
    }
    let x = inv.apply(&f);
    let vals = points
        .iter()
        .map(|p| {
            let mut acc = u.green_pairing(k, *p);
            for j in 0..sys.len() {
                let g = sys.grid(j);
                for (m, idx) in sys.block(j).enumerate() {
                    let r = dist(*p, sys.position(j, m, eps));
                    if r == 0.0 {
                        return Err(Error::SingularPoint);
                    }
                    acc -= green_radial(k.value(), r) * x[idx] * (g.a[m] * g.grid.weights[m]);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((vals, inv.min_sv))
}

/// Resolvent probe for a sweep.
#[derive(Debug, Clone)]
pub struct ResolventProbe {
    pub k: Wavenumber,
    pub u: WavePacket,
    pub points: Vec<Vec3>,
}

#[derive(Debug, Clone, Default)]
pub struct Observables {
    pub pairs: Vec<(WavePacket, WavePacket)>,
    pub resolvent: Option<ResolventProbe>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceRecord {
    pub epsilon: f64,
    /// Largest of `wave_errors`.
    pub wave_err: f64,
    /// `|<W_eps u, v> - <W u, v>| / (||u|| ||v||)` per pair.
    pub wave_errors: Vec<f64>,
    /// Relative l2 error of `R_eps(k) u` over the probe points.
    pub resolvent_err: f64,
    pub min_sv: f64,
    pub seconds: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    NotDecreasing,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Decreasing => "decreasing",
            Trend::NotDecreasing => "not-decreasing",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Sorted by `eps` descending.
    pub records: Vec<ConvergenceRecord>,
    pub wave_reference: Vec<C64>,
    pub resolvent_reference: Vec<C64>,
    pub verdict: Trend,
}

/// Strictly decreasing, ignoring columns that were not measured.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    if values.iter().all(|v| v.is_nan()) {
        return true;
    }
    values.iter().all(|v| v.is_finite()) && values.windows(2).all(|w| w[1] < w[0])
}

/// Runs all observables on each `eps` and compares with the point limit.
/// A failure at one `eps` is recorded and does not abort the sweep.
pub fn convergence_sweep(sys: &ScaledSystem, eps_list: &[f64], obs: &Observables) -> Result<SweepReport> {
    if eps_list.len() < 3 {
        return Err(Error::Precondition(format!("a sweep needs at least 3 values of eps, got {}", eps_list.len())));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("eps values must be positive".into()));
    }
    let limit = sys.reduced_config();
    let wopts = WaveOptions::default();
    let wave_reference = obs
        .pairs
        .iter()
        .map(|(u, v)| match &limit {
            Some(cfg) => Ok(wave_pairing_point(cfg, u, v, wopts)?.value),
            None => Ok(u.inner(v)),
        })
        .collect::<Result<Vec<_>>>()?;
    let resolvent_reference = match (&obs.resolvent, &limit) {
        (Some(p), Some(cfg)) => apply_point_resolvent(cfg, p.k, Source::Packet(&p.u), &p.points)?,
        (Some(p), None) => p.points.iter().map(|x| p.u.green_pairing(p.k, *x)).collect(),
        (None, _) => Vec::new(),
    };
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    let records: Vec<ConvergenceRecord> = eps_sorted
        .par_iter()
        .map(|&eps| {
            let t0 = Instant::now();
            let mut rec = ConvergenceRecord {
                epsilon: eps,
                wave_err: f64::NAN,
                wave_errors: Vec::new(),
                resolvent_err: f64::NAN,
                min_sv: f64::INFINITY,
                seconds: 0.0,
                failure: None,
            };
            let run = |rec: &mut ConvergenceRecord| -> Result<()> {
                if !obs.pairs.is_empty() {
                    let (vals, sv) = wave_pairings_eps(sys, eps, &obs.pairs)?;
                    rec.min_sv = rec.min_sv.min(sv);
                    rec.wave_errors = vals
                        .iter()
                        .zip(&wave_reference)
                        .zip(&obs.pairs)
                        .map(|((a, b), (u, v))| (a - b).norm() / (u.norm() * v.norm()))
                        .collect();
                    rec.wave_err = rec.wave_errors.iter().copied().fold(0.0, f64::max);
                }
                if let Some(p) = &obs.resolvent {
                    let (vals, sv) = resolvent_eps_apply(sys, eps, p.k, &p.u, &p.points)?;
                    rec.min_sv = rec.min_sv.min(sv);
                    let num: f64 = vals.iter().zip(&resolvent_reference).map(|(a, b)| (a - b).norm_sqr()).sum();
                    let den: f64 = resolvent_reference.iter().map(|b| b.norm_sqr()).sum();
                    rec.resolvent_err = (num / den.max(f64::MIN_POSITIVE)).sqrt();
                }
                Ok(())
            };
            if let Err(e) = run(&mut rec) {
                rec.failure = Some(e.to_string());
            }
            rec.seconds = t0.elapsed().as_secs_f64();
            rec
        })
        .collect();
    let wave: Vec<f64> = records.iter().map(|r| r.wave_err).collect();
    let res: Vec<f64> = records.iter().map(|r| r.resolvent_err).collect();
    let ok = records.iter().all(|r| r.failure.is_none());
    let verdict = if ok && strictly_decreasing(&wave) && strictly_decreasing(&res) {
        Trend::Decreasing
    } else {
        Trend::NotDecreasing
    };
    Ok(SweepReport { records, wave_reference, resolvent_reference, verdict })
}

/// Displacement helper for tests and drivers: node positions of block `j`.
pub fn block_positions(sys: &ScaledSystem, j: usize, eps: f64) -> Vec<Vec3> {
    (0..sys.grid(j).len()).map(|m| sys.position(j, m, eps)).collect()
}
