//! Resolvent of the point-interaction Hamiltonian as a finite-rank
//! correction of the free resolvent.

use crate::gamma::{build_gamma, PointConfig};
use crate::geom::{dist, Vec3};
use crate::green::{apply_free_resolvent, free_resolvent_at, green_radial, QuadGrid, SingularityRule, Wavenumber};
use crate::linalg::CMat;
use crate::packet::WavePacket;
use crate::{Error, Result, C64};

/// Relative singular-value floor below which `Gamma(z)` is not inverted.
pub const GAMMA_CUTOFF: f64 = 1e-12;

/// Input to the resolvent.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Packet(&'a WavePacket),
    Samples { grid: &'a QuadGrid, values: &'a [C64] },
}

/// `R(z) = G0(z) + sum_{jl} [Gamma(z)^{-1}]_{jl} G_z(. - y_j) <G_z(. - y_l), .>`
/// at a fixed `z` with `Im z > 0`.  The pairing in the rank-one terms is
/// bilinear (no conjugation).
#[derive(Debug, Clone)]
pub struct PointResolvent {
    config: PointConfig,
    z: Wavenumber,
    gamma_inv: CMat,
}

impl PointResolvent {
    pub fn new(config: &PointConfig, z: Wavenumber) -> Result<Self> {
        if !(z.value().im > 0.0) {
            return Err(Error::NotResolventSet(z.value()));
        }
        let gamma_inv = build_gamma(config, z).inverse(GAMMA_CUTOFF)?;
        Ok(PointResolvent { config: config.clone(), z, gamma_inv })
    }

    pub fn gamma_inverse(&self) -> &CMat {
        &self.gamma_inv
    }

    pub fn wavenumber(&self) -> Wavenumber {
        self.z
    }

    fn correction(&self, x: Vec3, pairings: &[C64]) -> Result<C64> {
        let z = self.z.value();
        let mut acc = C64::new(0.0, 0.0);
        for (j, yj) in self.config.centers().iter().enumerate() {
            let r = dist(x, *yj);
            if r == 0.0 {
                return Err(Error::SingularPoint);
            }
            let g = green_radial(z, r);
            for (l, p) in pairings.iter().enumerate() {
                acc += self.gamma_inv[(j, l)] * g * p;
            }
        }
        Ok(acc)
    }

    fn sample_pairings(&self, grid: &QuadGrid, values: &[C64]) -> Result<Vec<C64>> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch { expected: grid.len(), got: values.len() });
        }
        let z = self.z.value();
        self.config
            .centers()
            .iter()
            .map(|y| {
                let mut acc = C64::new(0.0, 0.0);
                for ((x, f), w) in grid.nodes.iter().zip(values).zip(&grid.weights) {
                    let r = dist(*x, *y);
                    if r == 0.0 {
                        return Err(Error::SingularPoint);
                    }
                    acc += green_radial(z, r) * f * *w;
                }
                Ok(acc)
            })
            .collect()
    }

    pub fn apply_packet(&self, u: &WavePacket, points: &[Vec3]) -> Result<Vec<C64>> {
        let pairings: Vec<C64> = self.config.centers().iter().map(|y| u.green_pairing(self.z, *y)).collect();
        points
            .iter()
            .map(|x| Ok(u.green_pairing(self.z, *x) + self.correction(*x, &pairings)?))
            .collect()
    }

    pub fn apply_samples_at(&self, grid: &QuadGrid, values: &[C64], points: &[Vec3]) -> Result<Vec<C64>> {
        let pairings = self.sample_pairings(grid, values)?;
        let free = free_resolvent_at(self.z.value(), grid, values, points)?;
        points
            .iter()
            .zip(free)
            .map(|(x, f)| Ok(f + self.correction(*x, &pairings)?))
            .collect()
    }

    /// Resolvent of nodal samples, evaluated back on the same nodes.
    pub fn apply_on_grid(&self, grid: &QuadGrid, values: &[C64], rule: SingularityRule) -> Result<Vec<C64>> {
        let pairings = self.sample_pairings(grid, values)?;
        let free = apply_free_resolvent(self.z, grid, values, rule)?;
        grid.nodes
            .iter()
            .zip(free)
            .map(|(x, f)| Ok(f + self.correction(*x, &pairings)?))
            .collect()
    }
}

/// One-shot application of the resolvent at off-centre points.
pub fn apply_point_resolvent(config: &PointConfig, z: Wavenumber, source: Source<'_>, points: &[Vec3]) -> Result<Vec<C64>> {
    let r = PointResolvent::new(config, z)?;
    match source {
        Source::Packet(u) => r.apply_packet(u, points),
        Source::Samples { grid, values } => r.apply_samples_at(grid, values, points),
    }
}

/// Relative discrete residual of
/// `R(z1) - R(z2) = (z1^2 - z2^2) R(z1) R(z2)` on nodal samples.
pub fn first_resolvent_residual(
    config: &PointConfig,
    z1: Wavenumber,
    z2: Wavenumber,
    grid: &QuadGrid,
    values: &[C64],
    rule: SingularityRule,
) -> Result<f64> {
    let r1 = PointResolvent::new(config, z1)?;
    let r2 = PointResolvent::new(config, z2)?;
    let a = r1.apply_on_grid(grid, values, rule)?;
    let b = r2.apply_on_grid(grid, values, rule)?;
    let bb = r1.apply_on_grid(grid, &b, rule)?;
    let factor = z1.energy() - z2.energy();
    let res: Vec<C64> = (0..grid.len()).map(|i| a[i] - b[i] - factor * bb[i]).collect();
    Ok(grid.norm(&res) / grid.norm(&a).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet::BumpProfile;
    use std::f64::consts::PI;

    #[test]
    fn real_wavenumber_is_rejected() {
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.1]).unwrap();
        assert!(matches!(PointResolvent::new(&cfg, Wavenumber::real(1.0)), Err(Error::NotResolventSet(_))));
    }

    #[test]
    fn singular_gamma_is_rejected() {
        // bound state at kappa = 1
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![-1.0 / (4.0 * PI)]).unwrap();
        assert!(matches!(
            PointResolvent::new(&cfg, Wavenumber::imaginary(1.0)),
            Err(Error::NearSingularGamma { .. })
        ));
    }

    #[test]
    fn evaluation_at_a_centre_fails() {
        let cfg = PointConfig::new(vec![[0.0; 3]], vec![0.1]).unwrap();
        let u = WavePacket::radial(BumpProfile::new(1.0, 2.0).unwrap(), [0.0; 3]);
        let r = apply_point_resolvent(&cfg, Wavenumber::imaginary(1.0), Source::Packet(&u), &[[0.0; 3]]);
        assert!(matches!(r, Err(Error::SingularPoint)));
    }
}
