use rayon::prelude::*;

use crate::color::ColorTriple;
use crate::error::{Error, Result};
use crate::gmm::{cross_of_points, entropy_of_points, PairedGmms};
use crate::scalar::CompensatedSum;
use crate::warp::{basis_into, ControlGrid, RbfKind, WarpParameters, AFFINE_LEN};
use crate::Scalar;

use super::config::{EstimationConfig, EstimationMode};
use super::roughness::RoughnessOperator;

/// Parts of the penalised L2 cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown<T> {
    pub entropy: T,
    pub cross: T,
    pub roughness: T,
    /// `entropy - 2 cross + lambda roughness`.
    pub total: T,
}

/// Cost evaluator with the target basis vectors and roughness form cached.
#[derive(Debug, Clone)]
pub struct CostModel<T> {
    target: Vec<ColorTriple<T>>,
    palette: Vec<ColorTriple<T>>,
    paired: bool,
    /// Row-major `K_t x m` basis values of the target means.
    basis: Vec<T>,
    m: usize,
    roughness: RoughnessOperator<T>,
    lambda: T,
}

pub(crate) fn check_mode<T: Scalar>(gmms: &PairedGmms<T>, mode: EstimationMode) -> Result<()> {
    gmms.validate()?;
    let want = mode == EstimationMode::Correspondence;
    if gmms.paired != want {
        return Err(Error::InvalidArgument(format!(
            "mixtures are {} but the configuration asks for mode `{mode}`",
            if gmms.paired { "paired" } else { "unpaired" }
        )));
    }
    Ok(())
}

impl<T: Scalar> CostModel<T> {
    pub fn new(
        gmms: &PairedGmms<T>,
        grid: &ControlGrid<T>,
        rbf: RbfKind<T>,
        cfg: &EstimationConfig<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        check_mode(gmms, cfg.mode)?;
        let m = grid.len();
        let target = gmms.target.means.clone();
        let mut basis = vec![T::zero(); target.len() * m];
        basis
            .par_chunks_mut(m)
            .zip(target.par_iter())
            .for_each(|(row, mu)| basis_into(grid, rbf, *mu, row));
        Ok(Self {
            target,
            palette: gmms.palette.means.clone(),
            paired: gmms.paired,
            basis,
            m,
            roughness: RoughnessOperator::new(grid, rbf, cfg.roughness_resolution),
            lambda: cfg.lambda,
        })
    }

    pub fn roughness_operator(&self) -> &RoughnessOperator<T> {
        &self.roughness
    }

    fn transformed(&self, w: &WarpParameters<T>) -> Vec<ColorTriple<T>> {
        self.target
            .par_iter()
            .zip(self.basis.par_chunks(self.m))
            .map(|(mu, psi)| w.eval_with_basis(*mu, psi))
            .collect()
    }

    pub fn evaluate(&self, w: &WarpParameters<T>, h: T) -> CostBreakdown<T> {
        let ys = self.transformed(w);
        let entropy = entropy_of_points(&ys, h, None);
        let cross = cross_of_points(&ys, &self.palette, h, self.paired, None);
        let roughness = self.roughness.value(&w.weights);
        self.assemble(entropy, cross, roughness)
    }

    fn assemble(&self, entropy: T, cross: T, roughness: T) -> CostBreakdown<T> {
        let total = entropy - T::lit(2.0) * cross + self.lambda * roughness;
        CostBreakdown {
            entropy,
            cross,
            roughness,
            total,
        }
    }

    /// Cost and its gradient with respect to the packed parameters.
    pub fn evaluate_with_gradient(
        &self,
        w: &WarpParameters<T>,
        h: T,
    ) -> (CostBreakdown<T>, Vec<T>) {
        let ys = self.transformed(w);
        let k = ys.len();
        let mut g_entropy = vec![ColorTriple::splat(T::zero()); k];
        let mut g_cross = vec![ColorTriple::splat(T::zero()); k];
        let entropy = entropy_of_points(&ys, h, Some(&mut g_entropy));
        let cross = cross_of_points(&ys, &self.palette, h, self.paired, Some(&mut g_cross));
        let roughness = self.roughness.value(&w.weights);

        let two = T::lit(2.0);
        let gy: Vec<ColorTriple<T>> = g_entropy
            .iter()
            .zip(&g_cross)
            .map(|(e, c)| e.sub(c.scale(two)))
            .collect();

        let mut grad = vec![T::zero(); w.theta_len()];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = CompensatedSum::new();
                for (g, mu) in gy.iter().zip(&self.target) {
                    acc.add(g.0[i] * mu.0[j]);
                }
                grad[3 * i + j] = acc.value();
            }
            let mut acc = CompensatedSum::new();
            for g in &gy {
                acc.add(g.0[i]);
            }
            grad[9 + i] = acc.value();
        }
        let m = self.m;
        let w_grad: Vec<[T; 3]> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut acc = [CompensatedSum::new(); 3];
                for (kk, g) in gy.iter().enumerate() {
                    let psi = self.basis[kk * m + j];
                    for c in 0..3 {
                        acc[c].add(g.0[c] * psi);
                    }
                }
                [acc[0].value(), acc[1].value(), acc[2].value()]
            })
            .collect();
        for (j, v) in w_grad.iter().enumerate() {
            grad[AFFINE_LEN + 3 * j..AFFINE_LEN + 3 * j + 3].copy_from_slice(v);
        }
        self.roughness
            .add_gradient(&w.weights, self.lambda, &mut grad);
        (self.assemble(entropy, cross, roughness), grad)
    }
}

/// Penalised L2 cost of `w` at bandwidth `h`.
pub fn cost<T: Scalar>(
    gmms: &PairedGmms<T>,
    w: &WarpParameters<T>,
    h: T,
    cfg: &EstimationConfig<T>,
) -> Result<CostBreakdown<T>> {
    check_h(h)?;
    Ok(CostModel::new(gmms, w.grid(), w.rbf(), cfg)?.evaluate(w, h))
}

/// Gradient of [`cost`]'s total with respect to the packed parameters.
pub fn cost_gradient<T: Scalar>(
    gmms: &PairedGmms<T>,
    w: &WarpParameters<T>,
    h: T,
    cfg: &EstimationConfig<T>,
) -> Result<Vec<T>> {
    check_h(h)?;
    Ok(CostModel::new(gmms, w.grid(), w.rbf(), cfg)?
        .evaluate_with_gradient(w, h)
        .1)
}

fn check_h<T: Scalar>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {h}"
        )));
    }
    Ok(())
}
