use rand::RngExt;

use crate::error::{Error, Result};
use crate::rng;
use crate::tn::linalg::{matmul, norm, thin_qr, Layout};

/// Physical dimension of every site.
pub const PHYS: usize = 2;

/// One rank-3 tensor `A[left][s][right]`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub right: usize,
    pub data: Vec<f64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, right: usize) -> Self {
        Self {
            left,
            right,
            data: vec![0.0; left * PHYS * right],
        }
    }

    pub fn get(&self, l: usize, s: usize, r: usize) -> f64 {
        self.data[(l * PHYS + s) * self.right + r]
    }

    /// `Σ_{l,s} A[l,s,r] A[l,s,r']`, should be the identity for a
    /// left-isometric tensor.
    pub fn left_gram(&self) -> Vec<f64> {
        let rows = self.left * PHYS;
        matmul(
            &self.data,
            Layout::transposed(rows, self.right),
            &self.data,
            Layout::row_major(rows, self.right),
        )
    }

    /// `Σ_{s,r} A[l,s,r] A[l',s,r]`.
    pub fn right_gram(&self) -> Vec<f64> {
        let cols = PHYS * self.right;
        matmul(
            &self.data,
            Layout::row_major(self.left, cols),
            &self.data,
            Layout::transposed(self.left, cols),
        )
    }
}

fn identity_deviation(gram: &[f64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[i * dim + j] - target).abs());
        }
    }
    worst
}

/// Open-boundary matrix product state over qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Mps {
    tensors: Vec<SiteTensor>,
}

impl Mps {
    pub fn new(tensors: Vec<SiteTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::InvalidArgument("an MPS needs at least one site".into()));
        }
        if tensors[0].left != 1 || tensors[tensors.len() - 1].right != 1 {
            return Err(Error::InvalidArgument("boundary bonds must have dimension 1".into()));
        }
        for (k, pair) in tensors.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::InvalidArgument(format!(
                    "bond {} mismatch: {} vs {}",
                    k + 1,
                    pair[0].right,
                    pair[1].left
                )));
            }
        }
        for t in &tensors {
            if t.data.len() != t.left * PHYS * t.right {
                return Err(Error::InvalidArgument("tensor storage size mismatch".into()));
            }
        }
        Ok(Self { tensors })
    }

    /// Product state `|bits⟩`.
    pub fn basis_state(bits: &[u8]) -> Result<Self> {
        let tensors = bits
            .iter()
            .map(|&b| {
                let mut t = SiteTensor::zeros(1, 1);
                t.data[usize::from(b & 1)] = 1.0;
                t
            })
            .collect();
        Self::new(tensors)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn site(&self, k: usize) -> &SiteTensor {
        &self.tensors[k]
    }

    pub(crate) fn site_mut(&mut self, k: usize) -> &mut SiteTensor {
        &mut self.tensors[k]
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.tensors
    }

    /// Bond dimensions including the two boundary bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.tensors.iter().map(|t| t.right))
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `⟨ψ|ψ⟩` by left-to-right transfer contraction.
    pub fn norm_squared(&self) -> f64 {
        let mut env = vec![1.0];
        for t in &self.tensors {
            env = transfer_identity(&env, t);
        }
        env[0]
    }

    pub fn is_left_isometric(&self, k: usize, tol: f64) -> bool {
        let t = &self.tensors[k];
        identity_deviation(&t.left_gram(), t.right) <= tol
    }

    pub fn is_right_isometric(&self, k: usize, tol: f64) -> bool {
        let t = &self.tensors[k];
        identity_deviation(&t.right_gram(), t.left) <= tol
    }

    /// Whether sites left of `center` are left-isometric and sites right
    /// of it right-isometric.
    pub fn is_canonical_at(&self, center: usize, tol: f64) -> bool {
        (0..center).all(|k| self.is_left_isometric(k, tol))
            && (center + 1..self.len()).all(|k| self.is_right_isometric(k, tol))
    }

    /// Moves into mixed canonical form around `center` by QR sweeps from
    /// both ends and rescales the center tensor to unit norm. Returns the
    /// norm the state had before rescaling.
    pub fn canonicalize(&mut self, center: usize) -> f64 {
        assert!(center < self.len());
        let mut scale = 1.0;
        for k in 0..center {
            scale *= self.shift_left_isometry(k);
        }
        for k in (center + 1..self.len()).rev() {
            scale *= self.shift_right_isometry(k);
        }
        let c = &mut self.tensors[center];
        let nrm = norm(&c.data);
        if nrm > 0.0 {
            c.data.iter_mut().for_each(|v| *v /= nrm);
        }
        nrm * scale
    }

    /// QR on site `k`; the isometry stays, `R / ‖R‖` moves into site
    /// `k + 1`. Returns `‖R‖`.
    fn shift_left_isometry(&mut self, k: usize) -> f64 {
        let (l, r) = (self.tensors[k].left, self.tensors[k].right);
        let (q, rmat, kept) = thin_qr(&self.tensors[k].data, l * PHYS, r);
        // Dividing out R's scale keeps long chains away from overflow.
        let scale = norm(&rmat).max(f64::MIN_POSITIVE);
        let rmat: Vec<f64> = rmat.iter().map(|v| v / scale).collect();
        self.tensors[k] = SiteTensor {
            left: l,
            right: kept,
            data: q,
        };
        let next = &self.tensors[k + 1];
        let data = matmul(
            &rmat,
            Layout::row_major(kept, r),
            &next.data,
            Layout::row_major(r, PHYS * next.right),
        );
        self.tensors[k + 1] = SiteTensor {
            left: kept,
            right: next.right,
            data,
        };
        scale
    }

    /// LQ on site `k` (via QR of the transpose); `L / ‖L‖` moves into
    /// site `k − 1`. Returns `‖L‖`.
    fn shift_right_isometry(&mut self, k: usize) -> f64 {
        let (l, r) = (self.tensors[k].left, self.tensors[k].right);
        let cols = PHYS * r;
        let transposed = transpose(&self.tensors[k].data, l, cols);
        let (q, rmat, kept) = thin_qr(&transposed, cols, l);
        let scale = norm(&rmat).max(f64::MIN_POSITIVE);
        // Aᵀ = Q R  ⇒  A = Rᵀ Qᵀ.
        self.tensors[k] = SiteTensor {
            left: kept,
            right: r,
            data: transpose(&q, cols, kept),
        };
        let prev = &self.tensors[k - 1];
        let rows = prev.left * PHYS;
        let scaled: Vec<f64> = rmat.iter().map(|v| v / scale).collect();
        let data = matmul(
            &prev.data,
            Layout::row_major(rows, l),
            &scaled,
            Layout::transposed(kept, l),
        );
        self.tensors[k - 1] = SiteTensor {
            left: prev.left,
            right: kept,
            data,
        };
        scale
    }

    /// Dense amplitudes; index bit `k` holds the state of site `k`.
    pub fn to_dense(&self) -> Result<Vec<f64>> {
        if self.len() > crate::instance::DENSE_QUBIT_LIMIT {
            return Err(Error::Capacity {
                what: "dense MPS sites",
                actual: self.len(),
                limit: crate::instance::DENSE_QUBIT_LIMIT,
            });
        }
        // rows: configurations of the sites seen so far; cols: open bond.
        let mut acc = vec![1.0];
        let mut configs = 1usize;
        let mut bond = 1usize;
        for (k, t) in self.tensors.iter().enumerate() {
            let mut next = vec![0.0; configs * PHYS * t.right];
            for cfg in 0..configs {
                for s in 0..PHYS {
                    let idx = cfg | (s << k);
                    for b in 0..bond {
                        let a = acc[cfg * bond + b];
                        if a == 0.0 {
                            continue;
                        }
                        for r in 0..t.right {
                            next[idx * t.right + r] += a * t.get(b, s, r);
                        }
                    }
                }
            }
            acc = next;
            configs *= PHYS;
            bond = t.right;
        }
        Ok(acc)
    }
}

pub(crate) fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// `E'[r', r] = Σ_{l', l, s} E[l', l] A[l', s, r'] A[l, s, r]`.
pub(crate) fn transfer_identity(env: &[f64], t: &SiteTensor) -> Vec<f64> {
    let rows = t.left;
    let cols = PHYS * t.right;
    // X[l', (s r)] = Σ_l E[l', l] A[l, (s r)]
    let x = matmul(env, Layout::row_major(rows, rows), &t.data, Layout::row_major(rows, cols));
    // E'[r', r] = Σ_{l', s} A[l', s, r'] X[l', s, r]
    matmul(
        &t.data,
        Layout::transposed(rows * PHYS, t.right),
        &x,
        Layout::row_major(rows * PHYS, t.right),
    )
}

/// `min(2^k, 2^(m−k), chi)` for every cut `k = 0..=m`.
pub fn bond_profile(m: usize, chi: usize) -> Vec<usize> {
    let cap = |e: usize| if e >= 63 { usize::MAX } else { 1usize << e };
    (0..=m).map(|k| cap(k).min(cap(m - k)).min(chi)).collect()
}

/// Entries i.i.d. uniform in `[0, 1)` with the capped bond profile,
/// then brought to unit norm in right-canonical form (center at site 0).
pub fn random_mps(m: usize, chi: usize, seed: u64) -> Result<Mps> {
    if m == 0 || chi == 0 {
        return Err(Error::InvalidArgument(
            "random MPS needs at least one site and chi >= 1".into(),
        ));
    }
    let mut rng = rng::seeded(seed);
    let bonds = bond_profile(m, chi);
    let tensors = (0..m)
        .map(|k| {
            let mut t = SiteTensor::zeros(bonds[k], bonds[k + 1]);
            t.data.iter_mut().for_each(|v| *v = rng.random::<f64>());
            // Per-site scaling keeps long products representable.
            let nrm = norm(&t.data);
            t.data.iter_mut().for_each(|v| *v /= nrm);
            t
        })
        .collect();
    let mut mps = Mps::new(tensors)?;
    mps.canonicalize(0);
    Ok(mps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_random_state() {
        let mps = random_mps(1, 4, 3).unwrap();
        assert_eq!(mps.bond_dims(), vec![1, 1]);
        assert!((mps.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bond_profile_caps() {
        assert_eq!(bond_profile(5, 2), vec![1, 2, 2, 2, 2, 1]);
        assert_eq!(bond_profile(6, 100), vec![1, 2, 4, 8, 4, 2, 1]);
        assert_eq!(random_mps(5, 2, 0).unwrap().bond_dims(), vec![1, 2, 2, 2, 2, 1]);
    }

    #[test]
    fn random_state_is_deterministic_normalized_and_canonical() {
        let a = random_mps(8, 3, 17).unwrap();
        assert_eq!(a, random_mps(8, 3, 17).unwrap());
        assert_ne!(a, random_mps(8, 3, 18).unwrap());
        assert!((a.norm_squared() - 1.0).abs() < 1e-12);
        assert!(a.is_canonical_at(0, 1e-10));
    }

    #[test]
    fn long_chains_stay_finite() {
        let mps = random_mps(249, 20, 1).unwrap();
        assert!((mps.norm_squared() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn canonicalization_preserves_state() {
        let mut mps = random_mps(6, 4, 2).unwrap();
        let before = mps.to_dense().unwrap();
        for center in [5, 2, 0, 3] {
            let nrm = mps.canonicalize(center);
            assert!((nrm - 1.0).abs() < 1e-10);
            assert!(mps.is_canonical_at(center, 1e-10));
            let after = mps.to_dense().unwrap();
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn basis_state_amplitudes() {
        let mps = Mps::basis_state(&[1, 0, 1]).unwrap();
        let dense = mps.to_dense().unwrap();
        let hot: Vec<usize> = dense.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, _)| i).collect();
        assert_eq!(hot, vec![0b101]);
    }

    #[test]
    fn mismatched_bonds_rejected() {
        let t = vec![SiteTensor::zeros(1, 2), SiteTensor::zeros(3, 1)];
        assert!(Mps::new(t).is_err());
    }
}
