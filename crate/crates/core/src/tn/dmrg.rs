use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{CutAssignment, WeightedGraph};
use crate::rng::{self, SolverRng};
use crate::tn::lanczos::lowest_eigenpair;
use crate::tn::linalg::{dot, gemm, matmul, norm, svd_truncate, Layout};
use crate::tn::mpo::{build_mpo, reduce_by_symmetry, Mpo, MpoSite};
use crate::tn::mps::{random_mps, transfer_identity, Mps, SiteTensor, PHYS};

/// Negative: bonds keep `min(chi, rank bound)` vectors, zero weights
/// included, so the bond bases stay complete.
const SVD_CUTOFF: f64 = -1.0;
/// Relative size of the random component added to each Lanczos start.
const START_NOISE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmrgConfig {
    pub chi: usize,
    pub max_sweeps: usize,
    pub energy_tolerance: f64,
    pub lanczos_iters: usize,
    pub seed: u64,
}

impl Default for DmrgConfig {
    fn default() -> Self {
        Self {
            chi: 2,
            max_sweeps: 20,
            energy_tolerance: 1e-8,
            lanczos_iters: 40,
            seed: 0,
        }
    }
}

impl DmrgConfig {
    pub fn with_chi(chi: usize, seed: u64) -> Self {
        Self {
            chi,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi == 0 || self.max_sweeps == 0 || self.lanczos_iters == 0 {
            return Err(Error::Config(
                "chi, max_sweeps and lanczos_iters must be positive".into(),
            ));
        }
        if self.energy_tolerance.is_nan() || self.energy_tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "energy tolerance {} must be positive",
                self.energy_tolerance
            )));
        }
        Ok(())
    }

    /// Rough upper bound on the bytes held by the state, both environment
    /// caches and one Lanczos cycle on an `n`-node graph.
    pub fn footprint_bytes(&self, n: usize) -> usize {
        let m = n.saturating_sub(1).max(1);
        let chi2 = self.chi * self.chi;
        let mpo_bond = n + 1;
        let two_site = 4 * chi2;
        8 * (2 * (m + 1) * mpo_bond * chi2
            + m * PHYS * chi2
            + (self.lanczos_iters + 3) * two_site
            + 3 * mpo_bond * two_site)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmrgResult {
    /// Variational energy of the final state, `⟨ψ|H|ψ⟩/⟨ψ|ψ⟩`.
    pub energy: f64,
    pub assignment: CutAssignment,
    pub sweeps_used: usize,
    /// Energy after each full left-right-left sweep.
    pub energy_history: Vec<f64>,
}

/// Operator environment `E[b][a'][a]` across one cut.
#[derive(Debug, Clone)]
struct Env {
    bond: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Env {
    fn trivial() -> Self {
        Self {
            bond: 1,
            dim: 1,
            data: vec![1.0],
        }
    }

    fn block(&self, b: usize) -> &[f64] {
        let d2 = self.dim * self.dim;
        &self.data[b * d2..(b + 1) * d2]
    }
}

fn extend_left(env: &Env, a: &SiteTensor, w: &MpoSite) -> Env {
    let (l, r) = (a.left, a.right);
    let cols = PHYS * r;
    let mut x = vec![0.0; env.bond * l * cols];
    for b in 0..env.bond {
        gemm(
            env.block(b),
            Layout::row_major(l, l),
            &a.data,
            Layout::row_major(l, cols),
            0.0,
            &mut x[b * l * cols..(b + 1) * l * cols],
        );
    }
    let mut y = vec![0.0; w.right * l * cols];
    for &(b, b2, d) in &w.entries {
        for lp in 0..l {
            for (s, ds) in d.iter().enumerate() {
                let src = &x[(b * l + lp) * cols + s * r..][..r];
                let dst = &mut y[(b2 * l + lp) * cols + s * r..][..r];
                dst.iter_mut().zip(src).for_each(|(o, v)| *o += ds * v);
            }
        }
    }
    let mut data = vec![0.0; w.right * r * r];
    for b2 in 0..w.right {
        gemm(
            &a.data,
            Layout::transposed(l * PHYS, r),
            &y[b2 * l * cols..(b2 + 1) * l * cols],
            Layout::row_major(l * PHYS, r),
            0.0,
            &mut data[b2 * r * r..(b2 + 1) * r * r],
        );
    }
    Env {
        bond: w.right,
        dim: r,
        data,
    }
}

fn extend_right(env: &Env, a: &SiteTensor, w: &MpoSite) -> Env {
    let (l, r) = (a.left, a.right);
    let cols = PHYS * r;
    let mut x = vec![0.0; env.bond * l * cols];
    for b2 in 0..env.bond {
        gemm(
            &a.data,
            Layout::row_major(l * PHYS, r),
            env.block(b2),
            Layout::transposed(r, r),
            0.0,
            &mut x[b2 * l * cols..(b2 + 1) * l * cols],
        );
    }
    let mut y = vec![0.0; w.left * l * cols];
    for &(b, b2, d) in &w.entries {
        for row in 0..l {
            for (s, ds) in d.iter().enumerate() {
                let src = &x[(b2 * l + row) * cols + s * r..][..r];
                let dst = &mut y[(b * l + row) * cols + s * r..][..r];
                dst.iter_mut().zip(src).for_each(|(o, v)| *o += ds * v);
            }
        }
    }
    let mut data = vec![0.0; w.left * l * l];
    for b in 0..w.left {
        gemm(
            &a.data,
            Layout::row_major(l, cols),
            &y[b * l * cols..(b + 1) * l * cols],
            Layout::transposed(l, cols),
            0.0,
            &mut data[b * l * l..(b + 1) * l * l],
        );
    }
    Env {
        bond: w.left,
        dim: l,
        data,
    }
}

/// Effective two-site operator at one bond, with scratch buffers.
struct TwoSite<'a> {
    left: &'a Env,
    right: &'a Env,
    w1: &'a MpoSite,
    w2: &'a MpoSite,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl<'a> TwoSite<'a> {
    fn new(left: &'a Env, right: &'a Env, w1: &'a MpoSite, w2: &'a MpoSite) -> Self {
        let block = left.dim * 4 * right.dim;
        Self {
            left,
            right,
            w1,
            w2,
            x: vec![0.0; left.bond * block],
            y: vec![0.0; w1.right * block],
            z: vec![0.0; w2.right * block],
        }
    }

    fn dim(&self) -> usize {
        self.left.dim * 4 * self.right.dim
    }

    /// `out = H_eff · theta` with `theta[a][s1][s2][c]`.
    fn apply(&mut self, theta: &[f64], out: &mut [f64]) {
        let (al, cr) = (self.left.dim, self.right.dim);
        let block = self.dim();
        let cols = 4 * cr;
        for b in 0..self.left.bond {
            gemm(
                self.left.block(b),
                Layout::row_major(al, al),
                theta,
                Layout::row_major(al, cols),
                0.0,
                &mut self.x[b * block..(b + 1) * block],
            );
        }
        let half = 2 * cr;
        self.y.fill(0.0);
        for &(b1, b2, d) in &self.w1.entries {
            for a in 0..al {
                for (s, ds) in d.iter().enumerate() {
                    let off = a * cols + s * half;
                    let src = &self.x[b1 * block + off..][..half];
                    let dst = &mut self.y[b2 * block + off..][..half];
                    dst.iter_mut().zip(src).for_each(|(o, v)| *o += ds * v);
                }
            }
        }
        self.z.fill(0.0);
        for &(b2, b3, d) in &self.w2.entries {
            for row in 0..2 * al {
                for (s, ds) in d.iter().enumerate() {
                    let off = row * half + s * cr;
                    let src = &self.y[b2 * block + off..][..cr];
                    let dst = &mut self.z[b3 * block + off..][..cr];
                    dst.iter_mut().zip(src).for_each(|(o, v)| *o += ds * v);
                }
            }
        }
        out.fill(0.0);
        for b3 in 0..self.right.bond {
            gemm(
                &self.z[b3 * block..(b3 + 1) * block],
                Layout::row_major(4 * al, cr),
                self.right.block(b3),
                Layout::transposed(cr, cr),
                1.0,
                out,
            );
        }
    }

    fn rayleigh(&mut self, theta: &[f64]) -> f64 {
        let mut h = vec![0.0; theta.len()];
        self.apply(theta, &mut h);
        dot(theta, &h) / dot(theta, theta)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Sweep {
    Right,
    Left,
}

struct Engine<'a> {
    mpo: &'a Mpo,
    mps: Mps,
    left: Vec<Env>,
    right: Vec<Env>,
    chi: usize,
    lanczos_iters: usize,
    rng: SolverRng,
}

impl<'a> Engine<'a> {
    fn new(mpo: &'a Mpo, mps: Mps, chi: usize, lanczos_iters: usize, seed: u64) -> Self {
        let m = mps.len();
        let mut right = vec![Env::trivial(); m + 1];
        for k in (2..m).rev() {
            right[k] = extend_right(&right[k + 1], mps.site(k), mpo.site(k));
        }
        Self {
            mpo,
            mps,
            left: vec![Env::trivial(); m + 1],
            right,
            chi,
            lanczos_iters,
            rng: rng::seeded(seed),
        }
    }

    /// Optimizes sites `(i, i + 1)` and leaves the center on the side the
    /// sweep is heading. Returns the energy of the accepted state.
    fn optimize(&mut self, i: usize, dir: Sweep) -> Result<f64> {
        let (a1, a2) = (self.mps.site(i), self.mps.site(i + 1));
        let (al, cr) = (a1.left, a2.right);
        let theta_old = matmul(
            &a1.data,
            Layout::row_major(al * PHYS, a1.right),
            &a2.data,
            Layout::row_major(a2.left, PHYS * cr),
        );
        let mut op = TwoSite::new(
            &self.left[i],
            &self.right[i + 2],
            self.mpo.site(i),
            self.mpo.site(i + 1),
        );
        let e_old = op.rayleigh(&theta_old);
        // The operator is diagonal in the product basis, so a Krylov space
        // grown from a basis-like state never leaves it.
        let scale = START_NOISE * norm(&theta_old);
        let start: Vec<f64> = theta_old
            .iter()
            .map(|v| v + scale * (self.rng.random::<f64>() - 0.5))
            .collect();
        let pair = lowest_eigenpair(|x, y| op.apply(x, y), &start, self.lanczos_iters)?;

        let split = |theta: &[f64]| {
            let mut t = svd_truncate(theta, al * PHYS, PHYS * cr, self.chi, SVD_CUTOFF);
            let s = norm(&t.s);
            t.s.iter_mut().for_each(|v| *v /= s);
            t
        };
        let mut t = split(&pair.vector);
        let k = t.kept();
        let mut rebuilt = t.u.clone();
        for row in 0..al * PHYS {
            for j in 0..k {
                rebuilt[row * k + j] *= t.s[j];
            }
        }
        let rebuilt = matmul(
            &rebuilt,
            Layout::row_major(al * PHYS, k),
            &t.vt,
            Layout::row_major(k, PHYS * cr),
        );
        let mut energy = op.rayleigh(&rebuilt);
        if !energy.is_finite() || energy > e_old {
            t = split(&theta_old);
            energy = e_old;
        }
        let k = t.kept();

        let (left_data, right_data) = match dir {
            Sweep::Right => {
                let mut sv = t.vt;
                for j in 0..k {
                    sv[j * PHYS * cr..(j + 1) * PHYS * cr]
                        .iter_mut()
                        .for_each(|v| *v *= t.s[j]);
                }
                (t.u, sv)
            }
            Sweep::Left => {
                let mut us = t.u;
                for row in 0..al * PHYS {
                    for j in 0..k {
                        us[row * k + j] *= t.s[j];
                    }
                }
                (us, t.vt)
            }
        };
        *self.mps.site_mut(i) = SiteTensor {
            left: al,
            right: k,
            data: left_data,
        };
        *self.mps.site_mut(i + 1) = SiteTensor {
            left: k,
            right: cr,
            data: right_data,
        };
        match dir {
            Sweep::Right => {
                self.left[i + 1] = extend_left(&self.left[i], self.mps.site(i), self.mpo.site(i));
            }
            Sweep::Left => {
                self.right[i + 1] = extend_right(
                    &self.right[i + 2],
                    self.mps.site(i + 1),
                    self.mpo.site(i + 1),
                );
            }
        }
        Ok(energy)
    }

    /// One left-to-right then right-to-left pass; the center ends at 0.
    fn sweep(&mut self) -> Result<f64> {
        let m = self.mps.len();
        let mut energy = f64::NAN;
        for i in 0..m - 1 {
            energy = self.optimize(i, Sweep::Right)?;
        }
        for i in (0..m - 1).rev() {
            energy = self.optimize(i, Sweep::Left)?;
        }
        Ok(energy)
    }
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` by left-to-right environment contraction.
pub fn expectation(mps: &Mps, mpo: &Mpo) -> Result<f64> {
    if mps.len() != mpo.len() {
        return Err(Error::InvalidArgument(format!(
            "MPS has {} sites, MPO has {}",
            mps.len(),
            mpo.len()
        )));
    }
    let mut env = Env::trivial();
    let mut gram = vec![1.0];
    for (a, w) in mps.sites().iter().zip(mpo.sites()) {
        env = extend_left(&env, a, w);
        gram = transfer_identity(&gram, a);
    }
    let nrm2 = gram[0];
    if !(nrm2.is_finite() && nrm2 > 0.0) {
        return Err(Error::Numeric(format!("state norm² {nrm2} is not positive")));
    }
    Ok(env.data[0] / nrm2)
}

/// `⟨Z_k⟩` for every site; 0 ↔ `z = +1`.
pub fn z_expectations(mps: &Mps) -> Result<Vec<f64>> {
    let m = mps.len();
    let mut right = vec![vec![1.0]; m + 1];
    for k in (0..m).rev() {
        right[k] = transfer_right(&right[k + 1], mps.site(k));
    }
    let nrm2 = right[0][0];
    if !(nrm2.is_finite() && nrm2 > 0.0) {
        return Err(Error::Numeric(format!("state norm² {nrm2} is not positive")));
    }
    let mut left = vec![1.0];
    let mut out = Vec::with_capacity(m);
    for (k, a) in mps.sites().iter().enumerate() {
        let mut z = 0.0;
        let (l, r) = (a.left, a.right);
        for lp in 0..l {
            for lq in 0..l {
                let e = left[lp * l + lq];
                if e == 0.0 {
                    continue;
                }
                for s in 0..PHYS {
                    let sign = if s == 0 { 1.0 } else { -1.0 };
                    for rp in 0..r {
                        for rq in 0..r {
                            z += sign
                                * e
                                * a.get(lp, s, rp)
                                * a.get(lq, s, rq)
                                * right[k + 1][rp * r + rq];
                        }
                    }
                }
            }
        }
        out.push(z / nrm2);
        left = transfer_identity(&left, a);
    }
    Ok(out)
}

/// `F[l', l] = Σ_{s, r', r} A[l', s, r'] A[l, s, r] F'[r', r]`.
fn transfer_right(env: &[f64], a: &SiteTensor) -> Vec<f64> {
    let (l, r) = (a.left, a.right);
    let x = matmul(
        &a.data,
        Layout::row_major(l * PHYS, r),
        env,
        Layout::transposed(r, r),
    );
    matmul(
        &a.data,
        Layout::row_major(l, PHYS * r),
        &x,
        Layout::transposed(l, PHYS * r),
    )
}

/// Two-site DMRG on the symmetry-reduced Max-Cut Hamiltonian.
pub fn dmrg_solve(g: &WeightedGraph, cfg: &DmrgConfig) -> Result<DmrgResult> {
    cfg.validate()?;
    if g.n() < 2 {
        return Err(Error::InvalidArgument(
            "DMRG needs a graph with at least two nodes".into(),
        ));
    }
    let reduced = reduce_by_symmetry(g);
    let mpo = build_mpo(&reduced)?;
    let m = reduced.sites;
    let (energy, mut bits, sweeps_used, energy_history) = if m == 1 {
        let d = mpo.site(0).entries[0].2;
        let bit = u8::from(d[1] < d[0]);
        let e = d[bit as usize];
        (e, vec![bit], 0, vec![e])
    } else {
        let mps = random_mps(m, cfg.chi, cfg.seed)?;
        let mut engine = Engine::new(&mpo, mps, cfg.chi, cfg.lanczos_iters, cfg.seed);
        let mut prev = expectation(&engine.mps, &mpo)?;
        let mut history = Vec::new();
        for _ in 0..cfg.max_sweeps {
            let e = engine.sweep()?;
            history.push(e);
            let improvement = prev - e;
            prev = e;
            if improvement < cfg.energy_tolerance {
                break;
            }
        }
        let mut mps = engine.mps;
        mps.canonicalize(0);
        let energy = expectation(&mps, &mpo)?;
        let bits = z_expectations(&mps)?
            .into_iter()
            .map(|z| u8::from(z < 0.0))
            .collect();
        (energy, bits, history.len(), history)
    };
    bits.push(0);
    let assignment = CutAssignment::evaluate(g, bits)?;
    Ok(DmrgResult {
        energy,
        assignment,
        sweeps_used,
        energy_history,
    })
}
