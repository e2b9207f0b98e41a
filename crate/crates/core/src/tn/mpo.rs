//! Exact matrix product operator for the Max-Cut Ising Hamiltonian.
//!
//! With `x_i = (1 − z_i)/2`, the negated cut is
//! `H = Σ_{i<j} −w_ij/2 (I − Z_i Z_j)`. Pinning the last node to `z = +1`
//! turns its couplings into local fields and leaves `n − 1` sites:
//!
//! ```text
//! H' = c·I + Σ_i h_i Z_i + Σ_{i<j} J_ij Z_i Z_j
//! c = −½ Σ w,   h_i = w_{i,n−1}/2,   J_ij = w_ij/2
//! ```
//!
//! The MPO is read off a finite automaton. At every cut between sites the
//! channels are `Prefix` (only identities so far), `Done` (every term
//! already complete), and one channel per pending two-body interaction.
//! A pending interaction is carried either by its left endpoint
//! (`Open(j)`: "a `Z_j` was emitted, its partners are still ahead") or by
//! its right endpoint (`Pending(l)`: "the field `Σ_{j<cut} J_jl Z_j` is
//! waiting for `Z_l`"). Each cut uses whichever family is smaller; once
//! the right-endpoint family is chosen it is kept to the end. Sites with
//! no remaining partners get no channel, so the bond at a cut is
//! `2 + min(#left endpoints still open, #right endpoints still awaited)`
//! in the interior and 1 at both ends.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instance::WeightedGraph;

/// `c·I + Σ h_i Z_i + Σ J_ij Z_i Z_j` on `sites` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonian {
    pub sites: usize,
    pub constant: f64,
    pub fields: Vec<f64>,
    /// `(i, j, J_ij)` with `i < j < sites`.
    pub couplings: Vec<(usize, usize, f64)>,
}

impl ReducedHamiltonian {
    /// Diagonal of the operator; index bit `k` is the state of site `k`
    /// (0 ↔ `z = +1`).
    pub fn dense_diagonal(&self) -> Result<Vec<f64>> {
        let m = self.sites;
        if m > crate::instance::DENSE_QUBIT_LIMIT {
            return Err(Error::Capacity {
                what: "dense operator sites",
                actual: m,
                limit: crate::instance::DENSE_QUBIT_LIMIT,
            });
        }
        let spin = |x: usize, k: usize| if (x >> k) & 1 == 0 { 1.0 } else { -1.0 };
        Ok((0..1usize << m)
            .map(|x| {
                let mut e = self.constant;
                for (k, h) in self.fields.iter().enumerate() {
                    e += h * spin(x, k);
                }
                for &(i, j, c) in &self.couplings {
                    e += c * spin(x, i) * spin(x, j);
                }
                e
            })
            .collect())
    }
}

/// Fixes node `n − 1` to partition 0 using the global flip symmetry.
pub fn reduce_by_symmetry(g: &WeightedGraph) -> ReducedHamiltonian {
    let n = g.n();
    let last = n - 1;
    let mut fields = vec![0.0; last];
    let mut couplings = Vec::new();
    let mut constant = 0.0;
    for e in g.edges() {
        constant -= 0.5 * e.w;
        if e.v == last {
            fields[e.u] += 0.5 * e.w;
        } else {
            couplings.push((e.u, e.v, 0.5 * e.w));
        }
    }
    ReducedHamiltonian {
        sites: last,
        constant,
        fields,
        couplings,
    }
}

/// Automaton state carried across a bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Prefix,
    Done,
    /// `Z_j` emitted at site `j`, partners still ahead.
    Open(usize),
    /// Accumulated field waiting for `Z_l` at site `l`.
    Pending(usize),
}

/// One site of an operator that is diagonal in the physical index:
/// `W[left][right] = diag(d0, d1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpoSite {
    pub left: usize,
    pub right: usize,
    /// `(left channel, right channel, [⟨0|W|0⟩, ⟨1|W|1⟩])`, no duplicates.
    pub entries: Vec<(usize, usize, [f64; 2])>,
}

impl MpoSite {
    /// Dense rank-4 view `W[left][s][s'][right]`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.left * 4 * self.right];
        for &(a, b, d) in &self.entries {
            for (s, v) in d.iter().enumerate() {
                out[((a * 2 + s) * 2 + s) * self.right + b] += v;
            }
        }
        out
    }
}

/// Matrix product operator with diagonal site matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpo {
    sites: Vec<MpoSite>,
    channels: Vec<Vec<Channel>>,
}

impl Mpo {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site(&self, k: usize) -> &MpoSite {
        &self.sites[k]
    }

    pub fn sites(&self) -> &[MpoSite] {
        &self.sites
    }

    /// Channel labels at every cut `0..=len`.
    pub fn channels(&self) -> &[Vec<Channel>] {
        &self.channels
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.channels.iter().map(Vec::len).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Contracts the whole chain into the operator diagonal.
    pub fn contract_diagonal(&self) -> Result<Vec<f64>> {
        let m = self.len();
        if m > crate::instance::DENSE_QUBIT_LIMIT {
            return Err(Error::Capacity {
                what: "dense MPO sites",
                actual: m,
                limit: crate::instance::DENSE_QUBIT_LIMIT,
            });
        }
        // acc[config][bond]
        let mut acc = vec![1.0];
        let mut bond = 1;
        for (k, site) in self.sites.iter().enumerate() {
            let configs = 1usize << k;
            let mut next = vec![0.0; configs * 2 * site.right];
            for cfg in 0..configs {
                for &(a, b, d) in &site.entries {
                    let v = acc[cfg * bond + a];
                    if v == 0.0 {
                        continue;
                    }
                    for (s, ds) in d.iter().enumerate() {
                        next[(cfg | (s << k)) * site.right + b] += v * ds;
                    }
                }
            }
            acc = next;
            bond = site.right;
        }
        Ok(acc)
    }

    /// Contracts the full `2^m × 2^m` operator from the rank-4 tensors,
    /// off-diagonal entries included. Row-major, basis as in
    /// [`Mpo::contract_diagonal`].
    pub fn contract_dense(&self) -> Result<Vec<f64>> {
        const LIMIT: usize = 10;
        let m = self.len();
        if m > LIMIT {
            return Err(Error::Capacity {
                what: "dense MPO matrix sites",
                actual: m,
                limit: LIMIT,
            });
        }
        // acc[(row, col)][bond] over the first k sites.
        let mut acc = vec![1.0];
        let mut bond = 1;
        for (k, site) in self.sites.iter().enumerate() {
            let dense = site.to_dense();
            let dim = 1usize << k;
            let next_dim = dim << 1;
            let mut next = vec![0.0; next_dim * next_dim * site.right];
            for row in 0..dim {
                for col in 0..dim {
                    for a in 0..bond {
                        let v = acc[(row * dim + col) * bond + a];
                        if v == 0.0 {
                            continue;
                        }
                        for s in 0..2 {
                            for t in 0..2 {
                                let r2 = row | (s << k);
                                let c2 = col | (t << k);
                                for b in 0..site.right {
                                    let w = dense[((a * 2 + s) * 2 + t) * site.right + b];
                                    next[(r2 * next_dim + c2) * site.right + b] += v * w;
                                }
                            }
                        }
                    }
                }
            }
            acc = next;
            bond = site.right;
        }
        Ok(acc)
    }

    /// Diagnostic listing of every nonzero channel transition.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mpo sites={} bonds={:?}", self.len(), self.bond_dims());
        for (k, site) in self.sites.iter().enumerate() {
            let _ = writeln!(out, "site {k} ({}x{})", site.left, site.right);
            for &(a, b, d) in &site.entries {
                let _ = writeln!(
                    out,
                    "  {:?} -> {:?}: diag({}, {})",
                    self.channels[k][a],
                    self.channels[k + 1][b],
                    d[0],
                    d[1]
                );
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    LeftEndpoints,
    RightEndpoints,
}

/// `a·I + b·Z` as a diagonal.
fn diag(a: f64, b: f64) -> [f64; 2] {
    [a + b, a - b]
}

/// Builds the exact automaton MPO for a reduced Hamiltonian.
pub fn build_mpo(h: &ReducedHamiltonian) -> Result<Mpo> {
    let m = h.sites;
    if m == 0 {
        return Err(Error::InvalidArgument("MPO needs at least one site".into()));
    }
    let mut partners: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut coupling = std::collections::HashMap::new();
    for &(i, j, c) in &h.couplings {
        if c == 0.0 {
            continue;
        }
        partners[i].push((j, c));
        partners[j].push((i, c));
        *coupling.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
    }
    let last_partner: Vec<Option<usize>> = partners
        .iter()
        .enumerate()
        .map(|(i, p)| p.iter().map(|&(j, _)| j).filter(|&j| j > i).max())
        .collect();
    let first_partner: Vec<Option<usize>> = partners
        .iter()
        .enumerate()
        .map(|(i, p)| p.iter().map(|&(j, _)| j).filter(|&j| j < i).min())
        .collect();

    // Channel families per cut.
    let mut families = Vec::with_capacity(m + 1);
    let mut channels: Vec<Vec<Channel>> = Vec::with_capacity(m + 1);
    let mut switched = false;
    for cut in 0..=m {
        let open: Vec<usize> = (0..cut)
            .filter(|&j| last_partner[j].is_some_and(|l| l >= cut))
            .collect();
        let pending: Vec<usize> = (cut..m)
            .filter(|&l| first_partner[l].is_some_and(|j| j < cut))
            .collect();
        if !switched && pending.len() < open.len() {
            switched = true;
        }
        let family = if switched {
            Family::RightEndpoints
        } else {
            Family::LeftEndpoints
        };
        let mut ch = Vec::new();
        if cut < m {
            ch.push(Channel::Prefix);
        }
        if cut > 0 {
            ch.push(Channel::Done);
        }
        match family {
            Family::LeftEndpoints => ch.extend(open.into_iter().map(Channel::Open)),
            Family::RightEndpoints => ch.extend(pending.into_iter().map(Channel::Pending)),
        }
        families.push(family);
        channels.push(ch);
    }

    let share = h.constant / m as f64;
    let mut sites = Vec::with_capacity(m);
    for s in 0..m {
        let (inc, out) = (&channels[s], &channels[s + 1]);
        let find = |list: &[Channel], c: Channel| list.iter().position(|&x| x == c);
        let mut entries: Vec<(usize, usize, [f64; 2])> = Vec::new();
        let mut push = |a: Option<usize>, b: Option<usize>, d: [f64; 2]| {
            if let (Some(a), Some(b)) = (a, b) {
                if let Some(e) = entries.iter_mut().find(|e| e.0 == a && e.1 == b) {
                    e.2[0] += d[0];
                    e.2[1] += d[1];
                } else {
                    entries.push((a, b, d));
                }
            }
        };
        let prefix_in = find(inc, Channel::Prefix);
        let done_out = find(out, Channel::Done);

        push(prefix_in, find(out, Channel::Prefix), diag(1.0, 0.0));
        push(find(inc, Channel::Done), done_out, diag(1.0, 0.0));
        push(prefix_in, done_out, diag(share, h.fields[s]));

        for (a, &ch) in inc.iter().enumerate() {
            match ch {
                Channel::Open(j) => {
                    if let Some(&c) = coupling.get(&(j, s)) {
                        push(Some(a), done_out, diag(0.0, c));
                    }
                    match families[s + 1] {
                        Family::LeftEndpoints => {
                            push(Some(a), find(out, Channel::Open(j)), diag(1.0, 0.0));
                        }
                        Family::RightEndpoints => {
                            for (b, &oc) in out.iter().enumerate() {
                                if let Channel::Pending(l) = oc {
                                    if let Some(&c) = coupling.get(&(j, l)) {
                                        push(Some(a), Some(b), diag(c, 0.0));
                                    }
                                }
                            }
                        }
                    }
                }
                Channel::Pending(l) if l == s => push(Some(a), done_out, diag(0.0, 1.0)),
                Channel::Pending(l) => {
                    push(Some(a), find(out, Channel::Pending(l)), diag(1.0, 0.0));
                }
                Channel::Prefix | Channel::Done => {}
            }
        }
        for (b, &oc) in out.iter().enumerate() {
            match oc {
                Channel::Open(j) if j == s => push(prefix_in, Some(b), diag(0.0, 1.0)),
                Channel::Pending(l) => {
                    if let Some(&c) = coupling.get(&(s, l)) {
                        push(prefix_in, Some(b), diag(0.0, c));
                    }
                }
                _ => {}
            }
        }
        sites.push(MpoSite {
            left: inc.len(),
            right: out.len(),
            entries,
        });
    }
    Ok(Mpo { sites, channels })
}
