use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Diophantine;

/// Largest `|k|_1` searched when testing or matching integer relations.
fn relation_height(rank: usize) -> i32 {
    if rank <= 4 {
        8
    } else {
        4
    }
}

/// Relative tolerance for declaring `(k, omega) = 0` between declared frequencies.
const RELATION_TOL: f64 = 1e-12;
/// Relative tolerance for snapping a derived frequency onto an existing combination.
const MATCH_TOL: f64 = 1e-11;

/// Base frequencies `omega_1..omega_r`; every exponent is `rho + i (k, omega)` with `k` in `Z^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBasis {
    frequencies: Vec<f64>,
    delta: f64,
    gamma: Option<f64>,
}

/// Calls `f` on every nonzero `k` with `|k|_1 <= height`, in order of increasing height.
fn for_each_relation(rank: usize, height: i32, mut f: impl FnMut(&[i32]) -> bool) -> bool {
    fn rec(
        k: &mut Vec<i32>,
        pos: usize,
        remaining: i32,
        f: &mut dyn FnMut(&[i32]) -> bool,
    ) -> bool {
        if pos == k.len() {
            return remaining == 0 && f(k);
        }
        for a in 0..=remaining {
            let signs: &[i32] = if a == 0 { &[1] } else { &[1, -1] };
            for &s in signs {
                k[pos] = s * a;
                if rec(k, pos + 1, remaining - a, f) {
                    return true;
                }
            }
        }
        k[pos] = 0;
        false
    }
    let mut k = vec![0; rank];
    for h in 1..=height {
        if rec(&mut k, 0, h, &mut f) {
            return true;
        }
    }
    false
}

fn gcd_i32(a: i32, b: i32) -> i32 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn dot(k: &[i32], w: &[f64]) -> f64 {
    k.iter().zip(w).map(|(&a, &b)| a as f64 * b).sum()
}

impl SpectralBasis {
    /// Basis without frequencies (constant and polynomial terms only).
    pub fn empty() -> Self {
        SpectralBasis {
            frequencies: Vec::new(),
            delta: Diophantine::DEFAULT_DELTA,
            gamma: None,
        }
    }

    /// Validates that frequencies are finite, nonzero and free of low-order integer relations.
    pub fn new(frequencies: &[f64]) -> Result<Self> {
        for &w in frequencies {
            if !w.is_finite() || w == 0.0 {
                return Err(Error::InvalidFrequency(w));
            }
        }
        let scale = frequencies.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let mut found = None;
        for_each_relation(frequencies.len(), relation_height(frequencies.len()), |k| {
            let leading_positive = k.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0);
            if !leading_positive {
                return false;
            }
            let k1: i32 = k.iter().map(|x| x.abs()).sum();
            if dot(k, frequencies).abs() <= RELATION_TOL * scale * k1 as f64 {
                found = Some(k.to_vec());
                return true;
            }
            false
        });
        if let Some(k) = found {
            return Err(Error::ResonantBasis { k });
        }
        Ok(SpectralBasis {
            frequencies: frequencies.to_vec(),
            delta: Diophantine::DEFAULT_DELTA,
            gamma: None,
        })
    }

    pub fn with_diophantine(mut self, delta: f64, gamma: Option<f64>) -> Self {
        self.delta = delta;
        self.gamma = gamma;
        self
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn rank(&self) -> usize {
        self.frequencies.len()
    }

    /// Effective small-divisor parameters; `gamma` defaults to `max(r, 2)`.
    pub fn diophantine(&self) -> Diophantine {
        let mut d = Diophantine::for_rank(self.rank());
        d.delta = self.delta;
        if let Some(g) = self.gamma {
            d.gamma = g;
        }
        d
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// `(k, omega)`.
    pub fn frequency_of(&self, k: &[i32]) -> f64 {
        dot(k, &self.frequencies)
    }

    /// Integer vector representing `nu`, if it is a low-height combination of the basis.
    pub fn find(&self, nu: f64) -> Option<Vec<i32>> {
        let scale = self.frequencies.iter().fold(nu.abs(), |m, w| m.max(w.abs()));
        if nu.abs() <= MATCH_TOL * scale.max(f64::MIN_POSITIVE) {
            return Some(vec![0; self.rank()]);
        }
        let mut found = None;
        for_each_relation(self.rank(), relation_height(self.rank()), |k| {
            let k1: i32 = k.iter().map(|x| x.abs()).sum();
            if (dot(k, &self.frequencies) - nu).abs() <= MATCH_TOL * scale * k1 as f64 {
                found = Some(k.to_vec());
                return true;
            }
            false
        });
        found
    }

    /// Adds each of `extra` that is not already a combination of the basis.
    ///
    /// Returns the extended basis, the map of the old basis into it and the
    /// integer vector of each input frequency. A frequency that is rationally
    /// but not integrally dependent (for instance half of a base frequency)
    /// triggers a change of lattice basis, so the old map need not be padding.
    pub fn extend(&self, extra: &[f64]) -> Result<(SpectralBasis, Reindex, Vec<Vec<i32>>)> {
        let mut out = self.clone();
        let mut to_out = Reindex::identity(self.rank());
        let mut maps: Vec<Vec<i32>> = Vec::with_capacity(extra.len());
        for &nu in extra {
            if !nu.is_finite() {
                return Err(Error::InvalidFrequency(nu));
            }
            if let Some(k) = out.find(nu) {
                maps.push(k);
                continue;
            }
            match out.rational_relation(nu) {
                None => {
                    out.frequencies.push(nu.abs());
                    let grow = Reindex::padding(out.rank() - 1, out.rank());
                    to_out = to_out.then(&grow);
                    for m in &mut maps {
                        *m = grow.apply(m);
                    }
                    let mut k = vec![0; out.rank()];
                    k[out.rank() - 1] = if nu > 0.0 { 1 } else { -1 };
                    maps.push(k);
                }
                Some(relation) => {
                    let (rebased, old_map, k) = out.rebase(nu, &relation)?;
                    to_out = to_out.then(&old_map);
                    for m in &mut maps {
                        *m = old_map.apply(m);
                    }
                    maps.push(k);
                    out = rebased;
                }
            }
        }
        Ok((out, to_out, maps))
    }

    /// Primitive `(k, q)` with `q != 0` and `(k, omega) + q nu = 0`, if one of low height exists.
    fn rational_relation(&self, nu: f64) -> Option<Vec<i32>> {
        let mut gens = self.frequencies.clone();
        gens.push(nu);
        let r = gens.len();
        let scale = gens.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let mut found = None;
        for_each_relation(r, relation_height(r), |k| {
            if k[r - 1] == 0 {
                return false;
            }
            let k1: i32 = k.iter().map(|x| x.abs()).sum();
            if dot(k, &gens).abs() <= MATCH_TOL * scale * k1 as f64 {
                found = Some(k.to_vec());
                return true;
            }
            false
        });
        found.map(|mut k| {
            let g = k.iter().fold(0i32, |g, &x| gcd_i32(g, x));
            for x in &mut k {
                *x /= g;
            }
            k
        })
    }

    /// New lattice basis for `omega` together with `nu` given the relation `c`.
    fn rebase(&self, nu: f64, c: &[i32]) -> Result<(SpectralBasis, Reindex, Vec<i32>)> {
        let n = c.len();
        let mut gens: Vec<f64> = self.frequencies.clone();
        gens.push(nu);
        let mut c = c.to_vec();
        // e[i] expresses original generator i in the current generators
        let mut e: Vec<Vec<i32>> = (0..n)
            .map(|i| (0..n).map(|j| i32::from(i == j)).collect())
            .collect();
        loop {
            let mut nz: Vec<usize> = (0..n).filter(|&i| c[i] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&i| c[i].abs());
            let b = nz[0];
            let a = nz[1];
            // c_a g_a + c_b g_b = r g_a + c_b (g_b + m g_a)
            let m = c[a] / c[b];
            c[a] -= m * c[b];
            gens[b] += m as f64 * gens[a];
            for row in &mut e {
                row[a] -= m * row[b];
            }
        }
        let zero = (0..n)
            .find(|&i| c[i] != 0)
            .ok_or(Error::NoConvergence("lattice rebasing"))?;
        let keep: Vec<usize> = (0..n).filter(|&i| i != zero).collect();
        let mut freqs: Vec<f64> = keep.iter().map(|&j| gens[j]).collect();
        let mut flip = vec![1i32; keep.len()];
        for (j, f) in freqs.iter_mut().enumerate() {
            if *f < 0.0 {
                *f = -*f;
                flip[j] = -1;
            }
        }
        let column = |i: usize| -> Vec<i32> {
            keep.iter()
                .enumerate()
                .map(|(j, &src)| e[i][src] * flip[j])
                .collect()
        };
        let columns: Vec<Vec<i32>> = (0..n - 1).map(column).collect();
        let k_nu = column(n - 1);
        let basis = SpectralBasis {
            frequencies: freqs,
            delta: self.delta,
            gamma: self.gamma,
        };
        for w in &basis.frequencies {
            if *w == 0.0 || !w.is_finite() {
                return Err(Error::InvalidFrequency(*w));
            }
        }
        Ok((
            basis,
            Reindex {
                columns,
                target_rank: n - 1,
            },
            k_nu,
        ))
    }

    /// Union of two bases with the reindexing maps of both inputs.
    ///
    /// Column `i` of a map is the vector of input frequency `i` in the union.
    pub fn union(&self, other: &SpectralBasis) -> Result<(SpectralBasis, Reindex, Reindex)> {
        if self.delta != other.delta || self.gamma != other.gamma {
            return Err(Error::DiophantineMismatch);
        }
        if self.frequencies == other.frequencies {
            return Ok((
                self.clone(),
                Reindex::identity(self.rank()),
                Reindex::identity(self.rank()),
            ));
        }
        let (joined, left, maps) = self.extend(&other.frequencies)?;
        let right = Reindex {
            columns: maps,
            target_rank: joined.rank(),
        };
        Ok((joined, left, right))
    }

    /// True when `other` equals `self` or is a prefix of it.
    pub(crate) fn extends(&self, other: &SpectralBasis) -> bool {
        self.delta == other.delta
            && self.gamma == other.gamma
            && other.rank() <= self.rank()
            && self.frequencies[..other.rank()] == other.frequencies[..]
    }
}

/// Linear map of integer vectors between two bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Reindex {
    /// One column per source frequency.
    pub columns: Vec<Vec<i32>>,
    pub target_rank: usize,
}

impl Reindex {
    pub fn identity(rank: usize) -> Self {
        Self::padding(rank, rank)
    }

    pub fn padding(from: usize, to: usize) -> Self {
        let columns = (0..from)
            .map(|i| {
                let mut c = vec![0; to];
                c[i] = 1;
                c
            })
            .collect();
        Reindex {
            columns,
            target_rank: to,
        }
    }

    pub fn is_padding(&self) -> bool {
        self.columns
            .iter()
            .enumerate()
            .all(|(i, c)| c.iter().enumerate().all(|(j, &x)| x == i32::from(i == j)))
    }

    /// `other` after `self`.
    pub fn then(&self, other: &Reindex) -> Reindex {
        Reindex {
            columns: self.columns.iter().map(|c| other.apply(c)).collect(),
            target_rank: other.target_rank,
        }
    }

    pub fn apply(&self, k: &[i32]) -> Vec<i32> {
        let mut out = vec![0; self.target_rank];
        for (col, &ki) in self.columns.iter().zip(k) {
            if ki == 0 {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(col) {
                *o += ki * c;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idempotent_union() {
        let b = SpectralBasis::new(&[3.0]).unwrap();
        let (u, l, r) = b.union(&b).unwrap();
        assert_eq!(u.frequencies(), &[3.0]);
        assert_eq!(l, Reindex::identity(1));
        assert_eq!(r, Reindex::identity(1));
    }

    #[test]
    fn disjoint_union() {
        let a = SpectralBasis::new(&[1.0]).unwrap();
        let b = SpectralBasis::new(&[2f64.sqrt()]).unwrap();
        let (u, l, r) = a.union(&b).unwrap();
        assert_eq!(u.frequencies(), &[1.0, 2f64.sqrt()]);
        assert_eq!(l.apply(&[3]), [3, 0]);
        assert_eq!(r.apply(&[-2]), [0, -2]);
    }

    #[test]
    fn dependent_frequency_is_mapped() {
        let a = SpectralBasis::new(&[1.0, 2f64.sqrt()]).unwrap();
        let b = SpectralBasis::new(&[1.0 + 2f64.sqrt()]).unwrap();
        let (u, _, r) = a.union(&b).unwrap();
        assert_eq!(u.rank(), 2);
        assert_eq!(r.apply(&[1]), [1, 1]);
    }

    #[test]
    fn resonant_declaration_rejected() {
        let w = 12.0;
        match SpectralBasis::new(&[w, w]) {
            Err(Error::ResonantBasis { k }) => assert_eq!(k, [1, -1]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            SpectralBasis::new(&[w, 2.0 * w]),
            Err(Error::ResonantBasis { .. })
        ));
        assert!(SpectralBasis::new(&[0.0]).is_err());
        assert!(SpectralBasis::new(&[f64::NAN]).is_err());
    }

    #[test]
    fn rational_dependence_rebases() {
        let a = SpectralBasis::new(&[1.0, 3f64.sqrt()]).unwrap();
        let (b, old, maps) = a.extend(&[0.5, 1.5]).unwrap();
        assert_eq!(b.rank(), 2);
        // every old and new frequency is an integer combination of the new basis
        for (i, &w) in a.frequencies().iter().enumerate() {
            assert!((b.frequency_of(&old.columns[i]) - w).abs() < 1e-14);
        }
        for (k, &w) in maps.iter().zip(&[0.5, 1.5]) {
            assert!((b.frequency_of(k) - w).abs() < 1e-14);
        }
        assert!(SpectralBasis::new(b.frequencies()).is_ok());
    }

    #[test]
    fn diophantine_mismatch() {
        let a = SpectralBasis::new(&[1.0]).unwrap();
        let b = a.clone().with_diophantine(1e-6, None);
        assert_eq!(a.union(&b).unwrap_err(), Error::DiophantineMismatch);
        assert_eq!(a.diophantine().gamma, 2.0);
        let c = SpectralBasis::new(&[1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
        assert_eq!(c.diophantine().gamma, 3.0);
    }

    #[test]
    fn extend_prefers_existing_and_signs() {
        let a = SpectralBasis::new(&[1.0]).unwrap();
        let (b, old, maps) = a.extend(&[-1.0, 0.0, 2f64.sqrt(), -2f64.sqrt(), 1.0 + 2f64.sqrt()]).unwrap();
        assert_eq!(b.frequencies(), &[1.0, 2f64.sqrt()]);
        assert!(old.is_padding());
        assert_eq!(maps, [vec![-1, 0], vec![0, 0], vec![0, 1], vec![0, -1], vec![1, 1]]);
    }
}
