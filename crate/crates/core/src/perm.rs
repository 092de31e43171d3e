//! Permutations of line indices, orbit computations and a Schreier–Sims
//! stabilizer chain.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `{0, ..., n-1}` stored as its image array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// The cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        Permutation { images: (0..n).map(|i| (i + 1) % n).collect() }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree());
        Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &j)| *i == j).count()
    }

    fn first_moved(&self) -> Option<usize> {
        self.images.iter().enumerate().find(|(i, &j)| *i != j).map(|(i, _)| i)
    }
}

fn common_degree(gens: &[Permutation]) -> usize {
    let n = gens.first().map_or(0, Permutation::degree);
    assert!(gens.iter().all(|g| g.degree() == n), "generators of different degree");
    n
}

/// Orbit of `start` under the group generated by `gens`, in BFS order.
pub fn orbit(gens: &[Permutation], start: usize) -> Vec<usize> {
    let n = common_degree(gens).max(start + 1);
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g.apply(x);
            if !seen[y] {
                seen[y] = true;
                order.push(y);
                queue.push_back(y);
            }
        }
    }
    order
}

pub fn is_transitive(gens: &[Permutation]) -> bool {
    let n = common_degree(gens);
    n > 0 && orbit(gens, 0).len() == n
}

/// True iff the generated group is transitive on ordered pairs of distinct
/// points, decided by a BFS from the pair `(0, 1)`.
pub fn two_transitivity(gens: &[Permutation]) -> bool {
    let n = common_degree(gens);
    if n < 2 {
        return false;
    }
    let mut seen = vec![false; n * n];
    seen[1] = true;
    let mut count = 1usize;
    let mut queue = VecDeque::from([(0usize, 1usize)]);
    while let Some((a, b)) = queue.pop_front() {
        for g in gens {
            let (x, y) = (g.apply(a), g.apply(b));
            if !seen[x * n + y] {
                seen[x * n + y] = true;
                count += 1;
                queue.push_back((x, y));
            }
        }
    }
    count == n * (n - 1)
}

struct Level {
    base: usize,
    gens: Vec<Permutation>,
    /// `transversal[x]` maps `base` to `x`, for `x` in the basic orbit.
    transversal: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
}

impl Level {
    fn new(base: usize, n: usize) -> Self {
        let mut transversal = vec![None; n];
        transversal[base] = Some(Permutation::identity(n));
        Level { base, gens: Vec::new(), transversal, orbit: vec![base] }
    }

    fn rebuild_orbit(&mut self) {
        let n = self.transversal.len();
        let mut queue: VecDeque<usize> = self.orbit.iter().copied().collect();
        while let Some(x) = queue.pop_front() {
            let ux = self.transversal[x].clone().expect("orbit point without transversal");
            for g in &self.gens {
                let y = g.apply(x);
                if self.transversal[y].is_none() {
                    self.transversal[y] = Some(g.compose(&ux));
                    self.orbit.push(y);
                    queue.push_back(y);
                }
            }
        }
        debug_assert!(self.orbit.len() <= n);
    }
}

/// A base and strong generating set built by the Schreier–Sims algorithm.
/// Base points are chosen as the smallest point moved by the element that
/// forces a new level, scanning `0, 1, 2, ...`.
pub struct StabilizerChain {
    n: usize,
    levels: Vec<Level>,
}

impl StabilizerChain {
    pub fn new(gens: &[Permutation]) -> Self {
        let n = common_degree(gens);
        let mut chain = StabilizerChain { n, levels: Vec::new() };
        for g in gens {
            if let Some((residue, level)) = chain.sift(g, 0) {
                chain.add_generator(0, level, residue);
            }
        }
        chain.complete();
        chain
    }

    /// Sifts `g` from level `start` down. Returns the nontrivial residue and
    /// the level where it got stuck, or `None` if `g` is in the group.
    fn sift(&self, g: &Permutation, start: usize) -> Option<(Permutation, usize)> {
        let mut h = g.clone();
        for (k, level) in self.levels.iter().enumerate().skip(start) {
            let x = h.apply(level.base);
            match &level.transversal[x] {
                Some(u) => h = u.inverse().compose(&h),
                None => return Some((h, k)),
            }
        }
        if h.is_identity() {
            None
        } else {
            Some((h, self.levels.len()))
        }
    }

    /// Adds `g`, which fixes the first `to` base points, to levels
    /// `from..=to`.
    fn add_generator(&mut self, from: usize, to: usize, g: Permutation) {
        if to == self.levels.len() {
            let base = g.first_moved().expect("identity residue");
            self.levels.push(Level::new(base, self.n));
        }
        for level in &mut self.levels[from..=to] {
            level.gens.push(g.clone());
            level.rebuild_orbit();
        }
    }

    /// Repeats until every Schreier generator of every level sifts through
    /// the levels below it.
    fn complete(&mut self) {
        while let Some((from, residue, to)) = self.find_unsifted_schreier() {
            self.add_generator(from, to, residue);
        }
    }

    fn find_unsifted_schreier(&self) -> Option<(usize, Permutation, usize)> {
        for (i, level) in self.levels.iter().enumerate().rev() {
            for &x in &level.orbit {
                let ux = level.transversal[x].as_ref().unwrap();
                for s in &level.gens {
                    let uy = level.transversal[s.apply(x)].as_ref().unwrap();
                    let schreier = uy.inverse().compose(&s.compose(ux));
                    if let Some((residue, to)) = self.sift(&schreier, i + 1) {
                        return Some((i + 1, residue, to));
                    }
                }
            }
        }
        None
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        g.degree() == self.n && self.sift(g, 0).is_none()
    }
}

/// Order of the permutation group generated by `gens`.
pub fn group_order(gens: &[Permutation]) -> u128 {
    if gens.is_empty() {
        return 1;
    }
    StabilizerChain::new(gens).order()
}
