use crate::error::{ConfigError, SolveError};

/// Service class of a link. Within a subregion links `0..n_nds` are
/// non-delay-sensitive and `n_nds..n_nds + n_ds` are delay-sensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkClass {
    NonDelaySensitive,
    DelaySensitive,
}

/// A straight road segment starting at `origin` and running along the unit
/// vector `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub origin: [f64; 2],
    pub axis: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subregion {
    /// 1..=4.
    pub id: usize,
    pub n_nds: usize,
    pub n_ds: usize,
    pub n_rbs: usize,
    pub geometry: Segment,
}

impl Subregion {
    pub fn new(id: usize, n_nds: usize, n_ds: usize, n_rbs: usize) -> Self {
        Self { id, n_nds, n_ds, n_rbs, geometry: Segment::arm(id, 0.0, 0.0) }
    }

    pub fn n_links(&self) -> usize {
        self.n_nds + self.n_ds
    }

    pub fn class_of(&self, link: usize) -> LinkClass {
        if link < self.n_nds {
            LinkClass::NonDelaySensitive
        } else {
            LinkClass::DelaySensitive
        }
    }
}

impl Segment {
    /// Arm `id` (1..=4) of a four-way intersection centred on the base station,
    /// pointing east, north, west and south in turn.
    pub fn arm(id: usize, offset: f64, length: f64) -> Self {
        let axis = match (id + 3) % 4 {
            0 => [1.0, 0.0],
            1 => [0.0, 1.0],
            2 => [-1.0, 0.0],
            _ => [0.0, -1.0],
        };
        Self { origin: [axis[0] * offset, axis[1] * offset], axis, length }
    }

    pub fn point_at(&self, along: f64, lateral: f64) -> [f64; 2] {
        let normal = [-self.axis[1], self.axis[0]];
        [
            self.origin[0] + self.axis[0] * along + normal[0] * lateral,
            self.origin[1] + self.axis[1] * along + normal[1] * lateral,
        ]
    }
}

/// Binary RB-to-link assignment, stored RB-major: entry `(k, l)` is one when
/// RB `k` carries link `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AllocationMatrix {
    n_rbs: usize,
    n_links: usize,
    entries: Vec<bool>,
}

impl AllocationMatrix {
    pub fn zeros(n_rbs: usize, n_links: usize) -> Self {
        Self { n_rbs, n_links, entries: vec![false; n_rbs * n_links] }
    }

    /// Builds the matrix where link `l` holds RB `rb_of_link[l]`, if any.
    pub fn from_assignment(n_rbs: usize, rb_of_link: &[Option<usize>]) -> Self {
        let mut m = Self::zeros(n_rbs, rb_of_link.len());
        for (l, rb) in rb_of_link.iter().enumerate() {
            if let Some(k) = rb {
                m.set(*k, l, true);
            }
        }
        m
    }

    pub fn n_rbs(&self) -> usize {
        self.n_rbs
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn get(&self, rb: usize, link: usize) -> bool {
        self.entries[rb * self.n_links + link]
    }

    pub fn set(&mut self, rb: usize, link: usize, on: bool) {
        self.entries[rb * self.n_links + link] = on;
    }

    /// The RB held by `link`, or `None` when idle. If the matrix violates the
    /// one-RB-per-link rule the lowest RB index is reported.
    pub fn rb_of(&self, link: usize) -> Option<usize> {
        (0..self.n_rbs).find(|&k| self.get(k, link))
    }

    pub fn assignment(&self) -> Vec<Option<usize>> {
        (0..self.n_links).map(|l| self.rb_of(l)).collect()
    }

    pub fn is_idle(&self) -> bool {
        self.entries.iter().all(|e| !e)
    }
}

pub fn validate_allocation(alloc: &AllocationMatrix, subregion: &Subregion) -> Result<bool, ConfigError> {
    if alloc.n_rbs != subregion.n_rbs || alloc.n_links != subregion.n_links() {
        return Err(ConfigError::Dimension {
            got_rbs: alloc.n_rbs,
            got_links: alloc.n_links,
            want_rbs: subregion.n_rbs,
            want_links: subregion.n_links(),
        });
    }
    let n1 = subregion.n_nds;
    for k in 0..alloc.n_rbs {
        let nds = (0..n1).filter(|&l| alloc.get(k, l)).count();
        let ds = (n1..alloc.n_links).filter(|&l| alloc.get(k, l)).count();
        // at most one link of each class per RB also caps a shared RB at one
        // non-delay-sensitive plus one delay-sensitive link
        if nds > 1 || ds > 1 {
            return Ok(false);
        }
    }
    for l in 0..alloc.n_links {
        if (0..alloc.n_rbs).filter(|&k| alloc.get(k, l)).count() > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Number of ways `n` links of one class can each take at most one of `r`
/// RBs with no RB used twice.
fn partial_injections(n: usize, r: usize) -> u128 {
    let mut total: u128 = 0;
    for j in 0..=n.min(r) {
        let mut choose: u128 = 1;
        for i in 0..j {
            choose = choose * (n - i) as u128 / (i + 1) as u128;
        }
        let mut falling: u128 = 1;
        for i in 0..j {
            falling *= (r - i) as u128;
        }
        total += choose * falling;
    }
    total
}

/// Size of the feasible action set without materialising it.
pub fn action_count(subregion: &Subregion) -> u128 {
    partial_injections(subregion.n_nds, subregion.n_rbs) * partial_injections(subregion.n_ds, subregion.n_rbs)
}

/// Every feasible allocation, in odometer order over links with link 0 most
/// significant and "idle" before RB 0, so the idle matrix comes first.
pub fn enumerate_feasible_actions(subregion: &Subregion, cap: usize) -> Result<Vec<AllocationMatrix>, SolveError> {
    let count = action_count(subregion);
    if count > cap as u128 {
        return Err(SolveError::ActionSpaceTooLarge { count, cap });
    }
    let n_links = subregion.n_links();
    let n_rbs = subregion.n_rbs;
    let mut out = Vec::with_capacity(count as usize);
    let mut choice: Vec<Option<usize>> = vec![None; n_links];
    let mut used_nds = vec![false; n_rbs];
    let mut used_ds = vec![false; n_rbs];

    fn recurse(
        l: usize,
        sub: &Subregion,
        choice: &mut Vec<Option<usize>>,
        used_nds: &mut [bool],
        used_ds: &mut [bool],
        out: &mut Vec<AllocationMatrix>,
    ) {
        if l == choice.len() {
            out.push(AllocationMatrix::from_assignment(sub.n_rbs, choice));
            return;
        }
        choice[l] = None;
        recurse(l + 1, sub, choice, used_nds, used_ds, out);
        for k in 0..sub.n_rbs {
            let used = if l < sub.n_nds { &mut *used_nds } else { &mut *used_ds };
            if used[k] {
                continue;
            }
            used[k] = true;
            choice[l] = Some(k);
            recurse(l + 1, sub, choice, used_nds, used_ds, out);
            let used = if l < sub.n_nds { &mut *used_nds } else { &mut *used_ds };
            used[k] = false;
        }
        choice[l] = None;
    }

    recurse(0, subregion, &mut choice, &mut used_nds, &mut used_ds, &mut out);
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}
