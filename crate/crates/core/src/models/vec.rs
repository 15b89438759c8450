use alloc::vec::Vec;

/// Sparse integer vector, sorted by coordinate, with no stored zeros.
///
/// Conversion outputs can have thousands of dimensions while each transition
/// only touches a handful of them, so effects and configurations are kept
/// sparse throughout.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SparseVec {
    entries: Vec<(u32, i64)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec::default()
    }

    pub fn unit(coord: u32, value: i64) -> Self {
        let mut v = SparseVec::new();
        v.set(coord, value);
        v
    }

    pub fn from_entries(mut entries: Vec<(u32, i64)>) -> Self {
        entries.retain(|&(_, v)| v != 0);
        entries.sort_unstable_by_key(|&(c, _)| c);
        let mut out: Vec<(u32, i64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => out.push((c, v)),
            }
        }
        out.retain(|&(_, v)| v != 0);
        SparseVec { entries: out }
    }

    pub fn from_dense(dense: &[i64]) -> Self {
        SparseVec {
            entries: dense
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0)
                .map(|(c, &v)| (c as u32, v))
                .collect(),
        }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<i64> {
        let mut out = alloc::vec![0i64; dim];
        for &(c, v) in &self.entries {
            out[c as usize] = v;
        }
        out
    }

    pub fn get(&self, coord: u32) -> i64 {
        match self.entries.binary_search_by_key(&coord, |&(c, _)| c) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    pub fn set(&mut self, coord: u32, value: i64) {
        match self.entries.binary_search_by_key(&coord, |&(c, _)| c) {
            Ok(i) => {
                if value == 0 {
                    self.entries.remove(i);
                } else {
                    self.entries[i].1 = value;
                }
            }
            Err(i) => {
                if value != 0 {
                    self.entries.insert(i, (coord, value));
                }
            }
        }
    }

    pub fn add(&mut self, coord: u32, delta: i64) {
        if delta != 0 {
            self.set(coord, self.get(coord) + delta);
        }
    }

    pub fn add_vec(&mut self, other: &SparseVec) {
        if other.entries.is_empty() {
            return;
        }
        let merged = SparseVec::from_entries(
            self.entries
                .iter()
                .chain(other.entries.iter())
                .copied()
                .collect(),
        );
        *self = merged;
    }

    pub fn plus(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_vec(other);
        out
    }

    pub fn negated(&self) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|&(c, v)| (c, -v)).collect(),
        }
    }

    pub fn scaled(&self, k: i64) -> SparseVec {
        if k == 0 {
            return SparseVec::new();
        }
        SparseVec {
            entries: self.entries.iter().map(|&(c, v)| (c, v * k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(c, _)| c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs(&self) -> i64 {
        self.entries.iter().map(|&(_, v)| v.abs()).max().unwrap_or(0)
    }

    pub fn max_coord(&self) -> Option<u32> {
        self.entries.last().map(|&(c, _)| c)
    }
}

impl FromIterator<(u32, i64)> for SparseVec {
    fn from_iter<T: IntoIterator<Item = (u32, i64)>>(iter: T) -> Self {
        SparseVec::from_entries(iter.into_iter().collect())
    }
}
