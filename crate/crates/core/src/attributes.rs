//! Attribute assignments `atb(v)` and their inverted lists `D_l`.

use crate::error::{Error, Result};

/// Per-vector attribute sets over `c` attributes, with the inverted lists
/// kept as the exact transpose.
///
/// Attribute classes, when present, partition `[0, c)` into contiguous
/// blocks `C_0, C_1, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeTable {
    c: usize,
    atb: Vec<Vec<usize>>,
    inverted: Vec<Vec<usize>>,
    classes: Option<Vec<Vec<usize>>>,
}

impl AttributeTable {
    /// Multi-attribute table. Each vector's list is sorted and deduplicated.
    pub fn new(c: usize, atb: Vec<Vec<usize>>) -> Result<Self> {
        if c == 0 {
            return Err(Error::param("attribute count c must be at least 1"));
        }
        if atb.is_empty() {
            return Err(Error::Empty("attribute table covers no vectors"));
        }
        let mut inverted = vec![Vec::new(); c];
        let mut atb = atb;
        for (id, attrs) in atb.iter_mut().enumerate() {
            attrs.sort_unstable();
            attrs.dedup();
            if attrs.is_empty() {
                return Err(Error::Config(format!("vector {id} has no attribute")));
            }
            for &a in attrs.iter() {
                if a >= c {
                    return Err(Error::InvalidAttribute { attribute: a, c });
                }
                inverted[a].push(id);
            }
        }
        Ok(Self { c, atb, inverted, classes: None })
    }

    /// Single-attribute table from one label per vector.
    pub fn single(c: usize, labels: &[usize]) -> Result<Self> {
        Self::new(c, labels.iter().map(|&l| vec![l]).collect())
    }

    /// Attaches a partition of `[0, c)` into contiguous classes of the given sizes.
    pub fn with_class_sizes(mut self, sizes: &[usize]) -> Result<Self> {
        if sizes.contains(&0) || sizes.iter().sum::<usize>() != self.c {
            return Err(Error::Config(format!("class sizes {sizes:?} do not partition c = {}", self.c)));
        }
        let mut start = 0;
        let classes = sizes
            .iter()
            .map(|&s| {
                let class: Vec<usize> = (start..start + s).collect();
                start += s;
                class
            })
            .collect();
        self.classes = Some(classes);
        Ok(self)
    }

    pub fn num_attributes(&self) -> usize {
        self.c
    }

    pub fn num_vectors(&self) -> usize {
        self.atb.len()
    }

    /// `atb(id)`, sorted ascending.
    pub fn of(&self, id: usize) -> &[usize] {
        &self.atb[id]
    }

    /// `D_l`, sorted ascending.
    pub fn members(&self, attribute: usize) -> &[usize] {
        &self.inverted[attribute]
    }

    pub fn classes(&self) -> Option<&[Vec<usize>]> {
        self.classes.as_deref()
    }

    pub fn class_sizes(&self) -> Option<Vec<usize>> {
        self.classes.as_ref().map(|cs| cs.iter().map(Vec::len).collect())
    }

    pub fn is_single_attribute(&self) -> bool {
        self.atb.iter().all(|a| a.len() == 1)
    }

    /// Label of `id` in a single-attribute table.
    pub fn label(&self, id: usize) -> usize {
        self.atb[id][0]
    }

    pub fn require_single_attribute(&self) -> Result<()> {
        match self.atb.iter().position(|a| a.len() != 1) {
            None => Ok(()),
            Some(id) => Err(Error::Config(format!(
                "single-attribute solver given vector {id} with {} attributes",
                self.atb[id].len()
            ))),
        }
    }

    /// True when classes exist and every vector has exactly one attribute per class.
    pub fn is_one_per_class(&self) -> bool {
        let Some(classes) = &self.classes else {
            return false;
        };
        self.atb.iter().all(|attrs| classes.iter().all(|class| attrs.iter().filter(|a| class.contains(a)).count() == 1))
    }

    pub fn check_ids(&self, ids: &[usize]) -> Result<()> {
        let n = self.atb.len();
        match ids.iter().find(|&&id| id >= n) {
            Some(&id) => Err(Error::InvalidId { id, n }),
            None => Ok(()),
        }
    }

    /// Relabels vectors: new vector `j` takes the attributes of old vector `ids[j]`.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        self.check_ids(ids)?;
        let table = Self::new(self.c, ids.iter().map(|&i| self.atb[i].clone()).collect())?;
        match self.class_sizes() {
            Some(sizes) => table.with_class_sizes(&sizes),
            None => Ok(table),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverted_lists_transpose_atb() {
        let t = AttributeTable::new(3, vec![vec![2, 0], vec![1], vec![0, 1, 1]]).unwrap();
        assert_eq!(t.of(0), &[0, 2]);
        assert_eq!(t.of(2), &[0, 1]);
        assert_eq!(t.members(0), &[0, 2]);
        assert_eq!(t.members(1), &[1, 2]);
        assert_eq!(t.members(2), &[0]);
        for a in 0..3 {
            for &id in t.members(a) {
                assert!(t.of(id).contains(&a));
            }
        }
        assert!(!t.is_single_attribute());
        assert!(t.require_single_attribute().is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(AttributeTable::new(2, vec![vec![0], vec![]]).is_err());
        assert!(matches!(AttributeTable::single(2, &[0, 2]), Err(Error::InvalidAttribute { attribute: 2, c: 2 })));
        assert!(AttributeTable::single(0, &[0]).is_err());
    }

    #[test]
    fn classes_partition_and_one_per_class() {
        let t = AttributeTable::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap().with_class_sizes(&[2, 2]).unwrap();
        assert!(t.is_one_per_class());
        assert_eq!(t.classes().unwrap()[1], vec![2, 3]);
        let spans_one = AttributeTable::new(4, vec![vec![0, 1]]).unwrap().with_class_sizes(&[2, 2]).unwrap();
        assert!(!spans_one.is_one_per_class());
        assert!(AttributeTable::single(4, &[0]).unwrap().with_class_sizes(&[3, 2]).is_err());
    }
}
