//! Disjoint-set forest with the component statistics tracked along a graph process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Union by size with path halving.
///
/// `link` of a vertex is its parent, or minus the component size when the
/// vertex is a root. Each node also carries a spare word for the caller
/// (the graph process keeps a neighbour filter there) so that both share a
/// cache line.
///
/// Besides the forest itself the tracker maintains, exactly and in O(1) per
/// merge, the number of components, the number of isolated vertices and of
/// size-2 components, the sum of squared component sizes and the largest
/// component size.
#[derive(Clone, Debug)]
pub struct ComponentTracker {
    nodes: Vec<Node>,
    num_components: usize,
    num_isolated: usize,
    num_size2: usize,
    sum_sq: u64,
    largest: usize,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    link: i32,
    tag: u32,
    head: u32,
}

/// Empty value of a node's list head.
pub(crate) const NIL: u32 = u32::MAX;

/// Observables of the graph after `m` edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub m: u64,
    /// Giant timescale, `2m/n`.
    pub t_g: f64,
    /// Connectivity timescale, `2m/(n ln n)`.
    pub t_c: f64,
    /// Fraction of isolated vertices.
    pub isolated: f64,
    /// Fraction of vertices in components of size 2.
    pub isolated_edges: f64,
    /// Mean size of the component containing a uniform vertex, `sum |C|^2 / n`.
    pub susceptibility: f64,
    pub largest_fraction: f64,
    pub num_components: usize,
}

impl ComponentTracker {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > i32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "vertex count {n} exceeds {}",
                i32::MAX
            )));
        }
        Ok(ComponentTracker {
            nodes: vec![
                Node {
                    link: -1,
                    tag: 0,
                    head: NIL,
                };
                n
            ],
            num_components: n,
            num_isolated: n,
            num_size2: 0,
            sum_sq: n as u64,
            largest: 1,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn find(&mut self, v: usize) -> Result<usize> {
        self.check(v)?;
        Ok(self.find_root(v as u32) as usize)
    }

    #[inline]
    pub(crate) fn find_root(&mut self, mut v: u32) -> u32 {
        loop {
            let p = self.nodes[v as usize].link;
            if p < 0 {
                return v;
            }
            let gp = self.nodes[p as usize].link;
            if gp < 0 {
                return p as u32;
            }
            self.nodes[v as usize].link = gp;
            v = gp as u32;
        }
    }

    /// Merges the components of `u` and `v`. Returns `false` (and leaves every
    /// statistic untouched) if they were already connected.
    pub fn union(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.union_unchecked(u as u32, v as u32))
    }

    pub(crate) fn union_unchecked(&mut self, u: u32, v: u32) -> bool {
        let mut ru = self.find_root(u);
        let mut rv = self.find_root(v);
        if ru == rv {
            return false;
        }
        let mut a = (-self.nodes[ru as usize].link) as usize;
        let mut b = (-self.nodes[rv as usize].link) as usize;
        if a < b {
            std::mem::swap(&mut ru, &mut rv);
            std::mem::swap(&mut a, &mut b);
        }
        self.nodes[rv as usize].link = ru as i32;
        let merged = a + b;
        self.nodes[ru as usize].link = -(merged as i32);

        self.num_components -= 1;
        self.num_isolated -= (a == 1) as usize + (b == 1) as usize;
        self.num_size2 -= (a == 2) as usize + (b == 2) as usize;
        self.num_size2 += (merged == 2) as usize;
        self.sum_sq += 2 * a as u64 * b as u64;
        self.largest = self.largest.max(merged);
        true
    }

    /// Size of the component containing `v`.
    pub fn component_size(&mut self, v: usize) -> Result<usize> {
        let r = self.find(v)?;
        Ok((-self.nodes[r].link) as usize)
    }

    #[inline]
    pub(crate) fn is_isolated(&self, v: u32) -> bool {
        self.nodes[v as usize].link == -1
    }

    #[inline]
    pub(crate) fn tag(&self, v: u32) -> u32 {
        self.nodes[v as usize].tag
    }

    #[inline]
    pub(crate) fn tag_mut(&mut self, v: u32) -> &mut u32 {
        &mut self.nodes[v as usize].tag
    }

    /// Spare word per vertex for the owner's intrusive lists, `NIL` at start.
    #[inline]
    pub(crate) fn head(&self, v: u32) -> u32 {
        self.nodes[v as usize].head
    }

    #[inline]
    pub(crate) fn head_mut(&mut self, v: u32) -> &mut u32 {
        &mut self.nodes[v as usize].head
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn num_isolated(&self) -> usize {
        self.num_isolated
    }

    pub fn num_size2(&self) -> usize {
        self.num_size2
    }

    pub fn sum_sq(&self) -> u64 {
        self.sum_sq
    }

    pub fn largest(&self) -> usize {
        self.largest
    }

    /// Component sizes, one entry per root, in vertex order of the roots.
    pub fn component_sizes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|node| node.link < 0)
            .map(|node| (-node.link) as usize)
            .collect()
    }

    pub fn observables(&self, m: u64) -> Snapshot {
        let n = self.len() as f64;
        let t_g = 2.0 * m as f64 / n;
        let ln_n = n.ln();
        Snapshot {
            m,
            t_g,
            t_c: if ln_n > 0.0 { t_g / ln_n } else { 0.0 },
            isolated: self.num_isolated as f64 / n,
            isolated_edges: 2.0 * self.num_size2 as f64 / n,
            susceptibility: self.sum_sq as f64 / n,
            largest_fraction: self.largest as f64 / n,
            num_components: self.num_components,
        }
    }
}
