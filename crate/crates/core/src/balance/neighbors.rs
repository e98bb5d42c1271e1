//! Exact k-nearest-neighbour search over a k-d tree.
//!
//! Results are ordered by ascending distance with ties broken by the lower
//! point index, the same order a brute-force scan with a stable sort gives.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::distance::squared_distance;
use crate::types::LabeledRecord;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    dim: usize,
    data: Vec<f64>,
    order: Vec<u32>,
    /// Points laid out in `order`, so each leaf is one contiguous block.
    packed: Vec<f64>,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Candidate {
    d2: f64,
    index: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}

impl NeighborIndex {
    /// Builds an index over rows of equal length.
    pub fn new<'a, I>(rows: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut data = Vec::new();
        let mut dim = 0;
        let mut n = 0usize;
        for row in rows {
            if n == 0 {
                dim = row.len();
            }
            assert_eq!(row.len(), dim, "all points must share one dimension");
            data.extend_from_slice(row);
            n += 1;
        }
        let mut index = NeighborIndex {
            dim,
            data,
            order: (0..n as u32).collect(),
            packed: Vec::new(),
            nodes: Vec::new(),
        };
        if n > 0 {
            index.build(0, n);
        }
        index.packed = index.order.iter().flat_map(|&i| index.point(i as usize)).copied().collect();
        index
    }

    pub fn from_records(records: &[LabeledRecord]) -> Self {
        NeighborIndex::new(records.iter().map(|r| r.values()))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn coord(&self, i: u32, axis: usize) -> f64 {
        self.data[i as usize * self.dim + axis]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut best_axis = 0;
        let mut best_spread = -1.0;
        for axis in 0..self.dim {
            let (lo, hi) = self.order[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.coord(i, axis);
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best_spread {
                best_spread = hi - lo;
                best_axis = axis;
            }
        }
        if best_spread <= 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let mut order = std::mem::take(&mut self.order);
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            self.coord(a, best_axis).total_cmp(&self.coord(b, best_axis)).then(a.cmp(&b))
        });
        let value = self.coord(order[mid], best_axis);
        self.order = order;
        self.nodes.push(Node::Leaf { start, end }); // placeholder
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis: best_axis,
            value,
            left,
            right,
        };
        id
    }

    /// The `k` nearest points to `query`, skipping point `exclude` if given.
    pub fn query(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        assert_eq!(query.len(), self.dim, "query dimension mismatch");
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        let exclude = exclude.map(|e| e as u32);
        let mut offsets = vec![0.0; self.dim];
        self.search(0, query, k, exclude, 0.0, &mut offsets, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter()
            .map(|c| Neighbor {
                index: c.index as usize,
                distance: c.d2.sqrt(),
            })
            .collect()
    }

    /// Neighbours of indexed point `i`, excluding `i` itself.
    pub fn query_member(&self, i: usize, k: usize) -> Vec<Neighbor> {
        self.query(self.point(i), k, Some(i))
    }

    /// `query_member(i, k)` for every indexed point, indexed by `i`. Points
    /// are visited in leaf order, which keeps consecutive searches in cache.
    pub fn all_members(&self, k: usize) -> Vec<Vec<Neighbor>> {
        let mut out = vec![Vec::new(); self.len()];
        for &i in &self.order {
            out[i as usize] = self.query_member(i as usize, k);
        }
        out
    }

    pub fn neighbor_indices(&self, i: usize, k: usize) -> Vec<usize> {
        self.query_member(i, k).into_iter().map(|n| n.index).collect()
    }

    /// Depth-first search. `offsets[a]` is the query's distance along axis
    /// `a` to the current cell and `rd` the sum of their squares, a lower
    /// bound on the distance to any point in the cell.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        node: usize,
        q: &[f64],
        k: usize,
        exclude: Option<u32>,
        rd: f64,
        offsets: &mut [f64],
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                let dim = self.dim;
                for (p, &i) in (start..end).zip(&self.order[start..end]) {
                    if Some(i) == exclude {
                        continue;
                    }
                    let point = &self.packed[p * dim..(p + 1) * dim];
                    if heap.len() < k {
                        heap.push(Candidate { d2: squared_distance(q, point), index: i });
                        continue;
                    }
                    let worst = *heap.peek().unwrap();
                    // Partial sums only grow, so stop once past the current worst.
                    let mut d2 = 0.0;
                    for (x, y) in q.iter().zip(point) {
                        d2 += (x - y) * (x - y);
                        if d2 > worst.d2 {
                            break;
                        }
                    }
                    let c = Candidate { d2, index: i };
                    if c < worst {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, exclude, rd, offsets, heap);
                let old = offsets[axis];
                let far_rd = rd - old * old + diff * diff;
                // Visit on equality too: a tie at the boundary may carry a lower
                // index. The slack covers rounding in the running sum.
                if heap.len() < k || far_rd * (1.0 - 1e-9) <= heap.peek().unwrap().d2 {
                    offsets[axis] = diff;
                    self.search(far, q, k, exclude, far_rd, offsets, heap);
                    offsets[axis] = old;
                }
            }
        }
    }
}
