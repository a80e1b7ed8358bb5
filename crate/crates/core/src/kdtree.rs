//! Static kd-tree over a fixed point set.
//!
//! Built once by median splits along the axis of largest spread. Leaves
//! hold up to
//! [`LEAF_SIZE`] points, so heavily duplicated coordinates (axis-aligned
//! samplings, coincident samples) are handled without special cases.

use crate::Vector;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree<const D: usize> {
    points: Vec<Vector<D>>,
    /// Permutation of the original indices; leaves reference slices of it.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<const D: usize> KdTree<D> {
    pub fn new(points: &[Vector<D>]) -> Self {
        let mut tree = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut lo = Vector::<D>::repeat(f64::INFINITY);
        let mut hi = Vector::<D>::repeat(f64::NEG_INFINITY);
        for &i in &self.order[start..end] {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        let axis = (hi - lo).imax();
        if hi[axis] - lo[axis] <= 0.0 {
            // all coincident
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis])
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Indices of all points with `‖x − p‖ ≤ radius`, in ascending order.
    pub fn within(&self, x: &Vector<D>, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.within_into(x, radius, &mut out);
        out
    }

    /// As [`KdTree::within`] but reusing `out` (cleared first).
    pub fn within_into(&self, x: &Vector<D>, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        if self.nodes.is_empty() || radius < 0.0 {
            return;
        }
        let r2 = radius * radius;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        if (self.points[i] - x).norm_squared() <= r2 {
                            out.push(i);
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let delta = x[axis] - value;
                    // coordinates equal to the split value may sit on either side
                    if delta <= radius {
                        stack.push(left);
                    }
                    if delta >= -radius {
                        stack.push(right);
                    }
                }
            }
        }
        out.sort_unstable();
    }

    /// Nearest point to `x` among indices accepted by `keep`, with its
    /// Euclidean distance. Ties resolve to the smallest index.
    pub fn nearest_filtered<F>(&self, x: &Vector<D>, keep: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> bool,
    {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        self.nearest_rec(0, x, &keep, &mut best);
        best.map(|(i, d2)| (i, d2.sqrt()))
    }

    pub fn nearest(&self, x: &Vector<D>) -> Option<(usize, f64)> {
        self.nearest_filtered(x, |_| true)
    }

    fn nearest_rec<F>(&self, id: usize, x: &Vector<D>, keep: &F, best: &mut Option<(usize, f64)>)
    where
        F: Fn(usize) -> bool,
    {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if !keep(i) {
                        continue;
                    }
                    let d2 = (self.points[i] - x).norm_squared();
                    let better = match *best {
                        None => true,
                        Some((bi, bd2)) => d2 < bd2 || (d2 == bd2 && i < bi),
                    };
                    if better {
                        *best = Some((i, d2));
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = x[axis] - value;
                let (near, far) = if delta < 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, x, keep, best);
                let bound = delta * delta;
                // equality keeps tie-breaking on index exact
                if best.map_or(true, |(_, bd2)| bound <= bd2) {
                    self.nearest_rec(far, x, keep, best);
                }
            }
        }
    }
}
