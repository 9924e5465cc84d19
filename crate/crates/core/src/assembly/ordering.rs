//! Geometric nested dissection of the node graph.
//!
//! Nodes are split at the median of the longest bounding-box axis; the
//! smaller of the two one-sided boundary layers becomes the separator and is
//! numbered after both halves.

use crate::Vec3;

const LEAF: usize = 48;

/// Node elimination order (`order[new] = old`).
pub fn nested_dissection(positions: &[Vec3], adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = positions.len();
    let mut order = Vec::with_capacity(n);
    let mut label = vec![0u32; n];
    let mut next_label = 1u32;
    let mut stack = vec![Task::Split((0..n).collect())];
    while let Some(task) = stack.pop() {
        match task {
            Task::Emit(nodes) => order.extend(nodes),
            Task::Split(nodes) if nodes.len() <= LEAF => order.extend(nodes),
            Task::Split(mut nodes) => {
                let axis = longest_axis(positions, &nodes);
                let mid = nodes.len() / 2;
                nodes.select_nth_unstable_by(mid, |&a, &b| {
                    positions[a][axis].total_cmp(&positions[b][axis]).then(a.cmp(&b))
                });
                let right = nodes.split_off(mid);
                let mut left = nodes;
                let (l_label, r_label) = (next_label, next_label + 1);
                next_label += 2;
                left.iter().for_each(|&i| label[i] = l_label);
                right.iter().for_each(|&i| label[i] = r_label);
                let touches = |i: usize, other: u32| adjacency[i].iter().any(|&j| label[j] == other);
                let right_layer = right.iter().filter(|&&i| touches(i, l_label)).count();
                let left_layer = left.iter().filter(|&&i| touches(i, r_label)).count();
                let (separator, mut right) = if right_layer <= left_layer {
                    right.into_iter().partition::<Vec<_>, _>(|&i| touches(i, l_label))
                } else {
                    let (sep, rest) = left.into_iter().partition::<Vec<_>, _>(|&i| touches(i, r_label));
                    left = rest;
                    (sep, right)
                };
                separator.iter().for_each(|&i| label[i] = 0);
                right.sort_unstable();
                left.sort_unstable();
                // stack is LIFO: separator last, so push it first
                stack.push(Task::Emit(separator));
                stack.push(Task::Split(right));
                stack.push(Task::Split(left));
            }
        }
    }
    order
}

enum Task {
    Split(Vec<usize>),
    Emit(Vec<usize>),
}

fn longest_axis(positions: &[Vec3], nodes: &[usize]) -> usize {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in nodes {
        lo = lo.inf(&positions[i]);
        hi = hi.sup(&positions[i]);
    }
    (hi - lo).imax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation_with_separators_last() {
        let (nx, ny) = (30, 20);
        let id = |i: usize, j: usize| j * nx + i;
        let mut positions = Vec::new();
        let mut adjacency = vec![Vec::new(); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                positions.push(Vec3::new(i as f64, j as f64, 0.0));
                for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny {
                        adjacency[id(i, j)].push(id(a as usize, b as usize));
                    }
                }
            }
        }
        let order = nested_dissection(&positions, &adjacency);
        let mut seen = order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..nx * ny).collect::<Vec<_>>());
        // the top-level separator is a grid line of length ny at the end
        let last: Vec<f64> = order[order.len() - ny..].iter().map(|&i| positions[i].x).collect();
        assert!(last.iter().all(|&x| x == last[0]));
    }
}
