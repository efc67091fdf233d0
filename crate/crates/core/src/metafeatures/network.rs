//! Instance graph measures. Vertices are instances; an edge joins two
//! same-class instances whose Gower distance is at most the 15th percentile
//! of all pairwise distances.

use std::collections::VecDeque;

use crate::data::Dataset;
use crate::matrix::Matrix;
use crate::metafeatures::mean;

pub const EPSILON_QUANTILE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Graph {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj.iter_mut().for_each(|v| {
            v.sort_unstable();
            v.dedup();
        });
        Graph { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn bfs(&self, s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let du = dist[u].expect("queued vertices are reached");
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.n()];
        let mut count = 0;
        for s in 0..self.n() {
            if !seen[s] {
                count += 1;
                for (v, d) in self.bfs(s).into_iter().enumerate() {
                    if d.is_some() {
                        seen[v] = true;
                    }
                }
            }
        }
        count
    }

    pub fn clustering(&self, v: usize) -> f64 {
        let nb = &self.adj[v];
        let k = nb.len();
        if k < 2 {
            return 0.0;
        }
        let mut links = 0;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if self.adj[a].binary_search(&b).is_ok() {
                    links += 1;
                }
            }
        }
        2.0 * links as f64 / (k * (k - 1)) as f64
    }

    /// Principal eigenvector of the adjacency matrix scaled to max 1.
    pub fn hub_scores(&self) -> Vec<f64> {
        let n = self.n();
        if self.n_edges() == 0 {
            return vec![0.0; n];
        }
        let step = |v: &[f64]| -> Vec<f64> {
            let mut next: Vec<f64> = (0..n).map(|i| self.adj[i].iter().map(|&j| v[j]).sum()).collect();
            let m = next.iter().copied().fold(0.0, f64::max);
            if m > 0.0 {
                next.iter_mut().for_each(|x| *x /= m);
            }
            next
        };
        let mut v = vec![1.0; n];
        for _ in 0..1000 {
            // two multiplications per round so bipartite graphs converge
            let next = step(&step(&v));
            let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if change < 1e-12 {
                break;
            }
        }
        v
    }
}

/// Unnormalized betweenness (Brandes) for an undirected graph; each
/// unordered pair is counted once.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            stack.push(v);
            for &w in &g.adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    pred[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        while let Some(w) = stack.pop() {
            for &v in &pred[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb.iter_mut().for_each(|c| *c /= 2.0);
    cb
}

fn gower(x: &Matrix, ranges: &[f64], a: usize, b: usize) -> f64 {
    let p = x.cols();
    let mut s = 0.0;
    for j in 0..p {
        if ranges[j] > 0.0 {
            s += (x.get(a, j) - x.get(b, j)).abs() / ranges[j];
        }
    }
    s / p.max(1) as f64
}

pub fn build_graph(x: &Matrix, y: &[usize]) -> Graph {
    let n = x.rows();
    let ranges: Vec<f64> = (0..x.cols())
        .map(|j| {
            let c = x.column(j);
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max) - c.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((gower(x, &ranges, a, b), a, b));
        }
    }
    if pairs.is_empty() {
        return Graph::from_edges(n, &[]);
    }
    let mut ds: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let k = ((ds.len() - 1) as f64 * EPSILON_QUANTILE).floor() as usize;
    let (_, eps, _) = ds.select_nth_unstable_by(k, f64::total_cmp);
    let eps = *eps;
    let edges: Vec<(usize, usize)> = pairs
        .into_iter()
        .filter(|&(d, a, b)| d <= eps && y[a] == y[b])
        .map(|(_, a, b)| (a, b))
        .collect();
    Graph::from_edges(n, &edges)
}

pub fn graph_measures(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let e = g.n_edges() as f64;
    let nf = n as f64;
    let mut closeness = Vec::with_capacity(n);
    let mut path_sum = 0.0;
    let mut path_count = 0usize;
    for s in 0..n {
        let dist: Vec<usize> = g.bfs(s).into_iter().flatten().collect();
        let total: usize = dist.iter().sum();
        let reached = dist.iter().filter(|&&d| d > 0).count();
        closeness.push(if total > 0 { 1.0 / total as f64 } else { 0.0 });
        path_sum += total as f64;
        path_count += reached;
    }
    vec![
        e,
        if n > 0 { 2.0 * e / nf } else { 0.0 },
        if n > 1 { 2.0 * e / (nf * (nf - 1.0)) } else { 0.0 },
        g.components() as f64,
        mean(&closeness),
        mean(&betweenness(g)),
        mean(&(0..n).map(|v| g.clustering(v)).collect::<Vec<_>>()),
        mean(&g.hub_scores()),
        if path_count > 0 { path_sum / path_count as f64 } else { 0.0 },
    ]
}

pub fn extract_complex_network(d: &Dataset) -> Vec<f64> {
    graph_measures(&build_graph(&d.x, &d.y))
}
