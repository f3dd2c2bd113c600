//! Safety-alert games: a planner signals incident information to visitors choosing a
//! node of a weighted city graph.

use ndarray::Array2;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Distribution, PersuasionGame};
use crate::rng::RngSpec;

/// A weighted undirected city with a center and a list of possible incidents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyCity {
    pub n_nodes: usize,
    /// `[u, v, weight]` triples.
    pub edges: Vec<(usize, usize, f64)>,
    pub center: usize,
    /// Affected nodes of each incident; all incidents have the same size.
    pub incidents: Vec<Vec<usize>>,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
}

fn default_penalty() -> f64 {
    1.0
}

/// Parameters for [`SafetyCity::random`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityParams {
    pub n_nodes: usize,
    pub n_incidents: usize,
    pub incident_size: usize,
    /// Each node links to this many nearest neighbours before the graph is joined up.
    #[serde(default = "default_neighbors")]
    pub neighbors: usize,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
}

fn default_neighbors() -> usize {
    3
}

impl Default for CityParams {
    fn default() -> Self {
        CityParams {
            n_nodes: 40,
            n_incidents: 20,
            incident_size: 10,
            neighbors: default_neighbors(),
            penalty: default_penalty(),
        }
    }
}

impl SafetyCity {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGame(msg));
        if self.n_nodes == 0 {
            return bad("city has no nodes".into());
        }
        if self.center >= self.n_nodes {
            return bad(format!("center {} out of range", self.center));
        }
        for &(u, v, w) in &self.edges {
            if u >= self.n_nodes || v >= self.n_nodes {
                return bad(format!("edge ({u}, {v}) out of range"));
            }
            if !(w.is_finite() && w >= 0.0) {
                return bad(format!("edge ({u}, {v}) has weight {w}"));
            }
        }
        if self.incidents.is_empty() {
            return bad("no incidents".into());
        }
        let size = self.incidents[0].len();
        for (i, incident) in self.incidents.iter().enumerate() {
            if incident.len() != size {
                return bad(format!("incident {i} has {} nodes, expected {size}", incident.len()));
            }
            if incident.iter().any(|&v| v >= self.n_nodes) {
                return bad(format!("incident {i} names a node out of range"));
            }
        }
        if !(self.penalty.is_finite() && self.penalty > 0.0) {
            return bad(format!("penalty {} must be positive", self.penalty));
        }
        Ok(())
    }

    /// Random geometric city: nodes uniform in the unit square, joined to their nearest
    /// neighbours, remaining components linked by their closest pair, Euclidean weights.
    /// The center is the node closest to the middle of the square. Incidents are drawn
    /// uniformly without replacement.
    pub fn random(params: &CityParams, rng: &RngSpec) -> Result<Self> {
        if params.n_nodes < 2 || params.incident_size == 0 || params.incident_size > params.n_nodes {
            return Err(Error::DomainViolation(format!("bad city parameters {params:?}")));
        }
        if params.n_incidents == 0 {
            return Err(Error::DomainViolation("at least one incident is needed".into()));
        }
        let mut r = rng.rng();
        let n = params.n_nodes;
        let points: Vec<(f64, f64)> = (0..n).map(|_| (r.random::<f64>(), r.random::<f64>())).collect();
        let dist = |a: usize, b: usize| {
            let (dx, dy) = (points[a].0 - points[b].0, points[a].1 - points[b].1);
            (dx * dx + dy * dy).sqrt()
        };

        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut linked = vec![vec![false; n]; n];
        let mut add = |u: usize, v: usize, edges: &mut Vec<(usize, usize, f64)>| {
            let (a, b) = (u.min(v), u.max(v));
            if a != b && !linked[a][b] {
                linked[a][b] = true;
                edges.push((a, b, dist(a, b)));
            }
        };
        for u in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
            others.sort_by(|&a, &b| dist(u, a).total_cmp(&dist(u, b)));
            for &v in others.iter().take(params.neighbors) {
                add(u, v, &mut edges);
            }
        }
        // join components through their closest pair until connected
        loop {
            let component = components(n, &edges);
            if component.iter().all(|&c| c == component[0]) {
                break;
            }
            let mut best: Option<(f64, usize, usize)> = None;
            for u in 0..n {
                for v in 0..n {
                    if component[u] == component[0] && component[v] != component[0] {
                        let d = dist(u, v);
                        if best.is_none_or(|(bd, _, _)| d < bd) {
                            best = Some((d, u, v));
                        }
                    }
                }
            }
            let (_, u, v) = best.expect("some node lies outside the first component");
            add(u, v, &mut edges);
        }
        edges.sort_by_key(|e| (e.0, e.1));

        let center = (0..n)
            .min_by(|&a, &b| {
                let da = (points[a].0 - 0.5).hypot(points[a].1 - 0.5);
                let db = (points[b].0 - 0.5).hypot(points[b].1 - 0.5);
                da.total_cmp(&db)
            })
            .expect("nonempty");
        let incidents = (0..params.n_incidents)
            .map(|_| {
                let mut nodes = sample(&mut r, n, params.incident_size).into_vec();
                nodes.sort_unstable();
                nodes
            })
            .collect();
        let city = SafetyCity {
            n_nodes: n,
            edges,
            center,
            incidents,
            penalty: params.penalty,
        };
        city.validate()?;
        Ok(city)
    }

    /// All-pairs weighted shortest-path distances, one Dijkstra run per node.
    pub fn distances(&self) -> Result<Array2<f64>> {
        let mut graph = UnGraph::<(), f64>::with_capacity(self.n_nodes, self.edges.len());
        let nodes: Vec<NodeIndex> = (0..self.n_nodes).map(|_| graph.add_node(())).collect();
        for &(u, v, w) in &self.edges {
            graph.add_edge(nodes[u], nodes[v], w);
        }
        let mut table = Array2::zeros((self.n_nodes, self.n_nodes));
        for (i, &source) in nodes.iter().enumerate() {
            let reached = dijkstra(&graph, source, None, |e| *e.weight());
            if reached.len() != self.n_nodes {
                return Err(Error::DisconnectedGraph);
            }
            for (node, d) in reached {
                table[[i, node.index()]] = d;
            }
        }
        Ok(table)
    }
}

fn components(n: usize, edges: &[(usize, usize, f64)]) -> Vec<usize> {
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut x: usize) -> usize {
        while label[x] != x {
            label[x] = label[label[x]];
            x = label[x];
        }
        x
    }
    for &(u, v, _) in edges {
        let (a, b) = (find(&mut label, u), find(&mut label, v));
        if a != b {
            label[a.max(b)] = a.min(b);
        }
    }
    (0..n).map(|x| find(&mut label, x)).collect()
}

/// States are incidents (uniform prior), actions are nodes to visit.
///
/// With `D` the shortest-path distance and `D_max` the graph diameter, the receiver
/// gets `1 - D(v, center) / D_max` outside the incident and `-penalty` inside it; the
/// sender gets `min_{f in incident} D(v, f) / D_max`, which lies in `[0, 1]`.
pub fn safety_alert_game(city: &SafetyCity) -> Result<PersuasionGame> {
    city.validate()?;
    let distances = city.distances()?;
    let diameter = distances.iter().copied().fold(0.0, f64::max);
    let scale = if diameter > 0.0 { 1.0 / diameter } else { 0.0 };
    let n_states = city.incidents.len();
    let mut u_sender = Array2::zeros((n_states, city.n_nodes));
    let mut u_receiver = Array2::zeros((n_states, city.n_nodes));
    for (state, incident) in city.incidents.iter().enumerate() {
        for v in 0..city.n_nodes {
            if incident.contains(&v) {
                u_receiver[[state, v]] = -city.penalty;
            } else {
                u_receiver[[state, v]] = 1.0 - distances[[v, city.center]] * scale;
            }
            let nearest = incident
                .iter()
                .map(|&f| distances[[v, f]])
                .fold(f64::INFINITY, f64::min);
            u_sender[[state, v]] = (nearest * scale).min(1.0);
        }
    }
    PersuasionGame::new(u_sender, u_receiver, Distribution::uniform(n_states))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_city() -> SafetyCity {
        // 0 - 1 - 2 - 3 - 4, unit weights, center 2
        SafetyCity {
            n_nodes: 5,
            edges: (0..4).map(|i| (i, i + 1, 1.0)).collect(),
            center: 2,
            incidents: vec![vec![0], vec![4], vec![2]],
            penalty: 1.0,
        }
    }

    #[test]
    fn path_distances_are_hop_counts() {
        let d = path_city().distances().unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(d[[i, j]], (i as f64 - j as f64).abs());
            }
        }
    }

    #[test]
    fn utilities_on_path() {
        let g = safety_alert_game(&path_city()).unwrap();
        // incident at node 0: visiting the center
        assert_eq!(g.u_receiver()[[0, 2]], 1.0);
        assert_eq!(g.u_sender()[[0, 2]], 0.5);
        // visiting the incident node
        assert_eq!(g.u_receiver()[[0, 0]], -1.0);
        assert_eq!(g.u_sender()[[0, 0]], 0.0);
        // incident at the center
        assert_eq!(g.u_receiver()[[2, 2]], -1.0);
        assert_eq!(g.u_receiver()[[2, 4]], 0.5);
        assert!(g.sender_unit_range());
    }

    #[test]
    fn disconnected_city_is_rejected() {
        let mut city = path_city();
        city.edges.remove(1);
        assert_eq!(safety_alert_game(&city), Err(Error::DisconnectedGraph));
    }

    #[test]
    fn random_city_is_valid_and_reproducible() {
        let params = CityParams::default();
        let a = SafetyCity::random(&params, &RngSpec::new(5)).unwrap();
        let b = SafetyCity::random(&params, &RngSpec::new(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.incidents.len(), 20);
        assert!(a.incidents.iter().all(|i| i.len() == 10));
        let g = safety_alert_game(&a).unwrap();
        assert_eq!((g.n_states(), g.n_actions()), (20, 40));
        assert!(g.sender_unit_range());
        assert!(g.u_receiver().iter().all(|&u| (-1.0..=1.0).contains(&u)));
    }

    #[test]
    fn city_json_shape() {
        let text = serde_json::to_string(&path_city()).unwrap();
        assert!(text.starts_with(r#"{"n_nodes":5,"edges":[[0,1,1.0],"#));
        let back: SafetyCity = serde_json::from_str(&text).unwrap();
        assert_eq!(back, path_city());
    }
}
