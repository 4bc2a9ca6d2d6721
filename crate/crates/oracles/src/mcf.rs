//! Successive-shortest-path min-cost flow over real-valued capacities.
//!
//! Solves a b-flow: every node carries a balance (positive = supply,
//! negative = demand, zero = transshipment) and flow must drain all balances.
//! Shortest paths use Bellman-Ford, which keeps the code independent of any
//! potential bookkeeping; fine for the tiny graphs the tests build.

const EPS: f64 = 1e-9;

/// Directed edge with capacity and per-unit cost.
#[derive(Debug, Clone, Copy)]
pub struct McfEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub enum McfResult {
    /// Total cost and the flow on each input edge, in input order.
    Optimal { cost: f64, flows: Vec<f64> },
    Infeasible,
}

#[derive(Clone)]
struct Arc {
    to: usize,
    residual: f64,
    cost: f64,
    /// Index of the reverse arc.
    rev: usize,
}

/// Computes a min-cost b-flow. `balance` must sum to ~zero.
pub fn min_cost_b_flow(num_nodes: usize, edges: &[McfEdge], balance: &[f64]) -> McfResult {
    assert_eq!(balance.len(), num_nodes);
    let total: f64 = balance.iter().sum();
    assert!(
        total.abs() <= 1e-6 * (1.0 + balance.iter().map(|b| b.abs()).sum::<f64>()),
        "balances must sum to zero"
    );

    let mut graph: Vec<Vec<Arc>> = vec![Vec::new(); num_nodes];
    let mut edge_slot = Vec::with_capacity(edges.len());
    for e in edges {
        assert!(e.capacity >= 0.0 && e.cost.is_finite());
        let a = graph[e.from].len();
        let b = graph[e.to].len();
        edge_slot.push((e.from, a));
        graph[e.from].push(Arc {
            to: e.to,
            residual: e.capacity,
            cost: e.cost,
            rev: b,
        });
        graph[e.to].push(Arc {
            to: e.from,
            residual: 0.0,
            cost: -e.cost,
            rev: a,
        });
    }

    let mut excess = balance.to_vec();
    let scale: f64 = 1.0 + balance.iter().map(|b| b.abs()).sum::<f64>();
    let tol = EPS * scale;

    loop {
        let source = match excess.iter().position(|&e| e > tol) {
            Some(s) => s,
            None => break,
        };

        // Bellman-Ford from the current source over residual arcs.
        let mut dist = vec![f64::INFINITY; num_nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; num_nodes];
        dist[source] = 0.0;
        for _ in 0..num_nodes {
            let mut changed = false;
            for u in 0..num_nodes {
                if !dist[u].is_finite() {
                    continue;
                }
                for (ai, arc) in graph[u].iter().enumerate() {
                    if arc.residual > tol && dist[u] + arc.cost < dist[arc.to] - 1e-12 {
                        dist[arc.to] = dist[u] + arc.cost;
                        prev[arc.to] = Some((u, ai));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        // Cheapest reachable deficit node.
        let sink = (0..num_nodes)
            .filter(|&v| excess[v] < -tol && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap());
        let sink = match sink {
            Some(s) => s,
            None => return McfResult::Infeasible,
        };

        // Bottleneck along the path.
        let mut push = excess[source].min(-excess[sink]);
        let mut v = sink;
        while let Some((u, ai)) = prev[v] {
            push = push.min(graph[u][ai].residual);
            v = u;
        }

        let mut v = sink;
        while let Some((u, ai)) = prev[v] {
            let rev = graph[u][ai].rev;
            graph[u][ai].residual -= push;
            graph[v][rev].residual += push;
            v = u;
        }
        excess[source] -= push;
        excess[sink] += push;
    }

    let mut cost = 0.0;
    let mut flows = Vec::with_capacity(edges.len());
    for (i, &(node, slot)) in edge_slot.iter().enumerate() {
        let sent = edges[i].capacity - graph[node][slot].residual;
        cost += sent * edges[i].cost;
        flows.push(sent);
    }
    McfResult::Optimal { cost, flows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_vs_detour() {
        // 0 -> 1 directly costs 5; via 2 costs 1 + 1 = 2 but capacity 1.
        let edges = vec![
            McfEdge { from: 0, to: 1, capacity: 10.0, cost: 5.0 },
            McfEdge { from: 0, to: 2, capacity: 1.0, cost: 1.0 },
            McfEdge { from: 2, to: 1, capacity: 1.0, cost: 1.0 },
        ];
        let balance = vec![2.0, -2.0, 0.0];
        match min_cost_b_flow(3, &edges, &balance) {
            McfResult::Optimal { cost, flows } => {
                assert!((cost - (5.0 + 2.0)).abs() < 1e-9);
                assert!((flows[0] - 1.0).abs() < 1e-9);
                assert!((flows[1] - 1.0).abs() < 1e-9);
            }
            McfResult::Infeasible => panic!("feasible instance"),
        }
    }

    #[test]
    fn fractional_quantities() {
        let edges = vec![
            McfEdge { from: 0, to: 1, capacity: 0.75, cost: 2.0 },
            McfEdge { from: 0, to: 1, capacity: 10.0, cost: 3.0 },
        ];
        let balance = vec![1.5, -1.5];
        match min_cost_b_flow(2, &edges, &balance) {
            McfResult::Optimal { cost, .. } => {
                assert!((cost - (0.75 * 2.0 + 0.75 * 3.0)).abs() < 1e-9);
            }
            McfResult::Infeasible => panic!("feasible instance"),
        }
    }

    #[test]
    fn undeliverable_demand() {
        let edges = vec![McfEdge { from: 0, to: 1, capacity: 1.0, cost: 1.0 }];
        let balance = vec![2.0, -2.0];
        assert!(matches!(
            min_cost_b_flow(2, &edges, &balance),
            McfResult::Infeasible
        ));
    }
}
