use super::{coupling_strength, Crystal, CouplingParams, CrystalError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    /// Coupling strength, Hz.
    pub g: f64,
}

/// Thresholded coupling graph. Edges are stored once with `a < b`; the
/// adjacency lists are symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingGraph {
    g_min: f64,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl CouplingGraph {
    fn from_edges(n: usize, g_min: f64, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| (e.a, e.b));
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.a as usize].push((e.b, e.g));
            adjacency[e.b as usize].push((e.a, e.g));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(id, _)| id);
        }
        CouplingGraph { g_min, edges, adjacency }
    }

    pub fn g_min(&self) -> f64 {
        self.g_min
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `id` with their coupling, sorted by id.
    pub fn neighbors(&self, id: u32) -> &[(u32, f64)] {
        &self.adjacency[id as usize]
    }

    pub fn coupling(&self, a: u32, b: u32) -> Option<f64> {
        let list = self.adjacency.get(a as usize)?;
        list.binary_search_by_key(&b, |&(id, _)| id).ok().map(|i| list[i].1)
    }

    pub fn are_coupled(&self, a: u32, b: u32) -> bool {
        self.coupling(a, b).is_some()
    }
}

/// Build the coupling graph with a cell list.
///
/// The search radius is the blockade radius of the two largest dipoles in the
/// crystal; when it exceeds a third of the box the all-pairs path is used.
pub fn coupling_graph(crystal: &Crystal, cp: &CouplingParams) -> Result<CouplingGraph, CrystalError> {
    cp.validate()?;
    let ions = crystal.ions();
    let l = crystal.params().box_side;
    let dmu_max = ions.iter().map(|i| i.dmu).fold(0.0_f64, f64::max);
    if ions.len() < 2 {
        return Ok(CouplingGraph::from_edges(ions.len(), cp.g_min, Vec::new()));
    }
    let cutoff = cp.blockade_radius(dmu_max);
    let cells = (l / cutoff).floor() as usize;
    if !(cutoff.is_finite()) || cells < 3 {
        return coupling_graph_brute_force(crystal, cp);
    }
    let cells = cells.min(256);
    let cell_of = |x: f64| ((x / l * cells as f64) as usize).min(cells - 1);
    let index = |c: [usize; 3]| (c[0] * cells + c[1]) * cells + c[2];

    let mut head = vec![usize::MAX; cells * cells * cells];
    let mut next = vec![usize::MAX; ions.len()];
    let mut coords = Vec::with_capacity(ions.len());
    for (i, ion) in ions.iter().enumerate() {
        let c = [cell_of(ion.position[0]), cell_of(ion.position[1]), cell_of(ion.position[2])];
        let k = index(c);
        next[i] = head[k];
        head[k] = i;
        coords.push(c);
    }

    let mut edges = Vec::new();
    for (i, a) in ions.iter().enumerate() {
        let c = coords[i];
        for dx in [cells - 1, 0, 1] {
            for dy in [cells - 1, 0, 1] {
                for dz in [cells - 1, 0, 1] {
                    let n = [(c[0] + dx) % cells, (c[1] + dy) % cells, (c[2] + dz) % cells];
                    let mut j = head[index(n)];
                    while j != usize::MAX {
                        if j > i {
                            let g = coupling_strength(a, &ions[j], cp, l)?;
                            if g >= cp.g_min {
                                edges.push(Edge { a: i as u32, b: j as u32, g });
                            }
                        }
                        j = next[j];
                    }
                }
            }
        }
    }
    Ok(CouplingGraph::from_edges(ions.len(), cp.g_min, edges))
}

/// All-pairs reference construction.
pub fn coupling_graph_brute_force(
    crystal: &Crystal,
    cp: &CouplingParams,
) -> Result<CouplingGraph, CrystalError> {
    cp.validate()?;
    let ions = crystal.ions();
    let l = crystal.params().box_side;
    let mut edges = Vec::new();
    for i in 0..ions.len() {
        for j in i + 1..ions.len() {
            let g = coupling_strength(&ions[i], &ions[j], cp, l)?;
            if g >= cp.g_min {
                edges.push(Edge { a: i as u32, b: j as u32, g });
            }
        }
    }
    Ok(CouplingGraph::from_edges(ions.len(), cp.g_min, edges))
}
