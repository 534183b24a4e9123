//! Reaction-diffusion models flattened into ordinary reaction networks.
//!
//! A model with `D` species on `K` cells becomes a network over `D·K`
//! species. Species `i` in cell `j` (both 0-based) sits at flat index
//! `i + D·j`, so each cell's sub-state is contiguous. Channels are laid out
//! as all per-cell reaction channels first, channel `r` of cell `j` at
//! `r + R·j`, followed by one diffusion channel per mesh link in link order.
//! A diffusion hop `k → j` of species `i` has rate `q · x_(i,k)` and moves one
//! molecule from cell `k` to cell `j`.

use crate::error::{Error, Result};
use crate::network::{Channel, Propensity, ReactionNetwork, SplitPartition};

/// Diffusion of `species` from cell `from` to cell `to` at rate constant `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionLink {
    pub from: usize,
    pub to: usize,
    pub species: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    cells: usize,
    links: Vec<DiffusionLink>,
}

impl Mesh {
    pub fn new(cells: usize, links: Vec<DiffusionLink>) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one cell".into(),
            ));
        }
        for l in &links {
            if l.from >= cells || l.to >= cells || l.from == l.to {
                return Err(Error::InvalidArgument(format!(
                    "invalid link {} -> {} on a mesh of {cells} cells",
                    l.from, l.to
                )));
            }
            if !(l.rate.is_finite() && l.rate >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "diffusion rate must be non-negative, got {}",
                    l.rate
                )));
            }
        }
        Ok(Mesh { cells, links })
    }

    /// Undirected `edges`, each expanded into both ordered pairs, with rate
    /// `diffusion[i]` for species `i`.
    pub fn from_edges(cells: usize, edges: &[(usize, usize)], diffusion: &[f64]) -> Result<Self> {
        let mut links = Vec::with_capacity(edges.len() * 2 * diffusion.len());
        for &(a, b) in edges {
            for (from, to) in [(a, b), (b, a)] {
                for (species, &rate) in diffusion.iter().enumerate() {
                    links.push(DiffusionLink {
                        from,
                        to,
                        species,
                        rate,
                    });
                }
            }
        }
        Mesh::new(cells, links)
    }

    /// Uniform 1-D line of `cells` cells with spacing `dx`; species `i`
    /// hops to each neighbour at rate `diffusion[i] / dx²`.
    pub fn line(cells: usize, diffusion: &[f64], dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cell spacing must be positive, got {dx}"
            )));
        }
        let q: Vec<f64> = diffusion.iter().map(|d| d / (dx * dx)).collect();
        let edges: Vec<(usize, usize)> = (1..cells).map(|j| (j - 1, j)).collect();
        Mesh::from_edges(cells, &edges, &q)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn links(&self) -> &[DiffusionLink] {
        &self.links
    }

    /// `q` for the ordered pair `from → to` and `species` (0 if unconnected).
    pub fn rate(&self, from: usize, to: usize, species: usize) -> f64 {
        self.links
            .iter()
            .filter(|l| l.from == from && l.to == to && l.species == species)
            .map(|l| l.rate)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SpatialModel {
    pub base: ReactionNetwork,
    pub mesh: Mesh,
    pub flattened: ReactionNetwork,
}

impl SpatialModel {
    pub fn species_index(&self, species: usize, cell: usize) -> usize {
        species + self.base.species_count() * cell
    }

    pub fn reaction_channel(&self, channel: usize, cell: usize) -> usize {
        channel + self.base.channel_count() * cell
    }

    pub fn reaction_channel_count(&self) -> usize {
        self.base.channel_count() * self.mesh.cells()
    }

    pub fn diffusion_channel_count(&self) -> usize {
        self.mesh.links().len()
    }

    /// Total copy number of `species` across all cells.
    pub fn species_total(&self, x: &[u64], species: usize) -> u64 {
        (0..self.mesh.cells())
            .map(|j| x[self.species_index(species, j)])
            .sum()
    }
}

/// Builds the flattened reaction-diffusion network.
pub fn flatten(base: &ReactionNetwork, mesh: &Mesh) -> Result<SpatialModel> {
    let d = base.species_count();
    let k = mesh.cells();
    if let Some(l) = mesh.links().iter().find(|l| l.species >= d) {
        return Err(Error::InvalidArgument(format!(
            "diffusion link for species {} but the base network has {d} species",
            l.species
        )));
    }
    let flat = d * k;
    let mut channels = Vec::with_capacity(base.channel_count() * k + mesh.links().len());
    for cell in 0..k {
        let offset = d * cell;
        for (r, ch) in base.channels().iter().enumerate() {
            let mut stoich = vec![0i64; flat];
            stoich[offset..offset + d].copy_from_slice(&ch.stoich);
            let propensity = match &ch.propensity {
                Propensity::MassAction { rate, multiplicity } => {
                    let mut m = vec![0u32; flat];
                    m[offset..offset + d].copy_from_slice(multiplicity);
                    Propensity::mass_action(*rate, m)
                }
                Propensity::Custom(c) => {
                    let inner = Propensity::Custom(c.clone());
                    Propensity::custom(format!("{}@{cell}", c.label()), move |x: &[u64]| {
                        inner.evaluate(&x[offset..offset + d])
                    })
                }
            };
            let name = format!(
                "{}@{cell}",
                base.channel_name(r)
                    .map_or_else(|| format!("r{r}"), str::to_owned)
            );
            channels.push(Channel::new(stoich, propensity).named(name));
        }
    }
    for link in mesh.links() {
        let src = link.species + d * link.from;
        let dst = link.species + d * link.to;
        let mut stoich = vec![0i64; flat];
        stoich[src] = 1;
        stoich[dst] = -1;
        let mut m = vec![0u32; flat];
        m[src] = 1;
        let species = base
            .species_name(link.species)
            .map_or_else(|| format!("x{}", link.species), str::to_owned);
        channels.push(
            Channel::mass_action(stoich, link.rate, m)
                .named(format!("diffuse {species} {}->{}", link.from, link.to)),
        );
    }
    let mut flattened = ReactionNetwork::new(flat, channels)?;
    let names: Vec<String> = (0..k)
        .flat_map(|cell| (0..d).map(move |i| (i, cell)))
        .map(|(i, cell)| {
            let s = base
                .species_name(i)
                .map_or_else(|| format!("x{i}"), str::to_owned);
            format!("{s}@{cell}")
        })
        .collect();
    flattened = flattened.with_species_names(names)?;
    Ok(SpatialModel {
        base: base.clone(),
        mesh: mesh.clone(),
        flattened,
    })
}

/// Reactions in the first group, diffusion hops in the second.
pub fn reaction_diffusion_partition(model: &SpatialModel) -> SplitPartition {
    let reactions = model.reaction_channel_count();
    let total = model.flattened.channel_count();
    SplitPartition::new(
        total,
        (0..reactions).collect(),
        (reactions..total).collect(),
    )
    .expect("reaction and diffusion channels partition the flattened network")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::State;

    fn birth_death() -> ReactionNetwork {
        ReactionNetwork::new(
            1,
            vec![
                Channel::mass_action(vec![-1], 5.0, vec![0]).named("birth"),
                Channel::mass_action(vec![1], 0.05, vec![1]).named("death"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_cell_diffusion() {
        let pure =
            ReactionNetwork::new(1, vec![Channel::mass_action(vec![0], 0.0, vec![0])]).unwrap();
        let mesh = Mesh::from_edges(2, &[(0, 1)], &[3.0]).unwrap();
        let model = flatten(&pure, &mesh).unwrap();
        assert_eq!(model.diffusion_channel_count(), 2);
        let hop = model.reaction_channel_count();
        let x = State::new(vec![4, 1]);
        assert_eq!(
            model.flattened.apply_channel(&x, hop).unwrap(),
            State::new(vec![3, 2])
        );
        assert_eq!(
            model.flattened.apply_channel(&x, hop + 1).unwrap(),
            State::new(vec![5, 0])
        );
        assert_eq!(model.flattened.propensity(hop, &x), 12.0);
        assert_eq!(model.mesh.rate(0, 1, 0), 3.0);
        assert_eq!(model.mesh.rate(0, 0, 0), 0.0);
    }

    #[test]
    fn single_cell_is_the_base_network() {
        let base = birth_death();
        let model = flatten(&base, &Mesh::new(1, vec![]).unwrap()).unwrap();
        assert_eq!(model.flattened.channel_count(), base.channel_count());
        assert_eq!(model.flattened.species_count(), 1);
        for x in 0..20u64 {
            for r in 0..2 {
                assert_eq!(
                    model.flattened.propensity(r, &[x]),
                    base.propensity(r, &[x])
                );
            }
        }
        let p = reaction_diffusion_partition(&model);
        assert!(p.second().is_empty());
    }

    #[test]
    fn line_mesh_channel_enumeration() {
        let model = flatten(&birth_death(), &Mesh::line(3, &[1.0], 0.5).unwrap()).unwrap();
        // Oracle: enumerate ordered neighbour pairs of a 3-cell line directly.
        let pairs: Vec<(usize, usize)> = (0usize..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|&(a, b)| a.abs_diff(b) == 1)
            .collect();
        assert_eq!(pairs.len(), 4);
        assert_eq!(model.reaction_channel_count(), 6);
        assert_eq!(model.diffusion_channel_count(), pairs.len());
        assert_eq!(model.flattened.channel_count(), 10);
        for (a, b) in pairs {
            assert_eq!(model.mesh.rate(a, b, 0), 4.0);
        }
        let p = reaction_diffusion_partition(&model);
        assert_eq!(p.first().len(), 6);
        assert_eq!(p.second().len(), 4);
        let mut all: Vec<usize> = p.first().iter().chain(p.second()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn diffusion_columns_have_two_entries() {
        let base =
            ReactionNetwork::new(2, vec![Channel::mass_action(vec![1, -1], 1.0, vec![1, 0])])
                .unwrap();
        let model = flatten(&base, &Mesh::line(4, &[1.0, 2.0], 1.0).unwrap()).unwrap();
        for c in model.reaction_channel_count()..model.flattened.channel_count() {
            let col = model.flattened.stoich_column(c);
            assert_eq!(col.iter().filter(|&&n| n != 0).count(), 2);
            assert_eq!(col.iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn reactions_are_local() {
        let base = ReactionNetwork::new(
            2,
            vec![
                Channel::mass_action(vec![1, 1], 0.3, vec![1, 1]),
                Channel::new(
                    vec![-1, 0],
                    Propensity::custom("hill", |x: &[u64]| x[1] as f64 / (1.0 + x[1] as f64)),
                ),
            ],
        )
        .unwrap();
        let model = flatten(&base, &Mesh::line(3, &[1.0, 1.0], 1.0).unwrap()).unwrap();
        let x: Vec<u64> = vec![2, 3, 4, 5, 6, 7];
        for cell in 0..3 {
            for r in 0..2 {
                let c = model.reaction_channel(r, cell);
                let w = model.flattened.propensity(c, &x);
                let local = &x[2 * cell..2 * cell + 2];
                assert_eq!(w, base.propensity(r, local));
                // Perturbing other cells leaves the rate unchanged.
                let mut y = x.clone();
                for other in (0..3).filter(|&o| o != cell) {
                    y[2 * other] += 7;
                    y[2 * other + 1] += 11;
                }
                assert_eq!(model.flattened.propensity(c, &y), w);
            }
        }
    }

    #[test]
    fn invalid_meshes() {
        assert!(Mesh::new(0, vec![]).is_err());
        assert!(Mesh::from_edges(2, &[(0, 2)], &[1.0]).is_err());
        assert!(Mesh::from_edges(2, &[(0, 1)], &[-1.0]).is_err());
        let mesh = Mesh::from_edges(2, &[(0, 1)], &[1.0, 1.0]).unwrap();
        assert!(flatten(&birth_death(), &mesh).is_err());
    }
}
