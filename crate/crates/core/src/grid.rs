//! Fixed-radius neighbor search on a uniform hash grid.
//!
//! Cells have edge length `h` and are keyed by `floor(p / h)`, so every
//! neighbor of a point lies in the 27-cell block around it. Fluid and proxy
//! particles are indexed separately; the proxy index never changes during a
//! run and can be shared between frames with [`NeighborGrid::rebuild_fluid`].

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::{Error, Result, Vec3};

type CellKey = [i32; 3];

#[inline]
fn cell_of(p: &Vec3, inv_cell: f64) -> CellKey {
    [
        (p.x * inv_cell).floor() as i32,
        (p.y * inv_cell).floor() as i32,
        (p.z * inv_cell).floor() as i32,
    ]
}

/// Cell map for one particle set: each cell owns a contiguous slice of
/// `order`, filled in ascending particle index.
#[derive(Clone, Debug, Default)]
struct CellIndex {
    cells: FxHashMap<CellKey, (u32, u32)>,
    order: Vec<u32>,
}

impl CellIndex {
    fn build(positions: &[Vec3], inv_cell: f64, kind: &'static str) -> Result<Self> {
        let mut keys = Vec::with_capacity(positions.len());
        for (index, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::NonFinite { kind, index });
            }
            keys.push(cell_of(p, inv_cell));
        }

        let mut cells: FxHashMap<CellKey, (u32, u32)> = FxHashMap::default();
        for key in &keys {
            cells.entry(*key).or_insert((0, 0)).1 += 1;
        }
        let mut start = 0u32;
        for range in cells.values_mut() {
            let count = range.1;
            *range = (start, 0);
            start += count;
        }
        let mut order = vec![0u32; positions.len()];
        for (i, key) in keys.iter().enumerate() {
            let range = cells.get_mut(key).expect("cell counted above");
            order[(range.0 + range.1) as usize] = i as u32;
            range.1 += 1;
        }
        Ok(Self { cells, order })
    }

    #[inline]
    fn cell(&self, key: &CellKey) -> &[u32] {
        match self.cells.get(key) {
            Some(&(start, len)) => &self.order[start as usize..(start + len) as usize],
            None => &[],
        }
    }

    fn len(&self) -> usize {
        self.order.len()
    }
}

/// Neighbor indices of one particle, each list ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Neighbors {
    pub fluid: Vec<usize>,
    pub proxy: Vec<usize>,
}

/// Hash grid over a snapshot of fluid and proxy positions.
#[derive(Clone, Debug)]
pub struct NeighborGrid {
    h: f64,
    inv_cell: f64,
    fluid_positions: Vec<Vec3>,
    proxy_positions: Arc<Vec<Vec3>>,
    fluid: CellIndex,
    proxy: Arc<CellIndex>,
}

/// Build a grid with cell size `h` over both particle sets.
pub fn build_grid(fluid_positions: &[Vec3], proxy_positions: &[Vec3], h: f64) -> Result<NeighborGrid> {
    NeighborGrid::new(fluid_positions.to_vec(), Arc::new(proxy_positions.to_vec()), h)
}

impl NeighborGrid {
    pub fn new(fluid_positions: Vec<Vec3>, proxy_positions: Arc<Vec<Vec3>>, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("grid cell size must be positive, got {h}")));
        }
        let inv_cell = 1.0 / h;
        let fluid = CellIndex::build(&fluid_positions, inv_cell, "fluid")?;
        let proxy = Arc::new(CellIndex::build(&proxy_positions, inv_cell, "proxy")?);
        Ok(Self {
            h,
            inv_cell,
            fluid_positions,
            proxy_positions,
            fluid,
            proxy,
        })
    }

    /// New grid for moved fluid particles, sharing the (static) proxy index.
    pub fn rebuild_fluid(&self, fluid_positions: Vec<Vec3>) -> Result<Self> {
        let fluid = CellIndex::build(&fluid_positions, self.inv_cell, "fluid")?;
        Ok(Self {
            h: self.h,
            inv_cell: self.inv_cell,
            fluid_positions,
            proxy_positions: Arc::clone(&self.proxy_positions),
            fluid,
            proxy: Arc::clone(&self.proxy),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn fluid_positions(&self) -> &[Vec3] {
        &self.fluid_positions
    }

    pub fn proxy_positions(&self) -> &[Vec3] {
        &self.proxy_positions
    }

    pub fn fluid_len(&self) -> usize {
        self.fluid.len()
    }

    pub fn proxy_len(&self) -> usize {
        self.proxy.len()
    }

    /// Neighbors of fluid particle `i`: every other particle strictly closer
    /// than `h`, ascending by index.
    pub fn query_neighbors(&self, i: usize) -> Result<Neighbors> {
        let Some(center) = self.fluid_positions.get(i) else {
            return Err(Error::OutOfRange {
                index: i,
                len: self.fluid_positions.len(),
            });
        };
        let mut fluid = Vec::new();
        let mut proxy = Vec::new();
        self.collect_fluid(center, Some(i), &mut fluid);
        self.collect_proxy(center, None, &mut proxy);
        Ok(Neighbors {
            fluid: fluid.into_iter().map(|j| j as usize).collect(),
            proxy: proxy.into_iter().map(|k| k as usize).collect(),
        })
    }

    /// Neighbors of an arbitrary point. Nothing is excluded.
    pub fn query_point(&self, p: &Vec3) -> Neighbors {
        let mut fluid = Vec::new();
        let mut proxy = Vec::new();
        self.collect_fluid(p, None, &mut fluid);
        self.collect_proxy(p, None, &mut proxy);
        Neighbors {
            fluid: fluid.into_iter().map(|j| j as usize).collect(),
            proxy: proxy.into_iter().map(|k| k as usize).collect(),
        }
    }

    /// Proxy neighbors of proxy `k`, including `k` itself.
    pub(crate) fn proxy_neighbors_of_proxy(&self, k: usize, out: &mut Vec<u32>) {
        out.clear();
        let p = self.proxy_positions[k];
        self.collect_proxy(&p, None, out);
    }

    fn collect_fluid(&self, center: &Vec3, exclude: Option<usize>, out: &mut Vec<u32>) {
        let start = out.len();
        scan(
            center,
            self.h,
            self.inv_cell,
            &self.fluid,
            &self.fluid_positions,
            exclude,
            out,
        );
        out[start..].sort_unstable();
    }

    fn collect_proxy(&self, center: &Vec3, exclude: Option<usize>, out: &mut Vec<u32>) {
        let start = out.len();
        scan(
            center,
            self.h,
            self.inv_cell,
            &self.proxy,
            &self.proxy_positions,
            exclude,
            out,
        );
        out[start..].sort_unstable();
    }

    /// Neighbor lists for every fluid particle, in compressed form.
    pub fn neighbor_lists(&self) -> NeighborLists {
        let n = self.fluid_positions.len();
        let mut lists = NeighborLists {
            fluid_offsets: Vec::with_capacity(n + 1),
            fluid_indices: Vec::with_capacity(n * 40),
            proxy_offsets: Vec::with_capacity(n + 1),
            proxy_indices: Vec::new(),
        };
        lists.fluid_offsets.push(0);
        lists.proxy_offsets.push(0);
        for (i, center) in self.fluid_positions.iter().enumerate() {
            self.collect_fluid(center, Some(i), &mut lists.fluid_indices);
            self.collect_proxy(center, None, &mut lists.proxy_indices);
            lists.fluid_offsets.push(lists.fluid_indices.len() as u32);
            lists.proxy_offsets.push(lists.proxy_indices.len() as u32);
        }
        lists
    }
}

fn scan(
    center: &Vec3,
    h: f64,
    inv_cell: f64,
    index: &CellIndex,
    positions: &[Vec3],
    exclude: Option<usize>,
    out: &mut Vec<u32>,
) {
    if index.len() == 0 {
        return;
    }
    let h2 = h * h;
    let base = cell_of(center, inv_cell);
    for dx in -1..=1 {
        for dy in -1..=1 {
            for dz in -1..=1 {
                let key = [
                    base[0].wrapping_add(dx),
                    base[1].wrapping_add(dy),
                    base[2].wrapping_add(dz),
                ];
                for &j in index.cell(&key) {
                    if Some(j as usize) == exclude {
                        continue;
                    }
                    if (positions[j as usize] - center).norm_squared() < h2 {
                        out.push(j);
                    }
                }
            }
        }
    }
}

/// Compressed per-particle neighbor lists for one frame.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NeighborLists {
    fluid_offsets: Vec<u32>,
    fluid_indices: Vec<u32>,
    proxy_offsets: Vec<u32>,
    proxy_indices: Vec<u32>,
}

impl NeighborLists {
    pub fn len(&self) -> usize {
        self.fluid_offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn fluid(&self, i: usize) -> &[u32] {
        &self.fluid_indices[self.fluid_offsets[i] as usize..self.fluid_offsets[i + 1] as usize]
    }

    #[inline]
    pub fn proxy(&self, i: usize) -> &[u32] {
        &self.proxy_indices[self.proxy_offsets[i] as usize..self.proxy_offsets[i + 1] as usize]
    }

    pub fn from_lists(fluid: &[Vec<usize>], proxy: &[Vec<usize>]) -> Self {
        assert_eq!(fluid.len(), proxy.len());
        let mut lists = NeighborLists {
            fluid_offsets: vec![0],
            proxy_offsets: vec![0],
            ..Default::default()
        };
        for (f, p) in fluid.iter().zip(proxy) {
            lists.fluid_indices.extend(f.iter().map(|&j| j as u32));
            lists.proxy_indices.extend(p.iter().map(|&k| k as u32));
            lists.fluid_offsets.push(lists.fluid_indices.len() as u32);
            lists.proxy_offsets.push(lists.proxy_indices.len() as u32);
        }
        lists
    }

    pub fn total_fluid_pairs(&self) -> usize {
        self.fluid_indices.len()
    }
}
