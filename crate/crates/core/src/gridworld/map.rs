use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::geometry::Cell;

pub const ZONE_SIZE: i32 = 2;

pub const DESTINATION_NAMES: [&str; 7] = ["brown", "green", "orange", "yellow", "darkblue", "pink", "purple"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("map generation gave up after {0} attempts")]
    GenerationExhausted(usize),
    #[error("zone {id} at {anchor} leaves the {width}x{height} grid")]
    ZoneOutOfBounds { id: usize, anchor: Cell, width: i32, height: i32 },
    #[error("zones {0} and {1} overlap or touch")]
    ZonesTooClose(usize, usize),
    #[error("duplicate zone id {0}")]
    DuplicateZone(usize),
    #[error("cell {0} lies outside the grid")]
    CellOutOfBounds(Cell),
    #[error("duplicate destination `{0}`")]
    DuplicateDestination(String),
    #[error("cell {0} is used by more than one site")]
    SharedCell(Cell),
    #[error("grid dimensions {0}x{1} are too small")]
    BadDimensions(i32, i32),
    #[error("expected {expected} {what}, found {found}")]
    Count { what: &'static str, expected: usize, found: usize },
    #[error("cell {0} lies inside a zone")]
    InsideZone(Cell),
}

/// A 2x2 hazard region (red zone or monster lair), addressed by its
/// top-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zone {
    pub id: usize,
    pub anchor: Cell,
}

impl Zone {
    pub fn new(id: usize, anchor: Cell) -> Self {
        Self { id, anchor }
    }

    pub fn contains(&self, c: Cell) -> bool {
        let (dx, dy) = (i64::from(c.x) - i64::from(self.anchor.x), i64::from(c.y) - i64::from(self.anchor.y));
        (0..i64::from(ZONE_SIZE)).contains(&dx) && (0..i64::from(ZONE_SIZE)).contains(&dy)
    }

    pub fn cells(&self) -> [Cell; 4] {
        let a = self.anchor;
        [a, Cell::new(a.x + 1, a.y), Cell::new(a.x, a.y + 1), Cell::new(a.x + 1, a.y + 1)]
    }

    pub fn in_bounds(&self, width: i32, height: i32) -> bool {
        self.anchor.x >= 0 && self.anchor.y >= 0 && self.anchor.x <= width - ZONE_SIZE && self.anchor.y <= height - ZONE_SIZE
    }

    /// Disjoint with at least one free row or column between the two.
    pub fn separated_from(&self, other: &Zone) -> bool {
        let gap = (ZONE_SIZE + 1) as u32;
        self.anchor.x.abs_diff(other.anchor.x) >= gap || self.anchor.y.abs_diff(other.anchor.y) >= gap
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Destination {
    pub name: Arc<str>,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridMap {
    pub width: i32,
    pub height: i32,
    pub zones: Vec<Zone>,
    pub destinations: Vec<Destination>,
    pub start: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapParams {
    pub width: i32,
    pub height: i32,
    pub zones: usize,
    pub destinations: usize,
    /// Keep destinations off zone cells. The start cell is always clear.
    pub clear_destinations: bool,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            width: 20,
            height: 20,
            zones: 10,
            destinations: 7,
            clear_destinations: false,
        }
    }
}

const MAX_ATTEMPTS: usize = 1_000;
const ZONE_TRIES: usize = 200;

impl GridMap {
    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn zone_at(&self, c: Cell) -> Option<&Zone> {
        self.zones.iter().find(|z| z.contains(c))
    }

    pub fn in_zone(&self, c: Cell) -> bool {
        self.zone_at(c).is_some()
    }

    pub fn zone(&self, id: usize) -> Option<&Zone> {
        self.zones.iter().find(|z| z.id == id)
    }

    pub fn destination(&self, name: &str) -> Option<&Destination> {
        self.destinations.iter().find(|d| &*d.name == name)
    }

    pub fn destination_index(&self, name: &str) -> Option<usize> {
        self.destinations.iter().position(|d| &*d.name == name)
    }

    /// Structural checks every map must pass (hand-written or generated).
    pub fn validate(&self) -> Result<(), MapError> {
        if self.width < ZONE_SIZE || self.height < ZONE_SIZE {
            return Err(MapError::BadDimensions(self.width, self.height));
        }
        for (i, z) in self.zones.iter().enumerate() {
            if !z.in_bounds(self.width, self.height) {
                return Err(MapError::ZoneOutOfBounds {
                    id: z.id,
                    anchor: z.anchor,
                    width: self.width,
                    height: self.height,
                });
            }
            for other in &self.zones[..i] {
                if other.id == z.id {
                    return Err(MapError::DuplicateZone(z.id));
                }
                if !z.separated_from(other) {
                    return Err(MapError::ZonesTooClose(other.id, z.id));
                }
            }
        }
        if !self.in_bounds(self.start) {
            return Err(MapError::CellOutOfBounds(self.start));
        }
        for (i, d) in self.destinations.iter().enumerate() {
            if !self.in_bounds(d.cell) {
                return Err(MapError::CellOutOfBounds(d.cell));
            }
            if d.cell == self.start {
                return Err(MapError::SharedCell(d.cell));
            }
            for other in &self.destinations[..i] {
                if other.name == d.name {
                    return Err(MapError::DuplicateDestination(d.name.to_string()));
                }
                if other.cell == d.cell {
                    return Err(MapError::SharedCell(d.cell));
                }
            }
        }
        Ok(())
    }

    /// The stronger invariants of a freshly generated map.
    pub fn validate_generated(&self, params: &MapParams) -> Result<(), MapError> {
        self.validate()?;
        if self.width != params.width || self.height != params.height {
            return Err(MapError::BadDimensions(self.width, self.height));
        }
        if self.zones.len() != params.zones {
            return Err(MapError::Count {
                what: "zones",
                expected: params.zones,
                found: self.zones.len(),
            });
        }
        if self.destinations.len() != params.destinations {
            return Err(MapError::Count {
                what: "destinations",
                expected: params.destinations,
                found: self.destinations.len(),
            });
        }
        if self.in_zone(self.start) {
            return Err(MapError::InsideZone(self.start));
        }
        if params.clear_destinations {
            if let Some(d) = self.destinations.iter().find(|d| self.in_zone(d.cell)) {
                return Err(MapError::InsideZone(d.cell));
            }
        }
        Ok(())
    }
}

pub fn generate_map(seed: u64) -> Result<GridMap, MapError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_map_with(&mut rng, &MapParams::default())
}

/// Rejection-sample a map: zones first, then the start and destination
/// cells among the remaining free cells.
pub fn generate_map_with<R: Rng + ?Sized>(rng: &mut R, params: &MapParams) -> Result<GridMap, MapError> {
    if params.width < ZONE_SIZE || params.height < ZONE_SIZE {
        return Err(MapError::BadDimensions(params.width, params.height));
    }
    if params.destinations > DESTINATION_NAMES.len() {
        return Err(MapError::Count {
            what: "destination names",
            expected: DESTINATION_NAMES.len(),
            found: params.destinations,
        });
    }
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let mut zones: Vec<Zone> = Vec::with_capacity(params.zones);
        for id in 0..params.zones {
            let placed = (0..ZONE_TRIES).find_map(|_| {
                let z = Zone::new(
                    id,
                    Cell::new(
                        rng.gen_range(0..=params.width - ZONE_SIZE),
                        rng.gen_range(0..=params.height - ZONE_SIZE),
                    ),
                );
                zones.iter().all(|o| z.separated_from(o)).then_some(z)
            });
            match placed {
                Some(z) => zones.push(z),
                None => continue 'attempt,
            }
        }
        let all: Vec<Cell> = (0..params.height)
            .flat_map(|y| (0..params.width).map(move |x| Cell::new(x, y)))
            .collect();
        let covered = |c: &Cell| zones.iter().any(|z| z.contains(*c));
        let free: Vec<Cell> = all.iter().copied().filter(|c| !covered(c)).collect();
        if free.is_empty() {
            continue;
        }
        let start = free[rng.gen_range(0..free.len())];
        let pool: Vec<Cell> = (if params.clear_destinations { &free } else { &all })
            .iter()
            .copied()
            .filter(|c| *c != start)
            .collect();
        if pool.len() < params.destinations {
            continue;
        }
        let picked = rand::seq::index::sample(rng, pool.len(), params.destinations);
        let destinations = picked
            .iter()
            .map(|i| pool[i])
            .zip(DESTINATION_NAMES)
            .map(|(cell, name)| Destination {
                name: Arc::from(name),
                cell,
            })
            .collect();
        return Ok(GridMap {
            width: params.width,
            height: params.height,
            zones,
            destinations,
            start,
        });
    }
    Err(MapError::GenerationExhausted(MAX_ATTEMPTS))
}
