//! Tile libraries: the set of shapes the tiling solver may place.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::tile::{describe_tile, describe_two_by_k, efficiency, Cost, LutSite, Realization, TileDescriptor};
use crate::shape::{canonicalize, Board, Cell, GridPattern, Signedness};

pub const LIBRARY_FORMAT: &str = "tilemul-library/1";

const DEFAULT_LIBRARY_JSON: &str = include_str!("../data/default_library.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Searched,
    #[serde(rename = "parametric-2xk")]
    Parametric2xK,
    RectangularBase,
    Helper,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryEntry {
    pub tile: TileDescriptor,
    pub provenance: Provenance,
}

/// Carry-chain rectangles `k × 2` and `2 × k`, instantiated per board for
/// `min_k <= k <= max(w_x, w_y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarryFamily {
    pub min_k: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileLibrary {
    pub version: String,
    entries: Vec<LibraryEntry>,
    pub family: Option<CarryFamily>,
}

impl Default for TileLibrary {
    fn default() -> Self {
        Self::new("unversioned")
    }
}

impl TileLibrary {
    pub fn new(version: &str) -> Self {
        TileLibrary {
            version: version.to_string(),
            entries: Vec::new(),
            family: None,
        }
    }

    /// The frozen library shipped with the crate.
    pub fn builtin() -> Result<Self> {
        Self::from_json(DEFAULT_LIBRARY_JSON)
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, pattern: &GridPattern, s: Signedness) -> Option<&LibraryEntry> {
        let key = canonicalize(pattern).ok()?.tight();
        self.entries.iter().find(|e| e.tile.pattern == key && e.tile.signedness == s)
    }

    /// Adds an entry unless one with the same pattern and signedness exists.
    /// A cheaper newcomer replaces the incumbent. Returns whether the
    /// library changed.
    pub fn insert(&mut self, tile: TileDescriptor, provenance: Provenance) -> bool {
        match self
            .entries
            .iter_mut()
            .find(|e| e.tile.pattern == tile.pattern && e.tile.signedness == tile.signedness)
        {
            Some(e) if tile.cost_tile() < e.tile.cost_tile() => {
                *e = LibraryEntry { tile, provenance };
                true
            }
            Some(_) => false,
            None => {
                self.entries.push(LibraryEntry { tile, provenance });
                true
            }
        }
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&LibraryEntry) -> bool) {
        self.entries.retain(|e| keep(e));
    }

    /// Sorts by provenance, then descending efficiency, then pattern.
    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            (a.provenance as u8)
                .cmp(&(b.provenance as u8))
                .then(b.tile.efficiency().cmp(&a.tile.efficiency()))
                .then(a.tile.pattern.cmp(&b.tile.pattern))
        });
    }

    /// Unsigned tiles available on `board`: every entry that fits, plus the
    /// carry-chain family up to the longer board side. Family members never
    /// shadow a cheaper entry of the same shape.
    pub fn tiles_for_board(&self, board: &Board) -> Vec<LibraryEntry> {
        let fits = |p: &GridPattern| p.bound_x() <= board.w_x && p.bound_y() <= board.w_y;
        let mut out: Vec<LibraryEntry> = self
            .entries
            .iter()
            .filter(|e| e.tile.signedness.is_unsigned() && fits(&e.tile.pattern))
            .cloned()
            .collect();
        if let Some(fam) = self.family {
            for k in fam.min_k.max(2)..=board.w_x.max(board.w_y) {
                for along_x in [true, false] {
                    let t = describe_two_by_k(k, along_x).expect("k >= 2");
                    if !fits(&t.pattern) {
                        continue;
                    }
                    match out.iter_mut().find(|e| e.tile.pattern == t.pattern) {
                        Some(e) if t.cost_tile() < e.tile.cost_tile() => {
                            *e = LibraryEntry {
                                tile: t,
                                provenance: Provenance::Parametric2xK,
                            }
                        }
                        Some(_) => {}
                        None => out.push(LibraryEntry {
                            tile: t,
                            provenance: Provenance::Parametric2xK,
                        }),
                    }
                }
            }
        }
        out
    }

    /// Cheapest known cost per canonical pattern (used as parts when
    /// checking for decomposable tiles).
    pub fn cost_map(&self) -> HashMap<GridPattern, Cost> {
        let mut m: HashMap<GridPattern, Cost> = HashMap::new();
        for e in &self.entries {
            let c = e.tile.cost_tile();
            m.entry(e.tile.pattern)
                .and_modify(|old| *old = (*old).min(c))
                .or_insert(c);
        }
        m
    }

    pub fn to_json(&self) -> Result<String> {
        let file = LibraryFile {
            format: LIBRARY_FORMAT.to_string(),
            version: self.version.clone(),
            carry_family: self.family,
            entries: self.entries.iter().map(EntryRecord::from_entry).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses a library and re-derives every entry, rejecting files whose
    /// stored metrics or equations disagree with the derivation.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: LibraryFile = serde_json::from_str(text)?;
        if file.format != LIBRARY_FORMAT {
            return Err(Error::Format(format!("unknown library format {:?}", file.format)));
        }
        let mut lib = TileLibrary::new(&file.version);
        lib.family = file.carry_family;
        for rec in file.entries {
            let (tile, prov) = rec.to_entry()?;
            if !lib.insert(tile, prov) {
                return Err(Error::Format("duplicate library entry".into()));
            }
        }
        Ok(lib)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// The rectangular tiles every library needs for narrow boards:
/// 1×1, 1×2, 2×1, 2×3, 3×2 and 3×3.
pub fn rectangular_base() -> Vec<TileDescriptor> {
    [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (3, 3)]
        .iter()
        .map(|&(w, h)| describe_tile(&GridPattern::rect(w, h).expect("small rectangle"), Signedness::UNSIGNED).expect("tabulable"))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct LibraryFile {
    format: String,
    version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    carry_family: Option<CarryFamily>,
    entries: Vec<EntryRecord>,
}

#[derive(Serialize, Deserialize)]
struct Equation {
    weight: u32,
    sop: String,
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    mask: u128,
    bound_x: u32,
    bound_y: u32,
    x_signed: bool,
    y_signed: bool,
    area: u32,
    cost_mult: u32,
    w_out: u32,
    cost_tile: Cost,
    efficiency: String,
    realization: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    separate: Option<(u32, u32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    equations: Vec<Equation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    luts: Vec<LutSite>,
    provenance: Provenance,
}

impl EntryRecord {
    fn from_entry(e: &LibraryEntry) -> Self {
        let t = &e.tile;
        let (realization, separate, equations, luts) = match &t.realization {
            Realization::Logic(l) => (
                "logic".to_string(),
                l.separate.map(|c| (c.x, c.y)),
                l.functions
                    .iter()
                    .map(|f| Equation {
                        weight: f.weight,
                        sop: f.sop.to_string(),
                    })
                    .collect(),
                l.sites.clone(),
            ),
            Realization::CarryChain { along_x, .. } => (
                if *along_x { "carry-chain-x" } else { "carry-chain-y" }.to_string(),
                None,
                Vec::new(),
                Vec::new(),
            ),
        };
        EntryRecord {
            mask: t.pattern.mask(),
            bound_x: t.pattern.bound_x(),
            bound_y: t.pattern.bound_y(),
            x_signed: t.signedness.x_signed,
            y_signed: t.signedness.y_signed,
            area: t.area,
            cost_mult: t.cost_mult,
            w_out: t.w_out,
            cost_tile: t.cost_tile(),
            efficiency: t.efficiency().to_string(),
            realization,
            separate,
            equations,
            luts,
            provenance: e.provenance,
        }
    }

    fn to_entry(&self) -> Result<(TileDescriptor, Provenance)> {
        let pattern = GridPattern::new(self.bound_x, self.bound_y, self.mask)?;
        let s = Signedness::new(self.x_signed, self.y_signed);
        let tile = match self.realization.as_str() {
            "logic" => describe_tile(&pattern, s)?,
            "carry-chain-x" | "carry-chain-y" => {
                let along_x = self.realization == "carry-chain-x";
                let k = if along_x { pattern.bound_x() } else { pattern.bound_y() };
                let t = describe_two_by_k(k, along_x)?;
                if t.pattern != pattern {
                    return Err(Error::Inconsistent(format!("{pattern:?} is not a carry-chain rectangle")));
                }
                t
            }
            other => return Err(Error::Format(format!("unknown realization {other:?}"))),
        };
        let bad = |what: &str| Error::Inconsistent(format!("{what} of {pattern:?} disagrees with its derivation"));
        if tile.pattern != pattern {
            return Err(bad("canonical form"));
        }
        if tile.area != self.area || tile.cost_mult != self.cost_mult || tile.w_out != self.w_out {
            return Err(bad("metrics"));
        }
        if tile.cost_tile() != self.cost_tile || tile.efficiency() != efficiency(self.area, self.cost_tile) {
            return Err(bad("cost"));
        }
        if let Realization::Logic(l) = &tile.realization {
            if self.realization != "logic" {
                return Err(bad("realization"));
            }
            if l.separate.map(|c| (c.x, c.y)) != self.separate {
                return Err(bad("separate product"));
            }
            let sops: Vec<(u32, String)> = l.functions.iter().map(|f| (f.weight, f.sop.to_string())).collect();
            let stored: Vec<(u32, String)> = self.equations.iter().map(|q| (q.weight, q.sop.clone())).collect();
            if sops != stored {
                return Err(bad("equations"));
            }
            if l.sites != self.luts {
                return Err(bad("LUT contents"));
            }
        }
        Ok((tile, self.provenance))
    }
}

/// Cells of a pattern after moving it by (`dx`, `dy`).
pub fn placed_cells(p: &GridPattern, dx: u32, dy: u32) -> impl Iterator<Item = Cell> + '_ {
    p.cells().map(move |c| Cell::new(c.x + dx, c.y + dy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_set_metrics() {
        let base = rectangular_base();
        let got: Vec<(u32, u32)> = base.iter().map(|t| (t.cost_mult, t.w_out)).collect();
        assert_eq!(got, [(1, 1), (1, 2), (1, 2), (3, 5), (3, 5), (5, 6)]);
    }

    #[test]
    fn insert_dedups_and_keeps_cheaper() {
        let mut lib = TileLibrary::new("t");
        let two = describe_tile(&GridPattern::rect(2, 2).unwrap(), Signedness::UNSIGNED).unwrap();
        assert!(lib.insert(two.clone(), Provenance::Searched));
        assert!(!lib.insert(two, Provenance::Helper));
        assert!(!lib.insert(describe_two_by_k(2, true).unwrap(), Provenance::Parametric2xK));
        assert_eq!(lib.len(), 1);
        assert_eq!(lib.entries()[0].provenance, Provenance::Searched);
    }

    #[test]
    fn json_round_trip_and_tamper_check() {
        let mut lib = TileLibrary::new("t");
        for t in rectangular_base() {
            lib.insert(t, Provenance::RectangularBase);
        }
        lib.insert(describe_two_by_k(5, false).unwrap(), Provenance::Parametric2xK);
        lib.family = Some(CarryFamily { min_k: 2 });
        let text = lib.to_json().unwrap();
        let back = TileLibrary::from_json(&text).unwrap();
        assert_eq!(back, lib);
        assert_eq!(back.to_json().unwrap(), text);
        let tampered = text.replacen("\"cost_mult\": 5", "\"cost_mult\": 4", 1);
        assert!(matches!(TileLibrary::from_json(&tampered), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn family_instantiation() {
        let mut lib = TileLibrary::new("t");
        for t in rectangular_base() {
            lib.insert(t, Provenance::RectangularBase);
        }
        lib.family = Some(CarryFamily { min_k: 2 });
        let tiles = lib.tiles_for_board(&Board::new(6, 2).unwrap());
        let chains: Vec<u32> = tiles
            .iter()
            .filter(|e| e.provenance == Provenance::Parametric2xK)
            .map(|e| e.tile.area / 2)
            .collect();
        // the 3x2 base tile is cheaper than its chain; 2x2 is not in the library
        assert_eq!(chains, [2, 4, 5, 6]);
        assert!(tiles.iter().all(|e| e.tile.pattern.bound_y() <= 2));
    }
}
