//! Board and electrode-grid geometry.
//!
//! Coordinates are millimetres in a right-handed frame whose origin sits at
//! the board centre. Electrode positions, contact positions and localization
//! outputs all live in this frame.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const CHANNEL_COUNT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Physical layout of the sensing board: outer dimensions, the rectangle the
/// electrode grid occupies, and one position per electrode channel. Both
/// rectangles are centred on the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PalmGeometry {
    pub board_width: f64,
    pub board_height: f64,
    pub grid_width: f64,
    pub grid_height: f64,
    pub sensing_positions: Vec<Point2>,
}

impl PalmGeometry {
    pub fn new(
        board_width: f64,
        board_height: f64,
        grid_width: f64,
        grid_height: f64,
        sensing_positions: Vec<Point2>,
    ) -> Result<Self> {
        if !(board_width > 0.0 && board_height > 0.0 && grid_width > 0.0 && grid_height > 0.0) {
            return Err(Error::InvalidParameter(
                "board and grid dimensions must be positive".into(),
            ));
        }
        if grid_width > board_width || grid_height > board_height {
            return Err(Error::InvalidParameter(
                "grid rectangle must fit inside the board".into(),
            ));
        }
        if sensing_positions.len() != CHANNEL_COUNT {
            return Err(Error::InvalidParameter(format!(
                "expected {CHANNEL_COUNT} sensing positions, got {}",
                sensing_positions.len()
            )));
        }
        for p in &sensing_positions {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidParameter(
                    "sensing positions must be finite".into(),
                ));
            }
            if p.x.abs() > grid_width / 2.0 || p.y.abs() > grid_height / 2.0 {
                return Err(Error::PositionOutOfBoard { x: p.x, y: p.y });
            }
        }
        Ok(Self {
            board_width,
            board_height,
            grid_width,
            grid_height,
            sensing_positions,
        })
    }

    /// The 45x45 mm board with a 4x4 electrode grid on 10 mm pitch,
    /// row-major from (-15, -15): channel i sits at
    /// (-15 + 10*(i % 4), -15 + 10*(i / 4)).
    pub fn standard() -> Self {
        let positions = (0..CHANNEL_COUNT)
            .map(|i| Point2::new(-15.0 + 10.0 * (i % 4) as f64, -15.0 + 10.0 * (i / 4) as f64))
            .collect();
        // 4x4 on 10 mm pitch spans 30 mm; positions sit exactly on the grid
        // rectangle's border, so the containment check holds with equality.
        Self::new(45.0, 45.0, 30.0, 30.0, positions).expect("standard layout is valid")
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p.x.abs() <= self.board_width / 2.0 && p.y.abs() <= self.board_height / 2.0
    }

    /// Stable fingerprint of the layout, used to pair saved models with the
    /// geometry they were trained against. Hashes the canonical decimal
    /// rendering of every dimension and position, so any observable change
    /// to the layout changes the hash.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        let mut feed = |v: f64| hasher.update(format!("{v};").as_bytes());
        feed(self.board_width);
        feed(self.board_height);
        feed(self.grid_width);
        feed(self.grid_height);
        for p in &self.sensing_positions {
            feed(p.x);
            feed(p.y);
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Default for PalmGeometry {
    fn default() -> Self {
        Self::standard()
    }
}
