//! Binary PPM (P6) encoding of a classification grid plus the color
//! legend shared with the JSON sidecar.

use serde::Serialize;
use shiftlocus_core::orbit::{ParameterClass, Region};
use shiftlocus_core::raster::ClassificationGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

pub const SHIFT: Rgb = Rgb(0, 128, 0); // green
pub const PERIOD1: Rgb = Rgb(255, 255, 0); // yellow
pub const PERIOD2: Rgb = Rgb(0, 255, 255); // cyan
pub const PERIOD3: Rgb = Rgb(255, 0, 0); // red
pub const PERIOD4: Rgb = Rgb(240, 230, 140); // khaki
pub const OTHER: Rgb = Rgb(128, 128, 128); // gray

#[derive(Debug, Clone, Serialize)]
pub struct Legend {
    pub shift: Rgb,
    pub period1: Rgb,
    pub period2: Rgb,
    pub period3: Rgb,
    pub period4: Rgb,
    pub other: Rgb,
}

pub fn legend() -> Legend {
    Legend {
        shift: SHIFT,
        period1: PERIOD1,
        period2: PERIOD2,
        period3: PERIOD3,
        period4: PERIOD4,
        other: OTHER,
    }
}

/// Color of one classified cell: the shift locus is green; components are
/// colored by the attracting period of whichever asymptotic value runs
/// away from the origin; everything else is gray.
pub fn color_of(cell: &ParameterClass) -> Rgb {
    let period = match cell.region {
        Region::Shift => return SHIFT,
        Region::MLambda => cell.period_lambda,
        Region::MMu => cell.period_mu,
        Region::Unresolved => None,
    };
    match period {
        Some(1) => PERIOD1,
        Some(2) => PERIOD2,
        Some(3) => PERIOD3,
        Some(4) => PERIOD4,
        _ => OTHER,
    }
}

/// Encodes the grid as a binary P6 image, row-major, no comments.
pub fn encode_ppm(grid: &ClassificationGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 3 * grid.cells.len());
    out.extend_from_slice(format!("P6\n{} {}\n255\n", grid.width, grid.height).as_bytes());
    for cell in &grid.cells {
        let Rgb(r, g, b) = color_of(cell);
        out.push(r);
        out.push(g);
        out.push(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_size() {
        let grid = ClassificationGrid {
            width: 3,
            height: 2,
            cells: vec![
                ParameterClass {
                    region: Region::Shift,
                    period_lambda: None,
                    period_mu: None,
                };
                6
            ],
        };
        let bytes = encode_ppm(&grid);
        assert!(bytes.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(bytes.len(), b"P6\n3 2\n255\n".len() + 18);
        assert_eq!(&bytes[b"P6\n3 2\n255\n".len()..][..3], &[0, 128, 0]);
    }

    #[test]
    fn period_colors() {
        let mk = |region, pl| ParameterClass {
            region,
            period_lambda: pl,
            period_mu: None,
        };
        assert_eq!(color_of(&mk(Region::MLambda, Some(1))), PERIOD1);
        assert_eq!(color_of(&mk(Region::MLambda, Some(4))), PERIOD4);
        assert_eq!(color_of(&mk(Region::MLambda, Some(9))), OTHER);
        assert_eq!(color_of(&mk(Region::Unresolved, None)), OTHER);
    }
}
