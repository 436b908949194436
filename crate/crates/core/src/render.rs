//! Level-p pictures: SVG bars or squares, and binary PGM bitmaps.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernel::KernelPresentation;

pub const DEFAULT_CUBE_BUDGET: usize = 1_000_000;
pub const CANVAS: u32 = 1024;
const BAR_HEIGHT: u32 = 64;

/// Level-p grid cubes, as integer positions in `[0, k^p)^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeList {
    pub k: u32,
    pub d: u32,
    pub p: u32,
    /// Sorted, duplicate-free.
    pub cubes: Vec<Vec<u64>>,
}

impl CubeList {
    pub fn new(k: u32, d: u32, p: u32, mut cubes: Vec<Vec<u64>>) -> Self {
        cubes.sort_unstable();
        cubes.dedup();
        CubeList { k, d, p, cubes }
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn grid(&self) -> u64 {
        (self.k as u64).pow(self.p)
    }

    /// The plane through the first two axes with the remaining coordinates
    /// fixed at the given level-p positions.
    pub fn slice(&self, fixed: &[u64]) -> Result<CubeList> {
        if self.d < 2 || fixed.len() != self.d as usize - 2 {
            return Err(Error::UnsupportedDimension { d: self.d });
        }
        let cubes = self
            .cubes
            .iter()
            .filter(|c| &c[2..] == fixed)
            .map(|c| c[..2].to_vec())
            .collect();
        Ok(CubeList::new(self.k, 2, self.p, cubes))
    }

    fn planar(&self, slice: Option<&[u64]>) -> Result<CubeList> {
        match (self.d, slice) {
            (1 | 2, _) => Ok(self.clone()),
            (_, Some(fixed)) => self.slice(fixed),
            (d, None) => Err(Error::UnsupportedDimension { d }),
        }
    }
}

/// Cubes of level p meeting kernel element `i`, read off the kernel automaton.
pub fn level_approximation(kp: &KernelPresentation, i: usize, p: u32) -> Result<CubeList> {
    level_approximation_with(kp, i, p, DEFAULT_CUBE_BUDGET)
}

pub fn level_approximation_with(kp: &KernelPresentation, i: usize, p: u32, budget: usize) -> Result<CubeList> {
    kp.element(i)?;
    let k = kp.k() as u64;
    let d = kp.d() as usize;
    if k.checked_pow(p).is_none() {
        return Err(Error::BudgetExceeded { cap: budget });
    }
    let alphabet = kp.alphabet();
    let mut level: Vec<(usize, Vec<u64>)> = vec![(i, vec![0; d])];
    let mut digits = vec![0u32; d];
    for _ in 0..p {
        let mut next = Vec::new();
        for (j, pos) in &level {
            for &(b, t) in kp.transitions(*j) {
                if next.len() >= budget {
                    return Err(Error::BudgetExceeded { cap: budget });
                }
                alphabet.decode_into(b, &mut digits);
                let child = pos.iter().zip(&digits).map(|(&x, &b)| x * k + b as u64).collect();
                next.push((t, child));
            }
        }
        level = next;
    }
    Ok(CubeList::new(kp.k(), kp.d(), p, level.into_iter().map(|(_, c)| c).collect()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SvgOptions {
    /// Level-p positions fixing coordinates 3..d when d ≥ 3.
    pub slice: Option<Vec<u64>>,
}

fn coord(pos: u64, grid: u64) -> String {
    let x = pos as f64 * CANVAS as f64 / grid as f64;
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// SVG document: one bar per cube for d = 1, one square per cube for d = 2,
/// y increasing upward.
pub fn render_svg(c: &CubeList, options: &SvgOptions) -> Result<String> {
    let c = c.planar(options.slice.as_deref())?;
    let grid = c.grid();
    let size = coord(1, grid);
    let height = if c.d == 1 { BAR_HEIGHT } else { CANVAS };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{height}" viewBox="0 0 {CANVAS} {height}">"#
    );
    for cube in &c.cubes {
        if c.d == 1 {
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="0" width="{size}" height="{BAR_HEIGHT}" fill="black"/>"#,
                coord(cube[0], grid)
            );
        } else {
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{size}" height="{size}" fill="black"/>"#,
                coord(cube[0], grid),
                coord(grid - 1 - cube[1], grid)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Binary greymap, `resolution` pixels square; a pixel is 0 when its cell
/// lies in a listed cube and 255 otherwise. Row 0 is the top edge.
pub fn render_pgm(c: &CubeList, resolution: u64) -> Result<Vec<u8>> {
    if c.d != 2 {
        return Err(Error::UnsupportedDimension { d: c.d });
    }
    let grid = c.grid();
    if resolution == 0 || !resolution.is_multiple_of(grid) {
        return Err(Error::ResolutionMismatch { resolution, grid });
    }
    let scale = resolution / grid;
    let res = resolution as usize;
    let mut pixels = vec![255u8; res * res];
    for cube in &c.cubes {
        let x0 = (cube[0] * scale) as usize;
        let top = ((grid - 1 - cube[1]) * scale) as usize;
        for row in top..top + scale as usize {
            pixels[row * res + x0..row * res + x0 + scale as usize].fill(0);
        }
    }
    let mut out = format!("P5\n{resolution} {resolution}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::SetAutomaton;
    use crate::digits::Alphabet;
    use crate::kernel::compute_kernel;
    use crate::saturate::saturate;

    fn kernel(k: u32, d: u32, letters: &[&[u32]]) -> KernelPresentation {
        let letters: Vec<Vec<u32>> = letters.iter().map(|l| l.to_vec()).collect();
        let a = SetAutomaton::single_state(Alphabet::new(k, d).unwrap(), &letters).unwrap();
        compute_kernel(&saturate(&a)).unwrap()
    }

    fn flat(c: &CubeList) -> Vec<u64> {
        c.cubes.iter().map(|x| x[0]).collect()
    }

    #[test]
    fn cantor_levels() {
        let kp = kernel(3, 1, &[&[0], &[2]]);
        assert_eq!(flat(&level_approximation(&kp, 0, 1).unwrap()), vec![0, 1, 2]);
        assert_eq!(flat(&level_approximation(&kp, 0, 2).unwrap()), vec![0, 1, 2, 3, 5, 6, 7, 8]);
        let svg = render_svg(&level_approximation(&kp, 0, 3).unwrap(), &SvgOptions::default()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 18);
        assert!(svg.contains(r#"width="1024" height="64" viewBox="0 0 1024 64""#));
        assert!(matches!(
            level_approximation_with(&kp, 0, 4, 5),
            Err(Error::BudgetExceeded { cap: 5 })
        ));
    }

    #[test]
    fn singleton_pgm_corner() {
        let kp = kernel(3, 2, &[&[0, 0]]);
        let c = level_approximation(&kp, 0, 2).unwrap();
        assert_eq!(c.cubes, vec![vec![0, 0]]);
        let img = render_pgm(&c, 9).unwrap();
        let header = b"P5\n9 9\n255\n";
        assert_eq!(&img[..header.len()], header);
        let px = &img[header.len()..];
        assert_eq!(px.iter().filter(|&&v| v == 0).count(), 1);
        // The origin is the bottom-left pixel.
        assert_eq!(px[8 * 9], 0);
    }

    #[test]
    fn full_cube_and_carpet_all_dark() {
        let full = kernel(2, 2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        let img = render_pgm(&level_approximation(&full, 0, 2).unwrap(), 16).unwrap();
        assert!(img[b"P5\n16 16\n255\n".len()..].iter().all(|&v| v == 0));
        let carpet = kernel(3, 2, &[&[0, 0], &[0, 1], &[0, 2], &[1, 0], &[1, 2], &[2, 0], &[2, 1], &[2, 2]]);
        let c = level_approximation(&carpet, 0, 1).unwrap();
        assert_eq!(c.len(), 9);
        let img = render_pgm(&c, 9).unwrap();
        assert!(img[b"P5\n9 9\n255\n".len()..].iter().all(|&v| v == 0));
    }

    #[test]
    fn errors_and_determinism() {
        let kp = kernel(3, 1, &[&[0], &[2]]);
        let c = level_approximation(&kp, 0, 2).unwrap();
        assert!(matches!(render_pgm(&c, 9), Err(Error::UnsupportedDimension { d: 1 })));
        let sq = kernel(3, 2, &[&[0, 0], &[2, 2]]);
        let c = level_approximation(&sq, 0, 2).unwrap();
        assert!(matches!(
            render_pgm(&c, 10),
            Err(Error::ResolutionMismatch { resolution: 10, grid: 9 })
        ));
        let a = render_svg(&c, &SvgOptions::default()).unwrap();
        assert_eq!(a, render_svg(&c, &SvgOptions::default()).unwrap());
    }

    #[test]
    fn three_dimensions_need_a_slice() {
        let kp = kernel(2, 3, &[&[0, 0, 0], &[1, 1, 1]]);
        let c = level_approximation(&kp, 0, 1).unwrap();
        assert!(matches!(
            render_svg(&c, &SvgOptions::default()),
            Err(Error::UnsupportedDimension { d: 3 })
        ));
        let opts = SvgOptions { slice: Some(vec![0]) };
        let svg = render_svg(&c, &opts).unwrap();
        assert_eq!(svg.matches("<rect").count(), c.slice(&[0]).unwrap().len());
    }
}
