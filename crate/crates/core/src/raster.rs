//! Raster classification of the parameter plane: one region verdict with
//! attracting period per pixel, rows computed in parallel.

use num_complex::Complex64;

use crate::error::Result;
use crate::family::FamilySlice;
use crate::orbit::{classify_slice, IterationBudget, ParameterClass, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn is_valid(&self) -> bool {
        self.re_max > self.re_min && self.im_max > self.im_min
    }
}

#[derive(Debug, Clone)]
pub struct RasterJob {
    pub rho: Complex64,
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub budget: IterationBudget,
    /// Worker-thread cap; defaults to the available parallelism.
    pub threads: Option<usize>,
}

/// Per-pixel classification, row-major with row 0 at `im_max`.
#[derive(Debug, Clone)]
pub struct ClassificationGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<ParameterClass>,
}

impl ClassificationGrid {
    pub fn cell(&self, col: usize, row: usize) -> &ParameterClass {
        &self.cells[row * self.width + col]
    }
}

/// Center of the pixel `(col, row)` in parameter coordinates.
pub fn pixel_center(job: &RasterJob, col: usize, row: usize) -> Complex64 {
    let dx = (job.window.re_max - job.window.re_min) / job.width as f64;
    let dy = (job.window.im_max - job.window.im_min) / job.height as f64;
    Complex64::new(
        job.window.re_min + (col as f64 + 0.5) * dx,
        job.window.im_max - (row as f64 + 0.5) * dy,
    )
}

/// Pixel containing the parameter, if inside the window.
pub fn locate_pixel(job: &RasterJob, lambda: Complex64) -> Option<(usize, usize)> {
    let w = &job.window;
    if lambda.re < w.re_min || lambda.re >= w.re_max || lambda.im <= w.im_min
        || lambda.im > w.im_max
    {
        return None;
    }
    let col = ((lambda.re - w.re_min) / (w.re_max - w.re_min) * job.width as f64) as usize;
    let row = ((w.im_max - lambda.im) / (w.im_max - w.im_min) * job.height as f64) as usize;
    Some((col.min(job.width - 1), row.min(job.height - 1)))
}

fn classify_pixel(job: &RasterJob, col: usize, row: usize) -> ParameterClass {
    let lambda = pixel_center(job, col, row);
    match FamilySlice::new(job.rho, lambda) {
        Ok(s) => classify_slice(&s, job.budget),
        // Degenerate pixels (lambda = 0 or rho/2) carry no region.
        Err(_) => ParameterClass {
            region: Region::Unresolved,
            period_lambda: None,
            period_mu: None,
        },
    }
}

/// Classifies every pixel of the job. Rows are distributed over worker
/// threads through a shared counter; the output is deterministic because
/// each cell depends only on its own pixel.
pub fn render_parameter_plane(job: &RasterJob) -> Result<ClassificationGrid> {
    let threads = job
        .threads
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);
    let width = job.width;
    let height = job.height;
    let mut cells = vec![
        ParameterClass {
            region: Region::Unresolved,
            period_lambda: None,
            period_mu: None,
        };
        width * height
    ];

    if threads == 1 {
        for row in 0..height {
            for col in 0..width {
                cells[row * width + col] = classify_pixel(job, col, row);
            }
        }
    } else {
        let next_row = std::sync::atomic::AtomicUsize::new(0);
        let rows: Vec<std::sync::Mutex<Option<Vec<ParameterClass>>>> =
            (0..height).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let row = next_row.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if row >= height {
                        break;
                    }
                    let mut out = Vec::with_capacity(width);
                    for col in 0..width {
                        out.push(classify_pixel(job, col, row));
                    }
                    *rows[row].lock().unwrap() = Some(out);
                });
            }
        });
        for (row, slot) in rows.into_iter().enumerate() {
            let data = slot.into_inner().unwrap().expect("row computed");
            cells[row * width..(row + 1) * width].clone_from_slice(&data);
        }
    }
    Ok(ClassificationGrid {
        width,
        height,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::model_setup;

    fn job(width: usize, height: usize, threads: Option<usize>) -> RasterJob {
        RasterJob {
            rho: Complex64::new(2.0 / 3.0, 0.0),
            window: Window {
                re_min: -2.0,
                re_max: 6.0,
                im_min: -4.0,
                im_max: 4.0,
            },
            width,
            height,
            budget: IterationBudget::default(),
            threads,
        }
    }

    #[test]
    fn pixel_at_model_parameter_is_period_one() {
        let m = model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap();
        let job = job(160, 160, Some(2));
        let grid = render_parameter_plane(&job).unwrap();
        let (col, row) = locate_pixel(&job, m.lambda0()).unwrap();
        let cell = grid.cell(col, row);
        assert_eq!(cell.region, Region::MLambda);
        assert_eq!(cell.period_lambda, Some(1));
    }

    #[test]
    fn threading_does_not_change_the_grid() {
        let a = render_parameter_plane(&job(48, 40, Some(1))).unwrap();
        let b = render_parameter_plane(&job(48, 40, Some(4))).unwrap();
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.region, y.region);
            assert_eq!(x.period_lambda, y.period_lambda);
            assert_eq!(x.period_mu, y.period_mu);
        }
    }

    #[test]
    fn shift_sample_pixel_matches_direct_classification() {
        let job = job(80, 80, Some(2));
        let grid = render_parameter_plane(&job).unwrap();
        let lambda = Complex64::new(1.0, 0.1);
        let (col, row) = locate_pixel(&job, lambda).unwrap();
        // The validated sample and its pixel agree on the region.
        let direct = crate::orbit::classify_parameter(
            job.rho,
            pixel_center(&job, col, row),
            job.budget,
        )
        .unwrap();
        assert_eq!(grid.cell(col, row).region, direct.region);
        assert_eq!(direct.region, Region::Shift);
    }

    #[test]
    fn right_edge_is_dominated_by_period_one() {
        let job = job(120, 120, Some(2));
        let grid = render_parameter_plane(&job).unwrap();
        let col = job.width - 1;
        let mut period_one = 0;
        for row in 0..job.height {
            let cell = grid.cell(col, row);
            if cell.region == Region::MLambda && cell.period_lambda == Some(1) {
                period_one += 1;
            }
        }
        assert!(
            period_one * 2 > job.height,
            "right edge majority check failed: {period_one}/{}",
            job.height
        );
    }
}
