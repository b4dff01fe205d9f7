//! Dense row-major grids and small convolution kernels.

use crate::error::{check_len, Error, Result};
use rustfft::num_complex::Complex64;

/// Rectangular array stored row-major: element `(i, j)` lives at `i * width + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

pub type Image = Grid<f64>;
pub type ComplexGrid = Grid<Complex64>;

impl<T: Clone + Default> Grid<T> {
    pub fn zeros(height: usize, width: usize) -> Self {
        Grid {
            height,
            width,
            data: vec![T::default(); height * width],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        check_len("grid from_vec", height * width, data.len())?;
        Ok(Grid {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

impl<T: Clone> Grid<T> {
    /// Copies the `height x width` window whose top-left corner is `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width {
            return Err(Error::InvalidParameter(format!(
                "crop {height}x{width}+{top}+{left} exceeds grid {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            let start = (top + i) * self.width + left;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Ok(Grid {
            height,
            width,
            data,
        })
    }
}

impl<T> std::ops::Index<(usize, usize)> for Grid<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.width + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.width + j]
    }
}

impl Image {
    pub fn to_complex(&self) -> ComplexGrid {
        ComplexGrid {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl ComplexGrid {
    /// Drops the imaginary parts. Used when a real-valued estimate is wanted
    /// from a complex-valued iterate.
    pub fn re(&self) -> Image {
        Image {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|c| c.re).collect(),
        }
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()))
    }
}

/// Square convolution kernel with odd side length; the tap at spatial offset
/// `(di, dj)` (each in `-r..=r`, `r = side / 2`) is `taps[(di + r) * side + (dj + r)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    side: usize,
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(side: usize, taps: Vec<f64>) -> Result<Self> {
        if side == 0 || side % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "kernel side must be odd and positive, got {side}"
            )));
        }
        check_len("kernel taps", side * side, taps.len())?;
        Ok(Kernel { side, taps })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn radius(&self) -> usize {
        self.side / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn tap(&self, di: isize, dj: isize) -> f64 {
        let r = self.radius() as isize;
        self.taps[((di + r) * self.side as isize + (dj + r)) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Returns a copy scaled to unit tap sum.
    pub fn normalized(&self) -> Result<Self> {
        let s = self.sum();
        if s.abs() < 1e-300 {
            return Err(Error::InvalidParameter(
                "cannot normalize kernel with zero tap sum".into(),
            ));
        }
        Ok(Kernel {
            side: self.side,
            taps: self.taps.iter().map(|t| t / s).collect(),
        })
    }

    /// Single-tap identity kernel: convolution with it is the identity map.
    pub fn identity() -> Self {
        Kernel {
            side: 1,
            taps: vec![1.0],
        }
    }
}
