//! Orthonormal DCT-II in one and two dimensions on 8×8 blocks, the zigzag
//! AC scan, BT.601 color conversion, and block partitioning with edge
//! replication.

use std::sync::OnceLock;
use thiserror::Error;

/// Block side length.
pub const N: usize = 8;
/// Samples per block.
pub const BLOCK_LEN: usize = N * N;

/// One 8×8 block, row-major. Holds pixels before the transform and
/// coefficients after it; the orthonormal normalization keeps the energy
/// identical on both sides.
pub type Block = [f64; BLOCK_LEN];

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
}

/// Orthonormal DCT-II basis matrix: row k holds c_k cos(π(2n+1)k/16).
fn basis() -> &'static [[f64; N]; N] {
    static BASIS: OnceLock<[[f64; N]; N]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut g = [[0.0; N]; N];
        for (k, row) in g.iter_mut().enumerate() {
            let scale = if k == 0 { (1.0 / N as f64).sqrt() } else { (2.0 / N as f64).sqrt() };
            for (n, v) in row.iter_mut().enumerate() {
                *v = scale * (std::f64::consts::PI * (2.0 * n as f64 + 1.0) * k as f64 / (2.0 * N as f64)).cos();
            }
        }
        g
    })
}

/// Orthonormal 1-D DCT-II of an 8-vector.
pub fn dct1(v: &[f64; N]) -> [f64; N] {
    let g = basis();
    let mut out = [0.0; N];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for n in 0..N {
            acc += g[k][n] * v[n];
        }
        *o = acc;
    }
    out
}

/// Inverse of [`dct1`].
pub fn idct1(v: &[f64; N]) -> [f64; N] {
    let g = basis();
    let mut out = [0.0; N];
    for (n, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in 0..N {
            acc += g[k][n] * v[k];
        }
        *o = acc;
    }
    out
}

/// Orthonormal 2-D DCT-II: 1-D DCT along rows, then along columns.
pub fn dct2_forward(block: &Block) -> Block {
    let mut tmp = [0.0; BLOCK_LEN];
    for r in 0..N {
        let row: [f64; N] = block[r * N..(r + 1) * N].try_into().unwrap();
        tmp[r * N..(r + 1) * N].copy_from_slice(&dct1(&row));
    }
    let mut out = [0.0; BLOCK_LEN];
    for c in 0..N {
        let col: [f64; N] = std::array::from_fn(|r| tmp[r * N + c]);
        let t = dct1(&col);
        for r in 0..N {
            out[r * N + c] = t[r];
        }
    }
    out
}

/// Inverse 2-D DCT.
pub fn dct2_inverse(coeffs: &Block) -> Block {
    let mut tmp = [0.0; BLOCK_LEN];
    for c in 0..N {
        let col: [f64; N] = std::array::from_fn(|r| coeffs[r * N + c]);
        let t = idct1(&col);
        for r in 0..N {
            tmp[r * N + c] = t[r];
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for r in 0..N {
        let row: [f64; N] = tmp[r * N..(r + 1) * N].try_into().unwrap();
        out[r * N..(r + 1) * N].copy_from_slice(&idct1(&row));
    }
    out
}

/// The 63 AC positions of the standard JPEG zigzag scan as 1-based (j, k)
/// pairs, (1,1) = DC excluded. Starts (1,2), (2,1), ends (8,8).
pub fn zigzag() -> &'static [(usize, usize); 63] {
    static ORDER: OnceLock<[(usize, usize); 63]> = OnceLock::new();
    ORDER.get_or_init(|| {
        let mut order = [(0usize, 0usize); 63];
        let mut idx = 0;
        let (mut r, mut c) = (0i32, 0i32);
        let mut up = true;
        for _ in 0..BLOCK_LEN {
            if !(r == 0 && c == 0) {
                order[idx] = (r as usize + 1, c as usize + 1);
                idx += 1;
            }
            if up {
                if c == N as i32 - 1 {
                    r += 1;
                    up = false;
                } else if r == 0 {
                    c += 1;
                    up = false;
                } else {
                    r -= 1;
                    c += 1;
                }
            } else if r == N as i32 - 1 {
                c += 1;
                up = true;
            } else if c == 0 {
                r += 1;
                up = true;
            } else {
                r += 1;
                c -= 1;
            }
        }
        debug_assert_eq!(idx, 63);
        order
    })
}

/// Flat index (row-major, 0-based) of a 1-based (j, k) position.
pub fn pos_index(j: usize, k: usize) -> usize {
    debug_assert!((1..=N).contains(&j) && (1..=N).contains(&k));
    (j - 1) * N + (k - 1)
}

/// Full-range BT.601 RGB → YCbCr on [0,1] channels; chroma centered at 0.5.
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 0.5 + (b - y) / 1.772;
    let cr = 0.5 + (r - y) / 1.402;
    (y, cb, cr)
}

/// Inverse of [`rgb_to_ycbcr`] (exact in real arithmetic).
pub fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    let r = y + 1.402 * (cr - 0.5);
    let b = y + 1.772 * (cb - 0.5);
    let g = (y - 0.299 * r - 0.114 * b) / 0.587;
    (r, g, b)
}

/// A single-channel image plane, row-major samples in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Raster-order grid of 8×8 blocks covering a plane, with the true
/// dimensions kept so padding can be cropped away again.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    pub blocks_x: usize,
    pub blocks_y: usize,
    pub width: usize,
    pub height: usize,
    pub blocks: Vec<Block>,
}

impl BlockGrid {
    pub fn block(&self, bx: usize, by: usize) -> &Block {
        &self.blocks[by * self.blocks_x + bx]
    }

    pub fn block_mut(&mut self, bx: usize, by: usize) -> &mut Block {
        &mut self.blocks[by * self.blocks_x + bx]
    }
}

/// Split a plane into 8×8 blocks, replicating the last row/column into
/// any right/bottom padding.
pub fn partition_and_pad(plane: &Plane) -> Result<BlockGrid, TransformError> {
    if plane.width == 0 || plane.height == 0 {
        return Err(TransformError::EmptyImage { width: plane.width, height: plane.height });
    }
    let blocks_x = plane.width.div_ceil(N);
    let blocks_y = plane.height.div_ceil(N);
    let mut blocks = Vec::with_capacity(blocks_x * blocks_y);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut block = [0.0; BLOCK_LEN];
            for r in 0..N {
                let y = (by * N + r).min(plane.height - 1);
                for c in 0..N {
                    let x = (bx * N + c).min(plane.width - 1);
                    block[r * N + c] = plane.at(x, y);
                }
            }
            blocks.push(block);
        }
    }
    Ok(BlockGrid { blocks_x, blocks_y, width: plane.width, height: plane.height, blocks })
}

/// Reassemble a plane from its block grid, cropping the padding.
pub fn unpartition(grid: &BlockGrid) -> Plane {
    let mut data = vec![0.0; grid.width * grid.height];
    for by in 0..grid.blocks_y {
        for bx in 0..grid.blocks_x {
            let block = grid.block(bx, by);
            for r in 0..N {
                let y = by * N + r;
                if y >= grid.height {
                    break;
                }
                for c in 0..N {
                    let x = bx * N + c;
                    if x >= grid.width {
                        break;
                    }
                    data[y * grid.width + x] = block[r * N + c];
                }
            }
        }
    }
    Plane::new(grid.width, grid.height, data)
}
