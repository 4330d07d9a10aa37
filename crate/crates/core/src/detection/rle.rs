//! Run-length mask encoding used on the detector wire.
//!
//! Row-major over the full frame, alternating run lengths that start with a
//! background run (possibly 0): `[skip, fill, skip, fill, ...]`. The runs sum
//! to `width * height`; a trailing background run may be omitted.

use crate::imaging::BinaryMask;

pub fn encode(mask: &BinaryMask) -> Vec<u32> {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for &bit in mask.bits() {
        if bit == current {
            run += 1;
        } else {
            counts.push(run);
            current = bit;
            run = 1;
        }
    }
    counts.push(run);
    counts
}

pub fn decode(counts: &[u32], width: u32, height: u32) -> Result<BinaryMask, String> {
    let total = width as usize * height as usize;
    let mut bits = Vec::with_capacity(total);
    let mut fill = false;
    for &c in counts {
        if bits.len() + c as usize > total {
            return Err(format!("runs exceed {total} pixels"));
        }
        bits.resize(bits.len() + c as usize, fill);
        fill = !fill;
    }
    if bits.len() < total {
        if !fill {
            // the last run was foreground; only a background tail may be implicit
            bits.resize(total, false);
        } else {
            return Err(format!("runs cover {} of {total} pixels", bits.len()));
        }
    }
    BinaryMask::from_bits(width, height, bits).map_err(|e| e.to_string())
}
