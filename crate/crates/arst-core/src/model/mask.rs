//! Banded causal attention masking.

/// Banded causal mask over sequence positions.
///
/// Position `t` (1-based) may attend to positions `s` with
/// `t - W <= s <= t`, clamped at the start of the sequence: strictly
/// future positions are never visible, and past visibility is limited to
/// the `W` most recent positions. `W = 0` degenerates to self-only
/// attention. The mask is used additively: allowed pairs contribute their
/// raw score, disallowed pairs are excluded from the softmax entirely
/// (equivalent to adding negative infinity before normalization).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandedCausalMask {
    len: usize,
    band_width: usize,
}

/// Builds a banded causal mask for `len` positions with band width `w`.
pub fn build_banded_mask(len: usize, w: usize) -> BandedCausalMask {
    BandedCausalMask {
        len,
        band_width: w,
    }
}

impl BandedCausalMask {
    /// Number of sequence positions covered.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the mask covers no positions.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Band width `W`.
    pub fn band_width(&self) -> usize {
        self.band_width
    }

    /// Whether query position `t` may attend key position `s` (1-based).
    pub fn allowed(&self, t: usize, s: usize) -> bool {
        debug_assert!(t >= 1 && t <= self.len && s >= 1 && s <= self.len);
        s <= t && t - s <= self.band_width
    }

    /// Inclusive 1-based window of key positions visible from `t`.
    pub fn window(&self, t: usize) -> (usize, usize) {
        debug_assert!(t >= 1 && t <= self.len);
        (t.saturating_sub(self.band_width).max(1), t)
    }

    /// Inclusive 0-based column window for row `i` of a score matrix,
    /// as consumed by [`crate::numerics::masked_softmax_rows`].
    pub fn window0(&self, i: usize) -> (usize, usize) {
        let (lo, hi) = self.window(i + 1);
        (lo - 1, hi - 1)
    }
}
