use std::fmt;

/// How an operand is traversed. Diagonal traversals split both axes into
/// three parts, horizontal ones split the columns, vertical ones the rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Diagonal { down: bool, right: bool },
    Horizontal { right: bool },
    Vertical { down: bool },
    None,
}

impl Direction {
    pub const TOP_LEFT: Direction = Direction::Diagonal {
        down: true,
        right: true,
    };
    pub const LEFT_RIGHT: Direction = Direction::Horizontal { right: true };
    pub const TOP_BOTTOM: Direction = Direction::Vertical { down: true };

    /// Number of elements the traversal walks over for a `rows` × `cols`
    /// operand. Diagonal traversals continue past the end of the shorter
    /// axis with empty blocks on that axis.
    pub fn extent(self, rows: usize, cols: usize) -> usize {
        match self {
            Direction::Diagonal { .. } => rows.max(cols),
            Direction::Horizontal { .. } => cols,
            Direction::Vertical { .. } => rows,
            Direction::None => 0,
        }
    }

    /// Whether `part` names a part of an operand traversed this way.
    pub fn has_part(self, part: &str) -> bool {
        let digit = |c: u8| (b'0'..=b'2').contains(&c);
        match (self, part.as_bytes()) {
            (Direction::Diagonal { .. }, [a, b]) => digit(*a) && digit(*b),
            (Direction::Horizontal { .. } | Direction::Vertical { .. }, [a]) => digit(*a),
            (Direction::None, []) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match *self {
            Direction::Diagonal { down, right } => match (down, right) {
                (true, true) => "top-left to bottom-right",
                (true, false) => "top-right to bottom-left",
                (false, true) => "bottom-left to top-right",
                (false, false) => "bottom-right to top-left",
            },
            Direction::Horizontal { right: true } => "left to right",
            Direction::Horizontal { right: false } => "right to left",
            Direction::Vertical { down: true } => "top to bottom",
            Direction::Vertical { down: false } => "bottom to top",
            Direction::None => "not traversed",
        };
        f.write_str(s)
    }
}

/// Lengths of the three parts of an axis of length `len` after `p`
/// elements were traversed and `b` more are taken now. A backward
/// traversal starts at the far end, so the traversed part is the last one.
pub fn split_axis(len: usize, p: usize, b: usize, forward: bool) -> [usize; 3] {
    let done = p.min(len);
    let cur = (p + b).min(len) - done;
    let rest = len - done - cur;
    if forward {
        [done, cur, rest]
    } else {
        [rest, cur, done]
    }
}

/// Part sizes of one operand in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    pub direction: Direction,
    pub rows: [usize; 3],
    pub cols: [usize; 3],
}

/// Location and size of a part inside its operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartView {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Partition {
    /// Splits a `rows` × `cols` operand for progress `p` and effective
    /// block size `b_eff`. Axes shorter than `p + b_eff` are clamped.
    pub fn at(direction: Direction, rows: usize, cols: usize, p: usize, b_eff: usize) -> Self {
        let whole = |n| [n, 0, 0];
        let (r, c) = match direction {
            Direction::Diagonal { down, right } => (
                split_axis(rows, p, b_eff, down),
                split_axis(cols, p, b_eff, right),
            ),
            Direction::Horizontal { right } => (whole(rows), split_axis(cols, p, b_eff, right)),
            Direction::Vertical { down } => (split_axis(rows, p, b_eff, down), whole(cols)),
            Direction::None => (whole(rows), whole(cols)),
        };
        Partition {
            direction,
            rows: r,
            cols: c,
        }
    }

    pub fn part(&self, name: &str) -> Option<PartView> {
        if !self.direction.has_part(name) {
            return None;
        }
        let idx = |c: u8| (c - b'0') as usize;
        let b = name.as_bytes();
        let (i, j) = match self.direction {
            Direction::Diagonal { .. } => (Some(idx(b[0])), Some(idx(b[1]))),
            Direction::Horizontal { .. } => (None, Some(idx(b[0]))),
            Direction::Vertical { .. } => (Some(idx(b[0])), None),
            Direction::None => (None, None),
        };
        let axis = |split: &[usize; 3], k: Option<usize>| match k {
            Some(k) => (split[..k].iter().sum(), split[k]),
            None => (0, split[0]),
        };
        let (row, rows) = axis(&self.rows, i);
        let (col, cols) = axis(&self.cols, j);
        Some(PartView {
            row,
            col,
            rows,
            cols,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("progress {p} is not below the traversal extent {extent}")]
pub struct RepartitionError {
    pub p: usize,
    pub extent: usize,
}

/// Partition of one operand at progress `p` with block size `b`, together
/// with the effective block size `min(b, extent - p)`.
pub fn repartition(
    direction: Direction,
    rows: usize,
    cols: usize,
    p: usize,
    b: usize,
) -> Result<(Partition, usize), RepartitionError> {
    let extent = direction.extent(rows, cols);
    if p >= extent {
        return Err(RepartitionError { p, extent });
    }
    let b_eff = b.max(1).min(extent - p);
    Ok((Partition::at(direction, rows, cols, p, b_eff), b_eff))
}
