//! Operand placement inside the sampler's preallocated arena.

use super::config::MemoryPolicy;

/// Placement cursor over an arena of `capacity` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArenaState {
    pub cursor: usize,
    pub capacity: usize,
    /// Number of times the trash cursor wrapped to the arena start.
    pub generation: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("operands need {needed} bytes, arena holds {capacity}")]
pub struct CapacityError {
    pub needed: usize,
    pub capacity: usize,
}

/// Byte offsets of one request's operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub offsets: Vec<usize>,
    /// The cursor wrapped while placing this request.
    pub wrapped: bool,
}

impl ArenaState {
    pub fn new(capacity: usize) -> Self {
        ArenaState {
            cursor: 0,
            capacity,
            generation: 0,
        }
    }

    /// Assigns byte offsets to operands with the given byte footprints.
    ///
    /// Operands of one request are packed back to back. Under `Trash` they
    /// start at the cursor, which then advances; if the whole set does not
    /// fit before the end, the cursor wraps to 0 first. Under `InCache` they
    /// always start at 0 and the cursor is left alone.
    pub fn place(
        &mut self,
        footprints: &[usize],
        policy: MemoryPolicy,
    ) -> Result<Placement, CapacityError> {
        let needed: usize = footprints.iter().sum();
        if needed > self.capacity {
            return Err(CapacityError {
                needed,
                capacity: self.capacity,
            });
        }
        let (mut at, wrapped) = match policy {
            MemoryPolicy::InCache => (0, false),
            MemoryPolicy::Trash if self.cursor + needed > self.capacity => {
                self.generation += 1;
                (0, true)
            }
            MemoryPolicy::Trash => (self.cursor, false),
        };
        let offsets = footprints
            .iter()
            .map(|f| {
                let o = at;
                at += f;
                o
            })
            .collect();
        if policy == MemoryPolicy::Trash {
            self.cursor = at;
        }
        Ok(Placement { offsets, wrapped })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incache_packs_from_zero() {
        let mut a = ArenaState::new(1 << 20);
        a.cursor = 4096;
        let p = a.place(&[512, 512], MemoryPolicy::InCache).unwrap();
        assert_eq!(p.offsets, [0, 512]);
        assert_eq!(a.cursor, 4096);
        let q = a.place(&[512, 512], MemoryPolicy::InCache).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn trash_wraps_when_full() {
        let cap = 1 << 16;
        let mut a = ArenaState::new(cap);
        a.cursor = cap - 100;
        let p = a.place(&[512], MemoryPolicy::Trash).unwrap();
        assert_eq!(p.offsets, [0]);
        assert!(p.wrapped);
        assert_eq!(a.generation, 1);
        assert_eq!(a.cursor, 512);
    }

    #[test]
    fn trash_advances() {
        let mut a = ArenaState::new(1 << 16);
        let p = a.place(&[100, 200], MemoryPolicy::Trash).unwrap();
        let q = a.place(&[100, 200], MemoryPolicy::Trash).unwrap();
        assert_eq!(p.offsets, [0, 100]);
        assert_eq!(q.offsets, [300, 400]);
        assert!(!q.wrapped);
    }

    #[test]
    fn oversized_operands_rejected() {
        let mut a = ArenaState::new(1000);
        assert_eq!(
            a.place(&[600, 600], MemoryPolicy::Trash).unwrap_err(),
            CapacityError {
                needed: 1200,
                capacity: 1000
            }
        );
    }
}
