use crate::basis::MethodKind;

/// Leading-order flop count of one elementwise operator application with
/// `n` functions per direction.
pub fn op_count(kind: MethodKind, n: u64) -> u64 {
    match kind {
        MethodKind::SG | MethodKind::IG => 112 * n.pow(6),
        MethodKind::SC | MethodKind::IC => 28 * n.pow(4),
        MethodKind::CC => 16 * n.pow(4),
        MethodKind::CG | MethodKind::LG => 20 * n.pow(6),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert_eq!(op_count(MethodKind::SG, 2), 7168);
        assert_eq!(op_count(MethodKind::CC, 3), 1296);
        assert_eq!(op_count(MethodKind::LG, 1), 20);
        assert_eq!(op_count(MethodKind::IC, 2), 448);
    }
}
