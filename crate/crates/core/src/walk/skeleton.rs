use super::WalkError;

/// The two coordinate walks observed at their own step times.
///
/// `s1[k]` is the horizontal position after the `k`-th horizontal step,
/// `sigma[k - 1]` the time of that step; likewise `s2`/`tau` vertically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Skeleton {
    pub s1: Vec<i64>,
    pub s2: Vec<i64>,
    pub sigma: Vec<u64>,
    pub tau: Vec<u64>,
}

impl Skeleton {
    /// Number of horizontal steps `K`.
    pub fn horizontal_steps(&self) -> usize {
        self.sigma.len()
    }

    pub fn vertical_steps(&self) -> usize {
        self.tau.len()
    }

    /// `(S_1(k), S_2(l))`.
    pub fn position(&self, k: usize, l: usize) -> Option<(i64, i64)> {
        Some((*self.s1.get(k)?, *self.s2.get(l)?))
    }
}

/// Splits a step record into its horizontal and vertical skeleton walks.
pub fn extract_skeletons(steps: &[(i64, i64)]) -> Result<Skeleton, WalkError> {
    let mut sk = Skeleton {
        s1: vec![0],
        s2: vec![0],
        ..Skeleton::default()
    };
    for (i, &(dx, dy)) in steps.iter().enumerate() {
        let time = i as u64 + 1;
        match (dx, dy) {
            (1 | -1, 0) => {
                sk.s1.push(sk.s1.last().unwrap() + dx);
                sk.sigma.push(time);
            }
            (0, 1 | -1) => {
                sk.s2.push(sk.s2.last().unwrap() + dy);
                sk.tau.push(time);
            }
            _ => return Err(WalkError::NotUnitStep { index: i, dx, dy }),
        }
    }
    Ok(sk)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_enumerated_example() {
        let sk = extract_skeletons(&[(1, 0), (0, 1), (-1, 0)]).unwrap();
        assert_eq!(sk.s1, vec![0, 1, 0]);
        assert_eq!(sk.s2, vec![0, 1]);
        assert_eq!(sk.sigma, vec![1, 3]);
        assert_eq!(sk.tau, vec![2]);
        assert_eq!(sk.horizontal_steps(), 2);
        assert_eq!(sk.vertical_steps(), 1);
        assert_eq!(sk.position(2, 1), Some((0, 1)));
    }

    #[test]
    fn pure_horizontal_has_empty_vertical_skeleton() {
        let sk = extract_skeletons(&[(1, 0), (1, 0), (-1, 0)]).unwrap();
        assert_eq!(sk.s2, vec![0]);
        assert!(sk.tau.is_empty());
        assert_eq!(sk.sigma, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_non_unit_steps() {
        assert_eq!(
            extract_skeletons(&[(1, 0), (1, 1)]),
            Err(WalkError::NotUnitStep { index: 1, dx: 1, dy: 1 })
        );
        assert!(extract_skeletons(&[(0, 0)]).is_err());
        assert!(extract_skeletons(&[(2, 0)]).is_err());
    }
}
