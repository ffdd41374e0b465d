use crate::config::ChannelSet;
use crate::error::{Error, Result};
use crate::intervals::Interval;
use crate::schedule::ListeningSchedule;

/// Optimal schedule for two-interval sets `{b1, b2}`, `b1 < b2`.
///
/// Channel `j` (1-based) covers `[(j-1)·b1 + 1, j·b1]` and then, in reverse
/// channel order, a block of `b2 - b1` slots:
/// `[m·b1 + (m-j)(b2-b1) + 1, m·b1 + (m-j+1)(b2-b1)]`.
pub fn opt_b2(b1: Interval, b2: Interval, channels: ChannelSet) -> Result<ListeningSchedule> {
    if b1 == 0 || b1 >= b2 {
        return Err(Error::InvalidArgument(format!(
            "two-interval schedule needs 0 < b1 < b2, got b1={b1}, b2={b2}"
        )));
    }
    let m = channels.count() as u64;
    let gap = b2 - b1;
    let mut s = ListeningSchedule::new();
    for j in 1..=m {
        let c = (j - 1) as usize;
        for t in (j - 1) * b1 + 1..=j * b1 {
            s.scan(t, c)?;
        }
        let start = m * b1 + (m - j) * gap;
        for t in start + 1..=start + gap {
            s.scan(t, c)?;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::BeaconIntervalSet;
    use crate::metrics::{emdt, is_complete, is_recursive, makespan};
    use crate::rational::Rational;

    #[test]
    fn examples() {
        let ch2 = ChannelSet::new(2).unwrap();
        let s = opt_b2(1, 2, ch2).unwrap();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(1, 0), (2, 1), (3, 1), (4, 0)]);
        let b = BeaconIntervalSet::classify(&[1, 2]).unwrap();
        assert_eq!(emdt(&s, &b, ch2).unwrap(), Rational::from_integer(2));

        let s = opt_b2(2, 3, ch2).unwrap();
        assert_eq!(
            s.iter().collect::<Vec<_>>(),
            vec![(1, 0), (2, 0), (3, 1), (4, 1), (5, 1), (6, 0)]
        );
        let b = BeaconIntervalSet::classify(&[2, 3]).unwrap();
        assert!(is_complete(&s, &b, ch2));
        assert_eq!(makespan(&s, &b, ch2).unwrap(), 6);

        let s = opt_b2(3, 7, ChannelSet::new(1).unwrap()).unwrap();
        assert_eq!(s.iter().map(|(t, _)| t).collect::<Vec<_>>(), (1..=7).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_unordered() {
        let ch = ChannelSet::new(2).unwrap();
        assert!(opt_b2(3, 3, ch).is_err());
        assert!(opt_b2(4, 3, ch).is_err());
        assert!(opt_b2(0, 3, ch).is_err());
    }

    #[test]
    fn recursive_for_small_pairs() {
        for b2 in 2..=9 {
            for b1 in 1..b2 {
                for m in 1..=4 {
                    let ch = ChannelSet::new(m).unwrap();
                    let set = BeaconIntervalSet::classify(&[b1, b2]).unwrap();
                    assert!(is_recursive(&opt_b2(b1, b2, ch).unwrap(), &set, ch), "{b1},{b2},{m}");
                }
            }
        }
    }
}
