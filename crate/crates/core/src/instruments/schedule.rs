use crate::error::{Error, Result};

/// Accrual period: fixing at `reset`, payment at `pay`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    pub reset: f64,
    pub pay: f64,
    pub accrual: f64,
}

/// Regular schedule with `freq` payments a year covering `[start, maturity]`.
pub fn build_schedule(start: f64, maturity: f64, freq: u32) -> Result<Vec<Period>> {
    if freq == 0 || !(maturity > start) {
        return Err(Error::InvalidTenor(format!(
            "[{start}, {maturity}] at {freq} payments a year"
        )));
    }
    let periods = (maturity - start) * freq as f64;
    let count = periods.round();
    if (periods - count).abs() > 1e-9 || count < 1.0 {
        return Err(Error::InvalidTenor(format!(
            "{} years is not a whole number of 1/{freq}-year periods",
            maturity - start
        )));
    }
    let accrual = 1.0 / freq as f64;
    let count = count as usize;
    Ok((0..count)
        .map(|k| {
            let reset = start + k as f64 * accrual;
            let pay = if k + 1 == count {
                maturity
            } else {
                start + (k + 1) as f64 * accrual
            };
            Period { reset, pay, accrual }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semiannual_one_year() {
        let s = build_schedule(0.0, 1.0, 2).unwrap();
        assert_eq!(
            s,
            vec![
                Period {
                    reset: 0.0,
                    pay: 0.5,
                    accrual: 0.5
                },
                Period {
                    reset: 0.5,
                    pay: 1.0,
                    accrual: 0.5
                },
            ]
        );
    }

    #[test]
    fn quarterly_ten_years() {
        let s = build_schedule(0.0, 10.0, 4).unwrap();
        assert_eq!(s.len(), 40);
        assert_eq!(s.last().unwrap().pay, 10.0);
    }

    #[test]
    fn odd_tenor_is_rejected() {
        assert!(matches!(build_schedule(0.0, 0.3, 4), Err(Error::InvalidTenor(_))));
        assert!(build_schedule(1.0, 1.0, 4).is_err());
    }

    proptest::proptest! {
        #[test]
        fn schedule_tiles_the_tenor(freq in proptest::sample::select(vec![1u32, 2, 4, 12]), periods in 1usize..120, start_periods in 0usize..8) {
            let acc = 1.0 / freq as f64;
            let start = start_periods as f64 * acc;
            let maturity = start + periods as f64 * acc;
            let s = build_schedule(start, maturity, freq).unwrap();
            proptest::prop_assert_eq!(s.len(), periods);
            proptest::prop_assert!((s[0].reset - start).abs() < 1e-12);
            proptest::prop_assert_eq!(s.last().unwrap().pay, maturity);
            for w in s.windows(2) {
                proptest::prop_assert!((w[1].reset - w[0].pay).abs() < 1e-12);
            }
            let total: f64 = s.iter().map(|p| p.accrual).sum();
            proptest::prop_assert!((total - (maturity - start)).abs() < 1e-9);
        }
    }
}
