use chrono::{DateTime, Utc};

pub(crate) const DAY_SECS: i64 = 86_400;

/// Midnight UTC of the day containing `ts`.
pub(crate) fn floor_to_day(ts: i64) -> i64 {
    ts.div_euclid(DAY_SECS) * DAY_SECS
}

pub(crate) fn iso8601(ts: i64) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|d| d.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| ts.to_string())
}

pub(crate) fn compact_date(ts: i64) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|d| d.format("%Y%m%d").to_string())
        .unwrap_or_else(|| ts.to_string())
}

pub(crate) fn parse_iso8601(s: &str) -> Option<i64> {
    DateTime::parse_from_rfc3339(s).ok().map(|d| d.timestamp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn day_floor_and_formatting() {
        // 2010-01-04T13:20:00Z
        let ts = 1_262_563_200 + 13 * 3600 + 20 * 60;
        assert_eq!(floor_to_day(ts), 1_262_563_200);
        assert_eq!(iso8601(1_262_563_200), "2010-01-04T00:00:00Z");
        assert_eq!(compact_date(ts), "20100104");
        assert_eq!(parse_iso8601("2010-01-04T00:00:00Z"), Some(1_262_563_200));
    }
}
