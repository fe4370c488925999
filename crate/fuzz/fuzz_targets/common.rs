#![allow(dead_code)]

use std::sync::Arc;

use ipm_core::wire::parse_space;
use ipm_core::FiniteMetricSpace;

pub fn abc() -> Arc<FiniteMetricSpace> {
    Arc::new(
        parse_space(r#"{"points":[{"id":"a","coords":[0.0]},{"id":"b","coords":[1.0]},{"id":"c","coords":[2.0]}]}"#)
            .unwrap(),
    )
}

pub fn pq() -> Arc<FiniteMetricSpace> {
    Arc::new(parse_space(r#"{"points":[{"id":"p","coords":[0.0,0.0]},{"id":"q","coords":[0.0,1.0]}]}"#).unwrap())
}
