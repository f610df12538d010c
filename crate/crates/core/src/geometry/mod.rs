//! Dyadic intervals and Whitney pairs on `[1, 2]`, rectangles around arcs of
//! scaled curves, and intersections of tubular neighbourhoods of such arcs.

mod bounds;
mod dyadic;
mod rect;
mod tubes;

pub use bounds::{bounding_rect, bounding_rect_with, ArcRect, DEFAULT_RECT_CONSTANT, RECT_SAMPLES};
pub use dyadic::{whitney_cover_check, whitney_pairs, CoverReport, DyadicInterval, Interval, WhitneyPair, MAX_GENERATION};
pub use rect::RotRect;
pub use tubes::{
    meeting_shift, tube_intersection_area, tube_intersection_areas, w_bound_scan, whitney_tube_intervals,
    TubeIntersection, TubeParams, WScan, MIN_MC_SAMPLES,
};
