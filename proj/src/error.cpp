#include "glt/error.hpp"

namespace glt {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::malformed_csv: return "malformed csv";
        case Errc::negative_speed: return "negative speed";
        case Errc::too_short: return "series too short";
        case Errc::bad_interval: return "bad interval";
        case Errc::bad_fractions: return "bad fractions";
        case Errc::bad_shape: return "bad shape";
        case Errc::bad_scale: return "bad scale";
        case Errc::bad_k: return "bad hop count";
        case Errc::non_symmetric: return "non-symmetric matrix";
        case Errc::not_divisible_by_three: return "steps per day not divisible by three";
        case Errc::bad_gamma: return "bad gamma";
        case Errc::shape_mismatch: return "shape mismatch";
        case Errc::bad_params: return "bad parameters";
        case Errc::bad_hop: return "bad hop index";
        case Errc::non_finite: return "non-finite value";
        case Errc::empty_batch: return "empty batch";
        case Errc::empty_dataset: return "empty dataset";
        case Errc::all_targets_zero: return "all targets zero";
        case Errc::bad_link: return "bad link id";
        case Errc::bad_day: return "bad day index";
        case Errc::bad_horizon: return "bad horizon";
        case Errc::bad_config: return "bad config";
        case Errc::io_error: return "io error";
    }
    return "unknown error";
}

const char* error_class(Errc code) {
    switch (code) {
        case Errc::io_error:
            return "io";
        case Errc::malformed_csv:
        case Errc::bad_config:
            return "parse";
        default:
            return "contract";
    }
}

}  // namespace glt
