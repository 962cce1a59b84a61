#pragma once

#include <stdexcept>
#include <string>

namespace glt {

// Error codes, one per contract violation the library can detect.
enum class Errc {
    malformed_csv,
    negative_speed,
    too_short,
    bad_interval,
    bad_fractions,
    bad_shape,
    bad_scale,
    bad_k,
    non_symmetric,
    not_divisible_by_three,
    bad_gamma,
    shape_mismatch,
    bad_params,
    bad_hop,
    non_finite,
    empty_batch,
    empty_dataset,
    all_targets_zero,
    bad_link,
    bad_day,
    bad_horizon,
    bad_config,
    io_error,
};

const char* to_string(Errc code);

// Diagnostic class used by the CLI front-end: io, parse or contract.
const char* error_class(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool ok, Errc code, const std::string& message) {
    if (!ok) fail(code, message);
}

}  // namespace glt
