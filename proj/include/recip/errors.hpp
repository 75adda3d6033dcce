#pragma once

#include <stdexcept>
#include <string>

namespace recip {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct precision_exhausted : error {
    using error::error;
};
struct integrality_failure : error {
    using error::error;
};
struct non_invertible : error {
    using error::error;
};
struct window_overflow : error {
    using error::error;
};
struct spec_mismatch : error {
    using error::error;
};
struct not_a_one_unit : error {
    using error::error;
};
struct not_strict : error {
    using error::error;
};
struct nonzero_constant_term : error {
    using error::error;
};
struct not_a_submodule : error {
    using error::error;
};
struct height_undetectable : error {
    using error::error;
};
struct cap_instability : error {
    using error::error;
};
struct shadow_classification_failure : error {
    using error::error;
};
struct parse_error : error {
    parse_error(const std::string& msg, size_t position) : error(msg), pos(position) {}
    size_t pos;
};
struct divisor_not_unit : error {
    using error::error;
};

} // namespace recip
