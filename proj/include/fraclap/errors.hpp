#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameter combinations (dimension, grid size, exponent, flags).
struct config_error : error {
    using error::error;
};

// Geometry that does not fit the unit cube (disc not contained, wrong dimension).
struct geometry_error : error {
    using error::error;
};

// Malformed or mismatched files (kernel cache, masks, grids, images).
struct format_error : error {
    using error::error;
};

// Shape mismatches between grid objects at call boundaries.
struct shape_error : error {
    using error::error;
};

// NaN/Inf encountered where the algorithm cannot continue.
struct numerical_error : error {
    using error::error;
};

} // namespace fraclap
