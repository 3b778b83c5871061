// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace varorder::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;      ///< sum of |K15 - G7| over the final partition
    std::size_t intervals = 0;
};

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;  ///< also stop once the estimate is below rel_tol |value|
    std::size_t max_intervals = 20000;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate falls below max(abs_tol, rel_tol |value|). Subdivision order and summation order are
/// fixed, so results are bit-reproducible. Throws QuadratureError when the
/// interval budget is exhausted.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

/// Same as integrate() but starts from the partition given by sorted
/// breakpoints (first and last entries are the integration limits).
Result integrate(const std::function<double(double)>& f,
                 std::span<const double> breakpoints, const Options& opts = {});

/// One fixed 15-point Kronrod panel; error is |K15 - G7|.
Result kronrod15(const std::function<double(double)>& f, double a, double b);

}  // namespace varorder::quad
