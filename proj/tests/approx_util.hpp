#pragma once

#include "doctest.h"

// Strictly relative comparison.  doctest's Approx adds a scale-1.0 absolute
// term that swamps quantities far below 1 (variances in m^2, positions in
// meters), so every check against a small-magnitude value goes through here.
inline doctest::Approx approx_rel(double value, double eps) {
    return doctest::Approx(value).epsilon(eps).scale(0.0);
}
