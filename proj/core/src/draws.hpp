#pragma once

#include <cstdint>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>

#include "hesspec/rng.hpp"

namespace hesspec::detail {

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Philox4x32& rng) {
    const std::uint64_t a = rng() >> 5;
    const std::uint64_t b = rng() >> 6;
    return (static_cast<double>(a) * 67108864.0 + static_cast<double>(b)) *
           (1.0 / 9007199254740992.0);
}

inline double standard_normal(Philox4x32& rng) {
    boost::random::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

inline double rademacher(Philox4x32& rng) { return (rng() & 1u) ? 1.0 : -1.0; }

inline double student_t(Philox4x32& rng, double dof) {
    boost::random::student_t_distribution<double> dist(dof);
    return dist(rng);
}

}  // namespace hesspec::detail
