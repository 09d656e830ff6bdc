#include "hesspec/error.hpp"

#include <cstdio>

namespace hesspec {

namespace {

std::string pole_message(std::size_t node, double g, std::complex<double> delta) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "1 + g*delta ~ 0 at node %zu (g = %.6g, delta = %.6g%+.6gi)",
                  node, g, delta.real(), delta.imag());
    return buf;
}

}  // namespace

PoleError::PoleError(std::size_t node, double g, std::complex<double> delta)
    : NumericError(pole_message(node, g, delta)), node_(node), g_(g), delta_(delta) {}

}  // namespace hesspec
