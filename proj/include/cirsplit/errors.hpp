#pragma once

#include <stdexcept>
#include <string>

namespace cirsplit {

/// Invalid wiring between networks, parameters, grids or schemes.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A propensity depends on its own species beyond first order, so the
/// componentwise square-root decomposition does not exist.
class not_conditionally_cir : public std::runtime_error {
public:
    explicit not_conditionally_cir(const std::string& what) : std::runtime_error(what) {}
};

/// Linear-algebra failure that survived jitter regularization.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cirsplit
