#pragma once

// Name-based construction of the built-in maps and families, shared by the
// CLI and the test fixtures.

#include <string>
#include <vector>

#include "snapback/example2d.hpp"
#include "snapback/map.hpp"

namespace snapback {

inline MapDefinition make_builtin(const std::string& name, const std::vector<double>& params) {
    auto want = [&](size_t n) {
        if (params.size() != n)
            throw map_error("map '" + name + "' expects " + std::to_string(n) +
                            " parameter(s), got " + std::to_string(params.size()));
    };
    if (name == "logistic") {
        want(1);
        return make_logistic(params[0]);
    }
    if (name == "doubling") {
        want(0);
        return make_doubling();
    }
    if (name == "fold_normal") {
        want(1);
        return make_fold_normal(static_cast<int>(params[0]));
    }
    if (name == "example2d") {
        want(1);
        return Example2DConfig{}.map_at(params[0]);
    }
    throw map_error("unknown map '" + name + "'");
}

inline ParametricFamily make_builtin_family(const std::string& name) {
    if (name == "logistic") return make_logistic_family();
    if (name == "example2d") return Example2DConfig{}.family();
    throw map_error("unknown family '" + name + "'");
}

}  // namespace snapback
