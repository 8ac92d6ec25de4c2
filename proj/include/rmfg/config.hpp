#pragma once

#include <cstddef>
#include <istream>
#include <string>

#include "rmfg/model.hpp"

namespace rmfg {

struct ProblemConfig {
    ModelKind model = ModelKind::extraction;
    CaseStudyParams params;
    double x_min_rel = 1e-8;
    double tol_root = 1e-10;
    std::size_t pia_inner = 50;
    std::size_t pia_outer = 200;
};

// line-oriented `key = value`; '#' starts a comment; unknown keys throw ConfigError
ProblemConfig parse_config(std::istream& in, const std::string& origin = "<config>");
ProblemConfig load_config(const std::string& path);

// `custom` has no file representation and is rejected here
ProblemSpec build_spec(const ProblemConfig& cfg);

}  // namespace rmfg
