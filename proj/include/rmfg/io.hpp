#pragma once

#include <string>

namespace rmfg {

// 12 significant digits, locale independent
std::string fmt(double v);
std::string csv_quote(const std::string& s);

}  // namespace rmfg
