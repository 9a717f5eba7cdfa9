#pragma once

#include <string>

namespace exex {

/// Render a double with 12 significant digits (printf %.12g). All numeric
/// text artifacts (CSV, XYZ) go through this so reruns are byte-identical.
std::string fmt_g12(double x);

}  // namespace exex
