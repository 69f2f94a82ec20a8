#pragma once

#include <string>

#include "otselect/loopsim.hpp"
#include "otselect/metrics.hpp"
#include "otselect/selection.hpp"

namespace otselect {

// Serializers with a fixed key order and floats printed with 17
// significant digits, so identical results give identical bytes.
std::string to_json(const SelectionResult& r);
std::string to_json(const SubsetReport& r);
std::string to_json(const LoopReport& r);
std::string to_csv(const LoopReport& r);

std::string format_double(double x);

}  // namespace otselect
