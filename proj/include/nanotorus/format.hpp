#pragma once

#include <string>

namespace nanotorus {

/// Shortest decimal text that round-trips to the same double. Locale
/// independent, so CSV output is byte-stable. Negative zero prints as 0.
std::string format_double(double value);

}  // namespace nanotorus
