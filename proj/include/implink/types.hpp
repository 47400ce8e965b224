#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace implink {

// Dense node index into a FollowNetwork (0..node_count-1).
using node_t = std::uint32_t;
// External user / tweet identifier as it appears in input files.
using ext_id_t = std::uint64_t;
// Hop count from a cascade source. unreachable_hops marks "no follow path";
// it is a sentinel, never a large finite distance.
using hop_t = std::int32_t;

inline constexpr node_t invalid_node = std::numeric_limits<node_t>::max();
inline constexpr hop_t unreachable_hops = -1;

// Bad CLI flags, impossible option combinations, missing input paths.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input record. Message carries source name and 1-based line number.
struct parse_error : std::runtime_error {
    parse_error(const std::string& source, std::size_t line, const std::string& detail)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + detail),
          line_number(line) {}
    std::size_t line_number;
};

// An analysis was invoked on inputs that violate its stated preconditions
// (constant response, rank-deficient design, empty cascade set, ...).
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace implink
