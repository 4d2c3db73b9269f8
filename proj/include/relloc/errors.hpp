#pragma once

#include <stdexcept>
#include <string>

namespace relloc {

// Error categories surfaced by the library. Each maps to one failure mode of
// the public API so callers (and tests) can branch on the cause.
enum class Errc {
  invalid_timing,        // responder time exceeds round-trip time
  degenerate_basis,      // base-pair distance too small to trilaterate against
  degenerate_input,      // fewer than two distinct points for alignment
  degenerate_reference,  // reference nodes coincide during frame transfer
  length_mismatch,       // paired point lists of different lengths
  too_few_nodes,         // fewer than three nodes in a range table
  insufficient_layouts,  // fusion needs at least two layouts
  too_few_layouts,       // removal/pruning would leave too few layouts
  coincident_points,     // gradient singularity at zero separation
  non_finite_loss,       // optimizer diverged (line search disabled)
  arena_too_small,       // cannot place nodes with the minimum separation
  config_invalid,        // malformed scenario or parameter input
  coverage_gap,          // decisions do not cover the timestamp x node grid
  timestamp_mismatch,    // estimated and ground-truth timelines differ
  io_error,              // unreadable or malformed file
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace relloc
