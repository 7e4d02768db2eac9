#pragma once

#include <string>
#include <vector>

#include "dito/error.hpp"
#include "dito/pmr.hpp"

namespace dito {

// Assignment of every timestep to exactly one role. match steps run dense and
// store fresh pair sets; reduce steps reuse them; full steps run dense with no
// matching bookkeeping (they are match steps whose results would have been
// overwritten immediately, see collapse_consecutive).
struct Schedule {
    std::vector<std::size_t> match_steps;
    std::vector<std::size_t> reduce_steps;
    std::vector<std::size_t> full_steps;
    std::size_t num_steps = 0;
    double tau = 0.0;
    std::vector<std::size_t> delta_max;  // provenance: the intervals scheduled against

    bool operator==(const Schedule& other) const = default;
};

// One-step look-ahead assignment. Step 0 always matches; step t >= 1 matches
// exactly when the next step's distance to the last match would exceed the
// next step's max interval. The final step, which has no successor to guard,
// reduces when its own distance fits its own bound.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> assign_steps(
    const std::vector<std::size_t>& delta_max, std::size_t num_steps);

// Within each run of consecutive match steps only the last survives; earlier
// ones become full steps (their pair sets would be overwritten before use).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> collapse_consecutive(
    const std::vector<std::size_t>& pre_match);

Schedule build_schedule(const MaxIntervals& intervals, std::size_t num_steps);

// Empty when the schedule is well-formed: roles partition 0..T-1, no two
// consecutive match steps, and every reduce step sits within reach of its
// governing match step. The look-ahead rule decides step t by the bound at
// t+1, which legitimately leaves gaps of exactly 1 above a zero bound, so the
// reach check allows a one-step floor.
std::vector<std::string> validate_schedule(const Schedule& s,
                                           const std::vector<std::size_t>& delta_max);

}  // namespace dito
