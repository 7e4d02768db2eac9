#include "dito/scheduler.hpp"

#include <algorithm>

namespace dito {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> assign_steps(
    const std::vector<std::size_t>& delta_max, std::size_t num_steps) {
    if (num_steps < 1) {
        throw config_error("assign_steps: need at least one step");
    }
    if (delta_max.size() < num_steps) {
        throw config_error("assign_steps: delta_max must cover every step");
    }
    std::vector<std::size_t> pre_match{0};
    std::vector<std::size_t> reduce;
    std::size_t m = 0;  // most recent match step
    for (std::size_t t = 1; t < num_steps; ++t) {
        bool is_match;
        if (t + 1 < num_steps) {
            // Would the next step still be able to reuse m's matching?
            is_match = (t + 1) - m > delta_max[t + 1];
        } else {
            is_match = t - m > delta_max[t];
        }
        if (is_match) {
            pre_match.push_back(t);
            m = t;
        } else {
            reduce.push_back(t);
        }
    }
    return {pre_match, reduce};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> collapse_consecutive(
    const std::vector<std::size_t>& pre_match) {
    if (!std::is_sorted(pre_match.begin(), pre_match.end()) ||
        std::adjacent_find(pre_match.begin(), pre_match.end()) != pre_match.end()) {
        throw internal_error("collapse_consecutive: input not strictly ascending");
    }
    std::vector<std::size_t> match;
    std::vector<std::size_t> full;
    for (std::size_t i = 0; i < pre_match.size(); ++i) {
        const bool has_successor =
            i + 1 < pre_match.size() && pre_match[i + 1] == pre_match[i] + 1;
        (has_successor ? full : match).push_back(pre_match[i]);
    }
    return {match, full};
}

Schedule build_schedule(const MaxIntervals& intervals, std::size_t num_steps) {
    const auto [pre_match, reduce] = assign_steps(intervals.delta_max, num_steps);
    const auto [match, full] = collapse_consecutive(pre_match);
    Schedule s;
    s.match_steps = match;
    s.reduce_steps = reduce;
    s.full_steps = full;
    s.num_steps = num_steps;
    s.tau = intervals.tau;
    s.delta_max.assign(intervals.delta_max.begin(),
                       intervals.delta_max.begin() + num_steps);
    return s;
}

std::vector<std::string> validate_schedule(const Schedule& s,
                                           const std::vector<std::size_t>& delta_max) {
    std::vector<std::string> violations;
    const std::size_t T = s.num_steps;

    std::vector<int> role_count(T, 0);
    auto count_roles = [&](const std::vector<std::size_t>& steps) {
        for (const std::size_t t : steps) {
            if (t >= T) {
                violations.push_back("coverage: step " + std::to_string(t) + " out of range");
            } else {
                ++role_count[t];
            }
        }
    };
    count_roles(s.match_steps);
    count_roles(s.reduce_steps);
    count_roles(s.full_steps);
    for (std::size_t t = 0; t < T; ++t) {
        if (role_count[t] != 1) {
            violations.push_back("coverage: step " + std::to_string(t) + " has " +
                                 std::to_string(role_count[t]) + " roles");
        }
    }

    for (std::size_t i = 0; i + 1 < s.match_steps.size(); ++i) {
        if (s.match_steps[i + 1] == s.match_steps[i] + 1) {
            violations.push_back("consecutive match steps at " +
                                 std::to_string(s.match_steps[i]));
        }
    }

    for (const std::size_t t : s.reduce_steps) {
        std::size_t m = T;  // governing match step, if any
        for (const std::size_t c : s.match_steps) {
            if (c < t && (m == T || c > m)) m = c;
        }
        if (m == T) {
            violations.push_back("reduce step " + std::to_string(t) + " has no prior match");
            continue;
        }
        const std::size_t gap = t - m;
        const std::size_t bound = t < delta_max.size() ? delta_max[t] : 0;
        if (gap > bound && gap > 1) {
            violations.push_back("reduce step " + std::to_string(t) + " is " +
                                 std::to_string(gap) + " past its match, bound " +
                                 std::to_string(bound));
        }
    }
    return violations;
}

}  // namespace dito
