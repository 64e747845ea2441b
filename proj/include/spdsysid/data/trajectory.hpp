#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/matrix.hpp"

namespace spdsysid {

/// Hourly ambient temperature series.
struct ForcingSeries {
    std::int64_t start_hour = 0;
    std::vector<double> values;  // K

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] std::int64_t hour(std::size_t i) const noexcept {
        return start_hour + static_cast<std::int64_t>(i);
    }
    /// Mean temperature; the natural offset for a model's working frame.
    [[nodiscard]] double mean() const {
        if (values.empty()) throw EmptyInput("mean of an empty forcing series");
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
};

/**
 * @brief State sequence T_0..T_N with the aligned forcing U_0..U_{N-1}.
 *
 * `states` holds one row per time step (N+1 rows, one column per state).
 */
struct Trajectory {
    Matrix states;
    ForcingSeries forcing;
    std::vector<std::string> labels;

    Trajectory() = default;
    Trajectory(Matrix s, ForcingSeries f, std::vector<std::string> l = {})
        : states(std::move(s)), forcing(std::move(f)), labels(std::move(l)) {
        if (labels.empty()) labels = default_labels(states.cols());
        validate();
    }

    /// Number of transitions N.
    [[nodiscard]] std::size_t length() const noexcept { return forcing.size(); }
    [[nodiscard]] std::size_t state_dim() const noexcept { return states.cols(); }

    [[nodiscard]] std::vector<double> state(std::size_t t) const {
        std::vector<double> s(states.cols());
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = states(t, j);
        return s;
    }

    void validate() const {
        if (states.rows() != forcing.size() + 1) {
            throw DimensionMismatch("trajectory needs exactly one more state than forcing samples");
        }
        if (labels.size() != states.cols()) throw DimensionMismatch("one label per state column required");
        if (!states.all_finite()) throw InvalidArgument("trajectory states must be finite");
        for (double u : forcing.values)
            if (!std::isfinite(u)) throw InvalidArgument("forcing values must be finite");
    }

    /// Transitions [begin, end) as a trajectory with states begin..end.
    [[nodiscard]] Trajectory slice(std::size_t begin, std::size_t end) const {
        if (begin > end || end > length()) throw InvalidArgument("trajectory slice out of range");
        ForcingSeries f{forcing.hour(begin),
                        {forcing.values.begin() + static_cast<std::ptrdiff_t>(begin),
                         forcing.values.begin() + static_cast<std::ptrdiff_t>(end)}};
        return {states.block(begin, 0, end - begin + 1, states.cols()), std::move(f), labels};
    }

    static std::vector<std::string> default_labels(std::size_t n) {
        std::vector<std::string> l;
        for (std::size_t i = 0; i < n; ++i) l.push_back("T_ext" + std::to_string(i + 1));
        return l;
    }
};

}  // namespace spdsysid
