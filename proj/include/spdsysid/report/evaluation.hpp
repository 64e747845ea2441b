#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spdsysid/data/csv.hpp"
#include "spdsysid/data/trajectory.hpp"
#include "spdsysid/errors.hpp"
#include "spdsysid/linalg/symmetric.hpp"
#include "spdsysid/model/state_space.hpp"
#include "spdsysid/sysid/fit.hpp"

namespace spdsysid::report {

/// Per-state MSE (K²) of a free-running rollout from the trajectory's first state, over steps 1..N.
inline std::vector<double> evaluate(const model::DiscreteLti& model, const Trajectory& traj) {
    if (model.state_dim() != traj.state_dim()) throw DimensionMismatch("model and trajectory dimensions differ");
    if (traj.length() == 0) throw DimensionMismatch("evaluation needs at least one transition");
    const Trajectory pred = model::simulate(model, traj.state(0), traj.forcing);
    std::vector<double> mse(traj.state_dim(), 0.0);
    for (std::size_t t = 1; t < traj.states.rows(); ++t)
        for (std::size_t j = 0; j < mse.size(); ++j) {
            const double e = pred.states(t, j) - traj.states(t, j);
            mse[j] += e * e;
        }
    for (double& m : mse) m /= static_cast<double>(traj.length());
    return mse;
}

struct EigenReport {
    bool symmetric = false;
    /// Descending eigenvalues and orthonormal eigenvectors; empty unless symmetric.
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
    double spectral_radius = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    bool spd = false;
    bool stable = false;  // spectral radius < 1
};

namespace detail {

/// ρ(M) = lim ‖M^k‖^{1/k}, evaluated by repeated normalized squaring.
inline double spectral_radius_general(const Matrix& m) {
    Matrix p = m;
    double log_scale = 0.0;  // log of the factor removed so far, per unit power
    double power = 1.0;
    for (int k = 0; k < 40; ++k) {
        const double norm = p.frobenius_norm();
        if (norm == 0.0) return 0.0;
        p *= 1.0 / norm;
        log_scale += std::log(norm) / power;
        p = p * p;
        power *= 2.0;
    }
    return std::exp(log_scale + std::log(std::max(p.frobenius_norm(), 1e-300)) / power);
}

}  // namespace detail

/// Eigenstructure of Φ_A in the model's working (canonical) coordinates.
inline EigenReport eigen_report(const model::DiscreteLti& model) {
    const Matrix& a = model.phi_a;
    if (!a.is_square() || a.rows() == 0) throw DimensionMismatch("phi_a must be square");
    EigenReport r;
    r.symmetric = a.is_symmetric();
    if (r.symmetric) {
        const auto eig = eig_sym(SymmetricMatrix(a));
        r.eigenvalues = eig.values;
        r.eigenvectors = eig.vectors;
        r.min_eigenvalue = eig.values.back();
        r.spectral_radius = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
        r.spd = SpdMatrix::try_make(a).has_value();
    } else {
        r.spectral_radius = detail::spectral_radius_general(a);
    }
    r.stable = r.spectral_radius < 1.0;
    return r;
}

struct ConvergenceRow {
    std::string method;
    std::vector<std::uint64_t> seeds;
    std::vector<std::optional<std::size_t>> epochs;  // per seed, none if never reached
    std::optional<double> median;                    // none if the median run never reached it
};

/**
 * @brief Epochs each run needed to reach `threshold`, grouped by method.
 *
 * Runs that never reach the threshold count as infinitely slow in the median.
 * @throws EmptyInput on an empty result list.
 */
inline std::vector<ConvergenceRow> compare_convergence(const std::vector<sysid::FitResult>& results, double threshold) {
    if (results.empty()) throw EmptyInput("no fit results to compare");
    std::vector<ConvergenceRow> rows;
    for (const auto& r : results) {
        const std::string name(sysid::to_string(r.method));
        auto it = std::find_if(rows.begin(), rows.end(), [&](const ConvergenceRow& row) { return row.method == name; });
        if (it == rows.end()) {
            rows.push_back({name, {}, {}, std::nullopt});
            it = rows.end() - 1;
        }
        it->seeds.push_back(r.seed);
        it->epochs.push_back(sysid::epochs_to_reach(r.initial_loss, r.loss_trace, threshold));
    }
    constexpr double never = std::numeric_limits<double>::infinity();
    for (auto& row : rows) {
        std::vector<double> v;
        for (const auto& e : row.epochs) v.push_back(e ? static_cast<double>(*e) : never);
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const double med = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        if (std::isfinite(med)) row.median = med;
    }
    return rows;
}

/// MSE table: one row per model, one column per (state, dataset) pair.
struct EvalTable {
    std::vector<std::string> columns;
    struct Row {
        std::string label;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::map<std::string, std::string> metadata;

    void add_row(std::string label, std::vector<double> values) {
        if (values.size() != columns.size()) throw DimensionMismatch("row width does not match the table columns");
        for (double v : values)
            if (!(v >= 0.0)) throw InvalidArgument("MSE entries must be non-negative");
        rows.push_back({std::move(label), std::move(values)});
    }

    [[nodiscard]] double at(const std::string& row, const std::string& col) const {
        const auto c = std::find(columns.begin(), columns.end(), col);
        if (c == columns.end()) throw InvalidArgument("unknown column '" + col + "'");
        for (const auto& r : rows)
            if (r.label == row) return r.values[static_cast<std::size_t>(c - columns.begin())];
        throw InvalidArgument("unknown row '" + row + "'");
    }

    void write_csv(std::ostream& out) const {
        data::csv::write_metadata(out, metadata);
        out << "model";
        for (const auto& c : columns) out << ',' << c;
        out << '\n';
        for (const auto& r : rows) {
            out << r.label;
            for (double v : r.values) out << ',' << data::csv::format_double(v);
            out << '\n';
        }
    }

    void write_text(std::ostream& out) const {
        std::size_t label_w = 5;
        for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
        std::vector<std::size_t> widths;
        for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 10));
        out << std::left << std::setw(static_cast<int>(label_w)) << "model";
        for (std::size_t k = 0; k < columns.size(); ++k)
            out << "  " << std::right << std::setw(static_cast<int>(widths[k])) << columns[k];
        out << '\n';
        for (const auto& r : rows) {
            out << std::left << std::setw(static_cast<int>(label_w)) << r.label;
            for (std::size_t k = 0; k < r.values.size(); ++k) {
                std::ostringstream cell;
                cell << std::scientific << std::setprecision(2) << r.values[k];
                out << "  " << std::right << std::setw(static_cast<int>(widths[k])) << cell.str();
            }
            out << '\n';
        }
    }
};

/// `hour,actual,predicted` for one state of a rollout against measurements.
inline void write_prediction_csv(std::ostream& out, const Trajectory& actual, const Trajectory& predicted,
                                 std::size_t state, const data::csv::Metadata& meta = {}) {
    if (actual.states.rows() != predicted.states.rows() || state >= actual.state_dim() ||
        state >= predicted.state_dim()) {
        throw DimensionMismatch("actual and predicted series do not line up");
    }
    data::csv::write_metadata(out, meta);
    out << "hour,actual,predicted\n";
    for (std::size_t t = 0; t < actual.states.rows(); ++t) {
        out << actual.forcing.hour(t) << ',' << data::csv::format_double(actual.states(t, state)) << ','
            << data::csv::format_double(predicted.states(t, state)) << '\n';
    }
}

}  // namespace spdsysid::report
