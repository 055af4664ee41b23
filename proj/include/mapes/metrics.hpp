#pragma once

#include <optional>
#include <span>
#include <utility>

#include "mapes/solver.hpp"

namespace mapes {

/// Mean magnitude error between two S-response sets, with per-term
/// diagnostics. errors is example-major, then frequency, then row-major
/// port pair.
struct ErrorReport {
    double e_mean = 0.0;
    double max_error = 0.0;
    struct ArgMax {
        int example = 0;
        int i = 0;
        int j = 0;
        int freq_index = 0;
        double freq_hz = 0.0;
    } argmax;
    int n_examples = 0;
    int k = 0;
    int n_freq = 0;
    std::vector<double> per_example_mean;
    std::vector<double> errors;

    double error_at(int example, int freq, int i, int j) const {
        return errors[((static_cast<size_t>(example) * n_freq + freq) * k + i) *
                          k + j];
    }

    nlohmann::json to_json() const;
    static ErrorReport from_json(const nlohmann::json& j);
};

/// E_mean = mean over examples, port pairs, frequencies of |S_ref - S_test|.
/// Both sets must be in S representation with matching shapes. An optional
/// port-pair mask restricts the average to the listed (i, j) pairs.
ErrorReport mean_error(
    std::span<const NetworkResponse> ref, std::span<const NetworkResponse> test,
    const std::optional<std::vector<std::pair<int, int>>>& port_mask =
        std::nullopt);

/// Renders an ErrorReport as a fixed-order text table.
std::string render_report(const ErrorReport& report);

}  // namespace mapes
