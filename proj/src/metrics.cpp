#include "mapes/metrics.hpp"

#include <cmath>
#include <sstream>

namespace mapes {

ErrorReport mean_error(
    std::span<const NetworkResponse> ref, std::span<const NetworkResponse> test,
    const std::optional<std::vector<std::pair<int, int>>>& port_mask) {
    if (ref.size() != test.size())
        throw ShapeMismatch("response lists have different lengths");
    if (ref.empty()) throw ShapeMismatch("empty response lists");

    ErrorReport rep;
    rep.n_examples = static_cast<int>(ref.size());
    rep.k = ref[0].k();
    rep.n_freq = static_cast<int>(ref[0].freqs.size());
    rep.errors.reserve(static_cast<size_t>(rep.n_examples) * rep.n_freq *
                       rep.k * rep.k);
    if (port_mask)
        for (const auto& pr : *port_mask)
            if (pr.first < 0 || pr.first >= rep.k || pr.second < 0 ||
                pr.second >= rep.k)
                throw ValidationError("port-pair mask index out of range");

    double sum = 0.0;
    size_t count = 0;
    for (int ex = 0; ex < rep.n_examples; ++ex) {
        const auto& a = ref[ex];
        const auto& b = test[ex];
        if (a.rep != Representation::S || b.rep != Representation::S)
            throw RepresentationMismatch(
                "mean error is defined on S responses");
        if (a.k() != rep.k || b.k() != rep.k ||
            static_cast<int>(a.freqs.size()) != rep.n_freq ||
            a.freqs != b.freqs)
            throw ShapeMismatch("example " + std::to_string(ex) +
                                ": K or frequency grid mismatch");
        double ex_sum = 0.0;
        size_t ex_count = 0;
        for (int f = 0; f < rep.n_freq; ++f)
            for (int i = 0; i < rep.k; ++i)
                for (int j = 0; j < rep.k; ++j) {
                    double e = std::abs(a.m[f](i, j) - b.m[f](i, j));
                    bool in_mask = true;
                    if (port_mask) {
                        in_mask = false;
                        for (const auto& pr : *port_mask)
                            if (pr.first == i && pr.second == j) {
                                in_mask = true;
                                break;
                            }
                    }
                    rep.errors.push_back(e);
                    if (!in_mask) continue;
                    ex_sum += e;
                    ++ex_count;
                    if (e > rep.max_error) {
                        rep.max_error = e;
                        rep.argmax = {ex, i, j, f, a.freqs[f]};
                    }
                }
        sum += ex_sum;
        count += ex_count;
        rep.per_example_mean.push_back(
            ex_count ? ex_sum / static_cast<double>(ex_count) : 0.0);
    }
    rep.e_mean = count ? sum / static_cast<double>(count) : 0.0;
    return rep;
}

nlohmann::json ErrorReport::to_json() const {
    nlohmann::json j;
    j["e_mean"] = e_mean;
    j["max_error"] = max_error;
    j["argmax"] = {{"example", argmax.example},
                   {"i", argmax.i},
                   {"j", argmax.j},
                   {"freq_index", argmax.freq_index},
                   {"freq_hz", argmax.freq_hz}};
    j["n_examples"] = n_examples;
    j["k"] = k;
    j["n_freq"] = n_freq;
    j["per_example"] = per_example_mean;
    j["errors"] = errors;
    return j;
}

ErrorReport ErrorReport::from_json(const nlohmann::json& j) {
    ErrorReport r;
    r.e_mean = j.at("e_mean").get<double>();
    r.max_error = j.at("max_error").get<double>();
    const auto& a = j.at("argmax");
    r.argmax = {a.at("example").get<int>(), a.at("i").get<int>(),
                a.at("j").get<int>(), a.at("freq_index").get<int>(),
                a.at("freq_hz").get<double>()};
    r.n_examples = j.at("n_examples").get<int>();
    r.k = j.at("k").get<int>();
    r.n_freq = j.at("n_freq").get<int>();
    r.per_example_mean = j.at("per_example").get<std::vector<double>>();
    r.errors = j.value("errors", std::vector<double>{});
    return r;
}

std::string render_report(const ErrorReport& report) {
    std::ostringstream os;
    os.precision(6);
    os << "examples: " << report.n_examples << "  K: " << report.k
       << "  freqs: " << report.n_freq << "\n";
    os << "e_mean:    " << std::scientific << report.e_mean << "\n";
    os << "max_error: " << report.max_error << " at example "
       << report.argmax.example << ", S(" << report.argmax.i + 1 << ","
       << report.argmax.j + 1 << "), " << report.argmax.freq_hz << " Hz\n";
    os << "per-example means:\n";
    for (size_t i = 0; i < report.per_example_mean.size(); ++i)
        os << "  [" << i << "] " << report.per_example_mean[i] << "\n";
    return os.str();
}

}  // namespace mapes
