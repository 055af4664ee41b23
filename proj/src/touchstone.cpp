#include "mapes/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mapes {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

double freq_unit_scale(const std::string& unit) {
    if (unit == "hz") return 1.0;
    if (unit == "khz") return 1e3;
    if (unit == "mhz") return 1e6;
    if (unit == "ghz") return 1e9;
    throw UnsupportedFormat("unknown frequency unit: " + unit);
}

}  // namespace

int touchstone_port_count(const std::string& path) {
    auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        std::string ext = lower(path.substr(dot + 1));
        if (ext.size() >= 3 && (ext.front() == 's' || ext.front() == 'z') &&
            ext.back() == 'p') {
            std::string digits = ext.substr(1, ext.size() - 2);
            if (!digits.empty() &&
                std::all_of(digits.begin(), digits.end(),
                            [](unsigned char c) { return std::isdigit(c); }))
                return std::stoi(digits);
        }
    }
    throw UnsupportedFormat(
        "cannot infer port count from extension (expected .sNp): " + path);
}

TouchstoneData read_touchstone_stream(std::istream& in, int nports) {
    TouchstoneData out;
    std::string fmt = "ma";
    std::string unit = "ghz";
    bool have_option = false;
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        auto bang = line.find('!');
        if (bang != std::string::npos) line.erase(bang);
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (tok == "#") {
            if (have_option) continue;  // v1: only the first option line counts
            have_option = true;
            std::string t;
            std::vector<std::string> opts;
            while (ss >> t) opts.push_back(lower(t));
            for (size_t i = 0; i < opts.size(); ++i) {
                const std::string& o = opts[i];
                if (o == "hz" || o == "khz" || o == "mhz" || o == "ghz")
                    unit = o;
                else if (o == "s" || o == "z")
                    out.param = static_cast<char>(std::toupper(o[0]));
                else if (o == "y" || o == "g" || o == "h")
                    throw UnsupportedFormat("unsupported parameter type: " + o);
                else if (o == "ri" || o == "ma" || o == "db")
                    fmt = o;
                else if (o == "r" && i + 1 < opts.size())
                    out.ref_ohms = std::stod(opts[++i]);
                else
                    throw UnsupportedFormat("bad option token: " + o);
            }
            continue;
        }
        ss.clear();
        ss.seekg(0);
        double v;
        while (ss >> v) values.push_back(v);
        if (!ss.eof()) {
            std::string bad;
            ss.clear();
            ss >> bad;
            throw MalformedInput("non-numeric data token: " + bad);
        }
    }

    const size_t per_freq = 1 + 2 * static_cast<size_t>(nports) * nports;
    if (values.empty() || values.size() % per_freq != 0)
        throw MalformedInput("data token count " +
                             std::to_string(values.size()) +
                             " is not a multiple of " +
                             std::to_string(per_freq) + " (for " +
                             std::to_string(nports) + " ports)");
    const size_t nfreq = values.size() / per_freq;
    const double fscale = freq_unit_scale(unit);

    double prev = -1.0;
    for (size_t f = 0; f < nfreq; ++f) {
        const double* p = values.data() + f * per_freq;
        double freq = p[0] * fscale;
        if (freq <= prev)
            throw NonIncreasingFrequencies(
                "frequencies must be strictly increasing");
        prev = freq;
        out.freqs.push_back(freq);
        Eigen::MatrixXcd m(nports, nports);
        for (int a = 0; a < nports * nports; ++a) {
            double x = p[1 + 2 * a], y = p[2 + 2 * a];
            std::complex<double> c;
            if (fmt == "ri") {
                c = {x, y};
            } else {
                double mag = fmt == "db" ? std::pow(10.0, x / 20.0) : x;
                double ph = y * std::numbers::pi / 180.0;
                c = std::polar(mag, ph);
            }
            // v1 quirk: 2-port data is ordered S11 S21 S12 S22.
            int r, s;
            if (nports == 2) {
                s = a / 2;
                r = a % 2;
            } else {
                r = a / nports;
                s = a % nports;
            }
            m(r, s) = c;
        }
        if (out.param == 'Z') m *= out.ref_ohms;  // stored normalized
        out.m.push_back(std::move(m));
    }
    return out;
}

TouchstoneData read_touchstone_file(const std::string& path) {
    int n = touchstone_port_count(path);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return read_touchstone_stream(f, n);
}

PriorData read_touchstone(const std::string& path,
                          std::shared_ptr<const PortTopology> topo) {
    int n = touchstone_port_count(path);
    if (n != topo->q())
        throw PortCountMismatch("file has " + std::to_string(n) +
                                " ports but topology has Q=" +
                                std::to_string(topo->q()));
    TouchstoneData data = read_touchstone_file(path);
    PriorData prior;
    prior.topo = std::move(topo);
    prior.freqs = data.freqs;
    if (data.param == 'Z') {
        prior.z = std::move(data.m);
    } else {
        NetworkResponse s;
        s.freqs = data.freqs;
        s.m = std::move(data.m);
        s.rep = Representation::S;
        s.ref_ohms = data.ref_ohms;
        prior.z = s_to_z(s, data.ref_ohms).m;
    }
    prior.validate();
    return prior;
}

void write_touchstone(std::ostream& out, const std::vector<double>& freqs,
                      const std::vector<Eigen::MatrixXcd>& m, char param,
                      double ref_ohms) {
    if (freqs.size() != m.size())
        throw DimensionMismatch("frequency/matrix count mismatch");
    if (param != 'S' && param != 'Z')
        throw UnsupportedFormat("can only write S or Z parameters");
    const int n = m.empty() ? 0 : static_cast<int>(m[0].rows());
    out.precision(17);
    out << "# HZ " << param << " RI R " << ref_ohms << "\n";
    for (size_t f = 0; f < freqs.size(); ++f) {
        Eigen::MatrixXcd data = m[f];
        if (data.rows() != n || data.cols() != n)
            throw DimensionMismatch("inconsistent matrix dimensions");
        if (param == 'Z') data /= ref_ohms;
        out << freqs[f];
        int pairs_on_line = 0;
        for (int a = 0; a < n * n; ++a) {
            int r, s;
            if (n == 2) {
                s = a / 2;
                r = a % 2;
            } else {
                r = a / n;
                s = a % n;
            }
            // v1: at most four complex pairs per line; matrix rows start on
            // a fresh line for n >= 3.
            if (a > 0 && (pairs_on_line == 4 || (n >= 3 && a % n == 0))) {
                out << "\n";
                pairs_on_line = 0;
            }
            out << ' ' << data(r, s).real() << ' ' << data(r, s).imag();
            ++pairs_on_line;
        }
        out << "\n";
    }
}

void write_touchstone(const std::string& path, const std::vector<double>& freqs,
                      const std::vector<Eigen::MatrixXcd>& m, char param,
                      double ref_ohms) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_touchstone(f, freqs, m, param, ref_ohms);
    if (!f.good()) throw IoError("write failed: " + path);
}

void write_touchstone(const std::string& path, const NetworkResponse& resp,
                      double ref_ohms) {
    double ref = resp.rep == Representation::S ? resp.ref_ohms : ref_ohms;
    write_touchstone(path, resp.freqs, resp.m,
                     resp.rep == Representation::S ? 'S' : 'Z', ref);
}

}  // namespace mapes
