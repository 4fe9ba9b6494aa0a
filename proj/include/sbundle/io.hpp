#pragma once

// Serialization helpers shared by the CLI and the test harness:
//   * the distribution JSON schema {"labels": [...], "weights": [...]};
//   * CSV numbers with 17 significant digits so files round-trip bit-exact;
//   * inclusive grids "min:max:n" or explicit comma lists;
//   * sampled curve tables, CSV with header t,w_<label1>,...,w_<labeld>.

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbundle/curves.hpp"
#include "sbundle/errors.hpp"
#include "sbundle/simplex.hpp"

namespace sbundle {

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// ============================================================================
// Distribution JSON
// ============================================================================

template <typename Scalar = double>
ProbabilityVector<Scalar> distribution_from_json(const nlohmann::json& j,
                                                 Scalar normalization_tol = Scalar(tol::normalization)) {
    if (!j.is_object() || !j.contains("labels") || !j.contains("weights"))
        throw ParseError("distribution JSON needs \"labels\" and \"weights\"");
    std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
    std::vector<double> w = j.at("weights").get<std::vector<double>>();
    if (labels.size() != w.size()) throw ParseError("labels/weights length mismatch");
    SampleSpace space(std::move(labels));
    Vector<Scalar> weights(static_cast<Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) weights[static_cast<Index>(i)] = Scalar(w[i]);
    return make_distribution(space, weights, normalization_tol);
}

template <typename Scalar>
nlohmann::json distribution_to_json(const ProbabilityVector<Scalar>& p) {
    nlohmann::json j;
    j["labels"] = p.space().labels();
    std::vector<double> w(static_cast<std::size_t>(p.size()));
    for (Index i = 0; i < p.size(); ++i) w[static_cast<std::size_t>(i)] = static_cast<double>(p[i]);
    j["weights"] = w;
    return j;
}

// Accepts inline JSON (text starting with '{') or a file path.
inline nlohmann::json json_from_arg(const std::string& arg) {
    std::string text = arg;
    if (text.empty()) throw ParseError("empty JSON argument");
    if (text.front() != '{' && text.front() != '[') {
        std::ifstream in(arg);
        if (!in) throw ParseError("cannot open JSON file '" + arg + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("bad JSON: ") + e.what());
    }
}

// ============================================================================
// Grids
// ============================================================================

// "min:max:n" inclusive of both ends (n = 1 means the single point min and
// requires min = max), or an explicit comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
    const auto parse_num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw ParseError("bad number '" + s + "' in grid");
            return v;
        } catch (const std::invalid_argument&) {
            throw ParseError("bad number '" + s + "' in grid");
        } catch (const std::out_of_range&) {
            throw ParseError("number out of range '" + s + "' in grid");
        }
    };
    std::vector<std::string> parts;
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);

    if (sep == ':') {
        if (parts.size() != 3) throw ParseError("grid must be min:max:n, got '" + text + "'");
        const double lo = parse_num(parts[0]);
        const double hi = parse_num(parts[1]);
        const double n_raw = parse_num(parts[2]);
        const long n = static_cast<long>(n_raw);
        if (n < 1 || static_cast<double>(n) != n_raw)
            throw ParseError("grid count must be a positive integer");
        if (n == 1) {
            if (lo != hi) throw ParseError("grid with n = 1 requires min = max");
            return {lo};
        }
        if (hi < lo) throw ParseError("grid requires min <= max");
        std::vector<double> grid(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i)
            grid[static_cast<std::size_t>(i)] =
                lo + (static_cast<double>(i) * (hi - lo)) / static_cast<double>(n - 1);
        return grid;
    }
    if (parts.empty()) throw ParseError("empty grid");
    std::vector<double> grid;
    grid.reserve(parts.size());
    for (const auto& p : parts) grid.push_back(parse_num(p));
    return grid;
}

// ============================================================================
// Sampled curve tables
// ============================================================================

// A curve given by rows (t_i, w_i). Velocities come from central differences
// on the samples, which requires uniform spacing; scores are defined at
// interior nodes only.
template <typename Scalar = double>
struct TabulatedCurve {
    SampleSpace space;
    std::vector<Scalar> ts;
    std::vector<Vector<Scalar>> rows;

    bool uniform() const {
        if (ts.size() < 3) return true;
        const Scalar h = ts[1] - ts[0];
        for (std::size_t i = 2; i < ts.size(); ++i)
            if (std::abs((ts[i] - ts[i - 1]) - h) > Scalar(1e-9) * std::max(Scalar(1), std::abs(h)))
                return false;
        return true;
    }

    Vector<Scalar> velocity_at(std::size_t i) const {
        if (i == 0 || i + 1 >= ts.size())
            throw OutOfDomain("tabulated velocity needs an interior node");
        const Scalar h2 = ts[i + 1] - ts[i - 1];
        return ((rows[i + 1] - rows[i - 1]) / h2).eval();
    }
};

template <typename Scalar = double>
TabulatedCurve<Scalar> load_tabulated_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open curve table '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty curve table '" + path + "'");

    const auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
    };
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "t")
        throw ParseError("curve table header must be t,w_<label>,...");
    std::vector<std::string> labels;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i].rfind("w_", 0) != 0)
            throw ParseError("bad curve table column '" + header[i] + "'");
        labels.push_back(header[i].substr(2));
    }

    TabulatedCurve<Scalar> table{SampleSpace(std::move(labels)), {}, {}};
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw ParseError("row " + std::to_string(lineno) + " has " +
                             std::to_string(cells.size()) + " columns");
        table.ts.push_back(Scalar(std::stod(cells[0])));
        Vector<Scalar> w(table.space.size());
        for (Index i = 0; i < table.space.size(); ++i)
            w[i] = Scalar(std::stod(cells[static_cast<std::size_t>(i) + 1]));
        table.rows.push_back(std::move(w));
    }
    if (table.ts.size() < 2) throw ParseError("curve table needs at least two rows");
    return table;
}

}  // namespace sbundle
