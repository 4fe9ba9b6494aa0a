// Command-line front end: model evaluation and score sweeps, entropy figure
// data, exponential geodesics, natural-gradient flows, Gibbs trajectories,
// tangent-system derivations, and the acceptance-suite runner.
//
// Exit codes: 0 success, 1 failed verify run or internal error, 2 config
// parse error, 3 model resolution failure, 4 unwritable output.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <sbundle/acceptance.hpp>
#include <sbundle/io.hpp>
#include <sbundle/models.hpp>
#include <sbundle/natural_gradient.hpp>
#include <sbundle/polynomial.hpp>
#include <sbundle/transport.hpp>

namespace {

using namespace sbundle;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;
constexpr int kExitOutput = 4;

struct ModelError : Error {
    using Error::Error;
};
struct OutputError : Error {
    using Error::Error;
};

double normalization_tolerance() {
    if (const char* env = std::getenv("SIMPLEX_BUNDLE_TOL")) {
        try {
            const double v = std::stod(env);
            if (v > 0) return v;
        } catch (...) {
        }
        throw ParseError("SIMPLEX_BUNDLE_TOL must be a positive number");
    }
    return tol::normalization;
}

// Distribution arguments are user config; validation failures are parse errors.
ProbabilityVector<double> distribution_from_cli(const std::string& arg, double norm_tol) {
    try {
        return distribution_from_json<double>(json_from_arg(arg), norm_tol);
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

// A table row as (column, text) pairs in column order.
using Row = std::vector<std::pair<std::string, std::string>>;

class TableWriter {
  public:
    TableWriter(const std::string& output_path, bool as_json)
        : as_json_(as_json), path_(output_path) {
        if (!path_.empty()) {
            file_.open(path_);
            if (!file_) throw OutputError("cannot open output '" + path_ + "'");
        }
    }

    void write(const std::vector<std::string>& header, const std::vector<Row>& rows) {
        std::ostream& out = path_.empty() ? std::cout : file_;
        if (as_json_) {
            json arr = json::array();
            for (const auto& row : rows) {
                json obj = json::object();
                for (const auto& [key, value] : row) obj[key] = value;
                arr.push_back(obj);
            }
            out << arr.dump(2) << "\n";
        } else {
            for (std::size_t i = 0; i < header.size(); ++i)
                out << (i ? "," : "") << header[i];
            out << "\n";
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i)
                    out << (i ? "," : "") << row[i].second;
                out << "\n";
            }
        }
        if (!path_.empty() && !file_) throw OutputError("write failed on '" + path_ + "'");
    }

  private:
    bool as_json_;
    std::string path_;
    std::ofstream file_;
};

// ---------------------------------------------------------------------------
// Model resolution
// ---------------------------------------------------------------------------

ZooCurve<double> resolve_zoo_model(const std::string& name, const std::string& params_arg,
                                   double norm_tol) {
    std::optional<MixtureSpec<double>> mixture;
    std::optional<GibbsSpec<double>> gibbs;
    if (!params_arg.empty()) {
        const json params = json_from_arg(params_arg);
        const auto values = [&params](const char* key) {
            const auto w = params.at(key).get<std::vector<double>>();
            Vector<double> v(static_cast<Index>(w.size()));
            for (std::size_t i = 0; i < w.size(); ++i) v[static_cast<Index>(i)] = w[i];
            return v;
        };
        if (name == "mixture") {
            if (!params.contains("p") || !params.contains("q"))
                throw ParseError("mixture params need \"p\" and \"q\"");
            const Vector<double> p = values("p");
            const Vector<double> q = values("q");
            const SampleSpace space =
                params.contains("labels")
                    ? SampleSpace(params.at("labels").get<std::vector<std::string>>())
                    : SampleSpace::numbered(p.size());
            mixture = MixtureSpec<double>(make_distribution(space, p, norm_tol),
                                          make_distribution(space, q, norm_tol));
        } else if (name == "gibbs") {
            if (!params.contains("U") || !params.contains("V"))
                throw ParseError("gibbs params need \"U\" and \"V\"");
            const Vector<double> u = values("U");
            const Vector<double> v = values("V");
            const SampleSpace space =
                params.contains("labels")
                    ? SampleSpace(params.at("labels").get<std::vector<std::string>>())
                    : SampleSpace::numbered(u.size());
            gibbs = GibbsSpec<double>(space, u, v);
        } else {
            throw ParseError("--params is only meaningful for the mixture and gibbs models");
        }
    }
    return make_zoo_curve<double>(name, mixture, gibbs);
}

// ---------------------------------------------------------------------------
// eval / score
// ---------------------------------------------------------------------------

void append_weight_columns(Row& row, const SampleSpace& space, const Vector<double>& w) {
    for (Index i = 0; i < space.size(); ++i)
        row.emplace_back("w_" + space.label(i), format_g17(w[i]));
}

std::vector<std::string> eval_header(const SampleSpace& space, bool with_score) {
    std::vector<std::string> header = {"t"};
    for (const auto& l : space.labels()) header.push_back("w_" + l);
    if (with_score) {
        for (const auto& l : space.labels()) header.push_back("vdot_" + l);
        for (const auto& l : space.labels()) header.push_back("s_" + l);
        header.push_back("fisher_info");
        header.push_back("determined_mask");
        header.push_back("status");
    }
    return header;
}

void append_score_columns(Row& row, const SampleSpace& space,
                          const std::optional<Vector<double>>& vel,
                          const std::optional<ScoreResult<double>>& sc,
                          const std::string& status) {
    for (Index i = 0; i < space.size(); ++i)
        row.emplace_back("vdot_" + space.label(i), vel ? format_g17((*vel)[i]) : "");
    for (Index i = 0; i < space.size(); ++i)
        row.emplace_back("s_" + space.label(i), sc ? format_g17(sc->score.score()[i]) : "");
    std::string info_text;
    if (sc) {
        double info = 0;
        for (Index i = 0; i < sc->base.size(); ++i)
            if (sc->base.in_support(i)) info += sc->base[i] * sc->score[i] * sc->score[i];
        info_text = format_g17(info);
    }
    row.emplace_back("fisher_info", info_text);
    row.emplace_back("determined_mask", sc ? sc->determined.to_string() : "");
    row.emplace_back("status", status);
}

int cmd_eval(const std::string& model, const std::string& grid_arg, const std::string& params_arg,
             bool with_score, const std::string& output, bool as_json) {
    const double norm_tol = normalization_tolerance();

    std::ifstream probe(model);
    const bool is_file = probe.good();
    probe.close();

    std::vector<Row> rows;
    std::vector<std::string> header;

    if (is_file) {
        // sampled table: evaluated at its own nodes
        const auto table = load_tabulated_curve<double>(model);
        header = eval_header(table.space, with_score);
        if (with_score && !table.uniform())
            throw ParseError("scores from a sampled table need uniform t spacing");
        for (std::size_t i = 0; i < table.ts.size(); ++i) {
            Row row;
            row.emplace_back("t", format_g17(table.ts[i]));
            const auto p = make_distribution(table.space, table.rows[i], norm_tol);
            append_weight_columns(row, table.space, p.weights());
            if (with_score) {
                if (i == 0 || i + 1 == table.ts.size()) {
                    append_score_columns(row, table.space, std::nullopt, std::nullopt,
                                         "out_of_domain");
                } else {
                    const Vector<double> vel = table.velocity_at(i);
                    try {
                        const auto sc = score_from(p, vel);
                        append_score_columns(row, table.space, vel, sc, "ok");
                    } catch (const AbsoluteContinuityViolation&) {
                        append_score_columns(row, table.space, vel, std::nullopt,
                                             "abs_continuity_violation");
                    }
                }
            }
            rows.push_back(std::move(row));
        }
    } else {
        ZooCurve<double> entry = [&] {
            try {
                return resolve_zoo_model(model, params_arg, norm_tol);
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ModelError(e.what());
            }
        }();
        if (grid_arg.empty()) throw ParseError("--grid is required for zoo models");
        header = eval_header(entry.curve.space, with_score);
        for (const double t : parse_grid(grid_arg)) {
            Row row;
            row.emplace_back("t", format_g17(t));
            std::string status = "ok";
            std::optional<ProbabilityVector<double>> p;
            std::optional<Vector<double>> vel;
            std::optional<ScoreResult<double>> sc;
            try {
                p = entry.curve.at(t, norm_tol);
                if (with_score) {
                    vel = velocity(entry.curve, t).values();
                    sc = score_from(*p, *vel);
                }
            } catch (const OutOfDomain&) {
                status = "out_of_domain";
            } catch (const AbsoluteContinuityViolation&) {
                status = "abs_continuity_violation";
            }
            if (p) {
                append_weight_columns(row, entry.curve.space, p->weights());
            } else {
                for (Index i = 0; i < entry.curve.space.size(); ++i)
                    row.emplace_back("w_" + entry.curve.space.label(i), "");
            }
            if (with_score) append_score_columns(row, entry.curve.space, vel, sc, status);
            rows.push_back(std::move(row));
        }
    }

    TableWriter(output, as_json).write(header, rows);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// entropy figures
// ---------------------------------------------------------------------------

void write_entropy_heatmap(int resolution, const std::string& output, bool as_json) {
    if (resolution < 2) throw ParseError("--resolution must be at least 2");
    const SampleSpace space = SampleSpace::numbered(3);
    std::vector<Row> rows;
    rows.reserve(static_cast<std::size_t>(resolution) * resolution);
    for (int i = 0; i < resolution; ++i) {
        const double w1 = static_cast<double>(i) / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            const double w2 = (1.0 - w1) * static_cast<double>(j) / (resolution - 1);
            const double w3 = std::max(0.0, 1.0 - w1 - w2);
            Vector<double> w(3);
            w << w1, w2, w3;
            const double h = entropy(make_distribution(space, w));
            Row row;
            row.emplace_back("w1", format_g17(w1));
            row.emplace_back("w2", format_g17(w2));
            row.emplace_back("w3", format_g17(w3));
            row.emplace_back("H", format_g17(h));
            rows.push_back(std::move(row));
        }
    }
    TableWriter(output, as_json).write({"w1", "w2", "w3", "H"}, rows);
}

void write_entropy_production(const std::string& grid_arg, const std::string& output,
                              bool as_json) {
    const auto curve = entropy_curve<double>();
    std::vector<Row> rows;
    for (const double t : parse_grid(grid_arg)) {
        Row row;
        row.emplace_back("t", format_g17(t));
        row.emplace_back("dHdt", format_g17(entropy_production(curve, t)));
        rows.push_back(std::move(row));
    }
    TableWriter(output, as_json).write({"t", "dHdt"}, rows);
}

int cmd_entropy(bool heatmap, bool production, int resolution, const std::string& grid_arg,
                const std::string& output, bool as_json) {
    const std::string grid = grid_arg.empty() ? "0.11:0.79:200" : grid_arg;
    if (heatmap && production)
        throw ParseError("choose one of --heatmap / --production per invocation");
    if (heatmap) {
        write_entropy_heatmap(resolution, output, as_json);
    } else if (production) {
        write_entropy_production(grid, output, as_json);
    } else {
        // no flag: write both figure files
        write_entropy_heatmap(resolution,
                              output.empty() ? "entropy_heatmap.csv" : output + ".heatmap.csv",
                              as_json);
        write_entropy_production(
            grid, output.empty() ? "entropy_production.csv" : output + ".production.csv",
            as_json);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// geodesic
// ---------------------------------------------------------------------------

int cmd_geodesic(const std::string& base_arg, const std::string& direction_arg,
                 const std::string& grid_arg, const std::string& output, bool as_json) {
    const double norm_tol = normalization_tolerance();
    const auto base = distribution_from_cli(base_arg, norm_tol);
    const auto dir_values = json_from_arg(direction_arg).get<std::vector<double>>();
    if (static_cast<Index>(dir_values.size()) != base.size())
        throw ParseError("direction length does not match the base distribution");
    Vector<double> raw(base.size());
    for (Index i = 0; i < base.size(); ++i) raw[i] = dir_values[static_cast<std::size_t>(i)];
    // the direction is centred into the fibre at the base point
    const ExpGeodesic<double> g(base, center(raw, base));

    std::vector<std::string> header = {"t"};
    for (const auto& l : base.space().labels()) header.push_back("w_" + l);
    header.push_back("psi");
    header.push_back("kl_check");

    std::vector<Row> rows;
    for (const double t : parse_grid(grid_arg)) {
        const auto q = g.point(t);
        Row row;
        row.emplace_back("t", format_g17(t));
        append_weight_columns(row, base.space(), q.weights());
        const double psi = g.psi(t);
        row.emplace_back("psi", format_g17(psi));
        row.emplace_back("kl_check", format_g17(std::abs(psi - kl(base, q))));
        rows.push_back(std::move(row));
    }
    TableWriter(output, as_json).write(header, rows);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

int cmd_flow(const std::string& functional, const std::string& g_arg, const std::string& p0_arg,
             double step, int steps, const std::string& direction, const std::string& output,
             bool as_json) {
    const double norm_tol = normalization_tolerance();
    const auto p0 = distribution_from_cli(p0_arg, norm_tol);

    Functional<double> g;
    if (functional == "entropy") {
        g = entropy_functional<double>();
    } else if (functional == "expectation") {
        if (g_arg.empty()) throw ParseError("--g is required for the expectation functional");
        const auto values = json_from_arg(g_arg).get<std::vector<double>>();
        if (static_cast<Index>(values.size()) != p0.size())
            throw ParseError("--g length does not match --p0");
        Vector<double> stat(p0.size());
        for (Index i = 0; i < p0.size(); ++i) stat[i] = values[static_cast<std::size_t>(i)];
        g = expectation_functional(stat);
    } else {
        throw ParseError("unknown functional '" + functional + "' (entropy | expectation)");
    }
    FlowDirection dir;
    if (direction == "ascent") {
        dir = FlowDirection::Ascent;
    } else if (direction == "descent") {
        dir = FlowDirection::Descent;
    } else {
        throw ParseError("--direction must be ascent or descent");
    }

    const auto traj = natural_gradient_flow(g, p0, step, steps, dir);

    std::vector<std::string> header = {"k", "t"};
    for (const auto& l : p0.space().labels()) header.push_back("w_" + l);
    header.push_back("G_value");
    header.push_back("grad_norm");

    std::vector<Row> rows;
    for (std::size_t k = 0; k < traj.points.size(); ++k) {
        const auto& pt = traj.points[k];
        Row row;
        row.emplace_back("k", std::to_string(k));
        row.emplace_back("t", format_g17(pt.t));
        append_weight_columns(row, p0.space(), pt.point.weights());
        row.emplace_back("G_value", format_g17(pt.value));
        row.emplace_back("grad_norm", format_g17(pt.grad_norm));
        rows.push_back(std::move(row));
    }
    TableWriter(output, as_json).write(header, rows);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gibbs figure
// ---------------------------------------------------------------------------

int cmd_gibbs(const std::string& beta_arg, const std::string& params_arg,
              const std::string& output, bool as_json) {
    const double norm_tol = normalization_tolerance();
    ZooCurve<double> entry = [&] {
        try {
            return resolve_zoo_model("gibbs", params_arg, norm_tol);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ModelError(e.what());
        }
    }();

    std::vector<std::string> header = {"beta"};
    for (const auto& l : entry.curve.space.labels()) header.push_back("w_" + l);

    std::vector<Row> rows;
    for (const double beta : parse_grid(beta_arg)) {
        Row row;
        row.emplace_back("beta", format_g17(beta));
        append_weight_columns(row, entry.curve.space, entry.curve.eval(beta));
        rows.push_back(std::move(row));
    }
    TableWriter(output, as_json).write(header, rows);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

int cmd_algebra(const std::string& model_file, const std::string& labels_arg,
                const std::string& output) {
    std::vector<std::string> labels;
    {
        std::stringstream ss(labels_arg);
        std::string item;
        while (std::getline(ss, item, ',')) labels.push_back(item);
    }
    if (labels.empty()) throw ParseError("--labels needs a comma-separated cell list");
    const SampleSpace space(labels);
    const RingPtr ring = PolynomialRing::score_ring(space);

    std::ifstream in(model_file);
    if (!in) throw ModelError("cannot open model file '" + model_file + "'");
    std::vector<RationalPolynomial> model;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        model.push_back(parse_polynomial(ring, line));
    }

    std::ofstream file;
    if (!output.empty()) {
        file.open(output);
        if (!file) throw OutputError("cannot open output '" + output + "'");
    }
    std::ostream& out = output.empty() ? std::cout : file;

    out << "# model\n";
    for (const auto& f : model) out << f.to_string() << "\n";
    out << "# tangent system\n";
    for (const auto& f : model_tangent_system(model, space)) out << f.to_string() << "\n";
    out << "# binomial score relations\n";
    for (const auto& f : model) {
        if (const auto binomial = as_binomial(f)) {
            const auto relation =
                binomial_score_relation(space, binomial->first, binomial->second);
            out << f.to_string() << "  =>  " << relation.to_string() << " = 0\n";
        }
    }
    if (!output.empty() && !file) throw OutputError("write failed on '" + output + "'");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::vector<std::string>& only, std::uint64_t seed) {
    const auto known = acceptance::check_names();
    for (const auto& name : only)
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ParseError("unknown check '" + name + "'");
    const auto results = acceptance::run_checks(seed, only);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %-22s %s (expected: %s) [%.2fs]\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured.c_str(), r.expected.c_str(), r.seconds);
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Information geometry of the closed probability simplex: support-aware "
        "Fisher scores, exponential geodesics, natural-gradient flows, and exact "
        "score-equation derivation.\n"
        "The SIMPLEX_BUNDLE_TOL environment variable overrides the normalization "
        "tolerance used when validating distributions and curve samples."};
    app.require_subcommand(1);

    std::string model, grid, params, output, base, direction_json, p0, g_arg;
    std::string functional = "entropy", flow_direction = "ascent", labels, model_file;
    std::string format = "csv";
    bool with_score = false, heatmap = false, production = false;
    int resolution = 100, steps = 100;
    double step = 0.5;
    std::vector<std::string> only;
    std::uint64_t seed = 42;

    const auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("-o,--output", output, "output file (default: stdout)");
        cmd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    };

    auto* eval = app.add_subcommand("eval", "evaluate a model over a parameter grid");
    eval->add_option("--model", model, "zoo model name or sampled-table CSV path")->required();
    eval->add_option("--grid", grid, "min:max:n (inclusive) or comma list");
    eval->add_option("--params", params, "JSON parameter block for mixture/gibbs");
    eval->add_flag("--with-score", with_score, "append velocity, score and Fisher information");
    add_output(eval);

    auto* score_cmd = app.add_subcommand("score", "eval with score columns");
    score_cmd->add_option("--model", model)->required();
    score_cmd->add_option("--grid", grid);
    score_cmd->add_option("--params", params);
    add_output(score_cmd);

    auto* entropy_cmd =
        app.add_subcommand("entropy", "entropy figure data for the 3-cell simplex");
    entropy_cmd->add_flag("--heatmap", heatmap, "barycentric heat-map grid (w1,w2,w3,H)");
    entropy_cmd->add_flag("--production", production, "production curve (t,dHdt) of entropy3");
    entropy_cmd->add_option("--resolution", resolution, "heat-map resolution R (R^2 rows)");
    entropy_cmd->add_option("--grid", grid, "production t-grid (default 0.11:0.79:200)");
    add_output(entropy_cmd);

    auto* geodesic_cmd = app.add_subcommand("geodesic", "exponential geodesic sweep");
    geodesic_cmd->add_option("--base", base, "distribution JSON (inline or file)")->required();
    geodesic_cmd
        ->add_option("--direction", direction_json,
                     "JSON array; centred into the fibre at the base")
        ->required();
    geodesic_cmd->add_option("--grid", grid, "t grid")->required();
    add_output(geodesic_cmd);

    auto* flow_cmd = app.add_subcommand("flow", "natural-gradient flow");
    flow_cmd->add_option("--functional", functional, "entropy | expectation");
    flow_cmd->add_option("--g", g_arg, "JSON array for the expectation functional");
    flow_cmd->add_option("--p0", p0, "starting distribution JSON")->required();
    flow_cmd->add_option("--step", step, "initial step length");
    flow_cmd->add_option("--steps", steps, "maximum iterations");
    flow_cmd->add_option("--direction", flow_direction, "ascent | descent");
    add_output(flow_cmd);

    auto* gibbs_cmd = app.add_subcommand("gibbs", "Gibbs trajectory data");
    gibbs_cmd->add_option("--beta", grid, "beta grid (default -3:3:601)");
    gibbs_cmd->add_option("--params", params, "JSON {\"U\": [...], \"V\": [...]}");
    add_output(gibbs_cmd);

    auto* algebra_cmd =
        app.add_subcommand("algebra", "tangent system and score relations of a model file");
    algebra_cmd->add_option("--model-file", model_file, "one polynomial per line")->required();
    algebra_cmd->add_option("--labels", labels, "comma-separated cell labels")->required();
    algebra_cmd->add_option("-o,--output", output, "output file (default: stdout)");

    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
    verify_cmd->add_option("--only", only, "run only the named checks");
    verify_cmd->add_option("--seed", seed, "seed for randomized checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (eval->parsed())
            return cmd_eval(model, grid, params, with_score, output, format == "json");
        if (score_cmd->parsed())
            return cmd_eval(model, grid, params, true, output, format == "json");
        if (entropy_cmd->parsed())
            return cmd_entropy(heatmap, production, resolution, grid, output, format == "json");
        if (geodesic_cmd->parsed())
            return cmd_geodesic(base, direction_json, grid, output, format == "json");
        if (flow_cmd->parsed())
            return cmd_flow(functional, g_arg, p0, step, steps, flow_direction, output,
                            format == "json");
        if (gibbs_cmd->parsed())
            return cmd_gibbs(grid.empty() ? "-3:3:601" : grid, params, output, format == "json");
        if (algebra_cmd->parsed()) return cmd_algebra(model_file, labels, output);
        if (verify_cmd->parsed()) return cmd_verify(only, seed);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const OutputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOutput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitConfig;
}
