// cfrelay: evaluate, optimize and sweep compress-and-forward relay rates.
//
// Exit codes: 0 success, 1 malformed input or usage error, 2 shape mismatch,
// 3 oracle disagreement (eval --oracle).

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfrelay/error.hpp"
#include "cfrelay/families.hpp"
#include "cfrelay/io.hpp"
#include "cfrelay/network_model.hpp"
#include "cfrelay/optimizer.hpp"
#include "cfrelay/oracles.hpp"
#include "cfrelay/rate_engine.hpp"

namespace {

using namespace cfrelay;
using io::Json;

constexpr int exit_ok = 0;
constexpr int exit_input = 1;
constexpr int exit_shape = 2;
constexpr int exit_oracle = 3;

constexpr const char* seed_env = "CFRELAY_SEED";
constexpr double oracle_tolerance = 1e-7;

std::uint64_t default_seed() {
    if (const char* s = std::getenv(seed_env)) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw InputError(std::string(seed_env) + " is not an unsigned integer");
        }
    }
    return 0;
}

std::vector<SubsetId> decode_sets_or_default(const std::vector<SubsetId>& requested, int n) {
    if (!requested.empty())
        return requested;
    if (n == 0)
        return {};
    return {full_set(n)};
}

std::string fixed(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(6) << v;
    return ss.str();
}

std::string vec_text(const RateVector& r) {
    std::string s = "[";
    for (std::size_t i = 0; i < r.size(); ++i)
        s += (i ? ", " : "") + fixed(r[i]);
    return s + "]";
}

void print_text(std::ostream& out, const RateReport& rep) {
    out << "relays               " << rep.relays << '\n';
    if (rep.classical_rate)
        out << "classical_rate       " << fixed(*rep.classical_rate)
            << (*rep.classical_feasible ? "  (feasible)" : "  (infeasible)") << '\n';
    if (rep.thm1_rate)
        out << "thm1_rate            " << fixed(*rep.thm1_rate)
            << (*rep.thm1_decodable ? "  (Yhat_1 decodable)" : "  (Yhat_1 not decodable)") << '\n';
    out << "thm2_rate            " << fixed(rep.thm2.rate) << "  R = " << vec_text(rep.thm2.rates) << '\n';
    out << "thm3_rate            " << fixed(rep.thm3.rate) << "  " << to_string(rep.thm3.status);
    if (rep.thm3.status == LpStatus::optimal)
        out << "  R = " << vec_text(rep.thm3.rates);
    out << '\n';
    out << "ceiling              " << fixed(rep.measures.ceiling) << '\n';
    for (const DecodingVerdict& v : rep.decoding) {
        out << "decode set " << v.set << "         thm2 " << (v.thm2.verdict ? "yes" : "no");
        if (v.thm2.verdict)
            out << " (rate " << fixed(v.thm2.rate) << ")";
        out << ", thm3 " << (v.thm3 ? "yes" : "no") << '\n';
    }
}

Json report_document(const RateReport& rep, const Json& inputs, const std::vector<SubsetId>& sets) {
    Json doc;
    doc["tool"] = "cfrelay";
    doc["version"] = io::tool_version;
    doc["inputs"] = inputs;
    doc["tolerances"] = io::tolerances_json();
    doc["decode_sets"] = sets;
    doc["report"] = io::to_json(rep);
    return doc;
}

struct EvalArgs {
    std::string network;
    std::string distribution;
    std::vector<SubsetId> decode_sets;
    bool oracle = false;
    std::string format = "json";
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    const std::string net_text = io::read_file(a.network);
    const std::string dist_text = io::read_file(a.distribution);
    const RelayNetworkSpec spec = io::parse_network(io::parse_json(net_text, a.network));
    const CodingDistribution dist = io::parse_distribution(io::parse_json(dist_text, a.distribution), spec);
    const JointModel model = build_joint(spec, dist);
    const auto sets = decode_sets_or_default(a.decode_sets, spec.relays);
    const RateReport rep = full_report(model, sets);

    Json doc = report_document(
        rep, {{"network", io::digest(net_text)}, {"distribution", io::digest(dist_text)}}, sets);

    int code = exit_ok;
    if (a.oracle) {
        Json checks = Json::array();
        double worst = 0.0;
        for (const auto& c : oracles::cross_check(model, rep, oracle_tolerance)) {
            worst = std::max(worst, std::abs(c.engine - c.oracle));
            if (!c.passed()) {
                code = exit_oracle;
                checks.push_back({{"quantity", c.quantity}, {"engine", c.engine}, {"oracle", c.oracle}});
            }
        }
        doc["oracle"] = {{"tolerance", oracle_tolerance}, {"passed", code == exit_ok}, {"failures", checks}};
        if (code != exit_ok)
            std::cerr << "cfrelay: oracle disagreement on " << checks.size() << " quantities\n";
    }

    if (!a.out.empty())
        io::write_report(a.out, doc);
    if (a.format == "text") {
        print_text(std::cout, rep);
        if (a.oracle)
            std::cout << "oracle               " << (code == exit_ok ? "agree" : "DISAGREE") << '\n';
    } else {
        std::cout << io::dump(doc);
    }
    return code;
}

struct OptimizeArgs {
    std::string network;
    std::string objective = "thm2";
    int restarts = 4;
    int iterations = 200;
    double tolerance = 1e-7;
    double fd_step = 1e-5;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::vector<SubsetId> decode_sets;
    std::string out;
};

int cmd_optimize(const OptimizeArgs& a) {
    const std::string net_text = io::read_file(a.network);
    const RelayNetworkSpec spec = io::parse_network(io::parse_json(net_text, a.network));
    OptimizerConfig cfg;
    const auto obj = parse_objective(a.objective);
    if (!obj)
        throw InputError("unknown objective " + a.objective);
    cfg.objective = *obj;
    if ((cfg.objective == Objective::classical || cfg.objective == Objective::thm1) && spec.relays > 1)
        throw ArityError("objective " + a.objective + " needs n <= 1");
    cfg.restarts = a.restarts;
    cfg.max_iterations = a.iterations;
    cfg.tolerance = a.tolerance;
    cfg.fd_step = a.fd_step;
    cfg.seed = a.seed ? *a.seed : default_seed();
    cfg.grid_steps = a.grid;

    const OptimizationResult res = optimize(spec, cfg);
    const JointModel model = build_joint(spec, res.best);
    const auto sets = decode_sets_or_default(a.decode_sets, spec.relays);
    const RateReport rep = full_report(model, sets);
    Json doc = report_document(rep, {{"network", io::digest(net_text)}}, sets);
    doc["optimization"] = io::to_json(res, cfg);

    if (!a.out.empty()) {
        io::write_distribution(a.out + ".dist.json", res.best, spec);
        io::write_report(a.out + ".report.json", doc);
    }
    std::cout << "objective " << to_string(cfg.objective) << '\n'
              << "seed " << cfg.seed << '\n'
              << "best_rate " << io::format_number(res.best_rate) << '\n';
    return exit_ok;
}

struct SweepArgs {
    std::string family;
    std::vector<double> params;
    double from = 0.0;
    double to = 0.5;
    int points = 0;
    std::string mode = "optimize";
    std::string objective = "thm2";
    int restarts = 2;
    int iterations = 200;
    std::optional<std::uint64_t> seed;
    families::FamilyOptions opts;
    std::string out;
};

int cmd_sweep(const SweepArgs& a) {
    const auto family = families::by_name(a.family, a.opts);
    if (!family) {
        std::string known;
        for (const auto& n : families::family_names())
            known += " " + n;
        throw InputError("unknown family \"" + a.family + "\"; known:" + known);
    }
    std::vector<double> grid = a.params;
    if (grid.empty()) {
        if (a.points < 1)
            throw InputError("give --params or --points >= 1");
        for (int k = 0; k < a.points; ++k)
            grid.push_back(a.points == 1 ? a.from : a.from + (a.to - a.from) * k / (a.points - 1));
    }
    OptimizerConfig cfg;
    const auto obj = parse_objective(a.objective);
    if (!obj)
        throw InputError("unknown objective " + a.objective);
    cfg.objective = *obj;
    cfg.restarts = a.restarts;
    cfg.max_iterations = a.iterations;
    cfg.seed = a.seed ? *a.seed : default_seed();
    if (a.mode != "optimize" && a.mode != "fixed")
        throw InputError("--mode must be optimize or fixed");
    const SweepMode mode = a.mode == "fixed" ? SweepMode::fixed : SweepMode::optimize;

    const auto rows = sweep(*family, grid, cfg, mode);
    for (const SweepRow& r : rows)
        if (r.error)
            std::cerr << "cfrelay: sweep point " << io::format_number(r.param) << ": " << *r.error << '\n';
    std::ostringstream csv;
    io::write_sweep_csv(csv, rows);
    if (a.out.empty())
        std::cout << csv.str();
    else
        io::write_file(a.out, csv.str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compress-and-forward relay rate evaluator"};
    app.require_subcommand(1);

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Evaluate every scheme for a network and distribution");
    eval->add_option("network", ev.network, "Network JSON")->required();
    eval->add_option("distribution", ev.distribution, "Distribution JSON")->required();
    eval->add_option("--decode-set", ev.decode_sets, "Relay subset bitmask(s) whose Yhat must be decoded");
    eval->add_flag("--oracle", ev.oracle, "Cross-check against the reference oracles (exit 3 on disagreement)");
    eval->add_option("--format", ev.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    eval->add_option("--out", ev.out, "Also write the report document here");

    OptimizeArgs op;
    auto* optimize_cmd = app.add_subcommand("optimize", "Maximize a scheme's rate over coding distributions");
    optimize_cmd->add_option("network", op.network, "Network JSON")->required();
    optimize_cmd->add_option("--objective", op.objective, "classical, thm1, thm2 or thm3");
    optimize_cmd->add_option("--restarts", op.restarts, "Restarts (first is uniform)");
    optimize_cmd->add_option("--iterations", op.iterations, "Max ascent cycles per restart");
    optimize_cmd->add_option("--tolerance", op.tolerance, "Stop when a cycle gains less (bits)");
    optimize_cmd->add_option("--fd-step", op.fd_step, "Finite-difference step");
    optimize_cmd->add_option("--seed", op.seed, std::string("Random seed (default $") + seed_env + " or 0)");
    optimize_cmd->add_option("--grid", op.grid, "Exhaustive grid with this many steps per axis");
    optimize_cmd->add_option("--decode-set", op.decode_sets, "Decode-set bitmask(s) for the report");
    optimize_cmd->add_option("--out", op.out, "Output prefix: writes PREFIX.dist.json and PREFIX.report.json");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep a built-in network family and write CSV");
    sweep_cmd->add_option("--family", sw.family, "bsc or orthogonal")->required();
    sweep_cmd->add_option("--params", sw.params, "Explicit parameter values")->delimiter(',');
    sweep_cmd->add_option("--from", sw.from, "Grid start");
    sweep_cmd->add_option("--to", sw.to, "Grid end");
    sweep_cmd->add_option("--points", sw.points, "Number of evenly spaced points");
    sweep_cmd->add_option("--mode", sw.mode, "optimize (default) or fixed");
    sweep_cmd->add_option("--objective", sw.objective, "Objective label for fixed mode");
    sweep_cmd->add_option("--restarts", sw.restarts, "Restarts per optimization");
    sweep_cmd->add_option("--iterations", sw.iterations, "Max ascent cycles per restart");
    sweep_cmd->add_option("--seed", sw.seed, std::string("Random seed (default $") + seed_env + " or 0)");
    sweep_cmd->add_option("--z0", sw.opts.z0, "orthogonal: source-destination flip probability");
    sweep_cmd->add_option("--z2", sw.opts.z2, "orthogonal: source-relay flip probability");
    sweep_cmd->add_option("--yhat", sw.opts.yhat_card, "orthogonal: compressed alphabet size");
    sweep_cmd->add_option("--out", sw.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_input;
    }

    try {
        if (*eval)
            return cmd_eval(ev);
        if (*optimize_cmd)
            return cmd_optimize(op);
        return cmd_sweep(sw);
    } catch (const ShapeError& e) {
        std::cerr << "cfrelay: shape mismatch: " << e.what() << '\n';
        return exit_shape;
    } catch (const std::exception& e) {
        std::cerr << "cfrelay: " << e.what() << '\n';
        return exit_input;
    }
}
